#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace selinv {

using index_t = std::int32_t;

template <class T>
struct scalar_traits {
  using real_type = T;
  static constexpr bool is_complex = false;
  static real_type abs(T v) { return v < 0 ? -v : v; }
};

template <class R>
struct scalar_traits<std::complex<R>> {
  using real_type = R;
  static constexpr bool is_complex = true;
  static real_type abs(std::complex<R> v) { return std::abs(v); }
};

/// Flop accounting convention: a scalar multiply-add counts 2, a division 1,
/// regardless of real/complex arithmetic.
struct FlopCounter {
  std::uint64_t factor_flops = 0;
  std::uint64_t selinv_flops = 0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t line)
      : std::runtime_error(msg + " at line " + std::to_string(line)), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class SingularError : public std::runtime_error {
 public:
  SingularError(const std::string& what, index_t index)
      : std::runtime_error(what + " (index " + std::to_string(index) + ")"),
        index_(index) {}
  index_t index() const { return index_; }

 private:
  index_t index_;
};

// splitmix64; used for all seeded choices so results do not depend on the
// standard library's hash or RNG implementation.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2)));
}

}  // namespace selinv
