#pragma once

#include <cctype>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "selinv/csc.hpp"

namespace selinv {

namespace detail {

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

template <class T>
struct mm_value;

template <>
struct mm_value<double> {
  static constexpr const char* field = "real";
  static bool parse(std::istringstream& ls, const std::string& field_kind, double& out) {
    if (field_kind == "pattern") {
      out = 1.0;
      return true;
    }
    if (field_kind == "complex") return false;  // cannot narrow to real
    return static_cast<bool>(ls >> out);
  }
  static void write(std::ostream& os, double v) { os << v; }
};

template <>
struct mm_value<std::complex<double>> {
  static constexpr const char* field = "complex";
  static bool parse(std::istringstream& ls, const std::string& field_kind,
                    std::complex<double>& out) {
    if (field_kind == "pattern") {
      out = 1.0;
      return true;
    }
    double re = 0, im = 0;
    if (!(ls >> re)) return false;
    if (field_kind == "complex" && !(ls >> im)) return false;
    out = {re, im};
    return true;
  }
  static void write(std::ostream& os, std::complex<double> v) {
    os << v.real() << ' ' << v.imag();
  }
};

}  // namespace detail

/// Reads a Matrix Market coordinate file. Symmetric storage is expanded to
/// general, pattern entries get value 1, duplicates are summed. Indices are
/// 1-based on disk, 0-based in memory.
template <class T>
CscMatrix<T> mm_read(std::istream& in) {
  using detail::lower;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError("mm_read: empty stream", 1);
  ++lineno;
  std::istringstream hs(line);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix")
    throw ParseError("mm_read: malformed MatrixMarket banner", lineno);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (format != "coordinate")
    throw ParseError("mm_read: only coordinate format is supported", lineno);
  if (field != "real" && field != "complex" && field != "integer" && field != "pattern")
    throw ParseError("mm_read: unsupported field '" + field + "'", lineno);
  if (symmetry != "general" && symmetry != "symmetric")
    throw ParseError("mm_read: unsupported symmetry '" + symmetry + "'", lineno);

  // size line (skipping comments / blank lines)
  index_t n_rows = 0, n_cols = 0;
  long long nnz_decl = 0;
  for (;;) {
    if (!std::getline(in, line)) throw ParseError("mm_read: missing size line", lineno + 1);
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ss(line);
    if (!(ss >> n_rows >> n_cols >> nnz_decl) || n_rows < 0 || n_cols < 0 || nnz_decl < 0)
      throw ParseError("mm_read: malformed size line", lineno);
    break;
  }

  std::vector<std::tuple<index_t, index_t, T>> trips;
  trips.reserve(static_cast<std::size_t>(nnz_decl));
  long long seen = 0;
  while (seen < nnz_decl) {
    if (!std::getline(in, line))
      throw ParseError("mm_read: fewer entries than declared", lineno + 1);
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ls(line);
    long long r1 = 0, c1 = 0;
    if (!(ls >> r1 >> c1)) throw ParseError("mm_read: malformed entry", lineno);
    T v{};
    if (!detail::mm_value<T>::parse(ls, field, v))
      throw ParseError("mm_read: malformed value", lineno);
    if (r1 < 1 || r1 > n_rows || c1 > n_cols || c1 < 1)
      throw ParseError("mm_read: index out of bounds", lineno);
    index_t r = static_cast<index_t>(r1 - 1), c = static_cast<index_t>(c1 - 1);
    trips.emplace_back(r, c, v);
    if (symmetry == "symmetric" && r != c) trips.emplace_back(c, r, v);
    ++seen;
  }
  return CscMatrix<T>::from_triplets(n_rows, n_cols, std::move(trips));
}

template <class T>
void mm_write(const CscMatrix<T>& a, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate " << detail::mm_value<T>::field << " general\n";
  out << a.n_rows << ' ' << a.n_cols << ' ' << a.nnz() << '\n';
  out << std::setprecision(17);
  for (index_t j = 0; j < a.n_cols; ++j) {
    for (index_t k = a.col_ptr[j]; k < a.col_ptr[j + 1]; ++k) {
      out << (a.row_idx[k] + 1) << ' ' << (j + 1) << ' ';
      detail::mm_value<T>::write(out, a.values[k]);
      out << '\n';
    }
  }
  if (!out) throw std::runtime_error("mm_write: sink write failure");
}

}  // namespace selinv
