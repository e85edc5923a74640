#pragma once

#include <numeric>
#include <vector>

#include "selinv/common.hpp"

namespace selinv {

/// Bijection on [0, n); perm[old] = new. As a matrix, P has P(perm[i], i) = 1,
/// so (P x)_{perm[i]} = x_i.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<index_t> perm) : perm_(std::move(perm)) {
    validate();
  }

  static Permutation identity(index_t n) {
    std::vector<index_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    return Permutation(std::move(p));
  }

  index_t size() const { return static_cast<index_t>(perm_.size()); }
  index_t operator[](index_t i) const { return perm_[i]; }
  const std::vector<index_t>& vec() const { return perm_; }

  const std::vector<index_t>& inverse() const {
    if (inv_.empty() && !perm_.empty()) {
      inv_.resize(perm_.size());
      for (index_t i = 0; i < size(); ++i) inv_[perm_[i]] = i;
    }
    return inv_;
  }

  Permutation inverted() const { return Permutation(inverse()); }

  bool is_identity() const {
    for (index_t i = 0; i < size(); ++i)
      if (perm_[i] != i) return false;
    return true;
  }

 private:
  void validate() const {
    std::vector<char> seen(perm_.size(), 0);
    for (index_t v : perm_) {
      if (v < 0 || v >= size() || seen[v])
        throw std::invalid_argument("Permutation: not a bijection on [0, n)");
      seen[v] = 1;
    }
  }

  std::vector<index_t> perm_;
  mutable std::vector<index_t> inv_;
};

}  // namespace selinv
