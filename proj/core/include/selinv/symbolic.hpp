#pragma once

#include <vector>

#include "selinv/csc.hpp"
#include "selinv/permutation.hpp"

namespace selinv {

/// Boolean CSC pattern of A + A^T with a full diagonal. Symmetric by
/// construction: (i,j) present iff (j,i) present.
struct SymPattern {
  index_t n = 0;
  std::vector<index_t> col_ptr;
  std::vector<index_t> row_idx;

  index_t nnz() const { return static_cast<index_t>(row_idx.size()); }
  bool has(index_t i, index_t j) const;
};

/// Contiguous partition of [0, n) into supernodes.
struct SupernodePartition {
  std::vector<index_t> first_col;  // length count()+1; first_col.back() == n
  std::vector<index_t> col_to_snode;

  index_t count() const { return static_cast<index_t>(first_col.size()) - 1; }
  index_t begin(index_t k) const { return first_col[k]; }
  index_t end(index_t k) const { return first_col[k + 1]; }
  index_t size(index_t k) const { return first_col[k + 1] - first_col[k]; }
  index_t n() const { return first_col.back(); }

  static SupernodePartition from_first_cols(std::vector<index_t> first, index_t n);
  static SupernodePartition singletons(index_t n);
};

/// Block nonzero structure of L and U per supernode. The analysis runs on the
/// symmetrized pattern, so the U structure is the block transpose of the L
/// structure and per-block column lists mirror the row lists.
struct FillPattern {
  struct Block {
    index_t block;                // block row (L) / block column (U) index
    std::vector<index_t> indices; // global scalar row (L) / column (U) indices
  };
  std::vector<std::vector<Block>> l_blocks;  // per supernode K: C_L(K), ascending
  std::vector<std::vector<Block>> u_blocks;  // per supernode K: C_U(K), ascending

  index_t count() const { return static_cast<index_t>(l_blocks.size()); }
  const Block* find_l(index_t k, index_t i) const;
  const Block* find_u(index_t k, index_t j) const;
  bool block_stored(index_t i, index_t j) const;  // any (I,J), incl. diagonal

  /// Stored scalar entries of the factors, counting the dense diagonal blocks
  /// once (the |L+U| bookkeeping metric).
  std::uint64_t stored_nnz(const SupernodePartition& part) const;
};

struct EliminationTree {
  static constexpr index_t kNoParent = -1;
  std::vector<index_t> parent;     // supernode -> parent supernode or -1
  std::vector<index_t> depth;      // root depth 0
  std::vector<index_t> postorder;  // valid topological order, children first

  index_t count() const { return static_cast<index_t>(parent.size()); }
  index_t tree_depth() const;  // max depth + 1 (0 for empty forest)
};

struct RelaxParams {
  index_t max_snode_size = 64;
  index_t max_extra_zeros_per_col = 8;
};

SymPattern symmetrize_pattern_raw(index_t n_rows, index_t n_cols,
                                  const std::vector<index_t>& col_ptr,
                                  const std::vector<index_t>& row_idx);

template <class T>
SymPattern symmetrize_pattern(const CscMatrix<T>& a) {
  return symmetrize_pattern_raw(a.n_rows, a.n_cols, a.col_ptr, a.row_idx);
}

/// Pattern of the permuted matrix: entry (i,j) moves to (perm[i], perm[j]).
SymPattern permute_pattern(const SymPattern& s, const Permutation& perm);

/// Minimum-degree ordering with deterministic lowest-index tie-breaking.
/// Returns old index -> elimination position.
Permutation fill_reducing_order(const SymPattern& s);

SupernodePartition detect_supernodes(const SymPattern& s, const Permutation& perm,
                                     const RelaxParams& relax);

FillPattern symbolic_factorize(const SymPattern& s, const Permutation& perm,
                               const SupernodePartition& part);

EliminationTree elimination_tree(const FillPattern& fill, const SupernodePartition& part);

}  // namespace selinv
