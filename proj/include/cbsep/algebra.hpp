#pragma once

// Finite-dimensional C*-algebras A = M_{n_1} (+) ... (+) M_{n_r} and elements
// of A, and of A (x) B stored blockwise. A (x) B decomposes over block pairs
// (k, l) into M_{n_k} (x) M_{m_l}; the central projections z_k (x) w_l pick
// out the parts.

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "cbsep/matcore.hpp"

namespace cbsep {

class FdAlgebra {
 public:
  FdAlgebra() : blocks_{1} {}

  explicit FdAlgebra(std::vector<Index> blocks, Index cap = kDefaultDimCap)
      : blocks_(std::move(blocks)) {
    if (blocks_.empty()) throw PreconditionError("FdAlgebra: block list is empty");
    Index total = 0;
    for (Index n : blocks_) {
      if (n <= 0)
        throw PreconditionError("FdAlgebra: block dimension " + std::to_string(n) +
                                " is not positive");
      total += n * n;
      if (total > cap)
        throw SizeError("FdAlgebra: total dimension exceeds cap " + std::to_string(cap));
    }
  }

  [[nodiscard]] const std::vector<Index>& blocks() const { return blocks_; }
  [[nodiscard]] std::size_t num_blocks() const { return blocks_.size(); }
  [[nodiscard]] Index block(std::size_t k) const { return blocks_.at(k); }

  /// Largest irreducible representation dimension, max_k n_k.
  [[nodiscard]] Index rank() const { return *std::max_element(blocks_.begin(), blocks_.end()); }

  /// First block attaining the rank.
  [[nodiscard]] std::size_t max_rank_block() const {
    return static_cast<std::size_t>(
        std::max_element(blocks_.begin(), blocks_.end()) - blocks_.begin());
  }

  /// sum_k n_k^2
  [[nodiscard]] Index dimension() const {
    return std::accumulate(blocks_.begin(), blocks_.end(), Index{0},
                           [](Index acc, Index n) { return acc + n * n; });
  }

  /// sum_k n_k, the size of the block-diagonal representation.
  [[nodiscard]] Index representation_size() const {
    return std::accumulate(blocks_.begin(), blocks_.end(), Index{0});
  }

  [[nodiscard]] Index offset(std::size_t k) const {
    return std::accumulate(blocks_.begin(), blocks_.begin() + static_cast<long>(k), Index{0});
  }

  friend bool operator==(const FdAlgebra&, const FdAlgebra&) = default;

 private:
  std::vector<Index> blocks_;
};

inline Index rank(const FdAlgebra& a) { return a.rank(); }

inline std::string to_string(const FdAlgebra& a) {
  std::string s = "(";
  for (std::size_t k = 0; k < a.num_blocks(); ++k) {
    if (k) s += ",";
    s += std::to_string(a.block(k));
  }
  return s + ")";
}

// ---------------------------------------------------------------------------

struct AlgebraElement {
  FdAlgebra algebra;
  std::vector<CMatrix> parts;

  AlgebraElement(FdAlgebra alg, std::vector<CMatrix> ps) : algebra(std::move(alg)), parts(std::move(ps)) {
    if (parts.size() != algebra.num_blocks())
      throw ShapeError("AlgebraElement: " + std::to_string(parts.size()) + " parts for " +
                       std::to_string(algebra.num_blocks()) + " blocks");
    for (std::size_t k = 0; k < parts.size(); ++k)
      if (parts[k].rows() != algebra.block(k) || parts[k].cols() != algebra.block(k))
        throw ShapeError("AlgebraElement: part " + std::to_string(k) + " is not " +
                         std::to_string(algebra.block(k)) + "x" + std::to_string(algebra.block(k)));
  }

  static AlgebraElement identity(const FdAlgebra& alg) {
    std::vector<CMatrix> ps;
    for (Index n : alg.blocks()) ps.push_back(CMatrix::Identity(n, n));
    return {alg, std::move(ps)};
  }

  [[nodiscard]] bool is_hermitian() const {
    return std::all_of(parts.begin(), parts.end(), [](const CMatrix& p) { return cbsep::is_hermitian(p); });
  }

  [[nodiscard]] double norm() const {
    double v = 0;
    for (const auto& p : parts) v = std::max(v, operator_norm(p));
    return v;
  }
};

// ---------------------------------------------------------------------------

struct BlockPair {
  std::size_t k = 0;
  std::size_t l = 0;
  friend auto operator<=>(const BlockPair&, const BlockPair&) = default;
};

/// Element of A (x) B; parts are kept in lexicographic (k, l) order.
class BipartiteElement {
 public:
  BipartiteElement(FdAlgebra alg_a, FdAlgebra alg_b, std::vector<CMatrix> parts)
      : alg_a_(std::move(alg_a)), alg_b_(std::move(alg_b)), parts_(std::move(parts)) {
    if (parts_.size() != alg_a_.num_blocks() * alg_b_.num_blocks())
      throw ShapeError("BipartiteElement: expected " +
                       std::to_string(alg_a_.num_blocks() * alg_b_.num_blocks()) +
                       " block-pair parts, got " + std::to_string(parts_.size()));
    for (const BlockPair bp : block_pairs()) {
      const Index d = dims(bp).total();
      const CMatrix& p = part(bp);
      if (p.rows() != d || p.cols() != d)
        throw ShapeError("BipartiteElement: part (" + std::to_string(bp.k) + "," +
                         std::to_string(bp.l) + ") must be " + std::to_string(d) + "x" +
                         std::to_string(d));
    }
  }

  /// Single block pair M_n (x) M_m.
  static BipartiteElement single(Dims d, CMatrix m) {
    return {FdAlgebra({d.first}), FdAlgebra({d.second}), {std::move(m)}};
  }

  [[nodiscard]] const FdAlgebra& alg_a() const { return alg_a_; }
  [[nodiscard]] const FdAlgebra& alg_b() const { return alg_b_; }
  [[nodiscard]] const std::vector<CMatrix>& parts() const { return parts_; }

  [[nodiscard]] std::size_t num_pairs() const { return parts_.size(); }

  [[nodiscard]] std::vector<BlockPair> block_pairs() const {
    std::vector<BlockPair> out;
    for (std::size_t k = 0; k < alg_a_.num_blocks(); ++k)
      for (std::size_t l = 0; l < alg_b_.num_blocks(); ++l) out.push_back({k, l});
    return out;
  }

  [[nodiscard]] std::size_t index(BlockPair bp) const { return bp.k * alg_b_.num_blocks() + bp.l; }
  [[nodiscard]] Dims dims(BlockPair bp) const { return {alg_a_.block(bp.k), alg_b_.block(bp.l)}; }
  [[nodiscard]] const CMatrix& part(BlockPair bp) const { return parts_.at(index(bp)); }
  [[nodiscard]] CMatrix& part(BlockPair bp) { return parts_.at(index(bp)); }

  [[nodiscard]] bool is_hermitian() const {
    return std::all_of(parts_.begin(), parts_.end(), [](const CMatrix& p) { return cbsep::is_hermitian(p); });
  }

  /// C*-norm: the maximum over parts of the operator norm.
  [[nodiscard]] double norm() const {
    double v = 0;
    for (const auto& p : parts_) v = std::max(v, operator_norm(p));
    return v;
  }

  BipartiteElement& operator*=(Complex c) {
    for (auto& p : parts_) p *= c;
    return *this;
  }

  friend BipartiteElement operator-(const BipartiteElement& a, const BipartiteElement& b) {
    if (!(a.alg_a_ == b.alg_a_) || !(a.alg_b_ == b.alg_b_))
      throw ShapeError("BipartiteElement: algebra mismatch in subtraction");
    std::vector<CMatrix> ps;
    for (std::size_t i = 0; i < a.parts_.size(); ++i) ps.push_back(a.parts_[i] - b.parts_[i]);
    return {a.alg_a_, a.alg_b_, std::move(ps)};
  }

 private:
  FdAlgebra alg_a_;
  FdAlgebra alg_b_;
  std::vector<CMatrix> parts_;
};

using Component = std::pair<BlockPair, CMatrix>;

/// x -> (z_k (x) w_l) x for every block pair, lexicographic order.
inline std::vector<Component> split_components(const BipartiteElement& x) {
  std::vector<Component> out;
  for (const BlockPair bp : x.block_pairs()) out.emplace_back(bp, x.part(bp));
  return out;
}

/// Inverse of split_components; every block pair must appear exactly once.
inline BipartiteElement reassemble(const FdAlgebra& alg_a, const FdAlgebra& alg_b,
                                   std::vector<Component> components) {
  std::sort(components.begin(), components.end(),
            [](const Component& a, const Component& b) { return a.first < b.first; });
  const std::size_t expected = alg_a.num_blocks() * alg_b.num_blocks();
  if (components.size() != expected)
    throw ShapeError("reassemble: expected " + std::to_string(expected) + " components, got " +
                     std::to_string(components.size()));
  std::vector<CMatrix> parts;
  for (std::size_t i = 0; i < components.size(); ++i) {
    const BlockPair want{i / alg_b.num_blocks(), i % alg_b.num_blocks()};
    if (components[i].first != want)
      throw ShapeError("reassemble: missing or duplicate block pair (" + std::to_string(want.k) +
                       "," + std::to_string(want.l) + ")");
    parts.push_back(std::move(components[i].second));
  }
  return {alg_a, alg_b, std::move(parts)};
}

inline BipartiteElement bipartite_identity(const FdAlgebra& alg_a, const FdAlgebra& alg_b) {
  std::vector<CMatrix> parts;
  for (std::size_t k = 0; k < alg_a.num_blocks(); ++k)
    for (std::size_t l = 0; l < alg_b.num_blocks(); ++l) {
      const Index d = alg_a.block(k) * alg_b.block(l);
      parts.push_back(CMatrix::Identity(d, d));
    }
  return {alg_a, alg_b, std::move(parts)};
}

/// The element as a block-diagonal operator on (sum_k C^{n_k}) (x) (sum_l C^{m_l}).
inline CMatrix to_full_matrix(const BipartiteElement& x) {
  const FdAlgebra& a = x.alg_a();
  const FdAlgebra& b = x.alg_b();
  const Index big_n = a.representation_size();
  const Index big_m = b.representation_size();
  CMatrix out = CMatrix::Zero(big_n * big_m, big_n * big_m);
  for (const BlockPair bp : x.block_pairs()) {
    const Index n = a.block(bp.k), m = b.block(bp.l);
    const Index oa = a.offset(bp.k), ob = b.offset(bp.l);
    const CMatrix& p = x.part(bp);
    for (Index i = 0; i < n; ++i)
      for (Index r = 0; r < m; ++r)
        for (Index j = 0; j < n; ++j)
          for (Index s = 0; s < m; ++s)
            out((oa + i) * big_m + ob + r, (oa + j) * big_m + ob + s) = p(i * m + r, j * m + s);
  }
  return out;
}

}  // namespace cbsep
