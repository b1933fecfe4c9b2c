#pragma once

// Seeded random ensembles. Every stochastic procedure derives an independent
// stream from (seed, stream index) so that restarts and scan samples can be
// evaluated in any order, or in parallel, and still reproduce bit for bit.

#include <cstdint>
#include <random>

#include "cbsep/matcore.hpp"

namespace cbsep {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; decorrelates consecutive stream indices.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return Rng(mix_seed(seed, stream));
}

/// Ginibre matrix: iid complex Gaussian entries with E|z|^2 = 1.
inline CMatrix random_ginibre(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  CMatrix g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = Complex(normal(rng), normal(rng));
  return g;
}

/// GUE sample (G + G*)/2.
inline CMatrix random_gue(Index d, Rng& rng) {
  const CMatrix g = random_ginibre(d, d, rng);
  return (g + g.adjoint()) * 0.5;
}

/// GUE sample rescaled to operator norm exactly `norm`.
inline CMatrix random_gue_with_norm(Index d, double norm, Rng& rng) {
  CMatrix h = random_gue(d, rng);
  const double current = operator_norm(h);
  return current > 0 ? CMatrix(h * (norm / current)) : h;
}

/// Haar unitary via QR of a Ginibre matrix with phase correction.
inline CMatrix random_unitary(Index d, Rng& rng) {
  const CMatrix g = random_ginibre(d, d, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * CMatrix::Identity(d, d);
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < d; ++i) {
    const Complex diag = r(i, i);
    const double a = std::abs(diag);
    if (a > 0) q.col(i) *= diag / a;
  }
  return q;
}

/// Random contraction: a Ginibre matrix scaled to operator norm `norm` <= 1.
inline CMatrix random_contraction(Index d, Rng& rng, double norm = 1.0) {
  CMatrix g = random_ginibre(d, d, rng);
  return g * (norm / operator_norm(g));
}

inline CVector random_unit_vector(Index d, Rng& rng) {
  CVector v = random_ginibre(d, 1, rng).col(0);
  return v / v.norm();
}

/// Wishart-type PSD matrix G G* with G of shape d x rank.
inline CMatrix random_psd(Index d, Index rank, Rng& rng) {
  const CMatrix g = random_ginibre(d, rank, rng);
  return hermitian_part(g * g.adjoint());
}

}  // namespace cbsep
