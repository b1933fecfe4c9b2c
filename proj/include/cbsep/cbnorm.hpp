#pragma once

// Completely bounded norms of maps M_n -> M_m.
//
// Upper bound: ||psi||_cb <= sqrt(||phi1(1)|| ||phi2(1)||) for any completely
// positive pair with [[Choi(phi1), Choi(psi)], [Choi(psi)*, Choi(phi2)]] >= 0;
// the best pair is found by SDP. Lower bound: ||(Id_k (x) psi)(x)|| over
// unitaries x, by alternating ascent.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "cbsep/maps.hpp"
#include "cbsep/parallel.hpp"
#include "cbsep/random.hpp"
#include "cbsep/sdp.hpp"

namespace cbsep {

struct MajorizingPair {
  LinearMapRep phi1;
  LinearMapRep phi2;
  LinearMapRep psi;

  [[nodiscard]] CMatrix block_matrix() const {
    const Index d = psi.choi().rows();
    CMatrix z(2 * d, 2 * d);
    z.topLeftCorner(d, d) = phi1.choi();
    z.topRightCorner(d, d) = psi.choi();
    z.bottomLeftCorner(d, d) = psi.choi().adjoint();
    z.bottomRightCorner(d, d) = phi2.choi();
    return z;
  }

  /// sqrt(||phi1(1)|| ||phi2(1)||)
  [[nodiscard]] double bound() const {
    const CMatrix one = CMatrix::Identity(psi.dim_in(), psi.dim_in());
    return std::sqrt(operator_norm(apply_map(phi1, one)) * operator_norm(apply_map(phi2, one)));
  }

  /// Smallest eigenvalue of the block matrix, relative to its scale.
  [[nodiscard]] double psd_margin() const { return lambda_min(hermitian_part(block_matrix())); }

  [[nodiscard]] bool valid(double tol = 1e-8) const {
    const CMatrix z = block_matrix();
    return is_hermitian(z) && lambda_min(hermitian_part(z)) >= -tol * std::max(1.0, operator_norm(z));
  }
};

struct CbUpperResult {
  double value = 0;
  MajorizingPair pair;
  sdp::Status status = sdp::Status::maxiter;
  double sdp_value = 0;  // raw optimum t before polishing
  int iterations = 0;
};

namespace detail {

/// Blocks: Z = [[J1, B], [B*, J2]] (2nm), S1, S2 (m), t (1).
/// min t  s.t.  B = Choi(psi),  S_j + Tr_1(J_j) - t 1 = 0.
inline sdp::SdpProblem cb_upper_problem(const LinearMapRep& psi) {
  const Index n = psi.dim_in(), m = psi.dim_out(), d = n * m;
  const CMatrix& b = psi.choi();
  sdp::SdpProblem p({2 * d, m, m, 1});
  p.add_objective_entry(3, 0, 0, 1.0);
  for (Index q = 0; q < d; ++q)
    for (Index pr = 0; pr < d; ++pr) {
      const auto cre = p.add_constraint(2.0 * b(pr, q).real());
      p.add_term(cre, 0, pr, d + q, 1.0);
      const auto cim = p.add_constraint(2.0 * b(pr, q).imag());
      p.add_term(cim, 0, pr, d + q, Complex(0, 1));
    }
  for (Index j = 0; j < 2; ++j) {
    const Index off = j * d;
    const std::size_t sblock = 1 + static_cast<std::size_t>(j);
    for (Index s = 0; s < m; ++s)
      for (Index r = 0; r <= s; ++r) {
        if (r == s) {
          const auto c = p.add_constraint(0.0);
          p.add_term(c, sblock, r, r, 1.0);
          for (Index i = 0; i < n; ++i) p.add_term(c, 0, off + i * m + r, off + i * m + r, 1.0);
          p.add_term(c, 3, 0, 0, -1.0);
          continue;
        }
        for (const Complex unit : {Complex(1, 0), Complex(0, 1)}) {
          const auto c = p.add_constraint(0.0);
          p.add_term(c, sblock, r, s, unit);
          for (Index i = 0; i < n; ++i) p.add_term(c, 0, off + i * m + r, off + i * m + s, unit);
        }
      }
  }
  return p;
}

}  // namespace detail

/// Best majorizing pair by SDP; the returned value is recomputed from the
/// polished pair, so it is a rigorous upper bound whenever the pair is valid.
inline CbUpperResult cb_upper_sdp(const LinearMapRep& psi, const sdp::SolveOptions& opts = {}) {
  const Index n = psi.dim_in(), m = psi.dim_out(), d = n * m;
  const sdp::SdpSolution sol = sdp::solve(detail::cb_upper_problem(psi), opts);
  if (sol.status != sdp::Status::optimal)
    throw ConvergenceError(std::string("cb_upper_sdp: SDP ended with status ") + sdp::to_string(sol.status) +
                           " after " + std::to_string(sol.iterations) + " iterations");
  const CMatrix& z = sol.X[0];
  CMatrix j1 = hermitian_part(z.topLeftCorner(d, d));
  CMatrix j2 = hermitian_part(z.bottomRightCorner(d, d));
  // Re-insert the exact off-diagonal block, then shift both diagonal blocks
  // until the block matrix is PSD again.
  CMatrix full(2 * d, 2 * d);
  full << j1, psi.choi(), psi.choi().adjoint(), j2;
  const double scale = std::max(1.0, operator_norm(psi.choi()));
  const double deficit = -lambda_min(hermitian_part(full));
  if (deficit > -1e-13 * scale) {
    const double shift = std::max(deficit, 0.0) + 1e-13 * scale;
    j1 += shift * CMatrix::Identity(d, d);
    j2 += shift * CMatrix::Identity(d, d);
  }
  CbUpperResult out;
  out.pair = MajorizingPair{LinearMapRep(n, m, j1), LinearMapRep(n, m, j2), psi};
  out.value = out.pair.bound();
  out.status = sol.status;
  out.sdp_value = sol.primal_obj;
  out.iterations = sol.iterations;
  return out;
}

// ---------------------------------------------------------------------------

struct AmplificationBudget {
  int restarts = 32;
  int max_iterations = 500;
  double tol = 1e-13;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct AmplificationResult {
  double value = 0;
  CMatrix argmax;  // unitary x in M_k (x) M_n attaining value
  int best_restart = -1;
};

/// max ||(Id_k (x) psi)(x)|| over unitaries x (the extreme contractions).
/// Each step: (xi, eta) = top singular pair of y = psi_k(x), then
/// x <- polar factor maximizing |<xi, psi_k(x) eta>|.
inline AmplificationResult amplification_norm(const LinearMapRep& psi, Index k,
                                              const AmplificationBudget& budget = {}) {
  if (k <= 0) throw PreconditionError("amplification_norm: k must be positive");
  const Index dn = k * psi.dim_in();
  if (dn > kDefaultDimCap || k * psi.dim_out() > kDefaultDimCap) throw SizeError("amplification_norm: level too large");
  std::vector<AmplificationResult> runs(static_cast<std::size_t>(std::max(budget.restarts, 1)));
  parallel_for(runs.size(), budget.threads, [&](std::size_t r) {
    Rng rng = make_rng(budget.seed, 0xA3F10000ULL + r);
    CMatrix x = r == 0 ? CMatrix(CMatrix::Identity(dn, dn)) : random_unitary(dn, rng);
    double value = -1;
    for (int it = 0; it < budget.max_iterations; ++it) {
      const CMatrix y = apply_amplified(psi, k, x);
      Eigen::JacobiSVD<CMatrix> svd(y, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const double next = svd.singularValues()(0);
      const bool done = next - value <= budget.tol * std::max(1.0, next);
      if (next > value) {
        value = next;
        runs[r] = {value, x, static_cast<int>(r)};
      }
      if (done) break;
      const CMatrix g = apply_amplified_dual(psi, k, svd.matrixV().col(0) * svd.matrixU().col(0).adjoint());
      // tr(x g) is maximized in modulus by x = (polar factor of g)^*
      x = polar_unitary(g).adjoint();
    }
  });
  AmplificationResult best = runs[0];
  for (const auto& r : runs)
    if (r.value > best.value) best = r;
  return best;
}

/// ||psi|| (level 1).
inline double map_norm(const LinearMapRep& psi, const AmplificationBudget& budget = {}) {
  return amplification_norm(psi, 1, budget).value;
}

struct CbNormOptions {
  Index level = 0;  // 0: min(dimIn, dimOut)
  AmplificationBudget budget;
  sdp::SolveOptions sdp;
  double loose_tol = 1e-3;
};

struct CbNormResult {
  double lower = 0;
  double upper = 0;
  MajorizingPair pair;
  Index level_used = 0;
  bool loose = false;
  CMatrix lower_witness;
  int sdp_iterations = 0;

  [[nodiscard]] double width() const { return upper - lower; }
};

inline CbNormResult cb_norm(const LinearMapRep& psi, const CbNormOptions& opts = {}) {
  CbNormResult out;
  out.level_used = opts.level > 0 ? opts.level : std::min(psi.dim_in(), psi.dim_out());
  const AmplificationResult lo = amplification_norm(psi, out.level_used, opts.budget);
  const CbUpperResult up = cb_upper_sdp(psi, opts.sdp);
  out.lower = lo.value;
  out.lower_witness = lo.argmax;
  out.upper = up.value;
  out.pair = up.pair;
  out.sdp_iterations = up.iterations;
  out.loose = out.upper - out.lower > opts.loose_tol * out.upper;
  return out;
}

}  // namespace cbsep
