#pragma once

// Linear maps M_n -> M_m represented by their Choi matrix
//
//   Choi(f) = sum_{i,j} e_ij (x) f(e_ij)  in M_n (x) M_m   (domain leg first),
//
// so Choi(f)((i,r),(j,s)) = f(e_ij)(r,s) and f(x)(r,s) = sum_{ij} x_ij Choi((i,r),(j,s)).

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cbsep/matcore.hpp"
#include "cbsep/random.hpp"
#include "cbsep/sdp.hpp"

namespace cbsep {

class LinearMapRep {
 public:
  LinearMapRep() : dim_in_(1), dim_out_(1), choi_(CMatrix::Identity(1, 1)) {}

  LinearMapRep(Index dim_in, Index dim_out, CMatrix choi)
      : dim_in_(dim_in), dim_out_(dim_out), choi_(std::move(choi)) {
    if (dim_in_ <= 0 || dim_out_ <= 0) throw ShapeError("LinearMapRep: dimensions must be positive");
    if (choi_.rows() != dim_in_ * dim_out_ || choi_.cols() != dim_in_ * dim_out_)
      throw ShapeError("LinearMapRep: Choi matrix must be " + std::to_string(dim_in_ * dim_out_) +
                       "x" + std::to_string(dim_in_ * dim_out_));
  }

  [[nodiscard]] Index dim_in() const { return dim_in_; }
  [[nodiscard]] Index dim_out() const { return dim_out_; }
  [[nodiscard]] const CMatrix& choi() const { return choi_; }
  [[nodiscard]] Dims choi_dims() const { return {dim_in_, dim_out_}; }

  /// Hermiticity-preserving iff the Choi matrix is Hermitian.
  [[nodiscard]] bool hermiticity_preserving() const { return is_hermitian(choi_); }

  LinearMapRep scaled(Complex c) const { return {dim_in_, dim_out_, choi_ * c}; }

 private:
  Index dim_in_;
  Index dim_out_;
  CMatrix choi_;
};

using MatrixFunction = std::function<CMatrix(const CMatrix&)>;

// ---------------------------------------------------------------------------
// Choi correspondence

inline CMatrix apply_map(const LinearMapRep& f, const CMatrix& x) {
  const Index n = f.dim_in(), m = f.dim_out();
  if (x.rows() != n || x.cols() != n)
    throw ShapeError("apply_map: input must be " + std::to_string(n) + "x" + std::to_string(n));
  CMatrix out = CMatrix::Zero(m, m);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (x(i, j) != Complex(0.0)) out += x(i, j) * f.choi().block(i * m, j * m, m, m);
  return out;
}

/// Trace dual f^#: M_m -> M_n with tr(f(x) y) = tr(x f^#(y)).
inline CMatrix apply_dual(const LinearMapRep& f, const CMatrix& y) {
  const Index n = f.dim_in(), m = f.dim_out();
  if (y.rows() != m || y.cols() != m)
    throw ShapeError("apply_dual: input must be " + std::to_string(m) + "x" + std::to_string(m));
  CMatrix out(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      // f^#(y)(j,i) = sum_{rs} Choi((i,r),(j,s)) y(s,r)
      out(j, i) = (f.choi().block(i * m, j * m, m, m).array() * y.transpose().array()).sum();
  return out;
}

/// Builds the Choi matrix of `apply`; rejects functions that fail a linearity probe.
inline LinearMapRep choi_of_map(const MatrixFunction& apply, Index n, Index m, std::uint64_t seed = 0) {
  if (n <= 0 || m <= 0) throw ShapeError("choi_of_map: dimensions must be positive");
  CMatrix choi(n * m, n * m);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const CMatrix out = apply(matrix_unit(n, i, j));
      if (out.rows() != m || out.cols() != m)
        throw ShapeError("choi_of_map: function output must be " + std::to_string(m) + "x" + std::to_string(m));
      choi.block(i * m, j * m, m, m) = out;
    }
  Rng rng = make_rng(seed, 0x11A);
  const CMatrix x = random_ginibre(n, n, rng);
  const CMatrix y = random_ginibre(n, n, rng);
  const Complex a(0.7, -0.3), b(-1.1, 0.4);
  const CMatrix lhs = apply(a * x + b * y);
  const CMatrix rhs = a * apply(x) + b * apply(y);
  const double scale = std::max({1.0, lhs.norm(), rhs.norm()});
  if ((lhs - rhs).norm() > 1e-10 * scale)
    throw LinearityError("choi_of_map: function is not linear (defect " + std::to_string((lhs - rhs).norm()) + ")");
  LinearMapRep rep(n, m, std::move(choi));
  // Basis expansion must reproduce the function on a random input.
  if ((apply_map(rep, x) - apply(x)).norm() > 1e-10 * std::max(1.0, apply(x).norm()))
    throw LinearityError("choi_of_map: basis expansion does not reproduce the function");
  return rep;
}

inline LinearMapRep identity_map(Index n) { return {n, n, max_entangled(n)}; }
inline LinearMapRep transpose_map(Index n) { return {n, n, swap_operator(n)}; }

/// x -> tr(x) 1 - x.
inline LinearMapRep reduction_map(Index n) {
  return {n, n, CMatrix::Identity(n * n, n * n) - max_entangled(n)};
}

/// x -> tr(x) 1_m / m.
inline LinearMapRep trace_state_map(Index n, Index m) {
  return {n, m, CMatrix::Identity(n * m, n * m) / static_cast<double>(m)};
}

/// x -> A* x A for A of shape n x m.
inline LinearMapRep conjugation_map(const CMatrix& a) {
  const Index n = a.rows(), m = a.cols();
  return choi_of_map([a](const CMatrix& x) { return CMatrix(a.adjoint() * x * a); }, n, m);
}

/// g o f
inline LinearMapRep compose(const LinearMapRep& g, const LinearMapRep& f) {
  if (f.dim_out() != g.dim_in()) throw ShapeError("compose: dimension mismatch");
  CMatrix choi(f.dim_in() * g.dim_out(), f.dim_in() * g.dim_out());
  const Index n = f.dim_in(), m = g.dim_out();
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      choi.block(i * m, j * m, m, m) = apply_map(g, f.choi().block(i * f.dim_out(), j * f.dim_out(), f.dim_out(), f.dim_out()));
  return {n, m, std::move(choi)};
}

// ---------------------------------------------------------------------------
// Amplification Id_k (x) f : M_k (x) M_n -> M_k (x) M_m

inline CMatrix apply_amplified(const LinearMapRep& f, Index k, const CMatrix& x) {
  const Index n = f.dim_in(), m = f.dim_out();
  if (x.rows() != k * n || x.cols() != k * n) throw ShapeError("apply_amplified: input has wrong size");
  CMatrix out(k * m, k * m);
  for (Index a = 0; a < k; ++a)
    for (Index b = 0; b < k; ++b) out.block(a * m, b * m, m, m) = apply_map(f, x.block(a * n, b * n, n, n));
  return out;
}

inline CMatrix apply_amplified_dual(const LinearMapRep& f, Index k, const CMatrix& y) {
  const Index n = f.dim_in(), m = f.dim_out();
  if (y.rows() != k * m || y.cols() != k * m) throw ShapeError("apply_amplified_dual: input has wrong size");
  CMatrix out(k * n, k * n);
  for (Index a = 0; a < k; ++a)
    for (Index b = 0; b < k; ++b) out.block(a * n, b * n, n, n) = apply_dual(f, y.block(a * m, b * m, m, m));
  return out;
}

inline LinearMapRep amplify(const LinearMapRep& f, Index k, Index cap = kDefaultDimCap) {
  if (k <= 0) throw PreconditionError("amplify: k must be positive");
  const Index n = f.dim_in(), m = f.dim_out();
  const Index big = k * n * k * m;
  if (big > cap) throw SizeError("amplify: Choi dimension " + std::to_string(big) + " exceeds cap " + std::to_string(cap));
  CMatrix choi = CMatrix::Zero(big, big);
  const Index km = k * m;
  // Choi((a,i),(c,r) ; (b,j),(d,s)) = delta_ac delta_bd Choi_f((i,r),(j,s))
  for (Index a = 0; a < k; ++a)
    for (Index b = 0; b < k; ++b)
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
          for (Index r = 0; r < m; ++r)
            for (Index s = 0; s < m; ++s)
              choi((a * n + i) * km + a * m + r, (b * n + j) * km + b * m + s) = f.choi()(i * m + r, j * m + s);
  return {k * n, km, std::move(choi)};
}

/// Reorders the legs of an amplified Choi matrix from (k, n, k, m) to
/// (k, k, n, m); the result equals P_k (x) Choi(f).
inline CMatrix flip_amplified_choi(const CMatrix& choi, Index k, Index n, Index m) {
  const Index big = k * n * k * m;
  if (choi.rows() != big || choi.cols() != big) throw ShapeError("flip_amplified_choi: wrong size");
  auto src = [&](Index a, Index i, Index c, Index r) { return ((a * n + i) * k + c) * m + r; };
  auto dst = [&](Index a, Index i, Index c, Index r) { return ((a * k + c) * n + i) * m + r; };
  std::vector<Index> perm(static_cast<std::size_t>(big));
  for (Index a = 0; a < k; ++a)
    for (Index i = 0; i < n; ++i)
      for (Index c = 0; c < k; ++c)
        for (Index r = 0; r < m; ++r) perm[static_cast<std::size_t>(src(a, i, c, r))] = dst(a, i, c, r);
  CMatrix out(big, big);
  for (Index p = 0; p < big; ++p)
    for (Index q = 0; q < big; ++q) out(perm[static_cast<std::size_t>(p)], perm[static_cast<std::size_t>(q)]) = choi(p, q);
  return out;
}

// ---------------------------------------------------------------------------
// Positivity

struct CpCheck {
  bool completely_positive = false;
  double margin = 0;  // smallest Choi eigenvalue
};

inline CpCheck is_completely_positive(const LinearMapRep& f, double tol = 1e-9) {
  const CMatrix c = hermitian_checked(f.choi(), "is_completely_positive: map is not Hermiticity-preserving");
  const double lmin = lambda_min(c);
  return {lmin >= -tol * std::max(1.0, operator_norm(c)), lmin};
}

/// Choi = cp_part + partial_transpose(copositive_part, second leg), both PSD.
struct Decomposition {
  CMatrix cp_part;
  CMatrix copositive_part;
  double residual = 0;  // ||Choi - cp - copos^Gamma||_F
};

enum class PositivityStatus { certified_yes, certified_no, undecided };

inline const char* to_string(PositivityStatus s) {
  switch (s) {
    case PositivityStatus::certified_yes: return "certified-yes";
    case PositivityStatus::certified_no: return "certified-no";
    case PositivityStatus::undecided: return "undecided";
  }
  return "unknown";
}

struct PositivityCertificate {
  PositivityStatus status = PositivityStatus::undecided;
  std::optional<Decomposition> decomposition;
  CVector u, v;          // certified_no: <u(x)v| Choi |u(x)v> = violation
  double violation = 0;  // best (smallest) product expectation found
  std::string diagnostic;
};

struct RefuterBudget {
  int restarts = 64;
  int steps = 200;
  std::uint64_t seed = 0;
};

struct ProductSearchResult {
  double value = 0;
  CVector u, v;
};

/// Alternating minimization of <u(x)v| C |u(x)v> over unit vectors.
inline ProductSearchResult block_positivity_search(const CMatrix& choi, Dims dims, const RefuterBudget& budget) {
  const CMatrix c = hermitian_checked(choi, "block_positivity_search");
  require_bipartite(c, dims, "block_positivity_search");
  const Index n = dims.first, m = dims.second;
  ProductSearchResult best{std::numeric_limits<double>::infinity(), {}, {}};
  auto compress_first = [&](const CVector& u) {  // (u* (x) I) C (u (x) I)
    CMatrix out = CMatrix::Zero(m, m);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) out += std::conj(u(i)) * u(j) * c.block(i * m, j * m, m, m);
    return hermitian_part(out);
  };
  auto compress_second = [&](const CVector& v) {  // (I (x) v*) C (I (x) v)
    CMatrix out(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) out(i, j) = v.dot(c.block(i * m, j * m, m, m) * v);
    return hermitian_part(out);
  };
  for (int r = 0; r < budget.restarts; ++r) {
    Rng rng = make_rng(budget.seed, 0xB10C0000ULL + static_cast<std::uint64_t>(r));
    CVector u = random_unit_vector(n, rng);
    CVector v;
    double value = std::numeric_limits<double>::infinity();
    for (int s = 0; s < budget.steps; ++s) {
      const EigenDecomposition ev = eig_hermitian(compress_first(u));
      v = ev.vectors.col(0);
      const EigenDecomposition eu = eig_hermitian(compress_second(v));
      u = eu.vectors.col(0);
      const double next = eu.values(0);
      const bool done = value - next <= 1e-14 * std::max(1.0, std::abs(next));
      value = next;
      if (done) break;
    }
    if (value < best.value) best = {value, u, v};
  }
  return best;
}

namespace detail {

/// min s  s.t.  C1 + C2^Gamma - s 1 = Choi + t0 1,  C1, C2 >= 0, s >= 0, with
/// t0 = -tr(Choi)/(nm). Optimal t = s + t0 <= 0 iff Choi is decomposable.
inline sdp::SdpProblem decomposition_problem(const CMatrix& choi, Dims dims, double& t0) {
  const Index d = dims.total();
  const Index m = dims.second;
  t0 = -choi.trace().real() / static_cast<double>(d);
  const CMatrix rhs = choi + t0 * CMatrix::Identity(d, d);
  sdp::SdpProblem p({d, d, 1});
  p.add_objective_entry(2, 0, 0, 1.0);
  auto pt = [&](Index p_) {  // (i,r) -> i, r
    return std::pair<Index, Index>{p_ / m, p_ % m};
  };
  for (Index q = 0; q < d; ++q)
    for (Index pr = 0; pr <= q; ++pr) {
      const auto [i, r] = pt(pr);
      const auto [j, s] = pt(q);
      // (C2^Gamma)((i,r),(j,s)) = C2((i,s),(j,r))
      const Index p2 = i * m + s, q2 = j * m + r;
      if (pr == q) {
        const auto c = p.add_constraint(rhs(pr, pr).real());
        p.add_term(c, 0, pr, pr, 1.0);
        p.add_term(c, 1, p2, q2, 1.0);
        p.add_term(c, 2, 0, 0, -1.0);
        continue;
      }
      const auto cre = p.add_constraint(2.0 * rhs(pr, q).real());
      p.add_term(cre, 0, pr, q, 1.0);
      p.add_term(cre, 1, p2, q2, 1.0);
      const auto cim = p.add_constraint(2.0 * rhs(pr, q).imag());
      p.add_term(cim, 0, pr, q, Complex(0, 1));
      p.add_term(cim, 1, p2, q2, Complex(0, 1));
    }
  return p;
}

}  // namespace detail

struct DecompositionSearch {
  std::optional<Decomposition> decomposition;
  double shift = 0;  // smallest t with Choi + t 1 decomposable
  sdp::Status status = sdp::Status::maxiter;
};

/// Searches for Choi = C1 + C2^Gamma with C1, C2 >= 0 by SDP.
inline DecompositionSearch find_decomposition(const CMatrix& choi_in, Dims dims, double tol = 1e-8) {
  const CMatrix choi = hermitian_checked(choi_in, "find_decomposition");
  require_bipartite(choi, dims, "find_decomposition");
  double t0 = 0;
  const sdp::SdpProblem p = detail::decomposition_problem(choi, dims, t0);
  const sdp::SdpSolution sol = sdp::solve(p);
  DecompositionSearch out;
  out.status = sol.status;
  if (sol.status != sdp::Status::optimal) return out;
  const double t = sol.X[2](0, 0).real() + t0;
  out.shift = t;
  const Index d = dims.total();
  const double scale = std::max(1.0, operator_norm(choi));
  if (t > tol * scale) return out;
  CMatrix c1 = sol.X[0] - t * CMatrix::Identity(d, d);
  CMatrix c2 = sol.X[1];
  if (t > 0) {
    c1 = project_psd(c1);
    c2 = project_psd(c2);
  }
  const double residual = (choi - c1 - partial_transpose(c2, dims, Leg::second)).norm();
  if (residual > 1e-7 * scale) return out;
  out.decomposition = Decomposition{hermitian_part(c1), hermitian_part(c2), residual};
  return out;
}

/// Checks a claimed decomposition using matrix arithmetic only.
inline bool verify_decomposition(const CMatrix& choi, Dims dims, const Decomposition& dec, double psd_tol = 1e-9,
                                 double residual_tol = 1e-7) {
  const double scale = std::max(1.0, operator_norm(choi));
  const double res = (choi - dec.cp_part - partial_transpose(dec.copositive_part, dims, Leg::second)).norm();
  return res <= residual_tol * scale && lambda_min(dec.cp_part) >= -psd_tol * scale &&
         lambda_min(dec.copositive_part) >= -psd_tol * scale;
}

/// Refutation by product-vector search, confirmation by decomposability SDP.
inline PositivityCertificate certify_positive_map(const LinearMapRep& f, const RefuterBudget& budget = {}) {
  const CMatrix choi = hermitian_checked(f.choi(), "certify_positive_map: map is not Hermiticity-preserving");
  const Dims dims = f.choi_dims();
  PositivityCertificate cert;
  const CpCheck cp = is_completely_positive(f);
  if (cp.completely_positive) {
    cert.status = PositivityStatus::certified_yes;
    cert.decomposition = Decomposition{choi, CMatrix::Zero(choi.rows(), choi.cols()), 0.0};
    cert.diagnostic = "completely positive";
    return cert;
  }
  try {
    const DecompositionSearch ds = find_decomposition(choi, dims);
    if (ds.decomposition) {
      cert.status = PositivityStatus::certified_yes;
      cert.decomposition = ds.decomposition;
      cert.diagnostic = "decomposable";
      return cert;
    }
    cert.diagnostic = ds.status == sdp::Status::optimal
                          ? "not decomposable (shift " + std::to_string(ds.shift) + ")"
                          : std::string("decomposition SDP ended with status ") + sdp::to_string(ds.status);
  } catch (const Error& e) {
    cert.diagnostic = std::string("decomposition SDP failed: ") + e.what();
  }
  const ProductSearchResult ps = block_positivity_search(choi, dims, budget);
  cert.u = ps.u;
  cert.v = ps.v;
  cert.violation = ps.value;
  if (ps.value < -1e-9) cert.status = PositivityStatus::certified_no;
  return cert;
}

// ---------------------------------------------------------------------------

/// f_eps(x) = f(x) + eps tr(x)/n 1, then g = f_eps(1)^{-1/2} f_eps f_eps(1)^{-1/2}.
inline LinearMapRep unitalize(const LinearMapRep& f, double eps) {
  if (eps < 0) throw PreconditionError("unitalize: eps must be nonnegative");
  const Index n = f.dim_in(), m = f.dim_out();
  const CMatrix choi_eps = f.choi() + (eps / static_cast<double>(n)) * CMatrix::Identity(n * m, n * m);
  const LinearMapRep f_eps(n, m, choi_eps);
  const CMatrix unit_image = hermitian_checked(apply_map(f_eps, CMatrix::Identity(n, n)), "unitalize: f(1)");
  const double lmin = lambda_min(unit_image);
  if (lmin <= 1e-10)
    throw SingularityError("unitalize: f(1) is singular (smallest eigenvalue " + std::to_string(lmin) +
                           "); pass a positive eps");
  const CMatrix d = psd_inverse_sqrt(unit_image);
  const CMatrix conj = kron(CMatrix::Identity(n, n), d);
  return {n, m, conj * choi_eps * conj};
}

/// Functional f^(x) = sum_{ij} f(x_ij)_{ij} for f : M_m -> M_n and
/// x = sum e_ij (x) x_ij in M_n (x) M_m; on products, f^(a (x) b) = tr(a^T f(b)).
inline Complex hat_functional(const LinearMapRep& f, const CMatrix& x) {
  const Index n = f.dim_out(), m = f.dim_in();
  require_bipartite(x, {n, m}, "hat_functional");
  Complex acc = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) acc += apply_map(f, x.block(i * m, j * m, m, m))(i, j);
  return acc;
}

/// Random decomposable map with Choi = C1 + C2^Gamma, C1, C2 full-rank Wishart.
/// Hermiticity-preserving map with a GUE Choi matrix.
inline LinearMapRep random_hp_map(Index n, Index m, Rng& rng) { return {n, m, random_gue(n * m, rng)}; }

/// Completely positive map with `kraus` Kraus operators.
inline LinearMapRep random_cp_map(Index n, Index m, Rng& rng, Index kraus = 2) {
  return {n, m, random_psd(n * m, kraus, rng)};
}

inline LinearMapRep random_decomposable_map(Index n, Index m, Rng& rng) {
  const Index d = n * m;
  return {n, m, random_psd(d, d, rng) + partial_transpose(random_psd(d, d, rng), {n, m}, Leg::second)};
}

/// Unital positive map: a unitalized random decomposable map.
inline LinearMapRep random_unital_positive_map(Index n, Index m, Rng& rng) {
  return unitalize(random_decomposable_map(n, m, rng), 0.0);
}

struct MapClassification {
  bool completely_positive = false;
  double cp_margin = 0;
  PositivityCertificate positive;
  bool unital = false;
  double unital_residual = 0;
};

inline MapClassification classify_map(const LinearMapRep& f, const RefuterBudget& budget = {}) {
  MapClassification out;
  const CpCheck cp = is_completely_positive(f);
  out.completely_positive = cp.completely_positive;
  out.cp_margin = cp.margin;
  out.positive = certify_positive_map(f, budget);
  const CMatrix u = apply_map(f, CMatrix::Identity(f.dim_in(), f.dim_in()));
  out.unital_residual = operator_norm(u - CMatrix::Identity(f.dim_out(), f.dim_out()));
  out.unital = out.unital_residual <= 1e-10;
  return out;
}

}  // namespace cbsep
