#pragma once

// Closed-form rank quantities for A = (+) M_{n_k}, B = (+) M_{m_l}:
//   eta(A,B) = min(rank A, rank B) = 1 / gamma(A,B),   kappa(A,B) = min(rank A, rank B),
// each paired with a witness that can be checked numerically.

#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "cbsep/algebra.hpp"
#include "cbsep/cbnorm.hpp"
#include "cbsep/maps.hpp"
#include "cbsep/separability.hpp"

namespace cbsep {

struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  [[nodiscard]] double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  [[nodiscard]] std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
  friend bool operator==(const Fraction&, const Fraction&) = default;
};

inline Fraction reduce(Fraction f) {
  const std::int64_t g = std::gcd(f.num, f.den);
  return g == 0 ? f : Fraction{f.num / g, f.den / g};
}

inline Fraction operator*(Fraction a, Fraction b) { return reduce({a.num * b.num, a.den * b.den}); }

struct NamedCheck {
  std::string name;
  bool passed = false;
  double margin = 0;
};

inline bool all_passed(const std::vector<NamedCheck>& checks) {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

// ---------------------------------------------------------------------------
// eta

/// A map between two matrix blocks of A and B, zero on every other block.
struct EmbeddedMap {
  BlockPair blocks;
  LinearMapRep map;
};

struct EtaCertificate {
  Index value = 1;
  EmbeddedMap witness;
  std::optional<CbNormResult> measured;
  std::vector<NamedCheck> checks;
};

/// phi(x) = V (W* x W)^T V* : M_n -> M_m with corner isometries W, V from C^d.
inline LinearMapRep corner_transpose_map(Index n, Index m, Index d) {
  const CMatrix w = corner_isometry(n, d), v = corner_isometry(m, d);
  return choi_of_map([&](const CMatrix& x) { return CMatrix(v * (w.adjoint() * x * w).transpose() * v.adjoint()); }, n,
                     m);
}

struct EtaOptions {
  bool measure = true;
  CbNormOptions cb;
};

inline EtaCertificate eta_certificate(const FdAlgebra& a, const FdAlgebra& b, const EtaOptions& opts = {}) {
  EtaCertificate out;
  out.value = std::min(a.rank(), b.rank());
  const BlockPair bp{a.max_rank_block(), b.max_rank_block()};
  const Index n = a.block(bp.k), m = b.block(bp.l);
  out.witness = {bp, corner_transpose_map(n, m, out.value)};
  const auto& f = out.witness.map;

  // Contractive and positive: ||phi(1)|| = 1, Choi(phi) = 0 + Choi^Gamma with Choi^Gamma >= 0.
  const double unit_norm = operator_norm(apply_map(f, CMatrix::Identity(n, n)));
  out.checks.push_back({"witness contractive", std::abs(unit_norm - 1.0) <= 1e-12, unit_norm});
  const double copos = lambda_min(partial_transpose(f.choi(), f.choi_dims(), Leg::second));
  out.checks.push_back({"witness positive (transpose-decomposable)", copos >= -1e-12, copos});
  if (opts.measure) {
    out.measured = cb_norm(f, opts.cb);
    const double v = static_cast<double>(out.value);
    const bool bracket = out.measured->lower >= v - 1e-3 && out.measured->upper <= v + 1e-3 &&
                         out.measured->lower <= out.measured->upper + 1e-6;
    out.checks.push_back({"cb sandwich brackets value", bracket, out.measured->upper - out.measured->lower});
  }
  return out;
}

// ---------------------------------------------------------------------------
// gamma

struct GammaUpperWitness {
  BipartiteElement element;  // 1 (x) 1 - x with ||x|| = radius
  double radius = 0;
  std::string kind;          // "entangled" or "non-positive"
  std::optional<SepVerdict> verdict;
  double margin = 0;         // violation, or lambda_min for the non-positive case
  bool verified = false;
};

struct GammaCertificate {
  Fraction value;
  ScanReport lower_evidence;
  GammaUpperWitness upper;
  std::vector<NamedCheck> checks;
};

struct GammaOptions {
  int samples = 50;
  std::uint64_t seed = 0;
  double eps = 0.05;
  ScanOptions scan;
};

inline GammaCertificate gamma_certificate(const FdAlgebra& a, const FdAlgebra& b, const GammaOptions& opts = {}) {
  const Index d = std::min(a.rank(), b.rank());
  const double value = 1.0 / static_cast<double>(d);
  const BlockPair bp{a.max_rank_block(), b.max_rank_block()};
  GammaCertificate out{Fraction{1, d}, sep_ball_scan(a, b, {value}, opts.samples, opts.seed, opts.scan),
                       GammaUpperWitness{bipartite_identity(a, b), 0, "", {}, 0, false}, {}};
  const auto& rr = out.lower_evidence.radii.front();
  out.checks.push_back({"no entangled verdict at radius 1/d", rr.random.entangled + rr.directed.entangled == 0,
                        static_cast<double>(rr.random.separable + rr.directed.separable)});

  auto& up = out.upper;
  up.radius = value * (1.0 + opts.eps);
  if (d >= 2) {
    up.kind = "entangled";
    up.element = one_minus(directed_sample(a, b, bp, up.radius));
    up.verdict = entanglement_witness(up.element);
    const PartVerdict& pv = up.verdict->parts[up.element.index(bp)];
    up.margin = pv.ppt_margin;
    up.verified = up.verdict->status == SepStatus::entangled_certified && pv.status == SepStatus::entangled_certified;
  } else {
    // With d = 1 the radius exceeds 1, and 1 - x fails to be positive, so
    // it cannot be separable.
    up.kind = "non-positive";
    BipartiteElement x = bipartite_identity(a, b);
    for (const BlockPair q : x.block_pairs()) x.part(q).setZero();
    const Index dim = x.dims(bp).total();
    x.part(bp) = up.radius * CMatrix::Identity(dim, dim);
    up.element = one_minus(x);
    up.margin = lambda_min(up.element.part(bp));
    up.verified = up.margin < -kSepSlack;
  }
  out.checks.push_back({"upper witness (" + up.kind + ") at radius (1+eps)/d", up.verified, up.margin});
  return out;
}

// ---------------------------------------------------------------------------
// kappa

struct KappaReport {
  Index n = 1, m = 1;
  double lower_bound = 0;   // |Phi(y)| / ||y||
  double upper_bound = 0;   // min(n, m)
  double measured_upper = 0;  // cb-norm SDP bound on the unital map
  LinearMapRep map;         // unital positive phi : M_m -> M_n
  CMatrix element;          // y, self-adjoint with ||y|| = 1
  CVector state_vector;     // rho = <omega| . |omega>
  std::string trace_convention = "unnormalized matrix trace; rho is the vector state of Omega_d / sqrt(d)";
  std::vector<NamedCheck> checks;
};

inline KappaReport kappa_matrix_check(Index n, Index m, const sdp::SolveOptions& sdp_opts = {}) {
  if (n < 1 || m < 1) throw PreconditionError("kappa_matrix_check: dimensions must be positive");
  if (n * n * m > kDefaultDimCap || n * m * m > kDefaultDimCap)
    throw SizeError("kappa_matrix_check: dimensions exceed cap");
  KappaReport r;
  r.n = n;
  r.m = m;
  const Index d = std::min(n, m);
  const CMatrix w = corner_isometry(n, d), v = corner_isometry(m, d);
  const CMatrix rest = CMatrix::Identity(n, n) - w * w.adjoint();
  // phi(b) = W (V* b V)^T W* + tr(b)/m (1 - W W*), unital and positive.
  r.map = choi_of_map(
      [&](const CMatrix& b) {
        return CMatrix(w * (v.adjoint() * b * v).transpose() * w.adjoint() + b.trace() / static_cast<double>(m) * rest);
      },
      m, n);
  const CMatrix wv = kron(w, v);
  r.element = wv * swap_operator(d) * wv.adjoint();
  CVector omega = CVector::Zero(n * n);
  for (Index k = 0; k < d; ++k) omega(k * n + k) = 1.0 / std::sqrt(static_cast<double>(d));
  r.state_vector = omega;

  const CMatrix image = apply_amplified(r.map, n, r.element);
  const Complex phi_y = omega.dot(image * omega);
  r.lower_bound = std::abs(phi_y) / operator_norm(r.element);
  r.upper_bound = static_cast<double>(d);
  r.measured_upper = cb_upper_sdp(r.map, sdp_opts).value;

  const double unital = operator_norm(apply_map(r.map, CMatrix::Identity(m, m)) - CMatrix::Identity(n, n));
  r.checks.push_back({"phi unital", unital <= 1e-12, unital});
  const PositivityCertificate pos = certify_positive_map(r.map);
  r.checks.push_back({"phi positive", pos.status == PositivityStatus::certified_yes, pos.violation});
  r.checks.push_back({"y self-adjoint with norm 1",
                      is_hermitian(r.element) && std::abs(operator_norm(r.element) - 1.0) <= 1e-12,
                      operator_norm(r.element)});
  r.checks.push_back({"lower bound reaches min(n,m)", r.lower_bound >= r.upper_bound - 1e-3,
                      r.lower_bound - r.upper_bound});
  r.checks.push_back({"lower bound below upper bound", r.lower_bound <= r.upper_bound + 1e-6,
                      r.upper_bound - r.lower_bound});
  r.checks.push_back({"lower bound below measured cb norm", r.lower_bound <= r.measured_upper + 1e-6,
                      r.measured_upper - r.lower_bound});
  return r;
}

// ---------------------------------------------------------------------------
// Symbolic rank formula

/// A rank that may be infinite.
struct RankValue {
  bool infinite = false;
  Index value = 1;

  static RankValue finite(Index v) { return {false, v}; }
  static RankValue unbounded() { return {true, 0}; }
  [[nodiscard]] std::string str() const { return infinite ? "inf" : std::to_string(value); }
};

struct RankFormulaReport {
  RankValue rank_a, rank_b;
  RankValue eta, kappa;
  std::optional<Fraction> gamma;  // empty with gamma_is_zero when both ranks are infinite
  bool gamma_is_zero = false;
  bool desk_verifiable = true;
  std::optional<EtaCertificate> eta_certificate;
  std::optional<GammaCertificate> gamma_certificate;
  std::optional<KappaReport> kappa_report;
  std::vector<NamedCheck> checks;
};

/// Formula values only; infinite ranks cannot be instantiated and are flagged.
inline RankFormulaReport rank_formula(RankValue a, RankValue b) {
  RankFormulaReport r;
  r.rank_a = a;
  r.rank_b = b;
  if (a.infinite && b.infinite) {
    r.eta = r.kappa = RankValue::unbounded();
    r.gamma_is_zero = true;
  } else {
    const Index d = a.infinite ? b.value : b.infinite ? a.value : std::min(a.value, b.value);
    r.eta = r.kappa = RankValue::finite(d);
    r.gamma = Fraction{1, d};
  }
  r.desk_verifiable = !a.infinite && !b.infinite;
  return r;
}

struct RankReportOptions {
  EtaOptions eta;
  GammaOptions gamma;
  bool kappa = true;
};

/// Full report with witnesses for finite-dimensional algebras.
inline RankFormulaReport rank_formula_report(const FdAlgebra& a, const FdAlgebra& b,
                                             const RankReportOptions& opts = {}) {
  RankFormulaReport r = rank_formula(RankValue::finite(a.rank()), RankValue::finite(b.rank()));
  r.eta_certificate = eta_certificate(a, b, opts.eta);
  r.gamma_certificate = gamma_certificate(a, b, opts.gamma);
  const Fraction product = Fraction{r.eta_certificate->value, 1} * r.gamma_certificate->value;
  r.checks.push_back({"eta * gamma = 1 (exact)", product == Fraction{1, 1}, product.value()});
  for (const auto& c : r.eta_certificate->checks) r.checks.push_back({"eta: " + c.name, c.passed, c.margin});
  for (const auto& c : r.gamma_certificate->checks) r.checks.push_back({"gamma: " + c.name, c.passed, c.margin});
  if (opts.kappa) {
    r.kappa_report = kappa_matrix_check(a.rank(), b.rank());
    for (const auto& c : r.kappa_report->checks) r.checks.push_back({"kappa: " + c.name, c.passed, c.margin});
  }
  return r;
}

}  // namespace cbsep
