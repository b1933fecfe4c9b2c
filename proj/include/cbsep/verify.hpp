#pragma once

// Re-checks the certificates inside a result document. Only dense linear
// algebra from matcore is used; nothing here solves an SDP or searches.

#include <cmath>
#include <string>
#include <vector>

#include "cbsep/io.hpp"
#include "cbsep/matcore.hpp"

namespace cbsep::verify {

using io::Json;

struct VerifyOptions {
  double psd_tol = 1e-8;    // relative PSD slack
  double value_tol = 1e-8;  // relative agreement of recomputed scalars
  double sdp_tol = 1e-7;    // SDP residuals and gap
};

struct Check {
  std::string name;
  bool passed = false;
  double margin = 0;
};

struct Report {
  std::string kind;
  std::vector<Check> checks;

  [[nodiscard]] bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return !checks.empty();
  }
};

namespace detail {

inline double scale_of(const CMatrix& m) { return std::max(1.0, operator_norm(m)); }

inline bool psd_ok(const CMatrix& m, double tol, double* margin = nullptr) {
  const double l = lambda_min(hermitian_part(m));
  if (margin) *margin = l;
  return l >= -tol * scale_of(m) && is_hermitian(m, 1e-9);
}

inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

/// (Id_k (x) f)(x) with f given by its Choi matrix, f : M_din -> M_dout.
inline CMatrix amplified(const CMatrix& choi, Index din, Index dout, Index k, const CMatrix& x) {
  if (choi.rows() != din * dout || x.rows() != k * din || x.cols() != k * din)
    throw ShapeError("verify: amplified map and element sizes disagree");
  CMatrix y = CMatrix::Zero(k * dout, k * dout);
  for (Index a = 0; a < k; ++a)
    for (Index c = 0; c < k; ++c)
      for (Index i = 0; i < din; ++i)
        for (Index j = 0; j < din; ++j) {
          const Complex xv = x(a * din + i, c * din + j);
          if (xv == Complex(0.0)) continue;
          y.block(a * dout, c * dout, dout, dout) += xv * choi.block(i * dout, j * dout, dout, dout);
        }
  return y;
}

/// f(1) = sum_i Choi block (i, i).
inline CMatrix unit_image(const CMatrix& choi, Index din, Index dout) {
  return partial_trace(choi, {din, dout}, Leg::first);
}

struct Collector {
  Report& rep;
  void add(std::string name, bool ok, double margin) { rep.checks.push_back({std::move(name), ok, margin}); }
};

/// Sandwich certificate for psi (Choi, din -> dout) with claimed lower/upper.
inline void check_cb(Collector& out, const std::string& prefix, const CMatrix& psi, Index din, Index dout,
                     const Json& cert, double lower, double upper, const VerifyOptions& o) {
  const std::string path = "$." + prefix + "certificate";
  const CMatrix phi1 = io::to_matrix(io::require(cert, "phi1", path), path + ".phi1");
  const CMatrix phi2 = io::to_matrix(io::require(cert, "phi2", path), path + ".phi2");
  const Index d = din * dout;
  if (phi1.rows() != d || phi2.rows() != d || phi1.cols() != d || phi2.cols() != d)
    throw SchemaError(path + ": majorizing pair has wrong size");
  CMatrix z(2 * d, 2 * d);
  z << phi1, psi, psi.adjoint(), phi2;
  double m = 0;
  out.add(prefix + "majorizing block matrix PSD", psd_ok(z, o.psd_tol, &m), m);
  const double bound = std::sqrt(operator_norm(unit_image(phi1, din, dout)) * operator_norm(unit_image(phi2, din, dout)));
  out.add(prefix + "upper equals sqrt(||phi1(1)|| ||phi2(1)||)", close(bound, upper, o.value_tol), bound - upper);

  const Index k = io::to_index(io::require(cert, "level", path), path + ".level");
  const CMatrix x = io::to_matrix(io::require(cert, "lowerWitness", path), path + ".lowerWitness");
  if (k <= 0 || x.rows() != k * din || x.cols() != k * din) throw SchemaError(path + ".lowerWitness: wrong size");
  const double xn = operator_norm(x);
  out.add(prefix + "lower witness is a contraction", xn <= 1.0 + o.psd_tol, 1.0 - xn);
  const double value = operator_norm(amplified(psi, din, dout, k, x));
  out.add(prefix + "lower equals ||(Id (x) psi)(x)||", close(value, lower, o.value_tol), value - lower);
  out.add(prefix + "lower <= upper", lower <= upper + o.value_tol * std::max(1.0, upper), upper - lower);
}

/// Entanglement certificate for one part x on C^n (x) C^m.
inline void check_witness(Collector& out, const std::string& prefix, const CMatrix& x, Dims dims, const Json& w,
                          const VerifyOptions& o, const std::string& path) {
  const Index n = dims.first, m = dims.second;
  const io::Json& jm = io::require(w, "map", path);
  const LinearMapRep phi = io::to_map(jm, path + ".map");
  if (phi.dim_in() != m || phi.dim_out() != n) throw SchemaError(path + ".map: expected a map M_m -> M_n");
  const Decomposition dec = io::to_decomposition(io::require(w, "mapCertificate", path), path + ".mapCertificate");
  const CVector v = io::to_vector(io::require(w, "vector", path), path + ".vector");
  const double violation = io::to_double(io::require(w, "violation", path), path + ".violation");
  const CMatrix wm = io::to_matrix(io::require(w, "witness", path), path + ".witness");
  if (v.size() != n * n || wm.rows() != n * m || dec.cp_part.rows() != n * m || dec.copositive_part.rows() != n * m)
    throw SchemaError(path + ": certificate sizes disagree with the part");

  double d1 = 0, d2 = 0;
  out.add(prefix + "map certificate cp part PSD", psd_ok(dec.cp_part, o.psd_tol, &d1), d1);
  out.add(prefix + "map certificate copositive part PSD", psd_ok(dec.copositive_part, o.psd_tol, &d2), d2);
  const double resid =
      (phi.choi() - dec.cp_part - partial_transpose(dec.copositive_part, {m, n}, Leg::second)).norm();
  out.add(prefix + "map is decomposable", resid <= o.psd_tol * scale_of(phi.choi()), resid);

  const CMatrix y = amplified(phi.choi(), m, n, n, x);
  const double vn = v.norm();
  const double value = v.dot(y * v).real() / (vn * vn);
  out.add(prefix + "violation recomputed", close(value, violation, o.value_tol), value - violation);
  out.add(prefix + "violation negative", value < -1e-9 * scale_of(x), value);
  out.add(prefix + "witness W Hermitian", is_hermitian(wm, 1e-9), hermiticity_defect(wm));
  const double tr = (wm * x).trace().real();
  out.add(prefix + "Tr(W x) negative", tr < 0, tr);
}

inline bool decisive_shape(Dims d) {
  return (d.first == 2 && (d.second == 2 || d.second == 3)) || (d.first == 3 && d.second == 2);
}

/// Separability or entanglement evidence for one part.
inline void check_part(Collector& out, const std::string& prefix, const CMatrix& x, const Json& part,
                       const VerifyOptions& o, const std::string& path) {
  const Json& jd = io::require(part, "dims", path);
  if (!jd.is_array() || jd.size() != 2) throw SchemaError(path + ".dims: expected [n, m]");
  const Dims dims{io::to_index(jd[0], path + ".dims[0]"), io::to_index(jd[1], path + ".dims[1]")};
  require_bipartite(x, dims, "verify");
  const std::string status = io::require(part, "status", path).get<std::string>();
  if (status == "entangled-certified") {
    check_witness(out, prefix, x, dims, io::require(part, "witness", path), o, path + ".witness");
  } else if (status == "separable-certified") {
    if (part.contains("decomposition")) {
      const Json& terms = part["decomposition"];
      CMatrix sum = CMatrix::Zero(x.rows(), x.cols());
      bool psd = true;
      for (std::size_t t = 0; t < terms.size(); ++t) {
        const std::string tp = path + ".decomposition[" + std::to_string(t) + "]";
        const CMatrix a = io::to_matrix(io::require(terms[t], "a", tp), tp + ".a");
        const CMatrix b = io::to_matrix(io::require(terms[t], "b", tp), tp + ".b");
        psd = psd && psd_ok(a, o.psd_tol) && psd_ok(b, o.psd_tol);
        sum += kron(a, b);
      }
      out.add(prefix + "product terms positive", psd && !terms.empty(), static_cast<double>(terms.size()));
      const double err = (sum - x).norm();
      out.add(prefix + "product terms reconstruct the part", err <= o.psd_tol * scale_of(x), err);
    } else {
      double l1 = 0, l2 = 0;
      out.add(prefix + "part positive", psd_ok(x, o.psd_tol, &l1), l1);
      out.add(prefix + "partial transpose positive", psd_ok(partial_transpose(x, dims, Leg::second), o.psd_tol, &l2),
              l2);
      out.add(prefix + "shape where PPT implies separable", decisive_shape(dims),
              static_cast<double>(dims.total()));
    }
  }
}

inline std::string combine_status(const std::vector<std::string>& parts) {
  bool all_sep = true;
  for (const auto& s : parts) {
    if (s == "entangled-certified") return s;
    all_sep = all_sep && s == "separable-certified";
  }
  return all_sep ? "separable-certified" : "undecided";
}

inline void verify_sep(Collector& out, const Json& doc, const VerifyOptions& o) {
  const BipartiteElement x = io::to_element(io::require(doc, "element", "$"), "$.element");
  const Json& parts = io::require(doc, "parts", "$");
  if (!parts.is_array() || parts.size() != x.num_pairs()) throw SchemaError("$.parts: one entry per block pair expected");
  std::vector<std::string> statuses;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string pp = "$.parts[" + std::to_string(i) + "]";
    const BlockPair bp{static_cast<std::size_t>(io::to_index(io::require(parts[i], "k", pp), pp + ".k")),
                       static_cast<std::size_t>(io::to_index(io::require(parts[i], "l", pp), pp + ".l"))};
    if (bp.k >= x.alg_a().num_blocks() || bp.l >= x.alg_b().num_blocks()) throw SchemaError(pp + ": bad block pair");
    statuses.push_back(io::require(parts[i], "status", pp).get<std::string>());
    check_part(out, "part " + std::to_string(bp.k) + "," + std::to_string(bp.l) + ": ", x.part(bp), parts[i], o, pp);
  }
  const std::string claimed = io::require(doc, "status", "$").get<std::string>();
  out.add("overall verdict is the conjunction of parts", claimed == combine_status(statuses), 0);
}

inline void verify_scan(Collector& out, const Json& doc, const VerifyOptions& o) {
  const FdAlgebra a = io::to_algebra(io::require(doc, "algA", "$"), "$.algA");
  const FdAlgebra b = io::to_algebra(io::require(doc, "algB", "$"), "$.algB");
  const double threshold = 1.0 / static_cast<double>(std::min(a.rank(), b.rank()));
  const double claimed_threshold = io::to_double(io::require(doc, "threshold", "$"), "$.threshold");
  out.add("threshold is 1/min(rank)", close(claimed_threshold, threshold, 1e-15), claimed_threshold - threshold);
  const Json& radii = io::require(doc, "radii", "$");
  double onset = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const std::string rp = "$.radii[" + std::to_string(i) + "]";
    const double r = io::to_double(io::require(radii[i], "radius", rp), rp + ".radius");
    const int ent = io::require(radii[i], "random", rp).at("entangled").get<int>() +
                    io::require(radii[i], "directed", rp).at("entangled").get<int>();
    if (ent > 0) onset = std::min(onset, r);
    const Json& fe = io::require(radii[i], "firstEntangled", rp);
    out.add("radius " + std::to_string(r) + ": witness present iff entangled count positive", fe.is_null() == (ent == 0),
            ent);
    if (!fe.is_null()) {
      const CMatrix part = io::to_matrix(io::require(fe, "part", rp + ".firstEntangled"), rp + ".firstEntangled.part");
      check_part(out, "radius " + std::to_string(r) + ": ", part, fe, o, rp + ".firstEntangled");
    }
  }
  const Json& jo = io::require(doc, "onset", "$");
  const bool onset_ok = jo.is_null() ? std::isinf(onset) : (!std::isinf(onset) && jo.get<double>() == onset);
  out.add("onset is the smallest radius with an entangled verdict", onset_ok, std::isinf(onset) ? 0 : onset);
}

inline void verify_sdp(Collector& out, const Json& doc, const VerifyOptions& o) {
  const sdp::SdpProblem p = io::to_problem(io::require(doc, "problem", "$"), "$.problem");
  const Json& sol = io::require(doc, "solution", "$");
  const std::string status = io::require(sol, "status", "$.solution").get<std::string>();
  if (status != "optimal") {
    out.add("solution status is " + status + " (no optimality certificate)", true, 0);
    return;
  }
  const Json& jx = io::require(sol, "X", "$.solution");
  const Json& jy = io::require(sol, "y", "$.solution");
  if (!jx.is_array() || jx.size() != p.blocks().size()) throw SchemaError("$.solution.X: one matrix per block expected");
  if (!jy.is_array() || jy.size() != p.num_constraints()) throw SchemaError("$.solution.y: one multiplier per constraint");
  std::vector<CMatrix> x;
  for (std::size_t k = 0; k < jx.size(); ++k) x.push_back(io::to_matrix(jx[k], "$.solution.X[" + std::to_string(k) + "]"));
  RVector y(static_cast<Index>(jy.size()));
  for (std::size_t i = 0; i < jy.size(); ++i) y(static_cast<Index>(i)) = io::to_double(jy[i], "$.solution.y[" + std::to_string(i) + "]");

  double pres = 0, bnorm = 0, primal = 0, dual = 0;
  std::vector<CMatrix> s = p.objective();
  for (std::size_t c = 0; c < p.num_constraints(); ++c) {
    double ax = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const CMatrix a = p.coefficient(c, k);
      ax += (a * x[k]).trace().real();
      s[k] -= y(static_cast<Index>(c)) * a;
    }
    const double rhs = p.constraints()[c].rhs;
    pres += (ax - rhs) * (ax - rhs);
    bnorm += rhs * rhs;
    dual += rhs * y(static_cast<Index>(c));
  }
  for (std::size_t k = 0; k < x.size(); ++k) primal += (p.objective()[k] * x[k]).trace().real();
  pres = std::sqrt(pres) / (1.0 + std::sqrt(bnorm));
  out.add("primal residual ||A(X) - b|| / (1 + ||b||)", pres <= o.sdp_tol, pres);
  double worst_x = 0, worst_s = 0, cnorm = 0;
  bool xpsd = true, spsd = true;
  for (std::size_t k = 0; k < x.size(); ++k) {
    double lx = 0, ls = 0;
    xpsd = psd_ok(x[k], o.sdp_tol, &lx) && xpsd;
    worst_x = std::min(worst_x, lx);
    ls = lambda_min(hermitian_part(s[k]));
    cnorm = std::max(cnorm, operator_norm(p.objective()[k]));
    worst_s = std::min(worst_s, ls);
  }
  spsd = worst_s >= -o.sdp_tol * (1.0 + cnorm);
  out.add("X positive semidefinite", xpsd, worst_x);
  out.add("C - sum y_i A_i positive semidefinite", spsd, worst_s);
  const double gap = std::abs(primal - dual) / (1.0 + std::abs(primal) + std::abs(dual));
  out.add("relative duality gap", gap <= o.sdp_tol, gap);
  const double claimed = io::to_double(io::require(sol, "primalObj", "$.solution"), "$.solution.primalObj");
  out.add("primal objective recomputed", close(primal, claimed, o.value_tol), primal - claimed);
}

inline void verify_kappa(Collector& out, const Json& doc, const VerifyOptions& o) {
  const Index n = io::to_index(io::require(doc, "n", "$"), "$.n"), m = io::to_index(io::require(doc, "m", "$"), "$.m");
  const LinearMapRep phi = io::to_map(io::require(doc, "map", "$"), "$.map");
  if (phi.dim_in() != m || phi.dim_out() != n) throw SchemaError("$.map: expected a map M_m -> M_n");
  const CMatrix y = io::to_matrix(io::require(doc, "element", "$"), "$.element");
  const CVector w = io::to_vector(io::require(doc, "stateVector", "$"), "$.stateVector");
  if (y.rows() != n * m || w.size() != n * n) throw SchemaError("$.element: wrong size");
  const double unital = operator_norm(unit_image(phi.choi(), m, n) - CMatrix::Identity(n, n));
  out.add("map unital", unital <= o.psd_tol, unital);
  if (doc.contains("positivity")) {
    const Decomposition dec = io::to_decomposition(doc["positivity"], "$.positivity");
    double d1 = 0, d2 = 0;
    out.add("positivity certificate cp part PSD", psd_ok(dec.cp_part, o.psd_tol, &d1), d1);
    out.add("positivity certificate copositive part PSD", psd_ok(dec.copositive_part, o.psd_tol, &d2), d2);
    const double resid =
        (phi.choi() - dec.cp_part - partial_transpose(dec.copositive_part, {m, n}, Leg::second)).norm();
    out.add("map equals its decomposition", resid <= o.psd_tol * scale_of(phi.choi()), resid);
  } else {
    out.add("positivity certificate present", false, 0);
  }
  const double ynorm = operator_norm(y);
  out.add("element self-adjoint", is_hermitian(y, 1e-12), ynorm);
  const double ws = w.norm();
  out.add("state vector is a unit vector", std::abs(ws - 1.0) <= 1e-12, ws - 1.0);
  const double value = std::abs(w.dot(amplified(phi.choi(), m, n, n, y) * w)) / ynorm;
  const double lower = io::to_double(io::require(doc, "lowerBound", "$"), "$.lowerBound");
  out.add("lower bound recomputed", close(value, lower, o.value_tol), value - lower);
  const double d = static_cast<double>(std::min(n, m));
  out.add("lower bound within 1e-3 of min(n,m)", std::abs(value - d) <= 1e-3, value - d);
  out.add("lower bound at most min(n,m)", value <= d + 1e-9, d - value);
}

inline void verify_eta(Collector& out, const Json& doc, const VerifyOptions& o) {
  const FdAlgebra a = io::to_algebra(io::require(doc, "algA", "$"), "$.algA");
  const FdAlgebra b = io::to_algebra(io::require(doc, "algB", "$"), "$.algB");
  const Index eta = io::to_index(io::require(doc, "eta", "$"), "$.eta");
  const Index d = std::min(a.rank(), b.rank());
  out.add("eta equals min(rank A, rank B)", eta == d, static_cast<double>(eta - d));
  const Json& w = io::require(doc, "witness", "$");
  const LinearMapRep f = io::to_map(io::require(w, "map", "$.witness"), "$.witness.map");
  const std::size_t k = static_cast<std::size_t>(io::to_index(io::require(w, "k", "$.witness"), "$.witness.k"));
  const std::size_t l = static_cast<std::size_t>(io::to_index(io::require(w, "l", "$.witness"), "$.witness.l"));
  if (k >= a.num_blocks() || l >= b.num_blocks()) throw SchemaError("$.witness: block pair out of range");
  out.add("witness map lives on a maximal-rank block pair",
          f.dim_in() == a.block(k) && f.dim_out() == b.block(l) && std::min(a.block(k), b.block(l)) == d, 0);
  const double unit = operator_norm(unit_image(f.choi(), f.dim_in(), f.dim_out()));
  out.add("witness map has ||f(1)|| <= 1", unit <= 1.0 + o.value_tol, 1.0 - unit);
  double cop = 0;
  out.add("witness map is copositive (transpose-CP)",
          psd_ok(partial_transpose(f.choi(), f.choi_dims(), Leg::second), o.psd_tol, &cop), cop);
  if (doc.contains("measured")) {
    const Json& mj = doc["measured"];
    const double lo = io::to_double(io::require(mj, "lower", "$.measured"), "$.measured.lower");
    const double up = io::to_double(io::require(mj, "upper", "$.measured"), "$.measured.upper");
    check_cb(out, "measured.", f.choi(), f.dim_in(), f.dim_out(), io::require(mj, "certificate", "$.measured"), lo, up, o);
    out.add("sandwich brackets eta within 1e-3", lo >= static_cast<double>(eta) - 1e-3 && up <= static_cast<double>(eta) + 1e-3,
            up - lo);
  }
}

}  // namespace detail

/// Dispatches on "kind". Malformed documents raise SchemaError.
inline Report verify_document(const Json& doc, const VerifyOptions& o = {}) {
  Report rep;
  rep.kind = io::require(doc, "kind", "$").get<std::string>();
  detail::Collector out{rep};
  if (rep.kind == "cbnorm") {
    const LinearMapRep psi = io::to_map(io::require(doc, "map", "$"), "$.map");
    detail::check_cb(out, "", psi.choi(), psi.dim_in(), psi.dim_out(), io::require(doc, "certificate", "$"),
                     io::to_double(io::require(doc, "lower", "$"), "$.lower"),
                     io::to_double(io::require(doc, "upper", "$"), "$.upper"), o);
  } else if (rep.kind == "sep-check") {
    detail::verify_sep(out, doc, o);
  } else if (rep.kind == "gamma-scan") {
    detail::verify_scan(out, doc, o);
  } else if (rep.kind == "sdp-solve") {
    detail::verify_sdp(out, doc, o);
  } else if (rep.kind == "kappa") {
    detail::verify_kappa(out, doc, o);
  } else if (rep.kind == "eta") {
    detail::verify_eta(out, doc, o);
  } else if (rep.kind == "eta-formula") {
    out.add("formula-only result carries no certificate", true, 0);
  } else {
    throw SchemaError("$.kind: unknown document kind '" + rep.kind + "'");
  }
  return rep;
}

inline Json report_json(const Report& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks) checks.push_back(Json{{"name", c.name}, {"passed", c.passed}, {"margin", c.margin}});
  return Json{{"kind", "verification"}, {"source", r.kind}, {"passed", r.passed()}, {"checks", checks}};
}

}  // namespace cbsep::verify
