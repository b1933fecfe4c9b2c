#pragma once

// Separability of positive elements of A (x) B, decided block pair by block
// pair. Witnesses are decomposable: W = C1 + C2^Gamma with C1, C2 >= 0, found
// by SDP. A negative value Tr(W x) < 0 is turned into a positive map phi with
// lambda_min((Id (x) phi)(x)) < 0, which is what gets reported and checked.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cbsep/algebra.hpp"
#include "cbsep/maps.hpp"
#include "cbsep/parallel.hpp"
#include "cbsep/random.hpp"
#include "cbsep/sdp.hpp"

namespace cbsep {

inline constexpr double kSepSlack = 1e-9;

enum class SepStatus { separable_certified, entangled_certified, undecided };

inline const char* to_string(SepStatus s) {
  switch (s) {
    case SepStatus::separable_certified: return "separable-certified";
    case SepStatus::entangled_certified: return "entangled-certified";
    case SepStatus::undecided: return "undecided";
  }
  return "unknown";
}

struct EntanglementWitness {
  CMatrix witness;              // W on C^n (x) C^m
  LinearMapRep map;             // phi : M_m -> M_n, applied to the second leg
  Decomposition map_certificate;  // Choi(phi) = D1 + D2^Gamma
  CVector vector;               // unit vector with <v|(Id (x) phi)(x)|v> = violation
  double violation = 0;
};

using ProductTerm = std::pair<CMatrix, CMatrix>;

struct PartVerdict {
  BlockPair pair;
  Dims dims;
  SepStatus status = SepStatus::undecided;
  std::optional<EntanglementWitness> witness;
  std::optional<std::vector<ProductTerm>> decomposition;
  double margin = 0;        // reconstruction error, PPT margin, or violation
  double ppt_margin = 0;    // lambda_min(part^Gamma)
  double sdp_value = 0;     // min Tr(W x) over normalized decomposable W
  double analytic_value = 0;  // min(lambda_min(x), lambda_min(x^Gamma))
  std::string reason;
};

struct SepVerdict {
  SepStatus status = SepStatus::undecided;
  std::vector<PartVerdict> parts;
  double margin = 0;

  [[nodiscard]] const PartVerdict* first_entangled() const {
    for (const auto& p : parts)
      if (p.status == SepStatus::entangled_certified) return &p;
    return nullptr;
  }
};

/// Entangled if any part is; separable if all parts are; else undecided.
inline SepStatus combine(const std::vector<SepStatus>& parts) {
  bool all_sep = true;
  for (SepStatus s : parts) {
    if (s == SepStatus::entangled_certified) return s;
    all_sep = all_sep && s == SepStatus::separable_certified;
  }
  return all_sep ? SepStatus::separable_certified : SepStatus::undecided;
}

inline bool ppt_decisive(Dims d) {
  return (d.first == 2 && d.second == 2) || (d.first == 2 && d.second == 3) || (d.first == 3 && d.second == 2);
}

// ---------------------------------------------------------------------------

struct PptReport {
  bool ppt = true;
  std::vector<double> margins;  // lambda_min of each part's partial transpose
};

inline PptReport ppt_check(const BipartiteElement& x) {
  PptReport r;
  for (const BlockPair bp : x.block_pairs()) {
    const CMatrix part = hermitian_checked(x.part(bp), "ppt_check");
    const double lmin = lambda_min(partial_transpose(part, x.dims(bp), Leg::second));
    r.margins.push_back(lmin);
    if (lmin < -kSepSlack * std::max(1.0, operator_norm(part))) r.ppt = false;
  }
  return r;
}

/// Swaps the legs of an operator on C^n (x) C^m, giving one on C^m (x) C^n.
inline CMatrix swap_legs(const CMatrix& x, Dims dims) {
  require_bipartite(x, dims, "swap_legs");
  const Index n = dims.first, m = dims.second;
  CMatrix out(x.rows(), x.cols());
  for (Index i = 0; i < n; ++i)
    for (Index r = 0; r < m; ++r)
      for (Index j = 0; j < n; ++j)
        for (Index s = 0; s < m; ++s) out(r * n + i, s * n + j) = x(i * m + r, j * m + s);
  return out;
}

/// phi(b) = (Tr_2(W (1 (x) b)))^T, so that Tr(W (a (x) b)) = Tr(a^T phi(b)).
inline LinearMapRep witness_map(const CMatrix& w, Dims dims) {
  return {dims.second, dims.first, swap_legs(CMatrix(w.transpose()), dims)};
}

namespace detail {

inline sdp::SdpProblem witness_problem(const CMatrix& x, Dims dims) {
  const Index d = dims.total();
  sdp::SdpProblem p({d, d});
  p.set_objective(0, x);
  p.set_objective(1, partial_transpose(x, dims, Leg::second));
  const auto c = p.add_constraint(1.0);
  for (Index i = 0; i < d; ++i) {
    p.add_term(c, 0, i, i, 1.0);
    p.add_term(c, 1, i, i, 1.0);
  }
  return p;
}

inline PartVerdict analyze_part(const CMatrix& part_in, Dims dims, BlockPair bp) {
  PartVerdict v;
  v.pair = bp;
  v.dims = dims;
  const CMatrix x = hermitian_checked(part_in, "entanglement_witness");
  const double scale = std::max(1.0, operator_norm(x));
  const double lmin = lambda_min(x);
  if (lmin < -kSepSlack * scale)
    throw PreconditionError("entanglement_witness: part (" + std::to_string(bp.k) + "," + std::to_string(bp.l) +
                            ") is not positive (smallest eigenvalue " + std::to_string(lmin) + ")");
  const CMatrix xg = partial_transpose(x, dims, Leg::second);
  v.ppt_margin = lambda_min(xg);
  v.analytic_value = std::min(lmin, v.ppt_margin);

  if (std::min(dims.first, dims.second) == 1) {
    // C (x) M_m: every positive element is a product 1 (x) x.
    const CMatrix px = project_psd(x);
    std::vector<ProductTerm> terms;
    if (dims.first == 1)
      terms.emplace_back(CMatrix::Identity(1, 1), px);
    else
      terms.emplace_back(px, CMatrix::Identity(1, 1));
    v.margin = (x - px).norm();
    v.decomposition = std::move(terms);
    v.status = SepStatus::separable_certified;
    v.reason = "one-dimensional leg";
    v.sdp_value = v.analytic_value;
    return v;
  }

  const sdp::SdpSolution sol = sdp::solve(witness_problem(x, dims));
  v.sdp_value = sol.primal_obj;
  if (sol.status != sdp::Status::optimal) {
    v.reason = std::string("witness SDP ended with status ") + sdp::to_string(sol.status);
    return v;
  }
  if (v.sdp_value < -kSepSlack * scale) {
    const CMatrix c1 = project_psd(sol.X[0]);
    const CMatrix c2 = project_psd(sol.X[1]);
    EntanglementWitness w;
    w.witness = c1 + partial_transpose(c2, dims, Leg::second);
    w.map = witness_map(w.witness, dims);
    const Dims md = w.map.choi_dims();
    w.map_certificate = Decomposition{swap_legs(CMatrix(c1.transpose()), dims), swap_legs(c2, dims), 0.0};
    w.map_certificate.residual =
        (w.map.choi() - w.map_certificate.cp_part - partial_transpose(w.map_certificate.copositive_part, md, Leg::second))
            .norm();
    const CMatrix y = hermitian_part(apply_amplified(w.map, dims.first, x));
    const EigenDecomposition e = eig_hermitian(y);
    w.vector = e.vectors.col(0);
    w.violation = e.values(0);
    if (w.violation < -kSepSlack * scale) {
      v.margin = w.violation;
      v.witness = std::move(w);
      v.status = SepStatus::entangled_certified;
      v.reason = "decomposable witness";
      return v;
    }
    v.reason = "witness value negative but induced map shows no violation";
    return v;
  }
  if (v.ppt_margin >= -kSepSlack * scale && ppt_decisive(dims)) {
    v.status = SepStatus::separable_certified;
    v.margin = v.ppt_margin;
    v.reason = "PPT in a PPT-decisive shape";
    return v;
  }
  v.reason = "no decomposable witness; PPT not decisive for " + to_string(dims);
  return v;
}

}  // namespace detail

/// Per-part verdicts and their conjunction.
inline SepVerdict entanglement_witness(const BipartiteElement& x) {
  SepVerdict out;
  std::vector<SepStatus> st;
  for (const BlockPair bp : x.block_pairs()) {
    out.parts.push_back(detail::analyze_part(x.part(bp), x.dims(bp), bp));
    st.push_back(out.parts.back().status);
  }
  out.status = combine(st);
  if (const PartVerdict* e = out.first_entangled()) {
    out.margin = e->margin;
  } else {
    out.margin = 0;
    for (const auto& p : out.parts) out.margin = std::max(out.margin, std::abs(p.margin));
  }
  return out;
}

// ---------------------------------------------------------------------------

/// y = [[1, r x], [r x*, 1]] on A (x) M_{2k}; the M_2 factor is the outer index
/// of the M_{2k} leg.
inline BipartiteElement dilation_embed(const BipartiteElement& x, double r) {
  if (x.alg_b().num_blocks() != 1) throw PreconditionError("dilation_embed: second algebra must be a single M_k");
  if (r < 0 || r > 1) throw PreconditionError("dilation_embed: r must lie in [0, 1]");
  if (x.norm() > 1 + 1e-12) throw PreconditionError("dilation_embed: ||x|| = " + std::to_string(x.norm()) + " > 1");
  const Index k = x.alg_b().block(0);
  std::vector<CMatrix> parts;
  for (const BlockPair bp : x.block_pairs()) {
    const Index n = x.alg_a().block(bp.k);
    const CMatrix& xp = x.part(bp);
    const Index kk = 2 * k;
    CMatrix y = CMatrix::Identity(n * kk, n * kk);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        for (Index a = 0; a < k; ++a)
          for (Index b = 0; b < k; ++b) {
            const Complex v = r * xp(i * k + a, j * k + b);
            y(i * kk + a, j * kk + k + b) = v;                       // (alpha, beta) = (0, 1)
            y(j * kk + k + b, i * kk + a) = std::conj(v);            // (1, 0) = adjoint
          }
    parts.push_back(std::move(y));
  }
  return {x.alg_a(), FdAlgebra({2 * k}), std::move(parts)};
}

/// 1 (x) 1 - r F on M_n (x) M_n with r = (1 + eps)/n.
inline BipartiteElement extremal_entangled(Index n, double eps) {
  if (n < 1) throw PreconditionError("extremal_entangled: n must be positive");
  if (!(eps > 0)) throw PreconditionError("extremal_entangled: eps must be positive");
  const double r = (1.0 + eps) / static_cast<double>(n);
  if (r > 1.0)
    throw RangeError("extremal_entangled: r = " + std::to_string(r) + " > 1 makes 1 - rF non-positive");
  return BipartiteElement::single({n, n}, CMatrix::Identity(n * n, n * n) - r * swap_operator(n));
}

/// r F_d placed in block pair bp through corner isometries, zero elsewhere.
inline BipartiteElement directed_sample(const FdAlgebra& a, const FdAlgebra& b, BlockPair bp, double r) {
  std::vector<CMatrix> parts;
  for (std::size_t k = 0; k < a.num_blocks(); ++k)
    for (std::size_t l = 0; l < b.num_blocks(); ++l) {
      const Index n = a.block(k), m = b.block(l);
      if (BlockPair{k, l} != bp) {
        parts.push_back(CMatrix::Zero(n * m, n * m));
        continue;
      }
      const Index d = std::min(n, m);
      const CMatrix v = kron(corner_isometry(n, d), corner_isometry(m, d));
      parts.push_back(r * v * swap_operator(d) * v.adjoint());
    }
  return {a, b, std::move(parts)};
}

inline BipartiteElement one_minus(const BipartiteElement& x) {
  return bipartite_identity(x.alg_a(), x.alg_b()) - x;
}

// ---------------------------------------------------------------------------

struct VerdictCounts {
  int separable = 0;
  int entangled = 0;
  int undecided = 0;

  void add(SepStatus s) {
    if (s == SepStatus::separable_certified) ++separable;
    else if (s == SepStatus::entangled_certified) ++entangled;
    else ++undecided;
  }
};

struct RadiusReport {
  double radius = 0;
  VerdictCounts random;
  VerdictCounts directed;
  std::optional<PartVerdict> first_entangled;  // lowest sample index; directed after random
  CMatrix first_entangled_part;                // the matching part of 1 - x
};

struct ScanReport {
  FdAlgebra alg_a;
  FdAlgebra alg_b;
  int samples = 0;
  std::uint64_t seed = 0;
  std::vector<RadiusReport> radii;
  std::optional<double> onset;           // smallest radius with any entangled verdict
  std::optional<double> onset_random;
  std::optional<double> onset_directed;
  double threshold = 0;                  // 1 / min(rank A, rank B)
  bool onset_consistent = true;          // onset >= threshold - 1e-9
};

struct ScanOptions {
  unsigned threads = 1;
  bool directed = true;
};

/// GUE sample with max part norm exactly r.
inline BipartiteElement random_bipartite_gue(const FdAlgebra& a, const FdAlgebra& b, double r, Rng& rng) {
  std::vector<CMatrix> parts;
  for (Index n : a.blocks())
    for (Index m : b.blocks()) parts.push_back(random_gue(n * m, rng));
  BipartiteElement x(a, b, std::move(parts));
  const double nrm = x.norm();
  if (nrm > 0) x *= r / nrm;
  return x;
}

inline ScanReport sep_ball_scan(const FdAlgebra& a, const FdAlgebra& b, const std::vector<double>& radii, int samples,
                                std::uint64_t seed, const ScanOptions& opts = {}) {
  if (samples < 1) throw PreconditionError("sep_ball_scan: samples must be at least 1");
  for (double r : radii)
    if (!(r > 0 && r <= 1)) throw PreconditionError("sep_ball_scan: radii must lie in (0, 1]");
  ScanReport rep{a, b, samples, seed, {}, {}, {}, {}, 0, true};
  rep.threshold = 1.0 / static_cast<double>(std::min(a.rank(), b.rank()));

  std::vector<BlockPair> directed_pairs;
  if (opts.directed)
    for (std::size_t k = 0; k < a.num_blocks(); ++k)
      for (std::size_t l = 0; l < b.num_blocks(); ++l)
        if (std::min(a.block(k), b.block(l)) >= 2) directed_pairs.push_back({k, l});

  const std::size_t per_radius = static_cast<std::size_t>(samples) + directed_pairs.size();
  const std::size_t total = per_radius * radii.size();
  std::vector<SepVerdict> verdicts(total);
  std::vector<CMatrix> entangled_parts(total);
  parallel_for(total, opts.threads, [&](std::size_t idx) {
    const std::size_t ri = idx / per_radius, si = idx % per_radius;
    const double r = radii[ri];
    BipartiteElement x = [&] {
      if (si < static_cast<std::size_t>(samples)) {
        Rng rng = make_rng(seed, (static_cast<std::uint64_t>(ri) << 32) | si);
        return random_bipartite_gue(a, b, r, rng);
      }
      return directed_sample(a, b, directed_pairs[si - static_cast<std::size_t>(samples)], r);
    }();
    const BipartiteElement y = one_minus(x);
    verdicts[idx] = entanglement_witness(y);
    if (const PartVerdict* e = verdicts[idx].first_entangled()) entangled_parts[idx] = y.part(e->pair);
  });

  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    RadiusReport rr;
    rr.radius = radii[ri];
    for (std::size_t si = 0; si < per_radius; ++si) {
      const SepVerdict& v = verdicts[ri * per_radius + si];
      const bool is_random = si < static_cast<std::size_t>(samples);
      (is_random ? rr.random : rr.directed).add(v.status);
      if (!rr.first_entangled)
        if (const PartVerdict* e = v.first_entangled()) {
          rr.first_entangled = *e;
          rr.first_entangled_part = entangled_parts[ri * per_radius + si];
        }
    }
    auto lower = [&](std::optional<double>& o) { o = o ? std::min(*o, rr.radius) : rr.radius; };
    if (rr.random.entangled > 0) lower(rep.onset_random);
    if (rr.directed.entangled > 0) lower(rep.onset_directed);
    if (rr.random.entangled + rr.directed.entangled > 0) lower(rep.onset);
    rep.radii.push_back(std::move(rr));
  }
  rep.onset_consistent = !rep.onset || *rep.onset >= rep.threshold - 1e-9;
  return rep;
}

}  // namespace cbsep
