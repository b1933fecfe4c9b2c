#pragma once

// Result documents. Every document carries "kind"; certificates are embedded
// so that verify_document can re-check them without solving anything.

#include <cstdint>
#include <optional>
#include <string>

#include "cbsep/cbnorm.hpp"
#include "cbsep/io.hpp"
#include "cbsep/separability.hpp"
#include "cbsep/theorems.hpp"

namespace cbsep::io {

inline Json dims_json(Dims d) { return Json::array({d.first, d.second}); }

inline Json checks_json(const std::vector<NamedCheck>& checks) {
  Json out = Json::array();
  for (const auto& c : checks) out.push_back(Json{{"name", c.name}, {"passed", c.passed}, {"margin", c.margin}});
  return out;
}

inline Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json cb_certificate_json(const CbNormResult& r) {
  return Json{{"level", r.level_used},
              {"phi1", matrix_json(r.pair.phi1.choi())},
              {"phi2", matrix_json(r.pair.phi2.choi())},
              {"lowerWitness", matrix_json(r.lower_witness)}};
}

inline Json cbnorm_json(const LinearMapRep& psi, const CbNormResult& r) {
  return Json{{"kind", "cbnorm"},
              {"map", map_json(psi)},
              {"lower", r.lower},
              {"upper", r.upper},
              {"width", r.width()},
              {"loose", r.loose},
              {"sdpIterations", r.sdp_iterations},
              {"certificate", cb_certificate_json(r)}};
}

inline Json witness_json(const EntanglementWitness& w) {
  return Json{{"witness", matrix_json(w.witness)},
              {"map", map_json(w.map)},
              {"mapCertificate", decomposition_json(w.map_certificate)},
              {"vector", vector_json(w.vector)},
              {"violation", w.violation}};
}

inline Json part_verdict_json(const PartVerdict& v) {
  Json out{{"k", v.pair.k},
           {"l", v.pair.l},
           {"dims", dims_json(v.dims)},
           {"status", to_string(v.status)},
           {"margin", v.margin},
           {"pptMargin", v.ppt_margin},
           {"sdpValue", v.sdp_value},
           {"reason", v.reason}};
  if (v.witness) out["witness"] = witness_json(*v.witness);
  if (v.decomposition) {
    Json terms = Json::array();
    for (const auto& [a, b] : *v.decomposition) terms.push_back(Json{{"a", matrix_json(a)}, {"b", matrix_json(b)}});
    out["decomposition"] = terms;
  }
  return out;
}

inline Json sep_verdict_json(const BipartiteElement& x, const SepVerdict& v) {
  Json parts = Json::array();
  for (const auto& p : v.parts) parts.push_back(part_verdict_json(p));
  return Json{{"kind", "sep-check"},
              {"element", element_json(x)},
              {"status", to_string(v.status)},
              {"margin", v.margin},
              {"parts", parts}};
}

inline Json counts_json(const VerdictCounts& c) {
  return Json{{"separable", c.separable}, {"entangled", c.entangled}, {"undecided", c.undecided}};
}

inline Json scan_json(const ScanReport& s) {
  Json radii = Json::array();
  for (const auto& rr : s.radii) {
    Json r{{"radius", rr.radius}, {"random", counts_json(rr.random)}, {"directed", counts_json(rr.directed)}};
    if (rr.first_entangled) {
      r["firstEntangled"] = part_verdict_json(*rr.first_entangled);
      r["firstEntangled"]["part"] = matrix_json(rr.first_entangled_part);
    } else {
      r["firstEntangled"] = nullptr;
    }
    radii.push_back(std::move(r));
  }
  return Json{{"kind", "gamma-scan"},
              {"algA", algebra_json(s.alg_a)},
              {"algB", algebra_json(s.alg_b)},
              {"samples", s.samples},
              {"seed", s.seed},
              {"threshold", s.threshold},
              {"onset", optional_number(s.onset)},
              {"onsetRandom", optional_number(s.onset_random)},
              {"onsetDirected", optional_number(s.onset_directed)},
              {"onsetConsistent", s.onset_consistent},
              {"radii", radii}};
}

inline Json eta_json(const FdAlgebra& a, const FdAlgebra& b, const EtaCertificate& e) {
  Json out{{"kind", "eta"},
           {"algA", algebra_json(a)},
           {"algB", algebra_json(b)},
           {"eta", e.value},
           {"gamma", "1/" + std::to_string(e.value)},
           {"witness", Json{{"k", e.witness.blocks.k}, {"l", e.witness.blocks.l}, {"map", map_json(e.witness.map)}}}};
  if (e.measured)
    out["measured"] = Json{{"lower", e.measured->lower},
                           {"upper", e.measured->upper},
                           {"certificate", cb_certificate_json(*e.measured)}};
  out["checks"] = checks_json(e.checks);
  return out;
}

/// Formula-only answer when a rank is infinite.
inline Json eta_formula_json(const RankFormulaReport& r) {
  return Json{{"kind", "eta-formula"},
              {"rankA", r.rank_a.str()},
              {"rankB", r.rank_b.str()},
              {"eta", r.eta.str()},
              {"kappa", r.kappa.str()},
              {"gamma", r.gamma ? r.gamma->str() : std::string("0")},
              {"deskVerifiable", r.desk_verifiable}};
}

inline Json kappa_json(const KappaReport& k, const PositivityCertificate& pos) {
  Json out{{"kind", "kappa"},
           {"n", k.n},
           {"m", k.m},
           {"lowerBound", k.lower_bound},
           {"upperBound", k.upper_bound},
           {"measuredUpper", k.measured_upper},
           {"traceConvention", k.trace_convention},
           {"map", map_json(k.map)},
           {"element", matrix_json(k.element)},
           {"stateVector", vector_json(k.state_vector)}};
  if (pos.decomposition) out["positivity"] = decomposition_json(*pos.decomposition);
  out["checks"] = checks_json(k.checks);
  return out;
}

inline Json sdp_json(const sdp::SdpProblem& p, const sdp::SdpSolution& s) {
  return Json{{"kind", "sdp-solve"}, {"problem", problem_json(p)}, {"solution", solution_json(s)}};
}

}  // namespace cbsep::io
