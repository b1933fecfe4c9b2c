#pragma once

// JSON forms. Matrices are arrays of rows, each entry a two-element array
// [re, im]; objects keep insertion order so output is byte-stable.
//
//   algebra   {"blocks":[2,3]}
//   element   {"algA":{...},"algB":{...},"parts":[{"k":0,"l":0,"m":[[...]]},...]}
//   map       {"dimIn":2,"dimOut":3,"choi":[[...]]}
//   problem   {"blocks":[n,...],"objective":[M,...],
//              "constraints":[{"rhs":b,"terms":[{"block":k,"entries":[[i,j,[re,im]],...]}]}]}
//             (entries list the upper triangle i <= j of each coefficient matrix)

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cbsep/algebra.hpp"
#include "cbsep/maps.hpp"
#include "cbsep/sdp.hpp"

namespace cbsep::io {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Path-aware readers

inline const Json& require(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(path + "." + key + ": missing field");
  return *it;
}

inline double to_double(const Json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path + ": expected a number");
  return j.get<double>();
}

inline Index to_index(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SchemaError(path + ": expected an integer");
  return j.get<Index>();
}

inline Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Complex to_complex(const Json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) throw SchemaError(path + ": expected [re, im]");
  return {to_double(j[0], path + "[0]"), to_double(j[1], path + "[1]")};
}

inline Json matrix_json(const CMatrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(complex_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline CMatrix to_matrix(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw SchemaError(path + ": expected a nonempty array of rows");
  const auto rows = static_cast<Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) throw SchemaError(path + "[0]: expected a nonempty row");
  const auto cols = static_cast<Index>(j[0].size());
  CMatrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      throw SchemaError(rp + ": expected a row of length " + std::to_string(cols));
    for (Index c = 0; c < cols; ++c)
      m(r, c) = to_complex(row[static_cast<std::size_t>(c)], rp + "[" + std::to_string(c) + "]");
  }
  return m;
}

inline Json vector_json(const CVector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(complex_json(v(i)));
  return out;
}

inline CVector to_vector(const Json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path + ": expected an array");
  CVector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = to_complex(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

// ---------------------------------------------------------------------------
// Domain types

inline Json algebra_json(const FdAlgebra& a) {
  Json blocks = Json::array();
  for (Index n : a.blocks()) blocks.push_back(n);
  return Json{{"blocks", blocks}};
}

inline FdAlgebra to_algebra(const Json& j, const std::string& path) {
  const Json& b = require(j, "blocks", path);
  if (!b.is_array()) throw SchemaError(path + ".blocks: expected an array");
  std::vector<Index> blocks;
  for (std::size_t i = 0; i < b.size(); ++i) blocks.push_back(to_index(b[i], path + ".blocks[" + std::to_string(i) + "]"));
  try {
    return FdAlgebra(std::move(blocks));
  } catch (const Error& e) {
    throw SchemaError(path + ".blocks: " + e.what());
  }
}

inline Json element_json(const BipartiteElement& x) {
  Json parts = Json::array();
  for (const BlockPair bp : x.block_pairs())
    parts.push_back(Json{{"k", bp.k}, {"l", bp.l}, {"m", matrix_json(x.part(bp))}});
  return Json{{"algA", algebra_json(x.alg_a())}, {"algB", algebra_json(x.alg_b())}, {"parts", parts}};
}

inline BipartiteElement to_element(const Json& j, const std::string& path) {
  const FdAlgebra a = to_algebra(require(j, "algA", path), path + ".algA");
  const FdAlgebra b = to_algebra(require(j, "algB", path), path + ".algB");
  const Json& parts = require(j, "parts", path);
  if (!parts.is_array()) throw SchemaError(path + ".parts: expected an array");
  std::vector<Component> comps;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string pp = path + ".parts[" + std::to_string(i) + "]";
    const Index k = to_index(require(parts[i], "k", pp), pp + ".k");
    const Index l = to_index(require(parts[i], "l", pp), pp + ".l");
    if (k < 0 || l < 0 || static_cast<std::size_t>(k) >= a.num_blocks() || static_cast<std::size_t>(l) >= b.num_blocks())
      throw SchemaError(pp + ": block pair out of range");
    comps.emplace_back(BlockPair{static_cast<std::size_t>(k), static_cast<std::size_t>(l)},
                       to_matrix(require(parts[i], "m", pp), pp + ".m"));
  }
  try {
    return reassemble(a, b, std::move(comps));
  } catch (const Error& e) {
    throw SchemaError(path + ".parts: " + e.what());
  }
}

inline Json map_json(const LinearMapRep& f) {
  return Json{{"dimIn", f.dim_in()}, {"dimOut", f.dim_out()}, {"choi", matrix_json(f.choi())}};
}

inline LinearMapRep to_map(const Json& j, const std::string& path) {
  const Index n = to_index(require(j, "dimIn", path), path + ".dimIn");
  const Index m = to_index(require(j, "dimOut", path), path + ".dimOut");
  CMatrix c = to_matrix(require(j, "choi", path), path + ".choi");
  try {
    return {n, m, std::move(c)};
  } catch (const Error& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

inline Json decomposition_json(const Decomposition& d) {
  return Json{{"cpPart", matrix_json(d.cp_part)}, {"copositivePart", matrix_json(d.copositive_part)},
              {"residual", d.residual}};
}

inline Decomposition to_decomposition(const Json& j, const std::string& path) {
  return {to_matrix(require(j, "cpPart", path), path + ".cpPart"),
          to_matrix(require(j, "copositivePart", path), path + ".copositivePart"),
          to_double(require(j, "residual", path), path + ".residual")};
}

// ---------------------------------------------------------------------------
// SDP problems and solutions

inline Json problem_json(const sdp::SdpProblem& p) {
  Json blocks = Json::array(), objective = Json::array(), constraints = Json::array();
  for (Index n : p.blocks()) blocks.push_back(n);
  for (const CMatrix& c : p.objective()) objective.push_back(matrix_json(c));
  for (std::size_t c = 0; c < p.num_constraints(); ++c) {
    Json terms = Json::array();
    for (std::size_t k = 0; k < p.blocks().size(); ++k) {
      const CMatrix a = p.coefficient(c, k);
      Json entries = Json::array();
      for (Index i = 0; i < a.rows(); ++i)
        for (Index jj = i; jj < a.cols(); ++jj)
          if (a(i, jj) != Complex(0.0)) entries.push_back(Json::array({i, jj, complex_json(a(i, jj))}));
      if (!entries.empty()) terms.push_back(Json{{"block", k}, {"entries", entries}});
    }
    constraints.push_back(Json{{"rhs", p.constraints()[c].rhs}, {"terms", terms}});
  }
  return Json{{"blocks", blocks}, {"objective", objective}, {"constraints", constraints}};
}

inline sdp::SdpProblem to_problem(const Json& j, const std::string& path) {
  const Json& jb = require(j, "blocks", path);
  if (!jb.is_array()) throw SchemaError(path + ".blocks: expected an array");
  std::vector<Index> blocks;
  for (std::size_t i = 0; i < jb.size(); ++i) blocks.push_back(to_index(jb[i], path + ".blocks[" + std::to_string(i) + "]"));
  for (std::size_t i = 0; i < blocks.size(); ++i)
    if (blocks[i] <= 0) throw SchemaError(path + ".blocks[" + std::to_string(i) + "]: must be positive");
  sdp::SdpProblem p(blocks);
  if (j.contains("objective")) {
    const Json& obj = j["objective"];
    if (!obj.is_array() || obj.size() != blocks.size())
      throw SchemaError(path + ".objective: expected one matrix per block");
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const std::string op = path + ".objective[" + std::to_string(k) + "]";
      const CMatrix c = to_matrix(obj[k], op);
      if (c.rows() != blocks[k] || c.cols() != blocks[k]) throw SchemaError(op + ": wrong size");
      try {
        p.set_objective(k, c);
      } catch (const Error& e) {
        throw SchemaError(op + ": " + e.what());
      }
    }
  }
  const Json& cons = require(j, "constraints", path);
  if (!cons.is_array()) throw SchemaError(path + ".constraints: expected an array");
  for (std::size_t c = 0; c < cons.size(); ++c) {
    const std::string cp = path + ".constraints[" + std::to_string(c) + "]";
    const auto idx = p.add_constraint(to_double(require(cons[c], "rhs", cp), cp + ".rhs"));
    const Json& terms = require(cons[c], "terms", cp);
    if (!terms.is_array()) throw SchemaError(cp + ".terms: expected an array");
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const std::string tp = cp + ".terms[" + std::to_string(t) + "]";
      const Index block = to_index(require(terms[t], "block", tp), tp + ".block");
      const Json& entries = require(terms[t], "entries", tp);
      if (!entries.is_array()) throw SchemaError(tp + ".entries: expected an array");
      for (std::size_t e = 0; e < entries.size(); ++e) {
        const std::string ep = tp + ".entries[" + std::to_string(e) + "]";
        const Json& en = entries[e];
        if (!en.is_array() || en.size() != 3) throw SchemaError(ep + ": expected [i, j, [re, im]]");
        const Index i = to_index(en[0], ep + "[0]"), jj = to_index(en[1], ep + "[1]");
        if (i > jj) throw SchemaError(ep + ": entries must satisfy i <= j");
        try {
          p.add_term(idx, static_cast<std::size_t>(block), i, jj, to_complex(en[2], ep + "[2]"));
        } catch (const SchemaError&) {
          throw;
        } catch (const Error& err) {
          throw SchemaError(ep + ": " + err.what());
        }
      }
    }
  }
  return p;
}

inline Json solution_json(const sdp::SdpSolution& s) {
  Json x = Json::array(), y = Json::array(), warnings = Json::array();
  for (const CMatrix& b : s.X) x.push_back(matrix_json(b));
  for (Index i = 0; i < s.y.size(); ++i) y.push_back(s.y(i));
  for (const auto& w : s.warnings) warnings.push_back(w);
  Json out{{"status", sdp::to_string(s.status)},
           {"primalObj", s.primal_obj},
           {"dualObj", s.dual_obj},
           {"iterations", s.iterations},
           {"residuals", {{"primal", s.residuals.primal}, {"dual", s.residuals.dual}, {"gap", s.residuals.gap}}},
           {"X", x},
           {"y", y},
           {"warnings", warnings}};
  if (s.status == sdp::Status::infeasible) {
    Json ray = Json::array();
    for (Index i = 0; i < s.infeasibility_ray.size(); ++i) ray.push_back(s.infeasibility_ray(i));
    out["infeasibilityRay"] = ray;
  }
  return out;
}

// ---------------------------------------------------------------------------

inline Json read_json_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw SchemaError(file + ": cannot open file");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw SchemaError(file + ": malformed JSON (" + e.what() + ")");
  }
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace cbsep::io
