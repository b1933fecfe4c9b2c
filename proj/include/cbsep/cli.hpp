#pragma once

// Batch front end. dispatch() parses argv, runs one computation and writes a
// single JSON (or scalar CSV) document. Exit codes: 0 result, 1 error,
// 2 undecided or loose result under --strict.

#include <CLI11.hpp>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cbsep/cbsep.hpp"
#include "cbsep/report.hpp"
#include "cbsep/verify.hpp"

namespace cbsep::cli {

using io::Json;

struct RunConfig {
  std::string subcommand;
  std::uint64_t seed = 0;
  unsigned threads = default_thread_count();
  double tol_psd = 1e-8;  // verification PSD slack
  double tol_gap = 1e-3;  // relative cb sandwich width counted as loose
  bool strict = false;
  std::string out;
  std::string format = "json";
  std::string verify;

  // subcommand inputs
  std::string map_spec;
  Index level = 0;
  std::string element_spec;
  std::string dims;
  std::string alg_a, alg_b;
  std::string radii;
  int samples = 50;
  std::string problem;
};

/// Output of one run: a JSON document plus its CSV rendering.
struct Outcome {
  Json doc;
  std::vector<std::vector<std::string>> csv;  // first row is the header
  bool undecided = false;
};

// ---------------------------------------------------------------------------
// Spec parsing

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

inline Index parse_index(const std::string& s, const std::string& what) {
  Index v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || v <= 0)
    throw SchemaError(what + ": expected a positive integer, got '" + s + "'");
  return v;
}

inline double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw SchemaError(what + ": expected a number, got '" + s + "'");
}

inline Dims parse_dims(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw SchemaError("--dims: expected NxM, got '" + s + "'");
  return {parse_index(s.substr(0, x), "--dims"), parse_index(s.substr(x + 1), "--dims")};
}

inline FdAlgebra parse_algebra(const std::string& s, const std::string& what) {
  std::vector<Index> blocks;
  for (const auto& t : split(s, ',')) blocks.push_back(parse_index(t, what));
  if (blocks.empty()) throw SchemaError(what + ": expected a comma-separated list of block sizes");
  return FdAlgebra(std::move(blocks));
}

inline std::optional<RankValue> parse_rank_or_inf(const std::string& s) {
  if (s == "inf") return RankValue::unbounded();
  return std::nullopt;
}

inline void check_cap(Index d, const std::string& what) {
  if (d > kDefaultDimCap) throw SizeError(what + ": dimension " + std::to_string(d) + " exceeds cap");
}

/// transpose:n | identity:n | reduction:n | random:n:m | randomcp:n:m | tracestate:n:m | FILE
inline LinearMapRep parse_map(const std::string& spec, std::uint64_t seed) {
  const auto t = split(spec, ':');
  const std::string& name = t.front();
  auto arg = [&](std::size_t i) {
    if (t.size() <= i) throw SchemaError("--map " + spec + ": missing dimension");
    return parse_index(t[i], "--map " + spec);
  };
  auto square = [&] {
    if (t.size() != 2) throw SchemaError("--map " + spec + ": expected " + name + ":n");
    const Index n = arg(1);
    check_cap(n * n, "--map");
    return n;
  };
  auto rect = [&] {
    if (t.size() != 3) throw SchemaError("--map " + spec + ": expected " + name + ":n:m");
    const Index n = arg(1), m = arg(2);
    check_cap(n * m, "--map");
    return Dims{n, m};
  };
  if (name == "transpose") return transpose_map(square());
  if (name == "identity") return identity_map(square());
  if (name == "reduction") return reduction_map(square());
  if (name == "tracestate") {
    const Dims d = rect();
    return trace_state_map(d.first, d.second);
  }
  if (name == "random") {
    const Dims d = rect();
    Rng rng = make_rng(seed, 0xC11A);
    return random_hp_map(d.first, d.second, rng);
  }
  if (name == "randomcp") {
    const Dims d = rect();
    Rng rng = make_rng(seed, 0xC11B);
    return random_cp_map(d.first, d.second, rng);
  }
  return io::to_map(io::read_json_file(spec), "$");
}

/// id_minus:swap:r | gue:r | extremal:eps | FILE
inline BipartiteElement parse_element(const std::string& spec, const std::optional<std::pair<FdAlgebra, FdAlgebra>>& algs,
                                      std::uint64_t seed) {
  const auto t = split(spec, ':');
  const std::string& name = t.front();
  if (name == "id_minus" || name == "gue" || name == "extremal") {
    if (!algs) throw PreconditionError("--element " + spec + ": needs --dims or --algA/--algB");
    const FdAlgebra& a = algs->first;
    const FdAlgebra& b = algs->second;
    const BlockPair bp{a.max_rank_block(), b.max_rank_block()};
    const double d = static_cast<double>(std::min(a.rank(), b.rank()));
    if (name == "id_minus") {
      if (t.size() != 3 || t[1] != "swap") throw SchemaError("--element " + spec + ": expected id_minus:swap:r");
      return one_minus(directed_sample(a, b, bp, parse_double(t[2], "--element")));
    }
    if (t.size() != 2) throw SchemaError("--element " + spec + ": expected " + name + ":value");
    const double v = parse_double(t[1], "--element");
    if (name == "gue") {
      Rng rng = make_rng(seed, 0xC11C);
      return one_minus(random_bipartite_gue(a, b, v, rng));
    }
    return one_minus(directed_sample(a, b, bp, (1.0 + v) / d));
  }
  return io::to_element(io::read_json_file(spec), "$");
}

inline std::vector<double> parse_radii(const std::string& s) {
  std::vector<double> out;
  for (const auto& t : split(s, ',')) out.push_back(parse_double(t, "--radii"));
  if (out.empty()) throw SchemaError("--radii: expected a comma-separated list");
  return out;
}

// ---------------------------------------------------------------------------
// Formatting

inline std::string num(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, p) : std::string("nan");
}

inline std::string num(std::int64_t v) { return std::to_string(v); }

inline std::string csv_text(const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  return out;
}

inline std::string blocks_str(const FdAlgebra& a) {
  std::string s;
  for (std::size_t k = 0; k < a.num_blocks(); ++k) s += (k ? ";" : "") + std::to_string(a.block(k));
  return s;
}

// ---------------------------------------------------------------------------
// Subcommands

inline CbNormOptions cb_options(const RunConfig& c) {
  CbNormOptions o;
  o.level = c.level;
  o.budget.seed = c.seed;
  o.budget.threads = c.threads;
  o.loose_tol = c.tol_gap;
  return o;
}

inline Outcome run_cbnorm(const RunConfig& c) {
  const LinearMapRep psi = parse_map(c.map_spec, c.seed);
  const CbNormResult r = cb_norm(psi, cb_options(c));
  Outcome o{io::cbnorm_json(psi, r), {}, r.loose};
  o.doc["input"] = c.map_spec;
  o.csv = {{"map", "dimIn", "dimOut", "level", "lower", "upper", "width", "loose"},
           {c.map_spec, num(psi.dim_in()), num(psi.dim_out()), num(r.level_used), num(r.lower), num(r.upper),
            num(r.width()), r.loose ? "1" : "0"}};
  return o;
}

inline std::optional<std::pair<FdAlgebra, FdAlgebra>> algebras_from(const RunConfig& c) {
  if (!c.dims.empty()) {
    const Dims d = parse_dims(c.dims);
    return std::make_pair(FdAlgebra({d.first}), FdAlgebra({d.second}));
  }
  if (!c.alg_a.empty() && !c.alg_b.empty())
    return std::make_pair(parse_algebra(c.alg_a, "--algA"), parse_algebra(c.alg_b, "--algB"));
  return std::nullopt;
}

inline Outcome run_sep_check(const RunConfig& c) {
  const auto algs = algebras_from(c);
  if (algs) {
    for (Index n : algs->first.blocks())
      for (Index m : algs->second.blocks()) check_cap(n * m, "sep-check");
  }
  const BipartiteElement x = parse_element(c.element_spec, algs, c.seed);
  const SepVerdict v = entanglement_witness(x);
  Outcome o{io::sep_verdict_json(x, v), {}, v.status == SepStatus::undecided};
  o.doc["input"] = c.element_spec;
  o.csv = {{"k", "l", "n", "m", "status", "margin", "pptMargin"}};
  for (const auto& p : v.parts)
    o.csv.push_back({num(static_cast<std::int64_t>(p.pair.k)), num(static_cast<std::int64_t>(p.pair.l)),
                     num(p.dims.first), num(p.dims.second), to_string(p.status), num(p.margin), num(p.ppt_margin)});
  o.csv.push_back({"all", "all", "", "", to_string(v.status), num(v.margin), ""});
  return o;
}

inline Outcome run_gamma_scan(const RunConfig& c) {
  const FdAlgebra a = parse_algebra(c.alg_a, "--algA"), b = parse_algebra(c.alg_b, "--algB");
  ScanOptions so;
  so.threads = c.threads;
  const ScanReport s = sep_ball_scan(a, b, parse_radii(c.radii), c.samples, c.seed, so);
  Outcome o{io::scan_json(s), {}, false};
  o.csv = {{"radius", "sampleKind", "separable", "entangled", "undecided"}};
  for (const auto& rr : s.radii) {
    o.undecided = o.undecided || rr.random.undecided + rr.directed.undecided > 0;
    for (const auto& [kind, cnt] : {std::pair{"random", rr.random}, std::pair{"directed", rr.directed}})
      o.csv.push_back({num(rr.radius), kind, num(std::int64_t{cnt.separable}), num(std::int64_t{cnt.entangled}),
                       num(std::int64_t{cnt.undecided})});
  }
  return o;
}

inline Outcome run_eta(const RunConfig& c) {
  const auto ia = parse_rank_or_inf(c.alg_a), ib = parse_rank_or_inf(c.alg_b);
  if (ia || ib) {
    const RankValue ra = ia ? *ia : RankValue::finite(parse_algebra(c.alg_a, "--algA").rank());
    const RankValue rb = ib ? *ib : RankValue::finite(parse_algebra(c.alg_b, "--algB").rank());
    const RankFormulaReport r = rank_formula(ra, rb);
    Outcome o{io::eta_formula_json(r), {}, false};
    o.csv = {{"rankA", "rankB", "eta", "gamma", "deskVerifiable"},
             {ra.str(), rb.str(), r.eta.str(), r.gamma ? r.gamma->str() : "0", r.desk_verifiable ? "1" : "0"}};
    return o;
  }
  const FdAlgebra a = parse_algebra(c.alg_a, "--algA"), b = parse_algebra(c.alg_b, "--algB");
  EtaOptions eo;
  eo.cb = cb_options(c);
  const EtaCertificate e = eta_certificate(a, b, eo);
  Outcome o{io::eta_json(a, b, e), {}, e.measured && e.measured->loose};
  o.csv = {{"algA", "algB", "eta", "lower", "upper", "checksPassed"},
           {blocks_str(a), blocks_str(b), num(e.value), e.measured ? num(e.measured->lower) : "",
            e.measured ? num(e.measured->upper) : "", all_passed(e.checks) ? "1" : "0"}};
  return o;
}

inline Outcome run_kappa(const RunConfig& c) {
  const Dims d = parse_dims(c.dims);
  check_cap(d.first * d.first * d.second, "kappa");
  const KappaReport k = kappa_matrix_check(d.first, d.second);
  const PositivityCertificate pos = certify_positive_map(k.map, RefuterBudget{64, 200, c.seed});
  Outcome o{io::kappa_json(k, pos), {}, false};
  o.csv = {{"n", "m", "lowerBound", "upperBound", "measuredUpper", "checksPassed"},
           {num(k.n), num(k.m), num(k.lower_bound), num(k.upper_bound), num(k.measured_upper),
            all_passed(k.checks) ? "1" : "0"}};
  return o;
}

inline sdp::SdpProblem parse_problem(const std::string& spec, std::uint64_t seed) {
  if (spec.rfind("random:", 0) == 0) {
    const auto t = split(spec, ':');
    if (t.size() != 3) throw SchemaError("--problem " + spec + ": expected random:b1,b2,...:constraints");
    std::vector<Index> blocks;
    for (const auto& s : split(t[1], ',')) blocks.push_back(parse_index(s, "--problem"));
    const Index nc = parse_index(t[2], "--problem");
    Index total = 0;
    for (Index b : blocks) total += b;
    check_cap(total, "--problem");
    Rng rng = make_rng(seed, 0xC11D);
    return sdp::random_feasible_problem(blocks, static_cast<std::size_t>(nc), rng);
  }
  return io::to_problem(io::read_json_file(spec), "$");
}

inline Outcome run_sdp_solve(const RunConfig& c) {
  const sdp::SdpProblem p = parse_problem(c.problem, c.seed);
  const sdp::SdpSolution s = sdp::solve(p);
  Outcome o{io::sdp_json(p, s), {}, s.status != sdp::Status::optimal};
  o.doc["input"] = c.problem;
  o.csv = {{"status", "primalObj", "dualObj", "gap", "primalResidual", "dualResidual", "iterations"},
           {sdp::to_string(s.status), num(s.primal_obj), num(s.dual_obj), num(s.residuals.gap),
            num(s.residuals.primal), num(s.residuals.dual), num(std::int64_t{s.iterations})}};
  return o;
}

inline Outcome run_verify(const RunConfig& c) {
  verify::VerifyOptions vo;
  vo.psd_tol = c.tol_psd;
  const verify::Report r = verify::verify_document(io::read_json_file(c.verify), vo);
  Outcome o{verify::report_json(r), {}, false};
  o.csv = {{"check", "passed", "margin"}};
  for (const auto& ch : r.checks) o.csv.push_back({"\"" + ch.name + "\"", ch.passed ? "1" : "0", num(ch.margin)});
  return o;
}

// ---------------------------------------------------------------------------

inline void add_common(CLI::App& app, RunConfig& c) {
  app.add_option("--seed", c.seed, "seed for every stochastic procedure");
  app.add_option("--threads", c.threads, "worker threads for scans and restarts")->check(CLI::PositiveNumber);
  app.add_option("--tol-psd", c.tol_psd, "relative PSD slack used when verifying certificates");
  app.add_option("--tol-gap", c.tol_gap, "relative cb sandwich width above which a result is loose");
  app.add_flag("--strict", c.strict, "exit 2 on undecided or loose results");
  app.add_option("--out", c.out, "write the document here instead of stdout");
  app.add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
}

/// argv[0] is the program name.
inline int dispatch(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"cb-norms and separability in finite dimensions"};
  app.name(argv.empty() ? "cbsep" : argv.front());
  add_common(app, c);
  app.add_option("--verify", c.verify, "re-check the certificates in a result document");
  app.require_subcommand(0, 1);

  auto* cb = app.add_subcommand("cbnorm", "cb-norm sandwich of a map");
  cb->add_option("--map", c.map_spec, "transpose:n, identity:n, reduction:n, random:n:m, randomcp:n:m, tracestate:n:m or FILE")
      ->required();
  cb->add_option("--level", c.level, "amplification level of the lower bound (default min(n,m))");

  auto* sep = app.add_subcommand("sep-check", "separability verdict for an element");
  sep->add_option("--element", c.element_spec, "id_minus:swap:r, gue:r, extremal:eps or FILE")->required();
  sep->add_option("--dims", c.dims, "NxM for M_N (x) M_M");
  sep->add_option("--algA", c.alg_a, "block sizes of A, comma separated");
  sep->add_option("--algB", c.alg_b, "block sizes of B, comma separated");

  auto* gs = app.add_subcommand("gamma-scan", "separable-ball radius scan");
  gs->add_option("--algA", c.alg_a)->required();
  gs->add_option("--algB", c.alg_b)->required();
  gs->add_option("--radii", c.radii, "comma separated radii in (0, 1]")->required();
  gs->add_option("--samples", c.samples, "random samples per radius")->check(CLI::PositiveNumber);

  auto* eta = app.add_subcommand("eta", "eta with its embedded witness");
  eta->add_option("--algA", c.alg_a, "block sizes, or inf")->required();
  eta->add_option("--algB", c.alg_b, "block sizes, or inf")->required();

  auto* kap = app.add_subcommand("kappa", "kappa at matrix level");
  kap->add_option("--dims", c.dims, "NxM")->required();

  auto* sd = app.add_subcommand("sdp-solve", "solve a semidefinite program");
  sd->add_option("--problem", c.problem, "FILE or random:b1,b2,...:constraints")->required();

  for (auto* s : {cb, sep, gs, eta, kap, sd}) {
    s->fallthrough();
    add_common(*s, c);
  }

  try {
    std::vector<std::string> rev(argv.rbegin(), argv.rend());
    if (!rev.empty()) rev.pop_back();
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    Outcome o;
    if (!c.verify.empty()) {
      if (!app.get_subcommands().empty()) throw PreconditionError("--verify cannot be combined with a subcommand");
      o = run_verify(c);
    } else if (app.get_subcommands().empty()) {
      throw PreconditionError("a subcommand is required: cbnorm, sep-check, gamma-scan, eta, kappa, sdp-solve");
    } else {
      c.subcommand = app.get_subcommands().front()->get_name();
      if (c.subcommand == "sep-check" && c.dims.empty() && (c.alg_a.empty() != c.alg_b.empty()))
        throw PreconditionError("sep-check: give both --algA and --algB");
      if (c.subcommand == "cbnorm") o = run_cbnorm(c);
      else if (c.subcommand == "sep-check") o = run_sep_check(c);
      else if (c.subcommand == "gamma-scan") o = run_gamma_scan(c);
      else if (c.subcommand == "eta") o = run_eta(c);
      else if (c.subcommand == "kappa") o = run_kappa(c);
      else o = run_sdp_solve(c);
      o.doc["seed"] = c.seed;
    }
    const std::string text = c.format == "csv" ? csv_text(o.csv) : io::dump(o.doc);
    if (c.out.empty()) {
      out << text;
    } else {
      std::ofstream f(c.out, std::ios::binary);
      if (!f) throw PreconditionError("cannot write " + c.out);
      f << text;
    }
    if (!c.verify.empty()) return o.doc["passed"].get<bool>() ? 0 : 1;
    return c.strict && o.undecided ? 2 : 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

inline int dispatch(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return dispatch(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace cbsep::cli
