// Acceptance run: one PASS/FAIL line per criterion, exit status = number of failures.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "cbsep/cbsep.hpp"

#ifndef CBSEP_CLI_PATH
#error "CBSEP_CLI_PATH must name the command-line tool"
#endif

using namespace cbsep;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

// 1 -------------------------------------------------------------------------
Outcome transpose_extremal() {
  Outcome o{true, ""};
  for (Index n : {2, 3, 4}) {
    const auto t0 = Clock::now();
    const CbNormResult r = cb_norm(transpose_map(n));
    const double secs = seconds_since(t0);
    const double v = static_cast<double>(n);
    const bool ok = std::abs(r.lower - v) <= 1e-3 && std::abs(r.upper - v) <= 1e-3 && secs < 5.0;
    o.pass = o.pass && ok;
    o.detail += "n=" + std::to_string(n) + " [" + fmt(r.lower) + ", " + fmt(r.upper) + "] " + fmt(secs) + "s; ";
  }
  return o;
}

// 2 -------------------------------------------------------------------------
Outcome general_bound() {
  int violations = 0, total = 0;
  double worst_ratio = 0;
  for (const auto& [n, m] : {std::pair<Index, Index>{3, 2}, std::pair<Index, Index>{2, 4}}) {
    for (int s = 0; s < 100; ++s) {
      Rng rng = make_rng(static_cast<std::uint64_t>(s), 0x200 + static_cast<std::uint64_t>(n * 10 + m));
      const LinearMapRep psi(n, m, random_ginibre(n * m, n * m, rng));
      AmplificationBudget budget;
      budget.seed = static_cast<std::uint64_t>(s);
      const double norm = map_norm(psi, budget);
      const double upper = cb_upper_sdp(psi).value;
      const double cap = static_cast<double>(std::min(n, m)) * norm;
      if (upper > cap + 1e-5) ++violations;
      worst_ratio = std::max(worst_ratio, upper / cap);
      ++total;
    }
  }
  return {violations == 0, std::to_string(total) + " maps, " + std::to_string(violations) +
                               " violations, max cb_upper/(min(n,m)||psi||) = " + fmt(worst_ratio)};
}

// 3 -------------------------------------------------------------------------
Outcome cp_consistency() {
  int bad = 0;
  double worst_dev = 0, worst_width = 0;
  for (int s = 0; s < 100; ++s) {
    Rng rng = make_rng(static_cast<std::uint64_t>(s), 0x300);
    const Index n = 2 + s % 2, m = 2 + (s / 2) % 2;
    const LinearMapRep phi = random_cp_map(n, m, rng, 1 + s % 3);
    CbNormOptions opts;
    opts.budget.seed = static_cast<std::uint64_t>(s);
    const CbNormResult r = cb_norm(phi, opts);
    const double unit = operator_norm(apply_map(phi, CMatrix::Identity(n, n)));
    const double dev = std::abs(r.upper - unit), width = r.width() / r.upper;
    worst_dev = std::max(worst_dev, dev);
    worst_width = std::max(worst_width, width);
    if (dev > 1e-5 || width > 1e-4) ++bad;
  }
  return {bad == 0, "100 CP maps, worst |upper - ||phi(1)||| = " + fmt(worst_dev) + ", worst relative width = " +
                        fmt(worst_width)};
}

// 4 -------------------------------------------------------------------------
Outcome separable_ball() {
  Outcome o{true, ""};
  for (const auto& [n, m] : {std::pair<Index, Index>{2, 2}, std::pair<Index, Index>{2, 3}}) {
    const FdAlgebra a({n}), b({m});
    const double d = static_cast<double>(std::min(n, m));
    const ScanReport s = sep_ball_scan(a, b, {1.0 / d}, 200, 0x400 + static_cast<std::uint64_t>(m));
    const auto& rr = s.radii.front();
    const int ent = rr.random.entangled + rr.directed.entangled;
    const BipartiteElement x = one_minus(directed_sample(a, b, {0, 0}, 1.05 / d));
    const SepVerdict v = entanglement_witness(x);
    const double ppt = v.parts.front().ppt_margin;
    const bool ok = ent == 0 && v.status == SepStatus::entangled_certified && std::abs(ppt + 0.05) <= 1e-9;
    o.pass = o.pass && ok;
    o.detail += "(" + std::to_string(n) + "," + std::to_string(m) + "): " + std::to_string(ent) +
                " entangled at 1/min, extremal " + to_string(v.status) + " ppt " + fmt(ppt) + "; ";
  }
  return o;
}

// 5 -------------------------------------------------------------------------
Outcome pairing_identity() {
  double worst = 0;
  for (int s = 0; s < 500; ++s) {
    Rng rng = make_rng(static_cast<std::uint64_t>(s), 0x500);
    const Index n = 1 + s % 3, m = 1 + (s / 3) % 3;
    const LinearMapRep f(m, n, random_ginibre(n * m, n * m, rng));  // M_m -> M_n
    const CMatrix x = random_ginibre(n * m, n * m, rng);            // M_n (x) M_m
    const Complex lhs = (max_entangled(n) * apply_amplified(f, n, x)).trace();
    worst = std::max(worst, std::abs(lhs - hat_functional(f, x)));
  }
  return {worst <= 1e-9, "500 pairs, worst deviation " + fmt(worst)};
}

// 6 -------------------------------------------------------------------------
Outcome direct_sum_splitting() {
  const FdAlgebra a({2, 3}), b({2});
  int mismatches = 0, entangled = 0, separable = 0;
  for (int s = 0; s < 100; ++s) {
    Rng rng = make_rng(static_cast<std::uint64_t>(s), 0x600);
    const double r = 0.2 + 0.8 * std::uniform_real_distribution<double>(0, 1)(rng);
    BipartiteElement x = one_minus(random_bipartite_gue(a, b, r, rng));
    const SepVerdict whole = entanglement_witness(x);
    std::vector<SepStatus> comps;
    for (const auto& [bp, part] : split_components(x)) {
      const BipartiteElement single(FdAlgebra({a.block(bp.k)}), FdAlgebra({b.block(bp.l)}), {part});
      comps.push_back(entanglement_witness(single).status);
    }
    if (whole.status != combine(comps)) ++mismatches;
    entangled += whole.status == SepStatus::entangled_certified;
    separable += whole.status == SepStatus::separable_certified;
  }
  return {mismatches == 0, "100 elements, " + std::to_string(mismatches) + " mismatches (" + std::to_string(entangled) +
                               " entangled, " + std::to_string(separable) + " separable)"};
}

// 7 -------------------------------------------------------------------------
Outcome rank_formula_end_to_end() {
  Outcome o{true, ""};
  const std::vector<std::pair<FdAlgebra, FdAlgebra>> shapes{
      {FdAlgebra({2, 3}), FdAlgebra({4})}, {FdAlgebra({1, 1}), FdAlgebra({3})}, {FdAlgebra({2}), FdAlgebra({2})}};
  for (const auto& [a, b] : shapes) {
    const RankFormulaReport r = rank_formula_report(a, b);
    const bool ok = all_passed(r.checks);
    o.pass = o.pass && ok;
    o.detail += to_string(a) + "x" + to_string(b) + " eta=" + r.eta.str() + " gamma=" + r.gamma->str() +
                (ok ? " ok; " : " FAILED; ");
    if (!ok)
      for (const auto& c : r.checks)
        if (!c.passed) o.detail += "[" + c.name + "] ";
  }
  return o;
}

// 8 -------------------------------------------------------------------------
Outcome kappa_matrix_level() {
  Outcome o{true, ""};
  for (const auto& [n, m] : {std::pair<Index, Index>{2, 2}, std::pair<Index, Index>{2, 5}, std::pair<Index, Index>{3, 3}}) {
    const KappaReport k = kappa_matrix_check(n, m);
    const double d = static_cast<double>(std::min(n, m));
    const bool ok = std::abs(k.lower_bound - d) <= 1e-3 && k.lower_bound <= k.upper_bound + 1e-9;
    o.pass = o.pass && ok;
    o.detail += "(" + std::to_string(n) + "," + std::to_string(m) + ") lower " + fmt(k.lower_bound) + "; ";
  }
  return o;
}

// 9 -------------------------------------------------------------------------
Outcome dilation_chain() {
  const FdAlgebra a({2}), b({2});
  const double r = 0.5;
  int bad_norm = 0, entangled = 0, bad_pos = 0;
  double worst_eig = 0;
  for (int s = 0; s < 50; ++s) {
    Rng rng = make_rng(static_cast<std::uint64_t>(s), 0x900);
    const BipartiteElement x(a, b, {random_contraction(4, rng)});
    const BipartiteElement y = dilation_embed(x, r);
    const CMatrix yp = y.part({0, 0});
    if (operator_norm(yp - CMatrix::Identity(yp.rows(), yp.rows())) > r + 1e-10) ++bad_norm;
    if (entanglement_witness(y).status == SepStatus::entangled_certified) ++entangled;
    const LinearMapRep f = random_unital_positive_map(4, 2 + s % 2, rng);
    const double l = lambda_min(hermitian_part(apply_amplified(f, 2, yp)));
    worst_eig = std::min(worst_eig, l);
    if (l < -1e-9) ++bad_pos;
  }
  return {bad_norm == 0 && entangled == 0 && bad_pos == 0,
          "50 contractions: " + std::to_string(bad_norm) + " norm violations, " + std::to_string(entangled) +
              " entangled, " + std::to_string(bad_pos) + " positivity failures (worst eig " + fmt(worst_eig) + ")"};
}

// 10 ------------------------------------------------------------------------
Outcome sdp_health() {
  int bad = 0, nondeterministic = 0;
  double worst_gap = 0, worst_kkt = 0;
  for (int s = 0; s < 200; ++s) {
    Rng rng = make_rng(static_cast<std::uint64_t>(s), 0xA00);
    std::uniform_int_distribution<int> bs(1, 16), nb(1, 3), nc(1, 40);
    std::vector<Index> blocks;
    const int k = nb(rng);
    for (int i = 0; i < k; ++i) blocks.push_back(bs(rng));
    const sdp::SdpProblem p = sdp::random_feasible_problem(blocks, static_cast<std::size_t>(nc(rng)), rng);
    const sdp::SdpSolution sol = sdp::solve(p);
    const sdp::KktReport kkt = sdp::kkt_residuals(p, sol);
    // relative gap, as in the solver's own optimality definition
    const double gap = sol.residuals.gap / (1.0 + std::abs(sol.primal_obj));
    const double kmax = std::max({kkt.primal, kkt.dual, kkt.complement, -kkt.min_eig_x, -kkt.min_eig_s});
    worst_gap = std::max(worst_gap, gap);
    worst_kkt = std::max(worst_kkt, kmax);
    if (sol.status != sdp::Status::optimal || gap > 1e-7 || kmax > 1e-7) ++bad;
    if (io::solution_json(sdp::solve(p)).dump() != io::solution_json(sol).dump()) ++nondeterministic;
  }
  return {bad == 0 && nondeterministic == 0,
          "200 problems, " + std::to_string(bad) + " unhealthy, " + std::to_string(nondeterministic) +
              " non-repeatable, worst relative gap " + fmt(worst_gap) + ", worst KKT " + fmt(worst_kkt)};
}

// 11 ------------------------------------------------------------------------
struct Proc {
  int code = -1;
  std::string out;
};

Proc run_cli(const std::string& args) {
  Proc p;
  const std::string cmd = std::string("\"") + CBSEP_CLI_PATH + "\" " + args + " 2>/dev/null";
  FILE* f = popen(cmd.c_str(), "r");
  if (!f) return p;
  char buf[65536];
  std::size_t got = 0;
  while ((got = fread(buf, 1, sizeof buf, f)) > 0) p.out.append(buf, got);
  const int st = pclose(f);
  p.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return p;
}

const std::vector<std::string>& cli_suite() {
  static const std::vector<std::string> suite{
      "cbnorm --map transpose:2",
      "cbnorm --map transpose:3",
      "cbnorm --map transpose:4",
      "cbnorm --map random:3:2 --seed 1",
      "cbnorm --map random:2:4 --seed 2",
      "cbnorm --map randomcp:2:3 --seed 3",
      "sep-check --element id_minus:swap:0.5 --dims 2x2",
      "sep-check --element extremal:0.05 --dims 2x2",
      "sep-check --element extremal:0.05 --dims 2x3",
      "sep-check --element gue:0.5 --dims 2x2 --seed 4",
      "gamma-scan --algA 2 --algB 2 --radii 0.45,0.5,0.55 --samples 200 --seed 1",
      "gamma-scan --algA 2,3 --algB 3 --radii 0.3,0.34,0.4 --samples 50 --seed 7",
      "gamma-scan --algA 1,1 --algB 3 --radii 0.5,1 --samples 20 --seed 2",
      "eta --algA 2,3 --algB 4",
      "eta --algA 1,1 --algB 3",
      "eta --algA 2 --algB 2",
      "eta --algA inf --algB 3",
      "kappa --dims 2x2",
      "kappa --dims 2x5",
      "kappa --dims 3x3",
      "sdp-solve --problem random:8,4:12 --seed 9",
  };
  return suite;
}

Outcome cli_reproducibility() {
  const auto t0 = Clock::now();
  const auto dir = std::filesystem::temp_directory_path() / "cbsep_acceptance";
  std::filesystem::create_directories(dir);
  int differ = 0, failed = 0, unverified = 0, idx = 0;
  for (const auto& args : cli_suite()) {
    const Proc first = run_cli(args), second = run_cli(args);
    if (first.code != 0 || second.code != 0) ++failed;
    if (first.out != second.out || first.out.empty()) ++differ;
    const auto path = dir / ("doc" + std::to_string(idx++) + ".json");
    std::ofstream(path, std::ios::binary) << first.out;
    if (run_cli("--verify \"" + path.string() + "\"").code != 0) ++unverified;
  }
  std::filesystem::remove_all(dir);
  const double secs = seconds_since(t0);
  return {differ == 0 && failed == 0 && unverified == 0 && secs < 600.0,
          std::to_string(cli_suite().size()) + " commands twice: " + std::to_string(differ) + " differ, " +
              std::to_string(failed) + " failed, " + std::to_string(unverified) + " failed --verify, " + fmt(secs) +
              "s"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"cb-norm of the transpose", transpose_extremal},
      {"cb_upper <= min(n,m) ||psi||", general_bound},
      {"CP consistency", cp_consistency},
      {"separable ball radius", separable_ball},
      {"pairing identity", pairing_identity},
      {"direct-sum splitting", direct_sum_splitting},
      {"rank formula end to end", rank_formula_end_to_end},
      {"kappa at matrix level", kappa_matrix_level},
      {"dilation chain", dilation_chain},
      {"SDP solver health", sdp_health},
      {"CLI reproducibility", cli_reproducibility},
  };
  // Optional argument: run only the listed criterion numbers.
  std::vector<bool> selected(criteria.size(), argc <= 1);
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k >= 1 && k <= static_cast<int>(criteria.size())) selected[static_cast<std::size_t>(k - 1)] = true;
  }
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected[i]) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << (i + 1) << ": " << criteria[i].first << "  ("
              << o.detail << ")" << std::endl;
  }
  return failures;
}
