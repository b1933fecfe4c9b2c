// Small tour: cb-norm sandwich, a separability verdict, and the rank formula.

#include <iomanip>
#include <iostream>

#include "cbsep/cbsep.hpp"

using namespace cbsep;

int main() {
  std::cout << std::setprecision(10);

  // Transpose on M_3: the sandwich closes at 3.
  const CbNormResult t = cb_norm(transpose_map(3));
  std::cout << "||transpose_3||_cb in [" << t.lower << ", " << t.upper << "]\n";

  // 1 (x) 1 - r F on M_2 (x) M_2 on either side of r = 1/2.
  for (double r : {0.5, 0.55}) {
    const BipartiteElement x = one_minus(directed_sample(FdAlgebra({2}), FdAlgebra({2}), {0, 0}, r));
    const SepVerdict v = entanglement_witness(x);
    std::cout << "1 - " << r << " F: " << to_string(v.status) << " (ppt margin " << v.parts[0].ppt_margin << ")\n";
  }

  // A = M_2 + M_3, B = M_4.
  const FdAlgebra a({2, 3}), b({4});
  const RankFormulaReport rep = rank_formula_report(a, b);
  std::cout << "eta = " << rep.eta.str() << ", gamma = " << rep.gamma->str() << ", kappa = " << rep.kappa.str()
            << ", all checks " << (all_passed(rep.checks) ? "pass" : "FAIL") << "\n";
  for (const auto& c : rep.checks) std::cout << "  " << (c.passed ? "ok  " : "FAIL") << " " << c.name << "\n";

  // Certificates round-trip through JSON and re-verify without an SDP.
  const auto doc = io::cbnorm_json(transpose_map(3), t);
  std::cout << "cb certificate re-verified: " << (verify::verify_document(doc).passed() ? "yes" : "no") << "\n";
  return all_passed(rep.checks) ? 0 : 1;
}
