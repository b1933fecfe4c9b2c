#include "test_util.hpp"

using namespace cbsep;
using cbsep::testing::max_abs_diff;

namespace {

BipartiteElement id_minus_swap(Index n, double r) {
  return BipartiteElement::single({n, n}, CMatrix::Identity(n * n, n * n) - r * swap_operator(n));
}

void expect_sound(const BipartiteElement& x, const SepVerdict& v) {
  for (const auto& p : v.parts) {
    const CMatrix& part = x.part(p.pair);
    if (p.status == SepStatus::entangled_certified) {
      ASSERT_TRUE(p.witness.has_value());
      const auto& w = *p.witness;
      const CMatrix y = apply_amplified(w.map, p.dims.first, part);
      EXPECT_LT(lambda_min(hermitian_part(y)), -1e-9);
      EXPECT_NEAR(w.vector.dot(y * w.vector).real(), w.violation, 1e-10);
      EXPECT_TRUE(verify_decomposition(w.map.choi(), w.map.choi_dims(), w.map_certificate));
    }
    if (p.status == SepStatus::separable_certified && p.decomposition) {
      CMatrix sum = CMatrix::Zero(part.rows(), part.cols());
      for (const auto& [a, b] : *p.decomposition) {
        EXPECT_GE(lambda_min(a), -1e-9);
        EXPECT_GE(lambda_min(b), -1e-9);
        sum += kron(a, b);
      }
      EXPECT_LE((part - sum).norm(), 1e-7);
    }
  }
}

}  // namespace

TEST(PptCheck, Examples) {
  const auto id = ppt_check(bipartite_identity(FdAlgebra({2}), FdAlgebra({3})));
  EXPECT_TRUE(id.ppt);
  EXPECT_NEAR(id.margins[0], 1.0, 1e-12);
  const auto e = ppt_check(id_minus_swap(2, 0.6));
  EXPECT_FALSE(e.ppt);
  // F^Gamma = P with lambda_max(P) = 2
  EXPECT_NEAR(e.margins[0], 1 - 0.6 * 2, 1e-12);
  Rng rng = make_rng(1);
  const CMatrix a = random_psd(2, 2, rng), b = random_psd(3, 1, rng);
  EXPECT_TRUE(ppt_check(BipartiteElement::single({2, 3}, kron(a, b))).ppt);
}

TEST(EntanglementWitness, SwapAboveHalfIsEntangled) {
  const auto x = id_minus_swap(2, 0.6);
  const auto v = entanglement_witness(x);
  ASSERT_EQ(v.status, SepStatus::entangled_certified);
  const auto& p = v.parts[0];
  // the decomposable optimum equals min(lambda_min(x), lambda_min(x^Gamma)) = -0.2 / tr-normalization
  EXPECT_NEAR(p.sdp_value, p.analytic_value, 1e-7);
  EXPECT_NEAR(p.analytic_value, -0.2, 1e-12);
  expect_sound(x, v);
  // the witness map is certified positive on its own
  EXPECT_EQ(certify_positive_map(p.witness->map).status, PositivityStatus::certified_yes);
}

TEST(EntanglementWitness, SwapAtHalfIsSeparable) {
  const auto v = entanglement_witness(id_minus_swap(2, 0.5));
  EXPECT_EQ(v.status, SepStatus::separable_certified);
  EXPECT_NEAR(v.parts[0].ppt_margin, 0.0, 1e-12);
}

TEST(EntanglementWitness, RandomSeparableNeverEntangled) {
  Rng rng = make_rng(2);
  for (int t = 0; t < 10; ++t) {
    CMatrix x = CMatrix::Zero(9, 9);
    for (int i = 0; i < 4; ++i) x += kron(random_psd(3, 1 + i % 3, rng), random_psd(3, 1 + (i + 1) % 3, rng));
    const auto v = entanglement_witness(BipartiteElement::single({3, 3}, x));
    EXPECT_NE(v.status, SepStatus::entangled_certified);
    EXPECT_GE(v.parts[0].sdp_value, -1e-9 * std::max(1.0, operator_norm(x)));
  }
}

TEST(EntanglementWitness, RejectsNonPositive) {
  EXPECT_THROW(entanglement_witness(BipartiteElement::single({2, 2}, -CMatrix::Identity(4, 4))), PreconditionError);
}

TEST(EntanglementWitness, OneDimensionalLegHasDecomposition) {
  Rng rng = make_rng(3);
  const FdAlgebra a({1, 1}), b({3});
  const BipartiteElement x(a, b, {random_psd(3, 3, rng), random_psd(3, 2, rng)});
  const auto v = entanglement_witness(x);
  ASSERT_EQ(v.status, SepStatus::separable_certified);
  for (const auto& p : v.parts) ASSERT_TRUE(p.decomposition.has_value());
  expect_sound(x, v);
}

TEST(EntanglementWitness, UndecidedOutsideDecisiveShapes) {
  // separable but not decisive: 3x3 identity
  const auto v = entanglement_witness(bipartite_identity(FdAlgebra({3}), FdAlgebra({3})));
  EXPECT_EQ(v.status, SepStatus::undecided);
}

TEST(EntanglementWitness, DirectSumCoherence) {
  const FdAlgebra a({2, 3}), b({2});
  for (int t = 0; t < 10; ++t) {
    Rng rng = make_rng(4, static_cast<std::uint64_t>(t));
    const auto x = one_minus(random_bipartite_gue(a, b, 0.3 + 0.05 * t, rng));
    const auto v = entanglement_witness(x);
    std::vector<SepStatus> st;
    for (const auto& [bp, part] : split_components(x))
      st.push_back(entanglement_witness(BipartiteElement::single(x.dims(bp), part)).status);
    EXPECT_EQ(v.status, combine(st)) << "trial " << t;
    expect_sound(x, v);
  }
}

TEST(EntanglementWitness, UnitalizedWitnessKeepsViolation) {
  int checked = 0;
  for (double eps : {0.05, 0.2}) {
    for (Index n : {2, 3}) {
      const auto x = extremal_entangled(n, eps);
      const auto v = entanglement_witness(x);
      ASSERT_EQ(v.status, SepStatus::entangled_certified);
      const auto& w = *v.parts[0].witness;
      const RVector unit_ev = eigenvalues_hermitian(apply_map(w.map, CMatrix::Identity(n, n)));
      if (unit_ev(0) <= 1e-10) continue;
      const auto g = unitalize(w.map, 0.0);
      EXPECT_LT(lambda_min(hermitian_part(apply_amplified(g, n, x.parts()[0]))), -1e-9);
      ++checked;
    }
  }
  EXPECT_EQ(checked, 4);
}

TEST(DilationEmbed, ZeroGivesIdentity) {
  const BipartiteElement x(FdAlgebra({2}), FdAlgebra({2}), {CMatrix::Zero(4, 4)});
  const auto y = dilation_embed(x, 0.7);
  EXPECT_EQ(y.alg_b(), FdAlgebra({4}));
  EXPECT_EQ(y.parts()[0], CMatrix::Identity(8, 8));
}

TEST(DilationEmbed, UnitaryAtFullRadius) {
  Rng rng = make_rng(5);
  const BipartiteElement x = BipartiteElement::single({2, 2}, random_unitary(4, rng));
  const auto y = dilation_embed(x, 1.0);
  const CMatrix ytilde = y.parts()[0] - CMatrix::Identity(8, 8);
  EXPECT_NEAR(operator_norm(ytilde), 1.0, 1e-10);
  EXPECT_TRUE(is_hermitian(ytilde));
}

TEST(DilationEmbed, BlockLayout) {
  Rng rng = make_rng(6);
  const CMatrix xp = random_contraction(4, rng);
  const auto y = dilation_embed(BipartiteElement::single({2, 2}, xp), 0.5).parts()[0];
  // y((i,alpha,a),(j,beta,b)) with alpha=0, beta=1 equals r x((i,a),(j,b))
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j)
      for (Index a = 0; a < 2; ++a)
        for (Index b = 0; b < 2; ++b) {
          EXPECT_EQ(y(i * 4 + a, j * 4 + 2 + b), 0.5 * xp(i * 2 + a, j * 2 + b));
          EXPECT_EQ(y(i * 4 + 2 + a, j * 4 + b), 0.5 * std::conj(xp(j * 2 + b, i * 2 + a)));
        }
}

TEST(DilationEmbed, Preconditions) {
  const BipartiteElement big = BipartiteElement::single({2, 2}, 2.0 * CMatrix::Identity(4, 4));
  EXPECT_THROW(dilation_embed(big, 0.5), PreconditionError);
  const BipartiteElement ok = BipartiteElement::single({2, 2}, CMatrix::Identity(4, 4));
  EXPECT_THROW(dilation_embed(ok, 1.5), PreconditionError);
  EXPECT_THROW(dilation_embed(BipartiteElement(FdAlgebra({2}), FdAlgebra({1, 1}), {CMatrix::Zero(2, 2), CMatrix::Zero(2, 2)}), 0.5),
               PreconditionError);
}

TEST(DilationEmbed, HalfRadiusNotEntangled) {
  for (int t = 0; t < 5; ++t) {
    Rng rng = make_rng(7, static_cast<std::uint64_t>(t));
    const auto y = dilation_embed(BipartiteElement::single({2, 2}, random_contraction(4, rng)), 0.5);
    EXPECT_LE(operator_norm(y.parts()[0] - CMatrix::Identity(8, 8)), 0.5 + 1e-10);
    EXPECT_NE(entanglement_witness(y).status, SepStatus::entangled_certified);
  }
}

TEST(ExtremalEntangled, PptMarginIsMinusEps) {
  const auto x = extremal_entangled(2, 0.05);
  EXPECT_NEAR(ppt_check(x).margins[0], -0.05, 1e-10);
  // eigen oracle: F^Gamma = P has spectrum {0, n}
  const RVector ev = eigenvalues_hermitian(max_entangled(2));
  EXPECT_NEAR(ev(3), 2.0, 1e-12);
  EXPECT_NEAR(ev(0), 0.0, 1e-12);
}

TEST(ExtremalEntangled, ThreeIsEntangled) {
  const auto x = extremal_entangled(3, 0.1);
  const auto v = entanglement_witness(x);
  EXPECT_EQ(v.status, SepStatus::entangled_certified);
  expect_sound(x, v);
}

TEST(ExtremalEntangled, ApproachesBoundary) {
  double prev = -1;
  for (double eps : {0.1, 0.01, 0.001}) {
    const auto x = extremal_entangled(2, eps);
    const double r = (1 - x.parts()[0](0, 0).real());  // 1 - r F has (0,0) entry 1 - r
    EXPECT_GT(r, 0.5);
    EXPECT_EQ(entanglement_witness(x).status, SepStatus::entangled_certified);
    if (prev > 0) {
      EXPECT_LT(r, prev);
    }
    prev = r;
  }
  EXPECT_NEAR(prev, 0.5, 1e-3);
}

TEST(ExtremalEntangled, Errors) {
  EXPECT_THROW(extremal_entangled(2, 1.5), RangeError);
  EXPECT_THROW(extremal_entangled(2, 0.0), PreconditionError);
}

TEST(SepBallScan, TwoByTwoBoundary) {
  const auto rep = sep_ball_scan(FdAlgebra({2}), FdAlgebra({2}), {0.45, 0.5, 0.55}, 200, 11);
  ASSERT_EQ(rep.radii.size(), 3u);
  EXPECT_EQ(rep.radii[0].random.entangled + rep.radii[0].directed.entangled, 0);
  EXPECT_EQ(rep.radii[1].random.entangled + rep.radii[1].directed.entangled, 0);
  EXPECT_EQ(rep.radii[2].directed.entangled, 1);
  ASSERT_TRUE(rep.onset.has_value());
  EXPECT_GT(*rep.onset, 0.5);
  EXPECT_TRUE(rep.onset_consistent);
}

TEST(SepBallScan, CommutativeLegNeverEntangled) {
  const auto rep = sep_ball_scan(FdAlgebra({1, 1}), FdAlgebra({3}), {0.5, 0.9, 1.0}, 30, 3);
  for (const auto& rr : rep.radii) {
    EXPECT_EQ(rr.random.entangled + rr.directed.entangled, 0);
    EXPECT_EQ(rr.random.separable, 30);
  }
  EXPECT_FALSE(rep.onset.has_value());
  EXPECT_DOUBLE_EQ(rep.threshold, 1.0);
}

TEST(SepBallScan, DirectedCountsMonotone) {
  const auto rep = sep_ball_scan(FdAlgebra({2, 3}), FdAlgebra({3}), {0.3, 0.34, 0.4, 0.6}, 5, 7);
  for (std::size_t i = 1; i < rep.radii.size(); ++i)
    EXPECT_GE(rep.radii[i].directed.entangled, rep.radii[i - 1].directed.entangled);
  ASSERT_TRUE(rep.onset_directed.has_value());
  EXPECT_DOUBLE_EQ(*rep.onset_directed, 0.34);
  EXPECT_FALSE(rep.onset_random.has_value());
}

TEST(SepBallScan, ThreadCountInvariant) {
  ScanOptions one, four;
  four.threads = 4;
  const auto a = sep_ball_scan(FdAlgebra({2}), FdAlgebra({2}), {0.5, 0.7}, 20, 5, one);
  const auto b = sep_ball_scan(FdAlgebra({2}), FdAlgebra({2}), {0.5, 0.7}, 20, 5, four);
  for (std::size_t i = 0; i < a.radii.size(); ++i) {
    EXPECT_EQ(a.radii[i].random.entangled, b.radii[i].random.entangled);
    EXPECT_EQ(a.radii[i].random.separable, b.radii[i].random.separable);
  }
}

TEST(SepBallScan, RejectsBadInput) {
  EXPECT_THROW(sep_ball_scan(FdAlgebra({2}), FdAlgebra({2}), {1.5}, 1, 0), PreconditionError);
  EXPECT_THROW(sep_ball_scan(FdAlgebra({2}), FdAlgebra({2}), {0.5}, 0, 0), PreconditionError);
}
