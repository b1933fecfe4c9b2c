#include <gtest/gtest.h>

#include <functional>

#include "test_util.hpp"

using namespace cbsep;
using cbsep::io::Json;

namespace {

std::string schema_message(const std::function<void()>& f) {
  try {
    f();
  } catch (const SchemaError& e) {
    return e.what();
  }
  return "";
}

BipartiteElement sample_element(std::uint64_t seed) {
  Rng rng = make_rng(seed, 1);
  const FdAlgebra a({2, 3}), b({2});
  std::vector<CMatrix> parts;
  for (Index n : a.blocks())
    for (Index m : b.blocks()) parts.push_back(random_ginibre(n * m, n * m, rng));
  return {a, b, std::move(parts)};
}

}  // namespace

TEST(IoMatrix, RoundTripIsExact) {
  Rng rng = make_rng(3, 0);
  const CMatrix m = random_ginibre(3, 4, rng);
  const Json j = io::matrix_json(m);
  EXPECT_EQ(j.size(), 3u);
  EXPECT_EQ(j[0].size(), 4u);
  const CMatrix back = io::to_matrix(Json::parse(j.dump()), "$");
  EXPECT_EQ(back, m);
}

TEST(IoMatrix, RowMajorWithReImPairs) {
  CMatrix m(1, 2);
  m << Complex(1, 2), Complex(3, -4);
  EXPECT_EQ(io::matrix_json(m).dump(), "[[[1.0,2.0],[3.0,-4.0]]]");
}

TEST(IoMatrix, PlainNumbersAreRealEntries) {
  const CMatrix m = io::to_matrix(Json::parse("[[1, 2], [3, [0, 1]]]"), "$");
  EXPECT_EQ(m(0, 1), Complex(2, 0));
  EXPECT_EQ(m(1, 1), Complex(0, 1));
}

TEST(IoMatrix, RaggedRowsNameThePath) {
  const auto msg = schema_message([] { io::to_matrix(Json::parse("[[1, 2], [3]]"), "$.m"); });
  EXPECT_NE(msg.find("$.m[1]"), std::string::npos) << msg;
}

TEST(IoAlgebra, RoundTrip) {
  const FdAlgebra a({2, 3});
  EXPECT_EQ(io::algebra_json(a).dump(), R"({"blocks":[2,3]})");
  EXPECT_EQ(io::to_algebra(io::algebra_json(a), "$").blocks(), a.blocks());
}

TEST(IoElement, RoundTripIsExact) {
  const BipartiteElement x = sample_element(5);
  const BipartiteElement y = io::to_element(Json::parse(io::element_json(x).dump()), "$");
  ASSERT_EQ(y.num_pairs(), x.num_pairs());
  for (const BlockPair bp : x.block_pairs()) EXPECT_EQ(y.part(bp), x.part(bp));
}

TEST(IoElement, MissingMatrixNamesPath) {
  Json j = io::element_json(sample_element(6));
  j["parts"][1].erase("m");
  const auto msg = schema_message([&] { io::to_element(j, "$"); });
  EXPECT_NE(msg.find("$.parts[1].m"), std::string::npos) << msg;
}

TEST(IoElement, WrongPartSizeIsSchemaError) {
  Json j = io::element_json(sample_element(7));
  j["parts"][0]["m"] = io::matrix_json(CMatrix::Identity(3, 3));
  EXPECT_THROW(io::to_element(j, "$"), SchemaError);
}

TEST(IoElement, BlockPairOutOfRange) {
  Json j = io::element_json(sample_element(8));
  j["parts"][0]["k"] = 7;
  const auto msg = schema_message([&] { io::to_element(j, "$"); });
  EXPECT_NE(msg.find("$.parts[0]"), std::string::npos) << msg;
}

TEST(IoElement, DuplicatePairRejected) {
  Json j = io::element_json(sample_element(9));
  j["parts"][1]["l"] = 0;
  j["parts"][1]["k"] = 0;
  EXPECT_THROW(io::to_element(j, "$"), SchemaError);
}

TEST(IoMap, RoundTripAndFieldNames) {
  const LinearMapRep f = reduction_map(2);
  const Json j = io::map_json(f);
  EXPECT_EQ(j["dimIn"], 2);
  EXPECT_EQ(j["dimOut"], 2);
  const LinearMapRep g = io::to_map(j, "$");
  EXPECT_EQ(g.choi(), f.choi());
}

TEST(IoMap, WrongChoiSizeIsSchemaError) {
  Json j = io::map_json(transpose_map(2));
  j["dimOut"] = 3;
  EXPECT_THROW(io::to_map(j, "$"), SchemaError);
}

TEST(IoProblem, RoundTripPreservesCoefficientsAndSolution) {
  Rng rng = make_rng(11, 0);
  const sdp::SdpProblem p = sdp::random_feasible_problem({3, 2}, 4, rng);
  const sdp::SdpProblem q = io::to_problem(Json::parse(io::problem_json(p).dump()), "$");
  ASSERT_EQ(q.blocks(), p.blocks());
  ASSERT_EQ(q.num_constraints(), p.num_constraints());
  for (std::size_t c = 0; c < p.num_constraints(); ++c) {
    EXPECT_EQ(q.constraints()[c].rhs, p.constraints()[c].rhs);
    for (std::size_t k = 0; k < p.blocks().size(); ++k) EXPECT_EQ(q.coefficient(c, k), p.coefficient(c, k));
  }
  for (std::size_t k = 0; k < p.blocks().size(); ++k) EXPECT_EQ(q.objective()[k], p.objective()[k]);
  EXPECT_NEAR(sdp::solve(q).primal_obj, sdp::solve(p).primal_obj, 1e-9);
}

TEST(IoProblem, LowerTriangleEntryRejected) {
  const Json j = Json::parse(R"({"blocks":[2],"constraints":[{"rhs":1,"terms":[{"block":0,"entries":[[1,0,[1,0]]]}]}]})");
  const auto msg = schema_message([&] { io::to_problem(j, "$"); });
  EXPECT_NE(msg.find("$.constraints[0].terms[0].entries[0]"), std::string::npos) << msg;
}

TEST(IoProblem, ComplexDiagonalRejected) {
  const Json j = Json::parse(R"({"blocks":[2],"constraints":[{"rhs":1,"terms":[{"block":0,"entries":[[1,1,[1,1]]]}]}]})");
  EXPECT_THROW(io::to_problem(j, "$"), SchemaError);
}

TEST(IoSolution, CarriesStatusAndResiduals) {
  Rng rng = make_rng(12, 0);
  const sdp::SdpSolution s = sdp::solve(sdp::random_feasible_problem({2}, 2, rng));
  const Json j = io::solution_json(s);
  EXPECT_EQ(j["status"], "optimal");
  EXPECT_EQ(j["y"].size(), 2u);
  EXPECT_TRUE(j["residuals"].contains("gap"));
}

// ---------------------------------------------------------------------------
// verify_document

TEST(Verify, CbNormDocumentPassesAndTamperFails) {
  const LinearMapRep psi = transpose_map(2);
  const CbNormResult r = cb_norm(psi);
  Json doc = io::cbnorm_json(psi, r);
  EXPECT_TRUE(verify::verify_document(doc).passed());
  doc["upper"] = r.upper * 0.9;
  EXPECT_FALSE(verify::verify_document(doc).passed());
  doc = io::cbnorm_json(psi, r);
  doc["lower"] = r.lower + 0.1;
  EXPECT_FALSE(verify::verify_document(doc).passed());
}

TEST(Verify, CbNormPairThatIsNotPsdFails) {
  const LinearMapRep psi = transpose_map(2);
  const CbNormResult r = cb_norm(psi);
  Json doc = io::cbnorm_json(psi, r);
  doc["certificate"]["phi1"] = io::matrix_json(CMatrix::Zero(4, 4));
  EXPECT_FALSE(verify::verify_document(doc).passed());
}

TEST(Verify, EntangledDocumentPassesAndTamperFails) {
  const BipartiteElement x = extremal_entangled(2, 0.05);
  const SepVerdict v = entanglement_witness(x);
  ASSERT_EQ(v.status, SepStatus::entangled_certified);
  Json doc = io::sep_verdict_json(x, v);
  EXPECT_TRUE(verify::verify_document(doc).passed());
  doc["parts"][0]["witness"]["violation"] = -1.0;
  EXPECT_FALSE(verify::verify_document(doc).passed());
}

TEST(Verify, WitnessMapNotDecomposableFails) {
  const BipartiteElement x = extremal_entangled(2, 0.05);
  Json doc = io::sep_verdict_json(x, entanglement_witness(x));
  doc["parts"][0]["witness"]["mapCertificate"]["cpPart"] = io::matrix_json(-CMatrix::Identity(4, 4));
  EXPECT_FALSE(verify::verify_document(doc).passed());
}

TEST(Verify, SeparableDocumentsPass) {
  // PPT route in (2,2) and product route for a one-dimensional leg.
  const BipartiteElement a = one_minus(directed_sample(FdAlgebra({2}), FdAlgebra({2}), {0, 0}, 0.4));
  EXPECT_TRUE(verify::verify_document(io::sep_verdict_json(a, entanglement_witness(a))).passed());
  Rng rng = make_rng(13, 0);
  const BipartiteElement b = one_minus(random_bipartite_gue(FdAlgebra({1, 1}), FdAlgebra({3}), 0.9, rng));
  const SepVerdict vb = entanglement_witness(b);
  ASSERT_EQ(vb.status, SepStatus::separable_certified);
  EXPECT_TRUE(verify::verify_document(io::sep_verdict_json(b, vb)).passed());
}

TEST(Verify, WrongOverallStatusFails) {
  const BipartiteElement a = one_minus(directed_sample(FdAlgebra({2}), FdAlgebra({2}), {0, 0}, 0.4));
  Json doc = io::sep_verdict_json(a, entanglement_witness(a));
  doc["status"] = "undecided";
  EXPECT_FALSE(verify::verify_document(doc).passed());
}

TEST(Verify, PptClaimOutsideDecisiveShapeFails) {
  const BipartiteElement a = one_minus(directed_sample(FdAlgebra({3}), FdAlgebra({3}), {0, 0}, 0.2));
  Json doc = io::sep_verdict_json(a, entanglement_witness(a));
  doc["parts"][0]["status"] = "separable-certified";
  doc["status"] = "separable-certified";
  EXPECT_FALSE(verify::verify_document(doc).passed());
}

TEST(Verify, SdpDocumentPassesAndTamperFails) {
  Rng rng = make_rng(14, 0);
  const sdp::SdpProblem p = sdp::random_feasible_problem({3, 2}, 3, rng);
  const sdp::SdpSolution s = sdp::solve(p);
  Json doc = io::sdp_json(p, s);
  EXPECT_TRUE(verify::verify_document(doc).passed());
  doc["solution"]["y"][0] = doc["solution"]["y"][0].get<double>() + 0.5;
  EXPECT_FALSE(verify::verify_document(doc).passed());
}

TEST(Verify, ScanKappaEtaDocumentsPass) {
  const ScanReport s = sep_ball_scan(FdAlgebra({2}), FdAlgebra({2}), {0.45, 0.55}, 5, 3);
  EXPECT_TRUE(verify::verify_document(io::scan_json(s)).passed());
  const KappaReport k = kappa_matrix_check(2, 3);
  EXPECT_TRUE(verify::verify_document(io::kappa_json(k, certify_positive_map(k.map))).passed());
  const FdAlgebra a({2, 3}), b({4});
  EXPECT_TRUE(verify::verify_document(io::eta_json(a, b, eta_certificate(a, b))).passed());
}

TEST(Verify, UnknownKindIsSchemaError) {
  EXPECT_THROW(verify::verify_document(Json{{"kind", "nope"}}), SchemaError);
  const auto msg = schema_message([] { verify::verify_document(Json::object()); });
  EXPECT_NE(msg.find("$.kind"), std::string::npos);
}
