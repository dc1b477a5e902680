#include "contraction_lab/schur.hpp"
#include "contraction_lab/corpus.hpp"

#include <gtest/gtest.h>

using namespace clab;

namespace {

const Tolerances kTol{};

CMatrix scalar(cplx x) { return CMatrix::Constant(1, 1, x); }

CMatrix jordan() {
  CMatrix j = CMatrix::Zero(2, 2);
  j(0, 1) = 1.0;
  return j;
}

CMatrix jordan_with(double z) {
  CMatrix m = jordan();
  m(1, 0) = z;
  return m;
}

Contraction C(const CMatrix& m) { return make_contraction(m, kTol); }

SchurPoly poly(std::vector<CMatrix> c) { return SchurPoly{std::move(c)}; }

double fine_grid_max(const SchurPoly& f) { return grid_max_norm(f, 1 << 16); }

}  // namespace

TEST(SupNorm, Examples) {
  CMatrix t(2, 2);
  t << 0.2, 0.4, -0.1, 0.3;
  EXPECT_NEAR(schur_sup_norm(poly({t}), kTol).value, op_norm(t), 1e-14);
  EXPECT_NEAR(schur_sup_norm(poly({scalar(0.0), scalar(1.0)}), kTol).value, 1.0, 1e-14);
  SupNorm s = schur_sup_norm(poly({scalar(0.3), scalar(0.4)}), kTol);
  EXPECT_NEAR(s.value, 0.7, 1e-14);
  EXPECT_NEAR(s.bound, 0.7, 1e-14);
}

TEST(SupNorm, BoundBracketsDenseGrid) {
  Rng rng(4);
  for (int k = 0; k < 20; ++k) {
    int deg = 1 + k % 3;
    std::vector<CMatrix> c;
    for (int j = 0; j <= deg; ++j) c.push_back(CMatrix(gaussian_matrix(rng, 2, 2) * 0.3));
    SchurPoly f = poly(c);
    SupNorm s = schur_sup_norm(f, kTol);
    double dense = fine_grid_max(f);
    // The grid maximum is attained, so it bounds value from below up to
    // refinement, and the certified bound from below outright.
    EXPECT_GE(s.value, dense * (1 - 1e-9));
    EXPECT_GE(s.bound, s.value);
    EXPECT_GE(s.bound, dense);
    EXPECT_LE(s.bound, dense * (1 + 1e-4));
  }
}

TEST(SchurClass, GridTest) {
  EXPECT_TRUE(in_schur_class(poly({scalar(0.3), scalar(0.7)}), kTol));
  EXPECT_FALSE(in_schur_class(poly({scalar(0.3), scalar(0.71)}), kTol));
}

TEST(Toeplitz, LowerTriangularBlocks) {
  SchurPoly f = poly({scalar(0.1), scalar(0.2), scalar(0.3)});
  CMatrix t = toeplitz_truncate(f, 4);
  CMatrix expected(4, 4);
  expected << 0.1, 0, 0, 0, 0.2, 0.1, 0, 0, 0.3, 0.2, 0.1, 0, 0, 0.3, 0.2, 0.1;
  EXPECT_EQ(t, expected);
}

TEST(Toeplitz, TruncationNormsIncreaseToSupNorm) {
  Rng rng(9);
  for (int k = 0; k < 5; ++k) {
    SchurPoly f = poly({CMatrix(gaussian_matrix(rng, 2, 2) * 0.3), CMatrix(gaussian_matrix(rng, 2, 2) * 0.3)});
    double sup = schur_sup_norm(f, kTol).bound;
    double prev = 0.0;
    for (int n = 1; n <= 32; n *= 2) {
      double cur = op_norm(toeplitz_truncate(f, n));
      EXPECT_GE(cur, prev - 1e-12);
      EXPECT_LE(cur, sup + 1e-9);
      prev = cur;
    }
  }
}

TEST(SegmentRadius, Examples) {
  EXPECT_NEAR(segment_radius(C(scalar(0.0)), C(scalar(0.5)), kTol), 2.0, 1e-6);
  EXPECT_TRUE(std::isinf(segment_radius(C(scalar(0.3)), C(scalar(0.3)), kTol)));
  Rng rng(2);
  CMatrix b = block_diag(CMatrix::Identity(1, 1), CMatrix::Constant(1, 1, 0.5));
  CMatrix a(2, 2);
  a << 1, 0, 0, 0;
  double r = segment_radius(C(a), C(b), kTol);
  ASSERT_TRUE(std::isfinite(r));
  EXPECT_GT(r, 0.0);
  // Endpoints of the disc of radius r stay in the ball, slightly beyond do not.
  double worst = 0.0, beyond = 0.0;
  for (int j = 0; j < 256; ++j) {
    cplx e = std::polar(1.0, 2.0 * M_PI * j / 256);
    worst = std::max(worst, op_norm(CMatrix(a + r * e * (b - a))));
    beyond = std::max(beyond, op_norm(CMatrix(a + 1.01 * r * e * (b - a))));
  }
  EXPECT_LE(worst, 1.0 + 1e-8);
  EXPECT_GT(beyond, 1.0);
}

TEST(ConnectArc, ScalarSegmentIsHyperbolicDistance) {
  ArcResult r = connect_arc(C(scalar(0.0)), C(scalar(0.5)), kTol);
  ASSERT_EQ(r.status, ArcStatus::Connected);
  EXPECT_LE(r.certificate->bound, std::atanh(0.5) + 1e-6);
  EXPECT_LE(r.certificate->endpoint_residual, 1e-12);
  EXPECT_TRUE(r.certificate->schur_class);
}

TEST(ConnectArc, NonEquivalentPairsAreNotConnected) {
  EXPECT_EQ(connect_arc(C(scalar(1.0)), C(scalar(0.5)), kTol).status, ArcStatus::NotConnected);
  EXPECT_EQ(connect_arc(C(jordan()), C(jordan_with(1.0)), kTol).status, ArcStatus::NotConnected);
}

TEST(ConnectArc, PartMembersConnect) {
  ArcResult r = connect_arc(C(jordan()), C(jordan_with(0.5)), kTol);
  ASSERT_EQ(r.status, ArcStatus::Connected);
  EXPECT_LE(r.certificate->endpoint_residual, 1e-8);
  EXPECT_TRUE(r.certificate->schur_class);
  for (const Arc& a : r.certificate->arcs) EXPECT_LT(std::abs(a.lambda), 1.0);
}

TEST(ConnectArc, ChainsAreReversible) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CMatrix a = generate(GenSpec{3, GenKind::strict, seed, {}}).first;
    CMatrix b = generate(GenSpec{3, GenKind::strict, seed + 40, {}}).first;
    ArcResult f = connect_arc(C(a), C(b), kTol);
    ArcResult g = connect_arc(C(b), C(a), kTol);
    ASSERT_EQ(f.status, ArcStatus::Connected);
    ASSERT_EQ(g.status, ArcStatus::Connected);
    EXPECT_LE(f.certificate->endpoint_residual, 1e-8);
    EXPECT_LE(g.certificate->endpoint_residual, 1e-8);
  }
}

TEST(PartialIsometryArc, SingleArcBound) {
  ArcCertificate c = partial_isometry_arc(C(jordan()), C(jordan_with(0.5)), kTol);
  ASSERT_EQ(c.arcs.size(), 1u);
  EXPECT_NEAR(c.bound, std::atanh(std::sqrt(0.5)), 1e-12);
  EXPECT_LE(c.endpoint_residual, 1e-12);
  EXPECT_TRUE(c.schur_class);
  EXPECT_THROW(partial_isometry_arc(C(jordan()), C(jordan_with(1.0)), kTol), NotMember);
}

TEST(KobayashiBound, FiniteExactlyForEquivalentPairs) {
  EXPECT_FALSE(kobayashi_upper_bound(C(scalar(1.0)), C(scalar(0.5)), kTol).finite);
  KobayashiBound kb = kobayashi_upper_bound(C(scalar(0.0)), C(scalar(0.5)), kTol);
  ASSERT_TRUE(kb.finite);
  EXPECT_NEAR(kb.value, std::atanh(0.5), 1e-6);
}

TEST(KobayashiBound, SymmetricWithinFactorTwo) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    CMatrix a = generate(GenSpec{2, GenKind::strict, seed, {}}).first;
    CMatrix b = generate(GenSpec{2, GenKind::strict, seed + 7, {}}).first;
    KobayashiBound ab = kobayashi_upper_bound(C(a), C(b), kTol);
    KobayashiBound ba = kobayashi_upper_bound(C(b), C(a), kTol);
    ASSERT_TRUE(ab.finite && ba.finite);
    EXPECT_LE(ab.value, 2.0 * ba.value + 1e-9);
    EXPECT_LE(ba.value, 2.0 * ab.value + 1e-9);
  }
}

TEST(DeltaInfinity, Examples) {
  DeltaInftyResult r = delta_infty_member(C(scalar(0.0)), poly({scalar(0.0), scalar(1.0)}), kTol);
  EXPECT_FALSE(r.member);

  DeltaInftyResult c = delta_infty_member(C(jordan()), poly({jordan()}), kTol);
  EXPECT_TRUE(c.member);
  EXPECT_LE(c.f0_sup.bound, 1e-12);

  CMatrix e = jordan_with(0.5) - jordan();
  DeltaInftyResult j = delta_infty_member(C(jordan()), poly({jordan(), e}), kTol);
  EXPECT_TRUE(j.member);
  EXPECT_NEAR(j.f0_sup.value, 0.5, 1e-9);
}

TEST(DeltaInfinity, LeakOutsideDefectCornerIsRejected) {
  CMatrix leak = CMatrix::Zero(2, 2);
  leak(0, 0) = 0.1;
  DeltaInftyResult r = delta_infty_member(C(jordan()), poly({jordan(), leak}), kTol);
  EXPECT_FALSE(r.member);
  EXPECT_GT(r.residual, 1e-8);
}

TEST(DeltaInfinity, ThresholdAtUnitSupNorm) {
  CMatrix e = jordan_with(1.0) - jordan();
  for (double s : {0.999, 1.001}) {
    DeltaInftyResult r = delta_infty_member(C(jordan()), poly({jordan(), CMatrix(0.5 * s * e), CMatrix(0.5 * s * e)}), kTol);
    EXPECT_EQ(r.member, s < 1.0) << s;
  }
}
