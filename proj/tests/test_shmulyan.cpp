#include "contraction_lab/shmulyan.hpp"
#include "contraction_lab/corpus.hpp"

#include <gtest/gtest.h>

using namespace clab;

namespace {

const Tolerances kTol{};

CMatrix scalar(double x) { return CMatrix::Constant(1, 1, x); }

CMatrix diag(std::initializer_list<double> v) {
  CMatrix m = CMatrix::Zero(static_cast<Index>(v.size()), static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) {
    m(i, i) = x;
    ++i;
  }
  return m;
}

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

}  // namespace

TEST(ShmulyanDominates, Examples) {
  ShmulyanVerdict a = shmulyan_dominates(C(scalar(0.3)), C(scalar(0.0)), kTol);
  EXPECT_TRUE(a.dominates);
  ASSERT_TRUE(a.x_solution.has_value());
  EXPECT_NEAR((*a.x_solution)(0, 0).real(), 0.3, 1e-12);
  EXPECT_TRUE(a.route_agreement);

  ShmulyanVerdict b = shmulyan_dominates(C(scalar(0.5)), C(scalar(1.0)), kTol);
  EXPECT_FALSE(b.dominates);
  ASSERT_TRUE(b.witness.has_value());
  EXPECT_NEAR(std::abs((*b.witness)(0)), 1.0, 1e-12);
  EXPECT_TRUE(b.route_agreement);

  ShmulyanVerdict c = shmulyan_dominates(C(jordan_with(0.5)), C(jordan()), kTol);
  EXPECT_TRUE(c.dominates);
  EXPECT_TRUE(c.route_agreement);
}

TEST(ShmulyanDominates, RoutesAgreeOnDirectSums) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Generated g = generate(GenSpec{3, GenKind::direct_sum_U_plus_Q, seed, {{"rotate", 0}}});
    Generated h = generate(GenSpec{3, GenKind::strict, seed + 100, {}});
    ShmulyanVerdict v = shmulyan_dominates(C(h.first), C(g.first), kTol);
    EXPECT_TRUE(v.route_agreement) << "seed " << seed;
  }
}

TEST(ShmulyanDominates, Transitive) {
  // Chains inside the part of U (+) 0: each step stays in the part.
  Rng rng(41);
  for (int k = 0; k < 20; ++k) {
    CMatrix u = haar_unitary(rng, 1);
    CMatrix a = block_diag(u, CMatrix::Zero(2, 2));
    CMatrix b = block_diag(u, scaled_to_norm(gaussian_matrix(rng, 2, 2), 0.5));
    CMatrix c = block_diag(u, scaled_to_norm(gaussian_matrix(rng, 2, 2), 0.8));
    bool ab = shmulyan_dominates(C(b), C(a), kTol).dominates;
    bool bc = shmulyan_dominates(C(c), C(b), kTol).dominates;
    if (ab && bc) EXPECT_TRUE(shmulyan_dominates(C(c), C(a), kTol).dominates);
  }
}

TEST(ShmulyanEquivalent, Examples) {
  Rng rng(3);
  for (int k = 0; k < 10; ++k) {
    CMatrix a = scaled_to_norm(gaussian_matrix(rng, 3, 2), 0.9);
    CMatrix b = scaled_to_norm(gaussian_matrix(rng, 3, 2), 0.4);
    EXPECT_TRUE(shmulyan_equivalent(C(a), C(b), kTol).equivalent);
  }
  CMatrix u = haar_unitary(rng, 3);
  EquivalenceResult uu = shmulyan_equivalent(C(u), C(u), kTol);
  EXPECT_TRUE(uu.equivalent);
  EXPECT_LE(op_norm(*uu.b_under_a.x_solution), 1e-12);

  EXPECT_TRUE(shmulyan_equivalent(C(diag({1, 0.2})), C(diag({1, 0.7})), kTol).equivalent);
  EXPECT_FALSE(shmulyan_equivalent(C(diag({1, 0.2})), C(diag({0.9, 0.2})), kTol).equivalent);
}

TEST(ShmulyanEquivalent, MixedFactorizationsReconstruct) {
  CMatrix a = diag({1, 0.2}), b = diag({1, 0.7});
  EquivalenceResult r = shmulyan_equivalent(C(a), C(b), kTol);
  ASSERT_TRUE(r.equivalent);
  EXPECT_LE(r.residual_x_mixed, 1e-9);
  EXPECT_LE(r.residual_y_mixed, 1e-9);
}

TEST(PartialIsometryPart, MembershipExamples) {
  PartDescription p = partial_isometry_part(C(jordan()), kTol);
  Membership a = p.membership_test(jordan_with(0.5));
  EXPECT_TRUE(a.member);
  EXPECT_NEAR(a.z_norm, 0.5, 1e-12);
  Membership b = p.membership_test(jordan());
  EXPECT_TRUE(b.member);
  EXPECT_LE(b.z_norm, 1e-15);
  Membership c = p.membership_test(jordan_with(1.0));
  EXPECT_FALSE(c.member);
  EXPECT_NEAR(c.z_norm, 1.0, 1e-12);
}

TEST(PartialIsometryPart, RejectsNonPartialIsometry) {
  EXPECT_THROW(partial_isometry_part(C(diag({0.5, 1})), kTol), NotPartialIsometry);
}

TEST(PartialIsometryPart, EmbeddedBlocksAreMembers) {
  Rng rng(77);
  for (int k = 0; k < 20; ++k) {
    CMatrix w = random_partial_isometry(rng, 4, 4, 2);
    PartDescription p = partial_isometry_part(C(w), kTol);
    CMatrix z = scaled_to_norm(gaussian_matrix(rng, 2, 2), 0.6);
    CMatrix cand = w + p.embed_z(z);
    Membership m = p.membership_test(cand);
    EXPECT_TRUE(m.member);
    EXPECT_NEAR(m.z_norm, 0.6, 1e-10);
    EXPECT_TRUE(shmulyan_equivalent(C(w), C(cand), kTol).equivalent);
  }
}

TEST(ColumnCriterion, DirectSumsHold) {
  Rng rng(5);
  CMatrix u = haar_unitary(rng, 1);
  CMatrix t = block_diag(u, scaled_to_norm(gaussian_matrix(rng, 2, 2), 0.5));
  CMatrix tp = block_diag(u, scaled_to_norm(gaussian_matrix(rng, 2, 2), 0.8));
  BlockSplits s{Subspace(CMatrix(identity(3).leftCols(1))), Subspace(CMatrix(identity(3).rightCols(2))),
                Subspace(CMatrix(identity(3).leftCols(1))), Subspace(CMatrix(identity(3).rightCols(2)))};
  ColumnCriterionResult r = column_criterion(C(t), C(tp), s, kTol);
  EXPECT_TRUE(r.conditions_hold);
  EXPECT_TRUE(r.result);
  ColumnCriterionResult same = column_criterion(C(t), C(t), s, kTol);
  EXPECT_TRUE(same.result);
}

TEST(ColumnCriterion, ViolatedConditionsAreReported) {
  Rng rng(6);
  int flagged = 0;
  for (int k = 0; k < 10; ++k) {
    CMatrix t = scaled_to_norm(gaussian_matrix(rng, 2, 2), 0.9);
    BlockSplits s{Subspace(CMatrix(identity(2).leftCols(1))), Subspace(CMatrix(identity(2).rightCols(1))),
                  Subspace(CMatrix(identity(2).leftCols(1))), Subspace(CMatrix(identity(2).rightCols(1)))};
    // Direct residual of T0*T1 + T2*T3 for the random blocks.
    double direct = std::abs(std::conj(t(0, 0)) * t(0, 1) + std::conj(t(1, 0)) * t(1, 1));
    ColumnCriterionResult r = column_criterion(C(t), C(t), s, kTol);
    if (direct > 1e-6) {
      EXPECT_FALSE(r.conditions_hold);
      EXPECT_FALSE(r.result);
      ++flagged;
    }
  }
  EXPECT_GT(flagged, 0);
}

TEST(ColumnCriterion, IncompatibleSplitsThrow) {
  BlockSplits s{Subspace(CMatrix(identity(2).leftCols(1))), Subspace(CMatrix(identity(2).leftCols(1))),
                Subspace(CMatrix(identity(2).leftCols(1))), Subspace(CMatrix(identity(2).rightCols(1)))};
  EXPECT_THROW(column_criterion(C(diag({0.1, 0.2})), C(diag({0.1, 0.2})), s, kTol), IncompatibleSplits);
}

TEST(QuasiIsometryCriterion, Examples) {
  Rng rng(8);
  CMatrix u = haar_unitary(rng, 2);
  CMatrix t = block_diag(u, CMatrix::Zero(1, 1));
  CMatrix tp = block_diag(u, scalar(0.4));
  EXPECT_TRUE(quasi_isometry_criterion(C(t), C(tp), kTol).result);
  EXPECT_TRUE(quasi_isometry_criterion(C(t), C(t), kTol).result);
  EXPECT_THROW(quasi_isometry_criterion(C(jordan()), C(jordan()), kTol), NotQuasiIsometry);
}

TEST(QuasiIsometryCriterion, BrokenRangeInclusionAgreesWithEquivalence) {
  // t = 1 (+) 0; t' moves the isometric summand off itself.
  CMatrix t = diag({1, 0});
  CMatrix tp(2, 2);
  tp << 1, 0, 0.5, 0;
  tp = scaled_to_norm(tp, 1.0);
  QuasiIsometryResult r = quasi_isometry_criterion(C(t), C(tp), kTol);
  EXPECT_FALSE(r.result);
  EXPECT_FALSE(shmulyan_equivalent(C(t), C(tp), kTol).equivalent);
}

TEST(KernelInvarianceChecks, Examples) {
  Le312Result a = le312_check(C(diag({1, 0.5})), kTol);
  EXPECT_TRUE(a.i && a.ii && a.iii);
  Le312Result j = le312_check(C(jordan()), kTol);
  EXPECT_FALSE(j.ii);
  EXPECT_TRUE(j.agree());
}

TEST(KernelInvarianceChecks, NormalOperatorsAgree) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    CMatrix t = generate(GenSpec{3, GenKind::normal, seed, {{"unimodular", 0.5}}}).first;
    EXPECT_TRUE(le312_check(C(t), kTol).agree()) << "seed " << seed;
  }
}

TEST(TriangularNormCheck, Examples) {
  Co313Result a = co313_check(C(diag({1, 0.5})), kTol);
  EXPECT_NEAR(a.norm_rq, 0.25, 1e-12);
  EXPECT_TRUE(a.cond_ii);
  Rng rng(10);
  Co313Result u = co313_check(C(haar_unitary(rng, 3)), kTol);
  EXPECT_TRUE(u.cond_i && u.cond_ii);
}

TEST(TriangularNormCheck, FlipsWhereTheNormReachesOne) {
  Rng rng(12);
  CMatrix u = haar_unitary(rng, 1);
  CMatrix q = scaled_to_norm(gaussian_matrix(rng, 2, 2), 1.0);
  for (double s : {0.5, 0.9, 0.99, 0.999999, 1.0}) {
    Co313Result r = co313_check(C(block_diag(u, CMatrix(s * q))), kTol);
    EXPECT_NEAR(r.norm_rq, s * s, 1e-9);
    EXPECT_EQ(r.cond_ii, s < 1.0) << "scale " << s;
    EXPECT_TRUE(r.agree());
  }
}
