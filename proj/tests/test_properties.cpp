// Randomized invariants across modules. Seeds are fixed, so failures replay.

#include "contraction_lab/suites.hpp"

#include <gtest/gtest.h>

using namespace clab;

namespace {

const Tolerances kTol{};

Contraction C(const CMatrix& m) { return make_contraction(m, kTol); }

CMatrix rotated_direct_sum(Rng& rng, Index d, Index k, double qnorm, const CMatrix& frame, const CMatrix& u) {
  CMatrix q = scaled_to_norm(gaussian_matrix(rng, d - k, d - k), qnorm);
  return frame * block_diag(u, q) * frame.adjoint();
}

}  // namespace

TEST(NumkitProperties, PsdSqrtSquaresBack) {
  Rng rng(101);
  for (int k = 0; k < 50; ++k) {
    Index n = uniform_int(rng, 1, 6);
    CMatrix g = gaussian_matrix(rng, n, uniform_int(rng, 1, static_cast<int>(n)));
    CMatrix m = g * g.adjoint();
    CMatrix r = psd_sqrt(m, kTol);
    EXPECT_LE(op_norm(CMatrix(r * r - m)), 10 * kTol.psd_atol * std::max(1.0, op_norm(m)));
  }
}

TEST(NumkitProperties, DouglasSolutionIsMinimalNorm) {
  Rng rng(102);
  for (int k = 0; k < 30; ++k) {
    CMatrix f = gaussian_matrix(rng, 4, 2) * gaussian_matrix(rng, 2, 4);
    CMatrix lhs = gaussian_matrix(rng, 3, 4) * f;
    DouglasResult r = douglas_solve(lhs, f, Side::right, kTol);
    ASSERT_TRUE(r.feasible);
    EXPECT_LE(r.residual, 10 * kTol.rank_rtol * op_norm(lhs));
    // Any other solution adds a term vanishing on the range of f.
    CMatrix closed = lhs * pinv(f, kTol);
    EXPECT_LE(op_norm(CMatrix(r.x - closed)), 1e-10 * std::max(1.0, op_norm(closed)));
    Subspace ker_fstar = kernel_of(f.adjoint(), kTol);
    CMatrix other = r.x + gaussian_matrix(rng, 3, ker_fstar.dim()) * ker_fstar.basis.adjoint();
    EXPECT_LE(op_norm(CMatrix(other * f - lhs)), 1e-8 * op_norm(lhs));
    EXPECT_GT(fro_norm(other), fro_norm(r.x));
  }
}

TEST(NumkitProperties, KernelIsOrthogonalToAdjointRange) {
  Rng rng(103);
  for (int k = 0; k < 30; ++k) {
    Index r = uniform_int(rng, 1, 5), c = uniform_int(rng, 1, 5);
    Index rank = uniform_int(rng, 0, static_cast<int>(std::min(r, c)));
    CMatrix m = gaussian_matrix(rng, r, rank) * gaussian_matrix(rng, rank, c);
    Subspace ker = kernel_of(m, kTol), ran = range_of(CMatrix(m.adjoint()), kTol);
    EXPECT_EQ(ker.dim() + ran.dim(), c);
    if (ker.dim() > 0 && ran.dim() > 0) EXPECT_LE(op_norm(CMatrix(ker.basis.adjoint() * ran.basis)), 1e-10);
  }
}

TEST(ContractionProperties, PartialIsometryDefectsAreKernelProjections) {
  Rng rng(104);
  for (int k = 0; k < 30; ++k) {
    Index d = uniform_int(rng, 1, 5);
    CMatrix w = random_partial_isometry(rng, d, d, uniform_int(rng, 0, static_cast<int>(d)));
    Contraction c = C(w);
    ASSERT_TRUE(classify(c, kTol).partial_isometry);
    const DefectData& dd = c.defect();
    EXPECT_LE(op_norm(CMatrix(dd.d_t - kernel_of(w, kTol).projector())), 1e-8);
    EXPECT_LE(op_norm(CMatrix(dd.d_tstar - kernel_of(CMatrix(w.adjoint()), kTol).projector())), 1e-8);
  }
}

TEST(ContractionProperties, UnitaryPurePartsExistWithStrictPureBlock) {
  for (int i = 0; i < 100; ++i) {
    Rng rng = suite_detail::case_rng(105, i);
    Index d = uniform_int(rng, 1, 5);
    CMatrix t = suite_detail::mixed_contraction(rng, d, d);
    Contraction c = C(t);
    UPDecomposition up = up_decompose(c, kTol);
    EXPECT_LT(op_norm(up.q_block), 1.0);
    EXPECT_LE(up.reassembly_residual, 1e-8);
  }
}

TEST(AsymptoticProperties, LimitIsPsdWithNormZeroOrOne) {
  for (int i = 0; i < 100; ++i) {
    Rng rng = suite_detail::case_rng(106, i);
    Index d = uniform_int(rng, 1, 5);
    CMatrix t = suite_detail::mixed_contraction(rng, d, d);
    AsymptoticData a = asymptotic_limit(C(t), kTol);
    EXPECT_GE(lambda_min(a.s_t), -1e-9);
    double n = op_norm(a.s_t);
    EXPECT_LE(n, 1.0 + 1e-9);
    if (n > 1e-6) EXPECT_NEAR(n, 1.0, 1e-8);
  }
}

TEST(AsymptoticProperties, FixedSpaceIsInvariantAndIsometric) {
  for (int i = 0; i < 100; ++i) {
    Rng rng = suite_detail::case_rng(107, i);
    Index d = uniform_int(rng, 1, 5);
    CMatrix t = suite_detail::mixed_contraction(rng, d, d);
    AsymptoticData a = asymptotic_limit(C(t), kTol);
    if (a.fix_s.dim() == 0) continue;
    EXPECT_LE(invariance_residual(t, a.fix_s), 1e-7);
    CMatrix img = t * a.fix_s.basis;
    EXPECT_LE(op_norm(CMatrix(img.adjoint() * img - identity(a.fix_s.dim()))), 1e-7);
  }
}

TEST(AsymptoticProperties, NormalLimitIsDefectKernelProjection) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    CMatrix t = generate(GenSpec{4, GenKind::normal, seed, {{"unimodular", 0.5}}}).first;
    Contraction c = C(t);
    AsymptoticData a = asymptotic_limit(c, kTol);
    EXPECT_TRUE(a.idempotent);
    EXPECT_LE(op_norm(CMatrix(a.s_t - c.defect().null_dt.projector())), 1e-8);
  }
}

TEST(AsymptoticProperties, FixedSpacesMatchIffInvariantForDominatingOperator) {
  int equal = 0, differ = 0;
  for (int i = 0; i < 60; ++i) {
    Rng rng = suite_detail::case_rng(108, i);
    CommutingPair pr = dominated_commuting_pair(rng, uniform_int(rng, 1, 4));
    Contraction t = C(pr.t), tp = C(pr.tp);
    if (harnack_dominates(t, tp, kTol).status != HarnackStatus::Dominated) continue;
    Subspace f = asymptotic_limit(t, kTol).fix_s, fp = asymptotic_limit(tp, kTol).fix_s;
    bool same = subspace_equal(f, fp, 1e-6);
    bool invariant = invariance_residual(pr.tp, f) <= 1e-8;
    EXPECT_EQ(same, invariant) << "case " << i;
    (same ? equal : differ)++;
  }
  EXPECT_GT(equal, 0);
}

TEST(ShmulyanProperties, EquivalentPairsShareDefectRanks) {
  Rng rng(109);
  for (int k = 0; k < 40; ++k) {
    Index d = uniform_int(rng, 2, 5), kk = uniform_int(rng, 0, static_cast<int>(d));
    CMatrix frame = haar_unitary(rng, d), u = haar_unitary(rng, kk);
    Contraction a = C(rotated_direct_sum(rng, d, kk, 0.8, frame, u));
    Contraction b = C(rotated_direct_sum(rng, d, kk, 0.5, frame, u));
    ASSERT_TRUE(shmulyan_equivalent(a, b, kTol).equivalent);
    EXPECT_EQ(a.defect().defect_space.dim(), b.defect().defect_space.dim());
    EXPECT_EQ(a.defect().defect_space_star.dim(), b.defect().defect_space_star.dim());
    EXPECT_NE(harnack_dominates(a, b, kTol).status, HarnackStatus::NotDominated);
    EXPECT_NE(harnack_dominates(b, a, kTol).status, HarnackStatus::NotDominated);
  }
}

TEST(ShmulyanProperties, JointInvariantSubspaceRestrictionsStayEquivalent) {
  Rng rng(110);
  for (int k = 0; k < 30; ++k) {
    // Block upper-triangular pairs over E0 (+) E1 with a unitary corner in E0.
    Index d0 = uniform_int(rng, 1, 3), d1 = uniform_int(rng, 1, 3);
    CMatrix u = haar_unitary(rng, 1);
    auto make = [&](double s) {
      CMatrix t = CMatrix::Zero(d0 + d1, d0 + d1);
      CMatrix strict = scaled_to_norm(gaussian_matrix(rng, d0 + d1 - 1, d0 + d1 - 1), s);
      strict.bottomLeftCorner(d1, d0 - 1).setZero();
      strict = scaled_to_norm(strict, s);
      t(0, 0) = u(0, 0);
      t.bottomRightCorner(d0 + d1 - 1, d0 + d1 - 1) = strict;
      return t;
    };
    CMatrix t = make(0.7), tp = make(0.4);
    ASSERT_TRUE(shmulyan_equivalent(C(t), C(tp), kTol).equivalent);
    CMatrix r = t.topLeftCorner(d0, d0), rp = tp.topLeftCorner(d0, d0);
    EXPECT_TRUE(shmulyan_equivalent(C(r), C(rp), kTol).equivalent);
  }
}

TEST(ShmulyanProperties, CornerCompressionsStayEquivalent) {
  Rng rng(111);
  for (int k = 0; k < 30; ++k) {
    Index d = uniform_int(rng, 2, 4), kk = uniform_int(rng, 0, static_cast<int>(d) - 1);
    CMatrix frame = haar_unitary(rng, d), u = haar_unitary(rng, kk);
    CMatrix t = rotated_direct_sum(rng, d, kk, 0.8, frame, u);
    CMatrix tp = rotated_direct_sum(rng, d, kk, 0.6, frame, u);
    ASSERT_TRUE(shmulyan_equivalent(C(t), C(tp), kTol).equivalent);
    Index s = uniform_int(rng, 1, static_cast<int>(d) - 1);
    for (auto [r0, c0, nr, nc] : {std::tuple{Index{0}, Index{0}, s, s}, std::tuple{Index{0}, s, s, d - s},
                                  std::tuple{s, Index{0}, d - s, s}, std::tuple{s, s, d - s, d - s}}) {
      CMatrix a = t.block(r0, c0, nr, nc), b = tp.block(r0, c0, nr, nc);
      EXPECT_TRUE(shmulyan_equivalent(C(a), C(b), kTol).equivalent) << "corner " << r0 << "," << c0;
    }
  }
}

TEST(HarnackProperties, LevelConstantsAreSubmultiplicative) {
  Rng rng(112);
  for (int k = 0; k < 20; ++k) {
    Index d = uniform_int(rng, 1, 3);
    CMatrix a = scaled_to_norm(gaussian_matrix(rng, d, d), uniform(rng, 0.1, 0.9));
    CMatrix b = scaled_to_norm(gaussian_matrix(rng, d, d), uniform(rng, 0.1, 0.9));
    CMatrix c = scaled_to_norm(gaussian_matrix(rng, d, d), uniform(rng, 0.1, 0.9));
    for (int n : {1, 3, 6}) {
      double ac = harnack_level_dense(a, c, n, kTol).constant;
      double ab = harnack_level_dense(a, b, n, kTol).constant;
      double bc = harnack_level_dense(b, c, n, kTol).constant;
      EXPECT_LE(ac, ab * bc * (1 + 1e-9));
    }
  }
}

TEST(HarnackProperties, AdjointPairsMatch) {
  for (int i = 0; i < 30; ++i) {
    Rng rng = suite_detail::case_rng(113, i);
    Index d = uniform_int(rng, 1, 3);
    CMatrix a = suite_detail::mixed_contraction(rng, d, d);
    CMatrix b = suite_detail::mixed_contraction(rng, d, d);
    Tolerances t = kTol;
    t.max_level = 24;
    HarnackVerdict v = harnack_dominates(C(a), C(b), t);
    HarnackVerdict w = harnack_dominates(C(CMatrix(a.adjoint())), C(CMatrix(b.adjoint())), t);
    EXPECT_EQ(v.status, w.status) << "case " << i;
    size_t n = std::min(v.constants.size(), w.constants.size());
    for (size_t k = 0; k < n; ++k)
      if (std::isfinite(v.constants[k]) && v.constants[k] < 1e6)
        EXPECT_NEAR(v.constants[k], w.constants[k], 1e-6 * v.constants[k]) << "case " << i << " level " << k + 1;
  }
}

TEST(ArcProperties, ConnectsExactlyWithinTheSamePart) {
  Rng rng(114);
  for (int k = 0; k < 20; ++k) {
    Index d = uniform_int(rng, 2, 4), kk = uniform_int(rng, 1, static_cast<int>(d) - 1);
    CMatrix frame = haar_unitary(rng, d), u = haar_unitary(rng, kk);
    Contraction a = C(rotated_direct_sum(rng, d, kk, uniform(rng, 0.0, 0.9), frame, u));
    Contraction b = C(rotated_direct_sum(rng, d, kk, uniform(rng, 0.0, 0.9), frame, u));
    ArcResult r = connect_arc(a, b, kTol);
    ASSERT_EQ(r.status, ArcStatus::Connected);
    EXPECT_TRUE(r.certificate->schur_class);
    EXPECT_LE(r.certificate->endpoint_residual, 1e-8);
    // Changing the unitary block leaves the part.
    Contraction c = C(rotated_direct_sum(rng, d, kk, 0.5, frame, haar_unitary(rng, kk)));
    EXPECT_EQ(connect_arc(a, c, kTol).status, ArcStatus::NotConnected);
  }
}

TEST(ArcProperties, PointwiseMembersGiveFunctionDomination) {
  Rng rng(115);
  int checked = 0;
  for (int k = 0; k < 20; ++k) {
    Index d = uniform_int(rng, 2, 5);
    CMatrix w = random_partial_isometry(rng, d, d, uniform_int(rng, 1, static_cast<int>(d) - 1));
    PartDescription part = partial_isometry_part(C(w), kTol);
    const Index nk = part.kernel.dim(), nc = part.cokernel.dim();
    SchurPoly g{{w}};
    for (int j = 0; j < 3; ++j) g.coeffs.push_back(part.embed_z(CMatrix(gaussian_matrix(rng, nc, nk) * 0.2)));
    bool all_members = true;
    for (int s = 0; s < 64; ++s)
      all_members = all_members && part.membership_test(g.eval(std::polar(1.0, 2.0 * M_PI * s / 64))).member;
    if (!all_members) continue;
    ++checked;
    DeltaInftyResult r = delta_infty_member(C(w), g, kTol);
    EXPECT_LE(r.residual, 1e-8);
    for (size_t j = 0; j < g.coeffs.size(); ++j) {
      CMatrix back = part.cokernel.basis * r.f0.coeffs[j] * part.kernel.basis.adjoint();
      EXPECT_LE(op_norm(CMatrix(back - (j == 0 ? CMatrix(g.coeffs[0] - w) : g.coeffs[j]))), 1e-10);
    }
  }
  EXPECT_GT(checked, 5);
}
