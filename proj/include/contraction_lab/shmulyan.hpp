#pragma once

/// @file shmulyan.hpp
/// @brief Shmul'yan domination and equivalence: three independent routes,
/// mixed-defect factors, and the structured criteria for partial isometries,
/// block columns and quasi-isometries.

#include "contraction_lab/asymptotic.hpp"

namespace clab {

// ---------------------------------------------------------------------------
// Circle test: largest r with ||A + eps (B - A)|| <= 1 on |eps| = r
// ---------------------------------------------------------------------------

namespace detail {

/// Slack of the circle norm test. It has to sit far below the gap between
/// dominated and non-dominated pairs: a violation that grows quadratically
/// in eps first shows at r ~ sqrt(2 * slack) / ||M||.
constexpr double kCircleSlack = 1e-13;

/// True when ||k|| <= 1 + slack, decided by a Cholesky factorization of
/// (1 + slack)^2 I - K*K (on the smaller side).
inline bool norm_at_most_one(const CMatrix& k, double slack) {
  const double bound = (1.0 + slack) * (1.0 + slack);
  CMatrix g = k.rows() < k.cols() ? CMatrix(k * k.adjoint()) : CMatrix(k.adjoint() * k);
  CMatrix h = bound * identity(g.rows()) - g;
  Eigen::LLT<CMatrix> llt(h);
  return llt.info() == Eigen::Success;
}

inline bool circle_ok(const CMatrix& a, const CMatrix& m, double r, int grid, double slack) {
  const double two_pi = 2.0 * M_PI;
  for (int j = 0; j < grid; ++j) {
    cplx eps = std::polar(r, two_pi * j / grid);
    if (!norm_at_most_one(a + eps * m, slack)) return false;
  }
  return true;
}

}  // namespace detail

/// Largest r (bisection, absolute accuracy 1e-6 or relative 1e-6 for large r)
/// such that ||(1 - eps) a + eps b|| <= 1 on grid_points samples of |eps| = r.
/// Returns +infinity when a == b.
inline double circle_radius(const CMatrix& a, const CMatrix& b, const Tolerances& tol) {
  require_same_shape(a, b);
  const CMatrix m = b - a;
  const double mn = op_norm(m);
  if (mn == 0.0) return std::numeric_limits<double>::infinity();
  const int grid = tol.grid_points;
  const double slack = detail::kCircleSlack;
  if (!detail::circle_ok(a, m, 0.0, 1, slack)) return 0.0;
  // ||A + eps M|| >= |eps| ||M|| - 1, so r <= 2 / ||M|| always fails beyond that.
  double hi = 2.0 / mn + 1.0;
  double lo = 0.0;
  while (hi - lo > 1e-6 * std::max(1.0, lo)) {
    double mid = 0.5 * (lo + hi);
    if (detail::circle_ok(a, m, mid, grid, slack))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

/// Radius below which route (iv) reports "not dominated".
constexpr double kMinRadius = 1e-4;

// ---------------------------------------------------------------------------
// Directed verdict
// ---------------------------------------------------------------------------

struct RouteFlags {
  bool i = false;   ///< B - A = D_{A*} X D_A
  bool ii = false;  ///< I - B*A = D_A Y D_A
  bool iv = false;  ///< circle test with radius >= kMinRadius
  bool agree() const { return i == ii && ii == iv; }
};

struct ShmulyanVerdict {
  bool dominates = false;
  RouteFlags routes;
  bool route_agreement = false;
  std::optional<CMatrix> x_solution;
  std::optional<CMatrix> y_solution;
  double residual_i = 0.0, threshold_i = 0.0;
  double residual_ii = 0.0, threshold_ii = 0.0;
  double radius = 0.0;
  std::optional<CVector> witness;
  bool marginal = false;
};

inline bool near_threshold(double v, double thr) { return thr > 0.0 && v > thr / 10.0 && v <= thr * 10.0; }

/// Is b Shmul'yan dominated by a (b = a + D_{a*} X D_a)?
inline ShmulyanVerdict shmulyan_dominates(const Contraction& b, const Contraction& a, const Tolerances& tol) {
  require_same_shape(a.matrix(), b.matrix());
  const CMatrix& am = a.matrix();
  const CMatrix& bm = b.matrix();
  const DefectData& da = a.defect();
  ShmulyanVerdict v;

  // Route (i): two-sided factorization of M = B - A.
  const CMatrix m = bm - am;
  CMatrix x = pinv(da.d_tstar, tol, 1.0) * m * pinv(da.d_t, tol, 1.0);
  v.residual_i = op_norm(m - da.d_tstar * x * da.d_t);
  v.threshold_i = 10.0 * tol.rank_rtol * std::max(1.0, op_norm(m));
  v.routes.i = v.residual_i <= v.threshold_i;

  // Route (ii): I - B*A = D_A Y D_A.
  const CMatrix g = identity(am.cols()) - bm.adjoint() * am;
  CMatrix y = pinv(da.d_t, tol, 1.0) * g * pinv(da.d_t, tol, 1.0);
  v.residual_ii = op_norm(g - da.d_t * y * da.d_t);
  v.threshold_ii = 10.0 * tol.rank_rtol * std::max(1.0, op_norm(g));
  v.routes.ii = v.residual_ii <= v.threshold_ii;

  // Route (iv): circle test.
  v.radius = circle_radius(am, bm, tol);
  v.routes.iv = v.radius >= kMinRadius;

  v.dominates = v.routes.i;
  v.route_agreement = v.routes.agree();
  v.marginal = near_threshold(v.residual_i, v.threshold_i) || near_threshold(v.residual_ii, v.threshold_ii) ||
               (v.radius > kMinRadius / 10.0 && v.radius < kMinRadius * 10.0);
  if (v.routes.i) {
    v.x_solution = x;
    v.y_solution = y;
  } else {
    // Witness: a vector of N(D_A) moved by M, or of N(D_{A*}) moved by M*.
    DouglasResult rd = douglas_solve(m, da.d_t, Side::right, tol, std::max(1.0, op_norm(m)), 1.0);
    if (!rd.feasible && rd.witness) {
      v.witness = rd.witness;
    } else {
      DouglasResult ld = douglas_solve(m, da.d_tstar, Side::left, tol, std::max(1.0, op_norm(m)), 1.0);
      if (ld.witness) v.witness = ld.witness;
    }
  }
  return v;
}

struct EquivalenceResult {
  bool equivalent = false;
  ShmulyanVerdict b_under_a;  ///< b dominated by a
  ShmulyanVerdict a_under_b;  ///< a dominated by b
  std::optional<CMatrix> x_mixed;  ///< B = A + D_{B*} X D_A
  std::optional<CMatrix> y_mixed;  ///< I - A*B = D_A Y D_B
  double residual_x_mixed = 0.0;
  double residual_y_mixed = 0.0;
  bool route_agreement() const { return b_under_a.route_agreement && a_under_b.route_agreement; }
};

inline EquivalenceResult shmulyan_equivalent(const Contraction& a, const Contraction& b, const Tolerances& tol) {
  EquivalenceResult r;
  r.b_under_a = shmulyan_dominates(b, a, tol);
  r.a_under_b = shmulyan_dominates(a, b, tol);
  r.equivalent = r.b_under_a.dominates && r.a_under_b.dominates;
  if (r.equivalent) {
    const DefectData& da = a.defect();
    const DefectData& db = b.defect();
    const CMatrix m = b.matrix() - a.matrix();
    CMatrix x = pinv(db.d_tstar, tol, 1.0) * m * pinv(da.d_t, tol, 1.0);
    r.residual_x_mixed = op_norm(m - db.d_tstar * x * da.d_t);
    const CMatrix g = identity(a.cols()) - a.matrix().adjoint() * b.matrix();
    CMatrix y = pinv(da.d_t, tol, 1.0) * g * pinv(db.d_t, tol, 1.0);
    r.residual_y_mixed = op_norm(g - da.d_t * y * db.d_t);
    r.x_mixed = x;
    r.y_mixed = y;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Partial isometry parts
// ---------------------------------------------------------------------------

class NotPartialIsometry : public InputError {
 public:
  NotPartialIsometry() : InputError("operand is not a partial isometry") {}
};

struct Membership {
  bool member = false;
  CMatrix z;               ///< N(w) -> N(w*) block of the candidate
  double z_norm = 0.0;
  double block_residual = 0.0;  ///< deviation from the U (+) Z pattern
  bool marginal = false;
};

/// Shmul'yan part of a partial isometry w = U (+) 0 over
/// R(w*) (+) N(w) -> R(w) (+) N(w*).
struct PartDescription {
  CMatrix u_block;
  Subspace initial;  ///< R(w*)
  Subspace kernel;   ///< N(w)
  Subspace final_space;  ///< R(w)
  Subspace cokernel;     ///< N(w*)
  Tolerances tol;

  /// Embeds a block Z : N(w) -> N(w*) into the ambient operator space.
  CMatrix embed_z(const CMatrix& z) const { return cokernel.basis * z * kernel.basis.adjoint(); }
  CMatrix w() const { return final_space.basis * u_block * initial.basis.adjoint(); }

  Membership membership_test(const CMatrix& c) const {
    Membership m;
    const CMatrix& ri = initial.basis;
    const CMatrix& ni = kernel.basis;
    const CMatrix& ro = final_space.basis;
    const CMatrix& no = cokernel.basis;
    double res = 0.0;
    if (u_block.size() > 0) res = std::max(res, op_norm(CMatrix(ro.adjoint() * c * ri) - u_block));
    if (ro.cols() > 0 && ni.cols() > 0) res = std::max(res, op_norm(CMatrix(ro.adjoint() * c * ni)));
    if (no.cols() > 0 && ri.cols() > 0) res = std::max(res, op_norm(CMatrix(no.adjoint() * c * ri)));
    m.block_residual = res;
    m.z = no.adjoint() * c * ni;
    m.z_norm = op_norm(m.z);
    const double thr = 1e-8;
    m.member = res <= thr && m.z_norm < 1.0 - tol.contraction_slack;
    m.marginal = near_threshold(res, thr) || std::abs(m.z_norm - 1.0) <= 1e-6;
    return m;
  }
};

inline PartDescription partial_isometry_part(const Contraction& w, const Tolerances& tol) {
  if (!classify(w, tol).partial_isometry) throw NotPartialIsometry();
  const CMatrix& t = w.matrix();
  PartDescription p;
  p.tol = tol;
  p.initial = range_of(t.adjoint(), tol, 1.0);
  p.kernel = complement(p.initial);
  p.final_space = range_of(t, tol, 1.0);
  p.cokernel = complement(p.final_space);
  p.u_block = p.final_space.basis.adjoint() * t * p.initial.basis;
  return p;
}

// ---------------------------------------------------------------------------
// Column criterion for 2x2 block operators
// ---------------------------------------------------------------------------

class IncompatibleSplits : public InputError {
 public:
  using InputError::InputError;
};

/// Orthogonal splits E = E0 (+) E1 (domain) and E' = E'0 (+) E'1 (codomain).
struct BlockSplits {
  Subspace dom0, dom1, cod0, cod1;
};

struct ColumnCriterionResult {
  bool conditions_hold = false;
  double condition_residual = 0.0;
  bool column0_equivalent = false;
  bool column1_equivalent = false;
  bool result = false;
};

inline void check_split(const Subspace& s0, const Subspace& s1, Index n, const char* what) {
  if (s0.ambient_dim() != n || s1.ambient_dim() != n || s0.dim() + s1.dim() != n)
    throw IncompatibleSplits(std::string(what) + " split does not match the space dimension");
  if (s0.dim() > 0 && s1.dim() > 0 && op_norm(CMatrix(s0.basis.adjoint() * s1.basis)) > 1e-8)
    throw IncompatibleSplits(std::string(what) + " split is not orthogonal");
}

inline ColumnCriterionResult column_criterion(const Contraction& t, const Contraction& tp, const BlockSplits& s,
                                              const Tolerances& tol) {
  require_same_shape(t.matrix(), tp.matrix());
  check_split(s.dom0, s.dom1, t.cols(), "domain");
  check_split(s.cod0, s.cod1, t.rows(), "codomain");
  auto blk = [](const CMatrix& m, const Subspace& out, const Subspace& in) {
    return CMatrix(out.basis.adjoint() * m * in.basis);
  };
  const CMatrix &a = t.matrix(), &b = tp.matrix();
  CMatrix t0 = blk(a, s.cod0, s.dom0), t1 = blk(a, s.cod0, s.dom1);
  CMatrix t2 = blk(a, s.cod1, s.dom0), t3 = blk(a, s.cod1, s.dom1);
  CMatrix p0 = blk(b, s.cod0, s.dom0), p1 = blk(b, s.cod0, s.dom1);
  CMatrix p2 = blk(b, s.cod1, s.dom0), p3 = blk(b, s.cod1, s.dom1);
  ColumnCriterionResult r;
  double res = 0.0;
  res = std::max(res, op_norm(CMatrix(t0.adjoint() * t1 + t2.adjoint() * t3)));
  res = std::max(res, op_norm(CMatrix(p0.adjoint() * p1 + p2.adjoint() * p3)));
  res = std::max(res, op_norm(CMatrix(t0.adjoint() * p1 + t2.adjoint() * p3)));
  res = std::max(res, op_norm(CMatrix(t1.adjoint() * p0 + t3.adjoint() * p2)));
  r.condition_residual = res;
  r.conditions_hold = res <= 1e-8;
  // Column operators in the codomain coordinates [cod0 cod1].
  CMatrix cod(t.rows(), t.rows());
  cod << s.cod0.basis, s.cod1.basis;
  auto column = [&](const CMatrix& m, const Subspace& in) { return CMatrix(cod.adjoint() * m * in.basis); };
  if (s.dom0.dim() > 0) {
    r.column0_equivalent = shmulyan_equivalent(make_contraction(column(a, s.dom0), tol),
                                               make_contraction(column(b, s.dom0), tol), tol)
                               .equivalent;
  } else {
    r.column0_equivalent = true;
  }
  if (s.dom1.dim() > 0) {
    r.column1_equivalent = shmulyan_equivalent(make_contraction(column(a, s.dom1), tol),
                                               make_contraction(column(b, s.dom1), tol), tol)
                               .equivalent;
  } else {
    r.column1_equivalent = true;
  }
  r.result = r.conditions_hold && r.column0_equivalent && r.column1_equivalent;
  return r;
}

// ---------------------------------------------------------------------------
// Quasi-isometries
// ---------------------------------------------------------------------------

class NotQuasiIsometry : public InputError {
 public:
  NotQuasiIsometry() : InputError("operand is not a quasi-isometry") {}
};

struct QuasiIsometryResult {
  bool invariance = false;       ///< N(I - S_T) invariant under T'
  bool range_inclusion = false;  ///< R(Q') in R(D_R) = R(D_{T'})
  bool v_dom = false;            ///< V' dominated by V (forces V' = V)
  bool r_dom = false;            ///< R' dominated by R
  bool result = false;
};

/// Blocks over N(I - S_T) (+) its complement: T = [[V, R], [0, Q]].
inline QuasiIsometryResult quasi_isometry_criterion(const Contraction& t, const Contraction& tp, const Tolerances& tol) {
  require_same_shape(t.matrix(), tp.matrix());
  require_square(t.matrix(), "quasi_isometry_criterion operand");
  if (!classify(t, tol).quasi_isometry) throw NotQuasiIsometry();
  const Index d = t.rows();
  AsymptoticData as = asymptotic_limit(t, tol);
  const Subspace h0 = as.fix_s;
  const Subspace h1 = complement(h0);
  const CMatrix &a = t.matrix(), &b = tp.matrix();
  QuasiIsometryResult r;
  r.invariance = invariance_residual(b, h0) <= 1e-8;

  CMatrix rb = h0.basis.adjoint() * a * h1.basis;    // R
  CMatrix rpb = h0.basis.adjoint() * b * h1.basis;   // R'
  CMatrix vb = h0.basis.adjoint() * a * h0.basis;    // V
  CMatrix vpb = h0.basis.adjoint() * b * h0.basis;   // V'
  CMatrix qpb = h1.basis.adjoint() * b * h1.basis;   // Q'

  // R(D_R) lives in the complement of h0; compare it with R(D_{T'}) in H.
  Subspace dr_range = Subspace::zero(d);
  if (h1.dim() > 0) {
    CMatrix d_r = psd_sqrt(identity(h1.dim()) - rb.adjoint() * rb, tol);
    Subspace loc = range_of(d_r, tol, 1.0);
    dr_range = Subspace(CMatrix(h1.basis * loc.basis));
  }
  Subspace dtp_range = tp.defect().defect_space;
  Subspace q_range = Subspace::zero(d);
  if (h1.dim() > 0) {
    Subspace loc = range_of(qpb, tol, 1.0);
    q_range = Subspace(CMatrix(h1.basis * loc.basis));
  }
  r.range_inclusion = subspace_equal(dr_range, dtp_range, 1e-6) && subspace_contains(dr_range, q_range, 1e-6);

  if (h0.dim() > 0) {
    r.v_dom = shmulyan_dominates(make_contraction(vpb, tol), make_contraction(vb, tol), tol).dominates;
  } else {
    r.v_dom = true;
  }
  if (h0.dim() > 0 && h1.dim() > 0) {
    r.r_dom = shmulyan_dominates(make_contraction(rpb, tol), make_contraction(rb, tol), tol).dominates;
  } else {
    r.r_dom = true;
  }
  r.result = r.invariance && r.range_inclusion && r.v_dom && r.r_dom;
  return r;
}

// ---------------------------------------------------------------------------
// Checks over N(I - S_T) (+) closure R(I - S_T)
// ---------------------------------------------------------------------------

struct Le312Result {
  bool i = false;    ///< N(D_T) invariant under T
  bool ii = false;   ///< N(D_{T*}) contained in N(D_T)
  bool iii = false;  ///< Q block pure
  bool agree() const { return i == ii && ii == iii; }
};

struct IsometricSplit {
  Subspace h0, h1;
  CMatrix v, r, q;
};

inline IsometricSplit isometric_split(const Contraction& t, const Tolerances& tol) {
  AsymptoticData as = asymptotic_limit(t, tol);
  IsometricSplit s;
  s.h0 = as.fix_s;
  s.h1 = complement(s.h0);
  const CMatrix& a = t.matrix();
  s.v = s.h0.basis.adjoint() * a * s.h0.basis;
  s.r = s.h0.basis.adjoint() * a * s.h1.basis;
  s.q = s.h1.basis.adjoint() * a * s.h1.basis;
  return s;
}

inline Le312Result le312_check(const Contraction& t, const Tolerances& tol) {
  require_square(t.matrix(), "le312_check operand");
  const DefectData& d = t.defect();
  Le312Result r;
  r.i = invariance_residual(t.matrix(), d.null_dt) <= 1e-8;
  r.ii = subspace_contains(d.null_dt, d.null_dtstar, 1e-6);
  IsometricSplit s = isometric_split(t, tol);
  if (s.q.size() == 0) {
    r.iii = true;
  } else {
    CMatrix dq = psd_sqrt(identity(s.q.cols()) - s.q.adjoint() * s.q, tol);
    r.iii = kernel_of(dq, tol, 1.0).dim() == 0;
  }
  return r;
}

struct Co313Result {
  bool cond_i = false;   ///< Harnack part holds a partial isometry and Q is pure
  bool cond_ii = false;  ///< ||R*R + Q*Q|| < 1
  bool hypothesis = false;  ///< N(D_{T*}) contained in N(D_T)
  double norm_rq = 0.0;
  bool agree() const { return !hypothesis || cond_i == cond_ii; }
};

inline Co313Result co313_check(const Contraction& t, const Tolerances& tol) {
  require_square(t.matrix(), "co313_check operand");
  IsometricSplit s = isometric_split(t, tol);
  Co313Result r;
  if (s.h1.dim() == 0) {
    r.norm_rq = 0.0;
  } else {
    r.norm_rq = op_norm(CMatrix(s.r.adjoint() * s.r + s.q.adjoint() * s.q));
  }
  r.cond_ii = r.norm_rq < 1.0 - tol.contraction_slack;
  bool q_pure = true;
  if (s.q.size() > 0) {
    CMatrix dq = psd_sqrt(identity(s.q.cols()) - s.q.adjoint() * s.q, tol);
    q_pure = kernel_of(dq, tol, 1.0).dim() == 0;
  }
  // Every matrix has closed defect range, so its Harnack part always holds a
  // partial isometry; only the purity of Q remains.
  r.cond_i = q_pure;
  const DefectData& d = t.defect();
  r.hypothesis = subspace_contains(d.null_dt, d.null_dtstar, 1e-6);
  return r;
}

}  // namespace clab
