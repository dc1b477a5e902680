#pragma once

/// @file suites.hpp
/// @brief Named randomized property suites shared by the CLI and the
/// acceptance runner. Each suite is deterministic in (cases, seed).

#include "contraction_lab/corpus.hpp"
#include "contraction_lab/json_io.hpp"
#include "contraction_lab/schur.hpp"

#include <chrono>
#include <functional>
#include <sstream>

namespace clab {

/// Kernel positivity and level monotonicity, collected over every Harnack
/// verdict a suite computes.
struct KernelAudit {
  long long verdicts = 0;
  long long kernels = 0;
  double min_kernel_eigenvalue = std::numeric_limits<double>::infinity();
  long long monotone_violations = 0;

  void merge(const KernelAudit& o) {
    verdicts += o.verdicts;
    kernels += o.kernels;
    min_kernel_eigenvalue = std::min(min_kernel_eigenvalue, o.min_kernel_eigenvalue);
    monotone_violations += o.monotone_violations;
  }
  bool ok() const { return monotone_violations == 0 && min_kernel_eigenvalue >= -1e-9; }
};

struct SuiteResult {
  std::string name;
  int cases = 0;
  int failures = 0;
  std::vector<std::string> failure_notes;  ///< first few failures
  json metrics = json::object();
  KernelAudit audit;
  double seconds = 0.0;

  bool passed() const { return failures == 0 && cases > 0; }

  void fail(int index, const std::string& what) {
    ++failures;
    if (failure_notes.size() < 10) failure_notes.push_back("case " + std::to_string(index) + ": " + what);
  }
};

namespace suite_detail {

/// Audited Harnack verdict: also checks the level-8 kernels of both operators.
inline HarnackVerdict audited(const Contraction& t, const Contraction& tp, const Tolerances& tol, KernelAudit& a) {
  HarnackVerdict v = harnack_dominates(t, tp, tol);
  ++a.verdicts;
  bool mono = v.nondecreasing;
  for (size_t k = 1; k < v.constants.size(); ++k)
    if (v.constants[k] < v.constants[k - 1]) mono = false;
  if (!mono) ++a.monotone_violations;
  for (const Contraction* c : {&t, &tp}) {
    a.min_kernel_eigenvalue = std::min(a.min_kernel_eigenvalue, kernel_min_eigenvalue(harnack_kernel(*c, 8)));
    ++a.kernels;
  }
  return v;
}

inline std::string fmt(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

inline Rng case_rng(std::uint64_t seed, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  return Rng(seq);
}

/// Random contraction of a randomly chosen structured kind.
inline CMatrix mixed_contraction(Rng& rng, Index r, Index c) {
  switch (uniform_int(rng, 0, 4)) {
    case 0:
      return scaled_to_norm(gaussian_matrix(rng, r, c), uniform(rng, 0.0, 0.95));
    case 1:
      return scaled_to_norm(gaussian_matrix(rng, r, c), 1.0);
    case 2:
      return random_partial_isometry(rng, r, c, uniform_int(rng, 0, static_cast<int>(std::min(r, c))));
    case 3: {
      // Partial isometry plus a strict corner: U (+) Z with ||Z|| < 1.
      Index k = uniform_int(rng, 0, static_cast<int>(std::min(r, c)));
      CMatrix u = haar_unitary(rng, r), v = haar_unitary(rng, c);
      CMatrix z = scaled_to_norm(gaussian_matrix(rng, r - k, c - k), uniform(rng, 0.0, 0.9));
      CMatrix core = CMatrix::Zero(r, c);
      core.topLeftCorner(k, k) = identity(k);
      core.bottomRightCorner(r - k, c - k) = z;
      return u * core * v.adjoint();
    }
    default: {
      CMatrix m = scaled_to_norm(gaussian_matrix(rng, r, c), 1.0);
      // Push a second singular value to 1 as well.
      Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
      RVector s = svd.singularValues();
      if (s.size() > 1) s(1) = 1.0;
      CMatrix sig = CMatrix::Zero(r, c);
      for (Index i = 0; i < s.size(); ++i) sig(i, i) = s(i);
      return svd.matrixU() * sig * svd.matrixV().adjoint();
    }
  }
}

}  // namespace suite_detail

// ---------------------------------------------------------------------------
// 1. Route agreement
// ---------------------------------------------------------------------------

inline SuiteResult suite_routes(int cases, std::uint64_t seed, const Tolerances& tol) {
  using namespace suite_detail;
  SuiteResult r{"routes"};
  int dominated = 0, marginal = 0;
  for (int i = 0; i < cases; ++i) {
    Rng rng = case_rng(seed, i);
    Index rows = uniform_int(rng, 1, 6), cols = uniform_int(rng, 1, 6);
    if (uniform(rng, 0, 1) < 0.5) cols = rows;
    Contraction a = make_contraction(mixed_contraction(rng, rows, cols), tol);
    CMatrix bm;
    double mode = uniform(rng, 0, 1);
    if (mode < 0.5) {
      // b = a + eps D_{a*} X D_a, shrunk until it is a contraction.
      const DefectData& dd = a.defect();
      CMatrix x = gaussian_matrix(rng, rows, cols);
      double eps = uniform(rng, 0.05, 1.0) / std::max(op_norm(x), 1e-12);
      for (int k = 0; k < 60; ++k, eps *= 0.5) {
        bm = a.matrix() + eps * dd.d_tstar * x * dd.d_t;
        if (op_norm(bm) <= 1.0) break;
      }
      if (op_norm(bm) > 1.0) bm = a.matrix();
    } else if (mode < 0.8) {
      bm = mixed_contraction(rng, rows, cols);
    } else {
      bm = a.matrix() + scaled_to_norm(gaussian_matrix(rng, rows, cols), 0.05);
      bm = scaled_to_norm(bm, std::min(1.0, op_norm(bm)));
    }
    Contraction b = make_contraction(bm, tol);
    ShmulyanVerdict v = shmulyan_dominates(b, a, tol);
    if (v.dominates) ++dominated;
    if (v.marginal) ++marginal;
    r.cases++;
    if (!v.route_agreement)
      r.fail(i, "routes disagree (i=" + std::to_string(v.routes.i) + ", ii=" + std::to_string(v.routes.ii) +
                    ", iv=" + std::to_string(v.routes.iv) + ", radius=" + fmt(v.radius) + ")");
    if (v.dominates && v.x_solution) {
      const DefectData& dd = a.defect();
      double res = op_norm(CMatrix(bm - a.matrix() - dd.d_tstar * *v.x_solution * dd.d_t));
      if (res > v.threshold_i) r.fail(i, "factor residual " + fmt(res));
    }
  }
  r.metrics = {{"dominated", dominated}, {"not_dominated", r.cases - dominated}, {"marginal", marginal}};
  return r;
}

// ---------------------------------------------------------------------------
// 2. Harnack part of 0
// ---------------------------------------------------------------------------

/// First `strict_cases` cases: ||T|| <= 0.9, both directions dominated.
/// Remaining cases: upper triangular T with ||T|| = 1 and spectral radius
/// <= 0.9: T dominated by 0, while 0 is not dominated by T (kernel witness).
inline SuiteResult suite_strict_part(int strict_cases, int boundary_cases, std::uint64_t seed, const Tolerances& tol) {
  using namespace suite_detail;
  SuiteResult r{"strict-part"};
  for (int i = 0; i < strict_cases + boundary_cases; ++i) {
    Rng rng = case_rng(seed, i);
    Index d = uniform_int(rng, 1, 4);
    Contraction zero = make_contraction(CMatrix::Zero(d, d), tol);
    r.cases++;
    if (i < strict_cases) {
      Contraction t = make_contraction(scaled_to_norm(gaussian_matrix(rng, d, d), uniform(rng, 0.0, 0.9)), tol);
      HarnackVerdict a = audited(t, zero, tol, r.audit);
      HarnackVerdict b = audited(zero, t, tol, r.audit);
      if (a.status != HarnackStatus::Dominated) r.fail(i, std::string("T vs 0: ") + to_string(a.status));
      if (b.status != HarnackStatus::Dominated) r.fail(i, std::string("0 vs T: ") + to_string(b.status));
    } else {
      Index n = uniform_int(rng, 1, 4);
      Contraction zn = make_contraction(CMatrix::Zero(n, n), tol);
      CMatrix t = CMatrix::Zero(n, n);
      for (Index k = 0; k < n; ++k) t(k, k) = disc_point(rng, 0.9);
      if (n == 1) {
        // A 1x1 matrix of norm one has spectral radius one; use a 2x2 Jordan-type block instead.
        t = CMatrix::Zero(2, 2);
        t(0, 0) = disc_point(rng, 0.9);
        t(1, 1) = disc_point(rng, 0.9);
        zn = make_contraction(CMatrix::Zero(2, 2), tol);
      }
      // Strictly upper part large enough that ||T|| >= 1 before normalizing.
      CMatrix up = gaussian_matrix(rng, t.rows(), t.cols()).triangularView<Eigen::StrictlyUpper>();
      up = scaled_to_norm(up, 2.0);
      t = scaled_to_norm(CMatrix(t + up), 1.0);
      Contraction tc = make_contraction(t, tol);
      HarnackVerdict a = audited(tc, zn, tol, r.audit);
      HarnackVerdict b = audited(zn, tc, tol, r.audit);
      if (a.status != HarnackStatus::Dominated) r.fail(i, std::string("boundary T vs 0: ") + to_string(a.status));
      if (b.status != HarnackStatus::NotDominated || !b.witness || b.witness_ratio <= tol.big_ratio)
        r.fail(i, std::string("0 vs boundary T: ") + to_string(b.status));
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// 3. Scalar constant
// ---------------------------------------------------------------------------

inline SuiteResult suite_scalar_constant(const Tolerances& tol) {
  using namespace suite_detail;
  SuiteResult r{"scalar-constant"};
  CMatrix a(1, 1), z = CMatrix::Zero(1, 1);
  a(0, 0) = 0.5;
  Tolerances t64 = tol;
  t64.max_level = 64;
  HarnackVerdict v = audited(make_contraction(a, tol), make_contraction(z, tol), t64, r.audit);
  r.cases = 1;
  double c64 = v.constants.size() >= 64 ? v.constants[63] : std::numeric_limits<double>::quiet_NaN();
  if (!(c64 >= 2.9 && c64 <= 3.0)) r.fail(0, "level-64 constant " + fmt(c64));
  for (size_t k = 1; k < v.constants.size(); ++k)
    if (v.constants[k] < v.constants[k - 1]) r.fail(0, "trace decreases at level " + std::to_string(k + 1));
  r.metrics = {{"level64", c64}, {"status", to_string(v.status)}, {"constant", v.constant}};
  return r;
}

// ---------------------------------------------------------------------------
// 4. Partial isometry parts
// ---------------------------------------------------------------------------

inline SuiteResult suite_partial_isometry(int cases, std::uint64_t seed, const Tolerances& tol) {
  using namespace suite_detail;
  SuiteResult r{"partial-isometry"};
  int members = 0, rejections = 0, inconclusive = 0;
  for (int i = 0; i < cases; ++i) {
    Rng rng = case_rng(seed, i);
    Index d = uniform_int(rng, 2, 6);
    Index k = uniform_int(rng, 1, static_cast<int>(d) - 1);
    Contraction w = make_contraction(random_partial_isometry(rng, d, d, k), tol);
    PartDescription part = partial_isometry_part(w, tol);
    const Index nk = part.kernel.dim(), nc = part.cokernel.dim();
    const double znorm = (i % 2 == 0) ? 0.3 : 0.9;
    struct Candidate {
      CMatrix c;
      bool expect;
      std::string label;
    };
    std::vector<Candidate> cands;
    cands.push_back({w.matrix() + part.embed_z(scaled_to_norm(gaussian_matrix(rng, nc, nk), znorm)), true,
                     "||Z|| = " + fmt(znorm)});
    cands.push_back({w.matrix() + part.embed_z(scaled_to_norm(gaussian_matrix(rng, nc, nk), 1.0)), false, "||Z|| = 1"});
    // A different partial isometry: a unit-norm partial isometry in the corner.
    Index kz = uniform_int(rng, 1, static_cast<int>(std::min(nk, nc)));
    cands.push_back({w.matrix() + part.embed_z(random_partial_isometry(rng, nc, nk, kz)), false, "other partial isometry"});
    cands.push_back({random_partial_isometry(rng, d, d, uniform_int(rng, 0, static_cast<int>(d))), false, "random partial isometry"});
    for (const auto& cand : cands) {
      Contraction c = make_contraction(cand.c, tol);
      if (op_norm(CMatrix(cand.c - w.matrix())) < 1e-12) continue;
      r.cases++;
      bool m = part.membership_test(cand.c).member;
      bool s = shmulyan_equivalent(w, c, tol).equivalent;
      HarnackVerdict h1 = audited(w, c, tol, r.audit);
      HarnackVerdict h2 = audited(c, w, tol, r.audit);
      bool h_not = h1.status == HarnackStatus::NotDominated || h2.status == HarnackStatus::NotDominated;
      bool h = !h_not;
      if (h && (h1.status == HarnackStatus::Inconclusive || h2.status == HarnackStatus::Inconclusive)) ++inconclusive;
      if (m) ++members;
      else ++rejections;
      if (m != cand.expect || s != cand.expect || h != cand.expect)
        r.fail(i, cand.label + ": membership=" + std::to_string(m) + " shmulyan=" + std::to_string(s) +
                      " harnack=" + std::to_string(h) + " expected " + std::to_string(cand.expect));
    }
  }
  r.metrics = {{"members", members}, {"rejections", rejections}, {"harnack_inconclusive_members", inconclusive}};
  return r;
}

// ---------------------------------------------------------------------------
// 5. Commuting pairs
// ---------------------------------------------------------------------------

struct CommutingPair {
  CMatrix t, tp;
  Index unitary_dim = 0;
};

/// T = p(M), T' = q(M) for M = W (U (+) Q) W*, with p(z), q(z) = z + eps r(z) s(z)
/// and r vanishing on the spectrum of U, so both act as U on the unitary part.
inline CommutingPair dominated_commuting_pair(Rng& rng, Index d) {
  CommutingPair out;
  double roll = uniform(rng, 0, 1);
  Index k = roll < 0.15 ? d : (roll < 0.3 ? 0 : uniform_int(rng, 0, static_cast<int>(d)));
  out.unitary_dim = k;
  CVector ueig(k);
  for (Index i = 0; i < k; ++i) ueig(i) = unit_phase(rng);
  CMatrix q;
  const double qn = uniform(rng, 0.0, 0.9);
  if (uniform(rng, 0, 1) < 0.3) {
    CVector qe(d - k);
    for (Index i = 0; i < d - k; ++i) qe(i) = disc_point(rng, qn);
    CMatrix v = haar_unitary(rng, d - k);
    q = v * qe.asDiagonal() * v.adjoint();
  } else {
    q = scaled_to_norm(gaussian_matrix(rng, d - k, d - k), qn);
  }
  CMatrix wv = haar_unitary(rng, d);
  CMatrix m = wv * block_diag(CMatrix(ueig.asDiagonal()), q) * wv.adjoint();
  // r(z) = prod (z - u_i) as a coefficient list.
  std::vector<cplx> rc{cplx(1.0)};
  for (Index i = 0; i < k; ++i) {
    std::vector<cplx> n(rc.size() + 1, cplx(0.0));
    for (size_t j = 0; j < rc.size(); ++j) {
      n[j + 1] += rc[j];
      n[j] -= ueig(i) * rc[j];
    }
    rc = n;
  }
  auto make = [&]() {
    std::vector<cplx> s = random_l1_poly(rng, uniform_int(rng, 0, 2), 1.0);
    std::vector<cplx> rs(rc.size() + s.size() - 1, cplx(0.0));
    for (size_t a = 0; a < rc.size(); ++a)
      for (size_t b = 0; b < s.size(); ++b) rs[a + b] += rc[a] * s[b];
    CMatrix qrs = d - k > 0 ? matrix_poly(rs, q) : CMatrix(0, 0);
    double room = 0.97 - op_norm(q);
    double eps = qrs.size() > 0 && op_norm(qrs) > 0 ? uniform(rng, 0.0, 1.0) * room / op_norm(qrs) : 0.0;
    if (uniform(rng, 0, 1) < 0.2) eps = 0.0;
    std::vector<cplx> p(std::max<size_t>(rs.size(), 2), cplx(0.0));
    p[1] = 1.0;
    for (size_t j = 0; j < rs.size(); ++j) p[j] += eps * rs[j];
    return matrix_poly(p, m);
  };
  out.t = make();
  out.tp = make();
  return out;
}

inline SuiteResult suite_commuting(int cases, std::uint64_t seed, const Tolerances& tol) {
  using namespace suite_detail;
  SuiteResult r{"commuting"};
  int c1_cases = 0, hypo_cases = 0, equivalent_cases = 0, skipped = 0;
  const double thr = 1e-8;
  for (int i = 0; r.cases < cases && i < 4 * cases; ++i) {
    Rng rng = case_rng(seed, i);
    Index d = uniform_int(rng, 1, 4);
    CommutingPair pr = dominated_commuting_pair(rng, d);
    Contraction t = make_contraction(pr.t, tol), tp = make_contraction(pr.tp, tol);
    HarnackVerdict v = audited(t, tp, tol, r.audit);
    if (v.status != HarnackStatus::Dominated) {
      ++skipped;
      continue;
    }
    r.cases++;
    // Block identities over N(S_T) (+) its complement.
    Triangulation tr = canonical_triangulation(t, tol);
    AsymptoticData ap = asymptotic_limit(tp, tol);
    if (!subspace_equal(tr.null_s, ap.null_s)) r.fail(i, "N(S_T) differs from N(S_T')");
    const CMatrix& nb = tr.null_s.basis;
    const CMatrix& rb = tr.range_s.basis;
    CMatrix qp = nb.adjoint() * pr.tp * nb, rp = nb.adjoint() * pr.tp * rb, wp = rb.adjoint() * pr.tp * rb;
    if (op_norm(CMatrix(wp - tr.w_block)) > thr) r.fail(i, "W blocks differ by " + fmt(op_norm(CMatrix(wp - tr.w_block))));
    double ident = op_norm(CMatrix(tr.q_block * rp - qp * tr.r_block - (rp - tr.r_block) * tr.w_block));
    if (ident > thr) r.fail(i, "block identity residual " + fmt(ident));
    // Rigidity for classes C1. / C.1.
    ClassInfo ci = class_info(t, tol);
    if (ci.c1_dot || ci.c_dot1) {
      ++c1_cases;
      if (op_norm(CMatrix(pr.t - pr.tp)) > thr) r.fail(i, "C1 class but T != T'");
    }
    // Reducing isometric parts.
    Subspace hi = reducing_isometric_part(t, tol), hip = reducing_isometric_part(tp, tol);
    if (!subspace_contains(hi, hip)) r.fail(i, "isometric part of T' not inside that of T");
    if (hip.dim() > 0 && op_norm(CMatrix((pr.t - pr.tp) * hip.basis)) > thr) r.fail(i, "T != T' on isometric part of T'");
    HarnackVerdict back = audited(tp, t, tol, r.audit);
    if (back.status == HarnackStatus::Dominated) {
      ++equivalent_cases;
      if (!subspace_equal(hi, hip)) r.fail(i, "equivalent pair with different isometric parts");
    }
    // Hyponormal T: same unitary parts.
    if (classify(t, tol).hyponormal) {
      ++hypo_cases;
      if (!subspace_equal(reducing_unitary_part(t, tol), reducing_unitary_part(tp, tol)))
        r.fail(i, "hyponormal T with different unitary parts");
    }
    double comm = op_norm(CMatrix(pr.t * pr.tp - pr.tp * pr.t));
    if (comm > 1e-13) r.fail(i, "pair does not commute: " + fmt(comm));
  }
  if (r.cases < cases) r.fail(-1, "only " + std::to_string(r.cases) + " dominated pairs generated");
  r.metrics = {{"c1_cases", c1_cases}, {"hyponormal_cases", hypo_cases}, {"equivalent_cases", equivalent_cases},
               {"skipped_not_dominated", skipped}};
  return r;
}

// ---------------------------------------------------------------------------
// 6. Commuting normal pairs through the equivalence pipeline
// ---------------------------------------------------------------------------

inline SuiteResult suite_commuting_normal(int cases, std::uint64_t seed, const Tolerances& tol) {
  using namespace suite_detail;
  SuiteResult r{"commuting-normal"};
  int all_true = 0, all_false = 0, with_w = 0;
  double max_w_res = 0.0;
  for (int i = 0; i < cases; ++i) {
    Rng rng = case_rng(seed, i);
    Index d = uniform_int(rng, 1, 4);
    CVector a(d), b(d);
    const bool spoil = uniform(rng, 0, 1) < 0.4;
    Index bad = uniform_int(rng, 0, static_cast<int>(d) - 1);
    for (Index j = 0; j < d; ++j) {
      int type = uniform(rng, 0, 1) < 0.3 ? 1 : 0;
      if (spoil && j == bad) type = uniform_int(rng, 2, 4);
      switch (type) {
        case 0:
          a(j) = disc_point(rng, 0.95);
          b(j) = disc_point(rng, 0.95);
          break;
        case 1:
          a(j) = b(j) = unit_phase(rng);
          break;
        case 2:
          a(j) = unit_phase(rng);
          b(j) = disc_point(rng, 0.95);
          break;
        case 3:
          a(j) = disc_point(rng, 0.95);
          b(j) = unit_phase(rng);
          break;
        default:
          a(j) = unit_phase(rng);
          b(j) = a(j) * std::polar(1.0, uniform(rng, 0.3, 6.0));
      }
    }
    CMatrix v = haar_unitary(rng, d);
    Contraction t = make_contraction(CMatrix(v * a.asDiagonal() * v.adjoint()), tol);
    Contraction tp = make_contraction(CMatrix(v * b.asDiagonal() * v.adjoint()), tol);
    Te210Report rep = te210_pipeline(t, tp, tol);
    ++r.audit.verdicts;
    if (!rep.harnack.nondecreasing) ++r.audit.monotone_violations;
    for (const Contraction* c : {&t, &tp}) {
      r.audit.min_kernel_eigenvalue = std::min(r.audit.min_kernel_eigenvalue, kernel_min_eigenvalue(harnack_kernel(*c, 8)));
      ++r.audit.kernels;
    }
    r.cases++;
    if (!rep.hypotheses()) {
      r.fail(i, "hypotheses not met");
      continue;
    }
    if (rep.i != rep.iii || rep.iii != rep.v)
      r.fail(i, "statements disagree: (i)=" + std::to_string(rep.i) + " (iii)=" + std::to_string(rep.iii) +
                    " (v)=" + std::to_string(rep.v) + " harnack " + to_string(rep.harnack.status));
    if (rep.v && !rep.w_found) r.fail(i, "intertwiner without W");
    if (rep.w_found) {
      ++with_w;
      max_w_res = std::max(max_w_res, rep.w_residual);
      if (rep.w_residual > 1e-8) r.fail(i, "W residual " + fmt(rep.w_residual));
    }
    if (rep.i && rep.iii && rep.v) ++all_true;
    if (!rep.i && !rep.iii && !rep.v) ++all_false;
  }
  r.metrics = {{"all_true", all_true}, {"all_false", all_false}, {"with_w", with_w}, {"max_w_residual", max_w_res}};
  return r;
}

// ---------------------------------------------------------------------------
// 7. Arcs
// ---------------------------------------------------------------------------

inline SuiteResult suite_arcs(int equivalent_cases, int other_cases, std::uint64_t seed, const Tolerances& tol) {
  using namespace suite_detail;
  SuiteResult r{"arcs"};
  int hops = 0;
  double max_bound = 0.0, max_res = 0.0;
  for (int i = 0; i < equivalent_cases + other_cases; ++i) {
    Rng rng = case_rng(seed, i);
    Index d = uniform_int(rng, 1, 4);
    Index k = uniform_int(rng, 0, static_cast<int>(d) - 1);
    CMatrix w = haar_unitary(rng, d);
    CMatrix u = haar_unitary(rng, k);
    auto z = [&](double n) { return scaled_to_norm(gaussian_matrix(rng, d - k, d - k), n); };
    CMatrix t = w * block_diag(u, z(uniform(rng, 0.0, 0.9))) * w.adjoint();
    CMatrix tp;
    const bool equivalent = i < equivalent_cases;
    if (equivalent) {
      tp = w * block_diag(u, z(uniform(rng, 0.0, 0.9))) * w.adjoint();
    } else {
      switch (i % 3) {
        case 0:
          tp = w * block_diag(u, z(1.0)) * w.adjoint();
          break;
        case 1:
          if (k > 0) {
            tp = w * block_diag(CMatrix(u * haar_unitary(rng, k)), z(uniform(rng, 0.0, 0.9))) * w.adjoint();
            break;
          }
          [[fallthrough]];
        default:
          tp = haar_unitary(rng, d);
      }
    }
    r.cases++;
    ArcResult ar = connect_arc(make_contraction(t, tol), make_contraction(tp, tol), tol);
    if (!equivalent) {
      if (ar.status != ArcStatus::NotConnected) r.fail(i, std::string("expected NotConnected, got ") + to_string(ar.status));
      continue;
    }
    if (ar.status != ArcStatus::Connected) {
      r.fail(i, std::string("expected Connected, got ") + to_string(ar.status));
      continue;
    }
    const ArcCertificate& c = *ar.certificate;
    hops += static_cast<int>(c.arcs.size());
    max_bound = std::max(max_bound, c.bound);
    max_res = std::max(max_res, c.endpoint_residual);
    if (!c.schur_class) r.fail(i, "arc leaves the Schur class");
    if (c.endpoint_residual > 1e-8) r.fail(i, "endpoint residual " + fmt(c.endpoint_residual));
    if (!std::isfinite(c.bound)) r.fail(i, "infinite bound");
  }
  // Scalar pair 0 -> 0.5.
  CMatrix a = CMatrix::Zero(1, 1), b(1, 1);
  b(0, 0) = 0.5;
  ArcResult ar = connect_arc(make_contraction(a, tol), make_contraction(b, tol), tol);
  r.cases++;
  double scalar_bound = ar.certificate ? ar.certificate->bound : std::numeric_limits<double>::infinity();
  if (!(scalar_bound <= std::atanh(0.5) + 1e-6)) r.fail(-1, "scalar bound " + fmt(scalar_bound));
  r.metrics = {{"hops", hops}, {"max_bound", max_bound}, {"max_endpoint_residual", max_res}, {"scalar_bound", scalar_bound}};
  return r;
}

// ---------------------------------------------------------------------------
// 8. Delta-infinity membership
// ---------------------------------------------------------------------------

/// Independent sup-norm estimate: fine grid plus local golden-section search.
inline double dense_sup_oracle(const SchurPoly& f) {
  double arg = 0.0;
  return detail::circle_max([&](double th) { return op_norm(f.eval(std::polar(1.0, th))); }, 8192, arg);
}

inline SuiteResult suite_delta_infinity(int cases, std::uint64_t seed, const Tolerances& tol) {
  using namespace suite_detail;
  SuiteResult r{"delta-infinity"};
  {
    CMatrix zero = CMatrix::Zero(1, 1), one = CMatrix::Ones(1, 1);
    DeltaInftyResult d = delta_infty_member(make_contraction(zero, tol), SchurPoly{{zero, one}}, tol);
    r.cases++;
    if (d.member) r.fail(-1, "w = 0, F = lambda accepted");
  }
  double worst_inside = 0.0, best_outside = 2.0;
  for (int i = 0; i < cases; ++i) {
    Rng rng = case_rng(seed, i);
    Index d = uniform_int(rng, 2, 5);
    Index k = uniform_int(rng, 0, static_cast<int>(d) - 1);
    Contraction w = make_contraction(random_partial_isometry(rng, d, d, k), tol);
    PartDescription part = partial_isometry_part(w, tol);
    const Index nk = part.kernel.dim(), nc = part.cokernel.dim();
    int deg = uniform_int(rng, 1, 3);
    SchurPoly f0;
    for (int j = 0; j <= deg; ++j) f0.coeffs.push_back(gaussian_matrix(rng, nc, nk));
    const double s = dense_sup_oracle(f0);
    for (double target : {0.999, 1.001}) {
      SchurPoly f;
      for (int j = 0; j <= deg; ++j) {
        CMatrix c = part.embed_z(CMatrix(f0.coeffs[static_cast<size_t>(j)] * (target / s)));
        if (j == 0) c += w.matrix();
        f.coeffs.push_back(c);
      }
      DeltaInftyResult res = delta_infty_member(w, f, tol);
      r.cases++;
      bool expect = target < 1.0;
      if (expect) worst_inside = std::max(worst_inside, res.f0_sup.bound);
      else best_outside = std::min(best_outside, res.f0_sup.bound);
      if (res.member != expect) r.fail(i, "sup " + fmt(target) + " gave member=" + std::to_string(res.member) +
                                              " (bound " + fmt(res.f0_sup.bound) + ")");
    }
    DeltaInftyResult c = delta_infty_member(w, SchurPoly{{w.matrix()}}, tol);
    r.cases++;
    if (!c.member) r.fail(i, "constant F = w rejected");
  }
  r.metrics = {{"max_bound_at_0999", worst_inside}, {"min_bound_at_1001", best_outside}};
  return r;
}

// ---------------------------------------------------------------------------
// 9. Finite-dimensional regularity
// ---------------------------------------------------------------------------

inline SuiteResult suite_regularity(int cases, std::uint64_t seed, const Tolerances& tol) {
  using namespace suite_detail;
  SuiteResult r{"regularity"};
  double worst = 0.0;
  for (int i = 0; i < cases; ++i) {
    Rng rng = case_rng(seed, i);
    Index d = uniform_int(rng, 1, 6);
    Contraction t = make_contraction(mixed_contraction(rng, d, d), tol);
    r.cases++;
    try {
      PowerLimit pl = gram_power_limit(t, tol);
      double err = op_norm(CMatrix(pl.limit - t.defect().null_dt.projector()));
      worst = std::max(worst, err);
      if (err > tol.conv_tol) r.fail(i, "(T*T)^n misses the projection by " + fmt(err));
      Contraction w = nearest_part_partial_isometry(t, tol);
      if (!shmulyan_equivalent(t, w, tol).equivalent) r.fail(i, "nearest partial isometry not equivalent");
    } catch (const Error& e) {
      r.fail(i, e.what());
    }
  }
  r.metrics = {{"max_projection_error", worst}};
  return r;
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> n = {"routes",     "strict-part", "scalar-constant", "partial-isometry",
                                             "commuting",  "commuting-normal", "arcs",        "delta-infinity",
                                             "regularity"};
  return n;
}

/// Runs a suite by name; `cases` <= 0 selects the default size.
inline SuiteResult run_suite(const std::string& name, int cases, std::uint64_t seed, const Tolerances& tol) {
  auto pick = [&](int def) { return cases > 0 ? cases : def; };
  auto start = std::chrono::steady_clock::now();
  SuiteResult r;
  if (name == "routes")
    r = suite_routes(pick(1000), seed, tol);
  else if (name == "strict-part")
    r = cases > 0 ? suite_strict_part(cases - cases / 5, cases / 5, seed, tol) : suite_strict_part(200, 50, seed, tol);
  else if (name == "scalar-constant")
    r = suite_scalar_constant(tol);
  else if (name == "partial-isometry")
    r = suite_partial_isometry(pick(200), seed, tol);
  else if (name == "commuting")
    r = suite_commuting(pick(300), seed, tol);
  else if (name == "commuting-normal")
    r = suite_commuting_normal(pick(300), seed, tol);
  else if (name == "arcs")
    r = cases > 0 ? suite_arcs(cases - cases / 2, cases / 2, seed, tol) : suite_arcs(200, 200, seed, tol);
  else if (name == "delta-infinity")
    r = suite_delta_infinity(pick(100), seed, tol);
  else if (name == "regularity")
    r = suite_regularity(pick(500), seed, tol);
  else
    throw InputError("unknown suite \"" + name + "\"");
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

inline json suite_to_json(const SuiteResult& r) {
  return json{{"name", r.name},
              {"cases", r.cases},
              {"failures", r.failures},
              {"passed", r.passed()},
              {"failure_notes", r.failure_notes},
              {"metrics", r.metrics},
              {"kernel_audit",
               {{"verdicts", r.audit.verdicts},
                {"kernels", r.audit.kernels},
                {"min_kernel_eigenvalue", r.audit.kernels ? r.audit.min_kernel_eigenvalue : 0.0},
                {"monotone_violations", r.audit.monotone_violations}}}};
}

}  // namespace clab
