#pragma once

/// @file schur.hpp
/// @brief Matrix polynomials on the disc: sup norms with certified upper
/// bounds, affine arcs between contractions, hyperbolic chain lengths,
/// Toeplitz truncations and membership tests for partial-isometry constants.

#include "contraction_lab/harnack.hpp"

#include <queue>

namespace clab {

/// F(lambda) = sum_k coeffs[k] lambda^k.
struct SchurPoly {
  std::vector<CMatrix> coeffs;

  Index rows() const { return coeffs.empty() ? 0 : coeffs.front().rows(); }
  Index cols() const { return coeffs.empty() ? 0 : coeffs.front().cols(); }
  int degree() const { return static_cast<int>(coeffs.size()) - 1; }

  CMatrix eval(cplx lambda) const {
    CMatrix r = CMatrix::Zero(rows(), cols());
    for (size_t k = coeffs.size(); k-- > 0;) r = r * lambda + coeffs[k];
    return r;
  }

  void validate() const {
    if (coeffs.empty()) throw InputError("polynomial needs at least one coefficient");
    for (const auto& c : coeffs) {
      if (c.rows() != rows() || c.cols() != cols())
        throw ShapeMismatch("polynomial coefficients differ in shape");
      if (!all_finite(c)) throw InputError("polynomial coefficient has non-finite entries");
    }
  }
};

struct SupNorm {
  double value = 0.0;  ///< best attained value found on the circle
  double bound = 0.0;  ///< certified upper bound
  std::string method;  ///< "exact-diagonal" or "grid"
};

namespace detail {

inline bool nonnegative_diagonal(const SchurPoly& f) {
  for (const auto& c : f.coeffs)
    for (Index j = 0; j < c.cols(); ++j)
      for (Index i = 0; i < c.rows(); ++i) {
        if (i != j && c(i, j) != cplx(0.0)) return false;
        if (i == j && (c(i, i).imag() != 0.0 || c(i, i).real() < 0.0)) return false;
      }
  return true;
}

inline double circle_norm(const SchurPoly& f, double theta) { return op_norm(f.eval(std::polar(1.0, theta))); }

/// Affine F = C + lambda K: the disc sits inside the circumscribed G-gon and
/// the norm is convex, so the vertices bound the supremum.
inline double affine_bound(const SchurPoly& f, int grid) {
  const CMatrix& c = f.coeffs[0];
  const CMatrix k = f.coeffs.size() > 1 ? f.coeffs[1] : CMatrix::Zero(c.rows(), c.cols());
  const double sec = 1.0 / std::cos(M_PI / grid);
  double best = 0.0;
  for (int j = 0; j < grid; ++j) best = std::max(best, op_norm(CMatrix(c + std::polar(sec, 2.0 * M_PI * j / grid) * k)));
  return best;
}

/// Branch and bound on h(theta) = lambda_max(F*F) over [0, 2pi). On an
/// interval of half-width w around m,
///   h <= max_{s = +-w} lambda_max(H(m) + s H'(m)) + w^2 M2 / 2,
/// with ||H''|| <= M2 = 2 S0 S2 + 2 S1^2, S_j = sum_k k^j ||c_k||.
inline double branch_and_bound(const SchurPoly& f, int grid, double rel_acc, double& lower, int max_evals = 200000) {
  const bool left = f.rows() < f.cols();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (size_t k = 0; k < f.coeffs.size(); ++k) {
    double n = op_norm(f.coeffs[k]);
    double kk = static_cast<double>(k);
    s0 += n;
    s1 += kk * n;
    s2 += kk * kk * n;
  }
  const double m2 = 2.0 * s0 * s2 + 2.0 * s1 * s1;
  struct Node {
    double center, half, ub;
    bool operator<(const Node& o) const { return ub < o.ub; }
  };
  auto bound_at = [&](double m, double w, double& val) {
    cplx z = std::polar(1.0, m);
    CMatrix fz = CMatrix::Zero(f.rows(), f.cols()), dfz = CMatrix::Zero(f.rows(), f.cols());
    for (size_t k = f.coeffs.size(); k-- > 0;) fz = fz * z + f.coeffs[k];
    for (size_t k = f.coeffs.size(); k-- > 1;) dfz = dfz * z + static_cast<double>(k) * f.coeffs[k];
    dfz *= cplx(0.0, 1.0) * z;
    CMatrix h, dh;
    if (left) {
      h = fz * fz.adjoint();
      dh = dfz * fz.adjoint() + fz * dfz.adjoint();
    } else {
      h = fz.adjoint() * fz;
      dh = dfz.adjoint() * fz + fz.adjoint() * dfz;
    }
    h = hermitian_part(h);
    dh = hermitian_part(dh);
    val = lambda_max(h);
    double ub = std::max(lambda_max(CMatrix(h + w * dh)), lambda_max(CMatrix(h - w * dh)));
    return ub + 0.5 * w * w * m2;
  };
  std::priority_queue<Node> pq;
  const double half = M_PI / grid;
  lower = 0.0;
  for (int j = 0; j < grid; ++j) {
    double c = (2 * j + 1) * half, val = 0.0;
    double ub = bound_at(c, half, val);
    lower = std::max(lower, val);
    pq.push({c, half, ub});
  }
  int evals = grid;
  while (!pq.empty()) {
    Node top = pq.top();
    if (top.ub - lower <= rel_acc * std::max(lower, 1e-300) || evals >= max_evals) return std::max(top.ub, lower);
    pq.pop();
    for (double sign : {-0.5, 0.5}) {
      double c = top.center + sign * top.half, w = 0.5 * top.half, val = 0.0;
      double ub = bound_at(c, w, val);
      lower = std::max(lower, val);
      pq.push({c, w, ub});
      ++evals;
    }
  }
  return lower;
}

}  // namespace detail

/// Supremum of ||F|| over the closed disc (attained on the circle).
inline SupNorm schur_sup_norm(const SchurPoly& f, const Tolerances& tol) {
  f.validate();
  SupNorm s;
  if (f.rows() == 0 || f.cols() == 0) {
    s.method = "exact-diagonal";
    return s;
  }
  if (detail::nonnegative_diagonal(f)) {
    // |sum_k c_k,ii lambda^k| <= sum_k c_k,ii with equality at lambda = 1.
    const Index n = std::min(f.rows(), f.cols());
    for (Index i = 0; i < n; ++i) {
      double acc = 0.0;
      for (const auto& c : f.coeffs) acc += c(i, i).real();
      s.value = std::max(s.value, acc);
    }
    s.bound = s.value;
    s.method = "exact-diagonal";
    return s;
  }
  s.method = "grid";
  double arg = 0.0;
  s.value = detail::circle_max([&](double th) { return detail::circle_norm(f, th); }, tol.grid_points, arg);
  if (f.degree() <= 1) {
    s.bound = std::max(s.value, detail::affine_bound(f, tol.grid_points));
  } else {
    double lower = 0.0;
    double ub = detail::branch_and_bound(f, tol.grid_points, 2e-7, lower);
    s.value = std::max(s.value, std::sqrt(lower));
    s.bound = std::max(s.value, std::sqrt(ub));
  }
  return s;
}

/// Grid test of the Schur-class condition: ||F|| <= 1 + contraction_slack on
/// grid_points samples of the circle.
inline double grid_max_norm(const SchurPoly& f, int grid) {
  double m = 0.0;
  for (int j = 0; j < grid; ++j) m = std::max(m, detail::circle_norm(f, 2.0 * M_PI * j / grid));
  return m;
}

inline bool in_schur_class(const SchurPoly& f, const Tolerances& tol) {
  return grid_max_norm(f, tol.grid_points) <= 1.0 + tol.contraction_slack;
}

inline CMatrix toeplitz_truncate(const SchurPoly& f, int n) {
  f.validate();
  if (n < 0) throw InputError("truncation size must be nonnegative");
  const Index r = f.rows(), c = f.cols();
  CMatrix t = CMatrix::Zero(n * r, n * c);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j)
      if (static_cast<size_t>(i - j) < f.coeffs.size()) t.block(i * r, j * c, r, c) = f.coeffs[static_cast<size_t>(i - j)];
  return t;
}

// ---------------------------------------------------------------------------
// Arcs
// ---------------------------------------------------------------------------

inline double segment_radius(const Contraction& a, const Contraction& b, const Tolerances& tol) {
  return circle_radius(a.matrix(), b.matrix(), tol);
}

struct Arc {
  SchurPoly f;
  cplx lambda;
  double grid_sup = 0.0;
  double sup_bound = 0.0;
};

struct ArcCertificate {
  std::vector<Arc> arcs;
  double bound = 0.0;  ///< sum of atanh |lambda_j|
  double endpoint_residual = 0.0;
  bool schur_class = true;  ///< every arc passes the grid test
};

enum class ArcStatus { Connected, NotConnected, BudgetExhausted };

inline const char* to_string(ArcStatus s) {
  switch (s) {
    case ArcStatus::Connected:
      return "Connected";
    case ArcStatus::NotConnected:
      return "NotConnected";
    default:
      return "BudgetExhausted";
  }
}

struct ArcResult {
  ArcStatus status = ArcStatus::NotConnected;
  std::optional<ArcCertificate> certificate;
  std::string note;
};

constexpr double kHopFraction = 0.9;
constexpr int kHopBudget = 64;

namespace detail {

inline void finish_certificate(ArcCertificate& c, const CMatrix& from, const CMatrix& to, const Tolerances& tol) {
  c.bound = 0.0;
  c.endpoint_residual = 0.0;
  c.schur_class = true;
  CMatrix cur = from;
  for (auto& a : c.arcs) {
    c.endpoint_residual = std::max(c.endpoint_residual, op_norm(CMatrix(a.f.eval(0.0) - cur)));
    cur = a.f.eval(a.lambda);
    c.bound += std::atanh(std::abs(a.lambda));
    a.grid_sup = grid_max_norm(a.f, tol.grid_points);
    a.sup_bound = schur_sup_norm(a.f, tol).bound;
    if (a.grid_sup > 1.0 + tol.contraction_slack) c.schur_class = false;
  }
  c.endpoint_residual = std::max(c.endpoint_residual, op_norm(CMatrix(cur - to)));
}

/// circle_radius refined to ~1e-12 relative accuracy.
inline double refined_radius(const CMatrix& a, const CMatrix& b, const Tolerances& tol) {
  double lo = circle_radius(a, b, tol);
  if (!std::isfinite(lo) || lo == 0.0) return lo;
  double hi = lo + 2e-6 * std::max(1.0, lo);
  const CMatrix m = b - a;
  while (hi - lo > 1e-12 * lo) {
    double mid = 0.5 * (lo + hi);
    if (circle_ok(a, m, mid, tol.grid_points, kCircleSlack))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace detail

/// Greedy chain of affine arcs F_j(lambda) = C_j + lambda s_j (t' - t) along
/// the segment, with s_j the verified circle radius at C_j and
/// |lambda_j| <= kHopFraction.
inline ArcResult connect_arc(const Contraction& t, const Contraction& tp, const Tolerances& tol) {
  require_same_shape(t.matrix(), tp.matrix());
  ArcResult r;
  if (!shmulyan_equivalent(t, tp, tol).equivalent) {
    r.status = ArcStatus::NotConnected;
    r.note = "operators are not Shmul'yan equivalent";
    return r;
  }
  const CMatrix m = tp.matrix() - t.matrix();
  ArcCertificate cert;
  if (op_norm(m) == 0.0) {
    detail::finish_certificate(cert, t.matrix(), tp.matrix(), tol);
    r.status = ArcStatus::Connected;
    r.certificate = cert;
    return r;
  }
  double alpha = 0.0;
  for (int hop = 0; hop < kHopBudget && alpha < 1.0; ++hop) {
    CMatrix c = t.matrix() + alpha * m;
    double s = detail::refined_radius(c, CMatrix(c + m), tol);
    if (!(s > 0.0)) break;
    double step = std::min(kHopFraction * s, 1.0 - alpha);
    Arc a;
    a.f.coeffs = {c, CMatrix(s * m)};
    a.lambda = step / s;
    cert.arcs.push_back(a);
    alpha = (step == 1.0 - alpha) ? 1.0 : alpha + step;
  }
  detail::finish_certificate(cert, t.matrix(), tp.matrix(), tol);
  if (alpha < 1.0) {
    r.status = ArcStatus::BudgetExhausted;
    r.note = "hop budget exhausted before reaching the target";
  } else {
    r.status = ArcStatus::Connected;
  }
  r.certificate = cert;
  return r;
}

class NotMember : public InputError {
 public:
  NotMember() : InputError("operator is not in the Shmul'yan part of the partial isometry") {}
};

/// Single arc F(lambda) = w + lambda E with E the Z block of t' scaled by
/// 1/sqrt(||Z||), evaluated at lambda_0 = sqrt(||Z||).
inline ArcCertificate partial_isometry_arc(const Contraction& w, const Contraction& tp, const Tolerances& tol) {
  require_same_shape(w.matrix(), tp.matrix());
  PartDescription part = partial_isometry_part(w, tol);
  Membership mem = part.membership_test(tp.matrix());
  if (!mem.member) throw NotMember();
  const double rho = mem.z_norm;
  ArcCertificate cert;
  Arc a;
  if (rho > 0.0) {
    a.f.coeffs = {w.matrix(), CMatrix(part.embed_z(mem.z) / std::sqrt(rho))};
    a.lambda = std::sqrt(rho);
  } else {
    a.f.coeffs = {w.matrix()};
    a.lambda = 0.0;
  }
  cert.arcs.push_back(a);
  detail::finish_certificate(cert, w.matrix(), tp.matrix(), tol);
  return cert;
}

struct KobayashiBound {
  bool finite = false;
  double value = std::numeric_limits<double>::infinity();
  std::string method;
};

/// Upper bound on the Kobayashi pseudo-distance; infinite exactly when the
/// operators are not Shmul'yan equivalent.
inline KobayashiBound kobayashi_upper_bound(const Contraction& t, const Contraction& tp, const Tolerances& tol) {
  KobayashiBound kb;
  ArcResult ar = connect_arc(t, tp, tol);
  if (ar.status == ArcStatus::NotConnected) {
    kb.method = "not equivalent";
    return kb;
  }
  if (ar.status == ArcStatus::Connected) {
    kb.finite = true;
    kb.value = ar.certificate->bound;
    kb.method = "segment chain";
  }
  // A chain from t' to t run backwards (each arc composed with the disc
  // automorphism swapping 0 and lambda_j) joins t to t' with the same length.
  ArcResult back = connect_arc(tp, t, tol);
  if (back.status == ArcStatus::Connected && back.certificate->bound < kb.value) {
    kb.finite = true;
    kb.value = back.certificate->bound;
    kb.method = "reversed segment chain";
  }
  auto try_part = [&](const Contraction& w, const Contraction& other) {
    if (!classify(w, tol).partial_isometry) return;
    if (!partial_isometry_part(w, tol).membership_test(other.matrix()).member) return;
    ArcCertificate c = partial_isometry_arc(w, other, tol);
    if (c.endpoint_residual <= 1e-8 && c.bound < kb.value) {
      kb.finite = true;
      kb.value = c.bound;
      kb.method = "partial isometry arc";
    }
  };
  try_part(t, tp);
  try_part(tp, t);
  if (!kb.finite) kb.method = "equivalent, no chain within budget";
  return kb;
}

// ---------------------------------------------------------------------------
// Delta-infinity membership for a partial isometry
// ---------------------------------------------------------------------------

struct DeltaInftyResult {
  bool member = false;
  SchurPoly f0;          ///< N(w) -> N(w*) blocks of F - w
  double residual = 0.0;  ///< size of F - w outside the defect corner
  SupNorm f0_sup;
  bool marginal = false;
};

inline DeltaInftyResult delta_infty_member(const Contraction& w, const SchurPoly& f, const Tolerances& tol) {
  f.validate();
  require_same_shape(w.matrix(), f.coeffs.front());
  PartDescription part = partial_isometry_part(w, tol);
  const CMatrix& ni = part.kernel.basis;
  const CMatrix& no = part.cokernel.basis;
  const CMatrix pin = part.kernel.projector(), pout = part.cokernel.projector();
  DeltaInftyResult r;
  for (size_t k = 0; k < f.coeffs.size(); ++k) {
    CMatrix g = f.coeffs[k];
    if (k == 0) g -= w.matrix();
    r.residual = std::max(r.residual, op_norm(CMatrix(g - pout * g * pin)));
    r.f0.coeffs.push_back(no.adjoint() * g * ni);
  }
  r.f0_sup = schur_sup_norm(r.f0, tol);
  const double thr = 1e-8;
  r.member = r.residual <= thr && r.f0_sup.bound < 1.0;
  r.marginal = near_threshold(r.residual, thr) || std::abs(r.f0_sup.bound - 1.0) <= 1e-6 ||
               std::abs(r.f0_sup.value - 1.0) <= 1e-6;
  return r;
}

}  // namespace clab
