#pragma once

/// @file harnack.hpp
/// @brief Harnack domination: dilation Gram kernels, level constants, the
/// limit certificate, a positive-real polynomial falsifier, intertwining data
/// (B0, Z, W) and the commuting-pair equivalence pipeline.
///
/// Convention: harnack_dominates(t, tp) asks whether t is Harnack dominated
/// by tp, i.e. Re p(t) <= c^2 Re p(tp) for every polynomial p with Re p >= 0
/// on the disc. The reported constant is c^2.

#include "contraction_lab/shmulyan.hpp"

#include <functional>
#include <random>

namespace clab {

// ---------------------------------------------------------------------------
// Gram kernels
// ---------------------------------------------------------------------------

struct HarnackKernel {
  int level = 0;
  CMatrix base;  ///< (N+1)d square, block (m, n) = T^{n-m} for n >= m, (T^{m-n})* otherwise
};

inline HarnackKernel harnack_kernel(const CMatrix& t, int level) {
  require_square(t, "harnack_kernel operand");
  if (level < 0) throw InputError("harnack_kernel level must be nonnegative");
  const Index d = t.rows();
  const Index n = static_cast<Index>(level) + 1;
  std::vector<CMatrix> pw(static_cast<size_t>(n));
  pw[0] = identity(d);
  for (Index k = 1; k < n; ++k) pw[static_cast<size_t>(k)] = pw[static_cast<size_t>(k - 1)] * t;
  HarnackKernel g;
  g.level = level;
  g.base.resize(n * d, n * d);
  for (Index m = 0; m < n; ++m)
    for (Index c = 0; c < n; ++c) {
      if (c >= m)
        g.base.block(m * d, c * d, d, d) = pw[static_cast<size_t>(c - m)];
      else
        g.base.block(m * d, c * d, d, d) = pw[static_cast<size_t>(m - c)].adjoint();
    }
  return g;
}

inline HarnackKernel harnack_kernel(const Contraction& t, int level) { return harnack_kernel(t.matrix(), level); }

inline double kernel_min_eigenvalue(const HarnackKernel& g) { return lambda_min(g.base); }

/// Level-N constant by whitening G_{T'} with its pseudo-inverse square root.
/// Also reports the largest Rayleigh ratio found on the numerical kernel of
/// G_{T'} (the escape ratio) together with its vector.
struct DenseLevel {
  double constant = 1.0;
  double escape_ratio = 0.0;
  double escape_mass = 0.0;  ///< <G_T x, x> for the escape vector (unit x)
  CVector escape_vector;
};

inline DenseLevel harnack_level_dense(const CMatrix& t, const CMatrix& tp, int level, const Tolerances& tol) {
  CMatrix g = harnack_kernel(t, level).base;
  CMatrix gp = harnack_kernel(tp, level).base;
  auto es = hermitian_eig(gp);
  const RVector& ev = es.eigenvalues();
  const double cut = tol.rank_rtol * std::max(1.0, ev(ev.size() - 1));
  std::vector<Index> keep, drop;
  for (Index i = 0; i < ev.size(); ++i) (ev(i) > cut ? keep : drop).push_back(i);
  DenseLevel out;
  if (!keep.empty()) {
    CMatrix w(gp.rows(), static_cast<Index>(keep.size()));
    for (size_t k = 0; k < keep.size(); ++k)
      w.col(static_cast<Index>(k)) = es.eigenvectors().col(keep[k]) / std::sqrt(ev(keep[k]));
    out.constant = lambda_max(CMatrix(w.adjoint() * g * w));
  }
  if (!drop.empty()) {
    CMatrix k(gp.rows(), static_cast<Index>(drop.size()));
    for (size_t j = 0; j < drop.size(); ++j) k.col(static_cast<Index>(j)) = es.eigenvectors().col(drop[j]);
    Eigen::SelfAdjointEigenSolver<CMatrix> ek(hermitian_part(k.adjoint() * g * k));
    CVector x = k * ek.eigenvectors().col(ek.eigenvalues().size() - 1);
    double num = std::real(x.dot(g * x));
    double den = std::max(std::real(x.dot(gp * x)), 1e-300);
    out.escape_vector = x;
    out.escape_mass = num;
    out.escape_ratio = num / den;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Structured level operator
// ---------------------------------------------------------------------------

namespace detail {

/// When 0 is not escaped at level 1, the level-N constant equals ||K_N||^2
/// for the operator below. Inputs are y_0 in C^d and y_1..y_N in the
/// coordinates of the defect space of T'; outputs live in C^{(N+1)d}.
/// With a_k = D_{T'}^+ y_k and e_N = 0, e_{j-1} = T e_j + (T - T') a_j:
///   z_0 = y_0 + e_0,   z_j = D_T (a_j + e_j).
/// Level N embeds in level N+1 by y_{N+1} = 0, which makes the constants
/// nondecreasing.
struct LevelOperator {
  CMatrix t, ts, delta, delta_s, d;
  CMatrix p;    ///< d x r'
  CMatrix p_s;  ///< r' x d
  Index dim = 0, rp = 0;
  int level = 1;

  Index in_dim() const { return dim + level * rp; }

  void apply(const CVector& y, CVector& z) const {
    z.resize((level + 1) * dim);
    CVector e = CVector::Zero(dim);
    for (int j = level; j >= 1; --j) {
      CVector a = p * y.segment(dim + (j - 1) * rp, rp);
      z.segment(j * dim, dim) = d * (a + e);
      e = t * e + delta * a;
    }
    z.head(dim) = y.head(dim) + e;
  }

  void apply_adjoint(const CVector& z, CVector& y) const {
    y.resize(in_dim());
    y.head(dim) = z.head(dim);
    CVector f = z.head(dim);
    for (int k = 1; k <= level; ++k) {
      CVector dz = d * z.segment(k * dim, dim);
      y.segment(dim + (k - 1) * rp, rp) = p_s * (dz + delta_s * f);
      f = ts * f + dz;
    }
  }
};

struct RitzPair {
  double value = 0.0;
  CVector vector;
  int iterations = 0;
};

/// Largest eigenvalue of the symmetric tridiagonal matrix (alpha, beta) by
/// Sturm-count bisection; beta may hold one extra trailing entry.
inline double tridiag_top_value(const std::vector<double>& alpha, const std::vector<double>& beta) {
  const size_t m = alpha.size();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (size_t i = 0; i < m; ++i) {
    double r = (i > 0 ? std::abs(beta[i - 1]) : 0.0) + (i + 1 < m ? std::abs(beta[i]) : 0.0);
    lo = std::min(lo, alpha[i] - r);
    hi = std::max(hi, alpha[i] + r);
  }
  // Number of eigenvalues strictly greater than x.
  auto above = [&](double x) {
    size_t count = 0;
    double d = 1.0;
    for (size_t i = 0; i < m; ++i) {
      double b2 = i > 0 ? beta[i - 1] * beta[i - 1] : 0.0;
      d = alpha[i] - x - (i > 0 ? b2 / d : 0.0);
      if (d == 0.0) d = -1e-300;
      if (d > 0.0) ++count;
    }
    return count;
  };
  for (int it = 0; it < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * std::max(std::abs(hi), 1.0);
       ++it) {
    double mid = 0.5 * (lo + hi);
    if (above(mid) > 0)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

/// Unit eigenvector for an accurate eigenvalue estimate theta, by two steps
/// of inverse iteration with a tridiagonal LU solve.
inline Eigen::VectorXd tridiag_vector(const std::vector<double>& alpha, const std::vector<double>& beta,
                                      double theta) {
  const Index m = static_cast<Index>(alpha.size());
  const double shift = theta + 1e-13 * std::max(std::abs(theta), 1.0);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(m);
  if (m == 1) return x;
  // Tridiagonal LU with partial pivoting: U has two superdiagonals.
  Eigen::VectorXd dl(m), d(m), du(m), du2 = Eigen::VectorXd::Zero(m);
  std::vector<bool> swapped(static_cast<size_t>(m), false);
  for (Index i = 0; i < m; ++i) {
    d(i) = alpha[static_cast<size_t>(i)] - shift;
    if (i + 1 < m) dl(i) = du(i) = beta[static_cast<size_t>(i)];
  }
  for (Index i = 0; i + 1 < m; ++i) {
    if (std::abs(d(i)) >= std::abs(dl(i))) {
      if (d(i) == 0.0) d(i) = 1e-300;
      double f = dl(i) / d(i);
      dl(i) = f;
      d(i + 1) -= f * du(i);
    } else {
      double f = d(i) / dl(i);
      d(i) = dl(i);
      dl(i) = f;
      double tmp = du(i);
      du(i) = d(i + 1);
      d(i + 1) = tmp - f * d(i + 1);
      if (i + 2 < m) {
        du2(i) = du(i + 1);
        du(i + 1) = -f * du(i + 1);
      }
      swapped[static_cast<size_t>(i)] = true;
    }
  }
  if (d(m - 1) == 0.0) d(m - 1) = 1e-300;
  for (int it = 0; it < 2; ++it) {
    for (Index i = 0; i + 1 < m; ++i) {
      if (swapped[static_cast<size_t>(i)]) {
        double tmp = x(i);
        x(i) = x(i + 1);
        x(i + 1) = tmp - dl(i) * x(i + 1);
      } else {
        x(i + 1) -= dl(i) * x(i);
      }
    }
    x(m - 1) /= d(m - 1);
    x(m - 2) = (x(m - 2) - du(m - 2) * x(m - 1)) / d(m - 2);
    for (Index i = m - 3; i >= 0; --i) x(i) = (x(i) - du(i) * x(i + 1) - du2(i) * x(i + 2)) / d(i);
    x.normalize();
  }
  return x;
}

/// Largest eigenvalue of K*K by Lanczos with full reorthogonalization. Stops
/// on a small residual or once the top Ritz value stalls for 3 steps.
inline RitzPair lanczos_top(const LevelOperator& op, const CVector& start, int max_iter = 120,
                            double rel_tol = 1e-8) {
  const Index n = op.in_dim();
  const int kmax = static_cast<int>(std::min<Index>(n, max_iter));
  CMatrix v(n, kmax);
  std::vector<double> alpha, beta;
  CVector q = start / start.norm();
  CVector z, w;
  RitzPair best;
  double last = 0.0;
  int stall = 0, k = 0;
  for (; k < kmax; ++k) {
    v.col(k) = q;
    op.apply(q, z);
    op.apply_adjoint(z, w);
    alpha.push_back(std::real(q.dot(w)));
    // Gram-Schmidt against all previous vectors; repeat only on heavy cancellation.
    double before = w.norm();
    w -= v.leftCols(k + 1) * (v.leftCols(k + 1).adjoint() * w);
    double b = w.norm();
    if (b < 0.7 * before) {
      w -= v.leftCols(k + 1) * (v.leftCols(k + 1).adjoint() * w);
      b = w.norm();
    }
    const double theta = tridiag_top_value(alpha, beta);
    stall = (k > 0 && theta - last <= 1e-12 * theta) ? stall + 1 : 0;
    last = theta;
    bool done = b <= 1e-14 * std::max(theta, 1.0) || stall >= 3;
    if (!done && k % 4 == 3) {
      Eigen::VectorXd s = tridiag_vector(alpha, beta, theta);
      if (b * std::abs(s(k)) <= rel_tol * std::max(theta, 1.0)) done = true;
    }
    if (done) break;
    beta.push_back(b);
    q = w / b;
  }
  const int m = static_cast<int>(alpha.size());
  best.value = tridiag_top_value(alpha, beta);
  best.iterations = m;
  best.vector = v.leftCols(m) * tridiag_vector(alpha, beta, best.value).cast<cplx>();
  best.vector.normalize();
  return best;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Limit certificate
// ---------------------------------------------------------------------------

/// Supremum over all levels of the level constants, computed from the
/// transfer function sigma(z) = D_T (I - zT)^{-1} (I - zT') D_{T'}^+ on the
/// unit circle after removing the reducing unitary part of T' (which T must
/// share). sup_N c_N^2 = max(1, sup |sigma|^2) when both remaining parts have
/// spectral radius < 1; a unimodular eigenvalue left in T makes it infinite.
struct LimitCertificate {
  bool available = false;
  double value = std::numeric_limits<double>::infinity();
  double argmax_theta = 0.0;
  std::string note;
};

namespace detail {

inline double spectral_radius(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::ComplexEigenSolver<CMatrix> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

struct TransferFunction {
  CMatrix t, tp, d, dp_pinv;
  double norm2(double theta) const {
    const Index n = t.rows();
    cplx z = std::polar(1.0, theta);
    CMatrix lhs = identity(n) - z * t;
    CMatrix rhs = (identity(n) - z * tp) * dp_pinv;
    CMatrix s = d * lhs.partialPivLu().solve(rhs);
    double nm = op_norm(s);
    return nm * nm;
  }
};

inline double golden_max(const std::function<double(double)>& f, double a, double b, double& arg, int iters = 60) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    }
  }
  if (f1 >= f2) {
    arg = x1;
    return f1;
  }
  arg = x2;
  return f2;
}

/// Max of a periodic function on [0, 2pi): grid, then golden-section search
/// around the best few local maxima.
inline double circle_max(const std::function<double(double)>& f, int grid, double& arg) {
  const double h = 2.0 * M_PI / grid;
  std::vector<double> vals(static_cast<size_t>(grid));
  for (int j = 0; j < grid; ++j) vals[static_cast<size_t>(j)] = f(j * h);
  std::vector<int> peaks;
  for (int j = 0; j < grid; ++j) {
    double l = vals[static_cast<size_t>((j + grid - 1) % grid)], r = vals[static_cast<size_t>((j + 1) % grid)];
    double c = vals[static_cast<size_t>(j)];
    if (c >= l && c >= r) peaks.push_back(j);
  }
  std::sort(peaks.begin(), peaks.end(),
            [&](int a, int b) { return vals[static_cast<size_t>(a)] > vals[static_cast<size_t>(b)]; });
  if (peaks.size() > 4) peaks.resize(4);
  double best = *std::max_element(vals.begin(), vals.end());
  arg = h * static_cast<double>(std::max_element(vals.begin(), vals.end()) - vals.begin());
  for (int j : peaks) {
    double a = 0.0;
    double v = golden_max(f, (j - 1) * h, (j + 1) * h, a);
    if (v > best) {
      best = v;
      arg = a;
    }
  }
  return best;
}

}  // namespace detail

inline LimitCertificate harnack_limit(const Contraction& t, const Contraction& tp, const Tolerances& tol) {
  LimitCertificate out;
  const CMatrix &a = t.matrix(), &b = tp.matrix();
  const Index d = a.rows();
  Subspace hu = reducing_unitary_part(tp, tol);
  if (hu.dim() > 0) {
    double inv = invariance_residual(a, hu) + invariance_residual(a.adjoint(), hu);
    double eq = op_norm(CMatrix((a - b) * hu.basis));
    if (inv > 1e-6 || eq > 1e-6) {
      out.note = "unitary part of the dominating operator is not shared";
      return out;
    }
  }
  Subspace hc = complement(hu);
  out.available = true;
  if (hc.dim() == 0) {
    out.value = 1.0;
    out.note = "both operators unitary and equal";
    return out;
  }
  CMatrix tc = hc.basis.adjoint() * a * hc.basis;
  CMatrix tpc = hc.basis.adjoint() * b * hc.basis;
  if (detail::spectral_radius(tc) >= 1.0 - 1e-9) {
    out.value = std::numeric_limits<double>::infinity();
    out.note = "unimodular eigenvalue outside the shared unitary part: constants grow without bound";
    return out;
  }
  if (detail::spectral_radius(tpc) >= 1.0 - 1e-9) {
    out.available = false;
    out.note = "dominating operator keeps a unimodular eigenvalue after splitting";
    return out;
  }
  detail::TransferFunction tf;
  tf.t = tc;
  tf.tp = tpc;
  tf.d = psd_sqrt(identity(hc.dim()) - tc.adjoint() * tc, tol);
  tf.dp_pinv = pinv(psd_sqrt(identity(hc.dim()) - tpc.adjoint() * tpc, tol), tol, 1.0);
  double arg = 0.0;
  double sup = detail::circle_max([&](double th) { return tf.norm2(th); }, tol.grid_points, arg);
  out.value = std::max(1.0, sup);
  out.argmax_theta = arg;
  (void)d;
  return out;
}

// ---------------------------------------------------------------------------
// Verdict
// ---------------------------------------------------------------------------

enum class HarnackStatus { Dominated, NotDominated, Inconclusive };

inline const char* to_string(HarnackStatus s) {
  switch (s) {
    case HarnackStatus::Dominated:
      return "Dominated";
    case HarnackStatus::NotDominated:
      return "NotDominated";
    default:
      return "Inconclusive";
  }
}

struct HarnackVerdict {
  HarnackStatus status = HarnackStatus::Inconclusive;
  std::vector<double> constants;  ///< c_N^2 for N = 1 .. levels_used
  int levels_used = 0;
  double constant = 0.0;          ///< sup over all levels when Dominated
  LimitCertificate limit;
  std::optional<CVector> witness;
  double witness_ratio = 0.0;
  bool plateau = false;           ///< last 4 relative increments below 1e-6
  bool nondecreasing = true;
  std::string note;
};

namespace detail {

inline bool plateau_reached(const std::vector<double>& c) {
  if (c.size() < 5) return false;
  for (size_t k = c.size() - 4; k < c.size(); ++k)
    if (c[k] - c[k - 1] >= 1e-6 * c[k - 1]) return false;
  return true;
}

inline CVector initial_vector(Index n) {
  CVector v(n);
  for (Index i = 0; i < n; ++i) v(i) = cplx(1.0 + 0.1 * static_cast<double>(i % 7), 0.05 * static_cast<double>(i % 3));
  return v;
}

}  // namespace detail

/// Is t Harnack dominated by tp?
///
/// Level 1 decides kernel escape exactly: a vector killed by G_{T'} but not
/// by G_T exists at some level iff one exists at level 1, iff
/// N(D_{T'}) is not inside N(D_T) or T != T' on N(D_{T'}). Otherwise the
/// level constants are ||K_N||^2 (see detail::LevelOperator), computed by
/// warm-started Lanczos, and their supremum is certified by harnack_limit.
inline HarnackVerdict harnack_dominates(const Contraction& t, const Contraction& tp, const Tolerances& tol) {
  require_square(t.matrix(), "harnack_dominates operand");
  require_same_shape(t.matrix(), tp.matrix());
  const CMatrix &a = tp.matrix(), &ta = t.matrix();
  const Index d = ta.rows();
  HarnackVerdict v;

  DenseLevel l1 = harnack_level_dense(ta, a, 1, tol);
  if (l1.escape_ratio > tol.big_ratio && l1.escape_mass > tol.rank_rtol * 2.0) {
    v.status = HarnackStatus::NotDominated;
    v.constants = {l1.constant};
    v.levels_used = 1;
    v.witness = l1.escape_vector;
    v.witness_ratio = l1.escape_ratio;
    v.note = "kernel vector of the dominating kernel escapes at level 1";
    return v;
  }

  const DefectData& dd = t.defect();
  const DefectData& dp = tp.defect();
  detail::LevelOperator op;
  op.t = ta;
  op.ts = ta.adjoint();
  op.delta = ta - a;
  op.delta_s = op.delta.adjoint();
  op.d = dd.d_t;
  op.dim = d;
  {
    auto es = hermitian_eig(dp.d_t);
    const RVector& ev = es.eigenvalues();
    const double cut = rank_cutoff(ev.size() ? ev(ev.size() - 1) : 0.0, tol, 1.0);
    std::vector<Index> keep;
    for (Index i = 0; i < ev.size(); ++i)
      if (ev(i) > cut) keep.push_back(i);
    op.rp = static_cast<Index>(keep.size());
    op.p.resize(d, op.rp);
    for (size_t k = 0; k < keep.size(); ++k)
      op.p.col(static_cast<Index>(k)) = es.eigenvectors().col(keep[k]) / ev(keep[k]);
    op.p_s = op.p.adjoint();
  }

  v.limit = harnack_limit(t, tp, tol);
  CVector start = detail::initial_vector(d + op.rp);
  double prev = 1.0;
  for (int n = 1; n <= tol.max_level; ++n) {
    op.level = n;
    if (n > 1) {
      CVector s = CVector::Zero(op.in_dim());
      s.head(start.size()) = start;
      start = s;
    }
    detail::RitzPair rp = detail::lanczos_top(op, start);
    double c = rp.value;
    if (c < prev) {
      if (c < prev * (1.0 - 1e-9)) v.nondecreasing = false;
      c = prev;
    }
    v.constants.push_back(c);
    prev = c;
    start = rp.vector;
    v.levels_used = n;
    if (v.limit.available && std::isfinite(v.limit.value) && c >= v.limit.value * (1.0 - 1e-12)) break;
  }
  v.plateau = detail::plateau_reached(v.constants);
  const double top = v.constants.back();
  if (v.limit.available && std::isfinite(v.limit.value)) {
    if (top <= v.limit.value * (1.0 + 1e-6) + 1e-9) {
      v.status = HarnackStatus::Dominated;
      v.constant = std::max(v.limit.value, top);
      v.note = "level constants bounded by the certified limit";
    } else {
      v.status = HarnackStatus::Inconclusive;
      v.note = "level constants exceed the computed limit";
    }
  } else if (v.plateau && !(v.limit.available && std::isinf(v.limit.value))) {
    v.status = HarnackStatus::Dominated;
    v.constant = top;
    v.note = "level constants reached a plateau";
  } else {
    v.status = HarnackStatus::Inconclusive;
    v.note = v.limit.note.empty() ? "no convergence by the level cap" : v.limit.note;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Positive-real polynomials and the falsifier
// ---------------------------------------------------------------------------

using Poly = std::vector<cplx>;

/// p(z) = w0 + 2 sum_{k>=1} w_k z^k where w_k are the Fourier coefficients of
/// |q|^2 on the circle, so Re p = |q|^2 there.
inline Poly positive_real_from(const Poly& q) {
  const size_t n = q.size();
  Poly p(n, cplx(0.0));
  for (size_t k = 0; k < n; ++k) {
    cplx w(0.0);
    for (size_t l = 0; l + k < n; ++l) w += q[l + k] * std::conj(q[l]);
    p[k] = k == 0 ? w : 2.0 * w;
  }
  return p;
}

inline Poly positive_real_sample(int degree, std::uint64_t seed) {
  if (degree < 0) throw InputError("degree must be nonnegative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Poly q(static_cast<size_t>(degree) + 1);
  for (auto& c : q) c = cplx(nd(rng), nd(rng));
  return positive_real_from(q);
}

inline cplx poly_eval(const Poly& p, cplx z) {
  cplx r(0.0);
  for (size_t k = p.size(); k-- > 0;) r = r * z + p[k];
  return r;
}

inline CMatrix poly_eval(const Poly& p, const CMatrix& t) {
  CMatrix r = CMatrix::Zero(t.rows(), t.cols());
  for (size_t k = p.size(); k-- > 0;) r = r * t + p[k] * identity(t.rows());
  return r;
}

struct Counterexample {
  Poly p;
  double lambda_min = 0.0;
};

/// Searches for p with lambda_min(c Re p(tp) - Re p(t)) < -psd_atol. Besides
/// random Fejer-Riesz samples it tries peaked probes q_j = conj(mu)^j for mu
/// on the unit circle at the arguments of the eigenvalues of t and tp.
inline std::optional<Counterexample> harnack_falsify(const Contraction& t, const Contraction& tp, double c,
                                                     const std::vector<int>& degrees, int trials,
                                                     std::uint64_t seed, const Tolerances& tol) {
  require_same_shape(t.matrix(), tp.matrix());
  require_square(t.matrix(), "harnack_falsify operand");
  if (degrees.empty()) throw InputError("harnack_falsify needs at least one degree");
  auto test = [&](const Poly& p) -> std::optional<Counterexample> {
    CMatrix rt = hermitian_part(poly_eval(p, t.matrix()));
    CMatrix rp = hermitian_part(poly_eval(p, tp.matrix()));
    double lm = lambda_min(CMatrix(c * rp - rt));
    if (lm < -tol.psd_atol * std::max(1.0, op_norm(rt))) return Counterexample{p, lm};
    return std::nullopt;
  };
  std::vector<cplx> peaks;
  for (const CMatrix* m : {&t.matrix(), &tp.matrix()}) {
    if (m->size() == 0) continue;
    Eigen::ComplexEigenSolver<CMatrix> es(*m, false);
    for (Index i = 0; i < es.eigenvalues().size(); ++i) {
      cplx e = es.eigenvalues()(i);
      peaks.push_back(std::abs(e) > 1e-12 ? e / std::abs(e) : cplx(1.0));
    }
  }
  peaks.push_back(cplx(1.0));
  peaks.push_back(cplx(-1.0));
  for (int deg : degrees) {
    for (cplx mu : peaks) {
      Poly q(static_cast<size_t>(deg) + 1);
      for (int j = 0; j <= deg; ++j) q[static_cast<size_t>(j)] = std::pow(std::conj(mu), j);
      if (auto ce = test(positive_real_from(q))) return ce;
      for (int j = 0; j <= deg; ++j) q[static_cast<size_t>(j)] *= (j % 2 == 0 ? 1.0 : -1.0);
      if (auto ce = test(positive_real_from(q))) return ce;
    }
  }
  for (int k = 0; k < trials; ++k) {
    int deg = degrees[static_cast<size_t>(k) % degrees.size()];
    if (auto ce = test(positive_real_sample(deg, seed + static_cast<std::uint64_t>(k)))) return ce;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Intertwining data
// ---------------------------------------------------------------------------

class NecessaryConditionFails : public Error {
 public:
  explicit NecessaryConditionFails(double r)
      : Error("T differs from T' on the kernel of D_{T'} (residual " + std::to_string(r) + ")"), residual(r) {}
  double residual;
};

class ZDiverges : public Error {
 public:
  explicit ZDiverges(double norm) : Error("the series for Z diverges (norm " + std::to_string(norm) + ")"), norm(norm) {}
  double norm;
};

enum class IntertwinerStatus { Ok, NecessaryConditionFails, ZDiverges };

struct IntertwinerData {
  IntertwinerStatus status = IntertwinerStatus::Ok;
  double necessary_residual = 0.0;
  CMatrix b0;  ///< T - T' = B0 D_{T'}
  double b0_residual = 0.0;
  CMatrix z_partial;  ///< partial sum of sum_n T^n B0 B0* T*^n
  long long z_terms = 0;
  bool z_converged = false;
  double z_commutator = 0.0;  ///< ||Z TT* - TT* Z||
  std::optional<CMatrix> w;   ///< B0 = D_{T*} W
  double w_residual = 0.0;    ///< ||T - T' - D_{T*} W D_{T'}||
};

/// Computes B0, Z and W without throwing; the status field carries failures.
inline IntertwinerData intertwiner_try(const Contraction& t, const Contraction& tp, const Tolerances& tol) {
  require_same_shape(t.matrix(), tp.matrix());
  require_square(t.matrix(), "intertwiner_data operand");
  const CMatrix &a = t.matrix(), &b = tp.matrix();
  const Index d = a.rows();
  IntertwinerData out;
  const DefectData& dp = tp.defect();
  const CMatrix delta = a - b;
  out.necessary_residual = dp.null_dt.dim() > 0 ? op_norm(CMatrix(delta * dp.null_dt.basis)) : 0.0;
  if (out.necessary_residual > 1e-8) {
    out.status = IntertwinerStatus::NecessaryConditionFails;
    return out;
  }
  DouglasResult br = douglas_solve(delta, dp.d_t, Side::right, tol, std::max(1.0, op_norm(delta)), 1.0);
  out.b0 = br.x;
  out.b0_residual = br.residual;

  // Z by doubling: Z_{2m} = Z_m + T^m Z_m T*^m.
  const CMatrix bb = out.b0 * out.b0.adjoint();
  const double base = std::max(op_norm(bb), 1e-300);
  CMatrix z = bb, p = a;
  long long m = 1;
  for (int k = 0; k < 60; ++k) {
    CMatrix inc = p * z * p.adjoint();
    double inc_n = op_norm(inc);
    z = hermitian_part(z + inc);
    p = p * p;
    m *= 2;
    double zn = op_norm(z);
    if (inc_n < tol.conv_tol * std::max(1.0, zn)) {
      out.z_converged = true;
      break;
    }
    if (zn > tol.big_ratio * base || (m >= (1LL << 24) && inc_n >= 0.25 * zn)) break;
  }
  if (op_norm(bb) == 0.0) out.z_converged = true;
  out.z_partial = z;
  out.z_terms = m;
  if (!out.z_converged) {
    out.status = IntertwinerStatus::ZDiverges;
    return out;
  }
  const CMatrix ttstar = a * a.adjoint();
  out.z_commutator = op_norm(CMatrix(z * ttstar - ttstar * z));
  if (out.z_commutator <= 1e-8 * std::max(1.0, op_norm(z))) {
    const DefectData& dd = t.defect();
    DouglasResult wr = douglas_solve(out.b0, dd.d_tstar, Side::left, tol, std::max(1.0, op_norm(out.b0)), 1.0);
    if (wr.feasible) {
      out.w = wr.x;
      out.w_residual = op_norm(CMatrix(delta - dd.d_tstar * wr.x * dp.d_t));
    }
  }
  (void)d;
  return out;
}

/// Throwing form: NecessaryConditionFails or ZDiverges.
inline IntertwinerData intertwiner_data(const Contraction& t, const Contraction& tp, const Tolerances& tol) {
  IntertwinerData r = intertwiner_try(t, tp, tol);
  if (r.status == IntertwinerStatus::NecessaryConditionFails) throw NecessaryConditionFails(r.necessary_residual);
  if (r.status == IntertwinerStatus::ZDiverges) throw ZDiverges(op_norm(r.z_partial));
  return r;
}

// ---------------------------------------------------------------------------
// Equivalence pipeline for commuting pairs
// ---------------------------------------------------------------------------

struct Te210Report {
  // Hypotheses.
  bool tstar_quasi_normal = false;  ///< T* commutes with TT*
  bool commutes = false;            ///< TT' = T'T
  bool commutes_defect = false;     ///< T commutes with T'*T'
  bool tp_commutes_ttstar = false;  ///< T' commutes with TT*
  bool hypotheses() const { return tstar_quasi_normal && commutes && commutes_defect && tp_commutes_ttstar; }
  // Statements.
  bool i = false;    ///< T Harnack dominated by T'
  bool ii = false;   ///< Harnack equivalent (recorded from theory: same as (iii))
  bool iii = false;  ///< Shmul'yan equivalent
  bool iv = false;   ///< arc exists (recorded from theory: same as (iii))
  bool v = false;    ///< bounded intertwiner B, i.e. Z converges
  bool w_found = false;
  double w_residual = 0.0;
  bool consistent = false;
  HarnackVerdict harnack;
  IntertwinerData intertwiner;
};

inline Te210Report te210_pipeline(const Contraction& t, const Contraction& tp, const Tolerances& tol) {
  require_same_shape(t.matrix(), tp.matrix());
  require_square(t.matrix(), "te210_pipeline operand");
  const CMatrix &a = t.matrix(), &b = tp.matrix();
  const CMatrix as = a.adjoint(), bs = b.adjoint();
  auto comm = [](const CMatrix& x, const CMatrix& y) { return fro_norm(CMatrix(x * y - y * x)); };
  const double thr = 1e-8;
  Te210Report r;
  r.tstar_quasi_normal = comm(as, CMatrix(a * as)) <= thr;
  r.commutes = comm(a, b) <= thr;
  r.commutes_defect = comm(a, CMatrix(bs * b)) <= thr;
  r.tp_commutes_ttstar = comm(b, CMatrix(a * as)) <= thr;
  r.harnack = harnack_dominates(t, tp, tol);
  r.i = r.harnack.status == HarnackStatus::Dominated;
  r.iii = shmulyan_equivalent(t, tp, tol).equivalent;
  r.ii = r.iii;
  r.iv = r.iii;
  r.intertwiner = intertwiner_try(t, tp, tol);
  r.v = r.intertwiner.status == IntertwinerStatus::Ok;
  r.w_found = r.intertwiner.w.has_value();
  r.w_residual = r.intertwiner.w_residual;
  r.consistent = !r.hypotheses() || (r.i == r.iii && r.iii == r.v && (!r.v || r.w_found));
  return r;
}

}  // namespace clab
