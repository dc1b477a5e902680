#pragma once

/// @file numkit.hpp
/// @brief Dense complex linear algebra helpers: tolerances, subspaces,
/// PSD square roots, pseudoinverses and Douglas factorizations.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace clab {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: shapes, malformed data, violated preconditions.
class InputError : public Error {
 public:
  using Error::Error;
};

/// An iteration or certification step could not complete.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class NotHermitian : public InputError {
 public:
  explicit NotHermitian(double residual)
      : InputError("matrix is not Hermitian (residual " + std::to_string(residual) + ")"),
        residual(residual) {}
  double residual;
};

class NotPSD : public InputError {
 public:
  explicit NotPSD(double min_eig)
      : InputError("matrix is not positive semidefinite (min eigenvalue " +
                   std::to_string(min_eig) + ")"),
        min_eigenvalue(min_eig) {}
  double min_eigenvalue;
};

class ShapeMismatch : public InputError {
 public:
  using InputError::InputError;
};

class InvalidTolerances : public InputError {
 public:
  using InputError::InputError;
};

class NoConvergence : public NumericalFailure {
 public:
  NoConvergence(const std::string& what, double residual)
      : NumericalFailure(what + " (residual " + std::to_string(residual) + ")"),
        residual(residual) {}
  double residual;
};

// ---------------------------------------------------------------------------
// Tolerances
// ---------------------------------------------------------------------------

struct Tolerances {
  double rank_rtol = 1e-9;
  double psd_atol = 1e-10;
  double conv_tol = 1e-10;
  double contraction_slack = 1e-10;
  double big_ratio = 1e12;
  int max_level = 64;
  int grid_points = 1024;

  void validate() const {
    auto small = [](double v) { return v > 0.0 && v <= 1e-4; };
    if (!small(rank_rtol) || !small(psd_atol) || !small(conv_tol) || !small(contraction_slack))
      throw InvalidTolerances("rank_rtol, psd_atol, conv_tol, contraction_slack must lie in (0, 1e-4]");
    if (!(big_ratio > 0.0)) throw InvalidTolerances("big_ratio must be positive");
    if (max_level < 2) throw InvalidTolerances("max_level must be at least 2");
    if (grid_points < 16) throw InvalidTolerances("grid_points must be at least 16");
  }
};

// ---------------------------------------------------------------------------
// Basic helpers
// ---------------------------------------------------------------------------

inline CMatrix identity(Index n) { return CMatrix::Identity(n, n); }

inline bool all_finite(const CMatrix& m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

/// Largest singular value (0 for empty matrices).
inline double op_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

inline double fro_norm(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.norm(); }

inline CMatrix hermitian_part(const CMatrix& m) { return (m + m.adjoint()) / 2.0; }

inline void require_square(const CMatrix& m, const char* what) {
  if (m.rows() != m.cols()) throw ShapeMismatch(std::string(what) + " must be square");
}

inline void require_same_shape(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeMismatch("operands have different shapes (" + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()) + ")");
}

/// Throws NotHermitian when ||m - m*|| exceeds psd_atol * max(1, ||m||).
inline void require_hermitian(const CMatrix& m, const Tolerances& tol) {
  require_square(m, "Hermitian operand");
  double r = op_norm(m - m.adjoint());
  if (r > tol.psd_atol * std::max(1.0, op_norm(m))) throw NotHermitian(r);
}

/// Eigen-decomposition of the Hermitian part of m (ascending eigenvalues).
inline Eigen::SelfAdjointEigenSolver<CMatrix> hermitian_eig(const CMatrix& m) {
  return Eigen::SelfAdjointEigenSolver<CMatrix>(hermitian_part(m));
}

inline double lambda_min(const CMatrix& h) {
  if (h.size() == 0) return 0.0;
  return hermitian_eig(h).eigenvalues()(0);
}

inline double lambda_max(const CMatrix& h) {
  if (h.size() == 0) return 0.0;
  auto es = hermitian_eig(h);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

// ---------------------------------------------------------------------------
// PSD square root, order, pseudoinverse
// ---------------------------------------------------------------------------

/// Hermitian PSD square root. Eigenvalues in [-psd_atol, 0] are clamped to
/// zero, and so are positive eigenvalues below psd_atol * max(1, lambda_max):
/// at that level they are round-off from 1 - sigma^2 with sigma ~ 1.
inline CMatrix psd_sqrt(const CMatrix& m, const Tolerances& tol) {
  require_hermitian(m, tol);
  if (m.size() == 0) return m;
  auto es = hermitian_eig(m);
  const RVector& ev = es.eigenvalues();
  if (ev(0) < -tol.psd_atol) throw NotPSD(ev(0));
  double floor = tol.psd_atol * std::max(1.0, ev(ev.size() - 1));
  RVector s(ev.size());
  for (Index i = 0; i < ev.size(); ++i) s(i) = ev(i) <= floor ? 0.0 : std::sqrt(ev(i));
  CMatrix r = es.eigenvectors() * s.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  return hermitian_part(r);
}

/// a <= b in the Loewner order, up to psd_atol.
inline bool psd_order_leq(const CMatrix& a, const CMatrix& b, const Tolerances& tol) {
  require_same_shape(a, b);
  require_hermitian(a, tol);
  require_hermitian(b, tol);
  return lambda_min(b - a) >= -tol.psd_atol;
}

/// Singular-value cutoff used for every rank decision: rank_rtol times the
/// larger of sigma_max and an optional reference scale. Defect operators use
/// reference scale 1 so that a uniformly tiny defect still counts as zero.
inline double rank_cutoff(double sigma_max, const Tolerances& tol, double ref_scale = 0.0) {
  return tol.rank_rtol * std::max(sigma_max, ref_scale);
}

/// Moore-Penrose pseudoinverse at the rank cutoff.
inline CMatrix pinv(const CMatrix& m, const Tolerances& tol, double ref_scale = 0.0) {
  if (m.size() == 0) return CMatrix::Zero(m.cols(), m.rows());
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVector& sv = svd.singularValues();
  double cut = rank_cutoff(sv(0), tol, ref_scale);
  RVector inv(sv.size());
  for (Index i = 0; i < sv.size(); ++i) inv(i) = (sv(i) > cut && sv(i) > 0.0) ? 1.0 / sv(i) : 0.0;
  return svd.matrixV() * inv.cast<cplx>().asDiagonal() * svd.matrixU().adjoint();
}

inline Index numerical_rank(const CMatrix& m, const Tolerances& tol, double ref_scale = 0.0) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  const RVector& sv = svd.singularValues();
  double cut = rank_cutoff(sv(0), tol, ref_scale);
  Index r = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cut && sv(i) > 0.0) ++r;
  return r;
}

// ---------------------------------------------------------------------------
// Subspaces
// ---------------------------------------------------------------------------

/// Closed subspace of C^n stored as an orthonormal column basis.
struct Subspace {
  CMatrix basis;

  Subspace() = default;
  explicit Subspace(CMatrix b) : basis(std::move(b)) {}

  static Subspace zero(Index n) { return Subspace(CMatrix(n, 0)); }
  static Subspace full(Index n) { return Subspace(identity(n)); }

  Index ambient_dim() const { return basis.rows(); }
  Index dim() const { return basis.cols(); }
  bool is_zero() const { return dim() == 0; }
  bool is_full() const { return dim() == ambient_dim(); }
  CMatrix projector() const { return basis * basis.adjoint(); }

  /// Largest deviation of basis*basis from the identity.
  double orthonormality_residual() const {
    if (dim() == 0) return 0.0;
    return op_norm(basis.adjoint() * basis - identity(dim()));
  }
};

/// Orthonormal basis of the right null space, by SVD at an absolute cutoff.
inline Subspace kernel_abs(const CMatrix& m, double cutoff) {
  const Index n = m.cols();
  if (n == 0) return Subspace::zero(0);
  if (m.rows() == 0) return Subspace::full(n);
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullV);
  const RVector& sv = svd.singularValues();
  Index r = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff && sv(i) > 0.0) ++r;
  return Subspace(svd.matrixV().rightCols(n - r));
}

/// Orthonormal basis of the column space, by SVD at an absolute cutoff.
inline Subspace range_abs(const CMatrix& m, double cutoff) {
  const Index n = m.rows();
  if (m.cols() == 0 || n == 0) return Subspace::zero(n);
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU);
  const RVector& sv = svd.singularValues();
  Index r = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff && sv(i) > 0.0) ++r;
  return Subspace(svd.matrixU().leftCols(r));
}

inline double sigma_max(const CMatrix& m) { return op_norm(m); }

/// Numerical kernel at cutoff rank_rtol * max(sigma_max, ref_scale).
inline Subspace kernel_of(const CMatrix& m, const Tolerances& tol, double ref_scale = 0.0) {
  return kernel_abs(m, rank_cutoff(sigma_max(m), tol, ref_scale));
}

/// Numerical range at cutoff rank_rtol * max(sigma_max, ref_scale).
inline Subspace range_of(const CMatrix& m, const Tolerances& tol, double ref_scale = 0.0) {
  return range_abs(m, rank_cutoff(sigma_max(m), tol, ref_scale));
}

/// Orthogonal complement within the ambient space.
inline Subspace complement(const Subspace& s) {
  const Index n = s.ambient_dim();
  if (s.dim() == 0) return Subspace::full(n);
  if (s.dim() == n) return Subspace::zero(n);
  Eigen::JacobiSVD<CMatrix> svd(s.basis, Eigen::ComputeFullU);
  return Subspace(svd.matrixU().rightCols(n - s.dim()));
}

/// Span of the columns of m (numerical range at the given reference scale).
inline Subspace span_of(const CMatrix& m, const Tolerances& tol, double ref_scale = 0.0) {
  return range_of(m, tol, ref_scale);
}

/// Sine of the largest principal angle between b and its projection on a,
/// i.e. how far b sticks out of a (0 when b is contained in a).
inline double containment_gap(const Subspace& a, const Subspace& b) {
  if (b.dim() == 0) return 0.0;
  if (a.dim() == 0) return 1.0;
  return op_norm(b.basis - a.basis * (a.basis.adjoint() * b.basis));
}

/// Principal angles (radians, ascending) between two subspaces of equal ambient dimension.
inline std::vector<double> principal_angles(const Subspace& a, const Subspace& b) {
  std::vector<double> out;
  if (a.dim() == 0 || b.dim() == 0) return out;
  Eigen::JacobiSVD<CMatrix> svd(a.basis.adjoint() * b.basis);
  const RVector& sv = svd.singularValues();
  for (Index i = 0; i < sv.size(); ++i) out.push_back(std::acos(std::clamp(sv(i), -1.0, 1.0)));
  return out;
}

constexpr double kSubspaceAngleTol = 1e-7;

inline bool subspace_contains(const Subspace& a, const Subspace& b, double angle_tol = kSubspaceAngleTol) {
  return containment_gap(a, b) <= angle_tol;
}

/// Equal dimensions and largest principal angle within angle_tol.
inline bool subspace_equal(const Subspace& a, const Subspace& b, double angle_tol = kSubspaceAngleTol) {
  if (a.ambient_dim() != b.ambient_dim() || a.dim() != b.dim()) return false;
  return containment_gap(a, b) <= angle_tol && containment_gap(b, a) <= angle_tol;
}

/// Numerical intersection: vectors whose distance to both subspaces is within angle_tol.
inline Subspace intersection(const Subspace& a, const Subspace& b, double angle_tol = kSubspaceAngleTol) {
  const Index n = a.ambient_dim();
  if (a.dim() == 0 || b.dim() == 0) return Subspace::zero(n);
  CMatrix stacked(2 * n, n);
  stacked.topRows(n) = identity(n) - a.projector();
  stacked.bottomRows(n) = identity(n) - b.projector();
  return kernel_abs(stacked, angle_tol);
}

/// ||(I - P_s) m P_s||: how far m is from leaving s invariant.
inline double invariance_residual(const CMatrix& m, const Subspace& s) {
  if (s.dim() == 0) return 0.0;
  CMatrix img = m * s.basis;
  return op_norm(img - s.basis * (s.basis.adjoint() * img));
}

// ---------------------------------------------------------------------------
// Douglas factorization
// ---------------------------------------------------------------------------

enum class Side { left, right };

struct DouglasResult {
  bool feasible = false;
  CMatrix x;             ///< minimal-norm solution (also filled when infeasible)
  double residual = 0.0; ///< ||lhs - composition||
  double threshold = 0.0;
  bool marginal = false; ///< residual within a decade of threshold
  std::optional<CVector> witness;
};

/// Solves lhs = X * factor (right) or lhs = factor * X (left) in the
/// minimal-norm sense. Feasible iff the residual is at most
/// 10 * rank_rtol * scale, where scale defaults to ||lhs||. An infeasible
/// result carries a witness: a kernel vector of factor (right) or of factor*
/// (left) on which lhs (resp. lhs*) is largest.
inline DouglasResult douglas_solve(const CMatrix& lhs, const CMatrix& factor, Side side,
                                   const Tolerances& tol, double scale = -1.0,
                                   double factor_ref_scale = 0.0) {
  DouglasResult out;
  if (side == Side::right) {
    if (lhs.cols() != factor.cols())
      throw ShapeMismatch("douglas_solve(right): lhs and factor need the same column count");
    out.x = lhs * pinv(factor, tol, factor_ref_scale);
    out.residual = op_norm(lhs - out.x * factor);
  } else {
    if (lhs.rows() != factor.rows())
      throw ShapeMismatch("douglas_solve(left): lhs and factor need the same row count");
    out.x = pinv(factor, tol, factor_ref_scale) * lhs;
    out.residual = op_norm(lhs - factor * out.x);
  }
  if (scale < 0.0) scale = op_norm(lhs);
  out.threshold = 10.0 * tol.rank_rtol * scale;
  out.feasible = out.residual <= out.threshold;
  out.marginal = out.residual > out.threshold / 10.0 && out.residual <= out.threshold * 10.0 &&
                 out.threshold > 0.0;
  if (!out.feasible) {
    const CMatrix& f = side == Side::right ? factor : CMatrix(factor.adjoint());
    const CMatrix l = side == Side::right ? lhs : CMatrix(lhs.adjoint());
    Subspace ker = kernel_of(f, tol, factor_ref_scale);
    if (ker.dim() > 0) {
      CMatrix img = l * ker.basis;
      Eigen::JacobiSVD<CMatrix> svd(img, Eigen::ComputeFullV);
      out.witness = ker.basis * svd.matrixV().col(0);
    }
  }
  return out;
}

}  // namespace clab
