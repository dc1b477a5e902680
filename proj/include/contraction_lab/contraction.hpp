#pragma once

/// @file contraction.hpp
/// @brief Validated contractions, defect data, classification predicates and
/// the unitary/pure decomposition.

#include "contraction_lab/numkit.hpp"

#include <memory>
#include <mutex>

namespace clab {

class NotAContraction : public InputError {
 public:
  explicit NotAContraction(double norm)
      : InputError("operator norm " + std::to_string(norm) + " exceeds 1"), norm(norm) {}
  double norm;
};

class NotDecomposable : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

/// D_T and D_{T*} as operators on the ambient spaces, plus their range and
/// kernel bases. Restricted views are obtained by compressing with the bases.
struct DefectData {
  CMatrix d_t;
  CMatrix d_tstar;
  Subspace defect_space;
  Subspace defect_space_star;
  Subspace null_dt;
  Subspace null_dtstar;
};

inline DefectData defect_data(const CMatrix& t, const Tolerances& tol) {
  DefectData d;
  d.d_t = psd_sqrt(identity(t.cols()) - t.adjoint() * t, tol);
  d.d_tstar = psd_sqrt(identity(t.rows()) - t * t.adjoint(), tol);
  d.defect_space = range_of(d.d_t, tol, 1.0);
  d.null_dt = kernel_of(d.d_t, tol, 1.0);
  d.defect_space_star = range_of(d.d_tstar, tol, 1.0);
  d.null_dtstar = kernel_of(d.d_tstar, tol, 1.0);
  return d;
}

/// Element of the closed unit ball. Defect data is computed on first use and
/// shared between copies.
class Contraction {
 public:
  Contraction() : Contraction(CMatrix(0, 0), Tolerances{}) {}

  const CMatrix& matrix() const { return t_; }
  Index rows() const { return t_.rows(); }
  Index cols() const { return t_.cols(); }
  bool square() const { return t_.rows() == t_.cols(); }
  const Tolerances& tolerances() const { return tol_; }
  Contraction adjoint() const { return Contraction(t_.adjoint(), tol_); }

  const DefectData& defect() const {
    std::call_once(cache_->once, [this] { cache_->data = defect_data(t_, tol_); });
    return cache_->data;
  }

 private:
  struct Cache {
    std::once_flag once;
    DefectData data;
  };

  Contraction(CMatrix t, const Tolerances& tol)
      : t_(std::move(t)), tol_(tol), cache_(std::make_shared<Cache>()) {}

  CMatrix t_;
  Tolerances tol_;
  std::shared_ptr<Cache> cache_;

  friend Contraction make_contraction(const CMatrix& m, const Tolerances& tol);
};

/// Validates ||m|| <= 1 + contraction_slack; norms in (1, 1 + slack] are
/// rescaled onto the unit sphere.
inline Contraction make_contraction(const CMatrix& m, const Tolerances& tol = {}) {
  if (!all_finite(m)) throw InputError("matrix has non-finite entries");
  double n = op_norm(m);
  if (n > 1.0 + tol.contraction_slack) throw NotAContraction(n);
  if (n > 1.0) return Contraction(m / n, tol);
  return Contraction(m, tol);
}

inline DefectData defect_data(const Contraction& c, const Tolerances& tol) {
  return defect_data(c.matrix(), tol);
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

struct Classification {
  bool isometry = false;
  bool coisometry = false;
  bool unitary = false;
  bool partial_isometry = false;
  bool quasi_normal = false;
  bool quasi_isometry = false;
  bool hyponormal = false;
  bool strict = false;
  bool pure = false;

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    auto add = [&](bool f, const char* n) {
      if (f) out.emplace_back(n);
    };
    add(isometry, "isometry");
    add(coisometry, "coisometry");
    add(unitary, "unitary");
    add(partial_isometry, "partial_isometry");
    add(quasi_normal, "quasi_normal");
    add(quasi_isometry, "quasi_isometry");
    add(hyponormal, "hyponormal");
    add(strict, "strict");
    add(pure, "pure");
    return out;
  }
};

/// Frobenius threshold for the defining polynomial identities.
inline double identity_threshold(const CMatrix& t) {
  double n = op_norm(t);
  return 1e-8 * std::max(1.0, n * n);
}

inline Classification classify(const Contraction& c, const Tolerances& tol) {
  const CMatrix& t = c.matrix();
  const CMatrix ts = t.adjoint();
  const double thr = identity_threshold(t);
  Classification k;
  const CMatrix tst = ts * t;
  k.isometry = fro_norm(tst - identity(t.cols())) <= thr;
  k.coisometry = fro_norm(t * ts - identity(t.rows())) <= thr;
  k.partial_isometry = fro_norm(t * ts * t - t) <= thr;
  if (c.square()) {
    k.unitary = k.isometry && k.coisometry;
    k.quasi_normal = fro_norm(t * tst - tst * t) <= thr;
    k.quasi_isometry = fro_norm(tst - ts * ts * t * t) <= thr;
    k.hyponormal = lambda_min(hermitian_part(tst - t * ts)) >= -tol.psd_atol;
  }
  k.strict = op_norm(t) < 1.0 - tol.contraction_slack;
  k.pure = c.defect().null_dt.dim() == 0;
  return k;
}

// ---------------------------------------------------------------------------
// Unitary (+) pure decomposition
// ---------------------------------------------------------------------------

struct UPDecomposition {
  Subspace null_in, defect_in;    ///< N(D_T), D_T
  Subspace null_out, defect_out;  ///< N(D_{T*}), D_{T*}
  CMatrix u_block;                ///< N(D_T) -> N(D_{T*})
  CMatrix q_block;                ///< D_T -> D_{T*}
  double reassembly_residual = 0.0;

  CMatrix reassemble() const {
    return null_out.basis * u_block * null_in.basis.adjoint() +
           defect_out.basis * q_block * defect_in.basis.adjoint();
  }
};

inline UPDecomposition up_decompose(const Contraction& c, const Tolerances& tol) {
  const CMatrix& t = c.matrix();
  const DefectData& d = c.defect();
  UPDecomposition up{d.null_dt, d.defect_space, d.null_dtstar, d.defect_space_star, {}, {}, 0.0};
  if (up.null_in.dim() != up.null_out.dim())
    throw NotDecomposable("defect kernels of T and T* have different dimensions");
  const double thr = 1e3 * std::max(tol.rank_rtol, tol.psd_atol);
  if (up.null_in.dim() > 0) {
    CMatrix img = t * up.null_in.basis;
    double leak = op_norm(img - up.null_out.basis * (up.null_out.basis.adjoint() * img));
    CMatrix img_star = t.adjoint() * up.null_out.basis;
    double leak_star =
        op_norm(img_star - up.null_in.basis * (up.null_in.basis.adjoint() * img_star));
    if (leak > thr || leak_star > thr)
      throw NotDecomposable("T does not reduce along the defect kernels");
  }
  up.u_block = up.null_out.basis.adjoint() * t * up.null_in.basis;
  up.q_block = up.defect_out.basis.adjoint() * t * up.defect_in.basis;
  up.reassembly_residual = op_norm(up.reassemble() - t);
  if (up.reassembly_residual > thr) throw NotDecomposable("blocks do not reassemble T");
  return up;
}

/// W = U (+) 0 built from the unitary part of T.
inline Contraction nearest_part_partial_isometry(const Contraction& c, const Tolerances& tol) {
  require_square(c.matrix(), "nearest_part_partial_isometry operand");
  UPDecomposition up = up_decompose(c, tol);
  CMatrix w = up.null_out.basis * up.u_block * up.null_in.basis.adjoint();
  if (w.size() == 0) w = CMatrix::Zero(c.rows(), c.cols());
  return make_contraction(w, tol);
}

/// Projection onto N(D_T) via repeated squaring of T*T; returns the number of
/// squarings used. Converges for every finite-dimensional contraction because
/// the eigenvalues of T*T below 1 are bounded away from it.
struct PowerLimit {
  CMatrix limit;
  int squarings = 0;
  double last_step = 0.0;
};

inline PowerLimit gram_power_limit(const Contraction& c, const Tolerances& tol, int max_squarings = 64) {
  CMatrix m = hermitian_part(c.matrix().adjoint() * c.matrix());
  PowerLimit out;
  for (int k = 0; k < max_squarings; ++k) {
    CMatrix next = hermitian_part(m * m);
    out.last_step = op_norm(next - m);
    m = next;
    out.squarings = k + 1;
    if (out.last_step < tol.conv_tol) {
      out.limit = m;
      return out;
    }
  }
  throw NoConvergence("(T*T)^n did not settle", out.last_step);
}

}  // namespace clab
