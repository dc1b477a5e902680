#pragma once

/// @file asymptotic.hpp
/// @brief Asymptotic limit S_T = lim T*^n T^n, canonical triangulation,
/// stability classes and reducing isometric/unitary parts.

#include "contraction_lab/contraction.hpp"

namespace clab {

struct AsymptoticData {
  CMatrix s_t;
  Subspace null_s;  ///< N(S_T)
  Subspace fix_s;   ///< N(I - S_T)
  long long iterations = 0;
  double last_step = 0.0;
  bool idempotent = false;
  int indeterminate = 0;  ///< eigenvalues of S_T within a decade above the cutoff, near 0 or 1
};

/// Iterates A_{n+1} = T* A_n T from A_0 = I. The sequence is advanced by
/// doubling, A_{2n} = (T^n)* A_n T^n, and stops once ||A_{2n} - A_n|| drops
/// below conv_tol (which bounds every single-step increment in between).
inline AsymptoticData asymptotic_limit(const Contraction& c, const Tolerances& tol, int max_doublings = 48) {
  const CMatrix& t = c.matrix();
  require_square(t, "asymptotic_limit operand");
  const Index d = t.rows();
  AsymptoticData out;
  CMatrix a = hermitian_part(t.adjoint() * t);
  CMatrix p = t;
  long long n = 1;
  bool done = d == 0;
  if (d > 0 && op_norm(a - identity(d)) < tol.conv_tol) done = true;  // isometry: A_1 = A_0
  for (int k = 0; k < max_doublings && !done; ++k) {
    CMatrix next = hermitian_part(p.adjoint() * a * p);
    out.last_step = op_norm(next - a);
    a = next;
    p = p * p;
    n *= 2;
    if (out.last_step < tol.conv_tol) done = true;
  }
  if (!done) throw NoConvergence("T*^n T^n did not settle", out.last_step);
  out.s_t = d == 0 ? CMatrix(0, 0) : a;
  out.iterations = n;
  out.null_s = kernel_of(out.s_t, tol, 1.0);
  out.fix_s = d == 0 ? Subspace::zero(0) : kernel_of(identity(d) - out.s_t, tol, 1.0);
  out.idempotent = d == 0 || op_norm(out.s_t * out.s_t - out.s_t) <= 1e3 * tol.conv_tol;
  if (d > 0) {
    RVector ev = hermitian_eig(out.s_t).eigenvalues();
    const double cut = tol.rank_rtol;
    for (Index i = 0; i < ev.size(); ++i) {
      double lo = std::abs(ev(i)), hi = std::abs(1.0 - ev(i));
      if ((lo > cut && lo <= 10 * cut) || (hi > cut && hi <= 10 * cut)) ++out.indeterminate;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Canonical triangulation over N(S_T) (+) closure R(S_T)
// ---------------------------------------------------------------------------

struct Triangulation {
  Subspace null_s;   ///< N(S_T)
  Subspace range_s;  ///< closure of R(S_T) = N(S_T)^perp
  CMatrix q_block;   ///< N(S_T) -> N(S_T)
  CMatrix r_block;   ///< range_s -> N(S_T)
  CMatrix w_block;   ///< range_s -> range_s
  double lower_left = 0.0;
  bool q_class_ok = false;  ///< Q is of class C0.
  bool w_class_ok = false;  ///< W is of class C1.
};

inline Triangulation canonical_triangulation(const Contraction& c, const Tolerances& tol) {
  const CMatrix& t = c.matrix();
  AsymptoticData as = asymptotic_limit(c, tol);
  Triangulation tr;
  tr.null_s = as.null_s;
  tr.range_s = complement(as.null_s);
  const CMatrix& n = tr.null_s.basis;
  const CMatrix& r = tr.range_s.basis;
  tr.q_block = n.adjoint() * t * n;
  tr.r_block = n.adjoint() * t * r;
  tr.w_block = r.adjoint() * t * r;
  tr.lower_left = op_norm(CMatrix(r.adjoint() * t * n));
  Tolerances inner = tol;
  if (tr.q_block.size() == 0) {
    tr.q_class_ok = true;
  } else {
    AsymptoticData aq = asymptotic_limit(make_contraction(tr.q_block, inner), inner);
    tr.q_class_ok = aq.null_s.is_full();
  }
  if (tr.w_block.size() == 0) {
    tr.w_class_ok = true;
  } else {
    AsymptoticData aw = asymptotic_limit(make_contraction(tr.w_block, inner), inner);
    tr.w_class_ok = aw.null_s.is_zero();
  }
  return tr;
}

// ---------------------------------------------------------------------------
// Reducing parts and classes
// ---------------------------------------------------------------------------

/// Checks that s reduces t and that t restricted to s is an isometry.
inline bool reduces_isometrically(const CMatrix& t, const Subspace& s, double thr) {
  if (s.dim() == 0) return true;
  if (invariance_residual(t, s) > thr || invariance_residual(t.adjoint(), s) > thr) return false;
  CMatrix v = s.basis.adjoint() * t * s.basis;
  return op_norm(v.adjoint() * v - identity(s.dim())) <= thr;
}

/// Complement of span{T^n (I - T*^j T^j) x : 0 <= n <= d, 1 <= j <= d}.
/// Powers beyond d add nothing by Cayley-Hamilton.
inline Subspace reducing_isometric_part(const Contraction& c, const Tolerances& tol) {
  const CMatrix& t = c.matrix();
  require_square(t, "reducing_isometric_part operand");
  const Index d = t.rows();
  if (d == 0) return Subspace::zero(0);
  std::vector<CMatrix> blocks;
  CMatrix tj = identity(d);
  for (Index j = 1; j <= d; ++j) {
    tj = tj * t;
    CMatrix e = identity(d) - tj.adjoint() * tj;
    CMatrix tn_e = e;
    for (Index n = 0; n <= d; ++n) {
      blocks.push_back(tn_e);
      tn_e = t * tn_e;
    }
  }
  CMatrix all(d, d * static_cast<Index>(blocks.size()));
  for (size_t k = 0; k < blocks.size(); ++k) all.middleCols(static_cast<Index>(k) * d, d) = blocks[k];
  Subspace spanned = range_of(all, tol, 1.0);
  Subspace h_i = complement(spanned);
  if (!reduces_isometrically(t, h_i, 1e-6))
    throw NumericalFailure("reducing isometric part failed verification");
  return h_i;
}

/// N(I - S_T) intersected with N(I - S_{T*}).
inline Subspace reducing_unitary_part(const Contraction& c, const Tolerances& tol) {
  require_square(c.matrix(), "reducing_unitary_part operand");
  AsymptoticData a = asymptotic_limit(c, tol);
  AsymptoticData as = asymptotic_limit(c.adjoint(), tol);
  Subspace h_u = intersection(a.fix_s, as.fix_s);
  const CMatrix& t = c.matrix();
  if (!reduces_isometrically(t, h_u, 1e-6))
    throw NumericalFailure("reducing unitary part failed verification");
  if (h_u.dim() > 0) {
    CMatrix u = h_u.basis.adjoint() * t * h_u.basis;
    if (op_norm(u * u.adjoint() - identity(h_u.dim())) > 1e-6)
      throw NumericalFailure("restriction to the unitary part is not unitary");
  }
  return h_u;
}

struct ClassInfo {
  bool c0_dot = false;  ///< S_T = 0
  bool c1_dot = false;  ///< N(S_T) = {0}
  bool c_dot0 = false;  ///< S_{T*} = 0
  bool c_dot1 = false;  ///< N(S_{T*}) = {0}
  int indeterminate = 0;

  std::string label() const {
    char a = c0_dot ? '0' : (c1_dot ? '1' : '?');
    char b = c_dot0 ? '0' : (c_dot1 ? '1' : '?');
    if (a == '?' || b == '?') return "mixed";
    return std::string("C") + a + b;
  }
};

inline ClassInfo class_info(const Contraction& c, const Tolerances& tol) {
  require_square(c.matrix(), "class_of operand");
  AsymptoticData a = asymptotic_limit(c, tol);
  AsymptoticData as = asymptotic_limit(c.adjoint(), tol);
  ClassInfo k;
  const Index d = c.rows();
  // In dimension 0 every class holds vacuously; report C00.
  k.c0_dot = a.null_s.dim() == d;
  k.c1_dot = a.null_s.dim() == 0 && d > 0;
  k.c_dot0 = as.null_s.dim() == d;
  k.c_dot1 = as.null_s.dim() == 0 && d > 0;
  k.indeterminate = a.indeterminate + as.indeterminate;
  return k;
}

inline std::string class_of(const Contraction& c, const Tolerances& tol) { return class_info(c, tol).label(); }

struct PartsData {
  Subspace h_i;
  Subspace h_u;
  ClassInfo cls;
};

inline PartsData parts(const Contraction& c, const Tolerances& tol) {
  return PartsData{reducing_isometric_part(c, tol), reducing_unitary_part(c, tol), class_info(c, tol)};
}

}  // namespace clab
