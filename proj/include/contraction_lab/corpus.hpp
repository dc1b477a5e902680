#pragma once

/// @file corpus.hpp
/// @brief Seeded generators for structured random contractions and pairs.

#include "contraction_lab/contraction.hpp"

#include <map>
#include <random>

namespace clab {

class InvalidSpec : public InputError {
 public:
  using InputError::InputError;
};

enum class GenKind {
  generic,
  strict,
  unitary,
  partial_isometry,
  normal,
  commuting_pair,
  doubly_commuting_pair,
  direct_sum_U_plus_Q,
  nilpotent_shift,
  quasi_isometry
};

inline const std::vector<std::pair<GenKind, std::string>>& gen_kind_names() {
  static const std::vector<std::pair<GenKind, std::string>> names = {
      {GenKind::generic, "generic"},
      {GenKind::strict, "strict"},
      {GenKind::unitary, "unitary"},
      {GenKind::partial_isometry, "partial_isometry"},
      {GenKind::normal, "normal"},
      {GenKind::commuting_pair, "commuting_pair"},
      {GenKind::doubly_commuting_pair, "doubly_commuting_pair"},
      {GenKind::direct_sum_U_plus_Q, "direct_sum_U_plus_Q"},
      {GenKind::nilpotent_shift, "nilpotent_shift"},
      {GenKind::quasi_isometry, "quasi_isometry"}};
  return names;
}

inline std::string to_string(GenKind k) {
  for (const auto& [kind, name] : gen_kind_names())
    if (kind == k) return name;
  return "unknown";
}

inline GenKind parse_gen_kind(const std::string& s) {
  for (const auto& [kind, name] : gen_kind_names())
    if (name == s) return kind;
  throw InvalidSpec("unknown generator kind \"" + s + "\"");
}

/// Parameters by kind (defaults in brackets):
///   strict: norm_bound [0.9]
///   partial_isometry: rank [uniform in 1..dim-1, or 0..1 for dim 1]
///   normal: unimodular [0.3] probability of a unit-modulus eigenvalue
///   commuting_pair: degree [3]
///   direct_sum_U_plus_Q: unitary_dim [uniform 1..dim-1], norm_bound [0.9], rotate [1]
///   nilpotent_shift: lambda [0]
///   quasi_isometry: isometric_dim [uniform 1..dim-1], rotate [1]
struct GenSpec {
  Index dim = 2;
  GenKind kind = GenKind::generic;
  std::uint64_t seed = 0;
  std::map<std::string, double> params;

  double param(const std::string& k, double fallback) const {
    auto it = params.find(k);
    return it == params.end() ? fallback : it->second;
  }
};

struct Generated {
  CMatrix first;
  std::optional<CMatrix> second;
  std::vector<std::string> flags;
};

// ---------------------------------------------------------------------------
// Building blocks
// ---------------------------------------------------------------------------

using Rng = std::mt19937_64;

inline CMatrix gaussian_matrix(Rng& rng, Index r, Index c) {
  std::normal_distribution<double> nd(0.0, 1.0);
  CMatrix m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = cplx(nd(rng), nd(rng));
  return m;
}

inline double uniform(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

inline int uniform_int(Rng& rng, int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }

/// Haar-distributed unitary via QR of a Ginibre matrix with phase fix.
inline CMatrix haar_unitary(Rng& rng, Index n) {
  if (n == 0) return CMatrix(0, 0);
  CMatrix g = gaussian_matrix(rng, n, n);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * identity(n);
  CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < n; ++i) {
    cplx d = r(i, i);
    if (std::abs(d) > 0.0) q.col(i) *= d / std::abs(d);
  }
  return q;
}

/// Matrix with operator norm exactly `norm` (0 stays 0).
inline CMatrix scaled_to_norm(const CMatrix& m, double norm) {
  double n = op_norm(m);
  return n == 0.0 ? m : CMatrix(m * (norm / n));
}

inline CMatrix block_diag(const CMatrix& a, const CMatrix& b) {
  CMatrix m = CMatrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  m.topLeftCorner(a.rows(), a.cols()) = a;
  m.bottomRightCorner(b.rows(), b.cols()) = b;
  return m;
}

inline cplx unit_phase(Rng& rng) { return std::polar(1.0, uniform(rng, 0.0, 2.0 * M_PI)); }

inline cplx disc_point(Rng& rng, double radius) {
  return std::polar(radius * std::sqrt(uniform(rng, 0.0, 1.0)), uniform(rng, 0.0, 2.0 * M_PI));
}

inline CMatrix random_partial_isometry(Rng& rng, Index r, Index c, Index rank) {
  CMatrix u = haar_unitary(rng, r), v = haar_unitary(rng, c);
  return u.leftCols(rank) * v.leftCols(rank).adjoint();
}

/// Polynomial in m with coefficients c (c[0] + c[1] m + ...).
inline CMatrix matrix_poly(const std::vector<cplx>& c, const CMatrix& m) {
  CMatrix r = CMatrix::Zero(m.rows(), m.cols());
  for (size_t k = c.size(); k-- > 0;) r = r * m + c[k] * identity(m.rows());
  return r;
}

/// Random coefficients with sum of moduli equal to `l1`, so p(M) is a
/// contraction whenever M is.
inline std::vector<cplx> random_l1_poly(Rng& rng, int degree, double l1) {
  std::vector<cplx> c(static_cast<size_t>(degree) + 1);
  double s = 0.0;
  for (auto& x : c) {
    x = cplx(std::normal_distribution<double>(0.0, 1.0)(rng), std::normal_distribution<double>(0.0, 1.0)(rng));
    s += std::abs(x);
  }
  for (auto& x : c) x *= l1 / s;
  return c;
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

inline Generated generate(const GenSpec& spec) {
  const Index d = spec.dim;
  if (d < 1 || d > 64) throw InvalidSpec("dim must lie in 1..64");
  Rng rng(spec.seed);
  Generated g;
  auto split_dim = [&](const char* key) {
    double v = spec.param(key, -1.0);
    if (v < 0.0) return d == 1 ? static_cast<Index>(uniform_int(rng, 0, 1)) : static_cast<Index>(uniform_int(rng, 1, static_cast<int>(d) - 1));
    if (v != std::floor(v) || v > static_cast<double>(d)) throw InvalidSpec(std::string(key) + " must be an integer in 0..dim");
    return static_cast<Index>(v);
  };
  auto bound_param = [&](const char* key, double fallback) {
    double v = spec.param(key, fallback);
    if (!(v >= 0.0 && v < 1.0)) throw InvalidSpec(std::string(key) + " must lie in [0, 1)");
    return v;
  };
  switch (spec.kind) {
    case GenKind::generic:
      g.first = scaled_to_norm(gaussian_matrix(rng, d, d), 1.0);
      break;
    case GenKind::strict: {
      double b = bound_param("norm_bound", 0.9);
      g.first = scaled_to_norm(gaussian_matrix(rng, d, d), b * uniform(rng, 0.0, 1.0));
      break;
    }
    case GenKind::unitary:
      g.first = haar_unitary(rng, d);
      break;
    case GenKind::partial_isometry:
      g.first = random_partial_isometry(rng, d, d, split_dim("rank"));
      break;
    case GenKind::normal: {
      double pu = spec.param("unimodular", 0.3);
      if (!(pu >= 0.0 && pu <= 1.0)) throw InvalidSpec("unimodular must be a probability");
      CMatrix v = haar_unitary(rng, d);
      CVector z(d);
      for (Index i = 0; i < d; ++i) z(i) = uniform(rng, 0.0, 1.0) < pu ? unit_phase(rng) : disc_point(rng, 0.95);
      g.first = v * z.asDiagonal() * v.adjoint();
      break;
    }
    case GenKind::commuting_pair: {
      double deg = spec.param("degree", 3.0);
      if (deg < 0 || deg > 16 || deg != std::floor(deg)) throw InvalidSpec("degree must be an integer in 0..16");
      CMatrix m = scaled_to_norm(gaussian_matrix(rng, d, d), uniform(rng, 0.5, 1.0));
      g.first = matrix_poly(random_l1_poly(rng, static_cast<int>(deg), uniform(rng, 0.3, 1.0)), m);
      g.second = matrix_poly(random_l1_poly(rng, static_cast<int>(deg), uniform(rng, 0.3, 1.0)), m);
      break;
    }
    case GenKind::doubly_commuting_pair: {
      CMatrix v = haar_unitary(rng, d);
      CVector a(d), b(d);
      for (Index i = 0; i < d; ++i) {
        a(i) = disc_point(rng, 0.95);
        b(i) = disc_point(rng, 0.95);
      }
      g.first = v * a.asDiagonal() * v.adjoint();
      g.second = v * b.asDiagonal() * v.adjoint();
      break;
    }
    case GenKind::direct_sum_U_plus_Q: {
      Index k = split_dim("unitary_dim");
      double b = bound_param("norm_bound", 0.9);
      CMatrix m = block_diag(haar_unitary(rng, k), scaled_to_norm(gaussian_matrix(rng, d - k, d - k), b));
      if (spec.param("rotate", 1.0) != 0.0) {
        CMatrix w = haar_unitary(rng, d);
        m = w * m * w.adjoint();
      }
      g.first = m;
      break;
    }
    case GenKind::nilpotent_shift: {
      double lambda = spec.param("lambda", 0.0);
      if (!(std::abs(lambda) <= 1.0)) throw InvalidSpec("lambda must lie in [-1, 1]");
      CMatrix m = CMatrix::Zero(d, d);
      for (Index i = 0; i + 1 < d; ++i) m(i + 1, i) = i == 0 ? lambda : 1.0;
      g.first = m;
      g.flags.push_back("truncated-infinite-model");
      break;
    }
    case GenKind::quasi_isometry: {
      Index k = split_dim("isometric_dim");
      CMatrix m = block_diag(haar_unitary(rng, k), CMatrix::Zero(d - k, d - k));
      if (spec.param("rotate", 1.0) != 0.0) {
        CMatrix w = haar_unitary(rng, d);
        m = w * m * w.adjoint();
      }
      g.first = m;
      break;
    }
  }
  return g;
}

}  // namespace clab
