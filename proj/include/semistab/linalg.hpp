#pragma once

// Dense complex linear algebra: matrix exponential by scaling and squaring,
// spectral norms, and truncated Taylor jets for functions of shifted
// nilpotent blocks c*I - S (S the unit superdiagonal shift).

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "semistab/errors.hpp"
#include "semistab/numcore.hpp"

namespace semistab {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;

/// Largest singular value. Small matrices use a Jacobi SVD; larger ones the
/// top eigenvalue of M^* M, which is accurate to working precision for sigma_max.
template <typename Derived>
double spectral_norm(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  using Plain = typename Derived::PlainObject;
  if (std::min(m.rows(), m.cols()) <= 8) {
    Eigen::JacobiSVD<Plain> svd(m.derived());
    return svd.singularValues()(0);
  }
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  const Plain s = m.derived() / scale;
  const Plain g = s.cols() <= s.rows() ? Plain(s.adjoint() * s) : Plain(s * s.adjoint());
  Eigen::SelfAdjointEigenSolver<Plain> es(g, Eigen::EigenvaluesOnly);
  return scale * std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

namespace detail {

// Degree-13 Pade approximant to exp, valid for ||A||_1 <= kTheta13.
inline constexpr double kTheta13 = 5.371920351148152;

inline CMatrix pade13(const CMatrix& A) {
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  const auto n = A.rows();
  const CMatrix I = CMatrix::Identity(n, n);
  const CMatrix A2 = A * A;
  const CMatrix A4 = A2 * A2;
  const CMatrix A6 = A4 * A2;
  const CMatrix inner_u = b[13] * A6 + b[11] * A4 + b[9] * A2;
  const CMatrix U = A * (A6 * inner_u + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
  const CMatrix inner_v = b[12] * A6 + b[10] * A4 + b[8] * A2;
  const CMatrix V = A6 * inner_v + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
  return (V - U).partialPivLu().solve(V + U);
}

inline double norm1(const CMatrix& A) { return A.cwiseAbs().colwise().sum().maxCoeff(); }

inline CMatrix expm_scaled(const CMatrix& A) {
  const double nrm = norm1(A);
  int s = 0;
  if (nrm > kTheta13) s = int(std::ceil(std::log2(nrm / kTheta13)));
  CMatrix E = pade13(A / std::ldexp(1.0, s));
  for (int i = 0; i < s; ++i) E = E * E;
  return E;
}

}  // namespace detail

/// exp(A) by scaling and squaring with a fixed degree-13 Pade approximant.
/// Arguments with ||A||_1 > 1e3 are split into equal substeps whose
/// exponentials are recombined by binary powering.
inline CMatrix expm(const CMatrix& A) {
  if (A.rows() != A.cols()) throw ShapeError("expm needs a square matrix");
  if (!A.allFinite()) throw DomainError("expm of a non-finite matrix");
  constexpr double kSplitNorm = 1e3;
  const double nrm = detail::norm1(A);
  if (nrm <= kSplitNorm) return detail::expm_scaled(A);
  auto steps = static_cast<unsigned long long>(std::ceil(nrm / kSplitNorm));
  CMatrix base = detail::expm_scaled(A / double(steps));
  CMatrix result = CMatrix::Identity(A.rows(), A.cols());
  while (steps > 0) {
    if (steps & 1ULL) result = result * base;
    steps >>= 1ULL;
    if (steps > 0) base = base * base;
  }
  return result;
}

/// Truncated Taylor coefficients a_k = f^{(k)}(c)/k!, k = 0..degree.
using Jet = std::vector<cplx>;

/// Coefficients of (c + h)^p on the principal branch.
inline Jet jet_pow(cplx c, double p, int degree) {
  Jet j(std::size_t(degree) + 1);
  if (c == cplx(0.0)) {
    if (p != std::floor(p) || p < 0) throw DomainError("jet_pow: non-integer power at 0");
    for (int k = 0; k <= degree; ++k) j[std::size_t(k)] = (k == int(p)) ? 1.0 : 0.0;
    return j;
  }
  j[0] = std::pow(c, p);
  for (int k = 1; k <= degree; ++k)
    j[std::size_t(k)] = j[std::size_t(k - 1)] * ((p - double(k - 1)) / double(k)) / c;
  return j;
}

/// Coefficients of exp(s * (c + h)).
inline Jet jet_exp(cplx s, cplx c, int degree) {
  Jet j(std::size_t(degree) + 1);
  j[0] = std::exp(s * c);
  for (int k = 1; k <= degree; ++k) j[std::size_t(k)] = j[std::size_t(k - 1)] * s / double(k);
  return j;
}

/// Coefficients of (mu - c - h)^{-1}.
inline Jet jet_resolvent(cplx mu, cplx c, int degree) {
  const cplx d = mu - c;
  if (d == cplx(0.0)) throw DomainError("jet_resolvent at a pole");
  Jet j(std::size_t(degree) + 1);
  j[0] = 1.0 / d;
  for (int k = 1; k <= degree; ++k) j[std::size_t(k)] = j[std::size_t(k - 1)] / d;
  return j;
}

inline Jet jet_mul(const Jet& a, const Jet& b) {
  Jet r(a.size(), cplx(0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; i + k < r.size(); ++k) r[i + k] += a[i] * b[k];
  return r;
}

/// f(c I - S) as a dense upper-triangular Toeplitz matrix, given the jet of f at c.
inline CMatrix toeplitz_from_jet(const Jet& a, int size) {
  CMatrix M = CMatrix::Zero(size, size);
  for (int k = 0; k < size; ++k) {
    const cplx v = (k % 2 == 0) ? a[std::size_t(k)] : -a[std::size_t(k)];
    for (int i = 0; i + k < size; ++i) M(i, i + k) = v;
  }
  return M;
}

/// y = f(c I - S) x for the jet of f at c, without forming the matrix.
inline void toeplitz_apply(const Jet& a, const cplx* x, cplx* y, int size) {
  for (int i = 0; i < size; ++i) {
    cplx acc = 0.0;
    for (int k = 0; i + k < size; ++k) {
      const cplx v = (k % 2 == 0) ? a[std::size_t(k)] : -a[std::size_t(k)];
      acc += v * x[i + k];
    }
    y[i] = acc;
  }
}

/// Spectral norm of f(c I - S); sum_k |a_k| bounds it from above.
inline double toeplitz_norm(const Jet& a, int size) {
  if (size == 1) return std::abs(a[0]);
  return spectral_norm(toeplitz_from_jet(a, size));
}

inline double toeplitz_norm_bound(const Jet& a, int size) {
  double s = 0.0;
  for (int k = 0; k < size; ++k) s += std::abs(a[std::size_t(k)]);
  return s;
}

/// Unit superdiagonal shift of the given size.
inline CMatrix shift_matrix(int size) {
  CMatrix S = CMatrix::Zero(size, size);
  for (int i = 0; i + 1 < size; ++i) S(i, i + 1) = 1.0;
  return S;
}

}  // namespace semistab
