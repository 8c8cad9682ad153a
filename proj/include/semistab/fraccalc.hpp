#pragma once

// Fractional powers A^alpha (eta + A)^{-alpha-beta} by sector-boundary quadrature,
// Phi^alpha_beta(A) = A^alpha (1 + A)^{-alpha-beta} by exact calculus where the
// model allows it, and the scalar contour identity used as a quadrature self-test.

#include <cmath>
#include <complex>
#include <string>
#include <variant>

#include "semistab/contour.hpp"
#include "semistab/errors.hpp"
#include "semistab/operators.hpp"

namespace semistab {

struct FractionalIndex {
  double alpha = 0.0;
  double beta = 0.0;
  double eta = 1.0;
};

namespace detail {

inline void check_index(const FractionalIndex& idx) {
  if (!(idx.alpha >= 0.0) || !(idx.beta >= 0.0)) throw DomainError("alpha and beta must be >= 0");
  if (!(idx.eta > 0.0)) throw DomainError("eta must be > 0");
}

inline double large_scale(const OperatorModel& model) {
  return std::visit(
      [](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, DenseModel>) {
          return m.norm();
        } else if constexpr (std::is_same_v<M, DiagonalSymbolModel>) {
          double v = 0.0;
          for (const cplx& x : m.values()) v = std::max(v, std::abs(x));
          return v;
        } else if constexpr (std::is_same_v<M, JordanSumModel>) {
          return double(m.N()) + 2.0;
        } else {
          return 2.0;
        }
      },
      model.impl());
}

}  // namespace detail

/// Quadrature approximation of A^alpha (eta + A)^{-alpha-beta} x; the result's
/// `value` holds the vector, the rest are truncation diagnostics.
inline ContourResult contour_fractional_apply(const OperatorModel& model, const FractionalIndex& idx,
                                              const CMatrix& x, const ContourSpec& contour = {}) {
  detail::check_index(idx);
  detail::check_vector(model, x);
  validate_contour(contour);
  const auto& meta = model.metadata();
  if (idx.alpha == 0.0 && idx.beta == 0.0) {
    ContourResult id;
    id.value = x;
    return id;
  }
  if (!meta.sectorial) throw DomainError("contour representation needs a sectorial model");
  if (idx.alpha > 0.0 && !meta.injective) throw DomainError("alpha > 0 needs an injective model");
  if (idx.alpha == 0.0 && !meta.invertible) throw DomainError("alpha = 0 needs an invertible model");
  if (!(contour.theta > meta.sectorial_angle))
    throw ContourError("theta = " + std::to_string(contour.theta) +
                       " does not exceed the sectorial angle estimate " +
                       std::to_string(meta.sectorial_angle));

  // beta = 0 has no decay at infinity: A^a (eta+A)^{-a} = A^a (eta+A)^{-a-1} (eta + A).
  const bool lift = idx.beta == 0.0;
  const CMatrix rhs = lift ? CMatrix(idx.eta * x + apply_operator(model, x)) : x;
  const double beta = lift ? 1.0 : idx.beta;

  ContourScales sc;
  sc.large = std::max(1.0, detail::large_scale(model));
  sc.invertible = meta.invertible;
  sc.inverse = meta.invertible ? operator_norm(model, ResolventMap{0.0}).value : 1.0;
  try {
    return contour_integrate(
        contour, idx.alpha, beta, idx.eta,
        [&](cplx z) { return resolvent_apply(model, z, rhs); }, sc);
  } catch (const NearSingularityError& e) {
    throw ContourError(std::string("contour meets the spectrum: ") + e.what());
  }
}

/// Phi^alpha_beta(A) x.
inline CMatrix phi_apply(const OperatorModel& model, double alpha, double beta, const CMatrix& x) {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw DomainError("alpha and beta must be >= 0");
  detail::check_vector(model, x);
  if (alpha == 0.0 && beta == 0.0) return x;
  if (alpha > 0.0 && !model.metadata().injective)
    throw DomainError("A^alpha with alpha > 0 needs an injective model");
  if (const auto* d = std::get_if<DenseModel>(&model.impl())) {
    if (!d->diagonalizable() && model.metadata().sectorial) {
      ContourSpec spec;
      spec.theta = std::max(spec.theta, 0.5 * (model.metadata().sectorial_angle + kPi));
      return contour_fractional_apply(model, {alpha, beta, 1.0}, x, spec).value;
    }
    return d->phi(alpha, beta) * x;
  }
  return apply_map(model, FractionalSemigroupMap{0.0, alpha, beta}, x);
}

struct ContourIdentityCheck {
  cplx quadrature;
  cplx closed_form;
  double rel_error = 0.0;
  ContourResult diagnostics;
};

/// Scalar check: the sector quadrature of z^a (eta+z)^{-a-b} / (z + lambda + eta - 1)
/// against (1 - eta - lambda)^a / (1 - lambda)^{a+b}.
/// lambda must lie in the closed right half-plane, off 0 and outside the sector |arg| < phi.
inline ContourIdentityCheck verify_contour_identity(double alpha, double beta, double eta,
                                                    cplx lambda, double phi,
                                                    const ContourSpec& contour = {}) {
  if (!(alpha >= 0.0)) throw DomainError("alpha must be >= 0");
  if (!(beta > 0.0)) throw DomainError("beta must be > 0");
  if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("eta must lie in (0, 1]");
  if (!(phi > 0.0 && phi <= kPi / 2)) throw DomainError("phi must lie in (0, pi/2]");
  if (lambda.real() < 0.0 || lambda == cplx(0.0) || std::abs(std::arg(lambda)) < phi)
    throw DomainError("lambda is outside the admissible region");
  if (!(contour.theta > kPi - phi && contour.theta < kPi))
    throw DomainError("theta must lie in (pi - phi, pi)");

  const cplx z0 = 1.0 - eta - lambda;
  ContourScales sc;
  sc.large = std::max(1.0, std::abs(z0));
  sc.invertible = std::abs(z0) > 0.0;
  sc.inverse = sc.invertible ? 1.0 / std::abs(z0) : 1.0;
  ContourIdentityCheck out;
  out.diagnostics = contour_integrate(
      contour, alpha, beta, eta,
      [&](cplx z) { return Eigen::MatrixXcd::Constant(1, 1, 1.0 / (z - z0)); }, sc);
  out.quadrature = out.diagnostics.value(0, 0);
  out.closed_form = std::pow(z0, alpha) / std::pow(1.0 - lambda, alpha + beta);
  out.rel_error = std::abs(out.quadrature - out.closed_form) / std::abs(out.closed_form);
  return out;
}

}  // namespace semistab
