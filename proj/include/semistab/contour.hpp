#pragma once

// Trapezoidal quadrature of  (1/2 pi i) * integral of z^a (eta+z)^{-a-b} R(z) dz
// over the boundary of the sector S_theta, traversed from infinity*e^{i theta}
// through 0 to infinity*e^{-i theta}. Nodes are geometric in r on each ray.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "semistab/errors.hpp"
#include "semistab/numcore.hpp"

namespace semistab {

struct ContourSpec {
  double theta = 0.75 * kPi;
  double r_min = 1e-8;
  double r_max = 1e8;
  int nodes_per_ray = 2048;
  /// Widen [r_min, r_max] until the analytic tail bounds drop below tail_tol.
  bool auto_range = true;
  double tail_tol = 1e-13;
};

inline void validate_contour(const ContourSpec& c) {
  if (!(c.theta > 0.0 && c.theta < kPi)) throw ContourError("theta must lie in (0, pi)");
  if (!(c.r_min > 0.0) || !(c.r_max > c.r_min)) throw ContourError("need 0 < r_min < r_max");
  if (c.nodes_per_ray < 8) throw ContourError("nodes_per_ray must be >= 8");
}

/// Quadrature value plus truncation diagnostics.
struct ContourResult {
  Eigen::MatrixXcd value;
  double r_min = 0.0;
  double r_max = 0.0;
  double tail_fraction = 0.0;     // far-end 10% of nodes, relative to |value|
  double small_r_tail_bound = 0.0;
  double large_r_tail_bound = 0.0;
  bool truncation_warning = false;
};

/// Size hints for the resolvent near 0 and near infinity.
struct ContourScales {
  double large = 1.0;    // |z| beyond which R(z) ~ 1/z
  double inverse = 1.0;  // bound for |R(z)| as z -> 0 when invertible
  bool invertible = true;
};

/// `resolvent(z)` returns R(z, A) applied to the input (any fixed-shape matrix).
template <typename ResolventFn>
ContourResult contour_integrate(const ContourSpec& spec, double alpha, double beta, double eta,
                                ResolventFn&& resolvent, ContourScales scales = {}) {
  validate_contour(spec);
  if (alpha < 0.0 || beta < 0.0) throw DomainError("fractional indices must be >= 0");
  if (alpha + beta <= 0.0) throw DomainError("contour needs alpha + beta > 0");
  if (!(eta > 0.0)) throw DomainError("eta must be > 0");

  double r_lo = spec.r_min;
  double r_hi = spec.r_max;
  // Near infinity the integrand is ~ r^{-beta} in log-radius; near zero ~ r^{alpha+1}
  // (invertible) or r^{alpha} (injective only).
  const double big = std::max({1.0, scales.large, eta});
  const double small_power = scales.invertible ? alpha + 1.0 : alpha;
  const double small_scale = scales.invertible ? std::max(1.0, scales.inverse) : 1.0;
  if (spec.auto_range) {
    if (beta > 0.0) {
      const double want = big * std::pow(beta * spec.tail_tol, -1.0 / beta);
      r_hi = std::max(r_hi, std::min(want, 1e300));
    }
    if (small_power > 0.0) {
      const double want = std::pow(small_power * spec.tail_tol / small_scale, 1.0 / small_power) /
                          std::max(1.0, small_scale);
      r_lo = std::min(r_lo, std::max(want, 1e-300));
    }
  }
  if (beta == 0.0) throw ContourError("beta = 0 leaves the integrand without decay at infinity");

  const int M = spec.nodes_per_ray;
  const double u0 = std::log(r_lo);
  const double h = (std::log(r_hi) - u0) / double(M - 1);
  const cplx e_up = std::polar(1.0, spec.theta);
  const cplx e_dn = std::polar(1.0, -spec.theta);
  const std::size_t far_start = std::size_t(M - std::max(1, M / 10));

  Eigen::MatrixXcd total;
  Eigen::MatrixXcd far;
  auto f = [&](cplx z) { return std::pow(z, alpha) * std::pow(eta + z, -alpha - beta); };
  for (int j = 0; j < M; ++j) {
    const double r = std::exp(u0 + h * double(j));
    const double w = (j == 0 || j == M - 1) ? 0.5 * h : h;
    const cplx zu = r * e_up;
    const cplx zd = r * e_dn;
    // dz = z du; upper ray runs inward (minus sign), lower ray outward.
    Eigen::MatrixXcd term = (f(zd) * zd * w) * resolvent(zd);
    term -= (f(zu) * zu * w) * resolvent(zu);
    if (j == 0) {
      total = Eigen::MatrixXcd::Zero(term.rows(), term.cols());
      far = total;
    }
    total += term;
    if (std::size_t(j) >= far_start) far += term;
  }
  const cplx scale = 1.0 / cplx(0.0, 2.0 * kPi);
  total *= scale;
  far *= scale;

  ContourResult res;
  res.value = std::move(total);
  res.r_min = r_lo;
  res.r_max = r_hi;
  const double vn = res.value.norm();
  res.tail_fraction = vn > 0 ? far.norm() / vn : far.norm();
  res.large_r_tail_bound = beta > 0 ? std::pow(r_hi / big, -beta) / beta : kInf;
  res.small_r_tail_bound =
      small_power > 0 ? small_scale * std::pow(r_lo, small_power) / small_power : kInf;
  res.truncation_warning = res.tail_fraction > 1e-8;
  return res;
}

}  // namespace semistab
