#pragma once

// Shared numerics: geometric grids, log-domain special sums, and
// log-log regression used by every asymptotic fit in the library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "semistab/errors.hpp"

namespace semistab {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Geometrically spaced positive nodes from `start` to `stop` (both included).
struct LogGrid {
  double start = 1.0;
  double stop = 1.0;
  std::vector<double> nodes;

  std::size_t count() const noexcept { return nodes.size(); }
  double operator[](std::size_t i) const { return nodes[i]; }
  double ratio() const { return std::pow(stop / start, 1.0 / double(count() - 1)); }
};

inline LogGrid geometric_grid(double start, double stop, std::size_t count) {
  if (!(start > 0.0) || !(stop > start) || !std::isfinite(stop))
    throw DomainError("geometric_grid needs 0 < start < stop, got [" + std::to_string(start) +
                      ", " + std::to_string(stop) + "]");
  if (count < 2) throw DomainError("geometric_grid needs count >= 2");
  LogGrid g;
  g.start = start;
  g.stop = stop;
  g.nodes.resize(count);
  const double lo = std::log(start);
  const double step = (std::log(stop) - lo) / double(count - 1);
  for (std::size_t i = 0; i < count; ++i) g.nodes[i] = std::exp(lo + step * double(i));
  g.nodes.front() = start;
  g.nodes.back() = stop;
  return g;
}

/// Half-open index range [first, last) into a grid.
struct FitWindow {
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t size() const noexcept { return last > first ? last - first : 0; }
};

/// Drops the first and last 10% of `count` nodes.
inline FitWindow default_window(std::size_t count) {
  const std::size_t trim = count / 10;
  return {trim, count - trim};
}

/// Indices whose node lies in [lo, hi].
inline FitWindow window_for_range(const LogGrid& grid, double lo, double hi) {
  FitWindow w{grid.count(), grid.count()};
  for (std::size_t i = 0; i < grid.count(); ++i) {
    if (grid[i] >= lo && grid[i] <= hi) {
      if (w.first == grid.count()) w.first = i;
      w.last = i + 1;
    }
  }
  if (w.first == grid.count()) w = {0, 0};
  return w;
}

/// Same window with 10% of its nodes trimmed at each end.
inline FitWindow trimmed(FitWindow w) {
  const std::size_t trim = w.size() / 10;
  return {w.first + trim, w.last - trim};
}

/// values ~ constant * t^exponent over `window`.
struct PowerFit {
  double exponent = 0.0;
  double constant = 1.0;
  double residual = 0.0;  // RMS of log-residuals over the window
  FitWindow window;
};

/// values ~ constant * t^exponent * (1 + log t)^log_exponent.
struct PowerLogFit {
  double exponent = 0.0;
  double log_exponent = 0.0;
  double constant = 1.0;
  double residual = 0.0;
  FitWindow window;
};

/// values ~ exp(log_constant + rate * t).
struct ExponentialFit {
  double rate = 0.0;
  double log_constant = 0.0;
  double residual = 0.0;
  FitWindow window;
};

namespace detail {

struct LineFit {
  double slope, intercept, rms;
};

inline LineFit least_squares_line(std::span<const double> x, std::span<const double> y) {
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxx > 0 ? sxy / sxx : 0.0;
  const double intercept = my - slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - intercept - slope * x[i];
    ss += r * r;
  }
  return {slope, intercept, std::sqrt(ss / n)};
}

inline void check_fit_inputs(std::size_t grid_count, std::span<const double> values,
                             FitWindow w) {
  if (values.size() != grid_count)
    throw ShapeError("values (" + std::to_string(values.size()) + ") vs grid (" +
                     std::to_string(grid_count) + ")");
  if (w.last > grid_count || w.size() < 3)
    throw InsufficientDataError("fit window holds " + std::to_string(w.size()) +
                                " points, need >= 3");
  for (std::size_t i = w.first; i < w.last; ++i)
    if (!(values[i] > 0.0) || !std::isfinite(values[i]))
      throw DomainError("fit value at index " + std::to_string(i) + " is not positive and finite");
}

}  // namespace detail

/// Ordinary least squares of log(values) against log(nodes).
inline PowerFit fit_power_law(const LogGrid& grid, std::span<const double> values,
                              std::optional<FitWindow> window = std::nullopt) {
  const FitWindow w = window.value_or(default_window(grid.count()));
  detail::check_fit_inputs(grid.count(), values, w);
  std::vector<double> lx, ly;
  lx.reserve(w.size());
  ly.reserve(w.size());
  for (std::size_t i = w.first; i < w.last; ++i) {
    lx.push_back(std::log(grid[i]));
    ly.push_back(std::log(values[i]));
  }
  const auto line = detail::least_squares_line(lx, ly);
  return {line.slope, std::exp(line.intercept), line.rms, w};
}

/// Opt-in fit with an extra log(1 + log t) regressor; requires nodes >= 1.
inline PowerLogFit fit_power_law_with_log(const LogGrid& grid, std::span<const double> values,
                                          std::optional<FitWindow> window = std::nullopt) {
  const FitWindow w = window.value_or(default_window(grid.count()));
  detail::check_fit_inputs(grid.count(), values, w);
  if (w.size() < 4) throw InsufficientDataError("log-factor fit needs >= 4 points");
  const auto n = Eigen::Index(w.size());
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double t = grid[w.first + std::size_t(k)];
    if (t < 1.0) throw DomainError("log-factor fit needs t >= 1");
    X(k, 0) = 1.0;
    X(k, 1) = std::log(t);
    X(k, 2) = std::log1p(std::log(t));
    y(k) = std::log(values[w.first + std::size_t(k)]);
  }
  const Eigen::VectorXd c = X.colPivHouseholderQr().solve(y);
  const double rms = std::sqrt((y - X * c).squaredNorm() / double(n));
  return {c(1), c(2), std::exp(c(0)), rms, w};
}

/// Least squares of log(values) against t (semi-log); `rate` is the exponential growth rate.
inline ExponentialFit fit_exponential_rate(std::span<const double> times,
                                           std::span<const double> values,
                                           std::optional<FitWindow> window = std::nullopt) {
  const FitWindow w = window.value_or(FitWindow{0, times.size()});
  detail::check_fit_inputs(times.size(), values, w);
  std::vector<double> tx(times.begin() + long(w.first), times.begin() + long(w.last));
  std::vector<double> ly;
  for (std::size_t i = w.first; i < w.last; ++i) ly.push_back(std::log(values[i]));
  const auto line = detail::least_squares_line(tx, ly);
  return {line.slope, line.intercept, line.rms, w};
}

/// log of (sum_{j=0}^m (m^j / j!)^2)^{1/2}, by streaming log-sum-exp.
inline double log_stable_exp_sum(long long m) {
  if (m < 1) throw DomainError("stable_exp_sum needs m >= 1");
  const double lm = std::log(double(m));
  double running_max = -kInf;
  double acc = 0.0;  // sum of exp(term - running_max)
  for (long long j = 0; j <= m; ++j) {
    const double term = 2.0 * (double(j) * lm - std::lgamma(double(j) + 1.0));
    if (term > running_max) {
      acc = acc * std::exp(running_max - term) + 1.0;
      running_max = term;
    } else {
      acc += std::exp(term - running_max);
    }
  }
  return 0.5 * (running_max + std::log(acc));
}

/// (sum_{j=0}^m (m^j / j!)^2)^{1/2}. Overflows to +inf for m beyond ~700;
/// use log_stable_exp_sum there.
inline double stable_exp_sum(long long m) { return std::exp(log_stable_exp_sum(m)); }

}  // namespace semistab
