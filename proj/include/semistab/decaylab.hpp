#pragma once

// Decay measurements on fractional domains and the rate calculators that turn
// (alpha, beta, sigma, tau, geometry) into guaranteed polynomial decay exponents.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "semistab/errors.hpp"
#include "semistab/numcore.hpp"
#include "semistab/operators.hpp"
#include "semistab/parallel.hpp"

namespace semistab {

// ---------------------------------------------------------------------------
// Geometry

struct LatticeGeometry {
  double p_convex = 2.0;
  double q_concave = 2.0;
};

/// Banach-space geometry, always supplied by the caller.
struct GeometryDescriptor {
  double fourier_type = 2.0;
  double type = 2.0;
  double cotype = 2.0;
  bool hilbert = true;
  std::optional<LatticeGeometry> lattice;
  bool positive_semigroup = false;
  bool r_resolvent_growth_asserted = false;

  static GeometryDescriptor hilbert_space() { return {}; }
  /// L^u: Fourier type min(u, u'), type min(u, 2), cotype max(u, 2).
  static GeometryDescriptor lebesgue(double u) {
    GeometryDescriptor g;
    const double uc = u == 1.0 ? kInf : u / (u - 1.0);
    g.fourier_type = std::min(u, uc);
    g.type = std::min(u, 2.0);
    g.cotype = std::max(u, 2.0);
    g.hilbert = u == 2.0;
    g.lattice = LatticeGeometry{g.type, g.cotype};
    return g;
  }

  void validate() const {
    if (!(fourier_type >= 1.0 && fourier_type <= 2.0)) throw DomainError("fourier_type must lie in [1,2]");
    if (!(type >= 1.0 && type <= 2.0)) throw DomainError("type must lie in [1,2]");
    if (!(cotype >= 2.0)) throw DomainError("cotype must lie in [2,inf]");
    if (hilbert && (fourier_type != 2.0 || type != 2.0 || cotype != 2.0))
      throw DomainError("a Hilbert space has Fourier type, type and cotype 2");
    if (lattice) {
      if (!(lattice->p_convex >= 1.0 && lattice->p_convex <= 2.0))
        throw DomainError("lattice p_convex must lie in [1,2]");
      if (!(lattice->q_concave >= 2.0 && std::isfinite(lattice->q_concave)))
        throw DomainError("lattice q_concave must lie in [2,inf)");
    }
  }
};

// ---------------------------------------------------------------------------
// Predictions

enum class ConditionStatus { pass, fail, asserted };

inline std::string to_string(ConditionStatus s) {
  switch (s) {
    case ConditionStatus::pass: return "pass";
    case ConditionStatus::fail: return "fail";
    case ConditionStatus::asserted: return "asserted";
  }
  return "?";
}

struct Condition {
  std::string name;
  ConditionStatus status = ConditionStatus::pass;
};

/// A guaranteed decay exponent. `rho` may be +inf; it is NaN when a condition fails.
struct RatePrediction {
  double rho = std::nan("");
  bool strict = true;
  double inv_r = std::nan("");  // the smoothing index 1/r used, where one applies
  std::string source;
  std::vector<Condition> conditions;
  /// Growth of ||T(t)|| that the rate must absorb: the norm bound is t^{growth_offset - rho}.
  double growth_offset = 0.0;
  bool log_factor = false;

  bool applicable() const {
    return std::none_of(conditions.begin(), conditions.end(),
                        [](const Condition& c) { return c.status == ConditionStatus::fail; });
  }
  /// Exponent the measured decay is compared against.
  double net() const { return rho - growth_offset; }
};

namespace detail {

/// a / b with the conventions 1/0 = inf and 0/0 = inf.
inline double ratio(double a, double b) {
  if (b == 0.0) return kInf;
  return a / b;
}

inline Condition check(std::string name, bool ok) {
  return {std::move(name), ok ? ConditionStatus::pass : ConditionStatus::fail};
}

inline void finish(RatePrediction& p, double rho) {
  if (p.applicable()) p.rho = rho;
}

inline void nonneg_conditions(RatePrediction& p, double alpha, double beta, double sigma, double tau) {
  p.conditions.push_back(check("alpha, beta, sigma, tau >= 0",
                               alpha >= 0 && beta >= 0 && sigma >= 0 && tau >= 0));
}

/// Shared shape: min((sigma+1)/alpha - 1, (tau - 1/r)/beta - 1), open in both branches.
inline RatePrediction smoothing_rate(double alpha, double beta, double sigma, double tau,
                                     double inv_r, std::string source) {
  RatePrediction p;
  p.source = std::move(source);
  p.inv_r = inv_r;
  p.strict = true;
  nonneg_conditions(p, alpha, beta, sigma, tau);
  p.conditions.push_back(check("sigma > alpha - 1", sigma > alpha - 1.0));
  p.conditions.push_back(check("tau > beta + 1/r", tau > beta + inv_r));
  finish(p, std::min(ratio(sigma + 1.0, alpha) - 1.0, ratio(tau - inv_r, beta) - 1.0));
  return p;
}

/// Hilbert-type refinement: tau >= beta allowed and the beta branch is attained.
inline RatePrediction hilbert_rate(double alpha, double beta, double sigma, double tau,
                                   std::string source) {
  RatePrediction p;
  p.source = std::move(source);
  p.inv_r = 0.0;
  nonneg_conditions(p, alpha, beta, sigma, tau);
  p.conditions.push_back(check("sigma > alpha - 1", sigma > alpha - 1.0));
  p.conditions.push_back(check("tau >= beta", tau >= beta));
  const double a = ratio(sigma + 1.0, alpha) - 1.0;
  const double b = ratio(tau, beta) - 1.0;
  p.strict = a <= b;
  finish(p, std::min(a, b));
  return p;
}

}  // namespace detail

inline RatePrediction predict_rate_general(double alpha, double beta, double sigma, double tau) {
  RatePrediction p = detail::smoothing_rate(alpha, beta, sigma, tau, 1.0, "general");
  p.conditions.back().name = "tau > beta + 1";
  return p;
}

/// Fourier type p: 1/r = 2/p - 1; p = 2 uses the Hilbert refinement.
inline RatePrediction predict_rate_fourier_type(double alpha, double beta, double sigma, double tau,
                                                const GeometryDescriptor& g) {
  g.validate();
  const double p = g.fourier_type;
  if (p == 2.0) return detail::hilbert_rate(alpha, beta, sigma, tau, "hilbert");
  return detail::smoothing_rate(alpha, beta, sigma, tau, 2.0 / p - 1.0, "fourier-type");
}

/// Type p / cotype q with R-resolvent growth (asserted, never verified): 1/r = 1/p - 1/q.
/// The lattice variant also admits tau = beta + 1/r with an attained beta branch.
inline RatePrediction predict_rate_type_cotype(double alpha, double beta, double sigma, double tau,
                                               const GeometryDescriptor& g) {
  g.validate();
  if (!g.r_resolvent_growth_asserted) {
    RatePrediction p;
    p.source = "type-cotype";
    p.conditions.push_back({"R-boundedness not asserted", ConditionStatus::fail});
    return p;
  }
  const Condition asserted{"R-resolvent growth", ConditionStatus::asserted};
  if (g.type == 2.0 && g.cotype == 2.0) {
    RatePrediction p = detail::hilbert_rate(alpha, beta, sigma, tau, "type-cotype-hilbert");
    p.conditions.insert(p.conditions.begin(), asserted);
    return p;
  }
  if (g.lattice) {
    const double inv_r = 1.0 / g.lattice->p_convex - 1.0 / g.lattice->q_concave;
    RatePrediction p;
    p.source = "lattice";
    p.inv_r = inv_r;
    p.conditions.push_back(asserted);
    detail::nonneg_conditions(p, alpha, beta, sigma, tau);
    p.conditions.push_back(detail::check("sigma > alpha - 1", sigma > alpha - 1.0));
    p.conditions.push_back(detail::check("tau >= beta + 1/r", tau >= beta + inv_r));
    const double a = detail::ratio(sigma + 1.0, alpha) - 1.0;
    const double b = detail::ratio(tau - inv_r, beta) - 1.0;
    p.strict = a <= b;
    detail::finish(p, std::min(a, b));
    return p;
  }
  RatePrediction p = detail::smoothing_rate(alpha, beta, sigma, tau, 1.0 / g.type - 1.0 / g.cotype,
                                            "type-cotype");
  p.conditions.insert(p.conditions.begin(), asserted);
  return p;
}

/// Asymptotically analytic semigroups with resolvent growth (alpha, 0); tau plays no role.
inline RatePrediction predict_rate_asymptotically_analytic(double alpha, double sigma) {
  RatePrediction p;
  p.source = "asymptotically-analytic";
  p.strict = true;
  p.conditions.push_back({"asymptotically analytic", ConditionStatus::asserted});
  p.conditions.push_back(detail::check("alpha, sigma >= 0", alpha >= 0 && sigma >= 0));
  p.conditions.push_back(detail::check("sigma > alpha - 1", sigma > alpha - 1.0));
  detail::finish(p, detail::ratio(sigma + 1.0, alpha) - 1.0);
  return p;
}

/// Candidates that account for growth t^mu of ||T(t)|| on X.
struct GrowthAwarePrediction {
  RatePrediction interpolated;            // rho = min(sigma/alpha, tau/beta), offset mu
  std::optional<RatePrediction> scaling;  // alpha = 0: rho = tau/beta with a log factor, offset mu
  std::optional<RatePrediction> hilbert;  // optional comparison candidate
  /// Source of the first candidate attaining the largest net exponent.
  std::string stronger;
  const RatePrediction& best() const {
    if (hilbert && stronger == hilbert->source) return *hilbert;
    if (scaling && stronger == scaling->source) return *scaling;
    return interpolated;
  }
};

inline GrowthAwarePrediction predict_rate_growth_aware(double alpha, double beta, double sigma,
                                                       double tau, double mu,
                                                       const GeometryDescriptor* compare = nullptr) {
  GrowthAwarePrediction out;
  auto& c = out.interpolated;
  c.source = "growth-aware";
  c.strict = true;
  detail::nonneg_conditions(c, alpha, beta, sigma, tau);
  c.conditions.push_back(detail::check("mu >= 0", mu >= 0));
  c.growth_offset = mu;
  // 0/0 = inf applies to each ratio; the guarantee needs a positive finite-or-infinite min.
  detail::finish(c, std::min(detail::ratio(sigma, alpha), detail::ratio(tau, beta)));

  std::vector<const RatePrediction*> cands{&c};
  if (alpha == 0.0) {
    RatePrediction s;
    s.source = "scaling";
    s.strict = false;
    s.log_factor = true;
    detail::nonneg_conditions(s, alpha, beta, sigma, tau);
    s.conditions.push_back(detail::check("mu >= 0", mu >= 0));
    s.conditions.push_back(detail::check("alpha = 0", true));
    s.growth_offset = mu;
    detail::finish(s, detail::ratio(tau, beta));
    out.scaling = s;
  }
  if (compare && compare->hilbert) out.hilbert = predict_rate_fourier_type(alpha, beta, sigma, tau, *compare);
  if (out.scaling) cands.push_back(&*out.scaling);
  if (out.hilbert) cands.push_back(&*out.hilbert);

  double best = -kInf;
  for (const auto* p : cands) {
    if (p->applicable() && p->net() > best) {
      best = p->net();
      out.stronger = p->source;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Interpolation of rates

struct RatePoint {
  double sigma = 0.0;
  double tau = 0.0;
  double rho = 0.0;
};

/// theta in [0,1]: convex combination (needs sigma1 >= sigma2, tau1 >= tau2).
/// theta >= 1: rho1 * theta at (theta sigma1, theta tau1).
inline RatePoint interpolate_rates(const RatePoint& r1, const RatePoint& r2, double theta) {
  if (!(theta >= 0.0)) throw DomainError("theta must be >= 0");
  auto scale = [](double th, double v) { return th == 0.0 ? 0.0 : th * v; };
  if (theta > 1.0) return {theta * r1.sigma, theta * r1.tau, scale(theta, r1.rho)};
  if (r1.sigma < r2.sigma || r1.tau < r2.tau)
    throw DomainError("interpolation needs sigma1 >= sigma2 and tau1 >= tau2");
  return {theta * r1.sigma + (1 - theta) * r2.sigma, theta * r1.tau + (1 - theta) * r2.tau,
          scale(theta, r1.rho) + scale(1 - theta, r2.rho)};
}

// ---------------------------------------------------------------------------
// Exponential stability

struct SmoothnessIndex {
  double value = 0.0;
  std::string source;
};

/// Smallest fractional-domain index at which the spectral bound controls the growth bound.
inline SmoothnessIndex exponential_smoothness_index(const GeometryDescriptor& g) {
  g.validate();
  if (g.hilbert) return {0.0, "hilbert"};
  const double pc = g.fourier_type == 1.0 ? kInf : g.fourier_type / (g.fourier_type - 1.0);
  SmoothnessIndex best{1.0 / g.fourier_type - 1.0 / pc, "fourier-type"};
  auto consider = [&](double v, const char* src) {
    if (v < best.value) best = {v, src};
  };
  if (g.r_resolvent_growth_asserted) consider(1.0 / g.type - 1.0 / g.cotype, "type-cotype");
  consider(2.0 / g.type - 2.0 / g.cotype, "type-cotype-unconditional");
  if (g.positive_semigroup && g.lattice)
    consider(1.0 / g.lattice->p_convex - 1.0 / g.lattice->q_concave, "lattice-positive");
  return best;
}

// ---------------------------------------------------------------------------
// Measurements

enum class DecayClass { decaying, bounded, growing, super_polynomial_decay, super_polynomial_growth };

inline std::string to_string(DecayClass c) {
  switch (c) {
    case DecayClass::decaying: return "decaying";
    case DecayClass::bounded: return "bounded";
    case DecayClass::growing: return "growing";
    case DecayClass::super_polynomial_decay: return "super-polynomial-decay";
    case DecayClass::super_polynomial_growth: return "super-polynomial-growth";
  }
  return "?";
}

struct DecayMeasurement {
  double sigma = 0.0;
  double tau = 0.0;
  bool integer_power = false;  // norms of T(t) A^sigma instead of T(t) Phi^sigma_tau(A)
  LogGrid t_grid;
  std::vector<double> norms;
  PowerFit fit;
  double rho_hat = 0.0;  // -fit.exponent, or +-inf for super-polynomial behaviour
  DecayClass classification = DecayClass::bounded;
  std::optional<double> growth_mu_hat;
  bool edge_dominated = false;
};

struct MeasureOptions {
  std::optional<FitWindow> window;
  bool integer_power = false;
  bool measure_growth = false;
  double class_tol = 0.05;
  unsigned threads = 1;
};

namespace detail {

/// Norm of the map at each time; dense models reuse one Phi matrix.
template <typename MakeMap>
std::vector<NormResult> sample_norms(const OperatorModel& model, const std::vector<double>& times,
                                     MakeMap&& make, unsigned threads,
                                     std::optional<std::pair<double, double>> dense_phi = std::nullopt) {
  std::vector<NormResult> out(times.size());
  const auto* d = std::get_if<DenseModel>(&model.impl());
  CMatrix phi;
  if (d && dense_phi) phi = d->phi(dense_phi->first, dense_phi->second);
  parallel_for(times.size(), threads, [&](std::size_t i) {
    if (d && dense_phi)
      out[i] = {spectral_norm(d->semigroup(times[i]) * phi), false};
    else
      out[i] = operator_norm(model, make(times[i]));
  });
  return out;
}

inline double slope(const std::vector<double>& t, const std::vector<double>& v, std::size_t a,
                    std::size_t b) {
  std::vector<double> lx, ly;
  for (std::size_t i = a; i < b; ++i) {
    lx.push_back(std::log(t[i]));
    ly.push_back(std::log(v[i]));
  }
  return least_squares_line(lx, ly).slope;
}

}  // namespace detail

/// Fits ||T(t)||_{X^sigma_tau -> X} over the grid and classifies the behaviour.
inline DecayMeasurement measure_decay(const OperatorModel& model, double sigma, double tau,
                                      const LogGrid& t_grid, const MeasureOptions& opt = {}) {
  if (sigma < 0 || tau < 0) throw DomainError("sigma and tau must be >= 0");
  if (sigma > 0 && !model.metadata().injective)
    throw DomainError("sigma > 0 needs an injective model");
  DecayMeasurement m;
  m.sigma = sigma;
  m.tau = tau;
  m.t_grid = t_grid;
  m.integer_power = opt.integer_power;
  std::vector<NormResult> raw;
  if (opt.integer_power) {
    if (sigma != std::floor(sigma)) throw DomainError("integer-power mode needs integer sigma");
    raw = detail::sample_norms(
        model, t_grid.nodes, [&](double t) { return NormMap{PowerSemigroupMap{t, int(sigma)}}; },
        opt.threads);
  } else {
    raw = detail::sample_norms(
        model, t_grid.nodes, [&](double t) { return NormMap{FractionalSemigroupMap{t, sigma, tau}}; },
        opt.threads, std::pair{sigma, tau});
  }
  for (const auto& r : raw) {
    m.norms.push_back(r.value);
    m.edge_dominated = m.edge_dominated || r.edge_dominated;
  }
  const FitWindow w = opt.window.value_or(default_window(t_grid.count()));
  if (w.last > t_grid.count() || w.size() < 3)
    throw InsufficientDataError("decay fit window holds " + std::to_string(w.size()) + " points");
  m.fit.window = w;

  bool underflow = false;
  for (std::size_t i = w.first; i < w.last; ++i)
    if (!(m.norms[i] > 1e-250)) underflow = true;
  if (underflow) {
    m.classification = DecayClass::super_polynomial_decay;
    m.rho_hat = kInf;
    m.fit.exponent = -kInf;
    m.fit.constant = 0.0;
  } else {
    m.fit = fit_power_law(t_grid, m.norms, w);
    m.rho_hat = -m.fit.exponent;
    const std::size_t mid = w.first + w.size() / 2;
    if (w.size() >= 6) {
      const double early = detail::slope(t_grid.nodes, m.norms, w.first, mid);
      const double late = detail::slope(t_grid.nodes, m.norms, mid, w.last);
      const double gap = std::max(1.0, 0.5 * std::abs(early));
      if (late < early - gap) {
        m.classification = DecayClass::super_polynomial_decay;
        m.rho_hat = kInf;
      } else if (late > early + gap) {
        m.classification = DecayClass::super_polynomial_growth;
        m.rho_hat = -kInf;
      }
    }
    if (std::isfinite(m.rho_hat)) {
      m.classification = m.rho_hat > opt.class_tol    ? DecayClass::decaying
                         : m.rho_hat < -opt.class_tol ? DecayClass::growing
                                                      : DecayClass::bounded;
    }
  }

  if (opt.measure_growth) {
    const auto g = detail::sample_norms(
        model, t_grid.nodes, [](double t) { return NormMap{SemigroupMap{t}}; }, opt.threads);
    std::vector<double> v;
    for (const auto& r : g) v.push_back(r.value);
    m.growth_mu_hat = fit_power_law(t_grid, v, w).exponent;
  }
  return m;
}

/// Semi-log rate of ||T(t) Phi^sigma_tau(A)|| over `times` (negative when decaying).
inline ExponentialFit measure_exponential_rate(const OperatorModel& model, double sigma, double tau,
                                               const std::vector<double>& times, unsigned threads = 1) {
  const auto raw = detail::sample_norms(
      model, times, [&](double t) { return NormMap{FractionalSemigroupMap{t, sigma, tau}}; }, threads,
      std::pair{sigma, tau});
  std::vector<double> v;
  for (const auto& r : raw) v.push_back(r.value);
  return fit_exponential_rate(times, v);
}

/// Adds the bounded-semigroup hypothesis, judged from a fitted growth exponent.
inline RatePrediction require_bounded(RatePrediction p, double mu_hat, double tol) {
  p.conditions.push_back(detail::check("semigroup bounded", mu_hat <= tol));
  return p;
}

// ---------------------------------------------------------------------------
// Consistency

enum class Verdict { pass, fail, not_applicable };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "PASS";
    case Verdict::fail: return "FAIL";
    case Verdict::not_applicable: return "N/A";
  }
  return "?";
}

struct ConsistencyReport {
  Verdict verdict = Verdict::not_applicable;
  double measured = 0.0;
  double predicted = 0.0;
  double margin = 0.0;
  std::string source;
};

/// Predictions bound norms from above, so they bound the decay exponent from below:
/// PASS iff measured rho_hat >= predicted - tol.
inline ConsistencyReport check_consistency(const DecayMeasurement& m, const RatePrediction& p,
                                           double tol) {
  ConsistencyReport r;
  r.source = p.source;
  r.measured = m.rho_hat;
  if (!p.applicable() || std::isnan(p.rho)) return r;
  r.predicted = p.net();
  if (m.classification == DecayClass::super_polynomial_decay) {
    r.verdict = Verdict::pass;
    r.margin = kInf;
    return r;
  }
  if (std::isinf(r.predicted) && r.predicted > 0) {
    r.verdict = Verdict::fail;
    r.margin = -kInf;
    return r;
  }
  r.margin = r.measured - r.predicted;
  r.verdict = r.margin >= -tol ? Verdict::pass : Verdict::fail;
  return r;
}

}  // namespace semistab
