#pragma once

// Resolvent probing along vertical lines, the fitted growth pair (alpha, beta),
// the sectoriality constant, and spectral-bound estimators.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semistab/errors.hpp"
#include "semistab/numcore.hpp"
#include "semistab/operators.hpp"
#include "semistab/parallel.hpp"

namespace semistab {

enum class ProbeStatus { ok, near_singular, failed };

inline std::string to_string(ProbeStatus s) {
  switch (s) {
    case ProbeStatus::ok: return "ok";
    case ProbeStatus::near_singular: return "near-singular";
    case ProbeStatus::failed: return "failed";
  }
  return "?";
}

/// ||(lambda + A)^{-1}|| at lambda = eta + i xi.
struct ResolventProbe {
  double xi = 0.0;
  double eta = 0.0;
  double norm = 0.0;
  ProbeStatus status = ProbeStatus::ok;
  bool edge_dominated = false;
  std::string message;
};

/// Probes at +xi_i and -xi_i for every node of a positive grid.
struct ProbeTable {
  LogGrid xi;
  double eta = 0.0;
  std::vector<ResolventProbe> positive;
  std::vector<ResolventProbe> negative;
};

struct ProbeOptions {
  /// Also evaluate at spectral landmarks falling between consecutive grid nodes and
  /// keep the larger value, so isolated resonances are not stepped over.
  bool landmarks = true;
  unsigned threads = 1;
};

namespace detail {

inline double shifted_resolvent_norm(const OperatorModel& model, cplx lambda, bool* edge = nullptr) {
  const NormResult r = operator_norm(model, ResolventMap{-lambda});
  if (edge) *edge = r.edge_dominated;
  return r.value;
}

inline ResolventProbe probe_cell(const OperatorModel& model, double xi, double eta,
                                 const std::vector<double>& marks) {
  ResolventProbe p;
  p.xi = xi;
  p.eta = eta;
  try {
    bool edge = false;
    p.norm = shifted_resolvent_norm(model, cplx(eta, xi), &edge);
    p.edge_dominated = edge;
    for (double l : marks) {
      bool e2 = false;
      const double v = shifted_resolvent_norm(model, cplx(eta, l), &e2);
      if (v > p.norm) {
        p.norm = v;
        p.edge_dominated = e2;
      }
    }
  } catch (const NearSingularityError& e) {
    p.status = ProbeStatus::near_singular;
    p.norm = kInf;
    p.message = e.what();
  } catch (const Error& e) {
    p.status = ProbeStatus::failed;
    p.norm = std::nan("");
    p.message = e.what();
  }
  return p;
}

/// Landmarks l with lo < l <= hi (lo < hi) or the single point l == hi when lo == hi.
inline std::vector<double> marks_in(const std::vector<double>& sorted, double lo, double hi) {
  std::vector<double> out;
  auto it = std::upper_bound(sorted.begin(), sorted.end(), lo);
  for (; it != sorted.end() && *it <= hi; ++it)
    if (*it != hi) out.push_back(*it);
  return out;
}

}  // namespace detail

inline ProbeTable probe_resolvent_norms(const OperatorModel& model, const LogGrid& xi, double eta,
                                        const ProbeOptions& opt = {}) {
  if (!(eta >= 0.0)) throw DomainError("probe abscissa eta must be >= 0");
  ProbeTable table;
  table.xi = xi;
  table.eta = eta;
  const std::size_t n = xi.count();
  table.positive.resize(n);
  table.negative.resize(n);
  const std::vector<double> marks = opt.landmarks ? model.spectral_landmarks() : std::vector<double>{};
  parallel_for(2 * n, opt.threads, [&](std::size_t k) {
    const std::size_t i = k / 2;
    const double lo = i == 0 ? xi[0] : xi[i - 1];
    const double hi = xi[i];
    if (k % 2 == 0) {
      table.positive[i] = detail::probe_cell(model, hi, eta, detail::marks_in(marks, lo, hi));
    } else {
      // mirror cell [-hi, -lo)
      std::vector<double> neg_marks;
      for (double l : marks)
        if (l >= -hi && l < -lo) neg_marks.push_back(l);
      table.negative[i] = detail::probe_cell(model, -hi, eta, neg_marks);
    }
  });
  return table;
}

struct ResolventGrowthProfile {
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  double M_constant = 0.0;
  PowerFit low_fit;
  PowerFit high_fit;
  double split = 1.0;
  bool edge_dominated = false;
  /// Results come from finitely many probes; they are never a certificate.
  std::string label = "probed";
};

struct GrowthFitOptions {
  double split = 1.0;
  double snap = 0.05;
  std::size_t min_probes = 8;
};

/// max over +-xi of the probed norms, per grid node; NaN where neither side is usable.
inline std::vector<double> symmetric_profile(const ProbeTable& t) {
  std::vector<double> v(t.xi.count(), std::nan(""));
  for (std::size_t i = 0; i < v.size(); ++i) {
    double best = -1.0;
    for (const auto* p : {&t.positive[i], &t.negative[i]})
      if (p->status == ProbeStatus::ok) best = std::max(best, p->norm);
    if (best > 0.0) v[i] = best;
  }
  return v;
}

inline ResolventGrowthProfile fit_growth_profile(const ProbeTable& table,
                                                 const GrowthFitOptions& opt = {}) {
  const auto prof = symmetric_profile(table);
  std::vector<double> lx_lo, lv_lo, lx_hi, lv_hi;
  for (std::size_t i = 0; i < prof.size(); ++i) {
    if (std::isnan(prof[i])) continue;
    if (table.xi[i] <= opt.split) {
      lx_lo.push_back(table.xi[i]);
      lv_lo.push_back(prof[i]);
    }
    if (table.xi[i] >= opt.split) {
      lx_hi.push_back(table.xi[i]);
      lv_hi.push_back(prof[i]);
    }
  }
  if (lx_lo.size() < opt.min_probes || lx_hi.size() < opt.min_probes)
    throw InsufficientDataError("growth fit needs >= " + std::to_string(opt.min_probes) +
                                " usable probes on each side of |xi| = " +
                                std::to_string(opt.split) + " (have " +
                                std::to_string(lx_lo.size()) + " and " +
                                std::to_string(lx_hi.size()) + ")");
  auto fit_side = [](const std::vector<double>& x, const std::vector<double>& v) {
    LogGrid g;
    g.start = x.front();
    g.stop = x.back();
    g.nodes = x;
    return fit_power_law(g, v, trimmed(FitWindow{0, x.size()}));
  };
  ResolventGrowthProfile out;
  out.split = opt.split;
  out.low_fit = fit_side(lx_lo, lv_lo);
  out.high_fit = fit_side(lx_hi, lv_hi);
  auto clamp_snap = [&](double s) { return (s <= 0.0 || std::abs(s) < opt.snap) ? 0.0 : s; };
  out.alpha_hat = clamp_snap(-out.low_fit.exponent);
  out.beta_hat = clamp_snap(out.high_fit.exponent);
  double M = 0.0;
  for (const auto* side : {&table.positive, &table.negative})
    for (const auto& p : *side) {
      if (p.status != ProbeStatus::ok) continue;
      const double lam = std::abs(cplx(p.eta, p.xi));
      M = std::max(M, std::pow(lam, out.alpha_hat) *
                          std::pow(1.0 + lam, -out.alpha_hat - out.beta_hat) * p.norm);
      out.edge_dominated = out.edge_dominated || p.edge_dominated;
    }
  out.M_constant = M;
  return out;
}

struct SectorialityEstimate {
  double M = 0.0;
  double angle = 0.0;  // pi - arcsin(1/M)
  bool edge_dominated = false;
};

/// sup over the grid of ||lambda (lambda + A)^{-1}||, lambda > 0.
inline SectorialityEstimate sectoriality_constant(const OperatorModel& model, const LogGrid& lambdas) {
  SectorialityEstimate out;
  for (double l : lambdas.nodes) {
    NormResult r;
    try {
      r = operator_norm(model, ResolventMap{cplx(-l, 0.0)});
    } catch (const NearSingularityError& e) {
      throw DomainError("lambda = " + std::to_string(l) + " is in the spectrum of -A");
    }
    if (l * r.value > out.M) {
      out.M = l * r.value;
      out.edge_dominated = r.edge_dominated;
    }
  }
  out.angle = kPi - std::asin(1.0 / std::max(1.0, out.M));
  return out;
}

struct SpectralBoundsOptions {
  std::vector<double> betas = {0.0, 1.0};
  LogGrid xi = geometric_grid(1e-2, 1e3, 24);
  double tolerance = 1e-2;
  /// Weighted resolvent norms above this count as unbounded.
  double threshold = 1e8;
  bool require_exact_spectrum = false;
};

struct SpectralBounds {
  std::optional<double> s_minus_A;
  std::map<double, double> s_beta;
  double omega0_hat = 0.0;
  ExponentialFit omega_fit;
};

namespace detail {

inline std::optional<double> exact_spectral_bound(const OperatorModel& model) {
  if (const auto* d = std::get_if<DenseModel>(&model.impl())) {
    return -d->eigenvalues().real().minCoeff();
  }
  if (const auto* j = std::get_if<JordanSumModel>(&model.impl())) return -j->gamma();
  return std::nullopt;
}

/// sup over the line Re lambda = omega of (1+|lambda|)^{-beta} ||(lambda + A)^{-1}||.
inline double line_sup(const OperatorModel& model, double omega, double beta,
                       const std::vector<double>& xis) {
  double best = 0.0;
  for (double xi : xis) {
    const cplx lam(omega, xi);
    double v;
    try {
      v = shifted_resolvent_norm(model, lam);
    } catch (const NearSingularityError&) {
      return kInf;
    }
    best = std::max(best, std::pow(1.0 + std::abs(lam), -beta) * v);
  }
  return best;
}

}  // namespace detail

/// s(-A) (exact where the spectrum is explicit), the probed abscissas s_beta(-A),
/// and the semi-log growth rate of ||T(t)|| over `times`.
inline SpectralBounds spectral_bounds(const OperatorModel& model, const std::vector<double>& times,
                                      const SpectralBoundsOptions& opt = {}) {
  SpectralBounds out;
  out.s_minus_A = detail::exact_spectral_bound(model);
  if (!out.s_minus_A && opt.require_exact_spectrum)
    throw UnsupportedError("exact spectrum is not available for " + to_string(model.kind()) +
                           " models");
  if (times.size() >= 3) {
    std::vector<double> norms;
    for (double t : times) norms.push_back(operator_norm(model, SemigroupMap{t}).value);
    out.omega_fit = fit_exponential_rate(times, norms);
    out.omega0_hat = out.omega_fit.rate;
  }

  std::vector<double> xis{0.0};
  for (double x : opt.xi.nodes) {
    xis.push_back(x);
    xis.push_back(-x);
  }
  const auto marks = model.spectral_landmarks();
  if (marks.size() <= 4096) xis.insert(xis.end(), marks.begin(), marks.end());

  for (double beta : opt.betas) {
    auto bounded = [&](double w) { return detail::line_sup(model, w, beta, xis) <= opt.threshold; };
    double hi = out.s_minus_A.value_or(0.0) + 1.0;
    double step = 1.0;
    while (!bounded(hi)) {
      hi += step;
      step *= 2;
      if (hi > 1e6) throw DomainError("no bounded vertical line found for s_beta");
    }
    double lo = hi - 1.0;
    step = 1.0;
    while (bounded(lo)) {
      hi = lo;
      lo -= step;
      step *= 2;
      if (lo < -1e6) break;
    }
    while (hi - lo > opt.tolerance) {
      const double mid = 0.5 * (lo + hi);
      (bounded(mid) ? hi : lo) = mid;
    }
    out.s_beta[beta] = hi;
  }
  return out;
}

}  // namespace semistab
