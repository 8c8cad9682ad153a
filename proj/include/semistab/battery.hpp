#pragma once

// The bundled reproduction battery: closed-form identities, the three worked
// operator families, transform identities, multiplier norms, predictor algebra
// and the spectral-bound shadow on random matrices. Each case carries its own
// pinned tolerances and emits report rows.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "semistab/decaylab.hpp"
#include "semistab/fraccalc.hpp"
#include "semistab/multiplier.hpp"
#include "semistab/resolvent.hpp"

namespace semistab {

/// One CSV line; NaN fields print empty.
struct ReportRow {
  std::string case_name;
  std::string t_or_xi;
  double value = std::nan("");
  double fit_exponent = std::nan("");
  double predicted = std::nan("");
  std::string source;
  std::string verdict;
};

struct CaseResult {
  std::string name;
  std::string group;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  std::vector<ReportRow> rows;
};

struct BatteryOptions {
  unsigned threads = 1;
  std::uint64_t seed = 1;
  /// Added to every expected exponent; nonzero values are a mutation check.
  double exponent_shift = 0.0;
};

struct BatteryCase {
  std::string name;
  std::string group;
  std::function<CaseResult(const BatteryOptions&)> run;
};

inline std::string format_number(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s.precision(12);
  s << v;
  return s.str();
}

inline std::string format_complex(cplx z) {
  std::string im = format_number(z.imag());
  if (im.empty() || (im[0] != '-')) im = "+" + im;
  return format_number(z.real()) + im + "i";
}

inline std::string pass_fail(bool ok) { return ok ? "PASS" : "FAIL"; }

namespace battery {

inline CMatrix stable4() {
  CMatrix a(4, 4);
  a << cplx(1.0, 0.5), 0.8, 0.0, 0.2,  //
      0.0, cplx(0.7, -2.0), 0.5, 0.0,  //
      0.3, 0.0, cplx(1.5, 1.0), 0.4,   //
      0.0, 0.1, 0.0, cplx(0.9, 0.0);
  return a;
}

inline OperatorModel sobolev_model() {
  DiagonalSymbolSpec s;
  s.grid = geometric_grid(1.0 + 1e-9, 1e8, 4096);
  return OperatorModel(s);
}

inline double rel(const CMatrix& a, const CMatrix& b) { return (a - b).norm() / b.norm(); }

/// V diag(mu^a (eta+mu)^{-a-b}) V^{-1} x from an eigendecomposition.
inline CMatrix eigen_oracle(const CMatrix& A, double a, double b, double eta, const CMatrix& x) {
  Eigen::ComplexEigenSolver<CMatrix> es(A);
  CVector d(A.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const cplx mu = es.eigenvalues()(i);
    d(i) = std::pow(mu, a) * std::pow(eta + mu, -a - b);
  }
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().inverse() * x;
}

inline CaseResult exp_sum_bounds(const BatteryOptions&) {
  CaseResult r;
  r.pass = true;
  double worst = kInf;
  for (long long m = 1; m <= 500; ++m) {
    const double lv = log_stable_exp_sum(m);
    const double lo = double(m) - 2.0 - 0.25 * std::log(double(m));
    const double hi = double(m) - 0.25 * std::log(double(m));
    const bool ok = lo <= lv && lv <= hi;
    worst = std::min({worst, lv - lo, hi - lv});
    r.pass = r.pass && ok;
    if (m <= 10 || m % 50 == 0 || !ok)
      r.rows.push_back({"exp-sum", std::to_string(m), lv, std::nan(""), hi, "log-domain", pass_fail(ok)});
  }
  r.detail = "m=1..500, smallest log-domain slack " + format_number(worst);
  return r;
}

inline CaseResult contour_identity(const BatteryOptions&) {
  CaseResult r;
  r.pass = true;
  const double phi = kPi / 3;
  double worst = 0.0, worst_final = 0.0;
  int tuples = 0, bad_rate = 0;
  for (double a : {0.0, 0.5, 1.0, 2.0})
    for (double b : {0.5, 1.0, 2.0})
      for (double eta : {0.5, 1.0})
        for (const cplx lam : {cplx(0, 1), cplx(0, 2), cplx(0.5, 1)}) {
          ++tuples;
          const double e = verify_contour_identity(a, b, eta, lam, phi).rel_error;
          worst = std::max(worst, e);
          ContourSpec c;
          c.nodes_per_ray = 128;
          double prev = verify_contour_identity(a, b, eta, lam, phi, c).rel_error;
          bool rate_ok = true;
          while (prev > 1e-10 && c.nodes_per_ray < 8192) {
            c.nodes_per_ray *= 2;
            const double next = verify_contour_identity(a, b, eta, lam, phi, c).rel_error;
            rate_ok = rate_ok && 4.0 * next <= prev;
            prev = next;
          }
          rate_ok = rate_ok && prev <= 1e-10;
          worst_final = std::max(worst_final, prev);
          bad_rate += rate_ok ? 0 : 1;
          const bool ok = e < 1e-6 && rate_ok;
          r.pass = r.pass && ok;
          std::ostringstream name;
          name << "alpha=" << a << ";beta=" << b << ";eta=" << eta;
          r.rows.push_back({name.str(), format_complex(lam), e, std::nan(""), 1e-6, "contour", pass_fail(ok)});
        }
  r.detail = std::to_string(tuples) + " tuples, max rel error " + format_number(worst) +
             ", doubling failures " + std::to_string(bad_rate) + ", converged error <= " +
             format_number(worst_final);
  return r;
}

inline CaseResult fractional_oracle(const BatteryOptions&) {
  CaseResult r;
  const std::vector<cplx> dvals{0.3, cplx(1.0, 2.0), cplx(5.0, -4.0), 40.0};
  const OperatorModel diag(DiagonalSymbolSpec::from_values(dvals));
  CMatrix D = CMatrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) D(i, i) = dvals[std::size_t(i)];
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  CMatrix A(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) A(i, j) = cplx(g(rng), g(rng)) * 0.3;
  A += 2.0 * CMatrix::Identity(6, 6);
  const auto dense = OperatorModel::dense(A);
  double oracle = 0.0;
  for (const FractionalIndex idx : {FractionalIndex{0.5, 0.5, 1.0}, FractionalIndex{1.3, 0.7, 0.5},
                                    FractionalIndex{0.0, 2.0, 1.0}, FractionalIndex{2.0, 0.25, 1.0}}) {
    std::ostringstream name;
    name << "alpha=" << idx.alpha << ";beta=" << idx.beta << ";eta=" << idx.eta;
    const CMatrix xd = CMatrix::Ones(4, 1), x = CMatrix::Ones(6, 1);
    const double ed = rel(contour_fractional_apply(diag, idx, xd).value,
                          eigen_oracle(D, idx.alpha, idx.beta, idx.eta, xd));
    const double ex = rel(contour_fractional_apply(dense, idx, x).value,
                          eigen_oracle(A, idx.alpha, idx.beta, idx.eta, x));
    oracle = std::max({oracle, ed, ex});
    r.rows.push_back({"diagonal;" + name.str(), "", ed, std::nan(""), 1e-8, "eigen-oracle", pass_fail(ed < 1e-8)});
    r.rows.push_back({"dense;" + name.str(), "", ex, std::nan(""), 1e-8, "eigen-oracle", pass_fail(ex < 1e-8)});
  }

  std::vector<OperatorModel> models;
  models.push_back(dense);
  CMatrix J(3, 3);
  J << 1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0;
  models.push_back(OperatorModel::dense(J));
  DiagonalSymbolSpec ds;
  ds.grid = geometric_grid(1.01, 1e4, 50);
  models.emplace_back(ds);
  models.emplace_back(JordanSumSpec{0.5, 0.5, 30});
  const double idx[][4] = {{0.5, 0.25, 0.75, 1.0}, {1.0, 0.0, 0.3, 2.0}, {0.2, 1.7, 0.0, 0.5}};
  double law = 0.0;
  for (std::size_t k = 0; k < models.size(); ++k) {
    const auto& m = models[k];
    const CMatrix x = CMatrix::Ones(m.dimension(), 1);
    double worst = 0.0;
    for (const auto& p : idx) {
      const CMatrix lhs = phi_apply(m, p[0], p[1], phi_apply(m, p[2], p[3], x));
      worst = std::max(worst, rel(lhs, phi_apply(m, p[0] + p[2], p[1] + p[3], x)));
    }
    law = std::max(law, worst);
    r.rows.push_back({"semigroup-law;" + to_string(m.kind()) + ";" + std::to_string(k), "", worst,
                      std::nan(""), 1e-8, "phi-law", pass_fail(worst < 1e-8)});
  }
  r.pass = oracle < 1e-8 && law < 1e-8;
  r.detail = "oracle max rel error " + format_number(oracle) + ", semigroup law max rel error " +
             format_number(law);
  return r;
}

inline CaseResult sobolev_example(const BatteryOptions& opt) {
  CaseResult r;
  const double a = 1.0, b = 0.5;
  const auto m = sobolev_model();
  const auto prof = fit_growth_profile(
      probe_resolvent_norms(m, geometric_grid(1e-2, 1e3, 64), 0.0, {true, opt.threads}));
  const double beta_expect = (b - 1.0 + 2.0 * a) / b + opt.exponent_shift;
  bool ok = std::abs(prof.beta_hat - beta_expect) <= 0.1;
  r.rows.push_back({"resolvent-growth", "", prof.M_constant, prof.beta_hat, beta_expect, "probe",
                    pass_fail(ok)});
  std::ostringstream d;
  d << "beta_hat " << format_number(prof.beta_hat);
  const auto h = GeometryDescriptor::hilbert_space();
  const auto grid = geometric_grid(10, 1e5, 41);
  int checked = 0;
  for (double tau : {0.0, 1.0, 2.0}) {
    MeasureOptions mo;
    mo.measure_growth = true;
    mo.threads = opt.threads;
    const auto meas = measure_decay(m, 0, tau, grid, mo);
    const double expect = (1.0 - b + b * tau) / a - 1.0 + opt.exponent_shift;
    const bool fit_ok = std::abs(meas.rho_hat - expect) <= 0.05;
    ok = ok && fit_ok;
    const std::string c = "tau=" + format_number(tau);
    r.rows.push_back({c, "", meas.rho_hat, meas.fit.exponent, expect, "closed-form", pass_fail(fit_ok)});
    const double mu = std::max(0.0, meas.growth_mu_hat.value_or(0.0));
    const auto ga = predict_rate_growth_aware(0, prof.beta_hat, 0, tau, mu, &h);
    std::vector<RatePrediction> preds{ga.interpolated};
    if (ga.scaling) preds.push_back(*ga.scaling);
    preds.push_back(require_bounded(predict_rate_fourier_type(0, prof.beta_hat, 0, tau, h), mu, 0.05));
    for (const auto& p : preds) {
      const auto rep = check_consistency(meas, p, 0.05);
      if (rep.verdict == Verdict::not_applicable) continue;
      ++checked;
      ok = ok && rep.verdict == Verdict::pass;
      r.rows.push_back({c, "", rep.measured, meas.fit.exponent, rep.predicted, p.source, to_string(rep.verdict)});
    }
    d << ", rho_hat(" << tau << ") " << format_number(meas.rho_hat);
  }
  d << ", " << checked << " applicable predictions";
  r.pass = ok;
  r.detail = d.str();
  return r;
}

inline CaseResult operator_matrix_example(const BatteryOptions& opt) {
  CaseResult r;
  const int n = 3;
  const OperatorModel m(OperatorMatrixSpec{n});
  MeasureOptions mo;
  mo.integer_power = true;
  mo.threads = opt.threads;
  const auto grid = geometric_grid(10, 1e4, 25);
  bool ok = true;
  std::ostringstream d;
  d << "growth exponents";
  for (int k = 0; k <= n - 1; ++k) {
    const auto meas = measure_decay(m, k, 0, grid, mo);
    const double expect = double(n - 1 - k) + opt.exponent_shift;
    bool ok_k = std::abs(meas.fit.exponent - expect) <= 0.05;
    if (k == n - 1) ok_k = ok_k && meas.classification == DecayClass::bounded;
    ok = ok && ok_k;
    for (std::size_t i = 0; i < grid.count(); ++i)
      r.rows.push_back({"power=" + std::to_string(k), format_number(grid[i]), meas.norms[i], meas.fit.exponent,
                        expect, to_string(meas.classification), pass_fail(ok_k)});
    d << " " << format_number(meas.fit.exponent);
    if (k == n - 1) d << " (" << to_string(meas.classification) << ")";
  }
  r.pass = ok;
  r.detail = d.str();
  return r;
}

inline CaseResult jordan_sum_example(const BatteryOptions& opt) {
  CaseResult r;
  std::ostringstream d;
  const OperatorModel j1(JordanSumSpec{0.5, 0.5, 10000});
  const auto prof = fit_growth_profile(
      probe_resolvent_norms(j1, geometric_grid(1e-2, 1e4, 64), 0.0, {true, opt.threads}));
  const double beta_expect = 1.0 + opt.exponent_shift;
  const bool beta_ok = std::abs(prof.beta_hat - beta_expect) <= 0.1;
  r.rows.push_back({"gamma=0.5;delta=0.5", "", prof.M_constant, prof.beta_hat, beta_expect, "probe",
                    pass_fail(beta_ok)});
  d << "beta_hat " << format_number(prof.beta_hat);

  const double gamma = 0.5, delta = 0.9;
  const OperatorModel j2(JordanSumSpec{gamma, delta, 10000});
  const auto& jm = std::get<JordanSumModel>(j2.impl());
  const auto grid = geometric_grid(5, double(jm.max_block_size() - 1), 16);
  std::vector<double> norms(grid.count());
  parallel_for(grid.count(), opt.threads,
               [&](std::size_t i) { norms[i] = operator_norm(j2, SemigroupMap{grid[i]}).value; });
  const double rate = fit_exponential_rate(grid.nodes, norms).rate;
  const double rate_expect = 1.0 - gamma + opt.exponent_shift;
  const bool rate_ok = std::abs(rate - rate_expect) <= 0.05;
  for (std::size_t i = 0; i < grid.count(); ++i)
    r.rows.push_back({"growth-bound", format_number(grid[i]), norms[i], rate, rate_expect, "semi-log",
                      pass_fail(rate_ok)});
  d << ", growth rate " << format_number(rate);

  MeasureOptions mo;
  mo.threads = opt.threads;
  auto band = [](const DecayMeasurement& m) {
    const auto [lo, hi] = std::minmax_element(m.norms.begin(), m.norms.end());
    return *hi / *lo;
  };
  const double beta0 = std::log(1 / gamma) / std::log(1 / delta);
  const auto full = measure_decay(j2, 0, beta0, grid, mo);
  const bool band_ok = band(full) <= 10.0;
  r.rows.push_back({"band;tau=" + format_number(beta0), "", band(full), full.fit.exponent, 10.0, "band",
                    pass_fail(band_ok)});
  const double threshold = (1 - gamma) / std::log(1 / delta);
  const auto at = measure_decay(j2, 0, threshold, grid, mo);
  r.rows.push_back({"band;tau=" + format_number(threshold), "", band(at), at.fit.exponent, std::nan(""),
                    "band", "N/A"});
  const auto half = measure_decay(j2, 0, threshold / 2, grid, mo);
  const double growth = half.norms.back() / half.norms.front();
  const bool growth_ok = growth >= 10.0;
  r.rows.push_back({"growth;tau=" + format_number(threshold / 2), "", growth, half.fit.exponent, 10.0,
                    to_string(half.classification), pass_fail(growth_ok)});
  d << ", band at tau=beta0 " << format_number(band(full)) << " (at the growth threshold "
    << format_number(band(at)) << "), growth at half threshold " << format_number(growth);
  r.pass = beta_ok && rate_ok && band_ok && growth_ok;
  r.detail = d.str();
  return r;
}

inline CaseResult laplace_identity(const BatteryOptions& opt) {
  CaseResult r;
  const auto model = OperatorModel::dense(stable4());
  CMatrix x(4, 1);
  x << 1.0, -1.0, cplx(0.0, 2.0), 0.5;
  bool ok = true;
  std::ostringstream d;
  d << "laplace errors";
  for (int n : {0, 1, 2}) {
    const auto c = verify_laplace_identity(model, n, x, {100.0, 1u << 14});
    const bool ok_n = c.max_rel_error < 1e-3;
    ok = ok && ok_n;
    r.rows.push_back({"laplace;n=" + std::to_string(n), format_number(c.worst_xi), c.max_rel_error,
                      std::nan(""), 1e-3, "resolvent-power", pass_fail(ok_n)});
    d << " " << format_number(c.max_rel_error);
  }
  const FourierGridSpec g{200.0, 1u << 14};
  CMatrix v(4, 1);
  v << 1.0, cplx(0.0, 1.0), -0.5, 2.0;
  CMatrix f(4, Eigen::Index(g.samples));
  for (std::size_t j = 0; j < g.samples; ++j) {
    const double t = g.time(j) + 50.0;
    f.col(Eigen::Index(j)) = std::exp(-0.125 * t * t) * v;
  }
  d << ", convolution errors";
  double fact = 1.0;
  for (int k = 0; k <= 2; ++k) {
    if (k > 0) fact *= k;
    const CMatrix direct = convolution_S_k(model, k, f, g);
    const CMatrix via = fact * apply_multiplier(tabulate(resolvent_power_symbol(model, k), g, opt.threads), f, g);
    const double e = rel(direct, via);
    const bool ok_k = e < 1e-3;
    ok = ok && ok_k;
    r.rows.push_back({"convolution;k=" + std::to_string(k), "", e, std::nan(""), 1e-3, "multiplier",
                      pass_fail(ok_k)});
    d << " " << format_number(e);
  }
  r.pass = ok;
  r.detail = d.str();
  return r;
}

inline CaseResult multiplier_norms(const BatteryOptions& opt) {
  CaseResult r;
  bool ok = true;
  const FourierGridSpec g{400.0, 1u << 14};
  const std::vector<std::pair<std::string, Symbol>> exact{
      {"constant", identity_symbol(2, cplx(0.0, -3.0))},
      {"first-order", scalar_symbol([](double xi) { return 1.0 / cplx(1.0, xi); })},
      {"dense-resolvent", resolvent_power_symbol(OperatorModel::dense(stable4()))},
  };
  double worst = 1.0;
  for (const auto& [name, s] : exact) {
    const auto t = tabulate(s, g, opt.threads);
    const double norm = exact_l2_norm(t);
    const auto e = estimate_pq_norm_lower(t, 2, 2, g, {32, opt.seed, opt.threads});
    const double ratio = e.lower_bound / norm;
    const bool ok_s = ratio >= 0.95 && e.lower_bound <= norm + 1e-6;
    ok = ok && ok_s;
    worst = std::min(worst, ratio);
    r.rows.push_back({"plancherel;" + name, "", e.lower_bound, std::nan(""), norm, "exact-l2", pass_fail(ok_s)});
  }
  const FourierGridSpec g2{200.0, 1u << 13};
  const std::vector<std::pair<std::string, Symbol>> symbols{
      {"first-order", scalar_symbol([](double xi) { return 1.0 / cplx(1.0, xi); })},
      {"inverse-square", scalar_symbol([](double xi) { return 1.0 / std::pow(1.0 + std::abs(xi), 2); })},
      {"dense-resolvent", resolvent_power_symbol(OperatorModel::dense(stable4()))},
      {"dense-resolvent-squared", resolvent_power_symbol(OperatorModel::dense(stable4()), 1)},
  };
  const std::vector<std::pair<double, double>> pqs{{1, kInf}, {1, 2}, {2, kInf}, {2, 2}};
  int pairs = 0;
  for (const auto& [name, s] : symbols) {
    const auto t = tabulate(s, g2, opt.threads);
    const auto norms = symbol_norms(t);
    for (const auto& [p, q] : pqs) {
      const double qc = std::isinf(q) ? 1.0 : q / (q - 1.0);
      const double ub = upper_bound_pq_norm_fourier_type(
          norms, p, q, {hilbert_fourier_constant(p), hilbert_fourier_constant(qc)}, g2.frequency_step());
      const auto e = estimate_pq_norm_lower(t, p, q, g2, {8, opt.seed, opt.threads});
      const bool ok_pq = e.lower_bound <= ub + 1e-6 && e.lower_bound > 0.0;
      ok = ok && ok_pq;
      ++pairs;
      r.rows.push_back({name + ";p=" + format_number(p) + ";q=" + format_number(q), "", e.lower_bound,
                        std::nan(""), ub, "fourier-type", pass_fail(ok_pq)});
    }
  }
  r.pass = ok;
  r.detail = "worst plancherel ratio " + format_number(worst) + ", " + std::to_string(pairs) +
             " (p,q) bounds ordered";
  return r;
}

inline CaseResult predictor_algebra(const BatteryOptions& opt) {
  CaseResult r;
  auto same = [](const RatePrediction& x, const RatePrediction& y) {
    return x.applicable() == y.applicable() && ((std::isnan(x.rho) && std::isnan(y.rho)) || x.rho == y.rho);
  };
  GeometryDescriptor f1;
  f1.hilbert = false;
  f1.fourier_type = f1.type = 1.0;
  f1.cotype = kInf;
  std::seed_seq seq{opt.seed, std::uint64_t(9)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> u(0.0, 4.0), du(0.0, 1.0);
  std::bernoulli_distribution zero(0.15);
  int mismatches = 0;
  for (int i = 0; i < 10000; ++i) {
    const double a = zero(rng) ? 0.0 : u(rng), b = zero(rng) ? 0.0 : u(rng);
    const double s = u(rng), t = u(rng);
    if (!same(predict_rate_general(a, b, s, t), predict_rate_fourier_type(a, b, s, t, f1))) ++mismatches;
  }
  r.rows.push_back({"fourier-type-one", "", double(mismatches), std::nan(""), 0.0, "general",
                    pass_fail(mismatches == 0)});

  auto l4 = GeometryDescriptor::lebesgue(4.0);
  l4.r_resolvent_growth_asserted = true;
  GeometryDescriptor f15 = f1;
  f15.fourier_type = f15.type = 1.5;
  f15.cotype = 3.0;
  using Pred = std::function<RatePrediction(double, double, double, double)>;
  const std::vector<std::pair<std::string, Pred>> preds{
      {"general", [](double a, double b, double s, double t) { return predict_rate_general(a, b, s, t); }},
      {"fourier-type", [&](double a, double b, double s, double t) { return predict_rate_fourier_type(a, b, s, t, f15); }},
      {"hilbert", [](double a, double b, double s, double t) {
         return predict_rate_fourier_type(a, b, s, t, GeometryDescriptor::hilbert_space());
       }},
      {"type-cotype", [&](double a, double b, double s, double t) { return predict_rate_type_cotype(a, b, s, t, l4); }},
      {"asymptotically-analytic",
       [](double a, double, double s, double) { return predict_rate_asymptotically_analytic(a, s); }},
      {"growth-aware",
       [](double a, double b, double s, double t) { return predict_rate_growth_aware(a, b, s, t, 0.5).interpolated; }},
  };
  auto rho = [](const RatePrediction& p) { return p.applicable() ? p.rho : -kInf; };
  int violations = 0;
  for (const auto& [name, pred] : preds) {
    int v = 0;
    for (int i = 0; i < 2000; ++i) {
      const double a = u(rng), b = u(rng), s = u(rng), t = u(rng), e = du(rng);
      const double base = rho(pred(a, b, s, t));
      v += rho(pred(a, b, s + e, t)) < base;
      v += rho(pred(a, b, s, t + e)) < base;
      v += rho(pred(a + e, b, s, t)) > base;
      v += rho(pred(a, b + e, s, t)) > base;
    }
    violations += v;
    r.rows.push_back({"monotone;" + name, "", double(v), std::nan(""), 0.0, name, pass_fail(v == 0)});
  }

  const auto m = sobolev_model();
  const auto grid = geometric_grid(10, 1e5, 31);
  MeasureOptions mo;
  mo.threads = opt.threads;
  const auto hi = measure_decay(m, 0, 2.0, grid, mo);
  const auto lo = measure_decay(m, 0, 0.5, grid, mo);
  const auto mid = interpolate_rates({0, 2.0, hi.rho_hat}, {0, 0.5, lo.rho_hat}, 0.5);
  const double measured = measure_decay(m, 0, mid.tau, grid, mo).rho_hat;
  const double expect = mid.rho + opt.exponent_shift;
  const bool mid_ok = std::abs(measured - expect) <= 0.05;
  r.rows.push_back({"interpolation;tau=" + format_number(mid.tau), "", measured, std::nan(""), expect,
                    "interpolated", pass_fail(mid_ok)});
  r.pass = mismatches == 0 && violations == 0 && mid_ok;
  r.detail = "p=1 mismatches " + std::to_string(mismatches) + "/10000, monotonicity violations " +
             std::to_string(violations) + ", midpoint " + format_number(measured) + " vs " +
             format_number(expect);
  return r;
}

inline CaseResult spectral_shadow(const BatteryOptions& opt) {
  CaseResult r;
  std::vector<double> times;
  for (int i = 0; i < 24; ++i) times.push_back(5.0 + i * (400.0 - 5.0) / 23.0);
  constexpr int kModels = 20;
  std::vector<ReportRow> rows(2 * kModels);
  std::vector<double> margins(2 * kModels);
  parallel_for(kModels, opt.threads, [&](std::size_t trial) {
    std::seed_seq seq{opt.seed, std::uint64_t(trial)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> g;
    const int n = 5 + int(trial) * 45 / (kModels - 1);
    CMatrix a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = g(rng) / std::sqrt(double(n));
    Eigen::ComplexEigenSolver<CMatrix> es(a);
    a += CMatrix::Identity(n, n) * (0.5 - es.eigenvalues().real().minCoeff());
    const auto model = OperatorModel::dense(a);
    const auto sb = spectral_bounds(model, {});
    for (int k = 0; k < 2; ++k) {
      const double beta = k;
      const double rate = measure_exponential_rate(model, 0, beta + 1, times).rate;
      const double bound = sb.s_beta.at(beta);
      margins[2 * trial + k] = bound + 0.05 - rate;
      rows[2 * trial + k] = {"model=" + std::to_string(trial) + ";n=" + std::to_string(n) + ";beta=" +
                                 std::to_string(k),
                             "", rate, std::nan(""), bound, "s_beta", pass_fail(rate <= bound + 0.05)};
    }
  });
  r.rows = rows;
  const double worst = *std::min_element(margins.begin(), margins.end());
  r.pass = worst >= 0.0;
  r.detail = std::to_string(kModels) + " models, smallest margin " + format_number(worst);
  return r;
}

}  // namespace battery

/// The ten reproduction cases in report order.
inline std::vector<BatteryCase> battery_cases() {
  return {
      {"exp-sum-bounds", "appendix", battery::exp_sum_bounds},
      {"contour-identity", "appendix", battery::contour_identity},
      {"fractional-oracle", "fraccalc", battery::fractional_oracle},
      {"sobolev-example", "examples", battery::sobolev_example},
      {"operator-matrix-example", "examples", battery::operator_matrix_example},
      {"jordan-sum-example", "examples", battery::jordan_sum_example},
      {"laplace-identity", "multiplier", battery::laplace_identity},
      {"multiplier-norms", "multiplier", battery::multiplier_norms},
      {"predictor-algebra", "decaylab", battery::predictor_algebra},
      {"spectral-shadow", "spectral", battery::spectral_shadow},
  };
}

/// A filter selects a case by name or by group; empty selects all.
inline bool matches(const BatteryCase& c, const std::string& filter) {
  if (filter.empty()) return true;
  std::stringstream ss(filter);
  std::string item;
  while (std::getline(ss, item, ','))
    if (item == c.name || item == c.group) return true;
  return false;
}

/// Runs one case, turning library errors into a failing result.
inline CaseResult run_case(const BatteryCase& c, const BatteryOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  CaseResult r;
  try {
    r = c.run(opt);
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.name = c.name;
  r.group = c.group;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace semistab
