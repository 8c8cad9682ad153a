#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "semistab/decaylab.hpp"
#include "semistab/resolvent.hpp"

using namespace semistab;

namespace {

bool same_rho(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

OperatorModel sobolev() {
  DiagonalSymbolSpec s;
  s.grid = geometric_grid(1.0 + 1e-9, 1e8, 4096);
  return OperatorModel(s);
}

GeometryDescriptor fourier(double p) {
  GeometryDescriptor g;
  g.hilbert = false;
  g.fourier_type = p;
  g.type = p;
  g.cotype = p == 1.0 ? kInf : p / (p - 1.0);
  return g;
}

}  // namespace

// ---------------------------------------------------------------------------
// Predictors

TEST(PredictGeneral, Examples) {
  auto p = predict_rate_general(0, 1, 0, 3);
  EXPECT_TRUE(p.applicable());
  EXPECT_DOUBLE_EQ(p.rho, 1.0);
  EXPECT_TRUE(p.strict);
  EXPECT_EQ(predict_rate_general(0, 0, 0, 2).rho, kInf);
  EXPECT_DOUBLE_EQ(predict_rate_general(1, 0, 2, 1.5).rho, 2.0);
  p = predict_rate_general(1, 1, 0, 1);
  EXPECT_FALSE(p.applicable());
  EXPECT_TRUE(std::isnan(p.rho));
}

TEST(PredictFourierType, HilbertBranch) {
  const auto h = GeometryDescriptor::hilbert_space();
  auto p = predict_rate_fourier_type(0, 2, 0, 4, h);
  EXPECT_DOUBLE_EQ(p.rho, 1.0);
  EXPECT_FALSE(p.strict);
  EXPECT_EQ(p.inv_r, 0.0);
  p = predict_rate_fourier_type(0, 2, 0, 2, h);
  EXPECT_TRUE(p.applicable());
  EXPECT_DOUBLE_EQ(p.rho, 0.0);
  // alpha branch smaller: open supremum
  p = predict_rate_fourier_type(1, 1, 0.5, 4, h);
  EXPECT_DOUBLE_EQ(p.rho, 0.5);
  EXPECT_TRUE(p.strict);
  EXPECT_FALSE(predict_rate_fourier_type(0, 2, 0, 1.9, h).applicable());
}

TEST(PredictFourierType, IntermediateExponent) {
  // p = 4/3: 1/r = 1/2
  const auto p = predict_rate_fourier_type(0, 1, 0, 3, fourier(4.0 / 3.0));
  EXPECT_NEAR(p.inv_r, 0.5, 1e-15);
  EXPECT_NEAR(p.rho, 1.5, 1e-15);
  EXPECT_FALSE(predict_rate_fourier_type(0, 1, 0, 1.5, fourier(4.0 / 3.0)).applicable());
}

TEST(PredictFourierType, TypeOneMatchesGeneralOnRandomTuples) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  std::bernoulli_distribution zero(0.15);
  const auto g = fourier(1.0);
  for (int i = 0; i < 10000; ++i) {
    const double a = zero(rng) ? 0.0 : u(rng), b = zero(rng) ? 0.0 : u(rng);
    const double s = u(rng), t = u(rng);
    const auto x = predict_rate_general(a, b, s, t);
    const auto y = predict_rate_fourier_type(a, b, s, t, g);
    ASSERT_EQ(x.applicable(), y.applicable());
    ASSERT_TRUE(same_rho(x.rho, y.rho)) << a << " " << b << " " << s << " " << t;
  }
}

TEST(PredictFourierType, HilbertDominatesOtherPredictors) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  auto h = GeometryDescriptor::hilbert_space();
  h.r_resolvent_growth_asserted = true;
  for (int i = 0; i < 2000; ++i) {
    const double a = u(rng), b = u(rng), s = u(rng), t = u(rng);
    const auto hp = predict_rate_fourier_type(a, b, s, t, h);
    for (const auto& o : {predict_rate_general(a, b, s, t), predict_rate_type_cotype(a, b, s, t, h)}) {
      if (!o.applicable()) continue;
      ASSERT_TRUE(hp.applicable());
      EXPECT_GE(hp.rho, o.rho);
    }
  }
}

TEST(PredictTypeCotype, GatingAndBranches) {
  auto g = GeometryDescriptor::hilbert_space();
  auto p = predict_rate_type_cotype(0, 2, 0, 4, g);
  EXPECT_FALSE(p.applicable());
  EXPECT_EQ(p.conditions.front().name, "R-boundedness not asserted");

  g.r_resolvent_growth_asserted = true;
  p = predict_rate_type_cotype(0, 2, 0, 4, g);
  EXPECT_DOUBLE_EQ(p.rho, 1.0);
  EXPECT_FALSE(p.strict);
  EXPECT_EQ(p.conditions.front().status, ConditionStatus::asserted);

  // L^u lattice, u = 4: 1/r = 1/2 - 1/4 beats the Fourier-type 1/r = 1/2
  auto l4 = GeometryDescriptor::lebesgue(4.0);
  l4.r_resolvent_growth_asserted = true;
  const auto lat = predict_rate_type_cotype(0, 1, 0, 3, l4);
  const auto ft = predict_rate_fourier_type(0, 1, 0, 3, l4);
  EXPECT_NEAR(lat.inv_r, 0.25, 1e-15);
  EXPECT_NEAR(ft.inv_r, 0.5, 1e-15);
  EXPECT_GT(lat.rho, ft.rho);
  // the lattice branch admits the endpoint tau = beta + 1/r
  const auto edge = predict_rate_type_cotype(0, 1, 0, 1.25, l4);
  EXPECT_TRUE(edge.applicable());
  EXPECT_NEAR(edge.rho, 0.0, 1e-15);
  EXPECT_FALSE(edge.strict);
  // without lattice data the plain type/cotype index is used, endpoint excluded
  l4.lattice.reset();
  EXPECT_FALSE(predict_rate_type_cotype(0, 1, 0, 1.25, l4).applicable());
}

TEST(PredictAnalytic, Examples) {
  EXPECT_DOUBLE_EQ(predict_rate_asymptotically_analytic(1, 1.5).rho, 1.5);
  EXPECT_EQ(predict_rate_asymptotically_analytic(0, 0).rho, kInf);
  EXPECT_FALSE(predict_rate_asymptotically_analytic(2, 1).applicable());
  const auto p = predict_rate_asymptotically_analytic(1, 0);
  EXPECT_EQ(p.conditions.front().status, ConditionStatus::asserted);
}

TEST(PredictGrowthAware, Examples) {
  auto g = predict_rate_growth_aware(0, 1, 0, 3, 1.0);
  ASSERT_TRUE(g.scaling);
  EXPECT_DOUBLE_EQ(g.scaling->net(), 2.0);
  EXPECT_TRUE(g.scaling->log_factor);
  g = predict_rate_growth_aware(1, 1, 2, 3, 0.0);
  EXPECT_FALSE(g.scaling);
  EXPECT_DOUBLE_EQ(g.interpolated.rho, 2.0);
  EXPECT_DOUBLE_EQ(g.interpolated.net(), 2.0);
  EXPECT_FALSE(predict_rate_growth_aware(0, 1, 0, 3, -0.5).interpolated.applicable());
}

TEST(PredictGrowthAware, HilbertWinsExactlyAboveUnitGrowth) {
  const auto h = GeometryDescriptor::hilbert_space();
  for (double mu : {0.0, 0.5, 1.0, 1.0 + 1e-9, 1.5, 3.0}) {
    const auto g = predict_rate_growth_aware(0, 2, 0, 5, mu, &h);
    ASSERT_TRUE(g.hilbert);
    EXPECT_EQ(g.stronger == "hilbert", mu > 1.0) << mu;
    EXPECT_EQ(g.best().net(), std::max(2.5 - mu, 1.5));
  }
}

TEST(Predictors, MonotoneInIndices) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 4.0), d(0.0, 1.0);
  auto l4 = GeometryDescriptor::lebesgue(4.0);
  l4.r_resolvent_growth_asserted = true;
  const auto f = fourier(1.5);
  using Pred = std::function<RatePrediction(double, double, double, double)>;
  const std::vector<Pred> preds{
      [](double a, double b, double s, double t) { return predict_rate_general(a, b, s, t); },
      [&](double a, double b, double s, double t) { return predict_rate_fourier_type(a, b, s, t, f); },
      [](double a, double b, double s, double t) {
        return predict_rate_fourier_type(a, b, s, t, GeometryDescriptor::hilbert_space());
      },
      [&](double a, double b, double s, double t) { return predict_rate_type_cotype(a, b, s, t, l4); },
      [](double a, double, double s, double) { return predict_rate_asymptotically_analytic(a, s); },
      [](double a, double b, double s, double t) {
        return predict_rate_growth_aware(a, b, s, t, 0.5).interpolated;
      },
  };
  auto rho = [](const RatePrediction& p) { return p.applicable() ? p.rho : -kInf; };
  for (const auto& pred : preds) {
    for (int i = 0; i < 2000; ++i) {
      const double a = u(rng), b = u(rng), s = u(rng), t = u(rng), e = d(rng);
      const double base = rho(pred(a, b, s, t));
      EXPECT_GE(rho(pred(a, b, s + e, t)), base);
      EXPECT_GE(rho(pred(a, b, s, t + e)), base);
      EXPECT_LE(rho(pred(a + e, b, s, t)), base);
      EXPECT_LE(rho(pred(a, b + e, s, t)), base);
    }
  }
}

TEST(Interpolate, Examples) {
  const RatePoint r1{2, 4, 2}, r2{0, 2, 0};
  auto p = interpolate_rates(r1, r2, 0.0);
  EXPECT_EQ(p.rho, 0.0);
  EXPECT_EQ(p.tau, 2.0);
  p = interpolate_rates(r1, r2, 0.5);
  EXPECT_DOUBLE_EQ(p.rho, 1.0);
  EXPECT_DOUBLE_EQ(p.sigma, 1.0);
  EXPECT_DOUBLE_EQ(p.tau, 3.0);
  p = interpolate_rates({1, 2, 1}, r2, 2.0);
  EXPECT_DOUBLE_EQ(p.rho, 2.0);
  EXPECT_DOUBLE_EQ(p.sigma, 2.0);
  EXPECT_DOUBLE_EQ(p.tau, 4.0);
  EXPECT_THROW(interpolate_rates(r2, r1, 0.5), DomainError);
  EXPECT_THROW(interpolate_rates(r1, r2, -0.1), DomainError);
  EXPECT_EQ(interpolate_rates({1, 3, kInf}, r2, 0.0).rho, 0.0);
  EXPECT_EQ(interpolate_rates({1, 3, kInf}, r2, 0.3).rho, kInf);
}

TEST(SmoothnessIndex, Examples) {
  EXPECT_EQ(exponential_smoothness_index(GeometryDescriptor::hilbert_space()).value, 0.0);
  auto g = fourier(1.0);
  auto s = exponential_smoothness_index(g);
  EXPECT_EQ(s.value, 1.0);
  EXPECT_EQ(s.source, "fourier-type");
  g.positive_semigroup = true;
  g.lattice = LatticeGeometry{1.0, 4.0};
  s = exponential_smoothness_index(g);
  EXPECT_DOUBLE_EQ(s.value, 0.75);
  EXPECT_EQ(s.source, "lattice-positive");

  // L^3: Fourier type 3/2 gives 1/3, type/cotype 2/2 - 2/3 = 1/3, asserted R-growth gives 1/6
  auto l3 = GeometryDescriptor::lebesgue(3.0);
  EXPECT_NEAR(exponential_smoothness_index(l3).value, 1.0 / 3.0, 1e-15);
  l3.r_resolvent_growth_asserted = true;
  s = exponential_smoothness_index(l3);
  EXPECT_NEAR(s.value, 1.0 / 6.0, 1e-15);
  EXPECT_EQ(s.source, "type-cotype");
}

TEST(Geometry, Validation) {
  auto g = GeometryDescriptor::hilbert_space();
  g.fourier_type = 1.5;
  EXPECT_THROW(g.validate(), DomainError);
  g = fourier(2.5);
  EXPECT_THROW(g.validate(), DomainError);
  EXPECT_NO_THROW(GeometryDescriptor::lebesgue(1.0).validate());
}

TEST(Consistency, Verdicts) {
  DecayMeasurement m;
  m.rho_hat = 0.5;
  m.classification = DecayClass::decaying;
  RatePrediction p;
  p.rho = 2.0;
  p.source = "x";
  auto r = check_consistency(m, p, 0.05);
  EXPECT_EQ(r.verdict, Verdict::fail);
  EXPECT_DOUBLE_EQ(r.margin, -1.5);
  m.rho_hat = 1.96;
  EXPECT_EQ(check_consistency(m, p, 0.05).verdict, Verdict::pass);
  p.rho = kInf;
  EXPECT_EQ(check_consistency(m, p, 0.05).verdict, Verdict::fail);
  m.classification = DecayClass::super_polynomial_decay;
  m.rho_hat = kInf;
  EXPECT_EQ(check_consistency(m, p, 0.05).verdict, Verdict::pass);
  p.conditions.push_back({"x", ConditionStatus::fail});
  EXPECT_EQ(check_consistency(m, p, 0.05).verdict, Verdict::not_applicable);
}

// ---------------------------------------------------------------------------
// Measurements

TEST(MeasureDecay, SobolevExponentAndHilbertConsistency) {
  const auto m = sobolev();
  const auto grid = geometric_grid(10, 1e5, 41);
  const auto d = measure_decay(m, 0, 3, grid);
  // (1 - b + b tau) / a - 1 = 1
  EXPECT_NEAR(d.rho_hat, 1.0, 0.05);
  EXPECT_EQ(d.classification, DecayClass::decaying);
  RatePrediction p;
  p.rho = 1.0;
  p.source = "hilbert";
  EXPECT_EQ(check_consistency(d, p, 0.05).verdict, Verdict::pass);
}

TEST(MeasureDecay, SoundnessOnSobolevSymbol) {
  // resolvent growth (0, 3); bounded semigroup growth t^{1/2} on X
  const auto m = sobolev();
  const auto grid = geometric_grid(10, 1e5, 31);
  const auto h = GeometryDescriptor::hilbert_space();
  for (double tau : {0.0, 1.0, 2.0, 3.0, 4.0}) {
    MeasureOptions opt;
    opt.measure_growth = true;
    const auto d = measure_decay(m, 0, tau, grid, opt);
    ASSERT_TRUE(d.growth_mu_hat);
    EXPECT_NEAR(*d.growth_mu_hat, 0.5, 0.05);
    EXPECT_NEAR(d.rho_hat, 0.5 * tau - 0.5, 0.05) << tau;
    const auto ga = predict_rate_growth_aware(0, 3, 0, tau, std::max(0.0, *d.growth_mu_hat), &h);
    for (const auto& p : {predict_rate_general(0, 3, 0, tau), predict_rate_fourier_type(0, 3, 0, tau, h),
                          ga.interpolated, *ga.scaling}) {
      const auto r = check_consistency(d, p, 0.05);
      EXPECT_NE(r.verdict, Verdict::fail) << p.source << " tau=" << tau << " margin " << r.margin;
    }
  }
}

TEST(MeasureDecay, InterpolationMidpoint) {
  const auto m = sobolev();
  const auto grid = geometric_grid(10, 1e5, 31);
  const auto a = measure_decay(m, 0, 2.0, grid);
  const auto b = measure_decay(m, 0, 0.5, grid);
  const auto mid = interpolate_rates({0, 2.0, a.rho_hat}, {0, 0.5, b.rho_hat}, 0.5);
  EXPECT_NEAR(measure_decay(m, 0, mid.tau, grid).rho_hat, mid.rho, 0.05);
}

TEST(MeasureDecay, DenseDecayIsSuperPolynomial) {
  CMatrix one(1, 1);
  one(0, 0) = 1.0;
  const auto d = measure_decay(OperatorModel::dense(one), 0.5, 1.0, geometric_grid(1, 100, 20));
  EXPECT_EQ(d.classification, DecayClass::super_polynomial_decay);
  EXPECT_EQ(d.rho_hat, kInf);
  const auto u = measure_decay(OperatorModel::dense(one), 0, 0, geometric_grid(10, 1e4, 20));
  EXPECT_EQ(u.classification, DecayClass::super_polynomial_decay);
  RatePrediction p = predict_rate_general(0, 0, 0, 2);
  EXPECT_EQ(check_consistency(u, p, 0.05).verdict, Verdict::pass);
}

TEST(MeasureDecay, OperatorMatrixIntegerPowers) {
  const OperatorModel m(OperatorMatrixSpec{});
  MeasureOptions opt;
  opt.integer_power = true;
  const auto grid = geometric_grid(10, 1e4, 25);
  for (int k = 0; k <= 2; ++k) {
    const auto d = measure_decay(m, k, 0, grid, opt);
    EXPECT_NEAR(-d.fit.exponent, double(k - 2), 0.05) << k;
  }
  EXPECT_EQ(measure_decay(m, 2, 0, grid, opt).classification, DecayClass::bounded);
  EXPECT_EQ(measure_decay(m, 0, 0, grid, opt).classification, DecayClass::growing);
  EXPECT_THROW(measure_decay(m, 1.5, 0, grid, opt), DomainError);
}

TEST(MeasureDecay, JordanOptimalityWitness) {
  const double gamma = 0.5, delta = 0.9;
  const OperatorModel m(JordanSumSpec{gamma, delta, 10000});
  const auto& j = std::get<JordanSumModel>(m.impl());
  const auto grid = geometric_grid(5, double(j.max_block_size() - 1), 16);
  std::vector<double> norms;
  for (double t : grid.nodes) norms.push_back(operator_norm(m, SemigroupMap{t}).value);
  EXPECT_NEAR(fit_exponential_rate(grid.nodes, norms).rate, 1 - gamma, 0.05);

  // bounded at tau = beta = log(1/gamma) / log(1/delta)
  const double beta = std::log(1 / gamma) / std::log(1 / delta);
  const auto full = measure_decay(m, 0, beta, grid);
  const auto [lo, hi] = std::minmax_element(full.norms.begin(), full.norms.end());
  EXPECT_LE(*hi / *lo, 10.0);
  // exponential growth below (1 - gamma) / log(1/delta)
  const double tau = (1 - gamma) / std::log(1 / delta);
  const auto half = measure_decay(m, 0, tau / 2, grid);
  EXPECT_GE(half.norms.back() / half.norms.front(), 10.0);
  EXPECT_EQ(half.classification, DecayClass::super_polynomial_growth);
}

TEST(MeasureDecay, Errors) {
  CMatrix z = CMatrix::Zero(2, 2);
  const auto m = OperatorModel::dense(z);
  EXPECT_THROW(measure_decay(m, 1, 0, geometric_grid(1, 10, 5)), DomainError);
  CMatrix one = CMatrix::Identity(1, 1);
  MeasureOptions opt;
  opt.window = FitWindow{0, 2};
  EXPECT_THROW(measure_decay(OperatorModel::dense(one), 0, 0, geometric_grid(1, 10, 5), opt),
               InsufficientDataError);
}

TEST(ExponentialRate, StableMatricesStayBelowProbedAbscissa) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::vector<double> times;
  for (int i = 0; i < 24; ++i) times.push_back(5.0 + i * (400.0 - 5.0) / 23.0);
  for (int trial = 0; trial < 3; ++trial) {
    const int n = 8 + 10 * trial;
    CMatrix a(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) a(r, c) = g(rng) / std::sqrt(double(n));
    Eigen::ComplexEigenSolver<CMatrix> es(a);
    a += CMatrix::Identity(n, n) * (0.5 - es.eigenvalues().real().minCoeff());
    const auto model = OperatorModel::dense(a);
    SpectralBoundsOptions opt;
    const auto sb = spectral_bounds(model, {}, opt);
    for (double beta : {0.0, 1.0}) {
      const auto fit = measure_exponential_rate(model, 0, beta + 1, times);
      EXPECT_LE(fit.rate, sb.s_beta.at(beta) + 0.05);
      EXPECT_NEAR(fit.rate, -0.5, 0.05);
    }
  }
}
