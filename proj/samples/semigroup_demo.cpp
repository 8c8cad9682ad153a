// Walkthrough: probe a multiplication semigroup, measure decay on smooth data and
// compare with the predicted rates.

#include <cstdio>

#include "semistab/decaylab.hpp"
#include "semistab/resolvent.hpp"

int main() {
  using namespace semistab;
  DiagonalSymbolSpec spec;
  spec.a = 1.0;
  spec.b = 0.5;
  const OperatorModel model(spec);

  const auto profile = fit_growth_profile(probe_resolvent_norms(model, geometric_grid(1e-2, 1e3, 64), 0.0));
  std::printf("resolvent growth (alpha, beta) ~ (%.3f, %.3f), M ~ %.3f\n", profile.alpha_hat, profile.beta_hat,
              profile.M_constant);

  const auto h = GeometryDescriptor::hilbert_space();
  const auto grid = geometric_grid(10, 1e5, 41);
  for (double tau : {0.0, 1.0, 2.0, 4.0}) {
    MeasureOptions opt;
    opt.measure_growth = true;
    const auto m = measure_decay(model, 0, tau, grid, opt);
    const auto p = predict_rate_growth_aware(0, profile.beta_hat, 0, tau, *m.growth_mu_hat, &h);
    const auto& best = p.best();
    const auto c = check_consistency(m, best, 0.05);
    std::printf("tau=%.1f  measured rho %+.3f (%s)  best guarantee %+.3f from %s  %s\n", tau, m.rho_hat,
                to_string(m.classification).c_str(), best.net(), best.source.c_str(), to_string(c.verdict).c_str());
  }

  MeasureOptions ints;
  ints.integer_power = true;
  const OperatorModel matrix(OperatorMatrixSpec{3});
  for (int k = 0; k < 3; ++k) {
    const auto m = measure_decay(matrix, k, 0, geometric_grid(10, 1e4, 25), ints);
    std::printf("operator matrix: ||T(t) A^%d|| ~ t^%.3f\n", k, m.fit.exponent);
  }
}
