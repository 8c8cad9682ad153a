// semistab_cli: analyze | decay | frac | mult | verify-examples
// Exit codes: 0 all checks pass, 1 analysis or consistency failure, 2 config error.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "semistab/cli.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out_dir;
  unsigned threads = 0;
  std::uint64_t seed = 0;
  double tol = 0.0;
  std::string only;
};

void add_common(CLI::App* sub, Flags& f, bool needs_config) {
  auto* c = sub->add_option("--config", f.config, "JSON config file");
  if (needs_config) c->required()->check(CLI::ExistingFile);
  sub->add_option("--out-dir", f.out_dir, "output directory (overrides out_dir)");
  sub->add_option("--threads", f.threads, "worker threads (default: SEMISTAB_THREADS, then config)")
      ->check(CLI::Range(1u, 256u));
  sub->add_option("--seed", f.seed, "seed for randomized witnesses");
  sub->add_option("--tol", f.tol, "consistency tolerance (frac: quadrature tolerance)")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace semistab;
  CLI::App app{"Semigroup stability laboratory"};
  app.require_subcommand(1);
  Flags f;
  auto* analyze = app.add_subcommand("analyze", "probe, fit, measure, predict and check consistency");
  auto* decay = app.add_subcommand("decay", "measure decay for each (sigma, tau) index");
  auto* frac = app.add_subcommand("frac", "contour identity battery");
  auto* mult = app.add_subcommand("mult", "(Lp, Lq) multiplier norm estimates");
  auto* verify = app.add_subcommand("verify-examples", "run the bundled reproduction battery");
  add_common(analyze, f, true);
  add_common(decay, f, true);
  add_common(frac, f, false);
  add_common(mult, f, true);
  add_common(verify, f, false);
  verify->add_option("--only", f.only, "comma-separated case names or groups");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  auto* sub = app.get_subcommands().front();
  try {
    AnalysisConfig cfg = f.config.empty() ? AnalysisConfig{} : load_config(f.config);
    RunOptions o;
    if (sub->count("--threads"))
      o.threads = f.threads;
    else if (std::getenv("SEMISTAB_THREADS"))
      o.threads = default_thread_count();
    else
      o.threads = cfg.threads.value_or(1);
    if (sub->count("--seed")) o.seed = f.seed;
    if (sub->count("--tol")) o.tol = f.tol;
    o.only = f.only;
    const std::string out_dir = f.out_dir.empty() ? cfg.out_dir : f.out_dir;

    RunReport r;
    if (sub == analyze)
      r = run_analyze(cfg, o);
    else if (sub == decay)
      r = run_decay(cfg, o);
    else if (sub == frac)
      r = run_frac(cfg, o);
    else if (sub == mult)
      r = run_mult(cfg, o);
    else
      r = run_verify_examples(o);
    write_report(r, out_dir);

    if (sub == verify) {
      for (const auto& c : r.summary["cases"])
        std::cout << c["status"].get<std::string>() << "  " << c["name"].get<std::string>() << "  "
                  << c["detail"].get<std::string>() << "\n";
    }
    if (!r.pass()) {
      std::cerr << r.command << ": FAIL";
      for (const auto& name : r.failures) std::cerr << "\n  " << name;
      std::cerr << "\n";
      return 1;
    }
    std::cout << r.command << ": PASS (" << out_dir << "/summary.json)\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const StageError& e) {
    std::cerr << "analysis failed: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
