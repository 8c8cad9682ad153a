#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "semistab/cli.hpp"

using namespace semistab;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string output;
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string(SEMISTAB_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  while (std::fgets(buf.data(), int(buf.size()), pipe)) r.output += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("semistab_cli_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string sample(const std::string& name) { return std::string(SEMISTAB_SAMPLES_DIR) + "/configs/" + name; }

std::string config_error_field(const std::string& text) {
  try {
    parse_config(json::parse(text));
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(Config, ErrorsNameTheField) {
  EXPECT_EQ(config_error_field(R"({"grids": {"t_grid": {"start": 1, "stop": 10, "count": 1}}})"),
            "grids.t_grid.count");
  EXPECT_EQ(config_error_field(R"({"grids": {"xi_grid": {"start": 0, "stop": 10, "count": 5}}})"),
            "grids.xi_grid.start");
  EXPECT_EQ(config_error_field(R"({"operator": {"kind": "banana"}})"), "operator.kind");
  EXPECT_EQ(config_error_field(R"({"operator": {"kind": "jordan-sum", "gamma": 2}})"), "operator.gamma");
  EXPECT_EQ(config_error_field(R"({"operator": {"kind": "dense-matrix", "entries": [[1, 2], [3]]}})"),
            "operator.entries[1]");
  EXPECT_EQ(config_error_field(R"({"tolerances": {"fit_tol": -1}})"), "tolerances.fit_tol");
  EXPECT_EQ(config_error_field(R"({"indices": [[0, 1], [0]]})"), "indices[1]");
  EXPECT_EQ(config_error_field(R"({"geometry": {"space": "lebesgue", "exponent": 0.5}})"), "geometry.exponent");
  EXPECT_EQ(config_error_field(R"({"multiplier": {"pairs": [[2, 1]]}})"), "multiplier.pairs[0]");
  EXPECT_EQ(config_error_field(R"({"grids": {"fourier_grid": {"samples": 1000}}})"), "grids.fourier_grid.samples");
  EXPECT_EQ(config_error_field(R"([1, 2])"), "<root>");
  EXPECT_EQ(config_error_field(R"({"seed": 3, "threads": 2})"), "");
}

TEST(Config, DigestFollowsContent) {
  const auto a = parse_config(json::parse(R"({"seed": 1})"));
  const auto b = parse_config(json::parse(R"({"seed": 2})"));
  EXPECT_EQ(a.digest.size(), 16u);
  EXPECT_NE(a.digest, b.digest);
  EXPECT_EQ(a.digest, parse_config(json::parse(R"({"seed": 1})")).digest);
}

TEST(RunAnalyze, SobolevReport) {
  const auto cfg = load_config(sample("sobolev_analyze.json"));
  const auto r = run_analyze(cfg, {});
  EXPECT_TRUE(r.pass());
  EXPECT_NEAR(r.summary["profile"]["beta_hat"].get<double>(), 3.0, 0.1);
  const auto& ms = r.summary["measurements"];
  ASSERT_EQ(ms.size(), 3u);
  for (const auto& m : ms) {
    const double tau = m["tau"].get<double>();
    EXPECT_NEAR(m["rho_hat"].get<double>(), 0.5 * tau - 0.5, 0.05);
  }
  EXPECT_EQ(r.tables.at("decay").size(), 3 * cfg.t_grid.count());
}

TEST(RunDecay, WrongGrowthPairFailsConsistency) {
  auto cfg = parse_config(json::parse(R"({
    "operator": {"kind": "diagonal-symbol", "a": 1, "b": 0.5},
    "indices": [[0, 2]], "growth": {"alpha": 0, "beta": 0.5}})"));
  const auto r = run_decay(cfg, {});
  EXPECT_FALSE(r.pass());
  ASSERT_FALSE(r.failures.empty());
  EXPECT_EQ(r.failures.front(), "sigma=0;tau=2 growth-aware");
}

TEST(RunFrac, DefaultBatteryRows) {
  const auto r = run_frac(AnalysisConfig{}, {});
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(r.tables.at("contour_identity").size(), 72u);
  EXPECT_LT(r.summary["max_rel_error"].get<double>(), 1e-6);
}

TEST(RunMult, ScalarSymbolRows) {
  auto cfg = parse_config(json::parse(R"({
    "grids": {"fourier_grid": {"period": 200, "samples": 4096}},
    "multiplier": {"symbol": "first-order", "pairs": [[2, 2], [1, "inf"], [1.5, 3]], "trials": 4}})"));
  const auto r = run_mult(cfg, {});
  EXPECT_TRUE(r.pass());
  const auto& rows = r.tables.at("pq_norms");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].verdict, "PASS");
  EXPECT_EQ(rows[2].verdict, "N/A");
  EXPECT_NEAR(r.summary["exact_l2_norm"].get<double>(), 1.0, 1e-12);
  EXPECT_THROW(run_mult(parse_config(json::parse(R"({})")), {}), ConfigError);
}

TEST(VerifyExamples, InjectedExponentFailsNamedCase) {
  RunOptions o;
  o.only = "operator-matrix-example";
  EXPECT_TRUE(run_verify_examples(o).pass());
  BatteryOptions b;
  b.exponent_shift = 0.3;
  const auto r = run_verify_examples(o, b);
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_EQ(r.failures.front(), "operator-matrix-example");
}

TEST(Formatting, NumbersAndComplex) {
  EXPECT_EQ(format_complex(cplx(0.5, 1.0)), "0.5+1i");
  EXPECT_EQ(format_complex(cplx(-2.0, -0.25)), "-2-0.25i");
  EXPECT_EQ(format_number(kInf), "inf");
  EXPECT_EQ(format_number(std::nan("")), "");
}

TEST(Cli, ConfigErrorExitsTwo) {
  const auto d = scratch("config");
  std::ofstream(d / "bad.json") << R"({"operator": {"kind": "operator-matrix"},
    "grids": {"t_grid": {"start": 10, "stop": 100, "count": 1}}})";
  const auto r = run_cli("decay --config " + (d / "bad.json").string() + " --out-dir " + (d / "out").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("grids.t_grid.count"), std::string::npos) << r.output;
  std::ofstream(d / "broken.json") << "{not json";
  EXPECT_EQ(run_cli("frac --config " + (d / "broken.json").string()).code, 2);
  EXPECT_EQ(run_cli("decay").code, 2);
}

TEST(Cli, AnalysisFailureExitsOne) {
  const auto d = scratch("stage");
  std::ofstream(d / "short.json") << R"({"operator": {"kind": "operator-matrix"},
    "grids": {"t_grid": {"start": 10, "stop": 100, "count": 2}}, "indices": [[0, 0]]})";
  const auto r = run_cli("decay --config " + (d / "short.json").string() + " --out-dir " + (d / "out").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("measure_decay"), std::string::npos) << r.output;
}

TEST(Cli, SummaryIsByteIdenticalAcrossThreadCounts) {
  const auto d = scratch("determinism");
  const std::string cfg = sample("sobolev_analyze.json");
  ASSERT_EQ(run_cli("analyze --config " + cfg + " --threads 1 --out-dir " + (d / "t1").string()).code, 0);
  ASSERT_EQ(run_cli("analyze --config " + cfg + " --threads 8 --out-dir " + (d / "t8").string()).code, 0);
  for (const char* f : {"summary.json", "decay.csv", "predictions.csv", "probe.csv"})
    EXPECT_EQ(slurp(d / "t1" / f), slurp(d / "t8" / f)) << f;
  const auto s = json::parse(slurp(d / "t1" / "summary.json"));
  EXPECT_EQ(s["status"], "PASS");
  EXPECT_EQ(slurp(d / "t1" / "decay.csv").substr(0, 56),
            "case,t_or_xi,value,fit_exponent,predicted,source,verdict");
}

TEST(Cli, MultiplierSeedIsDeterministic) {
  const auto d = scratch("mult");
  const std::string cfg = sample("dense_mult.json");
  ASSERT_EQ(run_cli("mult --config " + cfg + " --threads 1 --out-dir " + (d / "a").string()).code, 0);
  ASSERT_EQ(run_cli("mult --config " + cfg + " --threads 3 --out-dir " + (d / "b").string()).code, 0);
  EXPECT_EQ(slurp(d / "a" / "summary.json"), slurp(d / "b" / "summary.json"));
  EXPECT_EQ(slurp(d / "a" / "pq_norms.csv"), slurp(d / "b" / "pq_norms.csv"));
}

TEST(Cli, VerifyExamplesAppendixFilter) {
  const auto d = scratch("verify");
  const auto r = run_cli("verify-examples --only appendix --out-dir " + d.string());
  EXPECT_EQ(r.code, 0) << r.output;
  const auto s = json::parse(slurp(d / "summary.json"));
  ASSERT_EQ(s["cases"].size(), 2u);
  for (const auto& c : s["cases"]) {
    EXPECT_EQ(c["group"], "appendix");
    EXPECT_EQ(c["status"], "PASS");
  }
  EXPECT_EQ(run_cli("verify-examples --only nothing --out-dir " + d.string()).code, 2);
}
