#pragma once

// Batch front end: JSON configs in, summary.json plus CSV tables out.
// Reports carry no wall-clock data, so equal (config, seed) give equal bytes.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "semistab/battery.hpp"
#include "semistab/decaylab.hpp"
#include "semistab/fraccalc.hpp"
#include "semistab/multiplier.hpp"
#include "semistab/resolvent.hpp"

namespace semistab {

using json = nlohmann::json;

struct Tolerances {
  double fit_tol = 0.05;
  double quad_tol = 1e-6;
  double consistency_tol = 0.05;
};

struct FractionalTuple {
  double alpha = 0.0;
  double beta = 1.0;
  double eta = 1.0;
  cplx lambda{0.0, 1.0};
};

struct MultiplierConfig {
  std::string symbol = "resolvent-power";
  double a = 1.0;
  int power = 0;
  std::vector<std::pair<double, double>> pairs{{2.0, 2.0}, {1.0, kInf}};
  std::size_t trials = 32;
};

struct AnalysisConfig {
  std::optional<json> operator_spec;
  LogGrid t_grid = geometric_grid(10, 1e5, 41);
  LogGrid xi_grid = geometric_grid(1e-2, 1e3, 64);
  FourierGridSpec fourier_grid{200.0, 1u << 13};
  GeometryDescriptor geometry;
  std::vector<std::pair<double, double>> indices{{0.0, 1.0}};
  bool integer_power = false;
  std::optional<std::pair<double, double>> growth;
  Tolerances tolerances;
  std::vector<FractionalTuple> tuples;
  double phi = kPi / 3;
  MultiplierConfig multiplier;
  std::uint64_t seed = 1;
  std::optional<unsigned> threads;
  std::string out_dir = "semistab_out";
  std::string digest;
};

/// The failing stage of an analysis, reported with exit code 1.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& msg)
      : Error("stage '" + stage + "' failed: " + msg), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

namespace config {

inline const json* find(const json& j, const std::string& key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

inline double number(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return kInf;
  }
  throw ConfigError(path, "expected a number");
}

inline double number(const json& obj, const std::string& key, const std::string& path, double fallback) {
  const json* v = find(obj, key);
  return v ? number(*v, path + "." + key) : fallback;
}

inline long long integer(const json& obj, const std::string& key, const std::string& path, long long fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) throw ConfigError(path + "." + key, "expected an integer");
  return v->get<long long>();
}

inline bool boolean(const json& obj, const std::string& key, const std::string& path, bool fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_boolean()) throw ConfigError(path + "." + key, "expected true or false");
  return v->get<bool>();
}

inline std::string string(const json& obj, const std::string& key, const std::string& path,
                          const std::string& fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_string()) throw ConfigError(path + "." + key, "expected a string");
  return v->get<std::string>();
}

inline const json& object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  return j;
}

inline cplx complex(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_array() && j.size() == 2) return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
  throw ConfigError(path, "expected a number or a [re, im] pair");
}

inline LogGrid grid(const json& obj, const std::string& key, const std::string& path, const LogGrid& fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  const std::string p = path + "." + key;
  object(*v, p);
  const double start = number(*v, "start", p, fallback.start);
  const double stop = number(*v, "stop", p, fallback.stop);
  const long long count = integer(*v, "count", p, (long long)fallback.count());
  if (count < 2) throw ConfigError(p + ".count", "a grid needs at least 2 nodes");
  if (!(start > 0.0) || !std::isfinite(start)) throw ConfigError(p + ".start", "must be positive");
  if (!(stop > start) || !std::isfinite(stop)) throw ConfigError(p + ".stop", "must exceed start");
  return geometric_grid(start, stop, std::size_t(count));
}

inline GeometryDescriptor geometry(const json& obj, const std::string& path) {
  object(obj, path);
  const std::string space = string(obj, "space", path, "hilbert");
  GeometryDescriptor g;
  if (space == "lebesgue") {
    const double u = number(obj, "exponent", path, 2.0);
    if (!(u >= 1.0) || !std::isfinite(u)) throw ConfigError(path + ".exponent", "must lie in [1, inf)");
    g = GeometryDescriptor::lebesgue(u);
  } else if (space == "custom") {
    g.hilbert = false;
    g.fourier_type = number(obj, "fourier_type", path, 2.0);
    g.type = number(obj, "type", path, 2.0);
    g.cotype = number(obj, "cotype", path, 2.0);
    if (const json* l = find(obj, "lattice")) {
      object(*l, path + ".lattice");
      g.lattice = LatticeGeometry{number(*l, "p_convex", path + ".lattice", 2.0),
                                  number(*l, "q_concave", path + ".lattice", 2.0)};
    }
  } else if (space != "hilbert") {
    throw ConfigError(path + ".space", "expected hilbert, lebesgue or custom");
  }
  g.positive_semigroup = boolean(obj, "positive_semigroup", path, false);
  g.r_resolvent_growth_asserted = boolean(obj, "r_resolvent_growth_asserted", path, false);
  try {
    g.validate();
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
  return g;
}

inline double positive(double v, const std::string& path) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(path, "must be a positive number");
  return v;
}

}  // namespace config

/// Builds a model from the "operator" object.
inline OperatorModel make_model(const json& spec, const std::string& path = "operator") {
  using namespace config;
  object(spec, path);
  const std::string kind = string(spec, "kind", path, "");
  if (kind == "dense-matrix") {
    const json* e = find(spec, "entries");
    if (!e || !e->is_array() || e->empty()) throw ConfigError(path + ".entries", "expected a square array of rows");
    const auto n = Eigen::Index(e->size());
    CMatrix a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::string rp = path + ".entries[" + std::to_string(i) + "]";
      const json& row = (*e)[std::size_t(i)];
      if (!row.is_array() || Eigen::Index(row.size()) != n) throw ConfigError(rp, "row length differs from row count");
      for (Eigen::Index k = 0; k < n; ++k)
        a(i, k) = complex(row[std::size_t(k)], rp + "[" + std::to_string(k) + "]");
    }
    if (!a.allFinite()) throw ConfigError(path + ".entries", "entries must be finite");
    return OperatorModel::dense(a);
  }
  if (kind == "diagonal-symbol") {
    if (const json* v = find(spec, "values")) {
      if (!v->is_array() || v->empty()) throw ConfigError(path + ".values", "expected a nonempty array");
      std::vector<cplx> vals;
      for (std::size_t i = 0; i < v->size(); ++i)
        vals.push_back(complex((*v)[i], path + ".values[" + std::to_string(i) + "]"));
      return OperatorModel(DiagonalSymbolSpec::from_values(vals));
    }
    DiagonalSymbolSpec s;
    s.a = positive(number(spec, "a", path, s.a), path + ".a");
    s.b = positive(number(spec, "b", path, s.b), path + ".b");
    s.grid = grid(spec, "s_grid", path, s.grid);
    if (!(s.grid.start > 1.0)) throw ConfigError(path + ".s_grid.start", "must exceed 1");
    s.sobolev = boolean(spec, "sobolev", path, true);
    return OperatorModel(s);
  }
  if (kind == "jordan-sum") {
    JordanSumSpec s;
    s.gamma = number(spec, "gamma", path, s.gamma);
    s.delta = number(spec, "delta", path, s.delta);
    s.N = integer(spec, "N", path, s.N);
    if (!(s.gamma > 0.0 && s.gamma < 1.0)) throw ConfigError(path + ".gamma", "must lie in (0, 1)");
    if (!(s.delta > 0.0 && s.delta < 1.0)) throw ConfigError(path + ".delta", "must lie in (0, 1)");
    if (s.N < 1 || s.N > 1000000) throw ConfigError(path + ".N", "must lie in [1, 1e6]");
    return OperatorModel(s);
  }
  if (kind == "operator-matrix") {
    OperatorMatrixSpec s;
    s.n = int(integer(spec, "n", path, s.n));
    if (s.n < 1 || s.n > 64) throw ConfigError(path + ".n", "must lie in [1, 64]");
    const std::string rep = string(spec, "representation", path, "analytic-supremum");
    if (rep == "grid")
      s.representation = OperatorMatrixRepresentation::grid;
    else if (rep != "analytic-supremum")
      throw ConfigError(path + ".representation", "expected analytic-supremum or grid");
    const long long gc = integer(spec, "grid_count", path, (long long)s.grid_count);
    if (gc < 1) throw ConfigError(path + ".grid_count", "must be positive");
    s.grid_count = std::size_t(gc);
    return OperatorModel(s);
  }
  throw ConfigError(path + ".kind", "expected dense-matrix, diagonal-symbol, jordan-sum or operator-matrix");
}

/// 64-bit FNV-1a of the compact JSON text, as 16 hex digits.
inline std::string digest_of(const json& j) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream s;
  s << std::hex;
  s.width(16);
  s.fill('0');
  s << h;
  return s.str();
}

inline AnalysisConfig parse_config(const json& doc) {
  using namespace config;
  object(doc, "<root>");
  AnalysisConfig c;
  c.digest = digest_of(doc);
  if (const json* op = find(doc, "operator")) {
    make_model(*op);
    c.operator_spec = *op;
  }
  if (const json* g = find(doc, "grids")) {
    object(*g, "grids");
    c.t_grid = grid(*g, "t_grid", "grids", c.t_grid);
    c.xi_grid = grid(*g, "xi_grid", "grids", c.xi_grid);
    if (const json* f = find(*g, "fourier_grid")) {
      object(*f, "grids.fourier_grid");
      c.fourier_grid.period = positive(number(*f, "period", "grids.fourier_grid", c.fourier_grid.period),
                                       "grids.fourier_grid.period");
      const long long s = integer(*f, "samples", "grids.fourier_grid", (long long)c.fourier_grid.samples);
      if (s < 16 || (s & (s - 1)) != 0)
        throw ConfigError("grids.fourier_grid.samples", "must be a power of two >= 16");
      c.fourier_grid.samples = std::size_t(s);
    }
  }
  if (const json* g = find(doc, "geometry")) c.geometry = geometry(*g, "geometry");
  if (const json* ind = find(doc, "indices")) {
    if (!ind->is_array() || ind->empty()) throw ConfigError("indices", "expected a nonempty list of [sigma, tau]");
    c.indices.clear();
    for (std::size_t i = 0; i < ind->size(); ++i) {
      const std::string p = "indices[" + std::to_string(i) + "]";
      const json& e = (*ind)[i];
      if (!e.is_array() || e.size() != 2) throw ConfigError(p, "expected [sigma, tau]");
      const double s = number(e[0], p + "[0]"), t = number(e[1], p + "[1]");
      if (!(s >= 0.0) || !(t >= 0.0) || !std::isfinite(s) || !std::isfinite(t))
        throw ConfigError(p, "sigma and tau must be finite and >= 0");
      c.indices.emplace_back(s, t);
    }
  }
  c.integer_power = boolean(doc, "integer_power", "", false);
  if (const json* g = find(doc, "growth")) {
    object(*g, "growth");
    const double a = number(*g, "alpha", "growth", 0.0), b = number(*g, "beta", "growth", 0.0);
    if (!(a >= 0.0) || !(b >= 0.0)) throw ConfigError("growth", "alpha and beta must be >= 0");
    c.growth = std::pair{a, b};
  }
  if (const json* t = find(doc, "tolerances")) {
    object(*t, "tolerances");
    c.tolerances.fit_tol = positive(number(*t, "fit_tol", "tolerances", c.tolerances.fit_tol), "tolerances.fit_tol");
    c.tolerances.quad_tol = positive(number(*t, "quad_tol", "tolerances", c.tolerances.quad_tol), "tolerances.quad_tol");
    c.tolerances.consistency_tol = positive(
        number(*t, "consistency_tol", "tolerances", c.tolerances.consistency_tol), "tolerances.consistency_tol");
  }
  if (const json* f = find(doc, "fractional")) {
    object(*f, "fractional");
    c.phi = number(*f, "phi", "fractional", c.phi);
    if (!(c.phi > 0.0 && c.phi <= kPi / 2)) throw ConfigError("fractional.phi", "must lie in (0, pi/2]");
    if (const json* t = find(*f, "tuples")) {
      if (!t->is_array()) throw ConfigError("fractional.tuples", "expected a list");
      for (std::size_t i = 0; i < t->size(); ++i) {
        const std::string p = "fractional.tuples[" + std::to_string(i) + "]";
        const json& e = object((*t)[i], p);
        FractionalTuple ft;
        ft.alpha = number(e, "alpha", p, ft.alpha);
        ft.beta = number(e, "beta", p, ft.beta);
        ft.eta = number(e, "eta", p, ft.eta);
        if (const json* l = find(e, "lambda")) ft.lambda = complex(*l, p + ".lambda");
        c.tuples.push_back(ft);
      }
    }
  }
  if (const json* m = find(doc, "multiplier")) {
    object(*m, "multiplier");
    auto& mc = c.multiplier;
    mc.symbol = string(*m, "symbol", "multiplier", mc.symbol);
    if (mc.symbol != "resolvent-power" && mc.symbol != "first-order" && mc.symbol != "inverse-square")
      throw ConfigError("multiplier.symbol", "expected resolvent-power, first-order or inverse-square");
    mc.a = positive(number(*m, "a", "multiplier", mc.a), "multiplier.a");
    mc.power = int(integer(*m, "power", "multiplier", mc.power));
    if (mc.power < 0) throw ConfigError("multiplier.power", "must be >= 0");
    const long long tr = integer(*m, "trials", "multiplier", (long long)mc.trials);
    if (tr < 0) throw ConfigError("multiplier.trials", "must be >= 0");
    mc.trials = std::size_t(tr);
    if (const json* pq = find(*m, "pairs")) {
      if (!pq->is_array() || pq->empty()) throw ConfigError("multiplier.pairs", "expected a nonempty list of [p, q]");
      mc.pairs.clear();
      for (std::size_t i = 0; i < pq->size(); ++i) {
        const std::string p = "multiplier.pairs[" + std::to_string(i) + "]";
        const json& e = (*pq)[i];
        if (!e.is_array() || e.size() != 2) throw ConfigError(p, "expected [p, q]");
        const double pp = number(e[0], p + "[0]"), qq = number(e[1], p + "[1]");
        if (!(pp >= 1.0) || std::isinf(pp) || !(qq >= pp)) throw ConfigError(p, "need 1 <= p <= q with p finite");
        mc.pairs.emplace_back(pp, qq);
      }
    }
  }
  if (const json* s = find(doc, "seed")) {
    if (!s->is_number_unsigned()) throw ConfigError("seed", "expected a nonnegative integer");
    c.seed = s->get<std::uint64_t>();
  }
  if (find(doc, "threads")) {
    const long long t = integer(doc, "threads", "", 1);
    if (t < 1 || t > 256) throw ConfigError("threads", "must lie in [1, 256]");
    c.threads = unsigned(t);
  }
  c.out_dir = string(doc, "out_dir", "", c.out_dir);
  return c;
}

inline AnalysisConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

// ---------------------------------------------------------------------------
// Reports

struct RunReport {
  std::string command;
  json summary = json::object();
  std::map<std::string, std::vector<ReportRow>> tables;
  std::vector<std::string> failures;
  bool pass() const { return failures.empty(); }
};

inline json number_json(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline void write_csv(const std::filesystem::path& file, const std::vector<ReportRow>& rows) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  out << "case,t_or_xi,value,fit_exponent,predicted,source,verdict\n";
  for (const auto& r : rows)
    out << r.case_name << ',' << r.t_or_xi << ',' << format_number(r.value) << ','
        << format_number(r.fit_exponent) << ',' << format_number(r.predicted) << ',' << r.source << ','
        << r.verdict << '\n';
}

inline void write_report(const RunReport& r, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  json s = r.summary;
  s["command"] = r.command;
  s["status"] = r.pass() ? "PASS" : "FAIL";
  s["failures"] = r.failures;
  json files = json::array();
  for (const auto& [name, rows] : r.tables) {
    if (rows.empty()) continue;
    write_csv(std::filesystem::path(out_dir) / (name + ".csv"), rows);
    files.push_back(name + ".csv");
  }
  s["tables"] = files;
  std::ofstream out(std::filesystem::path(out_dir) / "summary.json", std::ios::binary);
  if (!out) throw Error("cannot write summary.json in " + out_dir);
  out << s.dump(2) << '\n';
}

/// Runs `fn`, converting library errors into a StageError naming `stage`.
template <typename Fn>
auto stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

struct RunOptions {
  unsigned threads = 1;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::string only;
};

namespace detail {

inline OperatorModel require_model(const AnalysisConfig& c) {
  if (!c.operator_spec) throw ConfigError("operator", "this command needs an operator");
  return make_model(*c.operator_spec);
}

inline std::string index_name(double sigma, double tau) {
  return "sigma=" + format_number(sigma) + ";tau=" + format_number(tau);
}

inline json base_summary(const AnalysisConfig& c, const RunOptions& o) {
  json s;
  s["inputs_digest"] = c.digest;
  s["seed"] = o.seed.value_or(c.seed);
  if (c.operator_spec) s["operator"] = *c.operator_spec;
  return s;
}

/// Measures every index and checks each applicable predictor; growth may come from the
/// probed profile, the config, or the model's known pair.
inline void decay_stage(const OperatorModel& model, const AnalysisConfig& c, const RunOptions& o,
                        std::optional<std::pair<double, double>> growth, RunReport& r) {
  const double tol = o.tol.value_or(c.tolerances.consistency_tol);
  json list = json::array();
  auto& data = r.tables["decay"];
  auto& preds = r.tables["predictions"];
  for (const auto& [sigma, tau] : c.indices) {
    const std::string name = index_name(sigma, tau);
    MeasureOptions mo;
    mo.integer_power = c.integer_power;
    mo.measure_growth = !c.integer_power;
    mo.class_tol = c.tolerances.fit_tol;
    mo.threads = o.threads;
    const auto m = stage("measure_decay " + name, [&] { return measure_decay(model, sigma, tau, c.t_grid, mo); });
    for (std::size_t i = 0; i < c.t_grid.count(); ++i)
      data.push_back({name, format_number(c.t_grid[i]), m.norms[i], m.fit.exponent, std::nan(""), "measured",
                      to_string(m.classification)});
    json e;
    e["sigma"] = sigma;
    e["tau"] = tau;
    e["fit_exponent"] = number_json(m.fit.exponent);
    e["fit_constant"] = number_json(m.fit.constant);
    e["fit_residual"] = number_json(m.fit.residual);
    e["rho_hat"] = number_json(m.rho_hat);
    e["classification"] = to_string(m.classification);
    e["edge_dominated"] = m.edge_dominated;
    if (m.growth_mu_hat) e["growth_mu_hat"] = number_json(*m.growth_mu_hat);

    json verdicts = json::array();
    if (growth && !c.integer_power) {
      const auto [alpha, beta] = *growth;
      const double mu = std::max(0.0, m.growth_mu_hat.value_or(0.0));
      const double ftol = c.tolerances.fit_tol;
      const auto ga = predict_rate_growth_aware(alpha, beta, sigma, tau, mu, &c.geometry);
      std::vector<RatePrediction> candidates{
          require_bounded(predict_rate_general(alpha, beta, sigma, tau), mu, ftol),
          require_bounded(predict_rate_fourier_type(alpha, beta, sigma, tau, c.geometry), mu, ftol),
          require_bounded(predict_rate_type_cotype(alpha, beta, sigma, tau, c.geometry), mu, ftol),
          ga.interpolated};
      if (ga.scaling) candidates.push_back(*ga.scaling);
      for (const auto& p : candidates) {
        const auto rep = check_consistency(m, p, tol);
        json v;
        v["source"] = p.source;
        v["rho"] = number_json(p.rho);
        v["growth_offset"] = p.growth_offset;
        v["strict"] = p.strict;
        v["log_factor"] = p.log_factor;
        v["predicted"] = number_json(rep.verdict == Verdict::not_applicable ? std::nan("") : rep.predicted);
        v["margin"] = number_json(rep.verdict == Verdict::not_applicable ? std::nan("") : rep.margin);
        v["verdict"] = to_string(rep.verdict);
        json conds = json::array();
        for (const auto& cd : p.conditions) conds.push_back({{"name", cd.name}, {"status", to_string(cd.status)}});
        v["conditions"] = conds;
        verdicts.push_back(v);
        preds.push_back({name, "", m.rho_hat, m.fit.exponent,
                         rep.verdict == Verdict::not_applicable ? std::nan("") : rep.predicted, p.source,
                         to_string(rep.verdict)});
        if (rep.verdict == Verdict::fail) r.failures.push_back(name + " " + p.source);
      }
      e["stronger"] = ga.stronger;
    }
    e["predictions"] = verdicts;
    list.push_back(e);
  }
  r.summary["measurements"] = list;
}

}  // namespace detail

inline RunReport run_decay(const AnalysisConfig& c, const RunOptions& o) {
  RunReport r;
  r.command = "decay";
  r.summary = detail::base_summary(c, o);
  const auto model = detail::require_model(c);
  auto growth = c.growth;
  if (!growth) growth = model.metadata().known_growth;
  if (growth) r.summary["growth_pair"] = {growth->first, growth->second};
  detail::decay_stage(model, c, o, growth, r);
  return r;
}

inline RunReport run_analyze(const AnalysisConfig& c, const RunOptions& o) {
  RunReport r;
  r.command = "analyze";
  r.summary = detail::base_summary(c, o);
  const auto model = detail::require_model(c);
  const auto table = stage("probe", [&] {
    return probe_resolvent_norms(model, c.xi_grid, 0.0, {true, o.threads});
  });
  const auto prof = stage("fit_growth_profile", [&] { return fit_growth_profile(table); });
  const auto sym = symmetric_profile(table);
  auto& probe = r.tables["probe"];
  for (std::size_t i = 0; i < c.xi_grid.count(); ++i)
    probe.push_back({"resolvent", format_number(c.xi_grid[i]), sym[i],
                     c.xi_grid[i] <= prof.split ? prof.low_fit.exponent : prof.high_fit.exponent, std::nan(""),
                     "probe", to_string(table.positive[i].status)});
  json p;
  p["alpha_hat"] = prof.alpha_hat;
  p["beta_hat"] = prof.beta_hat;
  p["M_constant"] = number_json(prof.M_constant);
  p["low_fit_exponent"] = number_json(prof.low_fit.exponent);
  p["high_fit_exponent"] = number_json(prof.high_fit.exponent);
  p["high_fit_residual"] = number_json(prof.high_fit.residual);
  p["edge_dominated"] = prof.edge_dominated;
  p["label"] = prof.label;
  r.summary["profile"] = p;
  detail::decay_stage(model, c, o, std::pair{prof.alpha_hat, prof.beta_hat}, r);
  return r;
}

inline RunReport run_frac(const AnalysisConfig& c, const RunOptions& o) {
  RunReport r;
  r.command = "frac";
  r.summary = detail::base_summary(c, o);
  std::vector<FractionalTuple> tuples = c.tuples;
  if (tuples.empty())
    for (double a : {0.0, 0.5, 1.0, 2.0})
      for (double b : {0.5, 1.0, 2.0})
        for (double eta : {0.5, 1.0})
          for (const cplx lam : {cplx(0, 1), cplx(0, 2), cplx(0.5, 1)}) tuples.push_back({a, b, eta, lam});
  const double tol = o.tol.value_or(c.tolerances.quad_tol);
  std::vector<ContourIdentityCheck> checks(tuples.size());
  stage("contour_identity", [&] {
    parallel_for(tuples.size(), o.threads, [&](std::size_t i) {
      const auto& t = tuples[i];
      checks[i] = verify_contour_identity(t.alpha, t.beta, t.eta, t.lambda, c.phi);
    });
    return 0;
  });
  double worst = 0.0;
  auto& rows = r.tables["contour_identity"];
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    const auto& t = tuples[i];
    const double e = checks[i].rel_error;
    worst = std::max(worst, e);
    const std::string name = "alpha=" + format_number(t.alpha) + ";beta=" + format_number(t.beta) +
                             ";eta=" + format_number(t.eta);
    rows.push_back({name, format_complex(t.lambda), e, std::nan(""), tol, "contour", pass_fail(e < tol)});
    if (!(e < tol)) r.failures.push_back(name + ";lambda=" + format_complex(t.lambda));
  }
  r.summary["tuples"] = tuples.size();
  r.summary["max_rel_error"] = worst;
  r.summary["tolerance"] = tol;
  return r;
}

inline RunReport run_mult(const AnalysisConfig& c, const RunOptions& o) {
  RunReport r;
  r.command = "mult";
  r.summary = detail::base_summary(c, o);
  const auto& mc = c.multiplier;
  const auto& g = c.fourier_grid;
  Symbol sym;
  if (mc.symbol == "resolvent-power") {
    const auto model = detail::require_model(c);
    sym = stage("symbol", [&] { return resolvent_power_symbol(model, mc.power); });
  } else if (mc.symbol == "first-order") {
    const double a = mc.a;
    sym = scalar_symbol([a](double xi) { return 1.0 / cplx(a, xi); }, "first-order");
  } else {
    const double a = mc.a;
    sym = scalar_symbol([a](double xi) { return 1.0 / std::pow(a + std::abs(xi), 2); }, "inverse-square");
  }
  const auto table = stage("tabulate", [&] { return tabulate(sym, g, o.threads); });
  const auto norms = symbol_norms(table);
  const std::uint64_t seed = o.seed.value_or(c.seed);
  auto& rows = r.tables["pq_norms"];
  json list = json::array();
  for (const auto& [p, q] : mc.pairs) {
    const std::string name = "p=" + format_number(p) + ";q=" + format_number(q);
    const auto est = stage("estimate " + name, [&] {
      return estimate_pq_norm_lower(table, p, q, g, {mc.trials, seed, o.threads});
    });
    std::optional<double> upper;
    const double qc = std::isinf(q) ? 1.0 : q / (q - 1.0);
    if (c.geometry.hilbert && (p == 1.0 || p == 2.0) && (qc == 1.0 || qc == 2.0))
      upper = upper_bound_pq_norm_fourier_type(norms, p, q, {hilbert_fourier_constant(p), hilbert_fourier_constant(qc)},
                                               g.frequency_step());
    std::string verdict = "N/A";
    if (upper) {
      verdict = pass_fail(est.lower_bound <= *upper + 1e-6);
      if (verdict == "FAIL") r.failures.push_back(name);
    }
    rows.push_back({name, "", est.lower_bound, std::nan(""), upper.value_or(std::nan("")),
                    upper ? "fourier-type" : est.method, verdict});
    json e;
    e["p"] = number_json(p);
    e["q"] = number_json(q);
    e["lower_bound"] = est.lower_bound;
    e["upper_bound"] = upper ? json(*upper) : json(nullptr);
    e["method"] = est.method;
    e["verdict"] = verdict;
    list.push_back(e);
  }
  r.summary["symbol"] = sym.label;
  r.summary["exact_l2_norm"] = exact_l2_norm(table);
  r.summary["estimates"] = list;
  return r;
}

inline RunReport run_verify_examples(const RunOptions& o, const BatteryOptions& base = {}) {
  RunReport r;
  r.command = "verify-examples";
  BatteryOptions opt = base;
  opt.threads = o.threads;
  if (o.seed) opt.seed = *o.seed;
  json cases = json::array();
  auto& rows = r.tables["battery"];
  bool any = false;
  for (const auto& c : battery_cases()) {
    if (!matches(c, o.only)) continue;
    any = true;
    const auto res = run_case(c, opt);
    for (auto row : res.rows) {
      row.case_name = res.name + ";" + row.case_name;
      rows.push_back(row);
    }
    cases.push_back({{"name", res.name}, {"group", res.group}, {"status", pass_fail(res.pass)}, {"detail", res.detail}});
    if (!res.pass) r.failures.push_back(res.name);
  }
  if (!any) throw ConfigError("--only", "no battery case matches '" + o.only + "'");
  r.summary["seed"] = opt.seed;
  r.summary["only"] = o.only;
  r.summary["cases"] = cases;
  return r;
}

}  // namespace semistab
