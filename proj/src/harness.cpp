#include "markovgate/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "markovgate/bootstrap.hpp"
#include "markovgate/error.hpp"
#include "markovgate/numeric.hpp"
#include "markovgate/parallel.hpp"
#include "markovgate/rng.hpp"

namespace markovgate {

using nlohmann::json;

std::string_view to_string(PValueMode mode) {
  return mode == PValueMode::per_rep ? "per_rep" : "pooled";
}

PValueMode pvalue_mode_from_string(std::string_view text) {
  if (text == "per_rep") return PValueMode::per_rep;
  if (text == "pooled") return PValueMode::pooled;
  throw ConfigError("unknown p-value mode '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Config

void ExperimentConfig::validate() const {
  auto field = [](const std::string& name, const std::string& msg) {
    return ConfigError("field '" + name + "': " + msg);
  };
  try {
    model.validate();
  } catch (const ConfigError& e) {
    throw field("model", e.what());
  }
  try {
    sim.validate();
  } catch (const ConfigError& e) {
    throw field("sim", e.what());
  }
  try {
    weights.validate();
  } catch (const ConfigError& e) {
    throw field("weights", e.what());
  }
  if (mc_reps < 1) throw field("mc_reps", "must be >= 1");
  if (bootstrap_B < 1) throw field("bootstrap_B", "must be >= 1");
  if (alpha_levels.empty()) throw field("alpha_levels", "must not be empty");
  for (double a : alpha_levels) {
    if (!(a > 0.0 && a < 1.0)) throw field("alpha_levels", "values must lie in (0, 1)");
  }
  if (theta_grid.empty()) throw field("theta_grid", "must not be empty");
  for (double t : theta_grid) {
    if (!(t >= 0.0 && t <= 1.0)) throw field("theta_grid", "values must lie in [0, 1]");
  }
  if (bandwidth.c_scale <= 0.0) throw field("bandwidth.c_scale", "must be positive");
  if (bandwidth.kind == BandwidthKind::fixed) {
    if (!bandwidth.fixed) throw field("bandwidth.fixed", "required for kind 'fixed'");
    try {
      bandwidth.fixed->validate();
    } catch (const ConfigError& e) {
      throw field("bandwidth.fixed", e.what());
    }
  }
  if (bandwidth.exponent && !(*bandwidth.exponent > 0.0 && *bandwidth.exponent < 1.0)) {
    throw field("bandwidth.exponent", "must lie in (0, 1)");
  }
  if (bandwidth.kind == BandwidthKind::cv && bandwidth.cv_grid.empty()) {
    throw field("bandwidth.cv_grid", "must not be empty");
  }
  if (output_dir.empty()) throw field("output_dir", "must not be empty");
}

void ExperimentConfig::apply_paper_scale() {
  sim.n_obs = 2400;
  mc_reps = 1000;
  bootstrap_B = 3;
  pvalue_mode = PValueMode::pooled;
}

BandwidthTarget ExperimentConfig::bandwidth_target() const {
  return statistic == StatisticKind::t2 ? BandwidthTarget::t2 : BandwidthTarget::t1_family;
}

StatOptions ExperimentConfig::stat_options() const {
  StatOptions o;
  WeightSpec w = weights;
  if (!weight_kind_set) w.kind = default_weight_kind(statistic);
  o.weight = w;
  o.w_kernel = KernelSpec::make(w_kernel);
  o.k_kernel = KernelSpec::make(k_kernel);
  // Only the T1* calibration is cheap enough to run on every replicate.
  o.calibrate = statistic == StatisticKind::t1_star;
  return o;
}

namespace {

/// Reads one JSON object, recording the dotted path for diagnostics and
/// rejecting keys that were never looked at.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("field '" + display() + "': expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) throw type_error(key, "a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw type_error(key, "a finite number");
    return d;
  }

  std::size_t count(const std::string& key, std::size_t fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) throw type_error(key, "a nonnegative integer");
    return v.get<std::size_t>();
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw type_error(key, "a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) throw type_error(key, "a string");
    return v.get<std::string>();
  }

  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw type_error(key, "true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_array()) throw type_error(key, "an array of numbers");
    std::vector<double> out;
    for (const json& e : v) {
      if (!e.is_number()) throw type_error(key, "an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  const json& object(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  /// Wraps an enum parser so its error names this field.
  template <class Parse>
  auto choice(const std::string& key, Parse&& parse) {
    const std::string s = text(key, "");
    try {
      return parse(s);
    } catch (const ConfigError& e) {
      throw ConfigError("field '" + name(key) + "': " + e.what());
    }
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) {
        throw ConfigError("field '" + name(item.key()) + "': unknown field");
      }
    }
  }

 private:
  std::string display() const { return path_.empty() ? "<root>" : path_; }
  ConfigError type_error(const std::string& key, const char* expected) const {
    return ConfigError("field '" + name(key) + "': expected " + expected);
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_model(Fields& f, ModelSpec& m) {
  if (f.has("variant")) m.variant = f.choice("variant", model_from_string);
  m.kappa = f.number("kappa", m.kappa);
  m.alpha = f.number("alpha", m.alpha);
  m.sigma = f.number("sigma", m.sigma);
  m.theta = f.number("theta", m.theta);
  m.s_scale = f.number("s_scale", m.s_scale);
  if (f.has("jump_type")) m.jump_type = f.choice("jump_type", jump_type_from_string);
  f.finish();
}

void read_sim(Fields& f, SimConfig& s) {
  s.n_obs = f.count("n_obs", s.n_obs);
  s.delta = f.number("delta", s.delta);
  s.substeps = f.count("substeps", s.substeps);
  s.burn_in = f.count("burn_in", s.burn_in);
  if (f.has("latent_start")) s.latent_start = f.choice("latent_start", latent_start_from_string);
  f.finish();
}

void read_bandwidth(Fields& f, BandwidthRule& b) {
  if (f.has("kind")) b.kind = f.choice("kind", bandwidth_kind_from_string);
  b.c_scale = f.number("c_scale", b.c_scale);
  if (f.has("exponent")) b.exponent = f.number("exponent", 0.0);
  b.cv_grid = f.numbers("cv_grid", b.cv_grid);
  if (f.has("fixed")) {
    Fields g(f.object("fixed"), f.name("fixed"));
    Bandwidths bw;
    bw.b1 = g.number("b1", 0.0);
    bw.b2 = g.number("b2", 0.0);
    bw.h1 = g.number("h1", 0.0);
    bw.h2 = g.number("h2", 0.0);
    bw.h3 = g.number("h3", 0.0);
    g.finish();
    b.fixed = bw;
  }
  f.finish();
}

json config_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["model"] = {{"variant", std::string(to_string(c.model.variant))},
                {"kappa", c.model.kappa},
                {"alpha", c.model.alpha},
                {"sigma", c.model.sigma},
                {"theta", c.model.theta},
                {"s_scale", c.model.s_scale},
                {"jump_type", std::string(to_string(c.model.jump_type))}};
  j["sim"] = {{"n_obs", c.sim.n_obs},
              {"delta", c.sim.delta},
              {"substeps", c.sim.substeps},
              {"burn_in", c.sim.burn_in},
              {"latent_start", std::string(to_string(c.sim.latent_start))}};
  j["statistic"] = std::string(to_string(c.statistic));
  json bw = {{"kind", std::string(to_string(c.bandwidth.kind))},
             {"c_scale", c.bandwidth.c_scale},
             {"cv_grid", c.bandwidth.cv_grid}};
  if (c.bandwidth.exponent) bw["exponent"] = *c.bandwidth.exponent;
  if (c.bandwidth.fixed) {
    const Bandwidths& f = *c.bandwidth.fixed;
    bw["fixed"] = {{"b1", f.b1}, {"b2", f.b2}, {"h1", f.h1}, {"h2", f.h2}, {"h3", f.h3}};
  }
  j["bandwidth"] = bw;
  json w = {{"trim_quantile", c.weights.trim_quantile}, {"smoothness", c.weights.smoothness}};
  if (c.weight_kind_set) w["kind"] = std::string(to_string(c.weights.kind));
  j["weights"] = w;
  j["w_kernel"] = std::string(to_string(c.w_kernel));
  j["k_kernel"] = std::string(to_string(c.k_kernel));
  j["mc_reps"] = c.mc_reps;
  j["bootstrap_B"] = c.bootstrap_B;
  j["pvalue_mode"] = std::string(to_string(c.pvalue_mode));
  j["alpha_levels"] = c.alpha_levels;
  j["theta_grid"] = c.theta_grid;
  j["output_dir"] = c.output_dir;
  j["master_seed"] = c.master_seed;
  return j;
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line:column.
    std::size_t line = 1, col = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, json_text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (json_text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("JSON syntax error at line " + std::to_string(line) + ", column " +
                      std::to_string(col) + ": " + e.what());
  }

  ExperimentConfig c;
  Fields f(j, "");
  c.name = f.text("name", c.name);
  if (f.has("model")) {
    Fields g(f.object("model"), "model");
    read_model(g, c.model);
  }
  if (f.has("sim")) {
    Fields g(f.object("sim"), "sim");
    read_sim(g, c.sim);
  }
  if (f.has("statistic")) c.statistic = f.choice("statistic", statistic_from_string);
  if (f.has("bandwidth")) {
    Fields g(f.object("bandwidth"), "bandwidth");
    read_bandwidth(g, c.bandwidth);
  }
  if (f.has("weights")) {
    Fields g(f.object("weights"), "weights");
    if (g.has("kind")) {
      c.weights.kind = g.choice("kind", weight_kind_from_string);
      c.weight_kind_set = true;
    }
    c.weights.trim_quantile = g.number("trim_quantile", c.weights.trim_quantile);
    c.weights.smoothness = g.number("smoothness", c.weights.smoothness);
    g.finish();
  }
  if (f.has("w_kernel")) c.w_kernel = f.choice("w_kernel", kernel_from_string);
  if (f.has("k_kernel")) c.k_kernel = f.choice("k_kernel", kernel_from_string);
  c.mc_reps = f.count("mc_reps", c.mc_reps);
  c.bootstrap_B = f.count("bootstrap_B", c.bootstrap_B);
  if (f.has("pvalue_mode")) c.pvalue_mode = f.choice("pvalue_mode", pvalue_mode_from_string);
  c.alpha_levels = f.numbers("alpha_levels", c.alpha_levels);
  c.theta_grid = f.numbers("theta_grid", c.theta_grid);
  c.output_dir = f.text("output_dir", c.output_dir);
  c.master_seed = f.seed("master_seed", c.master_seed);
  c.threads = f.count("threads", c.threads);
  f.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

std::string config_to_json(const ExperimentConfig& config) { return config_json(config).dump(2); }

std::string config_hash(const ExperimentConfig& config) {
  const std::string text = config_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Monte Carlo

std::string family_label(const ModelSpec& m) {
  switch (m.variant) {
    case ModelVariant::ou_null: return "ou";
    case ModelVariant::h1_stochastic_level: return "h1";
    case ModelVariant::h2_stochastic_vol: return "h2";
    case ModelVariant::h3_jumps: return "h3";
  }
  return "?";
}

std::string s_or_jumptype_label(const ModelSpec& m) {
  switch (m.variant) {
    case ModelVariant::h1_stochastic_level:
    case ModelVariant::h2_stochastic_vol: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%g", m.s_scale);
      return buf;
    }
    case ModelVariant::h3_jumps: return m.jump_type == JumpType::gaussian_iid ? "i" : "ii";
    default: return "-";
  }
}

const PowerRow* PowerTable::find(double theta, double alpha) const {
  for (const auto& r : rows) {
    if (r.theta == theta && r.alpha == alpha) return &r;
  }
  return nullptr;
}

double pooling_scale(StatisticKind kind, double statistic, const std::optional<Calibration>& cal) {
  if (kind != StatisticKind::t1_star) return statistic;
  if (!cal || !(cal->sigma > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return (statistic - cal->mu) / cal->sigma;
}

namespace {

struct RepResult {
  bool failed = false;
  std::string failure;
  double statistic = 0.0;
  double scaled = 0.0;                 // statistic on the pooling scale
  double p_per_rep = 0.0;
  std::vector<double> bootstrap;       // raw replicate statistics
  std::vector<double> bootstrap_scaled;
};

/// Simulate one path, select bandwidths, compute the statistic and its
/// bootstrap replicates with the same bandwidths.
RepResult one_replicate(const ExperimentConfig& c, const ModelSpec& model, std::size_t rep) {
  RepResult out;
  try {
    SimConfig sim = c.sim;
    sim.seed = c.master_seed;
    const Path path = simulate(model, sim, rep);
    const TripleSample sample = TripleSample::from_path(path.values, path.delta);
    const Bandwidths bw = select(c.bandwidth, sample, c.bandwidth_target());
    const StatOptions opts = c.stat_options();
    const TestReport report = compute_statistic(c.statistic, sample, bw, opts);
    std::optional<Calibration> cal;
    if (report.mu && report.sigma) cal = Calibration{*report.mu, *report.sigma, 0.0, 0.0};
    out.statistic = report.statistic;
    out.scaled = pooling_scale(c.statistic, report.statistic, cal);

    const BootstrapResult boot = bootstrap_null(path, c.statistic, bw, c.bootstrap_B,
                                                derive_seed(c.master_seed, rep, 1), opts, 1);
    out.bootstrap = boot.statistics;
    out.bootstrap_scaled.reserve(boot.statistics.size());
    for (double s : boot.statistics) out.bootstrap_scaled.push_back(pooling_scale(c.statistic, s, cal));
    out.p_per_rep = bootstrap_pvalue(out.statistic, out.bootstrap);
    if (!std::isfinite(out.statistic)) throw NumericalFailure("non-finite statistic");
  } catch (const Error& e) {
    out.failed = true;
    out.failure = e.what();
  }
  return out;
}

std::vector<RepResult> run_reps(const ExperimentConfig& c, const ModelSpec& model) {
  return parallel_map(
      c.mc_reps, [&](std::size_t rep) { return one_replicate(c, model, rep); }, c.threads);
}

void check_failures(const std::vector<RepResult>& reps, double theta) {
  std::size_t failed = 0;
  const RepResult* first = nullptr;
  for (const auto& r : reps) {
    if (r.failed) {
      ++failed;
      if (!first) first = &r;
    }
  }
  if (20 * failed > reps.size()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", theta);
    throw NumericalFailure(std::to_string(failed) + " of " + std::to_string(reps.size()) +
                           " replicates failed at theta = " + buf + " (first: " + first->failure +
                           ")");
  }
}

}  // namespace

PowerTable run_power(const ExperimentConfig& config) {
  config.validate();
  PowerTable table;
  for (double theta : config.theta_grid) {
    ModelSpec model = config.model;
    model.theta = theta;
    const std::vector<RepResult> reps = run_reps(config, model);
    check_failures(reps, theta);

    std::vector<double> pooled;
    if (config.pvalue_mode == PValueMode::pooled) {
      for (const auto& r : reps) {
        if (r.failed) continue;
        for (double s : r.bootstrap_scaled) {
          if (std::isfinite(s)) pooled.push_back(s);
        }
      }
    }

    std::vector<ReplicateOutcome> outcomes;
    for (std::size_t i = 0; i < reps.size(); ++i) {
      ReplicateOutcome o;
      o.theta = theta;
      o.rep = i;
      o.failed = reps[i].failed;
      o.failure = reps[i].failure;
      if (o.failed) {
        ++table.failures;
        o.statistic = o.p_value = std::numeric_limits<double>::quiet_NaN();
      } else {
        o.statistic = reps[i].statistic;
        o.p_value = config.pvalue_mode == PValueMode::pooled
                        ? bootstrap_pvalue(reps[i].scaled, pooled)
                        : reps[i].p_per_rep;
      }
      outcomes.push_back(o);
    }

    for (double alpha : config.alpha_levels) {
      PowerRow row;
      row.family = family_label(model);
      row.s_or_jumptype = s_or_jumptype_label(model);
      row.alpha = alpha;
      row.theta = theta;
      for (const auto& o : outcomes) {
        if (o.failed) continue;
        ++row.reps;
        if (o.p_value <= alpha) ++row.rejections;
      }
      row.rate = row.reps ? static_cast<double>(row.rejections) / static_cast<double>(row.reps) : 0.0;
      row.se = row.reps ? std::sqrt(row.rate * (1.0 - row.rate) / static_cast<double>(row.reps)) : 0.0;
      table.rows.push_back(row);
    }
    table.replicates.insert(table.replicates.end(), outcomes.begin(), outcomes.end());
  }
  return table;
}

PowerTable run_size(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.theta_grid = {0.0};
  return run_power(c);
}

DensityComparison run_bootstrap_density(const ExperimentConfig& config) {
  config.validate();
  if (config.mc_reps < 100) throw ConfigError("field 'mc_reps': bootstrap-density needs >= 100");
  const std::vector<RepResult> reps = run_reps(config, config.model);
  check_failures(reps, config.model.theta);

  DensityComparison d;
  d.normalized = config.statistic == StatisticKind::t1_star;
  for (const auto& r : reps) {
    if (r.failed) {
      ++d.failures;
      continue;
    }
    if (std::isfinite(r.scaled)) d.true_statistics.push_back(r.scaled);
    for (double s : r.bootstrap_scaled) {
      if (std::isfinite(s)) d.pooled_bootstrap.push_back(s);
    }
  }
  if (d.true_statistics.size() < 2 || d.pooled_bootstrap.size() < 2) {
    throw NumericalFailure("bootstrap-density: too few finite statistics");
  }
  d.ks = ks_distance(d.true_statistics, d.pooled_bootstrap);

  const auto [tmin, tmax] = std::minmax_element(d.true_statistics.begin(), d.true_statistics.end());
  const auto [bmin, bmax] = std::minmax_element(d.pooled_bootstrap.begin(), d.pooled_bootstrap.end());
  const double lo = std::min(*tmin, *bmin), hi = std::max(*tmax, *bmax);
  const double pad = 0.1 * (hi - lo);
  constexpr std::size_t kGrid = 201;
  d.grid.resize(kGrid);
  for (std::size_t i = 0; i < kGrid; ++i) {
    d.grid[i] = lo - pad + (hi - lo + 2.0 * pad) * static_cast<double>(i) / (kGrid - 1);
  }
  d.true_density = kde_on_grid(d.true_statistics, d.grid);
  d.bootstrap_density = kde_on_grid(d.pooled_bootstrap, d.grid);
  return d;
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

void write_power_csv(const PowerTable& table, std::ostream& out) {
  out << "family,s_or_jumptype,alpha,theta,rejections,reps,rate,se\n";
  for (const auto& r : table.rows) {
    out << r.family << ',' << r.s_or_jumptype << ',' << short_fmt(r.alpha) << ','
        << short_fmt(r.theta) << ',' << r.rejections << ',' << r.reps << ',' << fmt(r.rate) << ','
        << fmt(r.se) << '\n';
  }
}

void write_replicates_csv(const PowerTable& table, std::ostream& out) {
  out << "theta,rep,statistic,p_value,status\n";
  for (const auto& r : table.replicates) {
    out << short_fmt(r.theta) << ',' << r.rep << ',' << fmt(r.statistic) << ',' << fmt(r.p_value)
        << ',' << (r.failed ? "failed" : "ok") << '\n';
  }
}

void write_density_csv(const DensityComparison& d, std::ostream& out) {
  out << "grid,true_density,bootstrap_density\n";
  for (std::size_t i = 0; i < d.grid.size(); ++i) {
    out << fmt(d.grid[i]) << ',' << fmt(d.true_density[i]) << ',' << fmt(d.bootstrap_density[i])
        << '\n';
  }
}

void write_statistics_csv(const DensityComparison& d, std::ostream& out) {
  out << "source,index,value\n";
  for (std::size_t i = 0; i < d.true_statistics.size(); ++i) {
    out << "monte_carlo," << i << ',' << fmt(d.true_statistics[i]) << '\n';
  }
  for (std::size_t i = 0; i < d.pooled_bootstrap.size(); ++i) {
    out << "bootstrap," << i << ',' << fmt(d.pooled_bootstrap[i]) << '\n';
  }
}

std::string manifest_json(std::string_view command, const ExperimentConfig& config,
                          const std::vector<std::string>& outputs,
                          const std::vector<std::pair<std::string, double>>& summary) {
  json j;
  j["tool"] = "markovgate";
  j["version"] = std::string(kVersion);
  j["command"] = std::string(command);
  j["config_hash"] = config_hash(config);
  j["master_seed"] = config.master_seed;
  j["config"] = config_json(config);
  j["outputs"] = outputs;
  json s = json::object();
  for (const auto& [k, v] : summary) s[k] = v;
  j["summary"] = s;
  return j.dump(2) + "\n";
}

std::vector<std::string> run_and_write(std::string_view command, const ExperimentConfig& config) {
  namespace fs = std::filesystem;
  const fs::path dir(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("field 'output_dir': cannot create " + dir.string());

  auto open = [&](const std::string& name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + (dir / name).string());
    return f;
  };

  std::vector<std::string> files;
  std::vector<std::pair<std::string, double>> summary;
  if (command == "size" || command == "power") {
    const PowerTable t = command == "size" ? run_size(config) : run_power(config);
    {
      auto f = open("power_table.csv");
      write_power_csv(t, f);
    }
    {
      auto f = open("replicates.csv");
      write_replicates_csv(t, f);
    }
    files = {"power_table.csv", "replicates.csv"};
    summary.emplace_back("failures", static_cast<double>(t.failures));
  } else if (command == "bootstrap-density") {
    const DensityComparison d = run_bootstrap_density(config);
    {
      auto f = open("density.csv");
      write_density_csv(d, f);
    }
    {
      auto f = open("statistics.csv");
      write_statistics_csv(d, f);
    }
    files = {"density.csv", "statistics.csv"};
    summary.emplace_back("ks_distance", d.ks);
    summary.emplace_back("failures", static_cast<double>(d.failures));
    summary.emplace_back("normalized", d.normalized ? 1.0 : 0.0);
  } else {
    throw ConfigError("unknown experiment command '" + std::string(command) + "'");
  }
  {
    auto f = open("manifest.json");
    f << manifest_json(command, config, files, summary);
  }
  files.push_back("manifest.json");
  return files;
}

}  // namespace markovgate
