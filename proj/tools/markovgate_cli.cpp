#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "markovgate/bandwidth.hpp"
#include "markovgate/bootstrap.hpp"
#include "markovgate/error.hpp"
#include "markovgate/harness.hpp"
#include "markovgate/models.hpp"
#include "markovgate/stats.hpp"

namespace mg = markovgate;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct SimulateArgs {
  std::string model = "ou";
  std::size_t n = 1200;
  std::uint64_t seed = 1;
  std::uint64_t path_id = 0;
  double theta = 0.0;
  double s_scale = 10.0;
  std::string jump_type = "i";
  double kappa = 0.2, alpha = 0.085, sigma = 0.08;
  double delta = 1.0 / 52.0;
  std::size_t substeps = 20, burn_in = 500;
  std::string latent_start = "long_run_mean";
  std::string output;
};

struct TestArgs {
  std::string input;
  std::string statistic = "t1_star";
  std::size_t bootstrap = 0;
  std::uint64_t seed = 1;
  double c_scale = 1.0;
  std::string bandwidth_kind = "empirical_rule";
  bool no_calibrate = false;
  std::string csv;
};

struct ExperimentArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::optional<std::size_t> reps;
  std::optional<std::size_t> bootstrap;
  std::optional<std::size_t> threads;
  bool paper_scale = false;
};

struct BandwidthArgs {
  std::string input;
  std::string target = "t1_family";
  std::string kind = "empirical_rule";
  double c_scale = 1.0;
};

mg::Path read_input(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw mg::ConfigError("cannot open input series " + file);
  try {
    return mg::read_path_csv(in);
  } catch (const mg::ConfigError& e) {
    throw mg::ConfigError(file + ": " + e.what());
  }
}

int run_simulate(const SimulateArgs& a) {
  mg::ModelSpec m;
  m.variant = mg::model_from_string(a.model);
  m.kappa = a.kappa;
  m.alpha = a.alpha;
  m.sigma = a.sigma;
  m.theta = a.theta;
  m.s_scale = a.s_scale;
  m.jump_type = mg::jump_type_from_string(a.jump_type);
  mg::SimConfig c;
  c.n_obs = a.n;
  c.delta = a.delta;
  c.substeps = a.substeps;
  c.burn_in = a.burn_in;
  c.latent_start = mg::latent_start_from_string(a.latent_start);
  c.seed = a.seed;
  const mg::Path p = mg::simulate(m, c, a.path_id);
  if (a.output.empty()) {
    mg::write_path_csv(p, std::cout);
  } else {
    std::ofstream out(a.output, std::ios::binary);
    if (!out) throw mg::ConfigError("cannot write " + a.output);
    mg::write_path_csv(p, out);
  }
  if (p.diagnostics.feller_violated) {
    std::cerr << "warning: Feller condition fails for the volatility factor (ratio "
              << m.feller_ratio() << ")\n";
  }
  return 0;
}

std::string opt(const std::optional<double>& v) {
  if (!v) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", *v);
  return buf;
}

int run_test(const TestArgs& a) {
  const mg::Path path = read_input(a.input);
  const mg::TripleSample sample = mg::TripleSample::from_path(path.values, path.delta);
  const mg::StatisticKind kind = mg::statistic_from_string(a.statistic);
  mg::BandwidthRule rule;
  rule.kind = mg::bandwidth_kind_from_string(a.bandwidth_kind);
  rule.c_scale = a.c_scale;
  const mg::Bandwidths bw = mg::select(rule, sample,
                                       kind == mg::StatisticKind::t2 ? mg::BandwidthTarget::t2
                                                                     : mg::BandwidthTarget::t1_family);
  mg::StatOptions options;
  options.calibrate = !a.no_calibrate;
  mg::TestReport report = mg::compute_statistic(kind, sample, bw, options);
  if (a.bootstrap > 0) {
    const mg::BootstrapResult boot = mg::bootstrap_null(path, kind, bw, a.bootstrap, a.seed, options);
    report.p_bootstrap = mg::bootstrap_pvalue(report.statistic, boot.statistics);
  }

  std::cout << "statistic:        " << mg::to_string(kind) << '\n'
            << "value:            " << opt(report.statistic) << '\n'
            << "n_used:           " << report.n_used << '\n'
            << "bandwidths:       b1=" << bw.b1 << " b2=" << bw.b2 << " h1=" << bw.h1
            << " h2=" << bw.h2 << " h3=" << bw.h3 << '\n';
  if (report.mu) {
    std::cout << "mu:               " << opt(report.mu) << '\n'
              << "sigma:            " << opt(report.sigma) << '\n'
              << "z_score:          " << opt(report.z_score) << '\n'
              << "p_normal:         " << opt(report.p_normal) << '\n'
              << "r_scale:          " << opt(report.r_scale) << '\n'
              << "dof:              " << opt(report.dof) << '\n'
              << "p_chisq:          " << opt(report.p_chisq) << '\n';
  }
  if (report.calibration_failed) std::cout << "calibration:      failed (" << report.calibration_note << ")\n";
  if (report.p_bootstrap) std::cout << "p_bootstrap:      " << opt(report.p_bootstrap) << '\n';
  std::cout << "floor_breaches:   " << report.floor_breaches << '\n'
            << "inner_dropped:    " << report.inner_dropped << '\n';

  const std::string header =
      "statistic,value,n_used,mu,sigma,z_score,p_normal,r_scale,dof,p_chisq,p_bootstrap,b1,b2,h1,h2,h3\n";
  char bws[200];
  std::snprintf(bws, sizeof bws, "%.10g,%.10g,%.10g,%.10g,%.10g", bw.b1, bw.b2, bw.h1, bw.h2, bw.h3);
  const std::string row = std::string(mg::to_string(kind)) + ',' + opt(report.statistic) + ',' +
                          std::to_string(report.n_used) + ',' + opt(report.mu) + ',' +
                          opt(report.sigma) + ',' + opt(report.z_score) + ',' +
                          opt(report.p_normal) + ',' + opt(report.r_scale) + ',' + opt(report.dof) +
                          ',' + opt(report.p_chisq) + ',' + opt(report.p_bootstrap) + ',' + bws + '\n';
  if (a.csv.empty()) {
    std::cout << '\n' << header << row;
  } else {
    std::ofstream out(a.csv, std::ios::binary);
    if (!out) throw mg::ConfigError("cannot write " + a.csv);
    out << header << row;
  }
  return 0;
}

int run_experiment(const std::string& command, const ExperimentArgs& a) {
  mg::ExperimentConfig c = mg::load_config(a.config);
  if (a.paper_scale) c.apply_paper_scale();
  if (a.seed) c.master_seed = *a.seed;
  if (a.output_dir) c.output_dir = *a.output_dir;
  if (a.reps) c.mc_reps = *a.reps;
  if (a.bootstrap) c.bootstrap_B = *a.bootstrap;
  if (a.threads) c.threads = *a.threads;
  c.validate();
  const auto files = mg::run_and_write(command, c);
  for (const auto& f : files) std::cout << (std::filesystem::path(c.output_dir) / f).string() << '\n';
  return 0;
}

int run_bandwidth(const BandwidthArgs& a) {
  const mg::Path path = read_input(a.input);
  const mg::TripleSample sample = mg::TripleSample::from_path(path.values, path.delta);
  mg::BandwidthRule rule;
  rule.kind = mg::bandwidth_kind_from_string(a.kind);
  rule.c_scale = a.c_scale;
  const mg::Bandwidths bw = mg::select(rule, sample, mg::bandwidth_target_from_string(a.target));
  std::printf("b1,b2,h1,h2,h3\n%.10g,%.10g,%.10g,%.10g,%.10g\n", bw.b1, bw.b2, bw.h1, bw.h2, bw.h3);
  return 0;
}

void add_experiment_options(CLI::App* sub, ExperimentArgs& a) {
  sub->add_option("--config", a.config, "Experiment JSON file")->required()->check(CLI::ExistingFile);
  sub->add_option("--seed", a.seed, "Override master_seed");
  sub->add_option("--output-dir", a.output_dir, "Override output_dir");
  sub->add_option("--reps", a.reps, "Override mc_reps");
  sub->add_option("--bootstrap", a.bootstrap, "Override bootstrap_B");
  sub->add_option("--threads", a.threads, "Worker threads (default MARKOVGATE_THREADS or all cores)");
  sub->add_flag("--paper-scale", a.paper_scale, "n = 2400, 1000 reps, 3 pooled bootstrap draws per rep");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonparametric tests of the Markov property"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mg::kVersion));

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Simulate a path and write index,time,value CSV");
  s->add_option("--model", sim.model, "ou, h1, h2 or h3");
  s->add_option("--n", sim.n, "Observations retained (path length n + 2)");
  s->add_option("--seed", sim.seed);
  s->add_option("--path-id", sim.path_id);
  s->add_option("--theta", sim.theta);
  s->add_option("--s", sim.s_scale, "Time-scale separation of the latent factor");
  s->add_option("--jump-type", sim.jump_type, "i (Gaussian iid) or ii (CIR driven)");
  s->add_option("--kappa", sim.kappa);
  s->add_option("--alpha", sim.alpha);
  s->add_option("--sigma", sim.sigma);
  s->add_option("--delta", sim.delta);
  s->add_option("--substeps", sim.substeps);
  s->add_option("--burn-in", sim.burn_in);
  s->add_option("--latent-start", sim.latent_start, "long_run_mean or null_level");
  s->add_option("--output,-o", sim.output, "Output file (default stdout)");

  TestArgs test;
  auto* t = app.add_subcommand("test", "Test one series for the Markov property");
  t->add_option("--input", test.input, "Series CSV (index,time,value)")->required();
  t->add_option("--statistic", test.statistic, "t0, t1, t1_star or t2");
  t->add_option("--bootstrap", test.bootstrap, "Bootstrap replicates (0 disables)");
  t->add_option("--seed", test.seed);
  t->add_option("--bandwidth-scale", test.c_scale);
  t->add_option("--bandwidth-kind", test.bandwidth_kind, "empirical_rule or cv");
  t->add_flag("--no-calibrate", test.no_calibrate, "Skip the asymptotic calibration");
  t->add_option("--csv", test.csv, "Write the report row to this CSV file instead of stdout");

  ExperimentArgs size_args, power_args, density_args;
  add_experiment_options(app.add_subcommand("size", "Rejection rates under the null"), size_args);
  add_experiment_options(app.add_subcommand("power", "Rejection rates over theta_grid"), power_args);
  add_experiment_options(
      app.add_subcommand("bootstrap-density", "Monte Carlo vs pooled bootstrap distribution"),
      density_args);

  BandwidthArgs bwa;
  auto* b = app.add_subcommand("bandwidth", "Print the selected bandwidths for a series");
  b->add_option("--input", bwa.input, "Series CSV")->required();
  b->add_option("--target", bwa.target, "t1_family or t2");
  b->add_option("--kind", bwa.kind, "empirical_rule or cv");
  b->add_option("--c-scale", bwa.c_scale);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (s->parsed()) return run_simulate(sim);
    if (t->parsed()) return run_test(test);
    if (app.got_subcommand("size")) return run_experiment("size", size_args);
    if (app.got_subcommand("power")) return run_experiment("power", power_args);
    if (app.got_subcommand("bootstrap-density")) return run_experiment("bootstrap-density", density_args);
    if (b->parsed()) return run_bandwidth(bwa);
  } catch (const mg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const mg::Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitConfig;
}
