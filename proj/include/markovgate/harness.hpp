#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "markovgate/bandwidth.hpp"
#include "markovgate/models.hpp"
#include "markovgate/stats.hpp"

namespace markovgate {

inline constexpr std::string_view kVersion = "0.1.0";

/// How a replicate's statistic is turned into a p-value.
///   per_rep: its own B bootstrap replicates.
///   pooled:  all bootstrap replicates of the same theta pooled together,
///            on the scale returned by pooling_scale().
enum class PValueMode { per_rep, pooled };

std::string_view to_string(PValueMode mode);
PValueMode pvalue_mode_from_string(std::string_view text);

struct ExperimentConfig {
  std::string name = "experiment";
  ModelSpec model;
  SimConfig sim;
  StatisticKind statistic = StatisticKind::t1_star;
  BandwidthRule bandwidth;
  WeightSpec weights;          // kind defaults to the statistic's own weight
  bool weight_kind_set = false;
  KernelName w_kernel = KernelName::epanechnikov;
  KernelName k_kernel = KernelName::epanechnikov;
  std::size_t mc_reps = 200;
  std::size_t bootstrap_B = 99;
  PValueMode pvalue_mode = PValueMode::per_rep;
  std::vector<double> alpha_levels = {0.01, 0.05, 0.10};
  std::vector<double> theta_grid = {0.0};
  std::string output_dir = "out";
  std::uint64_t master_seed = 20240611;
  std::size_t threads = 0;     // 0: MARKOVGATE_THREADS or hardware

  /// Throws ConfigError naming the offending field.
  void validate() const;

  /// n = 2400, 1000 reps, 3 bootstrap replicates per rep pooled per theta.
  void apply_paper_scale();

  BandwidthTarget bandwidth_target() const;
  StatOptions stat_options() const;
};

/// Parses the JSON config format. Syntax errors report line and column;
/// type or value errors report the dotted field path.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& file);
/// Canonical JSON (sorted keys, fixed number formatting).
std::string config_to_json(const ExperimentConfig& config);
/// FNV-1a 64 of the canonical JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

struct PowerRow {
  std::string family;
  std::string s_or_jumptype;
  double alpha = 0.0;
  double theta = 0.0;
  std::size_t rejections = 0;
  std::size_t reps = 0;
  double rate = 0.0;
  double se = 0.0;
};

struct ReplicateOutcome {
  double theta = 0.0;
  std::size_t rep = 0;
  double statistic = 0.0;
  double p_value = 0.0;
  bool failed = false;
  std::string failure;
};

struct PowerTable {
  std::vector<PowerRow> rows;
  std::vector<ReplicateOutcome> replicates;
  std::size_t failures = 0;

  const PowerRow* find(double theta, double alpha) const;
};

/// Family label of the table rows ("ou", "h1", "h2", "h3").
std::string family_label(const ModelSpec& m);
/// s_scale for h1/h2, "i"/"ii" for h3, "-" for the null.
std::string s_or_jumptype_label(const ModelSpec& m);

/// theta = 0 only.
PowerTable run_size(const ExperimentConfig& config);
/// Every theta of the grid. Path p of every theta uses the same random
/// streams. More than 5% failed replicates per theta raise NumericalFailure.
PowerTable run_power(const ExperimentConfig& config);

struct DensityComparison {
  std::vector<double> true_statistics;    // one per Monte Carlo rep
  std::vector<double> pooled_bootstrap;   // bootstrap_B per rep
  std::vector<double> grid;
  std::vector<double> true_density;
  std::vector<double> bootstrap_density;
  double ks = 0.0;
  bool normalized = false;
  std::size_t failures = 0;
};

/// Statistic on the scale used for pooling across samples: the z-score
/// (T - mu) / sigma of the nuisance-free calibration for T1*, the raw value
/// otherwise.
double pooling_scale(StatisticKind kind, double statistic, const std::optional<Calibration>& cal);

/// Monte Carlo statistics under the configured model against pooled
/// bootstrap statistics, summarized by kernel densities on a common grid and
/// their Kolmogorov distance.
DensityComparison run_bootstrap_density(const ExperimentConfig& config);

void write_power_csv(const PowerTable& table, std::ostream& out);
void write_replicates_csv(const PowerTable& table, std::ostream& out);
void write_density_csv(const DensityComparison& d, std::ostream& out);
void write_statistics_csv(const DensityComparison& d, std::ostream& out);

/// manifest.json: command, config hash, canonical config, seed, version,
/// output files and optional summary numbers.
std::string manifest_json(std::string_view command, const ExperimentConfig& config,
                          const std::vector<std::string>& outputs,
                          const std::vector<std::pair<std::string, double>>& summary = {});

/// Runs `command` (size, power or bootstrap-density) and writes its files
/// into config.output_dir. Returns the names of the files written.
std::vector<std::string> run_and_write(std::string_view command, const ExperimentConfig& config);

}  // namespace markovgate
