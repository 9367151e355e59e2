#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace markovgate {

enum class ModelVariant { ou_null, h1_stochastic_level, h2_stochastic_vol, h3_jumps };
enum class JumpType { gaussian_iid, cir_driven };

std::string_view to_string(ModelVariant v);
ModelVariant model_from_string(std::string_view text);  // also accepts ou, h1, h2, h3
std::string_view to_string(JumpType t);
JumpType jump_type_from_string(std::string_view text);  // also accepts i, ii

/// OU core dX = kappa (alpha - X) dt + sigma dW, and the three
/// latent-state alternatives mixed in with weight theta.
struct ModelSpec {
  ModelVariant variant = ModelVariant::ou_null;
  double kappa = 0.2;
  double alpha = 0.085;
  double sigma = 0.08;
  double theta = 0.0;
  double s_scale = 10.0;
  JumpType jump_type = JumpType::gaussian_iid;

  void validate() const;

  /// 2 kappa_2 b / sigma_2^2 of the stochastic-volatility CIR factor; below 1
  /// the Feller condition fails.
  double feller_ratio() const;
};

/// Initial state of the latent factors of the alternatives.
///   long_run_mean: alpha_t = s alpha, Y_t = s alpha, J_t = 0.085.
///   null_level:    alpha_t = alpha, Y_t = sigma^2, J_t = 0.085, so the
///                  path leaves the null and drifts toward the alternative.
enum class LatentStart { long_run_mean, null_level };

std::string_view to_string(LatentStart s);
LatentStart latent_start_from_string(std::string_view text);

struct SimConfig {
  std::size_t n_obs = 1200;
  double delta = 1.0 / 52.0;
  std::size_t substeps = 20;
  std::size_t burn_in = 500;
  std::uint64_t seed = 1;
  LatentStart latent_start = LatentStart::long_run_mean;

  void validate() const;
};

struct SimDiagnostics {
  std::size_t jumps = 0;
  double latent_min = 0.0;      // smallest raw latent value (before truncation)
  double latent_mean = 0.0;     // time average of the latent factor after burn-in
  double jump_size_min = 0.0;   // smallest jump size applied
  bool feller_violated = false;
};

struct Path {
  std::vector<double> values;  // n_obs + 2 observations
  double delta = 1.0 / 52.0;
  ModelSpec model;
  std::uint64_t seed = 0;
  std::uint64_t path_id = 0;
  SimDiagnostics diagnostics;
};

/// Exact Gaussian AR(1) recursion of the OU null, started stationary.
Path simulate_ou_exact(const ModelSpec& m, const SimConfig& c, std::uint64_t path_id = 0);
/// Mean reversion to the stochastic level theta alpha_t + (1 - theta) alpha.
Path simulate_h1(const ModelSpec& m, const SimConfig& c, std::uint64_t path_id = 0);
/// Diffusion coefficient (1 - theta) sigma + theta sqrt(Y_t), Y a CIR factor.
Path simulate_h2(const ModelSpec& m, const SimConfig& c, std::uint64_t path_id = 0);
/// Compound Poisson jumps with intensity theta.
Path simulate_h3(const ModelSpec& m, const SimConfig& c, std::uint64_t path_id = 0);

/// Dispatch on m.variant.
Path simulate(const ModelSpec& m, const SimConfig& c, std::uint64_t path_id = 0);

/// CSV with header `index,time,value`.
void write_path_csv(const Path& path, std::ostream& out);
/// Reads `index,time,value`; delta is inferred from the time column.
Path read_path_csv(std::istream& in);

}  // namespace markovgate
