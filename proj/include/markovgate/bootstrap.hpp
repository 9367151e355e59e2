#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "markovgate/models.hpp"
#include "markovgate/stats.hpp"

namespace markovgate {

/// Least-squares AR(1) fit X_{i+1} = c + rho X_i + e_i mapped to OU
/// parameters.
struct OuFit {
  double kappa_hat = 0.0;
  double alpha_hat = 0.0;
  double sigma_hat = 0.0;
  double rho_hat = 0.0;
  double intercept = 0.0;
  double delta = 1.0 / 52.0;
  std::vector<double> residuals;  // recentered to mean zero
  std::vector<double> marginal;   // observed values, source of X*_0
};

/// Throws NonstationaryFit when the slope is outside (0, 1) and ConfigError
/// for series shorter than 30.
OuFit fit_ou_ls(const Path& path);

/// X*_{i+1} = c + rho X*_i + e*_i with e* drawn uniformly from the residuals
/// and X*_0 from the observed marginal. Returns n_obs + 2 values.
Path resample_path(const OuFit& fit, std::size_t n_obs, std::uint64_t seed);

struct BootstrapResult {
  std::vector<double> statistics;  // NaN for a failed replicate
  std::size_t failures = 0;
  Bandwidths bandwidths;           // used unchanged for every replicate
};

/// B statistics computed on OU residual-bootstrap resamples of `path` with
/// the bandwidths of the original sample. Replicate b uses
/// derive_seed(seed, b). More than 10% failed replicates raise
/// NumericalFailure.
BootstrapResult bootstrap_null(const Path& path, StatisticKind statistic, const Bandwidths& bw,
                               std::size_t B, std::uint64_t seed,
                               const StatOptions& options = {}, std::size_t threads = 0);

/// CSV with header `replicate,statistic`.
void write_bootstrap_csv(const BootstrapResult& result, std::ostream& out);

}  // namespace markovgate
