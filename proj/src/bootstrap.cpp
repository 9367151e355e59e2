#include "markovgate/bootstrap.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "markovgate/error.hpp"
#include "markovgate/numeric.hpp"
#include "markovgate/parallel.hpp"
#include "markovgate/rng.hpp"

namespace markovgate {

OuFit fit_ou_ls(const Path& path) {
  const auto& v = path.values;
  if (v.size() < 30) throw ConfigError("fit_ou_ls: series shorter than 30");
  const std::size_t m = v.size() - 1;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += v[i];
    my += v[i + 1];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (v[i] - mx) * (v[i] - mx);
    sxy += (v[i] - mx) * (v[i + 1] - my);
  }
  if (!(sxx > 0.0)) throw NonstationaryFit("fit_ou_ls: constant series");
  OuFit fit;
  fit.delta = path.delta;
  fit.rho_hat = sxy / sxx;
  fit.intercept = my - fit.rho_hat * mx;
  if (!(fit.rho_hat > 0.0 && fit.rho_hat < 1.0)) {
    throw NonstationaryFit("fit_ou_ls: AR(1) slope " + std::to_string(fit.rho_hat) +
                           " outside (0, 1)");
  }
  fit.kappa_hat = -std::log(fit.rho_hat) / path.delta;
  fit.alpha_hat = fit.intercept / (1.0 - fit.rho_hat);

  fit.residuals.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    fit.residuals[i] = v[i + 1] - fit.intercept - fit.rho_hat * v[i];
  }
  const double centre = mean(fit.residuals);
  for (double& e : fit.residuals) e -= centre;
  const double var = variance(fit.residuals);
  fit.sigma_hat = std::sqrt(var * 2.0 * fit.kappa_hat / (1.0 - fit.rho_hat * fit.rho_hat));
  fit.marginal = v;
  return fit;
}

Path resample_path(const OuFit& fit, std::size_t n_obs, std::uint64_t seed) {
  if (fit.residuals.empty() || fit.marginal.empty()) {
    throw ConfigError("resample_path: empty fit");
  }
  Stream innovations(seed, 0, Coordinate::bootstrap_innovation);
  Stream start(seed, 0, Coordinate::bootstrap_initial);
  Path p;
  p.delta = fit.delta;
  p.seed = seed;
  p.model.kappa = fit.kappa_hat;
  p.model.alpha = fit.alpha_hat;
  p.model.sigma = fit.sigma_hat;
  p.values.resize(n_obs + 2);
  double x = fit.marginal[start.index_below(fit.marginal.size())];
  p.values[0] = x;
  for (std::size_t i = 1; i < p.values.size(); ++i) {
    x = fit.intercept + fit.rho_hat * x + fit.residuals[innovations.index_below(fit.residuals.size())];
    p.values[i] = x;
  }
  return p;
}

BootstrapResult bootstrap_null(const Path& path, StatisticKind statistic, const Bandwidths& bw,
                               std::size_t B, std::uint64_t seed, const StatOptions& options,
                               std::size_t threads) {
  if (B < 1) throw ConfigError("bootstrap_null: B must be >= 1");
  bw.validate();
  const OuFit fit = fit_ou_ls(path);
  const std::size_t n_obs = path.values.size() - 2;
  StatOptions opts = options;
  opts.calibrate = false;
  opts.keep_contributions = false;

  BootstrapResult result;
  result.bandwidths = bw;
  result.statistics = parallel_map(
      B,
      [&](std::size_t b) {
        try {
          const Path star = resample_path(fit, n_obs, derive_seed(seed, b));
          const TripleSample sample = TripleSample::from_path(star.values, star.delta);
          return compute_statistic(statistic, sample, bw, opts).statistic;
        } catch (const Error&) {
          return std::numeric_limits<double>::quiet_NaN();
        }
      },
      threads);
  for (double s : result.statistics) {
    if (!std::isfinite(s)) ++result.failures;
  }
  if (10 * result.failures > B) {
    throw NumericalFailure("bootstrap_null: " + std::to_string(result.failures) + " of " +
                           std::to_string(B) + " replicates failed");
  }
  return result;
}

void write_bootstrap_csv(const BootstrapResult& result, std::ostream& out) {
  out << "replicate,statistic\n";
  char buf[64];
  for (std::size_t b = 0; b < result.statistics.size(); ++b) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", b, result.statistics[b]);
    out << buf;
  }
}

}  // namespace markovgate
