#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "markovgate/estimators.hpp"

namespace markovgate {

enum class StatisticKind { t0, t1, t1_star, t2 };

std::string_view to_string(StatisticKind kind);
StatisticKind statistic_from_string(std::string_view text);

enum class WeightKind { density_weight, ratio_weight, x_only_weight };

std::string_view to_string(WeightKind kind);
WeightKind weight_kind_from_string(std::string_view text);

/// Smooth indicator of the marginal quantile box [q_tau, q_{1-tau}]^2.
struct WeightSpec {
  WeightKind kind = WeightKind::density_weight;
  double trim_quantile = 0.05;
  double smoothness = 0.1;  // total taper width as a fraction of the box side

  void validate() const;
};

/// Weight kind each statistic uses: w for T1, w* for T0/T1*, omega for T2.
WeightKind default_weight_kind(StatisticKind kind);

/// C^2 taper: zero outside [lo, hi], one on the central (1 - smoothness)
/// core, quintic smootherstep in between.
class Taper {
 public:
  Taper() = default;
  Taper(double lo, double hi, double smoothness);
  double operator()(double v) const;
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double lo_ = 0.0, hi_ = 0.0, ramp_ = 0.0;
};

/// A WeightSpec bound to the marginal quantiles of one sample.
class WeightFunction {
 public:
  WeightFunction(const WeightSpec& spec, const TripleSample& sample);

  double operator()(double x, double z) const {
    return spec_.kind == WeightKind::x_only_weight ? tx_(x) : tx_(x) * tz_(z);
  }
  const Taper& x_taper() const { return tx_; }
  const Taper& z_taper() const { return tz_; }
  const WeightSpec& spec() const { return spec_; }

 private:
  WeightSpec spec_;
  Taper tx_, tz_;
};

/// Scaled chi-square calibration r * T ~ chi2_dof with T ~ N(mu, sigma^2).
struct Calibration {
  double mu = 0.0;
  double sigma = 0.0;
  double r = 0.0;
  double dof = 0.0;
};

struct TestReport {
  StatisticKind kind = StatisticKind::t1;
  double statistic = 0.0;
  std::optional<double> mu;
  std::optional<double> sigma;
  std::optional<double> z_score;
  std::optional<double> p_normal;
  std::optional<double> r_scale;
  std::optional<double> dof;
  std::optional<double> p_chisq;
  std::optional<double> p_bootstrap;
  std::size_t n_used = 0;
  std::size_t floor_breaches = 0;   // T1*/T0: p-hat or r-hat below the density floor
  std::size_t dropped_points = 0;   // T0: points removed for a floor breach
  std::size_t inner_dropped = 0;    // degenerate inner designs renormalized away
  bool calibration_failed = false;
  std::string calibration_note;
  Bandwidths bandwidths;
  std::vector<double> contributions;  // per used point, when requested
};

/// Grid plug-in estimates of the nuisance quantities in the asymptotic null
/// means and variances. Surfaces are row-major over (x_grid, z_grid).
struct PluginQuantities {
  double omega11 = 0.0, omega12 = 0.0, omega13 = 0.0, omega14 = 0.0, omega15 = 0.0;
  double omega2 = 0.0;
  std::vector<double> x_grid, z_grid;
  std::vector<double> pi_hat;   // invariant density on x_grid
  std::vector<double> p_hat;    // direct 2*Delta density
  std::vector<double> r_hat;    // composed 2*Delta density
  std::vector<double> s_hat;    // E[p^2(z | Y) | X = x]
  std::vector<double> p_star_hat;  // reverse-process p*(x | z, 2 Delta)
  std::vector<double> s_star_hat;  // reverse-process s*(x | z, 2 Delta)

  // Distribution-test quantities: V(x, z) on (x_grid, v_z_grid).
  std::vector<double> v_z_grid;
  std::vector<double> v_hat;
  std::vector<double> expected_v;  // E[V(X, Z) | X = x] on x_grid
  double omega_mass = 0.0;         // int omega(x) dx
  double omega_l2_sq = 0.0;        // int omega^2(x) dx
  double omega_expected_v = 0.0;   // int omega(x) E[V | X = x] dx
  std::size_t v_floor_breaches = 0;
};

enum class PluginScope { density, distribution, all };

struct StatOptions {
  std::optional<WeightSpec> weight;  // default_weight_kind() with default trim
  KernelSpec w_kernel = KernelSpec::epanechnikov();
  KernelSpec k_kernel = KernelSpec::epanechnikov();
  std::size_t min_support = 30;
  bool calibrate = true;
  std::size_t grid_points = 101;
  bool keep_contributions = false;
};

/// Floor delta = 1e-4 / range(Z) for the density denominators of T1*/T0.
double density_floor(const TripleSample& sample);

/// Statistic value from precomputed estimates at the used points.
/// `direct`/`indirect` are densities for T0/T1/T1* and distributions for T2.
struct StatisticParts {
  double value = 0.0;
  std::size_t floor_breaches = 0;
  std::size_t dropped = 0;
  std::vector<double> contributions;
};
StatisticParts statistic_from_estimates(StatisticKind kind, std::span<const double> direct,
                                        std::span<const double> indirect,
                                        std::span<const double> weights, double floor);

TestReport t1(const TripleSample& sample, const Bandwidths& bw, const WeightSpec& w,
              const StatOptions& options = {});
TestReport t1_star(const TripleSample& sample, const Bandwidths& bw, const WeightSpec& w_star,
                   const StatOptions& options = {});
TestReport t2(const TripleSample& sample, const Bandwidths& bw, const WeightSpec& omega,
              const StatOptions& options = {});
TestReport t0_glr(const TripleSample& sample, const Bandwidths& bw, const WeightSpec& w_star,
                  const StatOptions& options = {});

/// Dispatch on kind; the weight comes from options.weight or the default.
TestReport compute_statistic(StatisticKind kind, const TripleSample& sample,
                             const Bandwidths& bw, const StatOptions& options = {});

PluginQuantities estimate_plugin_quantities(const TripleSample& sample, const Bandwidths& bw,
                                            const WeightSpec& w, const StatOptions& options = {},
                                            PluginScope scope = PluginScope::all);

/// Null mean/variance of T1 and its chi-square form; throws
/// CalibrationFailure when mu1 <= 0.
Calibration plugin_calibration_t1(const PluginQuantities& q, const Bandwidths& bw,
                                  const KernelSpec& w = KernelSpec::epanechnikov(),
                                  const KernelSpec& k = KernelSpec::epanechnikov());

/// Null mean/variance of T2 and its chi-square form.
Calibration plugin_calibration_t2(const PluginQuantities& q, const Bandwidths& bw,
                                  const KernelSpec& w = KernelSpec::epanechnikov());

/// Nuisance-free chi-square calibration of T1*: only the weight integrals
/// int w* and int w*^2 enter.
Calibration calibration_t1_star(const WeightFunction& w_star, const Bandwidths& bw,
                                const KernelSpec& w = KernelSpec::epanechnikov(),
                                const KernelSpec& k = KernelSpec::epanechnikov(),
                                std::size_t grid_points = 101);

/// (1 + #{T_b >= T}) / (B + 1) over the finite replicates.
double bootstrap_pvalue(double statistic, std::span<const double> replicates);

/// Fills z-score and normal/chi-square p-values from `calibration`, and the
/// bootstrap p-value when replicates are supplied.
void pvalues(TestReport& report, const std::optional<Calibration>& calibration,
             std::span<const double> bootstrap = {});

}  // namespace markovgate
