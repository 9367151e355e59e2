#pragma once

#include <span>
#include <vector>

namespace markovgate {

double mean(std::span<const double> v);
/// Unbiased sample variance.
double variance(std::span<const double> v);
/// Linear-interpolation quantile (type 7) of an already sorted sample.
double quantile_sorted(std::span<const double> sorted, double p);
double quantile(std::span<const double> v, double p);

double normal_cdf(double x);
double normal_upper_tail(double x);
/// P(chi2_dof >= x) for real dof > 0.
double chisq_upper_tail(double x, double dof);

/// Two-sample Kolmogorov-Smirnov distance sup |F_a - F_b|.
double ks_distance(std::span<const double> a, std::span<const double> b);

/// Epanechnikov kernel density estimate of `sample` on `grid` with the
/// normal-reference bandwidth 2.345 * spread * n^(-1/5).
std::vector<double> kde_on_grid(std::span<const double> sample, std::span<const double> grid);

}  // namespace markovgate
