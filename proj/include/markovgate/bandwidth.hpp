#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "markovgate/estimators.hpp"

namespace markovgate {

enum class BandwidthKind { empirical_rule, fixed, cv };
enum class BandwidthTarget { t1_family, t2 };

std::string_view to_string(BandwidthKind kind);
BandwidthKind bandwidth_kind_from_string(std::string_view text);
std::string_view to_string(BandwidthTarget target);
BandwidthTarget bandwidth_target_from_string(std::string_view text);

/// Rate exponent: 1/5 for the density tests, 2/9 for T2.
double default_exponent(BandwidthTarget target);

struct BandwidthRule {
  BandwidthKind kind = BandwidthKind::empirical_rule;
  double c_scale = 1.0;
  std::optional<double> exponent;           // default_exponent(target) when unset
  std::optional<Bandwidths> fixed;          // required for kind == fixed
  std::vector<double> cv_grid = {0.5, 0.625, 0.75, 0.875, 1.0, 1.25, 1.5, 2.0};
};

/// min(sd, IQR / 1.349); throws ConfigError on a zero-spread sample.
double robust_spread(std::span<const double> values);

/// Normal-reference bandwidths h = c * spread * n^(-exponent):
/// h1 = b1 = h3 from the conditioning variable X, h2 = b2 from the response Z.
Bandwidths select(const BandwidthRule& rule, const TripleSample& sample, BandwidthTarget target);

/// Least-squares cross-validation score of the direct 2*Delta conditional
/// density at the given bandwidths (leave-one-out local-linear fit).
double cv_score(const TripleSample& sample, const Bandwidths& bw,
                const KernelSpec& w = KernelSpec::epanechnikov(),
                const KernelSpec& k = KernelSpec::epanechnikov());

}  // namespace markovgate
