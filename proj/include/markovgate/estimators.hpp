#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "markovgate/error.hpp"
#include "markovgate/kernels.hpp"

namespace markovgate {

/// Overlapping triples (X_i, Y_i, Z_i) = (X_{i}, X_{i+1}, X_{i+2}) cut from
/// one path of length n + 2.
struct TripleSample {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> z;
  double delta = 1.0 / 52.0;

  std::size_t n() const { return x.size(); }

  static TripleSample from_path(std::span<const double> values, double delta);

  /// Triples of the index-reversed series X_{n+2-i}.
  TripleSample reversed() const;
};

/// b1/b2 smooth the Delta-transition in y/z, h1/h2 the direct
/// 2*Delta-transition in x/z, h3 the composing regression.
struct Bandwidths {
  double b1 = 0.0;
  double b2 = 0.0;
  double h1 = 0.0;
  double h2 = 0.0;
  double h3 = 0.0;

  /// Throws ConfigError unless every bandwidth is finite and positive.
  void validate() const;
  double spread_ratio() const;
  bool same_order(double limit = 10.0) const { return spread_ratio() <= limit; }
  Bandwidths scaled(double a) const { return {a * b1, a * b2, a * h1, a * h2, a * h3}; }

  bool operator==(const Bandwidths&) const = default;
};

/// Values of the four 2*Delta estimators at a batch of (x, z) points.
struct PairEstimates {
  std::vector<double> p_direct;      // p-hat(z | x, 2 Delta)
  std::vector<double> r_indirect;    // r-hat(z | x, 2 Delta)
  std::vector<double> cdf_direct;    // P-hat(z | x, 2 Delta)
  std::vector<double> cdf_indirect;  // R-hat(z | x, 2 Delta)
  std::size_t inner_dropped = 0;
};

/// 1-step transition values p-hat(z | Y_j) and P-hat(z | Y_j) for every
/// sample index j (rows) on a fixed z grid (columns). Rows whose design is
/// degenerate hold NaN.
struct InnerTable {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> density;
  std::vector<double> distribution;

  double p(std::size_t j, std::size_t c) const { return density[j * cols + c]; }
  double cdf(std::size_t j, std::size_t c) const { return distribution[j * cols + c]; }
};

/// Local-linear combination (1/n) sum_j w_j v(j) over one window. NaN values
/// are dropped and the remaining weight mass renormalized when fewer than 1%
/// of the window is affected; otherwise DegenerateDesign is thrown.
template <class ValueOf>
double compose(const EffectiveWeights& ew, std::size_t n, ValueOf&& value_of,
               std::size_t* dropped = nullptr) {
  double acc = 0.0;
  double kept = 0.0;
  std::size_t bad = 0;
  for (std::size_t t = 0; t < ew.weights.size(); ++t) {
    const double v = value_of(ew.indices[t]);
    if (std::isnan(v)) {
      ++bad;
      continue;
    }
    acc += ew.weights[t] * v;
    kept += ew.weights[t];
  }
  if (bad == 0) return acc / static_cast<double>(n);
  if (static_cast<double>(bad) >= 0.01 * static_cast<double>(ew.weights.size())) {
    throw DegenerateDesign("too many degenerate inner designs in composing window");
  }
  if (dropped) *dropped += bad;
  return acc / kept;
}

/// Prepared direct and Chapman-Kolmogorov-composed transition estimators.
/// Immutable after construction; all evaluation methods are const and safe
/// to call concurrently.
class EstimatorHandle {
 public:
  EstimatorHandle(TripleSample sample, Bandwidths bw,
                  KernelSpec w = KernelSpec::epanechnikov(),
                  KernelSpec k = KernelSpec::epanechnikov());

  const TripleSample& sample() const { return sample_; }
  const Bandwidths& bandwidths() const { return bw_; }
  const KernelSpec& w_kernel() const { return w_; }
  const KernelSpec& k_kernel() const { return k_; }
  const SortedAxis& x_axis() const { return x_axis_; }
  double z_min() const { return z_axis_.value(0); }
  double z_max() const { return z_axis_.value(z_axis_.size() - 1); }

  double density_1step(double y, double z) const;
  double distribution_1step(double y, double z) const;
  double density_2step_direct(double x, double z) const;
  double distribution_2step_direct(double x, double z) const;
  double density_2step_indirect(double x, double z) const;
  double distribution_2step_indirect(double x, double z) const;

  /// All four 2*Delta estimators at the points (xs[q], zs[q]). The composed
  /// estimators share one prepared 1-step transition per conditioning point,
  /// so the cost is O(m k log k) for m points and mean window size k.
  PairEstimates evaluate_pairs(std::span<const double> xs, std::span<const double> zs) const;

  /// Local-linear weights on the X axis at x with the given bandwidth.
  EffectiveWeights outer_weights(double x, double bandwidth) const;

  /// 1-step transition values at every Y_j on a z grid.
  InnerTable inner_table(std::span<const double> zgrid) const;

 private:
  TripleSample sample_;
  Bandwidths bw_;
  KernelSpec w_;
  KernelSpec k_;
  SortedAxis x_axis_;
  SortedAxis y_axis_;
  SortedAxis z_axis_;
};

}  // namespace markovgate
