#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace markovgate {

enum class KernelName { epanechnikov, quartic, triweight };

std::string_view to_string(KernelName name);
KernelName kernel_from_string(std::string_view text);

/// Symmetric polynomial kernel c * (1 - u^2)^p on [-1, 1].
///
/// The norm constants are exact rationals obtained by symbolic integration;
/// the test suite checks them against adaptive quadrature.
struct KernelSpec {
  KernelName name = KernelName::epanechnikov;
  double support_radius = 1.0;
  double l2_norm_sq = 0.0;       // int K^2
  double conv_l2_norm_sq = 0.0;  // int (K*K)^2
  double mu0 = 1.0;              // int K
  double mu2 = 0.0;              // int u^2 K

  static KernelSpec make(KernelName name);
  static KernelSpec epanechnikov() { return make(KernelName::epanechnikov); }

  double operator()(double u) const noexcept {
    const double t = 1.0 - u * u;
    if (t <= 0.0) return 0.0;
    switch (power_) {
      case 1: return scale_ * t;
      case 2: return scale_ * t * t;
      default: return scale_ * t * t * t;
    }
  }

  /// Monomial coefficients a_0..a_d of K(u) = sum_d a_d u^d on the support.
  std::span<const double> monomials() const { return {monomials_.data(), monomials_.size()}; }
  std::size_t degree() const { return monomials_.size() - 1; }

 private:
  double scale_ = 0.75;
  int power_ = 1;
  std::vector<double> monomials_;
};

double kernel_eval(const KernelSpec& k, double u);

/// int (K*K)^2(u) du.
double conv_norm(const KernelSpec& k);

/// (K*K)(t) = int K(u) K(t - u) du, exact for the polynomial kernels.
double convolution(const KernelSpec& k, double t);

/// Half-open rank range [first, last) into a SortedAxis.
struct Window {
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t size() const { return last - first; }
  bool empty() const { return last <= first; }
};

/// A sample sorted once, with the permutation back to original indices.
/// Windows are located by binary search.
class SortedAxis {
 public:
  SortedAxis() = default;
  explicit SortedAxis(std::span<const double> values);

  std::size_t size() const { return sorted_.size(); }
  std::span<const double> values() const { return sorted_; }
  std::span<const std::size_t> order() const { return order_; }
  double value(std::size_t rank) const { return sorted_[rank]; }
  std::size_t index(std::size_t rank) const { return order_[rank]; }

  /// Ranks of the points with |v - center| <= radius.
  Window window(double center, double radius) const;

 private:
  std::vector<double> sorted_;
  std::vector<std::size_t> order_;
};

/// Weighted moments s_{n,j}(y), j = 0, 1, 2 of the local-linear fit.
struct LocalMoments {
  double s0 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double determinant() const { return s0 * s2 - s1 * s1; }
};

/// Moments over the window of y; throws DegenerateWindow if it is empty.
LocalMoments local_moments(const SortedAxis& axis, double y, double b, const KernelSpec& k);
LocalMoments local_moments(std::span<const double> sample, double y, double b, const KernelSpec& k);

/// Local-linear effective kernel values W_n(Y_i - y, y; b) for the points
/// of one window, so that (1/n) sum_i w_i = 1 and sum_i w_i (Y_i - y) = 0.
struct EffectiveWeights {
  Window window;
  std::vector<double> weights;      // indexed by rank - window.first
  std::vector<std::size_t> indices; // original sample index of each weight
};

EffectiveWeights effective_weights(const SortedAxis& axis, double y, double b, const KernelSpec& k);
EffectiveWeights effective_weights(std::span<const double> sample, double y, double b,
                                   const KernelSpec& k);

/// Local-linear regression value at y: (1/n) sum_i w_i * responses_i.
double local_linear_fit(std::span<const double> xs, std::span<const double> responses, double y,
                        double b, const KernelSpec& k);

namespace detail {

/// Allocation-free core of effective_weights. Fills `weights` for the ranks
/// of `win`; returns false when the design is degenerate (empty window,
/// fewer than two distinct points, or determinant at or below the floor).
bool local_linear_weights(const SortedAxis& axis, double y, double b, const KernelSpec& k,
                          Window& win, std::vector<double>& weights);

/// Determinant floor 1e-8 * (s0 * s2 + 1e-300).
inline double ridge_floor(const LocalMoments& m) { return 1e-8 * (m.s0 * m.s2 + 1e-300); }

}  // namespace detail

}  // namespace markovgate
