#include "markovgate/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "markovgate/error.hpp"

namespace markovgate {

std::string_view to_string(KernelName name) {
  switch (name) {
    case KernelName::epanechnikov: return "epanechnikov";
    case KernelName::quartic: return "quartic";
    case KernelName::triweight: return "triweight";
  }
  return "unknown";
}

KernelName kernel_from_string(std::string_view text) {
  if (text == "epanechnikov") return KernelName::epanechnikov;
  if (text == "quartic") return KernelName::quartic;
  if (text == "triweight") return KernelName::triweight;
  throw ConfigError("unknown kernel '" + std::string(text) + "'");
}

KernelSpec KernelSpec::make(KernelName name) {
  KernelSpec k;
  k.name = name;
  switch (name) {
    case KernelName::epanechnikov:
      k.scale_ = 3.0 / 4.0;
      k.power_ = 1;
      k.l2_norm_sq = 3.0 / 5.0;
      k.conv_l2_norm_sq = 167.0 / 385.0;
      k.mu2 = 1.0 / 5.0;
      k.monomials_ = {0.75, 0.0, -0.75};
      break;
    case KernelName::quartic:
      k.scale_ = 15.0 / 16.0;
      k.power_ = 2;
      k.l2_norm_sq = 5.0 / 7.0;
      k.conv_l2_norm_sq = 1168780.0 / 2263261.0;
      k.mu2 = 1.0 / 7.0;
      k.monomials_ = {15.0 / 16.0, 0.0, -30.0 / 16.0, 0.0, 15.0 / 16.0};
      break;
    case KernelName::triweight:
      k.scale_ = 35.0 / 32.0;
      k.power_ = 3;
      k.l2_norm_sq = 350.0 / 429.0;
      k.conv_l2_norm_sq = 151766930.0 / 258150321.0;
      k.mu2 = 1.0 / 9.0;
      k.monomials_ = {35.0 / 32.0, 0.0, -105.0 / 32.0, 0.0, 105.0 / 32.0, 0.0, -35.0 / 32.0};
      break;
  }
  return k;
}

double kernel_eval(const KernelSpec& k, double u) { return k(u); }

double conv_norm(const KernelSpec& k) { return k.conv_l2_norm_sq; }

double convolution(const KernelSpec& k, double t) {
  // 8-point Gauss-Legendre integrates the degree <= 12 product exactly.
  static constexpr std::array<double, 4> nodes = {0.1834346424956498, 0.5255324099163290,
                                                  0.7966664774136267, 0.9602898564975363};
  static constexpr std::array<double, 4> weights = {0.3626837833783620, 0.3137066458778873,
                                                    0.2223810344533745, 0.1012285362903763};
  if (k.name == KernelName::epanechnikov) {
    const double a = std::abs(t);
    if (a >= 2.0) return 0.0;
    const double c = 2.0 - a;
    return 3.0 / 160.0 * c * c * c * (a * a + 6.0 * a + 4.0);
  }
  const double r = k.support_radius;
  const double lo = std::max(-r, t - r);
  const double hi = std::min(r, t + r);
  if (hi <= lo) return 0.0;
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (double s : {-1.0, 1.0}) {
      const double u = mid + s * half * nodes[i];
      acc += weights[i] * k(u) * k(t - u);
    }
  }
  return acc * half;
}

SortedAxis::SortedAxis(std::span<const double> values)
    : sorted_(values.size()), order_(values.size()) {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  for (std::size_t r = 0; r < order_.size(); ++r) sorted_[r] = values[order_[r]];
}

Window SortedAxis::window(double center, double radius) const {
  const auto lo = std::lower_bound(sorted_.begin(), sorted_.end(), center - radius);
  const auto hi = std::upper_bound(lo, sorted_.end(), center + radius);
  return {static_cast<std::size_t>(lo - sorted_.begin()),
          static_cast<std::size_t>(hi - sorted_.begin())};
}

namespace {

LocalMoments window_moments(const SortedAxis& axis, Window win, double y, double b,
                            const KernelSpec& k) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t r = win.first; r < win.last; ++r) {
    const double u = (axis.value(r) - y) / b;
    const double kv = k(u);
    s0 += kv;
    s1 += u * kv;
    s2 += u * u * kv;
  }
  const double scale = 1.0 / (static_cast<double>(axis.size()) * b);
  return {s0 * scale, s1 * scale, s2 * scale};
}

}  // namespace

LocalMoments local_moments(const SortedAxis& axis, double y, double b, const KernelSpec& k) {
  const Window win = axis.window(y, b * k.support_radius);
  if (win.empty()) throw DegenerateWindow("no sample point within the smoothing window");
  return window_moments(axis, win, y, b, k);
}

LocalMoments local_moments(std::span<const double> sample, double y, double b,
                           const KernelSpec& k) {
  return local_moments(SortedAxis(sample), y, b, k);
}

namespace detail {

bool local_linear_weights(const SortedAxis& axis, double y, double b, const KernelSpec& k,
                          Window& win, std::vector<double>& weights) {
  win = axis.window(y, b * k.support_radius);
  weights.clear();
  if (win.size() < 2 || axis.value(win.first) == axis.value(win.last - 1)) return false;
  const LocalMoments m = window_moments(axis, win, y, b, k);
  const double det = m.determinant();
  if (!(det > ridge_floor(m))) return false;
  // W_n(u b, y; b) = W(u)/b * (s2 - u s1) / det
  const double inv = 1.0 / (b * det);
  weights.resize(win.size());
  for (std::size_t r = win.first; r < win.last; ++r) {
    const double u = (axis.value(r) - y) / b;
    weights[r - win.first] = k(u) * (m.s2 - u * m.s1) * inv;
  }
  return true;
}

}  // namespace detail

EffectiveWeights effective_weights(const SortedAxis& axis, double y, double b,
                                   const KernelSpec& k) {
  EffectiveWeights out;
  if (!detail::local_linear_weights(axis, y, b, k, out.window, out.weights)) {
    throw DegenerateDesign("degenerate local-linear design at y = " + std::to_string(y));
  }
  out.indices.assign(axis.order().begin() + static_cast<std::ptrdiff_t>(out.window.first),
                     axis.order().begin() + static_cast<std::ptrdiff_t>(out.window.last));
  return out;
}

EffectiveWeights effective_weights(std::span<const double> sample, double y, double b,
                                   const KernelSpec& k) {
  return effective_weights(SortedAxis(sample), y, b, k);
}

double local_linear_fit(std::span<const double> xs, std::span<const double> responses, double y,
                        double b, const KernelSpec& k) {
  if (xs.size() != responses.size()) throw std::invalid_argument("length mismatch");
  const SortedAxis axis(xs);
  const EffectiveWeights ew = effective_weights(axis, y, b, k);
  double acc = 0.0;
  for (std::size_t t = 0; t < ew.weights.size(); ++t) acc += ew.weights[t] * responses[ew.indices[t]];
  return acc / static_cast<double>(xs.size());
}

}  // namespace markovgate
