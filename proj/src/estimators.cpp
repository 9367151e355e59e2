#include "markovgate/estimators.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

namespace markovgate {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

/// p-hat(. | y, Delta) and P-hat(. | y, Delta) for one conditioning point y.
///
/// The window's (Z_l, c_l) pairs are sorted by Z and carry prefix sums of
/// c_l u_l^p, u_l = (Z_l - y)/b2. Because K is a polynomial on its support,
/// sum_l c_l K((Z_l - z)/b2) over the points within b2 of z expands into
/// those prefix moments, so each query costs two binary searches.
class InnerTransition {
 public:
  InnerTransition(const SortedAxis& y_axis, std::span<const double> z, double b1, double b2,
                  const KernelSpec& w, const KernelSpec& k)
      : y_axis_(y_axis), z_(z), b1_(b1), b2_(b2), w_(w), k_(k), stride_(k.degree() + 1) {
    const auto a = k.monomials();
    expand_.assign(stride_ * stride_, 0.0);
    for (std::size_t d = 0; d < stride_; ++d)
      for (std::size_t p = 0; p <= d; ++p) expand_[p * stride_ + d] = a[d] * binomial(d, p);
  }

  bool prepare(double y) {
    center_ = y;
    if (!detail::local_linear_weights(y_axis_, y, b1_, w_, win_, weights_)) return false;
    const double inv_n = 1.0 / static_cast<double>(y_axis_.size());
    const std::size_t m = win_.size();
    pairs_.resize(m);
    for (std::size_t t = 0; t < m; ++t) {
      pairs_[t] = {z_[y_axis_.index(win_.first + t)], weights_[t] * inv_n};
    }
    std::sort(pairs_.begin(), pairs_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    zs_.resize(m);
    prefix_.resize((m + 1) * stride_);
    std::fill_n(prefix_.begin(), stride_, 0.0);
    for (std::size_t t = 0; t < m; ++t) {
      zs_[t] = pairs_[t].first;
      const double u = (pairs_[t].first - center_) / b2_;
      const double* prev = &prefix_[t * stride_];
      double* cur = &prefix_[(t + 1) * stride_];
      double term = pairs_[t].second;
      for (std::size_t p = 0; p < stride_; ++p) {
        cur[p] = prev[p] + term;
        term *= u;
      }
    }
    return true;
  }

  double density(double z) const {
    const double radius = b2_ * k_.support_radius;
    const auto lo = std::lower_bound(zs_.begin(), zs_.end(), z - radius);
    const auto hi = std::upper_bound(lo, zs_.end(), z + radius);
    return density_between(static_cast<std::size_t>(lo - zs_.begin()),
                           static_cast<std::size_t>(hi - zs_.begin()), z);
  }

  /// Density and distribution at ascending queries in one merge pass;
  /// z_at(e) gives query e and emit(e, density, distribution) receives it.
  template <class ZAt, class Emit>
  void sweep(std::size_t count, ZAt&& z_at, Emit&& emit) const {
    const double radius = b2_ * k_.support_radius;
    const std::size_t m = zs_.size();
    std::size_t lo = 0, hi = 0, mid = 0;
    for (std::size_t e = 0; e < count; ++e) {
      const double z = z_at(e);
      const double left = z - radius, right = z + radius;
      while (lo < m && zs_[lo] < left) ++lo;
      if (hi < lo) hi = lo;
      while (hi < m && !(right < zs_[hi])) ++hi;
      while (mid < m && zs_[mid] < z) ++mid;
      const double cdf = mid == 0 ? 0.0 : (mid == m ? 1.0 : prefix_[mid * stride_]);
      emit(e, density_between(lo, hi, z), cdf);
    }
  }

  double distribution(double z) const {
    const std::size_t r =
        static_cast<std::size_t>(std::lower_bound(zs_.begin(), zs_.end(), z) - zs_.begin());
    if (r == 0) return 0.0;
    if (r == zs_.size()) return 1.0;
    return prefix_[r * stride_];
  }

 private:
  double density_between(std::size_t a, std::size_t b, double z) const {
    if (a == b) return 0.0;
    const double mv = -(z - center_) / b2_;
    // coefficient of moment p: sum_{d >= p} a_d C(d, p) (-v)^{d-p}
    double acc = 0.0;
    for (std::size_t p = 0; p < stride_; ++p) {
      double coef = 0.0;
      double pw = 1.0;
      for (std::size_t d = p; d < stride_; ++d) {
        coef += expand_[p * stride_ + d] * pw;
        pw *= mv;
      }
      acc += coef * (prefix_[b * stride_ + p] - prefix_[a * stride_ + p]);
    }
    return acc / b2_;
  }

  const SortedAxis& y_axis_;
  std::span<const double> z_;
  double b1_, b2_;
  const KernelSpec& w_;
  const KernelSpec& k_;
  std::size_t stride_;
  std::vector<double> expand_;
  double center_ = 0.0;
  Window win_;
  std::vector<double> weights_;
  std::vector<std::pair<double, double>> pairs_;
  std::vector<double> zs_;
  std::vector<double> prefix_;
};

[[noreturn]] void throw_degenerate(const char* what, double at) {
  throw DegenerateDesign(std::string("degenerate local-linear design (") + what +
                         ") at " + std::to_string(at));
}

/// Windowed direct estimators over (C_i, R_i) pairs: density and
/// distribution of the response given the conditioning value.
struct DirectValues {
  double density;
  double distribution;
};

DirectValues direct_at(const SortedAxis& cond, std::span<const double> resp, double c, double r,
                       double bc, double br, const KernelSpec& w, const KernelSpec& k,
                       Window& win, std::vector<double>& wts, const char* what) {
  if (!detail::local_linear_weights(cond, c, bc, w, win, wts)) throw_degenerate(what, c);
  double pd = 0.0, cd = 0.0;
  std::size_t below = 0;
  for (std::size_t t = 0; t < wts.size(); ++t) {
    const double ri = resp[cond.index(win.first + t)];
    pd += wts[t] * k((ri - r) / br);
    if (ri < r) {
      cd += wts[t];
      ++below;
    }
  }
  const double n = static_cast<double>(cond.size());
  double cdf = cd / n;
  if (below == 0) cdf = 0.0;
  if (below == wts.size()) cdf = 1.0;
  return {pd / (n * br), cdf};
}

}  // namespace

TripleSample TripleSample::from_path(std::span<const double> values, double delta) {
  if (values.size() < 3) throw ConfigError("path too short to form triples");
  TripleSample s;
  s.delta = delta;
  const std::size_t n = values.size() - 2;
  s.x.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(n));
  s.y.assign(values.begin() + 1, values.begin() + static_cast<std::ptrdiff_t>(n + 1));
  s.z.assign(values.begin() + 2, values.end());
  return s;
}

TripleSample TripleSample::reversed() const {
  std::vector<double> path(x.begin(), x.end());
  path.push_back(y.back());
  path.push_back(z.back());
  std::reverse(path.begin(), path.end());
  return from_path(path, delta);
}

void Bandwidths::validate() const {
  for (double v : {b1, b2, h1, h2, h3}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("bandwidths must be finite and positive");
  }
}

double Bandwidths::spread_ratio() const {
  const auto [lo, hi] = std::minmax({b1, b2, h1, h2, h3});
  return hi / lo;
}

EstimatorHandle::EstimatorHandle(TripleSample sample, Bandwidths bw, KernelSpec w, KernelSpec k)
    : sample_(std::move(sample)), bw_(bw), w_(std::move(w)), k_(std::move(k)) {
  bw_.validate();
  if (sample_.n() == 0 || sample_.y.size() != sample_.n() || sample_.z.size() != sample_.n()) {
    throw ConfigError("triple sample must be nonempty with equal-length coordinates");
  }
  x_axis_ = SortedAxis(sample_.x);
  y_axis_ = SortedAxis(sample_.y);
  z_axis_ = SortedAxis(sample_.z);
}

double EstimatorHandle::density_1step(double y, double z) const {
  Window win;
  std::vector<double> wts;
  return direct_at(y_axis_, sample_.z, y, z, bw_.b1, bw_.b2, w_, k_, win, wts, "1-step").density;
}

double EstimatorHandle::distribution_1step(double y, double z) const {
  Window win;
  std::vector<double> wts;
  return direct_at(y_axis_, sample_.z, y, z, bw_.b1, bw_.b2, w_, k_, win, wts, "1-step")
      .distribution;
}

double EstimatorHandle::density_2step_direct(double x, double z) const {
  Window win;
  std::vector<double> wts;
  return direct_at(x_axis_, sample_.z, x, z, bw_.h1, bw_.h2, w_, k_, win, wts, "2-step").density;
}

double EstimatorHandle::distribution_2step_direct(double x, double z) const {
  Window win;
  std::vector<double> wts;
  return direct_at(x_axis_, sample_.z, x, z, bw_.h1, bw_.h2, w_, k_, win, wts, "2-step")
      .distribution;
}

EffectiveWeights EstimatorHandle::outer_weights(double x, double bandwidth) const {
  return effective_weights(x_axis_, x, bandwidth, w_);
}

double EstimatorHandle::density_2step_indirect(double x, double z) const {
  const EffectiveWeights outer = outer_weights(x, bw_.h3);
  InnerTransition inner(y_axis_, sample_.z, bw_.b1, bw_.b2, w_, k_);
  return compose(outer, sample_.n(), [&](std::size_t j) {
    return inner.prepare(sample_.y[j]) ? inner.density(z) : kNaN;
  });
}

double EstimatorHandle::distribution_2step_indirect(double x, double z) const {
  const EffectiveWeights outer = outer_weights(x, bw_.h3);
  InnerTransition inner(y_axis_, sample_.z, bw_.b1, bw_.b2, w_, k_);
  bool all_zero = true, all_one = true;
  const double v = compose(outer, sample_.n(), [&](std::size_t j) {
    const double c = inner.prepare(sample_.y[j]) ? inner.distribution(z) : kNaN;
    all_zero = all_zero && c == 0.0;
    all_one = all_one && c == 1.0;
    return c;
  });
  if (all_zero) return 0.0;
  if (all_one) return 1.0;
  return v;
}

PairEstimates EstimatorHandle::evaluate_pairs(std::span<const double> xs,
                                              std::span<const double> zs) const {
  if (xs.size() != zs.size()) throw std::invalid_argument("evaluate_pairs: length mismatch");
  const std::size_t m = xs.size();
  const std::size_t n = sample_.n();
  PairEstimates out;
  out.p_direct.resize(m);
  out.r_indirect.resize(m);
  out.cdf_direct.resize(m);
  out.cdf_indirect.resize(m);

  Window win;
  std::vector<double> wts;
  for (std::size_t q = 0; q < m; ++q) {
    const DirectValues d =
        direct_at(x_axis_, sample_.z, xs[q], zs[q], bw_.h1, bw_.h2, w_, k_, win, wts, "2-step");
    out.p_direct[q] = d.density;
    out.cdf_direct[q] = d.distribution;
  }

  // Composing windows, flattened: query q owns positions [offset[q], offset[q+1]).
  std::vector<std::size_t> offset(m + 1, 0);
  std::vector<std::size_t> first_rank(m);
  std::vector<double> outer;
  for (std::size_t q = 0; q < m; ++q) {
    if (!detail::local_linear_weights(x_axis_, xs[q], bw_.h3, w_, win, wts)) {
      throw_degenerate("composing regression", xs[q]);
    }
    first_rank[q] = win.first;
    offset[q + 1] = offset[q] + win.size();
    outer.insert(outer.end(), wts.begin(), wts.end());
  }
  const std::size_t total = offset[m];

  // Group flat positions by X-rank so each conditioning point is prepared once.
  std::vector<std::uint32_t> owner(total);
  std::vector<std::size_t> rank_start(n + 1, 0);
  for (std::size_t q = 0; q < m; ++q) {
    const std::size_t len = offset[q + 1] - offset[q];
    for (std::size_t t = 0; t < len; ++t) {
      owner[offset[q] + t] = static_cast<std::uint32_t>(q);
      ++rank_start[first_rank[q] + t + 1];
    }
  }
  std::partial_sum(rank_start.begin(), rank_start.end(), rank_start.begin());
  std::vector<std::size_t> by_rank(total);
  {
    // Queries enter each rank's bucket in ascending z so that the inner pass
    // below can sweep them in one merge.
    std::vector<std::size_t> z_order(m);
    std::iota(z_order.begin(), z_order.end(), std::size_t{0});
    std::stable_sort(z_order.begin(), z_order.end(),
                     [&](std::size_t a, std::size_t b) { return zs[a] < zs[b]; });
    std::vector<std::size_t> fill(rank_start.begin(), rank_start.end() - 1);
    for (const std::size_t q : z_order) {
      const std::size_t len = offset[q + 1] - offset[q];
      for (std::size_t t = 0; t < len; ++t) by_rank[fill[first_rank[q] + t]++] = offset[q] + t;
    }
  }

  std::vector<double> dens(total), cdf(total);
  InnerTransition inner(y_axis_, sample_.z, bw_.b1, bw_.b2, w_, k_);
  for (std::size_t r = 0; r < n; ++r) {
    if (rank_start[r] == rank_start[r + 1]) continue;
    const std::size_t base = rank_start[r];
    if (!inner.prepare(sample_.y[x_axis_.index(r)])) {
      for (std::size_t e = base; e < rank_start[r + 1]; ++e) dens[by_rank[e]] = cdf[by_rank[e]] = kNaN;
      continue;
    }
    inner.sweep(
        rank_start[r + 1] - base, [&](std::size_t e) { return zs[owner[by_rank[base + e]]]; },
        [&](std::size_t e, double d, double c) {
          dens[by_rank[base + e]] = d;
          cdf[by_rank[base + e]] = c;
        });
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t q = 0; q < m; ++q) {
    double rd = 0.0, rc = 0.0, kept = 0.0;
    std::size_t bad = 0;
    bool all_zero = true, all_one = true;
    for (std::size_t pos = offset[q]; pos < offset[q + 1]; ++pos) {
      if (std::isnan(dens[pos])) {
        ++bad;
        continue;
      }
      rd += outer[pos] * dens[pos];
      rc += outer[pos] * cdf[pos];
      kept += outer[pos];
      all_zero = all_zero && cdf[pos] == 0.0;
      all_one = all_one && cdf[pos] == 1.0;
    }
    const std::size_t len = offset[q + 1] - offset[q];
    if (bad == 0) {
      out.r_indirect[q] = rd * inv_n;
      out.cdf_indirect[q] = rc * inv_n;
    } else {
      if (static_cast<double>(bad) >= 0.01 * static_cast<double>(len)) {
        throw_degenerate("inner 1-step transitions", xs[q]);
      }
      out.inner_dropped += bad;
      out.r_indirect[q] = rd / kept;
      out.cdf_indirect[q] = rc / kept;
    }
    if (all_zero) out.cdf_indirect[q] = 0.0;
    if (all_one) out.cdf_indirect[q] = 1.0;
  }
  return out;
}

InnerTable EstimatorHandle::inner_table(std::span<const double> zgrid) const {
  InnerTable t;
  t.rows = sample_.n();
  t.cols = zgrid.size();
  t.density.assign(t.rows * t.cols, kNaN);
  t.distribution.assign(t.rows * t.cols, kNaN);
  InnerTransition inner(y_axis_, sample_.z, bw_.b1, bw_.b2, w_, k_);
  for (std::size_t j = 0; j < t.rows; ++j) {
    if (!inner.prepare(sample_.y[j])) continue;
    for (std::size_t c = 0; c < t.cols; ++c) {
      t.density[j * t.cols + c] = inner.density(zgrid[c]);
      t.distribution[j * t.cols + c] = inner.distribution(zgrid[c]);
    }
  }
  return t;
}

}  // namespace markovgate
