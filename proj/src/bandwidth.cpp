#include "markovgate/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "markovgate/numeric.hpp"

namespace markovgate {

std::string_view to_string(BandwidthKind kind) {
  switch (kind) {
    case BandwidthKind::empirical_rule: return "empirical_rule";
    case BandwidthKind::fixed: return "fixed";
    case BandwidthKind::cv: return "cv";
  }
  return "unknown";
}

BandwidthKind bandwidth_kind_from_string(std::string_view text) {
  if (text == "empirical_rule") return BandwidthKind::empirical_rule;
  if (text == "fixed") return BandwidthKind::fixed;
  if (text == "cv") return BandwidthKind::cv;
  throw ConfigError("unknown bandwidth rule '" + std::string(text) + "'");
}

std::string_view to_string(BandwidthTarget target) {
  return target == BandwidthTarget::t2 ? "t2" : "t1_family";
}

BandwidthTarget bandwidth_target_from_string(std::string_view text) {
  if (text == "t1_family") return BandwidthTarget::t1_family;
  if (text == "t2") return BandwidthTarget::t2;
  throw ConfigError("unknown bandwidth target '" + std::string(text) + "'");
}

double default_exponent(BandwidthTarget target) {
  return target == BandwidthTarget::t2 ? 2.0 / 9.0 : 1.0 / 5.0;
}

double robust_spread(std::span<const double> values) {
  if (values.size() < 2) throw ConfigError("spread needs at least two observations");
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  const double sd = std::sqrt(variance(s));
  const double iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.349) : sd;
  if (!(spread > 0.0)) throw ConfigError("zero-spread sample: bandwidth undefined");
  return spread;
}

namespace {

Bandwidths rule_of_thumb(const TripleSample& sample, double c, double exponent) {
  const double rate = std::pow(static_cast<double>(sample.n()), -exponent);
  const double hx = c * robust_spread(sample.x) * rate;
  const double hz = c * robust_spread(sample.z) * rate;
  return {hx, hz, hx, hz, hx};
}

}  // namespace

Bandwidths select(const BandwidthRule& rule, const TripleSample& sample, BandwidthTarget target) {
  if (rule.kind == BandwidthKind::fixed) {
    if (!rule.fixed) throw ConfigError("fixed bandwidth rule without bandwidths");
    rule.fixed->validate();
    return *rule.fixed;
  }
  if (sample.n() < 30) throw ConfigError("bandwidth selection needs n >= 30");
  if (!(rule.c_scale > 0.0)) throw ConfigError("c_scale must be positive");
  const double exponent = rule.exponent.value_or(default_exponent(target));
  if (rule.kind == BandwidthKind::empirical_rule) {
    return rule_of_thumb(sample, rule.c_scale, exponent);
  }
  if (rule.cv_grid.empty()) throw ConfigError("cv bandwidth rule with empty grid");
  Bandwidths best{};
  double best_score = std::numeric_limits<double>::infinity();
  for (double mult : rule.cv_grid) {
    const Bandwidths bw = rule_of_thumb(sample, rule.c_scale * mult, exponent);
    double score;
    try {
      score = cv_score(sample, bw);
    } catch (const DegenerateDesign&) {
      continue;
    }
    if (score < best_score) {
      best_score = score;
      best = bw;
    }
  }
  if (!std::isfinite(best_score)) throw DegenerateDesign("no cross-validation candidate usable");
  return best;
}

double cv_score(const TripleSample& sample, const Bandwidths& bw, const KernelSpec& w,
                const KernelSpec& k) {
  bw.validate();
  const SortedAxis xs(sample.x);
  const std::size_t n = sample.n();
  double integral = 0.0, fitted = 0.0;
  std::size_t used = 0;
  std::vector<double> wts;
  for (std::size_t r = 0; r < n; ++r) {
    const double x0 = xs.value(r);
    const Window win = xs.window(x0, bw.h1 * w.support_radius);
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t t = win.first; t < win.last; ++t) {
      if (t == r) continue;
      const double u = (xs.value(t) - x0) / bw.h1;
      const double kv = w(u);
      s0 += kv;
      s1 += u * kv;
      s2 += u * u * kv;
    }
    const double det = s0 * s2 - s1 * s1;
    if (!(det > 1e-8 * s0 * s2) || s0 <= 0.0) continue;
    // Leave-one-out weights normalized to sum to one.
    wts.assign(win.size(), 0.0);
    for (std::size_t t = win.first; t < win.last; ++t) {
      if (t == r) continue;
      const double u = (xs.value(t) - x0) / bw.h1;
      wts[t - win.first] = w(u) * (s2 - u * s1) / det;
    }
    const double zi = sample.z[xs.index(r)];
    double fit = 0.0, sq = 0.0;
    for (std::size_t a = 0; a < win.size(); ++a) {
      if (wts[a] == 0.0) continue;
      const double za = sample.z[xs.index(win.first + a)];
      fit += wts[a] * k((za - zi) / bw.h2);
      for (std::size_t b = 0; b < win.size(); ++b) {
        if (wts[b] == 0.0) continue;
        const double zb = sample.z[xs.index(win.first + b)];
        sq += wts[a] * wts[b] * convolution(k, (za - zb) / bw.h2);
      }
    }
    integral += sq / bw.h2;
    fitted += fit / bw.h2;
    ++used;
  }
  if (used == 0) throw DegenerateDesign("cross-validation: no usable leave-one-out fit");
  return (integral - 2.0 * fitted) / static_cast<double>(used);
}

}  // namespace markovgate
