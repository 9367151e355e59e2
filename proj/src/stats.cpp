#include "markovgate/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "markovgate/numeric.hpp"

namespace markovgate {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Grid {
  std::vector<double> points;
  double step = 0.0;
};

/// Midpoints of m equal cells covering [lo, hi].
Grid midpoint_grid(double lo, double hi, std::size_t m) {
  Grid g;
  g.step = (hi - lo) / static_cast<double>(m);
  g.points.resize(m);
  for (std::size_t i = 0; i < m; ++i) g.points[i] = lo + (static_cast<double>(i) + 0.5) * g.step;
  return g;
}

double positive(double v) { return v > 0.0 ? v : 0.0; }

WeightSpec weight_for(StatisticKind kind, const StatOptions& options) {
  if (options.weight) return *options.weight;
  WeightSpec w;
  w.kind = default_weight_kind(kind);
  return w;
}

struct Evaluated {
  std::vector<std::size_t> used;
  std::vector<double> weights;
  PairEstimates est;
};

Evaluated evaluate_used(const TripleSample& sample, const Bandwidths& bw, const WeightFunction& wf,
                        const StatOptions& options) {
  Evaluated ev;
  for (std::size_t i = 0; i < sample.n(); ++i) {
    const double w = wf(sample.x[i], sample.z[i]);
    if (w > 0.0) {
      ev.used.push_back(i);
      ev.weights.push_back(w);
    }
  }
  if (ev.used.size() < options.min_support) {
    throw InsufficientSupport("only " + std::to_string(ev.used.size()) +
                              " points carry positive weight (need " +
                              std::to_string(options.min_support) + ")");
  }
  if (ev.used.empty()) return ev;
  std::vector<double> xs(ev.used.size()), zs(ev.used.size());
  for (std::size_t t = 0; t < ev.used.size(); ++t) {
    xs[t] = sample.x[ev.used[t]];
    zs[t] = sample.z[ev.used[t]];
  }
  const EstimatorHandle handle(sample, bw, options.w_kernel, options.k_kernel);
  ev.est = handle.evaluate_pairs(xs, zs);
  return ev;
}

TestReport make_report(StatisticKind kind, const Evaluated& ev, StatisticParts parts,
                       const Bandwidths& bw, const StatOptions& options) {
  TestReport r;
  r.kind = kind;
  r.statistic = parts.value;
  r.n_used = ev.used.size();
  r.floor_breaches = parts.floor_breaches;
  r.dropped_points = parts.dropped;
  r.inner_dropped = ev.est.inner_dropped;
  r.bandwidths = bw;
  if (options.keep_contributions) r.contributions = std::move(parts.contributions);
  return r;
}

template <class F>
std::optional<Calibration> try_calibrate(TestReport& report, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    report.calibration_failed = true;
    report.calibration_note = e.what();
    return std::nullopt;
  }
}

}  // namespace

std::string_view to_string(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::t0: return "t0";
    case StatisticKind::t1: return "t1";
    case StatisticKind::t1_star: return "t1_star";
    case StatisticKind::t2: return "t2";
  }
  return "unknown";
}

StatisticKind statistic_from_string(std::string_view text) {
  if (text == "t0") return StatisticKind::t0;
  if (text == "t1") return StatisticKind::t1;
  if (text == "t1_star") return StatisticKind::t1_star;
  if (text == "t2") return StatisticKind::t2;
  throw ConfigError("unknown statistic '" + std::string(text) + "'");
}

std::string_view to_string(WeightKind kind) {
  switch (kind) {
    case WeightKind::density_weight: return "density_weight";
    case WeightKind::ratio_weight: return "ratio_weight";
    case WeightKind::x_only_weight: return "x_only_weight";
  }
  return "unknown";
}

WeightKind weight_kind_from_string(std::string_view text) {
  if (text == "density_weight") return WeightKind::density_weight;
  if (text == "ratio_weight") return WeightKind::ratio_weight;
  if (text == "x_only_weight") return WeightKind::x_only_weight;
  throw ConfigError("unknown weight kind '" + std::string(text) + "'");
}

void WeightSpec::validate() const {
  if (!(trim_quantile > 0.0 && trim_quantile < 0.5)) {
    throw ConfigError("trim_quantile must lie in (0, 0.5)");
  }
  if (!(smoothness >= 0.0 && smoothness <= 1.0)) throw ConfigError("smoothness must lie in [0, 1]");
}

WeightKind default_weight_kind(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::t1: return WeightKind::density_weight;
    case StatisticKind::t2: return WeightKind::x_only_weight;
    default: return WeightKind::ratio_weight;
  }
}

Taper::Taper(double lo, double hi, double smoothness)
    : lo_(lo), hi_(hi), ramp_(0.5 * smoothness * std::max(hi - lo, 0.0)) {}

double Taper::operator()(double v) const {
  if (!(v > lo_ && v < hi_)) return 0.0;
  const double d = std::min(v - lo_, hi_ - v);
  if (d >= ramp_) return 1.0;
  const double t = d / ramp_;
  return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

WeightFunction::WeightFunction(const WeightSpec& spec, const TripleSample& sample) : spec_(spec) {
  spec_.validate();
  std::vector<double> xs(sample.x), zs(sample.z);
  std::sort(xs.begin(), xs.end());
  std::sort(zs.begin(), zs.end());
  const double tau = spec_.trim_quantile;
  tx_ = Taper(quantile_sorted(xs, tau), quantile_sorted(xs, 1.0 - tau), spec_.smoothness);
  tz_ = Taper(quantile_sorted(zs, tau), quantile_sorted(zs, 1.0 - tau), spec_.smoothness);
}

double density_floor(const TripleSample& sample) {
  const auto [lo, hi] = std::minmax_element(sample.z.begin(), sample.z.end());
  const double range = *hi - *lo;
  return range > 0.0 ? 1e-4 / range : 1e-4;
}

StatisticParts statistic_from_estimates(StatisticKind kind, std::span<const double> direct,
                                        std::span<const double> indirect,
                                        std::span<const double> weights, double floor) {
  StatisticParts out;
  out.contributions.resize(direct.size(), 0.0);
  for (std::size_t t = 0; t < direct.size(); ++t) {
    const double p = direct[t], r = indirect[t], w = weights[t];
    double c = 0.0;
    switch (kind) {
      case StatisticKind::t1:
      case StatisticKind::t2:
        c = (p - r) * (p - r) * w;
        break;
      case StatisticKind::t1_star: {
        double denom = p;
        if (p < floor) {
          denom = floor;
          ++out.floor_breaches;
        }
        const double rel = (p - r) / denom;
        c = rel * rel * w;
        break;
      }
      case StatisticKind::t0:
        if (p < floor || r < floor) {
          ++out.floor_breaches;
          ++out.dropped;
          break;
        }
        c = std::log(r / p) * w;
        break;
    }
    out.contributions[t] = c;
    out.value += c;
  }
  return out;
}

TestReport t1(const TripleSample& sample, const Bandwidths& bw, const WeightSpec& w,
              const StatOptions& options) {
  const WeightFunction wf(w, sample);
  const Evaluated ev = evaluate_used(sample, bw, wf, options);
  TestReport report =
      make_report(StatisticKind::t1, ev,
                  statistic_from_estimates(StatisticKind::t1, ev.est.p_direct, ev.est.r_indirect,
                                           ev.weights, 0.0),
                  bw, options);
  std::optional<Calibration> cal;
  if (options.calibrate && !ev.used.empty()) {
    cal = try_calibrate(report, [&] {
      const PluginQuantities q =
          estimate_plugin_quantities(sample, bw, w, options, PluginScope::density);
      return plugin_calibration_t1(q, bw, options.w_kernel, options.k_kernel);
    });
  }
  pvalues(report, cal);
  return report;
}

TestReport t1_star(const TripleSample& sample, const Bandwidths& bw, const WeightSpec& w_star,
                   const StatOptions& options) {
  const WeightFunction wf(w_star, sample);
  const Evaluated ev = evaluate_used(sample, bw, wf, options);
  TestReport report =
      make_report(StatisticKind::t1_star, ev,
                  statistic_from_estimates(StatisticKind::t1_star, ev.est.p_direct,
                                           ev.est.r_indirect, ev.weights, density_floor(sample)),
                  bw, options);
  std::optional<Calibration> cal;
  if (options.calibrate && !ev.used.empty()) {
    cal = try_calibrate(report, [&] {
      return calibration_t1_star(wf, bw, options.w_kernel, options.k_kernel, options.grid_points);
    });
  }
  pvalues(report, cal);
  return report;
}

TestReport t2(const TripleSample& sample, const Bandwidths& bw, const WeightSpec& omega,
              const StatOptions& options) {
  WeightSpec spec = omega;
  spec.kind = WeightKind::x_only_weight;
  const WeightFunction wf(spec, sample);
  const Evaluated ev = evaluate_used(sample, bw, wf, options);
  TestReport report =
      make_report(StatisticKind::t2, ev,
                  statistic_from_estimates(StatisticKind::t2, ev.est.cdf_direct,
                                           ev.est.cdf_indirect, ev.weights, 0.0),
                  bw, options);
  std::optional<Calibration> cal;
  if (options.calibrate && !ev.used.empty()) {
    cal = try_calibrate(report, [&] {
      const PluginQuantities q =
          estimate_plugin_quantities(sample, bw, spec, options, PluginScope::distribution);
      return plugin_calibration_t2(q, bw, options.w_kernel);
    });
  }
  pvalues(report, cal);
  return report;
}

TestReport t0_glr(const TripleSample& sample, const Bandwidths& bw, const WeightSpec& w_star,
                  const StatOptions& options) {
  const WeightFunction wf(w_star, sample);
  const Evaluated ev = evaluate_used(sample, bw, wf, options);
  StatisticParts parts = statistic_from_estimates(
      StatisticKind::t0, ev.est.p_direct, ev.est.r_indirect, ev.weights, density_floor(sample));
  if (static_cast<double>(parts.dropped) > 0.05 * static_cast<double>(ev.used.size())) {
    throw NumericalFailure("T0: " + std::to_string(parts.dropped) + " of " +
                           std::to_string(ev.used.size()) +
                           " weighted points fall below the density floor");
  }
  TestReport report = make_report(StatisticKind::t0, ev, std::move(parts), bw, options);
  pvalues(report, std::nullopt);
  return report;
}

TestReport compute_statistic(StatisticKind kind, const TripleSample& sample, const Bandwidths& bw,
                             const StatOptions& options) {
  const WeightSpec w = weight_for(kind, options);
  switch (kind) {
    case StatisticKind::t0: return t0_glr(sample, bw, w, options);
    case StatisticKind::t1: return t1(sample, bw, w, options);
    case StatisticKind::t1_star: return t1_star(sample, bw, w, options);
    case StatisticKind::t2: return t2(sample, bw, w, options);
  }
  throw ConfigError("unknown statistic kind");
}

PluginQuantities estimate_plugin_quantities(const TripleSample& sample, const Bandwidths& bw,
                                            const WeightSpec& w, const StatOptions& options,
                                            PluginScope scope) {
  const WeightFunction wf(w, sample);
  const std::size_t m = options.grid_points;
  if (m < 2) throw ConfigError("plug-in grid needs at least two points per axis");
  const Grid gx = midpoint_grid(wf.x_taper().lo(), wf.x_taper().hi(), m);
  const Grid gz = midpoint_grid(wf.z_taper().lo(), wf.z_taper().hi(), m);
  if (!(gx.step > 0.0) || !(gz.step > 0.0)) throw DegenerateWindow("plug-in grid support is empty");
  const std::size_t n = sample.n();
  const EstimatorHandle handle(sample, bw, options.w_kernel, options.k_kernel);

  PluginQuantities q;
  q.x_grid = gx.points;
  q.z_grid = gz.points;

  // Invariant density by kernel smoothing of {X_i} with bandwidth h1.
  auto pi_at = [&](double v) {
    double acc = 0.0;
    const Window win = handle.x_axis().window(v, bw.h1 * options.w_kernel.support_radius);
    for (std::size_t r = win.first; r < win.last; ++r) {
      acc += options.w_kernel((handle.x_axis().value(r) - v) / bw.h1);
    }
    return acc / (static_cast<double>(n) * bw.h1);
  };
  q.pi_hat.resize(m);
  for (std::size_t i = 0; i < m; ++i) q.pi_hat[i] = pi_at(gx.points[i]);

  q.p_hat.assign(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t c = 0; c < m; ++c) {
      q.p_hat[i * m + c] = handle.density_2step_direct(gx.points[i], gz.points[c]);
    }
  }

  if (scope != PluginScope::distribution) {
    const InnerTable inner = handle.inner_table(gz.points);
    q.r_hat.assign(m * m, 0.0);
    q.s_hat.assign(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const EffectiveWeights outer = handle.outer_weights(gx.points[i], bw.h3);
      for (std::size_t c = 0; c < m; ++c) {
        q.r_hat[i * m + c] = compose(outer, n, [&](std::size_t j) { return inner.p(j, c); });
        q.s_hat[i * m + c] = compose(outer, n, [&](std::size_t j) {
          const double v = inner.p(j, c);
          return v * v;
        });
      }
    }

    // Reverse process: conditioning on the later value, responding with the earlier.
    const EstimatorHandle rev(sample.reversed(), bw, options.w_kernel, options.k_kernel);
    const InnerTable rinner = rev.inner_table(gx.points);
    q.p_star_hat.assign(m * m, 0.0);
    q.s_star_hat.assign(m * m, 0.0);
    for (std::size_t c = 0; c < m; ++c) {
      const EffectiveWeights outer = rev.outer_weights(gz.points[c], bw.h3);
      for (std::size_t i = 0; i < m; ++i) {
        q.p_star_hat[i * m + c] = rev.density_2step_direct(gz.points[c], gx.points[i]);
        q.s_star_hat[i * m + c] = compose(outer, n, [&](std::size_t j) {
          const double v = rinner.p(j, i);
          return v * v;
        });
      }
    }

    std::vector<double> pi_z(m);
    for (std::size_t c = 0; c < m; ++c) pi_z[c] = pi_at(gz.points[c]);

    const double area = gx.step * gz.step;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t c = 0; c < m; ++c) {
        const double wv = wf(gx.points[i], gz.points[c]);
        if (wv == 0.0) continue;
        const std::size_t at = i * m + c;
        const double p = positive(q.p_hat[at]);
        const double r = q.r_hat[at];
        q.omega11 += wv * p * p * area;
        q.omega12 += wv * p * p * p * area;
        q.omega13 += wv * positive(q.s_hat[at]) * p * area;
        q.omega14 += wv * r * r * p * area;
        q.omega2 += wv * wv * p * p * p * p * area;
        if (q.pi_hat[i] > 0.0) {
          const double ratio = pi_z[c] / q.pi_hat[i];
          q.omega15 += wv * positive(q.s_star_hat[at]) * positive(q.p_star_hat[at]) * ratio *
                       ratio * area;
        }
      }
    }
  }

  if (scope != PluginScope::density) {
    // V(x, z) = Var(P(z | Y, Delta) | X = x) by local-linear regression of
    // squared residuals P-hat(z | Y_j) - R-hat(z | X_j) on X_j, over the full Z range.
    const Grid gv = midpoint_grid(handle.z_min(), handle.z_max(), m);
    q.v_z_grid = gv.points;
    const InnerTable inner = handle.inner_table(gv.points);
    std::vector<double> resid(n * m, kNaN);
    for (std::size_t j = 0; j < n; ++j) {
      EffectiveWeights outer;
      try {
        outer = handle.outer_weights(sample.x[j], bw.h3);
      } catch (const DegenerateDesign&) {
        continue;
      }
      for (std::size_t c = 0; c < m; ++c) {
        const double rj = [&] {
          try {
            return compose(outer, n, [&](std::size_t l) { return inner.cdf(l, c); });
          } catch (const DegenerateDesign&) {
            return kNaN;
          }
        }();
        const double e = inner.cdf(j, c) - rj;
        resid[j * m + c] = e * e;
      }
    }
    q.v_hat.assign(m * m, 0.0);
    q.expected_v.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const EffectiveWeights outer = handle.outer_weights(gx.points[i], bw.h3);
      double ev = 0.0, mass = 0.0;
      for (std::size_t c = 0; c < m; ++c) {
        double v = compose(outer, n, [&](std::size_t j) { return resid[j * m + c]; });
        if (v < -1e-6) ++q.v_floor_breaches;
        v = positive(v);
        q.v_hat[i * m + c] = v;
        const double p = positive(handle.density_2step_direct(gx.points[i], gv.points[c]));
        ev += v * p;
        mass += p;
      }
      q.expected_v[i] = mass > 0.0 ? ev / mass : 0.0;
      const double om = wf.x_taper()(gx.points[i]);
      q.omega_mass += om * gx.step;
      q.omega_l2_sq += om * om * gx.step;
      q.omega_expected_v += om * q.expected_v[i] * gx.step;
    }
  }
  return q;
}

Calibration plugin_calibration_t1(const PluginQuantities& q, const Bandwidths& bw,
                                  const KernelSpec& w, const KernelSpec& k) {
  const double wn = w.l2_norm_sq, kn = k.l2_norm_sq;
  const double mu = q.omega11 * wn * kn / (bw.h1 * bw.h2) - q.omega12 * wn / bw.h1 +
                    (q.omega13 - q.omega14) * wn / bw.h3 + q.omega15 * kn / bw.b2;
  const double var = 2.0 * q.omega2 * w.conv_l2_norm_sq * k.conv_l2_norm_sq / (bw.h1 * bw.h2);
  if (!(mu > 0.0)) throw CalibrationFailure("T1 plug-in null mean is not positive");
  if (!(var > 0.0)) throw CalibrationFailure("T1 plug-in null variance is not positive");
  const double r = 2.0 * mu / var;
  return {mu, std::sqrt(var), r, r * mu};
}

Calibration plugin_calibration_t2(const PluginQuantities& q, const Bandwidths& bw,
                                  const KernelSpec& w) {
  const double mu = w.l2_norm_sq / (6.0 * bw.h1) *
                    (q.omega_mass + 6.0 * bw.h1 / bw.h3 * q.omega_expected_v);
  const double var = w.conv_l2_norm_sq * q.omega_l2_sq / (45.0 * bw.h1);
  if (!(mu > 0.0)) throw CalibrationFailure("T2 plug-in null mean is not positive");
  if (!(var > 0.0)) throw CalibrationFailure("T2 plug-in null variance is not positive");
  const double r = 2.0 * mu / var;
  return {mu, std::sqrt(var), r, r * mu};
}

Calibration calibration_t1_star(const WeightFunction& w_star, const Bandwidths& bw,
                                const KernelSpec& w, const KernelSpec& k,
                                std::size_t grid_points) {
  const Grid gx = midpoint_grid(w_star.x_taper().lo(), w_star.x_taper().hi(), grid_points);
  const Grid gz = midpoint_grid(w_star.z_taper().lo(), w_star.z_taper().hi(), grid_points);
  double mass = 0.0, sq = 0.0;
  for (double x : gx.points) {
    for (double z : gz.points) {
      const double v = w_star(x, z);
      mass += v;
      sq += v * v;
    }
  }
  const double area = gx.step * gz.step;
  mass *= area;
  sq *= area;
  if (!(mass > 0.0) || !(sq > 0.0)) throw CalibrationFailure("T1* weight has no mass");
  const double norms = w.l2_norm_sq * k.l2_norm_sq;
  const double conv = w.conv_l2_norm_sq * k.conv_l2_norm_sq;
  const double r = mass * norms / (sq * conv);
  const double dof = mass * mass * norms * norms / (sq * conv) / (bw.h1 * bw.h2);
  const double mu = dof / r;
  return {mu, std::sqrt(2.0 * dof) / r, r, dof};
}

double bootstrap_pvalue(double statistic, std::span<const double> replicates) {
  std::size_t b = 0, exceed = 0;
  for (double t : replicates) {
    if (!std::isfinite(t)) continue;
    ++b;
    if (t >= statistic) ++exceed;
  }
  return static_cast<double>(1 + exceed) / static_cast<double>(b + 1);
}

void pvalues(TestReport& report, const std::optional<Calibration>& calibration,
             std::span<const double> bootstrap) {
  if (calibration) {
    if (!(calibration->sigma > 0.0)) throw CalibrationFailure("calibration sigma must be positive");
    report.mu = calibration->mu;
    report.sigma = calibration->sigma;
    report.z_score = (report.statistic - calibration->mu) / calibration->sigma;
    report.p_normal = normal_upper_tail(*report.z_score);
    report.r_scale = calibration->r;
    report.dof = calibration->dof;
    report.p_chisq = chisq_upper_tail(calibration->r * report.statistic, calibration->dof);
  }
  if (!bootstrap.empty()) report.p_bootstrap = bootstrap_pvalue(report.statistic, bootstrap);
}

}  // namespace markovgate
