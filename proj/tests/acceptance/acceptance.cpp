// Acceptance suite: one pass/fail line per criterion.
//
//   markovgate_acceptance --criterion 4
//   markovgate_acceptance --criterion all
//
// Exit status is 0 when every selected criterion passes.

#include <CLI11.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "markovgate/bandwidth.hpp"
#include "markovgate/error.hpp"
#include "markovgate/harness.hpp"
#include "markovgate/kernels.hpp"
#include "markovgate/models.hpp"
#include "markovgate/rng.hpp"
#include "markovgate/stats.hpp"
#include "naive.hpp"

namespace mg = markovgate;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

std::vector<double> ar_path(std::size_t n, double rho, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(n + 2);
  v[0] = nd(eng) / std::sqrt(1 - rho * rho);
  for (std::size_t i = 1; i < v.size(); ++i) v[i] = rho * v[i - 1] + nd(eng);
  return v;
}

double rel_err(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

// ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  double worst_est = 0.0, worst_stat = 0.0;
  std::size_t compared = 0;

  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const std::size_t n = 40 + 20 * seed;  // 60 .. 200
    const double rho = seed % 2 ? 0.5 : 0.85;
    const mg::TripleSample s = mg::TripleSample::from_path(ar_path(n, rho, seed), 1.0);
    const naive::Triples t{s.x, s.y, s.z};
    const mg::Bandwidths bw{0.7, 0.8, 0.75, 0.9, 0.65};
    const mg::EstimatorHandle h(s, bw);

    std::mt19937_64 eng(1000 + seed);
    std::uniform_real_distribution<double> ux(-1.0, 1.0), uz(-1.5, 1.5);
    std::vector<double> xs, zs;
    for (int q = 0; q < 10; ++q) {
      xs.push_back(ux(eng));
      zs.push_back(uz(eng));
    }
    // Sample points in the interior, where every design is nondegenerate.
    for (std::size_t i = 0; i < n; i += 11) {
      if (std::abs(s.x[i]) > 1.5 || std::abs(s.z[i]) > 2.0) continue;
      xs.push_back(s.x[i]);
      zs.push_back(s.z[i]);
    }
    const mg::PairEstimates batch = h.evaluate_pairs(xs, zs);
    for (std::size_t q = 0; q < xs.size(); ++q) {
      const double x = xs[q], z = zs[q];
      const double p = naive::density(t.x, t.z, x, z, bw.h1, bw.h2);
      const double P = naive::distribution(t.x, t.z, x, z, bw.h1);
      const double r = naive::composed_density(t, x, z, bw.b1, bw.b2, bw.h3);
      const double R = naive::composed_distribution(t, x, z, bw.b1, bw.h3);
      for (double e : {rel_err(h.density_1step(x, z), naive::density(t.y, t.z, x, z, bw.b1, bw.b2)),
                       rel_err(h.distribution_1step(x, z), naive::distribution(t.y, t.z, x, z, bw.b1)),
                       rel_err(h.density_2step_direct(x, z), p),
                       rel_err(h.distribution_2step_direct(x, z), P),
                       rel_err(h.density_2step_indirect(x, z), r),
                       rel_err(h.distribution_2step_indirect(x, z), R),
                       rel_err(batch.p_direct[q], p), rel_err(batch.cdf_direct[q], P),
                       rel_err(batch.r_indirect[q], r), rel_err(batch.cdf_indirect[q], R)}) {
        worst_est = std::max(worst_est, e);
        ++compared;
      }
    }

    // Statistics use a wider inner bandwidth so that no composing window
    // contains an isolated design.
    const mg::Bandwidths sbw{1.5, 0.9, 0.8, 0.9, 0.8};
    mg::StatOptions o;
    o.calibrate = false;
    const std::pair<mg::StatisticKind, naive::Stat> kinds[] = {
        {mg::StatisticKind::t0, naive::Stat::t0},
        {mg::StatisticKind::t1, naive::Stat::t1},
        {mg::StatisticKind::t1_star, naive::Stat::t1_star},
        {mg::StatisticKind::t2, naive::Stat::t2}};
    for (const auto& [kind, ref] : kinds) {
      const double fast = mg::compute_statistic(kind, s, sbw, o).statistic;
      const double slow = naive::statistic(ref, t, sbw.b1, sbw.b2, sbw.h1, sbw.h2, sbw.h3);
      worst_stat = std::max(worst_stat, rel_err(fast, slow));
      ++compared;
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool pass = worst_est <= 1e-8 && worst_stat <= 1e-8 && secs < 60.0;
  return {pass, format("%zu comparisons, max rel err estimators %.2e statistics %.2e, %.1f s",
                       compared, worst_est, worst_stat, secs)};
}

Outcome local_linear_identities() {
  std::mt19937_64 eng(7);
  std::uniform_int_distribution<int> size(8, 200);
  std::uniform_real_distribution<double> unif(-1.0, 1.0), bwd(0.2, 1.5);
  std::normal_distribution<double> nd;
  const mg::KernelSpec k = mg::KernelSpec::epanechnikov();
  double worst = 0.0;
  int designs = 0;
  while (designs < 1000) {
    std::vector<double> x(static_cast<std::size_t>(size(eng)));
    for (double& v : x) v = designs % 3 == 0 ? std::exp(nd(eng)) - 1.0 : nd(eng);
    const double y = unif(eng), b = bwd(eng);
    const mg::SortedAxis axis(x);
    mg::Window win;
    std::vector<double> w;
    if (!mg::detail::local_linear_weights(axis, y, b, k, win, w)) continue;
    ++designs;
    const double n = static_cast<double>(x.size());
    const double a0 = unif(eng), a1 = unif(eng);
    double s0 = 0.0, s1 = 0.0;
    for (std::size_t t = 0; t < w.size(); ++t) {
      s0 += w[t];
      s1 += w[t] * (axis.value(win.first + t) - y) / b;
    }
    std::vector<double> constant(x.size(), a0), line(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) line[i] = a0 + a1 * x[i];
    worst = std::max({worst, std::abs(s0 / n - 1.0), std::abs(s1 / n),
                      std::abs(mg::local_linear_fit(x, constant, y, b, k) - a0),
                      std::abs(mg::local_linear_fit(x, line, y, b, k) - (a0 + a1 * y))});
  }
  return {worst <= 1e-10, format("1000 designs, max deviation %.2e", worst)};
}

Outcome kernel_constants() {
  using boost::math::quadrature::gauss_kronrod;
  auto integrate = [](const std::function<double(double)>& f, double a, double b) {
    return gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
  };
  double worst = 0.0;
  for (mg::KernelName name :
       {mg::KernelName::epanechnikov, mg::KernelName::quartic, mg::KernelName::triweight}) {
    const mg::KernelSpec k = mg::KernelSpec::make(name);
    const double l2 = integrate([&](double u) { return k(u) * k(u); }, -1, 1);
    auto conv = [&](double t) {
      const double lo = std::max(-1.0, t - 1.0), hi = std::min(1.0, t + 1.0);
      if (hi <= lo) return 0.0;
      return integrate([&](double u) { return k(u) * k(t - u); }, lo, hi);
    };
    auto conv_sq = [&](double t) {
      const double c = conv(t);
      return c * c;
    };
    const double cl2 = integrate(conv_sq, -2, 0) + integrate(conv_sq, 0, 2);
    worst = std::max({worst, std::abs(l2 - k.l2_norm_sq), std::abs(cl2 - k.conv_l2_norm_sq)});
  }
  const bool exact = mg::KernelSpec::epanechnikov().l2_norm_sq == 0.6;
  return {worst <= 1e-8 && exact,
          format("max |cached - quadrature| %.2e, Epanechnikov ||K||^2 == 0.6: %s", worst,
                 exact ? "yes" : "no")};
}

// ---------------------------------------------------------------------------

mg::ExperimentConfig desk_config(std::size_t threads) {
  mg::ExperimentConfig c;
  c.sim.n_obs = 1200;
  c.mc_reps = 200;
  c.bootstrap_B = 99;
  c.alpha_levels = {0.05};
  c.statistic = mg::StatisticKind::t1_star;
  c.threads = threads;
  return c;
}

const mg::PowerRow& row(const mg::PowerTable& t, double theta) {
  const mg::PowerRow* r = t.find(theta, 0.05);
  if (!r) throw mg::Error("missing power row");
  return *r;
}

std::string describe(const mg::PowerTable& t) {
  std::string s;
  for (const auto& r : t.rows) {
    s += format("theta=%g: %zu/%zu=%.3f (se %.3f); ", r.theta, r.rejections, r.reps, r.rate, r.se);
  }
  s += format("failed reps %zu", t.failures);
  return s;
}

// Acceptance band for 200 replicates at the 5% level.
constexpr double kBandLo = 0.018, kBandHi = 0.10;

Outcome size_desk(std::size_t threads) {
  const mg::PowerTable t = mg::run_size(desk_config(threads));
  const double rate = row(t, 0.0).rate;
  return {rate >= kBandLo && rate <= kBandHi,
          format("band [%.3f, %.3f]; ", kBandLo, kBandHi) + describe(t)};
}

Outcome power_trend(std::size_t threads) {
  mg::ExperimentConfig c = desk_config(threads);
  c.model.variant = mg::ModelVariant::h1_stochastic_level;
  c.model.s_scale = 10.0;
  c.theta_grid = {0.0, 0.4, 1.0};
  const mg::PowerTable t = mg::run_power(c);
  const mg::PowerRow &p0 = row(t, 0.0), &p4 = row(t, 0.4), &p1 = row(t, 1.0);
  auto gap_ok = [](const mg::PowerRow& hi, const mg::PowerRow& lo) {
    return hi.rate - lo.rate > 2.0 * std::sqrt(hi.se * hi.se + lo.se * lo.se);
  };
  const bool pass = gap_ok(p1, p4) && gap_ok(p4, p0) && p1.rate >= 0.5;
  return {pass, describe(t)};
}

Outcome specificity(std::size_t threads) {
  mg::ExperimentConfig c = desk_config(threads);
  c.model.variant = mg::ModelVariant::h3_jumps;
  c.model.jump_type = mg::JumpType::gaussian_iid;
  c.theta_grid = {0.0, 1.0};
  const mg::PowerTable t = mg::run_power(c);
  bool pass = true;
  for (double th : c.theta_grid) {
    const double r = row(t, th).rate;
    pass = pass && r >= kBandLo && r <= kBandHi;
  }
  return {pass, format("band [%.3f, %.3f]; ", kBandLo, kBandHi) + describe(t)};
}

Outcome sensitivity(std::size_t threads) {
  mg::ExperimentConfig c = desk_config(threads);
  c.model.variant = mg::ModelVariant::h3_jumps;
  c.model.jump_type = mg::JumpType::cir_driven;
  c.theta_grid = {1.0};
  const mg::PowerTable t = mg::run_power(c);
  return {row(t, 1.0).rate >= 0.6, "need >= 0.6; " + describe(t)};
}

Outcome bootstrap_quality(std::size_t threads) {
  int wins = 0;
  std::string detail;
  for (std::uint64_t e = 0; e < 10; ++e) {
    double ks[2];
    for (int k = 0; k < 2; ++k) {
      mg::ExperimentConfig c;
      c.sim.n_obs = k == 0 ? 600 : 1200;
      c.mc_reps = 200;
      c.bootstrap_B = 3;
      c.pvalue_mode = mg::PValueMode::pooled;
      c.master_seed = mg::derive_seed(20240611, e, 8);
      c.threads = threads;
      ks[k] = mg::run_bootstrap_density(c).ks;
    }
    wins += ks[1] < ks[0];
    detail += format("%.3f/%.3f ", ks[0], ks[1]);
  }
  return {wins >= 8, format("KS(600)/KS(1200) per experiment: %s; smaller at 1200 in %d of 10",
                            detail.c_str(), wins)};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "markovgate_acceptance_determinism";
  auto snapshot = [&](const std::vector<std::string>& files) {
    std::map<std::string, std::string> out;
    for (const auto& f : files) {
      std::ifstream in(dir / f, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      out[f] = ss.str();
    }
    return out;
  };

  struct Job {
    std::string command;
    mg::ExperimentConfig config;
  };
  std::vector<Job> jobs;
  {
    mg::ExperimentConfig c;
    c.model.variant = mg::ModelVariant::h3_jumps;
    c.theta_grid = {0.0, 1.0};
    c.sim.n_obs = 600;
    c.mc_reps = 20;
    c.bootstrap_B = 10;
    jobs.push_back({"power", c});
    mg::ExperimentConfig d;
    d.sim.n_obs = 400;
    d.mc_reps = 100;
    d.bootstrap_B = 3;
    d.pvalue_mode = mg::PValueMode::pooled;
    jobs.push_back({"bootstrap-density", d});
    mg::ExperimentConfig e;
    e.statistic = mg::StatisticKind::t2;
    e.sim.n_obs = 400;
    e.mc_reps = 20;
    e.bootstrap_B = 10;
    jobs.push_back({"size", e});
  }

  std::size_t files_checked = 0;
  for (auto& job : jobs) {
    std::map<std::string, std::string> reference;
    for (std::size_t threads : {1, 4, 8}) {
      fs::remove_all(dir);
      job.config.output_dir = dir.string();
      job.config.threads = threads;
      const auto files = mg::run_and_write(job.command, job.config);
      const auto snap = snapshot(files);
      if (threads == 1) {
        reference = snap;
        continue;
      }
      if (snap != reference) {
        fs::remove_all(dir);
        return {false, job.command + ": outputs differ with " + std::to_string(threads) + " threads"};
      }
      files_checked += snap.size();
    }
  }
  fs::remove_all(dir);
  return {true, format("%zu output files byte-identical across 1, 4 and 8 threads", files_checked)};
}

Outcome performance() {
  mg::SimConfig sc;
  sc.n_obs = 2400;
  sc.seed = 99;
  const mg::Path p = mg::simulate(mg::ModelSpec{}, sc);
  const auto start = std::chrono::steady_clock::now();
  const mg::TripleSample s = mg::TripleSample::from_path(p.values, p.delta);
  const mg::Bandwidths bw = mg::select(mg::BandwidthRule{}, s, mg::BandwidthTarget::t1_family);
  const mg::TestReport r = mg::compute_statistic(mg::StatisticKind::t1, s, bw);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {secs <= 60.0 && std::isfinite(r.statistic),
          format("T1 with plug-in calibration at n = 2400: %.2f s (limit 60 s), value %.4g", secs,
                 r.statistic)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"markovgate acceptance suite"};
  std::string which = "all";
  std::size_t threads = 0;
  app.add_option("--criterion", which, "1-10 or all");
  app.add_option("--threads", threads, "Worker threads for Monte Carlo criteria (0: auto)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"oracle equivalence", oracle_equivalence},
      {"local-linear identities", local_linear_identities},
      {"kernel constants", kernel_constants},
      {"size at desk scale", [&] { return size_desk(threads); }},
      {"power trend under a stochastic level", [&] { return power_trend(threads); }},
      {"specificity under Markov jumps", [&] { return specificity(threads); }},
      {"sensitivity to non-Markov jumps", [&] { return sensitivity(threads); }},
      {"bootstrap approximation improves with n", [&] { return bootstrap_quality(threads); }},
      {"determinism across thread counts", determinism},
      {"performance of T1 at n = 2400", performance},
  };

  std::vector<std::size_t> selected;
  if (which == "all") {
    for (std::size_t i = 0; i < criteria.size(); ++i) selected.push_back(i);
  } else {
    std::size_t idx = 0;
    try {
      idx = std::stoul(which);
    } catch (const std::exception&) {
      idx = 0;
    }
    if (idx < 1 || idx > criteria.size()) {
      std::cerr << "unknown criterion '" << which << "'\n";
      return 2;
    }
    selected.push_back(idx - 1);
  }

  bool all_pass = true;
  for (std::size_t i : selected) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "criterion " << i + 1 << " (" << criteria[i].first
              << "): " << (o.pass ? "PASS" : "FAIL") << " [" << o.detail
              << format("] %.0f s", secs) << std::endl;
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
