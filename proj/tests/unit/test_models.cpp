#include <doctest.h>

#include <cmath>
#include <sstream>

#include "markovgate/error.hpp"
#include "markovgate/models.hpp"
#include "markovgate/numeric.hpp"

using namespace markovgate;

namespace {

double lag1_autocorr(const std::vector<double>& v) {
  const double m = mean(v);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) num += (v[i] - m) * (v[i + 1] - m);
  for (double x : v) den += (x - m) * (x - m);
  return num / den;
}

ModelSpec variant(ModelVariant v, double theta = 0.0, JumpType jt = JumpType::gaussian_iid) {
  ModelSpec m;
  m.variant = v;
  m.theta = theta;
  m.jump_type = jt;
  return m;
}

}  // namespace

TEST_CASE("exact OU recursion: stationary moments and autocorrelation") {
  const ModelSpec m;
  SimConfig c;
  c.n_obs = 50000;
  c.seed = 5;
  const Path p = simulate_ou_exact(m, c);
  REQUIRE(p.values.size() == c.n_obs + 2);
  const double rho = std::exp(-m.kappa * c.delta);
  const double var = m.sigma * m.sigma / (2 * m.kappa);
  const double n = static_cast<double>(p.values.size());
  // Effective sample size of an AR(1) for the mean and for the variance.
  const double se_mean = std::sqrt(var / n * (1 + rho) / (1 - rho));
  const double se_var = var * std::sqrt(2.0 / n * (1 + rho * rho) / (1 - rho * rho));
  CHECK(std::abs(mean(p.values) - m.alpha) < 3 * se_mean);
  CHECK(std::abs(variance(p.values) - var) < 3 * se_var);
  // Lag-1 autocorrelation: SE of the estimate is about sqrt((1 - rho^2) / n).
  CHECK(std::abs(lag1_autocorr(p.values) - rho) < 3 * std::sqrt((1 - rho * rho) / n) + 5.0 / n);
}

TEST_CASE("OU with fast reversion decorrelates") {
  ModelSpec m;
  m.kappa = 50.0;
  SimConfig c;
  c.n_obs = 10000;
  c.delta = 1.0;
  const Path p = simulate_ou_exact(m, c);
  CHECK(std::abs(lag1_autocorr(p.values)) < 0.05);
}

TEST_CASE("alternatives at theta = 0 coincide") {
  SimConfig c;
  c.n_obs = 600;
  c.seed = 77;
  const Path h1 = simulate(variant(ModelVariant::h1_stochastic_level), c, 3);
  const Path h2 = simulate(variant(ModelVariant::h2_stochastic_vol), c, 3);
  const Path h3 = simulate(variant(ModelVariant::h3_jumps), c, 3);
  const Path h3b = simulate(variant(ModelVariant::h3_jumps, 0.0, JumpType::cir_driven), c, 3);
  CHECK(h1.values == h2.values);
  CHECK(h1.values == h3.values);
  CHECK(h1.values == h3b.values);
  CHECK(h3.diagnostics.jumps == 0);
}

TEST_CASE("theta = 0 alternatives share the null marginal") {
  // Pooled over paths, the Euler alternative and the exact null agree in
  // mean and variance within Monte Carlo bands.
  SimConfig c;
  c.n_obs = 2000;
  c.seed = 8;
  std::vector<double> euler_means, exact_means, euler_vars, exact_vars;
  for (std::uint64_t id = 0; id < 40; ++id) {
    const Path e = simulate(variant(ModelVariant::h1_stochastic_level), c, id);
    const Path x = simulate(ModelSpec{}, c, id + 1000);
    euler_means.push_back(mean(e.values));
    exact_means.push_back(mean(x.values));
    euler_vars.push_back(variance(e.values));
    exact_vars.push_back(variance(x.values));
  }
  auto band = [](const std::vector<double>& a, const std::vector<double>& b) {
    return 3.0 * std::sqrt(variance(a) / a.size() + variance(b) / b.size());
  };
  CHECK(std::abs(mean(euler_means) - mean(exact_means)) < band(euler_means, exact_means));
  CHECK(std::abs(mean(euler_vars) - mean(exact_vars)) < band(euler_vars, exact_vars));
}

TEST_CASE("stochastic level inflates the marginal variance") {
  SimConfig c;
  c.n_obs = 2000;
  c.seed = 9;
  std::vector<double> alt, null;
  for (std::uint64_t id = 0; id < 40; ++id) {
    alt.push_back(variance(simulate(variant(ModelVariant::h1_stochastic_level, 1.0), c, id).values));
    null.push_back(variance(simulate(ModelSpec{}, c, id).values));
  }
  const double se = std::sqrt(variance(alt) / alt.size() + variance(null) / null.size());
  CHECK(mean(alt) - mean(null) > 3 * se);
}

TEST_CASE("volatility factor stays nonnegative and averages to its level") {
  SimConfig c;
  c.n_obs = 50000;  // 10^6 Euler substeps
  c.burn_in = 0;
  c.seed = 10;
  const ModelSpec m = variant(ModelVariant::h2_stochastic_vol, 1.0);
  const Path p = simulate(m, c);
  CHECK(p.diagnostics.latent_min >= 0.0);
  CHECK_FALSE(p.diagnostics.feller_violated);
  // CIR: stationary sd of Y is sigma2 sqrt(b / (2 kappa2)); the time average
  // over T has SE about sd * sqrt(2 / (kappa2 T)).
  const double kappa2 = m.kappa / m.s_scale, b = m.s_scale * m.alpha, sigma2 = m.sigma / 2;
  const double sd = sigma2 * std::sqrt(b / (2 * kappa2));
  const double T = static_cast<double>(c.n_obs) * c.delta;
  CHECK(std::abs(p.diagnostics.latent_mean - b) < 3 * sd * std::sqrt(2 / (kappa2 * T)));
}

TEST_CASE("jump counts are Poisson with mean theta T") {
  SimConfig c;
  c.n_obs = 100;
  c.burn_in = 10;
  c.seed = 11;
  const ModelSpec m = variant(ModelVariant::h3_jumps, 1.0);
  const double T = static_cast<double>(c.n_obs + 1) * c.delta;
  std::vector<double> counts;
  for (std::uint64_t id = 0; id < 1000; ++id) {
    counts.push_back(static_cast<double>(simulate(m, c, id).diagnostics.jumps));
  }
  CHECK(std::abs(mean(counts) - T) < 3 * std::sqrt(T / 1000.0));
  CHECK(std::abs(variance(counts) - T) < 0.25 * T);
}

TEST_CASE("CIR-driven jumps are positive") {
  SimConfig c;
  c.n_obs = 1200;
  c.seed = 12;
  const Path p = simulate(variant(ModelVariant::h3_jumps, 1.0, JumpType::cir_driven), c);
  REQUIRE(p.diagnostics.jumps > 0);
  CHECK(p.diagnostics.jump_size_min > 0.0);
}

TEST_CASE("simulation is reproducible and paths are independent") {
  SimConfig c;
  c.n_obs = 300;
  c.seed = 42;
  const ModelSpec m = variant(ModelVariant::h2_stochastic_vol, 0.5);
  CHECK(simulate(m, c, 1).values == simulate(m, c, 1).values);
  CHECK(simulate(m, c, 1).values != simulate(m, c, 2).values);
  SimConfig other = c;
  other.seed = 43;
  CHECK(simulate(m, c, 1).values != simulate(m, other, 1).values);
}

TEST_CASE("first and second halves of a path have matching moments") {
  SimConfig c;
  c.n_obs = 20000;
  c.seed = 13;
  const Path p = simulate(variant(ModelVariant::h1_stochastic_level, 1.0), c);
  const std::size_t half = p.values.size() / 2;
  const std::vector<double> a(p.values.begin(), p.values.begin() + half);
  const std::vector<double> b(p.values.begin() + half, p.values.end());
  // The slow level factor makes the halves strongly dependent internally;
  // use the batch-means spread of 20 blocks for the SE.
  std::vector<double> blocks;
  const std::size_t len = p.values.size() / 20;
  for (std::size_t k = 0; k < 20; ++k) {
    blocks.push_back(mean(std::span<const double>(p.values).subspan(k * len, len)));
  }
  const double se = std::sqrt(variance(blocks) / 10.0 * 2.0);
  CHECK(std::abs(mean(a) - mean(b)) < 3 * se);
}

TEST_CASE("halving the Euler step leaves the marginal within Monte Carlo error") {
  SimConfig fine, coarse;
  fine.n_obs = coarse.n_obs = 2000;
  fine.substeps = 20;
  coarse.substeps = 10;
  std::vector<double> vf, vc;
  for (std::uint64_t id = 0; id < 30; ++id) {
    const ModelSpec m = variant(ModelVariant::h2_stochastic_vol, 1.0);
    vf.push_back(variance(simulate(m, fine, id).values));
    vc.push_back(variance(simulate(m, coarse, id + 500).values));
  }
  const double se = std::sqrt(variance(vf) / vf.size() + variance(vc) / vc.size());
  CHECK(std::abs(mean(vf) - mean(vc)) < 3 * se);
}

TEST_CASE("path CSV round trip") {
  SimConfig c;
  c.n_obs = 50;
  const Path p = simulate(ModelSpec{}, c);
  std::stringstream ss;
  write_path_csv(p, ss);
  const std::string text = ss.str();
  CHECK(text.rfind("index,time,value\n", 0) == 0);
  const Path q = read_path_csv(ss);
  CHECK(q.values == p.values);
  CHECK(q.delta == doctest::Approx(c.delta).epsilon(1e-12));
  std::stringstream bad("index,time,value\n0,0,abc\n");
  CHECK_THROWS_AS(read_path_csv(bad), ConfigError);
}

TEST_CASE("model and simulation parameters are validated") {
  ModelSpec m;
  m.kappa = 0.0;
  CHECK_THROWS_AS(m.validate(), ConfigError);
  m = ModelSpec{};
  m.theta = 1.5;
  CHECK_THROWS_AS(m.validate(), ConfigError);
  SimConfig c;
  c.n_obs = 5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(model_from_string("h2") == ModelVariant::h2_stochastic_vol);
  CHECK(jump_type_from_string("ii") == JumpType::cir_driven);
  CHECK_THROWS_AS(model_from_string("h9"), ConfigError);
  CHECK_THROWS_AS(simulate_h1(ModelSpec{}, SimConfig{}), ConfigError);
}
