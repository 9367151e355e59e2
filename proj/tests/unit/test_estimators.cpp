#include <doctest.h>

#include <cmath>
#include <random>

#include "markovgate/estimators.hpp"
#include "markovgate/stats.hpp"
#include "naive.hpp"

using namespace markovgate;

namespace {

/// AR(1) path of length n + 2 with the given persistence.
std::vector<double> ar_path(std::size_t n, double rho, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(n + 2);
  v[0] = nd(eng) / std::sqrt(1 - rho * rho);
  for (std::size_t i = 1; i < v.size(); ++i) v[i] = rho * v[i - 1] + nd(eng);
  return v;
}

naive::Triples triples(const TripleSample& s) { return {s.x, s.y, s.z}; }

bool close(double a, double b, double rel = 1e-8) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) || a == b;
}

}  // namespace

TEST_CASE("windowed estimators agree with full-loop references") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const std::size_t n = 60 + 25 * seed;
    const double rho = seed % 2 ? 0.5 : 0.85;
    const TripleSample s = TripleSample::from_path(ar_path(n, rho, seed), 1.0);
    const Bandwidths bw{0.7, 0.8, 0.75, 0.9, 0.65};
    const EstimatorHandle h(s, bw);
    const naive::Triples t = triples(s);

    std::mt19937_64 eng(100 + seed);
    std::uniform_real_distribution<double> ux(-1.0, 1.0), uz(-1.5, 1.5);
    std::vector<double> xs, zs;
    for (int q = 0; q < 15; ++q) {
      xs.push_back(ux(eng));
      zs.push_back(uz(eng));
    }
    for (std::size_t i = 0; i < n; i += 7) {
      xs.push_back(s.x[i]);
      zs.push_back(s.z[i]);
    }
    const PairEstimates batch = h.evaluate_pairs(xs, zs);
    for (std::size_t q = 0; q < xs.size(); ++q) {
      const double x = xs[q], z = zs[q];
      CAPTURE(seed);
      CAPTURE(q);
      CHECK(close(h.density_1step(x, z), naive::density(t.y, t.z, x, z, bw.b1, bw.b2)));
      CHECK(close(h.distribution_1step(x, z), naive::distribution(t.y, t.z, x, z, bw.b1)));
      const double p = naive::density(t.x, t.z, x, z, bw.h1, bw.h2);
      const double P = naive::distribution(t.x, t.z, x, z, bw.h1);
      const double r = naive::composed_density(t, x, z, bw.b1, bw.b2, bw.h3);
      const double R = naive::composed_distribution(t, x, z, bw.b1, bw.h3);
      CHECK(close(h.density_2step_direct(x, z), p));
      CHECK(close(h.distribution_2step_direct(x, z), P));
      CHECK(close(h.density_2step_indirect(x, z), r));
      CHECK(close(h.distribution_2step_indirect(x, z), R));
      CHECK(close(batch.p_direct[q], p));
      CHECK(close(batch.cdf_direct[q], P));
      CHECK(close(batch.r_indirect[q], r));
      CHECK(close(batch.cdf_indirect[q], R));
    }
  }
}

TEST_CASE("statistics agree with full-loop references") {
  for (std::uint64_t seed = 11; seed <= 14; ++seed) {
    const std::size_t n = 120 + 20 * (seed - 11);
    const TripleSample s = TripleSample::from_path(ar_path(n, 0.7, seed), 1.0);
    const Bandwidths bw{1.5, 0.9, 0.8, 0.9, 0.8};
    const naive::Triples t = triples(s);
    StatOptions o;
    o.calibrate = false;
    const struct {
      StatisticKind kind;
      naive::Stat ref;
    } cases[] = {{StatisticKind::t0, naive::Stat::t0},
                 {StatisticKind::t1, naive::Stat::t1},
                 {StatisticKind::t1_star, naive::Stat::t1_star},
                 {StatisticKind::t2, naive::Stat::t2}};
    for (const auto& c : cases) {
      CAPTURE(seed);
      CAPTURE(to_string(c.kind));
      const double fast = compute_statistic(c.kind, s, bw, o).statistic;
      const double ref = naive::statistic(c.ref, t, bw.b1, bw.b2, bw.h1, bw.h2, bw.h3);
      CHECK(close(fast, ref));
    }
  }
}

TEST_CASE("distribution estimators are exactly 0 and 1 beyond the data") {
  const TripleSample s = TripleSample::from_path(ar_path(150, 0.6, 3), 1.0);
  const EstimatorHandle h(s, Bandwidths{0.8, 0.8, 0.8, 0.8, 0.8});
  CHECK(h.distribution_2step_direct(0.0, -100.0) == 0.0);
  CHECK(h.distribution_2step_direct(0.0, 100.0) == 1.0);
  CHECK(h.distribution_2step_indirect(0.0, -100.0) == 0.0);
  CHECK(h.distribution_2step_indirect(0.0, 100.0) == 1.0);
  CHECK(h.distribution_1step(0.0, 100.0) == 1.0);
}

TEST_CASE("triples overlap and the reversed series runs backwards") {
  const std::vector<double> path{1, 2, 3, 4, 5};
  const TripleSample s = TripleSample::from_path(path, 0.5);
  REQUIRE(s.n() == 3);
  CHECK(s.x == std::vector<double>{1, 2, 3});
  CHECK(s.y == std::vector<double>{2, 3, 4});
  CHECK(s.z == std::vector<double>{3, 4, 5});
  const TripleSample r = s.reversed();
  CHECK(r.x == std::vector<double>{5, 4, 3});
  CHECK(r.z == std::vector<double>{3, 2, 1});
}

TEST_CASE("an empty window is reported as a degenerate design") {
  const TripleSample s = TripleSample::from_path(ar_path(80, 0.5, 9), 1.0);
  const EstimatorHandle h(s, Bandwidths{0.3, 0.3, 0.3, 0.3, 0.3});
  CHECK_THROWS_AS(h.density_2step_direct(50.0, 0.0), DegenerateDesign);
  CHECK_THROWS_AS(h.density_2step_indirect(50.0, 0.0), DegenerateDesign);
}

TEST_CASE("an isolated inner design in a small composing window is an error") {
  // Y = -4.64 has no neighbour within b1 = 1.1, and the composing window at
  // x = -2.04 holds only 32 points, so one bad inner design exceeds the 1%
  // tolerance.
  const TripleSample s = TripleSample::from_path(ar_path(160, 0.7, 13), 1.0);
  const EstimatorHandle h(s, Bandwidths{1.1, 0.9, 0.8, 0.9, 0.8});
  CHECK_THROWS_AS(h.density_2step_indirect(-2.038037, 0.0), DegenerateDesign);
  const EstimatorHandle wide(s, Bandwidths{1.5, 0.9, 0.8, 0.9, 0.8});
  CHECK(std::isfinite(wide.density_2step_indirect(-2.038037, 0.0)));
}

TEST_CASE("bandwidth validation rejects nonpositive values") {
  CHECK_THROWS_AS(Bandwidths({0.1, 0.0, 0.1, 0.1, 0.1}).validate(), ConfigError);
  CHECK(Bandwidths{0.1, 0.2, 0.1, 0.2, 0.1}.spread_ratio() == doctest::Approx(2.0));
}
