#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "markovgate/bandwidth.hpp"
#include "markovgate/error.hpp"
#include "markovgate/models.hpp"

using namespace markovgate;

namespace {

TripleSample normal_triples(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(n + 2);
  for (double& x : v) x = scale * nd(gen);
  return TripleSample::from_path(v, 1.0);
}

}  // namespace

TEST_CASE("robust spread") {
  const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8};
  const double sd = std::sqrt(6.0);
  const double iqr = 6.25 - 2.75;
  CHECK(robust_spread(v) == doctest::Approx(std::min(sd, iqr / 1.349)));
  CHECK_THROWS_AS(robust_spread(std::vector<double>(10, 3.0)), ConfigError);
}

TEST_CASE("normal reference rule on a standard normal sample") {
  const TripleSample s = normal_triples(1022, 11);  // n = 1022 triples of 1024 values
  const Bandwidths bw = select(BandwidthRule{}, s, BandwidthTarget::t1_family);
  const double expected = robust_spread(s.x) * std::pow(1022.0, -0.2);
  CHECK(bw.h1 == doctest::Approx(expected).epsilon(1e-14));
  CHECK(bw.h1 == doctest::Approx(std::pow(1024.0, -0.2)).epsilon(0.1));
  CHECK(bw.b1 == bw.h1);
  CHECK(bw.h3 == bw.h1);
  CHECK(bw.b2 == bw.h2);

  const Bandwidths t2 = select(BandwidthRule{}, s, BandwidthTarget::t2);
  CHECK(t2.h1 == doctest::Approx(robust_spread(s.x) * std::pow(1022.0, -2.0 / 9.0)).epsilon(1e-14));
}

TEST_CASE("bandwidths are linear in c and equivariant in scale") {
  const TripleSample s = normal_triples(500, 3);
  BandwidthRule one, two;
  two.c_scale = 2.0;
  const Bandwidths a = select(one, s, BandwidthTarget::t1_family);
  const Bandwidths b = select(two, s, BandwidthTarget::t1_family);
  CHECK(b.h1 == doctest::Approx(2 * a.h1).epsilon(1e-15));
  CHECK(b.h2 == doctest::Approx(2 * a.h2).epsilon(1e-15));
  CHECK(b.b1 == doctest::Approx(2 * a.b1).epsilon(1e-15));
  CHECK(b.b2 == doctest::Approx(2 * a.b2).epsilon(1e-15));
  CHECK(b.h3 == doctest::Approx(2 * a.h3).epsilon(1e-15));

  const TripleSample scaled = normal_triples(500, 3, 10.0);
  const Bandwidths c = select(one, scaled, BandwidthTarget::t1_family);
  CHECK(c.h1 == doctest::Approx(10 * a.h1).epsilon(1e-12));
  CHECK(c.h2 == doctest::Approx(10 * a.h2).epsilon(1e-12));
}

TEST_CASE("rate: bandwidth shrinks as n^(-1/5)") {
  const TripleSample small = normal_triples(1000, 5), large = normal_triples(32000, 5);
  const Bandwidths a = select(BandwidthRule{}, small, BandwidthTarget::t1_family);
  const Bandwidths b = select(BandwidthRule{}, large, BandwidthTarget::t1_family);
  CHECK(b.h1 / a.h1 == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("rule validation") {
  const TripleSample s = normal_triples(100, 1);
  BandwidthRule bad;
  bad.c_scale = 0.0;
  CHECK_THROWS_AS(select(bad, s, BandwidthTarget::t1_family), ConfigError);
  BandwidthRule fixed;
  fixed.kind = BandwidthKind::fixed;
  CHECK_THROWS_AS(select(fixed, s, BandwidthTarget::t1_family), ConfigError);
  fixed.fixed = Bandwidths{0.1, 0.2, 0.3, 0.4, 0.5};
  CHECK(select(fixed, s, BandwidthTarget::t1_family) == *fixed.fixed);
  CHECK_THROWS_AS(select(BandwidthRule{}, normal_triples(10, 1), BandwidthTarget::t1_family),
                  ConfigError);
  CHECK(bandwidth_kind_from_string("cv") == BandwidthKind::cv);
  CHECK_THROWS_AS(bandwidth_kind_from_string("silverman"), ConfigError);
}

TEST_CASE("cross-validation picks a grid candidate") {
  SimConfig c;
  c.n_obs = 400;
  c.seed = 12;
  const Path p = simulate(ModelSpec{}, c);
  const TripleSample s = TripleSample::from_path(p.values, p.delta);
  BandwidthRule cv;
  cv.kind = BandwidthKind::cv;
  const Bandwidths chosen = select(cv, s, BandwidthTarget::t1_family);
  const Bandwidths base = select(BandwidthRule{}, s, BandwidthTarget::t1_family);
  bool on_grid = false;
  double best = std::numeric_limits<double>::infinity();
  for (double m : cv.cv_grid) {
    const Bandwidths cand = base.scaled(m);
    if (std::abs(cand.h1 - chosen.h1) < 1e-14 * cand.h1) on_grid = true;
    best = std::min(best, cv_score(s, cand));
  }
  CHECK(on_grid);
  CHECK(cv_score(s, chosen) == doctest::Approx(best).epsilon(1e-10));
}
