#include <doctest.h>

#include <cmath>
#include <map>

#include <omp.h>

#include "mfa/errors.hpp"
#include "mfa/measures.hpp"
#include "mfa/rng.hpp"
#include "oracles.hpp"

using namespace mfa;

namespace {

const System& cantor() {
  static const System s = builtin_system("affine_cantor");
  return s;
}

PotentialFamily probabilities(const System& s, std::vector<double> p) {
  return normalize(s, PotentialFamily::from_probabilities(s, p, 1.0));
}

const PotentialFamily& binomial() {
  static const PotentialFamily f = probabilities(cantor(), {0.3, 0.7});
  return f;
}

}  // namespace

TEST_CASE("binomial cylinder weights") {
  const MeasureModel one = cylinder_weights(cantor(), binomial(), 1);
  REQUIRE(one.cells.size() == 2);
  CHECK(one.cells[0].weight_low == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(one.cells[1].weight_low == doctest::Approx(0.7).epsilon(1e-12));

  const MeasureModel three = cylinder_weights(cantor(), binomial(), 3);
  CHECK(three.cells.front().word == Word{0, 0, 0});
  CHECK(three.cells.front().weight_low == doctest::Approx(0.027).epsilon(1e-12));
  CHECK(three.total_low == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("weights multiply along concatenation for similarity systems") {
  const MeasureModel two = cylinder_weights(cantor(), binomial(), 2);
  const MeasureModel four = cylinder_weights(cantor(), binomial(), 4);
  std::map<Word, double> w2;
  for (const auto& c : two.cells) w2[c.word] = c.weight_low;
  for (const auto& c : four.cells) {
    const Word a(c.word.begin(), c.word.begin() + 2), b(c.word.begin() + 2, c.word.end());
    CHECK(c.weight_low == doctest::Approx(w2[a] * w2[b]).epsilon(1e-12));
  }
}

TEST_CASE("bracket totals straddle one within the distortion defect") {
  const System s = builtin_system("cf_full", {.truncation = 2});
  const double hd = hausdorff_dimension(s, {.bracket = false}).dimension;
  const PotentialFamily f = PotentialFamily::geometric(s, hd);
  const double K = s.distortion_or_throw();
  for (std::size_t n : {4, 8}) {
    const MeasureModel m = cylinder_weights(s, f, n);
    CHECK(m.total_low <= 1.0 + 1e-12);
    CHECK(m.total_high >= 1.0 - 1e-12);
    CHECK(m.defect <= std::pow(K, hd) - 1.0);
    for (const auto& c : m.cells) CHECK(c.weight_low <= c.weight_high);
  }
}

TEST_CASE("ball measures") {
  const MeasureModel m = cylinder_weights(cantor(), binomial(), 8);
  const BallMeasure whole = ball_measure(m, 0.5, 1.0);
  CHECK(whole.low == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(whole.high == doctest::Approx(1.0).epsilon(1e-12));
  const BallMeasure corner = ball_measure(m, 0.0, 1.0 / 27.0);
  CHECK(corner.low == doctest::Approx(0.027).epsilon(1e-10));
  CHECK(corner.high == doctest::Approx(0.027).epsilon(1e-10));
  const BallMeasure gap = ball_measure(m, 0.5, 0.1);
  CHECK(gap.low == 0.0);
  CHECK(gap.high == 0.0);
}

TEST_CASE("local dimensions of self-similar measures") {
  const MeasureModel m = cylinder_weights(cantor(), binomial(), 14);
  const auto radii = default_radii(cantor(), m);
  CHECK(radii.size() >= 6);
  CHECK(local_dimension(m, 0.0, radii).slope == doctest::Approx(std::log(0.3) / std::log(1.0 / 3.0)).epsilon(0.05));
  CHECK(local_dimension(m, 1.0, radii).slope == doctest::Approx(std::log(0.7) / std::log(1.0 / 3.0)).epsilon(0.05));

  const PotentialFamily sym = probabilities(cantor(), {0.5, 0.5});
  const MeasureModel ms = cylinder_weights(cantor(), sym, 14);
  const MuQSample pts = sample_mu_q(cantor(), sym, 1.0, SamplingOptions{.count = 20});
  for (double x : pts.points)
    CHECK(local_dimension(ms, x, default_radii(cantor(), ms)).slope ==
          doctest::Approx(oracle::kCantorDim).epsilon(0.05));

  const System interval = builtin_system("affine_cantor", {.ratios = {0.5, 0.5}});
  const PotentialFamily leb = probabilities(interval, {0.5, 0.5});
  const MeasureModel ml = cylinder_weights(interval, leb, 14);
  CHECK(local_dimension(ml, 0.3, default_radii(interval, ml)).slope == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("local dimension input checks") {
  const MeasureModel m = cylinder_weights(cantor(), binomial(), 10);
  const std::vector<double> few{0.1, 0.05, 0.02};
  CHECK_THROWS_AS(local_dimension(m, 0.0, few), Error);
  const std::vector<double> radii{0.12, 0.1, 0.08, 0.06, 0.04, 0.02};
  CHECK_THROWS_AS(local_dimension(m, 0.5, radii), DomainError);
}

TEST_CASE("sampler edge frequencies") {
  const MuQSample s = sample_mu_q(cantor(), binomial(), 1.0, SamplingOptions{.count = 10000});
  REQUIRE(s.points.size() == 10000);
  CHECK(s.edge_frequencies[0] == doctest::Approx(0.3).epsilon(0.02 / 0.3));
  CHECK(s.edge_frequencies[1] == doctest::Approx(0.7).epsilon(0.02 / 0.7));
  const MuQSample z = sample_mu_q(cantor(), binomial(), 0.0, SamplingOptions{.count = 10000});
  CHECK(std::abs(z.edge_frequencies[0] - 0.5) <= 0.02);
  for (double x : s.points) CHECK(cantor().vertices()[0].interval.contains(x));
}

TEST_CASE("sampling is deterministic in the seed and thread count") {
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const MuQSample a = sample_mu_q(cantor(), binomial(), 2.0, SamplingOptions{.count = 300});
  omp_set_num_threads(4);
  const MuQSample b = sample_mu_q(cantor(), binomial(), 2.0, SamplingOptions{.count = 300});
  omp_set_num_threads(saved);
  CHECK(a.points == b.points);
  const MuQSample c = sample_mu_q(cantor(), binomial(), 2.0, SamplingOptions{.count = 300, .seed = 7});
  CHECK(a.points != c.points);
}

TEST_CASE("sampler needs primitivity") {
  std::vector<EdgeMap> e{{0, 0, 1, AffineMap{0.25, 0.0}}, {1, 1, 0, AffineMap{0.25, 2.0}}};
  const System periodic({{0, {0.0, 1.0}}, {1, {2.0, 3.0}}}, e, Incidence::from_rows({{0, 1}, {1, 0}}));
  const PotentialFamily g = PotentialFamily::geometric(periodic, 1.0);
  CHECK_THROWS_AS(sample_mu_q(periodic, g, 0.0, 0.0), UnsupportedStructureError);
}

TEST_CASE("concentration on a degenerate spectrum") {
  const PotentialFamily sym = probabilities(cantor(), {0.5, 0.5});
  for (double q : {0.0, 2.0}) {
    const ConcentrationResult r = concentration_test(cantor(), sym, q, 0.1);
    CHECK(r.alpha == doctest::Approx(oracle::kCantorDim).epsilon(1e-8));
    CHECK(r.fraction >= 0.95);
  }
}

TEST_CASE("counter rng") {
  const CounterRng a(42), b(42), c(43);
  CHECK(a.bits(3, 9) == b.bits(3, 9));
  CHECK(a.bits(3, 9) != c.bits(3, 9));
  CHECK(a.bits(3, 9) != a.bits(3, 10));
  double mean = 0.0;
  for (std::uint64_t i = 0; i < 100000; ++i) {
    const double u = a.uniform(0, i);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    mean += u;
  }
  CHECK(mean / 100000 == doctest::Approx(0.5).epsilon(0.01));
}
