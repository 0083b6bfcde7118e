#include <doctest.h>

#include <cmath>
#include <random>

#include "mfa/errors.hpp"
#include "mfa/gdms.hpp"
#include "oracles.hpp"

using namespace mfa;

namespace {

System cf(std::size_t n) { return builtin_system("cf_full", {.truncation = n}); }

System two_vertex(const std::vector<std::vector<int>>& rows = {}) {
  std::vector<VertexPiece> v{{0, {0.0, 1.0}}, {1, {2.0, 3.0}}};
  // 0 -> 0, 0 -> 1, 1 -> 0 (source, target)
  std::vector<EdgeMap> e{{0, 0, 0, AffineMap{0.25, 0.0}},
                         {1, 0, 1, AffineMap{0.25, 0.0}},
                         {2, 1, 0, AffineMap{0.5, 2.0}}};
  Incidence inc(3, false);
  if (rows.empty()) {
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b) {
        const int ta = e[a].target, sb = e[b].source;
        inc.set(a, b, ta == sb);
      }
  } else {
    inc = Incidence::from_rows(rows);
  }
  return System(v, e, inc, {.name = "two_vertex"});
}

}  // namespace

TEST_CASE("word maps on the continued-fraction system") {
  const System s = cf(2);
  const MapValue a = evaluate_word_map(s, {0, 0}, 0.0);
  CHECK(a.value == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(a.abs_derivative == doctest::Approx(0.25).epsilon(1e-15));
  const MapValue b = evaluate_word_map(s, {1}, 1.0);
  CHECK(b.value == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(b.abs_derivative == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
}

TEST_CASE("affine Cantor level-three derivative") {
  const System s = builtin_system("affine_cantor");
  const MapValue v = evaluate_word_map(s, {0, 1, 0}, 0.3);
  CHECK(v.abs_derivative == doctest::Approx(1.0 / 27.0).epsilon(1e-14));
}

TEST_CASE("chain rule agrees with the explicit orbit product") {
  const System s = cf(5);
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<std::size_t> digit(0, 4);
  std::uniform_real_distribution<double> xs(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t len = 1 + trial % 10;
    Word w(len);
    std::vector<int> digits(len);
    for (std::size_t i = 0; i < len; ++i) {
      w[i] = digit(gen);
      digits[i] = static_cast<int>(w[i]) + 1;
    }
    const double x = xs(gen);
    CHECK(evaluate_word_map(s, w, x).abs_derivative ==
          doctest::Approx(oracle::cf_derivative(digits, x)).epsilon(1e-12));
  }
}

TEST_CASE("cylinders nest and shrink at the eventual contraction rate") {
  for (const System& s : {cf(4), builtin_system("affine_cantor"), builtin_system("cf_no_one", {.truncation = 10})}) {
    CAPTURE(s.name());
    const double s_rate = s.contraction();
    const double c0 = s.contraction_prefactor();
    REQUIRE(s_rate < 1.0);
    for (std::size_t n = 1; n <= 5; ++n) {
      for_each_word(s, n, [&](const Word& w) {
        const Interval iv = cylinder_interval(s, w);
        CHECK(iv.length() <= c0 * std::pow(s_rate, static_cast<double>(n)) * s.diameter() * (1 + 1e-12));
        if (n > 1) {
          const Word parent(w.begin(), w.end() - 1);
          CHECK(cylinder_interval(s, parent).contains(iv, 1e-14));
        }
      });
    }
  }
}

TEST_CASE("bounded distortion on sampled long words") {
  for (const System& s : {cf(2), cf(10), builtin_system("cf_no_one", {.truncation = 20})}) {
    CAPTURE(s.name());
    const double K = s.distortion_or_throw();
    std::mt19937_64 gen(11);
    std::uniform_int_distribution<std::size_t> digit(0, s.num_edges() - 1);
    for (int trial = 0; trial < 100; ++trial) {
      Word w(1 + trial % 12);
      for (auto& e : w) e = digit(gen);
      const Interval dom = s.domain(w.back());
      double lo = INFINITY, hi = 0.0;
      for (int k = 0; k <= 100; ++k) {
        const double d = evaluate_word_map(s, w, dom.lo + dom.length() * k / 100.0).abs_derivative;
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
      CHECK(hi / lo <= K * (1 + 1e-12));
      const DerivativeRange r = word_derivative_range(s, w);
      CHECK(r.sup / r.inf <= K * (1 + 1e-12));
    }
  }
}

TEST_CASE("distortion constants") {
  CHECK(*builtin_system("affine_cantor").distortion() == 1.0);
  const DistortionEstimate d = estimate_distortion_constant(cf(2));
  CHECK(d.level_one_ratio == doctest::Approx(4.0));
  CHECK(*d.constant >= 4.0);
  std::vector<EdgeMap> e{{2, 0, 0, MoebiusMap{0, 1, 1, 2}}};
  const System single({{0, {0.0, 1.0}}}, e, Incidence(1));
  CHECK(estimate_distortion_constant(single).level_one_ratio == doctest::Approx(2.25));
}

TEST_CASE("word counts follow powers of the incidence matrix") {
  const System s = two_vertex();
  // A = [[1,1,0],[0,0,1],[1,1,0]]: counts are entry sums of A^{n-1}
  std::vector<std::uint64_t> expect{3};
  std::vector<std::vector<std::uint64_t>> A{{1, 1, 0}, {0, 0, 1}, {1, 1, 0}};
  std::vector<std::vector<std::uint64_t>> P{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int n = 2; n <= 10; ++n) {
    std::vector<std::vector<std::uint64_t>> Q(3, std::vector<std::uint64_t>(3, 0));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) Q[i][j] += P[i][k] * A[k][j];
    P = Q;
    std::uint64_t sum = 0;
    for (auto& row : P)
      for (auto x : row) sum += x;
    expect.push_back(sum);
  }
  for (std::size_t n = 1; n <= 10; ++n) {
    CHECK(count_words(s, n) == expect[n - 1]);
    CHECK(enumerate_words(s, n).size() == expect[n - 1]);
  }
  CHECK(count_words(cf(3), 4) == 81);
}

TEST_CASE("words are enumerated in lexicographic order") {
  const auto words = enumerate_words(cf(3), 3);
  for (std::size_t i = 1; i < words.size(); ++i) CHECK(words[i - 1] < words[i]);
}

TEST_CASE("admissibility and domain errors") {
  const System s = two_vertex();
  CHECK_THROWS_AS(check_admissible(s, {1, 1}), AdmissibilityError);
  CHECK_NOTHROW(check_admissible(s, {1, 2}));
  CHECK_THROWS_AS(evaluate_word_map(s, {1, 1}, 0.5), AdmissibilityError);
  CHECK_THROWS_AS(evaluate_word_map(cf(2), {0}, 1.5), DomainError);
  CHECK_THROWS_AS(check_admissible(cf(2), {5}), Error);
}

TEST_CASE("maps leaving their codomain are rejected") {
  std::vector<EdgeMap> e{{0, 0, 0, AffineMap{0.5, 0.75}}};
  CHECK_THROWS_AS(System({{0, {0.0, 1.0}}}, e, Incidence(1)), ParameterError);
  std::vector<EdgeMap> expanding{{0, 0, 0, AffineMap{1.5, 0.0}}};
  CHECK_THROWS_AS(System({{0, {0.0, 1.0}}}, expanding, Incidence(1)), ParameterError);
}

TEST_CASE("word budget") {
  CHECK_THROWS_AS(for_each_word(cf(10), 8, [](const Word&) {}, 1000), ResourceError);
}

TEST_CASE("builtins") {
  const System s = cf(2);
  CHECK(s.num_edges() == 2);
  CHECK(s.is_full_shift());
  CHECK(s.theta() == 0.5);
  CHECK(s.contraction() == doctest::Approx(0.5));
  CHECK(s.contraction_prefactor() == doctest::Approx(2.0));
  CHECK(builtin_system("affine_cantor").theta() == 0.0);
  CHECK_THROWS_AS(builtin_system("cf_no_one", {.truncation = 10, .eps = -0.5}), ParameterError);
  CHECK_THROWS_AS(builtin_system("nonesuch"), ParameterError);
}

TEST_CASE("open set condition") {
  for (const System& s : {cf(5), builtin_system("affine_cantor"), builtin_system("cf_no_one", {.truncation = 50}),
                          two_vertex()})
    CHECK(check_osc(s).ok);
  std::vector<EdgeMap> e{{0, 0, 0, AffineMap{0.6, 0.0}}, {1, 0, 0, AffineMap{0.6, 0.4}}};
  const System overlap({{0, {0.0, 1.0}}}, e, Incidence(2));
  const OscReport r = check_osc(overlap);
  CHECK_FALSE(r.ok);
  CHECK(r.worst_overlap == doctest::Approx(0.2));
}

TEST_CASE("boundary separation") {
  const BscReport no_one = check_bsc(builtin_system("cf_no_one", {.truncation = 50, .eps = -0.25}));
  CHECK(no_one.exact == "5/28");
  CHECK(*no_one.gap == doctest::Approx(5.0 / 28.0).epsilon(1e-15));
  CHECK(*check_bsc(cf(50)).gap == 0.0);
  // first-level images touch the boundary of [0, 1]
  CHECK(*check_bsc(builtin_system("affine_cantor")).gap == 0.0);
}

TEST_CASE("finite primitivity") {
  const PrimitivityVerdict full = check_finitely_primitive(cf(3), 16);
  CHECK(full.verdict == Verdict::yes);
  CHECK(full.p == 0);
  // A = [[1,1,0],[0,0,1],[1,1,0]] has A^3 > 0 but A^2 has zero entries
  const PrimitivityVerdict tv = check_finitely_primitive(two_vertex(), 16);
  CHECK(tv.verdict == Verdict::yes);
  CHECK(tv.p == 2);
  for (const Word& w : tv.witnesses) CHECK(w.size() == tv.p);
  const PrimitivityVerdict cyc = check_finitely_primitive(two_vertex({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}), 16);
  CHECK(cyc.verdict == Verdict::no);
}

TEST_CASE("norm comparability on the continued-fraction truncation") {
  // ||phi_1'|| / ||phi_2'|| = 1 / (1/4)
  CHECK(norm_comparability_constant(cf(10)) == doctest::Approx(4.0));
}
