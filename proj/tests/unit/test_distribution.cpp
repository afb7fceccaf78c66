#include <doctest.h>

#include <cmath>
#include <random>

#include "mbrl/distribution.hpp"

using namespace mbrl;

TEST_CASE("point and uniform distributions are valid") {
  CHECK(Distribution::point("a").check().empty());
  const auto u = Distribution::uniform({"a", "b", "c", "d"});
  CHECK(u.check().empty());
  CHECK(u.prob("c") == doctest::Approx(0.25));
  CHECK(u.prob("zz") == 0.0);
}

TEST_CASE("check reports malformed distributions") {
  CHECK_FALSE(Distribution{{"a", "b"}, {0.5, 0.6}}.check().empty());
  CHECK_FALSE(Distribution{{"a", "b"}, {1.5, -0.5}}.check().empty());
  CHECK_FALSE(Distribution{{"a", "a"}, {0.5, 0.5}}.check().empty());
  CHECK_FALSE(Distribution{{"a"}, {0.5, 0.5}}.check().empty());
  CHECK_FALSE(Distribution{}.check().empty());
  CHECK_FALSE(Distribution{{"a"}, {NAN}}.check().empty());
  // Within tolerance.
  CHECK(Distribution{{"a", "b"}, {0.5, 0.5 + 1e-12}}.check().empty());
}

TEST_CASE("select follows cumulative order and never picks zero-mass atoms") {
  const Distribution d{{"a", "b", "c"}, {0.25, 0.0, 0.75}};
  CHECK(d.select(0.0) == 0);
  CHECK(d.select(0.2499) == 0);
  CHECK(d.select(0.25) == 2);
  CHECK(d.select(0.9999999999) == 2);
  const Distribution short_sum{{"a", "b", "c"}, {0.5, 0.5 - 1e-15, 0.0}};
  CHECK(short_sum.select(0.99999999999999999) == 1);
}

TEST_CASE("select frequencies match probabilities") {
  const Distribution d{{"a", "b", "c"}, {0.2, 0.3, 0.5}};
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> counts(3, 0.0);
  const int n = 200000;
  for (int i = 0; i < n; ++i) counts[d.select(u(rng))] += 1.0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double p = d.probs[k];
    CHECK(std::abs(counts[k] / n - p) < 4.0 * std::sqrt(p * (1 - p) / n));
  }
}

TEST_CASE("total variation, entropy and align") {
  CHECK(total_variation({1, 0}, {0, 1}) == doctest::Approx(1.0));
  CHECK(total_variation({0.5, 0.5}, {0.5, 0.5}) == 0.0);
  CHECK(entropy({0.5, 0.5}) == doctest::Approx(std::log(2.0)));
  CHECK(entropy({1.0, 0.0}) == 0.0);
  std::vector<double> pv, qv;
  std::vector<StateId> atoms;
  align(Distribution{{"x", "y"}, {0.5, 0.5}}, Distribution{{"z", "x"}, {0.4, 0.6}}, pv, qv, &atoms);
  CHECK(atoms == std::vector<StateId>{"x", "y", "z"});
  CHECK(pv == std::vector<double>{0.5, 0.5, 0.0});
  CHECK(qv == std::vector<double>{0.6, 0.0, 0.4});
}
