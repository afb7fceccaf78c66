#include <doctest.h>

#include <cmath>
#include <random>

#include "mbrl/error.hpp"
#include "mbrl/evaluation.hpp"
#include "oracles.hpp"

using namespace mbrl;

namespace {

double sum_dr(const oracle::Raw& raw, const Occupancy& d) {
  double j = 0.0;
  for (std::size_t h = 0; h < raw.decision(); ++h) {
    for (std::size_t i = 0; i < raw.states[h].size(); ++i) {
      for (std::size_t a = 0; a < raw.num_actions; ++a) {
        j += d.at(h, raw.states[h][i], a) * raw.R[h][i][a];
      }
    }
  }
  return raw.episodic ? j : j / (1.0 - raw.gamma);
}

}  // namespace

TEST_CASE("policy values match the dense oracle") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 100; ++k) {
    const bool episodic = k % 2 == 0;
    const double gamma = k % 4 == 1 ? 0.5 : 0.9;
    const auto raw = oracle::random_raw(rng, episodic, 6, 2 + k % 2, 1 + k % 4, gamma);
    const auto pi_m = oracle::random_policy(raw, rng, k % 3 == 0);
    const Mdp m = oracle::to_mdp(raw);
    const Policy pi = oracle::to_policy(raw, pi_m);
    const auto expect = oracle::values(raw, pi_m);
    const auto v = value_function(m, pi);
    CHECK(v.converged);
    for (std::size_t h = 0; h < expect.size(); ++h) {
      for (std::size_t i = 0; i < expect[h].size(); ++i) {
        CHECK(std::abs(v.at(h, raw.states[h][i]) - expect[h][i]) < 1e-8);
      }
    }
    CHECK(std::abs(expected_return(m, pi) - expect[0][raw.init]) < 1e-8);
  }
}

TEST_CASE("occupancy matches the dense oracle and is normalized") {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 100; ++k) {
    const bool episodic = k % 2 == 1;
    const auto raw = oracle::random_raw(rng, episodic, 5, 2, 1 + k % 4, k % 3 ? 0.9 : 0.5);
    const auto pi_m = oracle::random_policy(raw, rng, false);
    const Mdp m = oracle::to_mdp(raw);
    const Occupancy d = occupancy(m, oracle::to_policy(raw, pi_m));
    CHECK_NOTHROW(d.check_normalized());
    CHECK(d.truncation_error() < 1e-11);
    const auto expect = oracle::occupancy(raw, pi_m);
    for (std::size_t h = 0; h < expect.size(); ++h) {
      for (std::size_t i = 0; i < expect[h].size(); ++i) {
        for (std::size_t a = 0; a < 2; ++a) {
          CHECK(std::abs(d.at(h, raw.states[h][i], a) - expect[h][i][a]) < 1e-9);
        }
      }
    }
  }
}

TEST_CASE("expected return equals the occupancy-weighted reward sum") {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 100; ++k) {
    const auto raw = oracle::random_raw(rng, k % 2 == 0, 5, 2, 1 + k % 5, 0.7);
    const auto pi_m = oracle::random_policy(raw, rng, k % 2 == 1);
    const Mdp m = oracle::to_mdp(raw);
    const Policy pi = oracle::to_policy(raw, pi_m);
    CHECK(std::abs(expected_return(m, pi) - sum_dr(raw, occupancy(m, pi))) < 1e-8);
  }
}

TEST_CASE("plan_optimal matches exhaustive deterministic policy enumeration") {
  std::mt19937_64 rng(14);
  for (int k = 0; k < 100; ++k) {
    const bool episodic = k % 4 != 3;
    const auto raw = oracle::random_raw(rng, episodic, episodic ? 4 : 6, 2, 1 + k % 4, 0.9);
    const Mdp m = oracle::to_mdp(raw);
    const auto plan = plan_optimal(m);
    CHECK(plan.converged);
    const auto best = oracle::brute_force_optimal(raw);
    const auto achieved = oracle::values(raw, [&] {
      oracle::PolicyMatrix pi = oracle::uniform_policy(raw);
      for (std::size_t h = 0; h < raw.decision(); ++h) {
        for (std::size_t i = 0; i < raw.states[h].size(); ++i) {
          pi[h][i] = plan.policy.probs(h, raw.states[h][i], raw.num_actions);
        }
      }
      return pi;
    }());
    for (std::size_t h = 0; h < best.size(); ++h) {
      for (std::size_t i = 0; i < best[h].size(); ++i) {
        CHECK(std::abs(plan.values.at(h, raw.states[h][i]) - best[h][i]) < 1e-8);
        CHECK(std::abs(achieved[h][i] - best[h][i]) < 1e-8);
      }
    }
  }
}

TEST_CASE("planning ties go to the lowest action") {
  MdpTables t;
  t.kind = HorizonKind::kEpisodic;
  t.horizon = 1;
  t.actions = {"a", "b", "c"};
  t.initial = "s";
  t.layers.resize(2);
  t.layers[0] = {{"s"}, {{Distribution::point("t"), Distribution::point("t"), Distribution::point("t")}},
                 {{0.3, 0.7, 0.7}}};
  t.layers[1].states = {"t"};
  const auto plan = plan_optimal(Mdp::from_tables(t));
  CHECK(plan.policy.probs(0, "s", 3) == std::vector<double>{0, 1, 0});
}

TEST_CASE("slow discounted evaluation raises ConvergenceError") {
  MdpTables t;
  t.kind = HorizonKind::kDiscounted;
  t.gamma = 1.0 - 1e-8;
  t.actions = {"a"};
  t.initial = "s";
  t.layers.resize(1);
  t.layers[0] = {{"s"}, {{Distribution::point("s")}}, {{1.0}}};
  const Mdp m = Mdp::from_tables(t);
  CHECK_THROWS_AS(expected_return(m, Policy::uniform()), ConvergenceError);
  CHECK_FALSE(value_function(m, Policy::uniform()).converged);
}

TEST_CASE("undefined policy entries are input errors") {
  std::mt19937_64 rng(15);
  const auto raw = oracle::random_raw(rng, true, 3, 2, 2, 0.0);
  const Mdp m = oracle::to_mdp(raw);
  Policy::ActionTable empty(2);
  CHECK_THROWS_AS(expected_return(m, Policy::deterministic(empty)), InputError);
}
