#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "mbrl/counterexamples.hpp"
#include "mbrl/error.hpp"
#include "mbrl/rng.hpp"
#include "mbrl/sampling.hpp"
#include "oracles.hpp"

using namespace mbrl;

TEST_CASE("rng streams are keyed, not sequential") {
  RngStream a(5, 3, 1), b(5, 3, 1), c(5, 3, 2), d(6, 3, 1);
  const auto x = a.next_u64();
  CHECK(x == b.next_u64());
  CHECK(x != c.next_u64());
  CHECK(x != d.next_u64());
  RngStream u(1, 2);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("datasets are reproducible and independent of thread count") {
  const auto inst = build_prop1();
  const Dataset d1 = sample_trajectories(inst.truth, inst.pi_d, 5000, 42);
  const Dataset d2 = sample_trajectories(inst.truth, inst.pi_d, 5000, 42);
  CHECK(d1 == d2);
  ::setenv("MBRL_LAB_THREADS", "1", 1);
  const Dataset serial = sample_trajectories(inst.truth, inst.pi_d, 5000, 42);
  ::unsetenv("MBRL_LAB_THREADS");
  CHECK(serial == d1);
  CHECK(sample_trajectory(inst.truth, inst.pi_d, 42, 1234) == d1.trajectories[1234]);
  const Dataset other = sample_trajectories(inst.truth, inst.pi_d, 5000, 43);
  CHECK_FALSE(other == d1);
  // A prefix of a larger batch is the smaller batch.
  const Dataset big = sample_trajectories(inst.truth, inst.pi_d, 6000, 42);
  CHECK(std::equal(d1.trajectories.begin(), d1.trajectories.end(), big.trajectories.begin()));
}

TEST_CASE("sampled data is consistent with the generating MDP") {
  const auto inst = build_prop1();
  Dataset d = sample_trajectories(inst.truth, inst.pi_d, 500, 1);
  CHECK(check_consistency(d, inst.truth).empty());
  CHECK_FALSE(check_consistency(d, inst.wrong).empty());
  d.trajectories[3].rewards[1] += 0.25;
  CHECK(check_consistency(d, inst.truth).size() == 1);
}

TEST_CASE("empirical occupancy converges to the exact occupancy") {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 10; ++k) {
    const bool episodic = k % 2 == 0;
    const auto raw = oracle::random_raw(rng, episodic, 4, 2, 3, 0.8);
    const auto pi_m = oracle::random_policy(raw, rng, false);
    const Mdp m = oracle::to_mdp(raw);
    const Policy pi = oracle::to_policy(raw, pi_m);
    const std::size_t n = 40000;
    const Occupancy exact = occupancy(m, pi);
    const Dataset d = episodic ? sample_trajectories(m, pi, n, 9) : sample_tuples(m, exact, n, 9);
    const Occupancy emp = empirical_occupancy(d);
    CHECK(check_consistency(d, m).empty());
    for (std::size_t h = 0; h < exact.num_layers(); ++h) {
      for (const auto& [s, w] : exact.layer(h)) {
        for (std::size_t a = 0; a < w.size(); ++a) {
          const double p = w[a];
          const double se = std::sqrt(p * (1 - p) / static_cast<double>(n));
          CHECK(std::abs(emp.at(h, s, a) - p) <= 5.0 * se + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("sampler kinds are checked") {
  const auto inst = build_prop1();
  CHECK_THROWS_AS(sample_tuples(inst.truth, Occupancy::uniform(inst.truth), 3, 0), InputError);
  std::mt19937_64 rng(1);
  const Mdp disc = oracle::to_mdp(oracle::random_raw(rng, false, 3, 2, 0, 0.5));
  CHECK_THROWS_AS(sample_trajectories(disc, Policy::uniform(), 3, 0), InputError);
  Dataset empty;
  empty.actions = {"L", "R"};
  CHECK_THROWS_AS(empirical_occupancy(empty), InputError);
}
