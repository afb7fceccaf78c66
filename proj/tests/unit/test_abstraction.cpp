#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <set>

#include "mbrl/abstraction.hpp"
#include "mbrl/counterexamples.hpp"
#include "mbrl/error.hpp"
#include "oracles.hpp"

using namespace mbrl;

namespace {

oracle::EncoderMaps to_maps(const Encoder& phi) {
  oracle::EncoderMaps out;
  for (std::size_t h = 0; h < phi.num_layers(); ++h) {
    out.emplace_back(phi.layer(h).begin(), phi.layer(h).end());
  }
  return out;
}

// Restricted growth strings of length n with labels < k.
std::vector<std::vector<int>> partitions(std::size_t n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int)> go = [&](int used) {
    if (cur.size() == n) {
      out.push_back(cur);
      return;
    }
    for (int c = 0; c <= used && c < k; ++c) {
      cur.push_back(c);
      go(std::max(used, c + 1));
      cur.pop_back();
    }
  };
  go(0);
  return out;
}

// Reward-preserving partitions per decision layer (the terminal layer has a
// single partition), by brute force on the dense model.
std::size_t count_reward_preserving(const oracle::Raw& m, int k) {
  std::size_t total = 1;
  for (std::size_t h = 0; h < m.horizon; ++h) {
    std::size_t ok = 0;
    for (const auto& p : partitions(m.states[h].size(), k)) {
      bool good = true;
      for (std::size_t i = 0; i < p.size() && good; ++i) {
        for (std::size_t j = i + 1; j < p.size() && good; ++j) {
          if (p[i] == p[j] && m.R[h][i] != m.R[h][j]) good = false;
        }
      }
      ok += good;
    }
    total *= ok;
  }
  return total * partitions(m.states[m.horizon].size(), k).size();
}

// Pushforward of P[h][i][a] through a layer map.
std::map<std::string, double> push(const oracle::Raw& m, const oracle::EncoderMaps& phi,
                                   std::size_t h, std::size_t i, std::size_t a) {
  std::map<std::string, double> out;
  const auto& p = m.P[h][i][a];
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] > 0) out[phi[h + 1].at(m.states[h + 1][j])] += p[j];
  }
  return out;
}

bool kernel_homogeneous(const oracle::Raw& m, const oracle::EncoderMaps& phi) {
  for (std::size_t h = 0; h < m.horizon; ++h) {
    for (std::size_t i = 0; i < m.states[h].size(); ++i) {
      for (std::size_t j = i + 1; j < m.states[h].size(); ++j) {
        if (phi[h].at(m.states[h][i]) != phi[h].at(m.states[h][j])) continue;
        for (std::size_t a = 0; a < m.num_actions; ++a) {
          auto p = push(m, phi, h, i, a), q = push(m, phi, h, j, a);
          std::set<std::string> keys;
          for (auto& [k, v] : p) keys.insert(k);
          for (auto& [k, v] : q) keys.insert(k);
          for (const auto& k : keys) {
            if (std::abs(p[k] - q[k]) > 1e-12) return false;
          }
        }
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("bisimulation check on the degenerate instance") {
  const auto inst = build_bisim_degenerate();
  const auto ok = bisimulation_check(inst.truth, inst.phi_bisim);
  CHECK(ok.is_bisimulation);
  REQUIRE(ok.induced);
  CHECK_FALSE(ok.witness);
  const auto bad = bisimulation_check(inst.truth, inst.phi_degenerate);
  CHECK_FALSE(bad.is_bisimulation);
  REQUIRE(bad.witness);
  CHECK(bad.witness->layer == 1);
  CHECK(bad.witness->first == "p1");
  CHECK(bad.witness->second == "p2");
  CHECK(bad.witness->reason == "kernel");
  CHECK(bad.witness->action == inst.truth.action_index("L"));
  for (const auto& c : inst.certificates) CHECK_MESSAGE(c.passed, c.name);
}

TEST_CASE("degenerate instance values match exhaustive enumeration") {
  const auto inst = build_bisim_degenerate();
  const auto raw = oracle::from_mdp(inst.truth);
  const auto u = oracle::uniform_policy(raw);
  const std::size_t left = inst.truth.action_index("L");
  const double loss_bisim = oracle::latent_loss_by_enumeration(raw, to_maps(inst.phi_bisim), u);
  const double loss_deg = oracle::latent_loss_by_enumeration(raw, to_maps(inst.phi_degenerate), u);
  CHECK(std::abs(loss_bisim - 0.671656563671) < 1e-9);
  CHECK(std::abs(loss_deg - 0.562335144619) < 1e-9);
  const double ret_bisim =
      oracle::latent_return_by_enumeration(raw, to_maps(inst.phi_bisim), u, left);
  const double ret_deg =
      oracle::latent_return_by_enumeration(raw, to_maps(inst.phi_degenerate), u, left);
  CHECK(std::abs(ret_bisim - 0.95) < 1e-12);
  CHECK(std::abs(ret_deg - 0.75) < 1e-12);

  for (const auto* phi : {&inst.phi_bisim, &inst.phi_degenerate}) {
    const auto lm = optimal_latent_dynamics(*phi, inst.truth, inst.data_dist);
    const double lib = expected_latent_mle_loss(lm, inst.truth, inst.data_dist).loss;
    CHECK(std::abs(lib - oracle::latent_loss_by_enumeration(raw, to_maps(*phi), u)) < 1e-12);
  }
}

TEST_CASE("search ranks the degenerate encoder above every bisimulation") {
  const auto inst = build_bisim_degenerate();
  const auto cands = search_encoders(inst.truth, inst.data_dist, 5);
  REQUIRE_FALSE(cands.empty());
  CHECK(cands.front().encoder == inst.phi_degenerate.canonical());
  CHECK(cands.front().id == "0|0.0|0.1|0");
  CHECK_FALSE(cands.front().is_bisimulation);
  for (const auto& c : cands) {
    if (c.is_bisimulation) CHECK(cands.front().loss < c.loss);
  }
  for (std::size_t i = 1; i < cands.size(); ++i) CHECK(cands[i - 1].loss <= cands[i].loss);
}

TEST_CASE("search enumerates exactly the reward-preserving encoders") {
  std::mt19937_64 rng(41);
  for (int k = 0; k < 30; ++k) {
    const auto raw = oracle::random_raw(rng, true, 3, 2, 1 + k % 3, 0.0);
    const Mdp m = oracle::to_mdp(raw);
    for (std::size_t cap : {1u, 2u, 5u}) {
      const auto cands = search_encoders(m, Occupancy::uniform(m), cap);
      CHECK(cands.size() == count_reward_preserving(raw, static_cast<int>(cap)));
      std::set<std::string> ids;
      for (const auto& c : cands) ids.insert(c.id);
      CHECK(ids.size() == cands.size());
    }
  }
}

TEST_CASE("excess risk is nonnegative and vanishes exactly on homogeneous cells") {
  std::mt19937_64 rng(42);
  std::size_t homogeneous = 0, mixed = 0;
  for (int k = 0; k < 100; ++k) {
    const auto raw = oracle::random_raw(rng, true, 3, 2, 1 + k % 3, 0.0);
    const Mdp m = oracle::to_mdp(raw);
    const Occupancy dd = Occupancy::uniform(m);
    for (const auto& c : search_encoders(m, dd, 5)) {
      const auto lm = optimal_latent_dynamics(c.encoder, m, dd);
      const auto r = expected_latent_mle_loss(lm, m, dd);
      REQUIRE(r.decomposition);
      CHECK(r.decomposition->excess >= -1e-12);
      CHECK(std::abs(r.decomposition->excess - c.excess) < 1e-12);
      if (kernel_homogeneous(raw, to_maps(c.encoder))) {
        ++homogeneous;
        CHECK(std::abs(r.decomposition->excess) < 1e-9);
        CHECK(bisimulation_check(m, c.encoder).is_bisimulation == c.is_bisimulation);
      } else {
        ++mixed;
        CHECK(r.decomposition->excess > 0.0);
      }
    }
  }
  CHECK(homogeneous > 0);
  CHECK(mixed > 0);
}

TEST_CASE("latent losses match enumeration under the data policy") {
  std::mt19937_64 rng(43);
  for (int k = 0; k < 20; ++k) {
    const auto raw = oracle::random_raw(rng, true, 3, 2, 1 + k % 3, 0.0);
    const Mdp m = oracle::to_mdp(raw);
    const auto pi = oracle::random_policy(raw, rng, false);
    const Occupancy dd = occupancy(m, oracle::to_policy(raw, pi));
    for (const auto& c : search_encoders(m, dd, 2)) {
      const auto lm = optimal_latent_dynamics(c.encoder, m, dd);
      const double expect = oracle::latent_loss_by_enumeration(raw, to_maps(c.encoder), pi);
      CHECK(std::abs(expected_latent_mle_loss(lm, m, dd).loss - expect) < 1e-10);
    }
  }
}

TEST_CASE("empirical latent MLE converges to the exact latent loss") {
  const auto inst = build_bisim_degenerate();
  const Dataset d = sample_trajectories(inst.truth, Policy::uniform(), 50000, 9);
  for (const auto* phi : {&inst.phi_bisim, &inst.phi_degenerate}) {
    const auto lm = optimal_latent_dynamics(*phi, inst.truth, inst.data_dist);
    const auto exact = expected_latent_mle_loss(lm, inst.truth, inst.data_dist);
    const auto emp = latent_mle_loss(lm, d);
    CHECK(std::abs(emp.loss - exact.loss) <= 4.0 * emp.standard_error);
  }
}

TEST_CASE("encoders: canonical form, totality and lifting") {
  const auto inst = build_bisim_degenerate();
  const Encoder constant = Encoder::constant(inst.truth);
  CHECK(constant.canonical() == constant.canonical().canonical());
  CHECK(encoder_id(inst.phi_degenerate) == "0|0.0|0.1|0");
  CHECK_NOTHROW(require_total(constant, inst.truth));
  CHECK_THROWS_AS(require_total(Encoder(std::vector<Encoder::LayerMap>{Encoder::LayerMap{{"root", "x"}}}), inst.truth), InputError);
  CHECK_THROWS_AS(constant.encode(0, "nowhere"), InputError);
  const auto lm = optimal_latent_dynamics(constant, inst.truth, inst.data_dist);
  const Mdp latent = latent_mdp(lm, inst.truth);
  CHECK(latent.horizon() == inst.truth.horizon());
}
