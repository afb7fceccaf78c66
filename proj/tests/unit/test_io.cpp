#include <doctest.h>

#include <random>
#include <sstream>

#include "mbrl/abstraction.hpp"
#include "mbrl/counterexamples.hpp"
#include "mbrl/error.hpp"
#include "mbrl/io.hpp"
#include "oracles.hpp"

using namespace mbrl;

namespace {

void check_same_mdp(const Mdp& a, const Mdp& b) {
  REQUIRE(a.num_layers() == b.num_layers());
  CHECK(a.kind() == b.kind());
  CHECK(a.gamma() == b.gamma());
  CHECK(a.initial() == b.initial());
  CHECK(a.actions() == b.actions());
  for (std::size_t h = 0; h < a.num_layers(); ++h) {
    REQUIRE(a.states(h) == b.states(h));
    if (a.terminal(h)) continue;
    for (const auto& s : a.states(h)) {
      for (ActionIndex k = 0; k < a.num_actions(); ++k) {
        CHECK(a.next(h, s, k) == b.next(h, s, k));
        CHECK(a.reward(h, s, k) == b.reward(h, s, k));
      }
    }
  }
}

}  // namespace

TEST_CASE("MDP JSON round trip") {
  std::mt19937_64 rng(61);
  for (int k = 0; k < 20; ++k) {
    const auto raw = oracle::random_raw(rng, k % 2 == 0, 4, 3, 3, 0.7);
    const Mdp m = oracle::to_mdp(raw);
    const Json j = mdp_to_json(m);
    const Mdp back = mdp_from_json(Json::parse(j.dump()));
    check_same_mdp(m, back);
    CHECK(mdp_to_json(back).dump() == j.dump());
  }
  check_same_mdp(mdp_from_json(mdp_to_json(build_prop2(4).wrong)), build_prop2(4).wrong);
}

TEST_CASE("builtin references and MDP errors") {
  const Mdp m = mdp_from_json(Json{{"builtin", "prop2"}, {"role", "wrong"}, {"horizon", 5}});
  CHECK(m.horizon() == 5);
  CHECK_THROWS_AS(mdp_from_json(Json{{"builtin", "nope"}}), InputError);
  Json j = mdp_to_json(build_prop1().truth);
  j["transitions"]["A|Q"] = Json::object();
  CHECK_THROWS_AS(mdp_from_json(j), InputError);
  CHECK_THROWS_AS(mdp_from_json(Json::array()), InputError);
}

TEST_CASE("policy, encoder and embedding round trips") {
  const auto inst = build_bisim_degenerate();
  const auto& actions = inst.truth.actions();
  std::vector<Policy> policies{Policy::uniform(), Policy::constant(1), inst.pi_target};
  for (const auto& pi : policies) {
    const Policy back = policy_from_json(Json::parse(policy_to_json(pi, actions).dump()), actions);
    for (std::size_t h = 0; h < inst.truth.horizon(); ++h) {
      for (const auto& s : inst.truth.states(h)) {
        CHECK(back.probs(h, s, 2) == pi.probs(h, s, 2));
      }
    }
    CHECK(policy_to_json(back, actions).dump() == policy_to_json(pi, actions).dump());
  }
  CHECK_THROWS_AS(policy_from_json(Json{{"kind", "constant"}, {"action", "Z"}}, actions), InputError);
  CHECK(encoder_from_json(encoder_to_json(inst.phi_degenerate)) == inst.phi_degenerate);
  const Embedding emb({{"a", {1.0, 2.0}}, {"b", {0.5, -1.0}}});
  CHECK(embedding_from_json(embedding_to_json(emb)).points() == emb.points());
}

TEST_CASE("loss reports serialize infinities as null") {
  LossReport r;
  r.name = "mle";
  r.loss = INFINITY;
  r.infinite = true;
  const Json j = loss_report_to_json(r);
  CHECK(j["loss"].is_null());
  CHECK(j["loss_infinite"] == true);
  CHECK(number(1.5) == 1.5);
  CHECK(number(NAN).is_null());
}

TEST_CASE("dataset round trip and line-numbered errors") {
  const auto inst = build_prop1();
  const Dataset traj = sample_trajectories(inst.truth, inst.pi_d, 50, 3);
  std::mt19937_64 rng(62);
  const Mdp disc = oracle::to_mdp(oracle::random_raw(rng, false, 4, 2, 0, 0.9));
  const Dataset tup = sample_tuples(disc, occupancy(disc, Policy::uniform()), 50, 3);
  for (const Dataset* d : {&traj, &tup}) {
    std::stringstream ss;
    write_dataset(ss, *d);
    const std::string text = ss.str();
    std::stringstream in(text);
    const Dataset back = read_dataset(in);
    CHECK(back == *d);
    std::stringstream again;
    write_dataset(again, back);
    CHECK(again.str() == text);
  }
  std::stringstream ss;
  write_dataset(ss, tup);
  std::string text = ss.str();
  // Corrupt the third line (second record).
  std::size_t pos = 0;
  for (int i = 0; i < 2; ++i) pos = text.find('\n', pos) + 1;
  text.insert(pos, "{not json\n");
  std::stringstream bad(text);
  try {
    read_dataset(bad);
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}
