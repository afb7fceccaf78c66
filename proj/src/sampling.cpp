#include "mbrl/sampling.hpp"

#include "mbrl/error.hpp"
#include "mbrl/parallel.hpp"
#include "mbrl/rng.hpp"

namespace mbrl {

Dataset sample_tuples(const Mdp& m, const Occupancy& data_dist, std::size_t n,
                      std::uint64_t seed) {
  if (m.episodic()) throw InputError("tuple sampling needs a discounted MDP");
  data_dist.check_normalized();
  if (data_dist.num_layers() != 1 || data_dist.num_actions() != m.num_actions()) {
    throw InputError("data distribution does not match the MDP's state-action space");
  }
  // Flatten (s, a) in map order, action order.
  std::vector<StateId> states;
  std::vector<ActionIndex> actions;
  std::vector<double> weights;
  for (const auto& [s, w] : data_dist.layer(0)) {
    for (ActionIndex a = 0; a < w.size(); ++a) {
      if (w[a] == 0.0) continue;
      states.push_back(s);
      actions.push_back(a);
      weights.push_back(w[a]);
    }
  }
  Distribution pairs{std::vector<StateId>(weights.size()), weights};

  Dataset out;
  out.kind = DatasetKind::kTuples;
  out.seed = seed;
  out.source = {m.name(), "", "occupancy"};
  out.actions = m.actions();
  out.tuples = parallel_map(n, [&](std::size_t i) {
    RngStream rng(seed, i);
    const std::size_t k = pairs.select(rng.uniform());
    const Distribution next = m.next(0, states[k], actions[k]);
    Transition t;
    t.state = states[k];
    t.action = actions[k];
    t.reward = m.reward(0, t.state, t.action);
    t.next_state = next.support[next.select(rng.uniform())];
    return t;
  });
  return out;
}

Trajectory sample_trajectory(const Mdp& m, const Policy& behavior, std::uint64_t seed,
                             std::size_t index) {
  if (!m.episodic()) throw InputError("trajectory sampling needs an episodic MDP");
  RngStream rng(seed, index);
  Trajectory t;
  StateId s = m.initial();
  for (std::size_t h = 0; h < m.horizon(); ++h) {
    const auto probs = behavior.probs(h, s, m.num_actions());
    const Distribution policy_dist{std::vector<StateId>(probs.size()), probs};
    const ActionIndex a = policy_dist.select(rng.uniform());
    const Distribution next = m.next(h, s, a);
    t.states.push_back(s);
    t.actions.push_back(a);
    t.rewards.push_back(m.reward(h, s, a));
    s = next.support[next.select(rng.uniform())];
  }
  return t;
}

Dataset sample_trajectories(const Mdp& m, const Policy& behavior, std::size_t n,
                            std::uint64_t seed) {
  if (!m.episodic()) throw InputError("trajectory sampling needs an episodic MDP");
  Dataset out;
  out.kind = DatasetKind::kTrajectories;
  out.seed = seed;
  out.source = {m.name(), behavior.describe(), "behavior-policy"};
  out.actions = m.actions();
  out.trajectories =
      parallel_map(n, [&](std::size_t i) { return sample_trajectory(m, behavior, seed, i); });
  return out;
}

Occupancy empirical_occupancy(const Dataset& d) {
  if (d.count() == 0) throw InputError("empirical occupancy of an empty dataset");
  const std::size_t na = d.actions.size();
  std::vector<Occupancy::LayerWeights> layers;
  auto bump = [na](Occupancy::LayerWeights& layer, const StateId& s, ActionIndex a, double w) {
    auto it = layer.find(s);
    if (it == layer.end()) it = layer.emplace(s, std::vector<double>(na, 0.0)).first;
    it->second.at(a) += w;
  };
  if (d.kind == DatasetKind::kTuples) {
    layers.resize(1);
    const double w = 1.0 / static_cast<double>(d.tuples.size());
    for (const auto& t : d.tuples) bump(layers[0], t.state, t.action, w);
    return Occupancy(HorizonKind::kDiscounted, na, std::move(layers), true);
  }
  const std::size_t horizon = d.trajectories.front().length();
  layers.resize(horizon);
  const double w = 1.0 / static_cast<double>(d.trajectories.size());
  for (const auto& t : d.trajectories) {
    if (t.length() != horizon) throw InputError("trajectories have different lengths");
    for (std::size_t h = 0; h < horizon; ++h) bump(layers[h], t.states[h], t.actions[h], w);
  }
  return Occupancy(HorizonKind::kEpisodic, na, std::move(layers), true);
}

std::vector<std::string> check_consistency(const Dataset& d, const Mdp& m) {
  std::vector<std::string> problems;
  auto check = [&](std::size_t layer, const StateId& s, ActionIndex a, double r,
                   const StateId* next, const std::string& where) {
    if (!m.contains(layer, s)) {
      problems.push_back(where + ": state '" + s + "' is not in the MDP");
      return;
    }
    if (a >= m.num_actions()) {
      problems.push_back(where + ": action index out of range");
      return;
    }
    if (m.reward(layer, s, a) != r) problems.push_back(where + ": reward differs from R(s,a)");
    if (next && m.next(layer, s, a).prob(*next) <= 0.0) {
      problems.push_back(where + ": next state '" + *next + "' has zero probability");
    }
  };
  if (d.kind == DatasetKind::kTuples) {
    for (std::size_t i = 0; i < d.tuples.size(); ++i) {
      const auto& t = d.tuples[i];
      check(0, t.state, t.action, t.reward, &t.next_state, "tuple " + std::to_string(i));
    }
    return problems;
  }
  for (std::size_t i = 0; i < d.trajectories.size(); ++i) {
    const auto& t = d.trajectories[i];
    for (std::size_t h = 0; h < t.length(); ++h) {
      const StateId* next = h + 1 < t.length() ? &t.states[h + 1] : nullptr;
      check(h, t.states[h], t.actions[h], t.rewards[h], next,
            "trajectory " + std::to_string(i) + " step " + std::to_string(h));
    }
  }
  return problems;
}

}  // namespace mbrl
