#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mbrl/evaluation.hpp"
#include "mbrl/mdp.hpp"
#include "mbrl/policy.hpp"

namespace mbrl {

/// One (s, a, r, s') tuple of a discounted dataset.
struct Transition {
  StateId state;
  ActionIndex action = 0;
  double reward = 0.0;
  StateId next_state;

  friend bool operator==(const Transition&, const Transition&) = default;
};

/// s_1, a_1, r_1, ..., s_H, a_H, r_H. states[h] lives on layer h.
struct Trajectory {
  std::vector<StateId> states;
  std::vector<ActionIndex> actions;
  std::vector<double> rewards;

  std::size_t length() const { return actions.size(); }
  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

enum class DatasetKind { kTuples, kTrajectories };

struct DatasetSource {
  std::string mdp;
  std::string policy;
  std::string data_distribution;

  friend bool operator==(const DatasetSource&, const DatasetSource&) = default;
};

struct Dataset {
  DatasetKind kind = DatasetKind::kTuples;
  std::uint64_t seed = 0;
  DatasetSource source;
  std::vector<std::string> actions;
  std::vector<Transition> tuples;
  std::vector<Trajectory> trajectories;

  std::size_t count() const {
    return kind == DatasetKind::kTuples ? tuples.size() : trajectories.size();
  }
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// n i.i.d. tuples with (s,a) ~ data_dist, r = R(s,a), s' ~ P(.|s,a). Tuple i
/// uses the stream keyed by (seed, i). Rejects episodic MDPs.
Dataset sample_tuples(const Mdp& m, const Occupancy& data_dist, std::size_t n,
                      std::uint64_t seed);

/// Trajectory `index` of a sample_trajectories batch with the same seed.
Trajectory sample_trajectory(const Mdp& m, const Policy& behavior, std::uint64_t seed,
                             std::size_t index);

/// n i.i.d. length-H trajectories from the behavior policy. Rejects
/// discounted MDPs.
Dataset sample_trajectories(const Mdp& m, const Policy& behavior, std::size_t n,
                            std::uint64_t seed);

/// Normalized visitation frequencies: per decision layer for trajectories,
/// one layer for tuples. Throws InputError on an empty dataset.
Occupancy empirical_occupancy(const Dataset& d);

/// Human-readable problems: rewards that differ from R(s,a) or next states
/// outside the support of P(.|s,a). Empty when the dataset is consistent.
std::vector<std::string> check_consistency(const Dataset& d, const Mdp& m);

}  // namespace mbrl
