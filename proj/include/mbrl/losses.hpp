#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mbrl/evaluation.hpp"
#include "mbrl/mdp.hpp"
#include "mbrl/policy.hpp"
#include "mbrl/sampling.hpp"

namespace mbrl {

struct LossDecomposition {
  double entropy = 0.0;
  double excess = 0.0;
};

/// Result of every loss evaluator. Exact evaluators report standard_error 0.
///
/// Episodic conventions: empirical losses sum over the steps of a trajectory
/// and average over trajectories; exact losses sum the per-layer expectations.
/// per_layer[h] holds layer h's contribution, so per_layer sums to loss.
struct LossReport {
  std::string name;
  double loss = 0.0;
  double standard_error = 0.0;
  std::optional<LossDecomposition> decomposition;
  std::vector<double> per_layer;
  /// Observed transitions to which the candidate assigns probability 0; they
  /// are excluded from `loss`.
  std::size_t zero_prob_events = 0;
  std::size_t n_effective = 0;
  /// Exact evaluators: the candidate puts zero mass on part of the truth's
  /// support and the loss is +inf.
  bool infinite = false;
  bool exact = true;
  std::vector<std::string> warnings;
};

/// State -> point in R^d; every entry has the same dimension.
class Embedding {
 public:
  Embedding() = default;
  explicit Embedding(std::map<StateId, std::vector<double>, std::less<>> points);

  std::size_t dimension() const { return dim_; }
  bool contains(std::string_view s) const { return points_.count(s) > 0; }
  /// Throws InputError for missing states.
  const std::vector<double>& at(std::string_view s) const;
  double distance(std::string_view a, std::string_view b) const;
  const std::map<StateId, std::vector<double>, std::less<>>& points() const { return points_; }

 private:
  std::map<StateId, std::vector<double>, std::less<>> points_;
  std::size_t dim_ = 0;
};

/// An MDP whose every enumerated transition row is a point mass.
class DeterministicModel {
 public:
  /// Throws InputError if some row is not a point mass.
  explicit DeterministicModel(Mdp m);

  const Mdp& mdp() const { return m_; }
  StateId next(std::size_t layer, std::string_view s, ActionIndex a) const;

 private:
  Mdp m_;
};

/// Mean of -log P(s'|s,a) over the dataset's transitions.
LossReport mle_loss(const Mdp& candidate, const Dataset& data);

/// E_{(s,a)~data_dist}[CE(P*(.|s,a) || P(.|s,a))], split into the truth's
/// conditional entropy and the expected KL.
LossReport expected_mle_loss(const Mdp& candidate, const Mdp& truth, const Occupancy& data_dist);

/// Mean of ||emb(s') - emb(f(s,a))||, optionally squared.
LossReport l2_loss(const DeterministicModel& candidate, const Dataset& data, const Embedding& emb,
                   bool squared);

/// Exact expectation of the L2 loss when s' ~ P*(.|s,a).
LossReport expected_l2_loss(const DeterministicModel& candidate, const Mdp& truth,
                            const Occupancy& data_dist, const Embedding& emb, bool squared);

/// Multi-step reward prediction. For each trajectory and each start h the
/// candidate is reset to the data state, rolled forward open-loop on the data
/// actions, and the squared reward errors over h..H are summed. Rollouts from
/// (trajectory i, start h) draw from the stream keyed (seed, i, h + 1).
LossReport reward_prediction_loss_empirical(const Mdp& candidate, const Dataset& data,
                                            std::uint64_t seed);

/// Per-trajectory values of the empirical reward prediction loss.
std::vector<double> reward_prediction_losses(const Mdp& candidate, const Dataset& data,
                                             std::uint64_t seed);

inline constexpr std::size_t kMaxJointPairs = 1'000'000;

/// Exact expectation of the reward prediction loss under behavior policy
/// pi_d in the truth, integrating over candidate rollout randomness. Throws
/// SizeError when a layer's joint (true state, rollout state) support exceeds
/// kMaxJointPairs.
LossReport reward_prediction_loss_expected(const Mdp& candidate, const Mdp& truth,
                                           const Policy& pi_d);

struct PinskerResult {
  double tv = 0.0;  // 1/2 sum |p - q|
  double l1 = 0.0;  // sum |p - q|
  double kl = 0.0;  // KL(p || q)
  bool kl_infinite = false;
  double bound = 0.0;  // sqrt(kl / 2)
  bool bound_holds = true;
};

PinskerResult pinsker_check(const Distribution& p, const Distribution& q);

/// Throws InputError unless both MDPs share kind, horizon and action names.
void require_same_spaces(const Mdp& a, const Mdp& b);

}  // namespace mbrl
