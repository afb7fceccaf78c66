#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mbrl/encoder.hpp"
#include "mbrl/evaluation.hpp"
#include "mbrl/losses.hpp"
#include "mbrl/mdp.hpp"
#include "mbrl/policy.hpp"
#include "mbrl/sampling.hpp"

namespace mbrl {

/// Encoder plus latent dynamics and rewards. dynamics[h][x][a] is a
/// distribution over the latents of layer h+1 (layer 0 when discounted).
struct LatentModel {
  using Rows = std::map<LatentId, std::vector<Distribution>, std::less<>>;
  using Rewards = std::map<LatentId, std::vector<double>, std::less<>>;

  Encoder encoder;
  std::vector<Rows> dynamics;
  std::vector<Rewards> rewards;
  /// (layer, latent) cells that had no data mass and fell back to uniform
  /// dynamics.
  std::vector<std::pair<std::size_t, LatentId>> zero_mass_cells;

  const Distribution& kernel(std::size_t layer, std::string_view x, ActionIndex a) const;
  double reward(std::size_t layer, std::string_view x, ActionIndex a) const;
};

/// The latent model as an MDP over latent labels, sharing the reference MDP's
/// kind, horizon or discount, actions and rmax.
Mdp latent_mdp(const LatentModel& lm, const Mdp& reference);

/// Throws InputError unless phi maps every enumerated state of m.
void require_total(const Encoder& phi, const Mdp& m);

/// Pushforward of P*(.|s,a) through phi, atoms in latent order.
Distribution induced_abstract_kernel(const Mdp& truth, const Encoder& phi, std::size_t layer,
                                     std::string_view s, ActionIndex a);

struct BisimulationWitness {
  std::size_t layer = 0;
  StateId first;
  StateId second;
  ActionIndex action = 0;
  std::string reason;  // "reward" or "kernel"
};

struct BisimulationResult {
  bool is_bisimulation = false;
  std::optional<LatentModel> induced;
  std::optional<BisimulationWitness> witness;
};

inline constexpr double kBisimulationTolerance = 1e-9;

/// Checks that rewards and pushforward kernels depend on s only through
/// phi(s). Returns the induced latent model on success, else the first
/// violating pair in state order.
BisimulationResult bisimulation_check(const Mdp& truth, const Encoder& phi);

/// Mean of -log P_latent(phi(s') | phi(s), a) over the data's transitions.
LossReport latent_mle_loss(const LatentModel& lm, const Dataset& data);

/// Exact latent cross-entropy under data_dist, decomposed into the expected
/// pushforward entropy and the expected KL (excess risk).
LossReport expected_latent_mle_loss(const LatentModel& lm, const Mdp& truth,
                                    const Occupancy& data_dist);

/// Population minimizer of expected_latent_mle_loss for a fixed encoder:
/// each cell's kernel is the data-weighted mixture of its members'
/// pushforward kernels.
LatentModel optimal_latent_dynamics(const Encoder& phi, const Mdp& truth,
                                    const Occupancy& data_dist);

struct EncoderCandidate {
  Encoder encoder;
  std::string id;
  double loss = 0.0;
  double entropy = 0.0;
  double excess = 0.0;
  bool is_bisimulation = false;
  std::size_t num_latents = 0;
};

inline constexpr std::size_t kMaxSearchStates = 12;
inline constexpr std::size_t kMaxSearchEncoders = 2'000'000;

/// Every reward-preserving encoder with at most max_latents labels per layer,
/// paired with its optimal latent dynamics and ranked by expected loss
/// (ties keep canonical enumeration order).
std::vector<EncoderCandidate> search_encoders(const Mdp& truth, const Occupancy& data_dist,
                                              std::size_t max_latents);

/// Canonical label string, e.g. "0|0.0|0.1|0" (layers separated by '|').
std::string encoder_id(const Encoder& phi);

/// s -> latent_pi(phi(s)).
Policy lift_policy(const Encoder& phi, const Policy& latent_pi);

}  // namespace mbrl
