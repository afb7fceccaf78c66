#pragma once

#include <map>
#include <string>
#include <vector>

#include "mbrl/mdp.hpp"
#include "mbrl/policy.hpp"

namespace mbrl {

/// Nonnegative weights per (layer, state, action). Normalized episodic
/// occupancies sum to 1 on every decision layer; normalized discounted ones
/// sum to 1 overall.
class Occupancy {
 public:
  using LayerWeights = std::map<StateId, std::vector<double>, std::less<>>;

  Occupancy() = default;
  Occupancy(HorizonKind kind, std::size_t num_actions, std::vector<LayerWeights> layers,
            bool normalized, double truncation_error = 0.0);

  /// Uniform over every enumerated (state, action) of each decision layer.
  static Occupancy uniform(const Mdp& m);

  HorizonKind kind() const { return kind_; }
  std::size_t num_layers() const { return layers_.size(); }
  std::size_t num_actions() const { return num_actions_; }
  const LayerWeights& layer(std::size_t h) const { return layers_.at(h); }
  double at(std::size_t h, std::string_view s, ActionIndex a) const;
  double state_mass(std::size_t h, std::string_view s) const;
  double layer_mass(std::size_t h) const;
  bool normalized() const { return normalized_; }
  /// Discounted tail mass dropped by truncation (before renormalization).
  double truncation_error() const { return truncation_error_; }

  /// Throws InputError unless each layer (episodic) or the whole (discounted)
  /// sums to 1 within 1e-9 with nonnegative entries.
  void check_normalized() const;

 private:
  HorizonKind kind_ = HorizonKind::kEpisodic;
  std::size_t num_actions_ = 0;
  std::vector<LayerWeights> layers_;
  bool normalized_ = true;
  double truncation_error_ = 0.0;
};

struct ValueFunction {
  /// One map per layer; episodic tables include the terminal layer (zeros).
  std::vector<std::map<StateId, double, std::less<>>> layers;
  bool converged = true;
  std::size_t iterations = 0;

  double at(std::size_t layer, std::string_view s) const;
};

inline constexpr double kBellmanTolerance = 1e-10;
inline constexpr std::size_t kMaxIterations = 1'000'000;
inline constexpr double kOccupancyTailMass = 1e-12;

/// Exact backward induction (episodic) over every enumerated state, or
/// Bellman-expectation iteration (discounted). The discounted stopping rule
/// guarantees a sup-norm error below kBellmanTolerance.
ValueFunction value_function(const Mdp& m, const Policy& pi);

/// Value at the initial state. Episodic MDPs are evaluated lazily on the
/// states the policy reaches, so procedural MDPs of any size are supported.
/// Throws ConvergenceError when discounted iteration does not converge.
double expected_return(const Mdp& m, const Policy& pi);

/// Normalized state-action occupancy of pi in m. Episodic: exact forward
/// propagation, one distribution per decision layer. Discounted: (1-g)g^t
/// weighted propagation truncated once the tail mass drops below 1e-12.
Occupancy occupancy(const Mdp& m, const Policy& pi);

struct PlanResult {
  Policy policy = Policy::uniform();
  ValueFunction values;
  bool converged = true;
};

/// Optimal deterministic policy; ties go to the lowest action index.
PlanResult plan_optimal(const Mdp& m);

}  // namespace mbrl
