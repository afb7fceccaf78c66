#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mbrl/distribution.hpp"

namespace mbrl {

enum class HorizonKind { kEpisodic, kDiscounted };

// Layers are 0-based throughout the library. An episodic MDP with horizon H
// has decision layers 0..H-1 and a reward-free terminal layer H. A discounted
// MDP has the single layer 0, and transitions map layer 0 back to layer 0.

/// Procedural description of dynamics and rewards. Implementations must be
/// pure: repeated queries return identical answers.
class TransitionOracle {
 public:
  virtual ~TransitionOracle() = default;

  virtual bool contains(std::size_t layer, std::string_view s) const = 0;
  virtual Distribution next(std::size_t layer, std::string_view s, ActionIndex a) const = 0;
  virtual double reward(std::size_t layer, std::string_view s, ActionIndex a) const = 0;

  /// Reachable states of a layer in a fixed order. Throws SizeError when the
  /// layer is too large to tabulate.
  virtual std::vector<StateId> enumerate(std::size_t layer) const = 0;

  virtual bool procedural() const { return true; }
};

/// Explicit per-layer tables. Rows are indexed [state][action]; the terminal
/// layer of an episodic MDP carries states only.
struct LayerTable {
  std::vector<StateId> states;
  std::vector<std::vector<Distribution>> transitions;
  std::vector<std::vector<double>> rewards;
};

struct MdpTables {
  std::string name;
  HorizonKind kind = HorizonKind::kEpisodic;
  std::size_t horizon = 0;
  double gamma = 0.0;
  std::vector<std::string> actions;
  std::vector<LayerTable> layers;
  StateId initial;
  double rmax = 1.0;
};

/// Immutable finite MDP handle. Copies share the underlying oracle.
class Mdp {
 public:
  static Mdp episodic(std::string name, std::size_t horizon, std::vector<std::string> actions,
                      StateId initial, double rmax, std::shared_ptr<const TransitionOracle> oracle);
  static Mdp discounted(std::string name, double gamma, std::vector<std::string> actions,
                        StateId initial, double rmax, std::shared_ptr<const TransitionOracle> oracle);
  /// Throws InputError on structural problems (shape mismatches, duplicate
  /// states). Probability and reward violations are left to validate().
  static Mdp from_tables(MdpTables tables);

  HorizonKind kind() const { return kind_; }
  bool episodic() const { return kind_ == HorizonKind::kEpisodic; }
  std::size_t horizon() const { return horizon_; }
  double gamma() const { return gamma_; }
  const std::string& name() const { return name_; }
  const StateId& initial() const { return initial_; }
  double rmax() const { return rmax_; }
  /// rmax*H (episodic) or rmax/(1-gamma) (discounted).
  double vmax() const;

  /// Number of layers including the terminal one (H+1 or 1).
  std::size_t num_layers() const { return episodic() ? horizon_ + 1 : 1; }
  /// Layers on which actions are taken (H or 1).
  std::size_t decision_layers() const { return episodic() ? horizon_ : 1; }
  std::size_t next_layer(std::size_t layer) const { return episodic() ? layer + 1 : 0; }
  bool terminal(std::size_t layer) const { return episodic() && layer == horizon_; }

  const std::vector<std::string>& actions() const { return actions_; }
  std::size_t num_actions() const { return actions_.size(); }
  /// Throws InputError for unknown names.
  ActionIndex action_index(std::string_view name) const;

  bool procedural() const { return oracle_->procedural(); }
  bool contains(std::size_t layer, std::string_view s) const;
  Distribution next(std::size_t layer, std::string_view s, ActionIndex a) const;
  double reward(std::size_t layer, std::string_view s, ActionIndex a) const;
  std::vector<StateId> states(std::size_t layer) const;

 private:
  Mdp() = default;
  void check_query(std::size_t layer, std::string_view s, ActionIndex a) const;

  std::string name_;
  HorizonKind kind_ = HorizonKind::kEpisodic;
  std::size_t horizon_ = 0;
  double gamma_ = 0.0;
  std::vector<std::string> actions_;
  StateId initial_;
  double rmax_ = 1.0;
  std::shared_ptr<const TransitionOracle> oracle_;
};

/// Largest episodic horizon for which a procedural MDP may be tabulated.
inline constexpr std::size_t kMaxTabulatedHorizon = 15;

/// Tabulates every enumerated state. Throws SizeError for MDPs whose
/// enumeration refuses.
MdpTables tabulate(const Mdp& m);

struct Violation {
  std::size_t layer = 0;
  StateId state;
  std::string action;  // empty for state-level problems
  std::string message;
};

/// Empty iff every MDP invariant holds on the enumerated states.
std::vector<Violation> validate(const Mdp& m);

}  // namespace mbrl
