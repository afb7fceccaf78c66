#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mbrl/distribution.hpp"
#include "mbrl/encoder.hpp"

namespace mbrl {

enum class PolicyKind { kUniform, kConstant, kDeterministic, kTabular, kLatent };

/// Stationary or layer-dependent action distribution. Tables are keyed by
/// (layer, state); discounted MDPs use layer 0.
class Policy {
 public:
  using ActionTable = std::vector<std::map<StateId, ActionIndex, std::less<>>>;
  using ProbTable = std::vector<std::map<StateId, std::vector<double>, std::less<>>>;

  static Policy uniform();
  static Policy constant(ActionIndex a);
  static Policy deterministic(ActionTable table);
  static Policy tabular(ProbTable table);
  /// s -> latent_policy(phi(s)); `latent_policy` is keyed by latent labels.
  static Policy lifted(Encoder phi, Policy latent_policy);

  PolicyKind kind() const;
  /// Action probabilities; throws InputError where the policy is undefined.
  std::vector<double> probs(std::size_t layer, std::string_view s, std::size_t num_actions) const;

  /// Short provenance label ("uniform", "constant:1", ...).
  std::string describe() const;

  const ActionTable* actions_table() const;
  const ProbTable* probs_table() const;
  ActionIndex constant_action() const;
  const Encoder* encoder() const;
  const Policy* inner() const;

 private:
  struct Uniform {};
  struct Constant {
    ActionIndex action;
  };
  struct Lifted {
    Encoder phi;
    std::shared_ptr<const Policy> inner;
  };
  using Variant = std::variant<Uniform, Constant, ActionTable, ProbTable, Lifted>;

  explicit Policy(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

}  // namespace mbrl
