#pragma once

#include <map>
#include <string>
#include <vector>

#include "mbrl/evaluation.hpp"
#include "mbrl/losses.hpp"
#include "mbrl/mdp.hpp"
#include "mbrl/policy.hpp"

namespace mbrl {

/// Terms of the value-difference decomposition for a model that shares the
/// truth's rewards.
///
/// Discounted:
///   lhs        = |J_truth(pi) - J_model(pi)|
///   eq1_rhs    = |g/(1-g) * E_{d_truth}[<P(.|s,a) - P*(.|s,a), V_model>]|
///   eq2_bound  = Vmax/(1-g) * E_{d_truth}[||P(.|s,a) - P*(.|s,a)||_1]
/// Episodic: the per-layer telescoping sum replaces g/(1-g), i.e.
///   eq1_rhs    = |sum_h E_{d_truth,h}[<P_h - P*_h, V_model,h+1>]|
///   eq2_bound  = Vmax * sum_h E_{d_truth,h}[||P_h - P*_h||_1]
/// half_l1_bound is the sharper (span/2) * ||.||_1 form, which is attained when
/// V_model equals its maximum where P > P* and 0 where P < P*.
struct SimulationLemmaReport {
  double j_truth = 0.0;
  double j_model = 0.0;
  double lhs = 0.0;
  double eq1_rhs = 0.0;
  double eq2_bound = 0.0;
  double half_l1_bound = 0.0;
  /// E||P - P*||_1 (summed over layers when episodic); tv is half of it.
  double expected_l1 = 0.0;
  double expected_tv = 0.0;
  /// Signed per-layer inner-product terms (episodic) or the single term.
  std::vector<double> per_layer;
};

/// Throws InputError when the spaces differ or the rewards disagree.
SimulationLemmaReport simulation_lemma_terms(const Mdp& model, const Mdp& truth, const Policy& pi);

/// Supremum ratio with its argmax. `infinite` is set when the denominator is
/// zero at a point where the numerator is positive.
struct CoverageResult {
  double ratio = 0.0;
  bool infinite = false;
  std::size_t layer = 0;
  StateId state;
  ActionIndex action = 0;
};

/// max over (s,a) with target(s,a) > 0 of target(s,a) / data(s,a), per layer.
CoverageResult state_action_coverage(const Occupancy& target, const Occupancy& data);

/// Standard direction: the target occupancy is that of pi in the truth.
/// Passing a learned model instead of the truth gives the model-side
/// coverage d_M^pi / d^D.
CoverageResult state_action_coverage(const Mdp& m, const Policy& pi, const Occupancy& data);

/// max over trajectories reachable under pi of prod_h pi(a_h|s_h) / pi_d(a_h|s_h).
CoverageResult trajectory_coverage(const Mdp& truth, const Policy& pi, const Policy& pi_d);

struct LipschitzResult {
  double constant = 0.0;
  bool infinite = false;
  StateId first;
  StateId second;
};

/// max over state pairs of |V(s) - V(t)| / ||emb(s) - emb(t)||.
LipschitzResult lipschitz_constant(const std::map<StateId, double, std::less<>>& values,
                                   const Embedding& emb);

enum class LipschitzDomain {
  kAllStates,       // every state of the model's layer
  kTruthReachable,  // only states the truth can reach ("legal" states)
};

struct SmoothnessRow {
  std::size_t layer = 0;
  StateId state;
  ActionIndex action = 0;
  StateId model_next;
  StateId truth_next;
  double value_gap = 0.0;         // |V_M(f(s,a)) - V_M(f*(s,a))|
  double prediction_error = 0.0;  // ||f(s,a) - f*(s,a)||
  double rhs = 0.0;               // L * prediction_error
  double slack = 0.0;             // rhs - value_gap
  bool holds = true;
};

struct SmoothnessReport {
  std::vector<SmoothnessRow> rows;
  /// Lipschitz constant of V_M on each next layer (index = layer of f(s,a)).
  std::vector<LipschitzResult> lipschitz;
  /// Occupancy-weighted value-gap term vs the TV-style term Vmax*||P-P*||_1,
  /// both scaled like eq1 (g/(1-g) discounted, layer sum episodic).
  double value_gap_term = 0.0;
  double tv_term = 0.0;
  bool all_hold = true;
};

SmoothnessReport smoothness_gap_report(const DeterministicModel& model,
                                       const DeterministicModel& truth, const Policy& pi,
                                       const Embedding& emb,
                                       LipschitzDomain domain = LipschitzDomain::kAllStates);

/// States reachable from the initial state under any action sequence.
std::vector<std::vector<StateId>> reachable_states(const Mdp& m);

}  // namespace mbrl
