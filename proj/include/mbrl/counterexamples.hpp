#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mbrl/encoder.hpp"
#include "mbrl/evaluation.hpp"
#include "mbrl/mdp.hpp"
#include "mbrl/policy.hpp"

namespace mbrl {

/// A stored closed-form value next to the value recomputed by the exact
/// evaluators.
struct Certificate {
  std::string name;
  double stored = 0.0;
  double computed = 0.0;
  bool passed = false;
};

inline constexpr double kCertificateTolerance = 1e-9;

/// Appends a certificate; passed iff |stored - computed| <= 1e-9 (or both
/// are the same infinity).
void certify(std::vector<Certificate>& out, std::string name, double stored, double computed);

/// Throws CertificateError listing every failed certificate.
void require_certificates(const std::string& instance, const std::vector<Certificate>& certs);

/// Truth/wrong-model pair with the reward-prediction counterexample data.
/// Both MDPs share actions {L, R}; layer 0 is "s_init", layer 1 holds
/// {A, B, C} and layer 2 is the terminal state "end".
struct Prop1Instance {
  Mdp truth;
  Mdp wrong;
  Policy pi_d = Policy::uniform();
  Policy pi_target = Policy::uniform();
  double p_b = 0.0;
  std::vector<Certificate> certificates;
};

Prop1Instance build_prop1();

/// Truth puts mass p_b on B and (1-p_b)/2 on A and C. p_b = 0 reproduces
/// build_prop1. Throws InputError for p_b outside [0, 1).
Prop1Instance build_prop1_variant(double p_b);

/// Closed forms of the exact reward-prediction losses of the variant.
double prop1_truth_loss(double p_b);
double prop1_wrong_loss(double p_b);

/// Result of bisecting loss(truth) - loss(wrong) over p_b in (0, 1).
struct Prop1Threshold {
  /// Set when the sign of the difference changes on the bracket.
  std::optional<double> threshold;
  double lo = 0.0;
  double hi = 1.0;
  /// Sign of loss(truth) - loss(wrong) at the bracket ends.
  double diff_lo = 0.0;
  double diff_hi = 0.0;
  std::size_t iterations = 0;
};

/// Evaluates the difference with the exact evaluator at the ends of
/// [lo, hi] and bisects when they differ in sign.
Prop1Threshold prop1_threshold(double lo = 1e-6, double hi = 1.0 - 1e-6, double tol = 1e-9);

/// Binary tree (wrong) versus collapsing chain (truth). States on layer h are
/// action strings of length h over {L, R}; the root is the empty string.
struct Prop2Instance {
  std::size_t horizon = 0;
  Mdp truth;
  Mdp wrong;
  Policy pi_d = Policy::uniform();
  Policy pi_target = Policy::uniform();  // always R
  std::vector<Certificate> certificates;
};

inline constexpr std::size_t kMaxProp2Horizon = 60;

/// Throws InputError unless 2 <= H <= 60.
Prop2Instance build_prop2(std::size_t horizon);

/// Probability that one uniform trajectory is the all-R action sequence.
double distinguishing_probability(std::size_t horizon);
/// Probability that n uniform trajectories contain at least one all-R
/// sequence, computed in log space.
double dataset_detection_probability(std::size_t horizon, std::size_t n);

struct BisimDegenerateInstance {
  Mdp truth;
  Encoder phi_bisim;
  Encoder phi_degenerate;
  /// Data occupancy used by the loss certificates: the uniform policy's.
  Occupancy data_dist;
  /// Always-L latent policy lifted through phi_degenerate.
  Policy pi_target = Policy::uniform();
  std::vector<Certificate> certificates;
};

BisimDegenerateInstance build_bisim_degenerate();

/// Registered instance names.
const std::vector<std::string>& counterexample_names();

/// Named MDP reference as used by {"builtin": name, ...}. role is "truth" or
/// "wrong" ("wrong" is unavailable for bisim-degenerate).
Mdp builtin_mdp(const std::string& name, const std::string& role, std::size_t horizon = 20,
                double p_b = 0.0);

}  // namespace mbrl
