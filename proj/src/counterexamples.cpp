#include "mbrl/counterexamples.hpp"

#include <cmath>
#include <sstream>

#include "mbrl/abstraction.hpp"
#include "mbrl/diagnostics.hpp"
#include "mbrl/error.hpp"
#include "mbrl/losses.hpp"

namespace mbrl {

void certify(std::vector<Certificate>& out, std::string name, double stored, double computed) {
  const bool same_inf = std::isinf(stored) && stored == computed;
  const bool passed = same_inf || std::abs(stored - computed) <= kCertificateTolerance;
  out.push_back({std::move(name), stored, computed, passed});
}

void require_certificates(const std::string& instance, const std::vector<Certificate>& certs) {
  std::ostringstream msg;
  bool failed = false;
  msg.precision(17);
  for (const auto& c : certs) {
    if (c.passed) continue;
    failed = true;
    msg << "\n  " << c.name << ": stored " << c.stored << ", computed " << c.computed;
  }
  if (failed) throw CertificateError(instance + " certificates not reproduced:" + msg.str());
}

// ---------------------------------------------------------------------------
// Three-state reward prediction example.

namespace {

Mdp prop1_mdp(const std::string& name, double pa, double pb, double pc) {
  MdpTables t;
  t.name = name;
  t.kind = HorizonKind::kEpisodic;
  t.horizon = 2;
  t.actions = {"L", "R"};
  t.initial = "s_init";
  t.rmax = 1.0;
  Distribution mid;
  for (auto [s, p] : {std::pair{"A", pa}, {"B", pb}, {"C", pc}}) {
    if (p > 0.0) {
      mid.support.emplace_back(s);
      mid.probs.push_back(p);
    }
  }
  const Distribution end = Distribution::point("end");
  t.layers.resize(3);
  t.layers[0] = {{"s_init"}, {{mid, mid}}, {{0.0, 0.0}}};
  t.layers[1] = {{"A", "B", "C"},
                 {{end, end}, {end, end}, {end, end}},
                 {{1.0, 0.0}, {0.5, 0.5}, {0.0, 1.0}}};
  t.layers[2].states = {"end"};
  return Mdp::from_tables(std::move(t));
}

Policy prop1_target() {
  Policy::ActionTable table(2);
  table[0] = {{"s_init", 0}};
  table[1] = {{"A", 0}, {"B", 0}, {"C", 1}};
  return Policy::deterministic(std::move(table));
}

}  // namespace

double prop1_truth_loss(double p_b) { return (1.0 - p_b) / 2.0; }
double prop1_wrong_loss(double p_b) { return (1.0 - p_b) / 4.0; }

Prop1Instance build_prop1_variant(double p_b) {
  if (!(p_b >= 0.0 && p_b < 1.0)) throw InputError("p_b must lie in [0, 1)");
  Prop1Instance inst{
      prop1_mdp("prop1-truth", (1.0 - p_b) / 2.0, p_b, (1.0 - p_b) / 2.0),
      prop1_mdp("prop1-wrong", 0.0, 1.0, 0.0),
      Policy::uniform(),
      prop1_target(),
      p_b,
      {},
  };
  auto& c = inst.certificates;
  certify(c, "loss_truth", prop1_truth_loss(p_b),
          reward_prediction_loss_expected(inst.truth, inst.truth, inst.pi_d).loss);
  certify(c, "loss_wrong", prop1_wrong_loss(p_b),
          reward_prediction_loss_expected(inst.wrong, inst.truth, inst.pi_d).loss);
  certify(c, "return_truth", 1.0 - 0.5 * p_b, expected_return(inst.truth, inst.pi_target));
  certify(c, "return_wrong", 0.5, expected_return(inst.wrong, inst.pi_target));
  require_certificates("prop1", c);
  return inst;
}

Prop1Instance build_prop1() { return build_prop1_variant(0.0); }

Prop1Threshold prop1_threshold(double lo, double hi, double tol) {
  auto diff = [](double p) {
    const Mdp truth = prop1_mdp("prop1-truth", (1.0 - p) / 2.0, p, (1.0 - p) / 2.0);
    const Mdp wrong = prop1_mdp("prop1-wrong", 0.0, 1.0, 0.0);
    const Policy pi = Policy::uniform();
    return reward_prediction_loss_expected(truth, truth, pi).loss -
           reward_prediction_loss_expected(wrong, truth, pi).loss;
  };
  Prop1Threshold r;
  r.lo = lo;
  r.hi = hi;
  r.diff_lo = diff(lo);
  r.diff_hi = diff(hi);
  if ((r.diff_lo > 0.0) == (r.diff_hi > 0.0)) return r;
  double f_lo = r.diff_lo;
  while (r.hi - r.lo > tol) {
    const double mid = 0.5 * (r.lo + r.hi);
    const double f_mid = diff(mid);
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      r.lo = mid;
      f_lo = f_mid;
    } else {
      r.hi = mid;
    }
    ++r.iterations;
  }
  r.threshold = 0.5 * (r.lo + r.hi);
  return r;
}

// ---------------------------------------------------------------------------
// Tree versus chain.

namespace {

class Prop2Oracle final : public TransitionOracle {
 public:
  Prop2Oracle(std::size_t horizon, bool tree) : horizon_(horizon), tree_(tree) {}

  bool contains(std::size_t layer, std::string_view s) const override {
    if (layer > horizon_ || s.size() != layer) return false;
    return s.find_first_not_of("LR") == std::string_view::npos;
  }

  Distribution next(std::size_t layer, std::string_view s, ActionIndex a) const override {
    if (tree_) return Distribution::point(std::string(s) + (a == 0 ? 'L' : 'R'));
    return Distribution::point(std::string(layer + 1, 'L'));
  }

  double reward(std::size_t layer, std::string_view s, ActionIndex a) const override {
    if (layer + 1 != horizon_) return 0.0;
    if (a == 0) return 1.0;
    if (tree_ && s.find('L') == std::string_view::npos) return 100.0;
    return 0.0;
  }

  std::vector<StateId> enumerate(std::size_t layer) const override {
    if (!tree_) return {std::string(layer, 'L')};
    if (horizon_ > kMaxTabulatedHorizon) {
      throw SizeError("tree of horizon " + std::to_string(horizon_) + " is too large to enumerate");
    }
    std::vector<StateId> out;
    out.reserve(std::size_t{1} << layer);
    for (std::size_t code = 0; code < (std::size_t{1} << layer); ++code) {
      std::string s(layer, 'L');
      for (std::size_t i = 0; i < layer; ++i) {
        if ((code >> (layer - 1 - i)) & 1U) s[i] = 'R';
      }
      out.push_back(std::move(s));
    }
    return out;
  }

 private:
  std::size_t horizon_;
  bool tree_;
};

Mdp prop2_mdp(std::size_t horizon, bool tree) {
  return Mdp::episodic(tree ? "prop2-wrong" : "prop2-truth", horizon, {"L", "R"}, "", 100.0,
                       std::make_shared<const Prop2Oracle>(horizon, tree));
}

void check_prop2_horizon(std::size_t horizon) {
  if (horizon < 2 || horizon > kMaxProp2Horizon) {
    throw InputError("prop2 horizon must lie in [2, " + std::to_string(kMaxProp2Horizon) + "]");
  }
}

}  // namespace

double distinguishing_probability(std::size_t horizon) {
  if (horizon < 1) throw InputError("horizon must be positive");
  return std::ldexp(1.0, -static_cast<int>(horizon));
}

double dataset_detection_probability(std::size_t horizon, std::size_t n) {
  if (n < 1) throw InputError("dataset size must be positive");
  const double p = distinguishing_probability(horizon);
  return -std::expm1(static_cast<double>(n) * std::log1p(-p));
}

Prop2Instance build_prop2(std::size_t horizon) {
  check_prop2_horizon(horizon);
  Prop2Instance inst{horizon, prop2_mdp(horizon, false), prop2_mdp(horizon, true),
                     Policy::uniform(), Policy::constant(1), {}};
  auto& c = inst.certificates;
  const Occupancy data = occupancy(inst.truth, inst.pi_d);
  const Policy all_l = Policy::constant(0);
  certify(c, "coverage_all_r", 2.0,
          state_action_coverage(inst.truth, inst.pi_target, data).ratio);
  certify(c, "coverage_all_l", 2.0, state_action_coverage(inst.truth, all_l, data).ratio);
  const double traj = std::ldexp(1.0, static_cast<int>(horizon));
  certify(c, "trajectory_coverage", traj,
          trajectory_coverage(inst.truth, inst.pi_target, inst.pi_d).ratio);
  certify(c, "distinguishing_probability", std::ldexp(1.0, -static_cast<int>(horizon)),
          distinguishing_probability(horizon));
  const double j_wrong = expected_return(inst.wrong, inst.pi_target);
  const double j_truth = expected_return(inst.truth, inst.pi_target);
  certify(c, "return_wrong_all_r", 100.0, j_wrong);
  certify(c, "return_truth_all_r", 0.0, j_truth);
  certify(c, "ope_gap", 100.0, j_wrong - j_truth);
  require_certificates("prop2", c);
  return inst;
}

// ---------------------------------------------------------------------------
// Bisimulation versus a degenerate reward-preserving encoder.

namespace {

Mdp bisim_mdp() {
  MdpTables t;
  t.name = "bisim-degenerate";
  t.kind = HorizonKind::kEpisodic;
  t.horizon = 3;
  t.actions = {"L", "R"};
  t.initial = "s_init";
  t.rmax = 1.0;
  const Distribution to_g = Distribution::point("g");
  const Distribution to_b = Distribution::point("b");
  const Distribution coin{{"g", "b"}, {0.5, 0.5}};
  const Distribution end = Distribution::point("end");
  t.layers.resize(4);
  t.layers[0] = {{"s_init"},
                 {{Distribution{{"p1", "p2"}, {0.9, 0.1}}, Distribution{{"p1", "p2"}, {0.1, 0.9}}}},
                 {{0.0, 0.0}}};
  t.layers[1] = {{"p1", "p2"}, {{to_g, to_b}, {coin, coin}}, {{0.0, 0.0}, {0.0, 0.0}}};
  t.layers[2] = {{"g", "b"}, {{end, end}, {end, end}}, {{1.0, 1.0}, {0.0, 0.0}}};
  t.layers[3].states = {"end"};
  return Mdp::from_tables(std::move(t));
}

double binary_entropy(double p) { return -(p * std::log(p) + (1.0 - p) * std::log(1.0 - p)); }

}  // namespace

BisimDegenerateInstance build_bisim_degenerate() {
  const Mdp truth = bisim_mdp();
  Encoder phi_bisim = Encoder::identity(truth);
  auto layers = std::vector<Encoder::LayerMap>{
      {{"s_init", "s_init"}}, {{"p1", "m"}, {"p2", "m"}}, {{"g", "g"}, {"b", "b"}}, {{"end", "end"}}};
  Encoder phi_deg(std::move(layers));
  const Occupancy data = occupancy(truth, Policy::uniform());
  BisimDegenerateInstance inst{truth, phi_bisim, phi_deg, data,
                               lift_policy(phi_deg, Policy::constant(0)), {}};
  auto& c = inst.certificates;

  const LatentModel lm_bisim = optimal_latent_dynamics(phi_bisim, truth, data);
  const LatentModel lm_deg = optimal_latent_dynamics(phi_deg, truth, data);
  // Layer 0 entropy of (0.9, 0.1) plus half of ln 2 from p2's coin.
  certify(c, "latent_loss_bisim", binary_entropy(0.9) + 0.5 * std::log(2.0),
          expected_latent_mle_loss(lm_bisim, truth, data).loss);
  // The merged cell predicts g with probability 0.75 under L and 0.25 under R.
  certify(c, "latent_loss_degenerate", binary_entropy(0.75),
          expected_latent_mle_loss(lm_deg, truth, data).loss);
  const Policy latent_l = Policy::constant(0);
  const double j_true = expected_return(truth, inst.pi_target);
  const double j_deg = expected_return(latent_mdp(lm_deg, truth), latent_l);
  const double j_bisim = expected_return(latent_mdp(lm_bisim, truth), latent_l);
  certify(c, "return_true_always_l", 0.95, j_true);
  certify(c, "return_degenerate_always_l", 0.75, j_deg);
  certify(c, "return_bisim_always_l", 0.95, j_bisim);
  certify(c, "ope_gap_degenerate", 0.20, j_true - j_deg);
  certify(c, "bisim_is_bisimulation", 1.0, bisimulation_check(truth, phi_bisim).is_bisimulation);
  certify(c, "degenerate_is_bisimulation", 0.0,
          bisimulation_check(truth, phi_deg).is_bisimulation);
  require_certificates("bisim-degenerate", c);
  return inst;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& counterexample_names() {
  static const std::vector<std::string> names{"prop1", "prop1-variant", "prop2",
                                              "bisim-degenerate"};
  return names;
}

Mdp builtin_mdp(const std::string& name, const std::string& role, std::size_t horizon,
                double p_b) {
  if (role != "truth" && role != "wrong") {
    throw InputError("role must be 'truth' or 'wrong', got '" + role + "'");
  }
  const bool truth = role == "truth";
  if (name == "prop1" || name == "prop1-variant") {
    const double p = name == "prop1" ? 0.0 : p_b;
    if (!(p >= 0.0 && p < 1.0)) throw InputError("p_b must lie in [0, 1)");
    return truth ? prop1_mdp("prop1-truth", (1.0 - p) / 2.0, p, (1.0 - p) / 2.0)
                 : prop1_mdp("prop1-wrong", 0.0, 1.0, 0.0);
  }
  if (name == "prop2") {
    check_prop2_horizon(horizon);
    return prop2_mdp(horizon, !truth);
  }
  if (name == "bisim-degenerate") {
    if (!truth) throw InputError("bisim-degenerate has no wrong model");
    return bisim_mdp();
  }
  throw InputError("unknown builtin '" + name + "'");
}

}  // namespace mbrl
