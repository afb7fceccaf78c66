#include "mbrl/losses.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "mbrl/error.hpp"
#include "mbrl/parallel.hpp"
#include "mbrl/rng.hpp"
#include "loss_detail.hpp"

namespace mbrl {

using detail::aggregate_transitions;
using detail::mean;
using detail::standard_error;

void require_same_spaces(const Mdp& a, const Mdp& b) {
  if (a.kind() != b.kind()) throw InputError(a.name() + " and " + b.name() + " differ in kind");
  if (a.episodic() && a.horizon() != b.horizon()) {
    throw InputError(a.name() + " and " + b.name() + " differ in horizon");
  }
  if (a.actions() != b.actions()) {
    throw InputError(a.name() + " and " + b.name() + " differ in action sets");
  }
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_data_actions(const Mdp& m, const Dataset& data) {
  if (data.actions != m.actions()) {
    throw InputError("dataset actions do not match the actions of " + m.name());
  }
}

}  // namespace

// Embedding

Embedding::Embedding(std::map<StateId, std::vector<double>, std::less<>> points)
    : points_(std::move(points)) {
  if (!points_.empty()) dim_ = points_.begin()->second.size();
  for (const auto& [s, x] : points_) {
    if (x.size() != dim_) throw InputError("embedding of '" + s + "' has the wrong dimension");
  }
}

const std::vector<double>& Embedding::at(std::string_view s) const {
  auto it = points_.find(s);
  if (it == points_.end()) throw InputError("no embedding for state '" + std::string(s) + "'");
  return it->second;
}

double Embedding::distance(std::string_view a, std::string_view b) const {
  const auto& x = at(a);
  const auto& y = at(b);
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) ss += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(ss);
}

// DeterministicModel

DeterministicModel::DeterministicModel(Mdp m) : m_(std::move(m)) {
  for (std::size_t h = 0; h < m_.decision_layers(); ++h) {
    for (const auto& s : m_.states(h)) {
      for (ActionIndex a = 0; a < m_.num_actions(); ++a) {
        const Distribution d = m_.next(h, s, a);
        if (d.size() != 1 || d.probs[0] != 1.0) {
          throw InputError("transition from '" + s + "' under '" + m_.actions()[a] +
                           "' is not deterministic");
        }
      }
    }
  }
}

StateId DeterministicModel::next(std::size_t layer, std::string_view s, ActionIndex a) const {
  const Distribution d = m_.next(layer, s, a);
  if (d.size() != 1) throw InputError("deterministic model returned a stochastic row");
  return d.support[0];
}

// Losses

LossReport mle_loss(const Mdp& candidate, const Dataset& data) {
  require_data_actions(candidate, data);
  return aggregate_transitions(
      data,
      [&](std::size_t h, const StateId& s, ActionIndex a,
          const StateId& next) -> std::optional<double> {
        if (!candidate.contains(h, s)) {
          throw InputError("data state '" + s + "' is not a state of " + candidate.name());
        }
        const double p = candidate.next(h, s, a).prob(next);
        if (p <= 0.0) return std::nullopt;
        return -std::log(p);
      },
      "mle");
}

LossReport expected_mle_loss(const Mdp& candidate, const Mdp& truth, const Occupancy& data_dist) {
  require_same_spaces(candidate, truth);
  LossReport out;
  out.name = "expected-mle";
  LossDecomposition parts;
  out.per_layer.assign(data_dist.num_layers(), 0.0);
  for (std::size_t h = 0; h < data_dist.num_layers(); ++h) {
    for (const auto& [s, weights] : data_dist.layer(h)) {
      for (ActionIndex a = 0; a < weights.size(); ++a) {
        const double w = weights[a];
        if (w == 0.0) continue;
        const Distribution p_true = truth.next(h, s, a);
        const Distribution p_model = candidate.next(h, s, a);
        double ce = 0.0, ent = 0.0, kl = 0.0;
        for (std::size_t k = 0; k < p_true.size(); ++k) {
          const double p = p_true.probs[k];
          if (p == 0.0) continue;
          const double q = p_model.prob(p_true.support[k]);
          ent -= p * std::log(p);
          if (q <= 0.0) {
            out.infinite = true;
            continue;
          }
          ce -= p * std::log(q);
          kl += p * std::log(p / q);
        }
        out.per_layer[h] += w * ce;
        parts.entropy += w * ent;
        parts.excess += w * kl;
        ++out.n_effective;
      }
    }
  }
  if (out.infinite) {
    parts.excess = kInf;
    for (double& x : out.per_layer) x = kInf;
    out.loss = kInf;
    out.warnings.push_back("candidate assigns zero probability to part of the truth's support");
  } else {
    for (double x : out.per_layer) out.loss += x;
  }
  out.decomposition = parts;
  return out;
}

LossReport l2_loss(const DeterministicModel& candidate, const Dataset& data, const Embedding& emb,
                   bool squared) {
  require_data_actions(candidate.mdp(), data);
  return aggregate_transitions(
      data,
      [&](std::size_t h, const StateId& s, ActionIndex a,
          const StateId& next) -> std::optional<double> {
        const double dist = emb.distance(next, candidate.next(h, s, a));
        return squared ? dist * dist : dist;
      },
      squared ? "l2-squared" : "l2");
}

LossReport expected_l2_loss(const DeterministicModel& candidate, const Mdp& truth,
                            const Occupancy& data_dist, const Embedding& emb, bool squared) {
  require_same_spaces(candidate.mdp(), truth);
  LossReport out;
  out.name = squared ? "expected-l2-squared" : "expected-l2";
  out.per_layer.assign(data_dist.num_layers(), 0.0);
  for (std::size_t h = 0; h < data_dist.num_layers(); ++h) {
    for (const auto& [s, weights] : data_dist.layer(h)) {
      for (ActionIndex a = 0; a < weights.size(); ++a) {
        if (weights[a] == 0.0) continue;
        const StateId predicted = candidate.next(h, s, a);
        const Distribution p_true = truth.next(h, s, a);
        double expectation = 0.0;
        for (std::size_t k = 0; k < p_true.size(); ++k) {
          const double d = emb.distance(p_true.support[k], predicted);
          expectation += p_true.probs[k] * (squared ? d * d : d);
        }
        out.per_layer[h] += weights[a] * expectation;
        ++out.n_effective;
      }
    }
  }
  for (double x : out.per_layer) out.loss += x;
  return out;
}

namespace {

// Squared reward errors of one trajectory, one entry per start layer.
std::vector<double> rollout_errors(const Mdp& candidate, const Trajectory& t, std::uint64_t seed,
                                   std::size_t index) {
  const std::size_t horizon = t.length();
  std::vector<double> per_start(horizon, 0.0);
  for (std::size_t h = 0; h < horizon; ++h) {
    if (!candidate.contains(h, t.states[h])) {
      throw InputError("data state '" + t.states[h] + "' is not in layer " + std::to_string(h) +
                       " of " + candidate.name());
    }
    // Substream 0 is the data sampler's stream for the same (seed, index).
    RngStream rng(seed, index, h + 1);
    StateId s = t.states[h];
    double sum = 0.0;
    for (std::size_t k = h; k < horizon; ++k) {
      const ActionIndex a = t.actions[k];
      const double err = t.rewards[k] - candidate.reward(k, s, a);
      sum += err * err;
      if (k + 1 < horizon) {
        const Distribution next = candidate.next(k, s, a);
        s = next.size() == 1 ? next.support[0] : next.support[next.select(rng.uniform())];
      }
    }
    per_start[h] = sum;
  }
  return per_start;
}

void require_trajectories(const Mdp& candidate, const Dataset& data) {
  if (!candidate.episodic()) throw InputError("reward prediction loss needs an episodic model");
  if (data.kind != DatasetKind::kTrajectories) {
    throw InputError("reward prediction loss needs a trajectory dataset");
  }
  require_data_actions(candidate, data);
  for (const auto& t : data.trajectories) {
    if (t.length() != candidate.horizon()) {
      throw InputError("trajectory length differs from the candidate's horizon");
    }
  }
}

}  // namespace

std::vector<double> reward_prediction_losses(const Mdp& candidate, const Dataset& data,
                                             std::uint64_t seed) {
  require_trajectories(candidate, data);
  return parallel_map(data.trajectories.size(), [&](std::size_t i) {
    double sum = 0.0;
    for (double x : rollout_errors(candidate, data.trajectories[i], seed, i)) sum += x;
    return sum;
  });
}

LossReport reward_prediction_loss_empirical(const Mdp& candidate, const Dataset& data,
                                            std::uint64_t seed) {
  require_trajectories(candidate, data);
  const auto rows = parallel_map(data.trajectories.size(), [&](std::size_t i) {
    return rollout_errors(candidate, data.trajectories[i], seed, i);
  });
  LossReport out;
  out.name = "reward-prediction";
  out.exact = false;
  out.per_layer.assign(candidate.horizon(), 0.0);
  std::vector<double> totals;
  totals.reserve(rows.size());
  for (const auto& row : rows) {
    double sum = 0.0;
    for (std::size_t h = 0; h < row.size(); ++h) {
      out.per_layer[h] += row[h];
      sum += row[h];
    }
    totals.push_back(sum);
  }
  const double n = static_cast<double>(std::max<std::size_t>(rows.size(), 1));
  for (double& x : out.per_layer) x /= n;
  out.loss = mean(totals);
  out.standard_error = standard_error(totals);
  out.n_effective = rows.size();
  return out;
}

LossReport reward_prediction_loss_expected(const Mdp& candidate, const Mdp& truth,
                                           const Policy& pi_d) {
  require_same_spaces(candidate, truth);
  if (!truth.episodic()) throw InputError("reward prediction loss needs episodic MDPs");
  const std::size_t horizon = truth.horizon();
  const std::size_t na = truth.num_actions();
  const Occupancy start = occupancy(truth, pi_d);

  LossReport out;
  out.name = "expected-reward-prediction";
  out.per_layer.assign(horizon, 0.0);
  using Pair = std::pair<StateId, StateId>;
  for (std::size_t h = 0; h < horizon; ++h) {
    std::map<Pair, double> joint;
    for (const auto& [s, w] : start.layer(h)) {
      double mass = 0.0;
      for (double x : w) mass += x;
      if (mass == 0.0) continue;
      if (!candidate.contains(h, s)) {
        throw InputError("state '" + s + "' is not in layer " + std::to_string(h) + " of " +
                         candidate.name());
      }
      joint.emplace(Pair{s, s}, mass);
    }
    double loss = 0.0;
    for (std::size_t k = h; k < horizon; ++k) {
      if (joint.size() > kMaxJointPairs) {
        throw SizeError("joint rollout support exceeds " + std::to_string(kMaxJointPairs) +
                        " pairs at layer " + std::to_string(k));
      }
      std::map<Pair, double> next;
      for (const auto& [pair, mass] : joint) {
        const auto& [s, s_hat] = pair;
        const auto probs = pi_d.probs(k, s, na);
        for (ActionIndex a = 0; a < na; ++a) {
          if (probs[a] == 0.0) continue;
          const double w = mass * probs[a];
          const double err = truth.reward(k, s, a) - candidate.reward(k, s_hat, a);
          loss += w * err * err;
          if (k + 1 == horizon) continue;
          const Distribution p_true = truth.next(k, s, a);
          const Distribution p_model = candidate.next(k, s_hat, a);
          for (std::size_t i = 0; i < p_true.size(); ++i) {
            if (p_true.probs[i] == 0.0) continue;
            for (std::size_t j = 0; j < p_model.size(); ++j) {
              if (p_model.probs[j] == 0.0) continue;
              next[Pair{p_true.support[i], p_model.support[j]}] +=
                  w * p_true.probs[i] * p_model.probs[j];
            }
          }
        }
      }
      joint = std::move(next);
    }
    out.per_layer[h] = loss;
    out.loss += loss;
  }
  out.n_effective = horizon;
  return out;
}

PinskerResult pinsker_check(const Distribution& p, const Distribution& q) {
  std::vector<double> pv, qv;
  align(p, q, pv, qv);
  PinskerResult r;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    r.l1 += std::abs(pv[i] - qv[i]);
    if (pv[i] == 0.0) continue;
    if (qv[i] == 0.0) {
      r.kl_infinite = true;
      continue;
    }
    r.kl += pv[i] * std::log(pv[i] / qv[i]);
  }
  r.tv = 0.5 * r.l1;
  if (r.kl_infinite) {
    r.kl = kInf;
    r.bound = kInf;
    r.bound_holds = true;
    return r;
  }
  // KL can round slightly below zero for p == q.
  r.bound = std::sqrt(std::max(r.kl, 0.0) / 2.0);
  r.bound_holds = r.tv <= r.bound + 1e-12;
  return r;
}

}  // namespace mbrl
