#include "mbrl/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <unordered_map>

#include "mbrl/error.hpp"

namespace mbrl {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_shared_rewards(const Mdp& model, const Mdp& truth) {
  for (std::size_t h = 0; h < truth.decision_layers(); ++h) {
    for (const auto& s : truth.states(h)) {
      if (!model.contains(h, s)) {
        throw InputError("model lacks state '" + s + "' of layer " + std::to_string(h));
      }
      for (ActionIndex a = 0; a < truth.num_actions(); ++a) {
        if (model.reward(h, s, a) != truth.reward(h, s, a)) {
          throw InputError("model and truth rewards differ at '" + s + "', action '" +
                           truth.actions()[a] + "'");
        }
      }
    }
  }
}

}  // namespace

SimulationLemmaReport simulation_lemma_terms(const Mdp& model, const Mdp& truth,
                                             const Policy& pi) {
  require_same_spaces(model, truth);
  require_shared_rewards(model, truth);
  const ValueFunction v_model = value_function(model, pi);
  const Occupancy d = occupancy(truth, pi);

  SimulationLemmaReport r;
  r.j_truth = expected_return(truth, pi);
  r.j_model = v_model.at(0, model.initial());
  r.lhs = std::abs(r.j_truth - r.j_model);

  const double vmax = truth.vmax();
  r.per_layer.assign(d.num_layers(), 0.0);
  double signed_sum = 0.0, half_l1 = 0.0;
  for (std::size_t h = 0; h < d.num_layers(); ++h) {
    const std::size_t next = truth.next_layer(h);
    const double span = truth.episodic()
                            ? truth.rmax() * static_cast<double>(truth.horizon() - h - 1)
                            : vmax;
    double inner_h = 0.0, l1_h = 0.0;
    for (const auto& [s, weights] : d.layer(h)) {
      for (ActionIndex a = 0; a < weights.size(); ++a) {
        if (weights[a] == 0.0) continue;
        std::vector<double> pv, qv;
        std::vector<StateId> atoms;
        align(model.next(h, s, a), truth.next(h, s, a), pv, qv, &atoms);
        double inner = 0.0, l1 = 0.0;
        for (std::size_t k = 0; k < atoms.size(); ++k) {
          const double diff = pv[k] - qv[k];
          if (diff == 0.0) continue;
          inner += diff * v_model.at(next, atoms[k]);
          l1 += std::abs(diff);
        }
        inner_h += weights[a] * inner;
        l1_h += weights[a] * l1;
      }
    }
    r.per_layer[h] = inner_h;
    signed_sum += inner_h;
    r.expected_l1 += l1_h;
    half_l1 += 0.5 * span * l1_h;
  }
  if (truth.episodic()) {
    r.eq1_rhs = std::abs(signed_sum);
    r.eq2_bound = vmax * r.expected_l1;
    r.half_l1_bound = half_l1;
  } else {
    const double g = truth.gamma();
    r.eq1_rhs = std::abs(g / (1.0 - g) * signed_sum);
    r.eq2_bound = vmax / (1.0 - g) * r.expected_l1;
    r.half_l1_bound = g / (1.0 - g) * half_l1;
  }
  r.expected_tv = 0.5 * r.expected_l1;
  return r;
}

CoverageResult state_action_coverage(const Occupancy& target, const Occupancy& data) {
  CoverageResult best;
  bool found = false;
  for (std::size_t h = 0; h < target.num_layers(); ++h) {
    for (const auto& [s, weights] : target.layer(h)) {
      for (ActionIndex a = 0; a < weights.size(); ++a) {
        if (weights[a] <= 0.0) continue;
        const double denom = data.at(h, s, a);
        if (denom <= 0.0) {
          if (!best.infinite) best = CoverageResult{kInf, true, h, s, a};
          found = true;
          continue;
        }
        const double ratio = weights[a] / denom;
        if (!best.infinite && (!found || ratio > best.ratio)) {
          best = CoverageResult{ratio, false, h, s, a};
        }
        found = true;
      }
    }
  }
  return best;
}

CoverageResult state_action_coverage(const Mdp& m, const Policy& pi, const Occupancy& data) {
  return state_action_coverage(occupancy(m, pi), data);
}

CoverageResult trajectory_coverage(const Mdp& truth, const Policy& pi, const Policy& pi_d) {
  if (!truth.episodic()) throw InputError("trajectory coverage needs an episodic MDP");
  const std::size_t na = truth.num_actions();
  // Largest ratio product from (layer, state) to the end, with the first
  // action attaining it.
  struct Entry {
    double value;
    bool infinite;
    ActionIndex action;
  };
  std::vector<std::unordered_map<StateId, Entry>> memo(truth.num_layers());
  std::function<Entry(std::size_t, const StateId&)> best = [&](std::size_t h,
                                                              const StateId& s) -> Entry {
    if (truth.terminal(h)) return {1.0, false, 0};
    if (auto it = memo[h].find(s); it != memo[h].end()) return it->second;
    const auto p = pi.probs(h, s, na);
    const auto q = pi_d.probs(h, s, na);
    Entry e{0.0, false, 0};
    bool first = true;
    for (ActionIndex a = 0; a < na; ++a) {
      if (p[a] == 0.0) continue;
      const bool step_inf = q[a] == 0.0;
      const double step = step_inf ? kInf : p[a] / q[a];
      Entry tail{0.0, false, 0};
      bool any = false;
      const Distribution d = truth.next(h, s, a);
      for (std::size_t k = 0; k < d.size(); ++k) {
        if (d.probs[k] == 0.0) continue;
        const Entry sub = best(h + 1, d.support[k]);
        if (!any || sub.infinite || (!tail.infinite && sub.value > tail.value)) tail = sub;
        any = true;
      }
      Entry cand{step * tail.value, step_inf || tail.infinite, a};
      if (cand.infinite) cand.value = kInf;
      if (first || (cand.infinite && !e.infinite) || (!e.infinite && cand.value > e.value)) e = cand;
      first = false;
    }
    memo[h].emplace(s, e);
    return e;
  };
  const Entry e = best(0, truth.initial());
  CoverageResult out;
  out.ratio = e.value;
  out.infinite = e.infinite;
  out.layer = 0;
  out.state = truth.initial();
  out.action = e.action;
  return out;
}

LipschitzResult lipschitz_constant(const std::map<StateId, double, std::less<>>& values,
                                   const Embedding& emb) {
  if (values.size() < 2) throw InputError("Lipschitz constant needs at least two states");
  LipschitzResult r;
  for (auto i = values.begin(); i != values.end(); ++i) {
    for (auto j = std::next(i); j != values.end(); ++j) {
      const double gap = std::abs(i->second - j->second);
      const double dist = emb.distance(i->first, j->first);
      if (dist == 0.0) {
        if (gap > 0.0 && !r.infinite) r = LipschitzResult{kInf, true, i->first, j->first};
        continue;
      }
      if (!r.infinite && gap / dist > r.constant) {
        r = LipschitzResult{gap / dist, false, i->first, j->first};
      }
    }
  }
  return r;
}

std::vector<std::vector<StateId>> reachable_states(const Mdp& m) {
  std::vector<std::vector<StateId>> out(m.num_layers());
  std::set<StateId> frontier{m.initial()};
  std::set<StateId> seen = frontier;
  for (std::size_t h = 0; h < m.num_layers(); ++h) {
    if (m.episodic()) {
      out[h].assign(frontier.begin(), frontier.end());
      if (m.terminal(h)) break;
      std::set<StateId> next;
      for (const auto& s : frontier) {
        for (ActionIndex a = 0; a < m.num_actions(); ++a) {
          const Distribution d = m.next(h, s, a);
          for (std::size_t k = 0; k < d.size(); ++k) {
            if (d.probs[k] > 0.0) next.insert(d.support[k]);
          }
        }
      }
      frontier = std::move(next);
      continue;
    }
    // Discounted: closure within the single layer.
    std::vector<StateId> stack(frontier.begin(), frontier.end());
    while (!stack.empty()) {
      const StateId s = stack.back();
      stack.pop_back();
      for (ActionIndex a = 0; a < m.num_actions(); ++a) {
        const Distribution d = m.next(0, s, a);
        for (std::size_t k = 0; k < d.size(); ++k) {
          if (d.probs[k] > 0.0 && seen.insert(d.support[k]).second) stack.push_back(d.support[k]);
        }
      }
    }
    out[0].assign(seen.begin(), seen.end());
  }
  return out;
}

SmoothnessReport smoothness_gap_report(const DeterministicModel& model,
                                       const DeterministicModel& truth, const Policy& pi,
                                       const Embedding& emb, LipschitzDomain domain) {
  const Mdp& m = model.mdp();
  const Mdp& t = truth.mdp();
  require_same_spaces(m, t);
  require_shared_rewards(m, t);
  const ValueFunction v = value_function(m, pi);
  const auto legal = reachable_states(t);

  SmoothnessReport report;
  report.lipschitz.resize(m.num_layers());
  for (std::size_t h = 0; h < m.num_layers(); ++h) {
    std::map<StateId, double, std::less<>> values;
    if (domain == LipschitzDomain::kAllStates) {
      values = v.layers[h];
    } else {
      for (const auto& s : legal[h]) values.emplace(s, v.at(h, s));
    }
    if (values.size() >= 2) report.lipschitz[h] = lipschitz_constant(values, emb);
  }

  const Occupancy d = occupancy(t, pi);
  double gap_sum = 0.0, tv_sum = 0.0;
  for (std::size_t h = 0; h < t.decision_layers(); ++h) {
    const std::size_t next = t.next_layer(h);
    const auto& lip = report.lipschitz[next];
    for (const auto& s : t.states(h)) {
      for (ActionIndex a = 0; a < t.num_actions(); ++a) {
        SmoothnessRow row;
        row.layer = h;
        row.state = s;
        row.action = a;
        row.model_next = model.next(h, s, a);
        row.truth_next = truth.next(h, s, a);
        row.value_gap = std::abs(v.at(next, row.model_next) - v.at(next, row.truth_next));
        row.prediction_error = emb.distance(row.model_next, row.truth_next);
        if (lip.infinite) {
          row.rhs = row.prediction_error > 0.0 ? kInf : 0.0;
        } else {
          row.rhs = lip.constant * row.prediction_error;
        }
        row.slack = row.rhs - row.value_gap;
        row.holds = row.value_gap <= row.rhs + 1e-12;
        report.all_hold = report.all_hold && row.holds;
        const double w = d.at(h, s, a);
        gap_sum += w * row.value_gap;
        tv_sum += w * (row.model_next == row.truth_next ? 0.0 : 2.0) * m.vmax();
        report.rows.push_back(std::move(row));
      }
    }
  }
  const double scale = t.episodic() ? 1.0 : t.gamma() / (1.0 - t.gamma());
  report.value_gap_term = scale * gap_sum;
  report.tv_term = scale * tv_sum;
  return report;
}

}  // namespace mbrl
