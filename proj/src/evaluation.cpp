#include "mbrl/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "mbrl/error.hpp"

namespace mbrl {

// Occupancy

Occupancy::Occupancy(HorizonKind kind, std::size_t num_actions, std::vector<LayerWeights> layers,
                     bool normalized, double truncation_error)
    : kind_(kind),
      num_actions_(num_actions),
      layers_(std::move(layers)),
      normalized_(normalized),
      truncation_error_(truncation_error) {
  for (const auto& layer : layers_) {
    for (const auto& [s, w] : layer) {
      if (w.size() != num_actions_) throw InputError("occupancy row for '" + s + "' has wrong size");
    }
  }
}

Occupancy Occupancy::uniform(const Mdp& m) {
  std::vector<LayerWeights> layers(m.decision_layers());
  for (std::size_t h = 0; h < m.decision_layers(); ++h) {
    const auto states = m.states(h);
    const double w = 1.0 / static_cast<double>(states.size() * m.num_actions());
    for (const auto& s : states) layers[h].emplace(s, std::vector<double>(m.num_actions(), w));
  }
  return Occupancy(m.kind(), m.num_actions(), std::move(layers), true);
}

double Occupancy::at(std::size_t h, std::string_view s, ActionIndex a) const {
  if (h >= layers_.size()) return 0.0;
  auto it = layers_[h].find(s);
  return it == layers_[h].end() ? 0.0 : it->second.at(a);
}

double Occupancy::state_mass(std::size_t h, std::string_view s) const {
  if (h >= layers_.size()) return 0.0;
  auto it = layers_[h].find(s);
  if (it == layers_[h].end()) return 0.0;
  double sum = 0.0;
  for (double w : it->second) sum += w;
  return sum;
}

double Occupancy::layer_mass(std::size_t h) const {
  double sum = 0.0;
  for (const auto& [s, w] : layers_.at(h)) {
    for (double x : w) sum += x;
  }
  return sum;
}

void Occupancy::check_normalized() const {
  for (std::size_t h = 0; h < layers_.size(); ++h) {
    for (const auto& [s, w] : layers_[h]) {
      for (double x : w) {
        if (!(x >= 0.0)) throw InputError("negative occupancy weight at '" + s + "'");
      }
    }
    const double mass = layer_mass(h);
    if (std::abs(mass - 1.0) > kDistributionTolerance) {
      throw InputError("occupancy layer " + std::to_string(h) + " has mass " +
                       std::to_string(mass));
    }
  }
}

double ValueFunction::at(std::size_t layer, std::string_view s) const {
  auto it = layers.at(layer).find(s);
  if (it == layers.at(layer).end()) {
    throw InputError("no value for state '" + std::string(s) + "' in layer " +
                     std::to_string(layer));
  }
  return it->second;
}

namespace {

// Memoized backward induction for episodic MDPs; only visits states reached
// through actions with positive probability.
class EpisodicEvaluator {
 public:
  EpisodicEvaluator(const Mdp& m, const Policy& pi) : m_(m), pi_(pi), memo_(m.num_layers()) {}

  double value(std::size_t layer, const StateId& s) {
    if (m_.terminal(layer)) return 0.0;
    auto it = memo_[layer].find(s);
    if (it != memo_[layer].end()) return it->second;
    const auto probs = pi_.probs(layer, s, m_.num_actions());
    double v = 0.0;
    for (ActionIndex a = 0; a < m_.num_actions(); ++a) {
      if (probs[a] == 0.0) continue;
      v += probs[a] * q_value(layer, s, a);
    }
    memo_[layer].emplace(s, v);
    return v;
  }

  double q_value(std::size_t layer, const StateId& s, ActionIndex a) {
    const Distribution d = m_.next(layer, s, a);
    double future = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d.probs[i] == 0.0) continue;
      future += d.probs[i] * value(layer + 1, d.support[i]);
    }
    return m_.reward(layer, s, a) + future;
  }

 private:
  const Mdp& m_;
  const Policy& pi_;
  std::vector<std::unordered_map<StateId, double>> memo_;
};

struct IndexedRow {
  std::vector<std::size_t> next;
  std::vector<double> probs;
  double reward = 0.0;
};

// Discounted MDP flattened onto state indices.
struct IndexedMdp {
  std::vector<StateId> states;
  std::unordered_map<StateId, std::size_t> index;
  std::vector<std::vector<IndexedRow>> rows;  // [state][action]

  explicit IndexedMdp(const Mdp& m) : states(m.states(0)) {
    for (std::size_t i = 0; i < states.size(); ++i) index.emplace(states[i], i);
    rows.resize(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
      for (ActionIndex a = 0; a < m.num_actions(); ++a) {
        const Distribution d = m.next(0, states[i], a);
        IndexedRow row;
        row.reward = m.reward(0, states[i], a);
        for (std::size_t k = 0; k < d.size(); ++k) {
          auto it = index.find(d.support[k]);
          if (it == index.end()) throw InputError("next state '" + d.support[k] + "' is unknown");
          row.next.push_back(it->second);
          row.probs.push_back(d.probs[k]);
        }
        rows[i].push_back(std::move(row));
      }
    }
  }

  double backup(std::size_t i, ActionIndex a, const std::vector<double>& v, double gamma) const {
    const auto& row = rows[i][a];
    double future = 0.0;
    for (std::size_t k = 0; k < row.next.size(); ++k) future += row.probs[k] * v[row.next[k]];
    return row.reward + gamma * future;
  }
};

// Stop once the contraction bound gamma/(1-gamma)*|v_k - v_{k-1}| is below the
// tolerance, i.e. the iterate is within kBellmanTolerance of the fixed point.
bool close_enough(double diff, double gamma) {
  if (gamma == 0.0) return true;
  return diff * gamma / (1.0 - gamma) < kBellmanTolerance;
}

ValueFunction discounted_values(const Mdp& m, const Policy& pi) {
  const IndexedMdp g(m);
  const std::size_t n = g.states.size();
  std::vector<std::vector<double>> probs(n);
  for (std::size_t i = 0; i < n; ++i) probs[i] = pi.probs(0, g.states[i], m.num_actions());
  std::vector<double> v(n, 0.0), next(n, 0.0);
  ValueFunction out;
  out.converged = false;
  for (std::size_t it = 1; it <= kMaxIterations; ++it) {
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double x = 0.0;
      for (ActionIndex a = 0; a < m.num_actions(); ++a) {
        if (probs[i][a] == 0.0) continue;
        x += probs[i][a] * g.backup(i, a, v, m.gamma());
      }
      next[i] = x;
      diff = std::max(diff, std::abs(x - v[i]));
    }
    v.swap(next);
    out.iterations = it;
    if (close_enough(diff, m.gamma())) {
      out.converged = true;
      break;
    }
  }
  out.layers.resize(1);
  for (std::size_t i = 0; i < n; ++i) out.layers[0].emplace(g.states[i], v[i]);
  return out;
}

}  // namespace

ValueFunction value_function(const Mdp& m, const Policy& pi) {
  if (!m.episodic()) return discounted_values(m, pi);
  EpisodicEvaluator eval(m, pi);
  ValueFunction out;
  out.layers.resize(m.num_layers());
  for (std::size_t h = m.num_layers(); h-- > 0;) {
    for (const auto& s : m.states(h)) out.layers[h].emplace(s, eval.value(h, s));
  }
  return out;
}

double expected_return(const Mdp& m, const Policy& pi) {
  if (m.episodic()) {
    EpisodicEvaluator eval(m, pi);
    return eval.value(0, m.initial());
  }
  const ValueFunction v = discounted_values(m, pi);
  if (!v.converged) throw ConvergenceError("policy evaluation did not converge");
  return v.at(0, m.initial());
}

Occupancy occupancy(const Mdp& m, const Policy& pi) {
  const std::size_t na = m.num_actions();
  if (m.episodic()) {
    std::vector<Occupancy::LayerWeights> layers(m.decision_layers());
    std::map<StateId, double, std::less<>> mass{{m.initial(), 1.0}};
    for (std::size_t h = 0; h < m.decision_layers(); ++h) {
      std::map<StateId, double, std::less<>> next_mass;
      for (const auto& [s, w] : mass) {
        const auto probs = pi.probs(h, s, na);
        std::vector<double> row(na, 0.0);
        for (ActionIndex a = 0; a < na; ++a) {
          if (probs[a] == 0.0) continue;
          row[a] = w * probs[a];
          const Distribution d = m.next(h, s, a);
          for (std::size_t k = 0; k < d.size(); ++k) {
            if (d.probs[k] == 0.0) continue;
            next_mass[d.support[k]] += row[a] * d.probs[k];
          }
        }
        layers[h].emplace(s, std::move(row));
      }
      mass = std::move(next_mass);
    }
    return Occupancy(m.kind(), na, std::move(layers), true);
  }

  const IndexedMdp g(m);
  const std::size_t n = g.states.size();
  std::vector<std::vector<double>> probs(n);
  for (std::size_t i = 0; i < n; ++i) probs[i] = pi.probs(0, g.states[i], na);
  std::vector<double> state_mass(n, 0.0), next(n, 0.0);
  std::vector<std::vector<double>> d(n, std::vector<double>(na, 0.0));
  state_mass[g.index.at(m.initial())] = 1.0;
  double weight = 1.0 - m.gamma();
  double tail = 1.0;
  for (std::size_t t = 0; t < kMaxIterations && tail >= kOccupancyTailMass; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (state_mass[i] == 0.0) continue;
      for (ActionIndex a = 0; a < na; ++a) {
        if (probs[i][a] == 0.0) continue;
        const double w = state_mass[i] * probs[i][a];
        d[i][a] += weight * w;
        const auto& row = g.rows[i][a];
        for (std::size_t k = 0; k < row.next.size(); ++k) next[row.next[k]] += w * row.probs[k];
      }
    }
    state_mass.swap(next);
    weight *= m.gamma();
    tail *= m.gamma();
  }
  double total = 0.0;
  for (const auto& row : d) {
    for (double x : row) total += x;
  }
  Occupancy::LayerWeights layer;
  for (std::size_t i = 0; i < n; ++i) {
    bool any = false;
    for (auto& x : d[i]) {
      x /= total;
      any = any || x > 0.0;
    }
    if (any) layer.emplace(g.states[i], std::move(d[i]));
  }
  return Occupancy(m.kind(), na, {std::move(layer)}, true, tail);
}

namespace {

// Lowest index wins unless a later action is better by more than rounding.
ActionIndex greedy(const std::vector<double>& q) {
  ActionIndex best = 0;
  for (ActionIndex a = 1; a < q.size(); ++a) {
    if (q[a] > q[best] + 1e-12 * std::max(1.0, std::abs(q[best]))) best = a;
  }
  return best;
}

}  // namespace

PlanResult plan_optimal(const Mdp& m) {
  const std::size_t na = m.num_actions();
  PlanResult out;
  Policy::ActionTable table(m.decision_layers());
  if (m.episodic()) {
    out.values.layers.resize(m.num_layers());
    for (const auto& s : m.states(m.horizon())) out.values.layers[m.horizon()].emplace(s, 0.0);
    for (std::size_t h = m.horizon(); h-- > 0;) {
      for (const auto& s : m.states(h)) {
        std::vector<double> q(na, 0.0);
        for (ActionIndex a = 0; a < na; ++a) {
          const Distribution d = m.next(h, s, a);
          double future = 0.0;
          for (std::size_t k = 0; k < d.size(); ++k) {
            if (d.probs[k] == 0.0) continue;
            future += d.probs[k] * out.values.at(h + 1, d.support[k]);
          }
          q[a] = m.reward(h, s, a) + future;
        }
        const ActionIndex a = greedy(q);
        table[h].emplace(s, a);
        out.values.layers[h].emplace(s, q[a]);
      }
    }
    out.policy = Policy::deterministic(std::move(table));
    return out;
  }

  const IndexedMdp g(m);
  const std::size_t n = g.states.size();
  std::vector<double> v(n, 0.0), next(n, 0.0);
  out.converged = false;
  for (std::size_t it = 1; it <= kMaxIterations; ++it) {
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = g.backup(i, 0, v, m.gamma());
      for (ActionIndex a = 1; a < na; ++a) best = std::max(best, g.backup(i, a, v, m.gamma()));
      next[i] = best;
      diff = std::max(diff, std::abs(best - v[i]));
    }
    v.swap(next);
    out.values.iterations = it;
    if (close_enough(diff, m.gamma())) {
      out.converged = true;
      break;
    }
  }
  out.values.converged = out.converged;
  out.values.layers.resize(1);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> q(na);
    for (ActionIndex a = 0; a < na; ++a) q[a] = g.backup(i, a, v, m.gamma());
    table[0].emplace(g.states[i], greedy(q));
    out.values.layers[0].emplace(g.states[i], v[i]);
  }
  out.policy = Policy::deterministic(std::move(table));
  return out;
}

}  // namespace mbrl
