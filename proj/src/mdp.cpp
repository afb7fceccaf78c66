#include "mbrl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mbrl/error.hpp"

namespace mbrl {
namespace {

class TableOracle final : public TransitionOracle {
 public:
  explicit TableOracle(MdpTables tables) : tables_(std::move(tables)) {
    index_.resize(tables_.layers.size());
    for (std::size_t h = 0; h < tables_.layers.size(); ++h) {
      const auto& layer = tables_.layers[h];
      for (std::size_t i = 0; i < layer.states.size(); ++i) {
        if (!index_[h].emplace(layer.states[i], i).second) {
          throw InputError("duplicate state '" + layer.states[i] + "' in layer " +
                           std::to_string(h));
        }
      }
    }
  }

  bool contains(std::size_t layer, std::string_view s) const override {
    return layer < index_.size() && index_[layer].count(std::string(s)) > 0;
  }

  Distribution next(std::size_t layer, std::string_view s, ActionIndex a) const override {
    return tables_.layers[layer].transitions[row(layer, s)][a];
  }

  double reward(std::size_t layer, std::string_view s, ActionIndex a) const override {
    return tables_.layers[layer].rewards[row(layer, s)][a];
  }

  std::vector<StateId> enumerate(std::size_t layer) const override {
    return tables_.layers[layer].states;
  }

  bool procedural() const override { return false; }

 private:
  std::size_t row(std::size_t layer, std::string_view s) const {
    auto it = index_[layer].find(std::string(s));
    if (it == index_[layer].end()) {
      throw InputError("unknown state '" + std::string(s) + "' in layer " + std::to_string(layer));
    }
    return it->second;
  }

  MdpTables tables_;
  std::vector<std::unordered_map<std::string, std::size_t>> index_;
};

void check_header(const std::vector<std::string>& actions, double rmax) {
  if (actions.empty()) throw InputError("MDP needs at least one action");
  for (std::size_t i = 0; i < actions.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (actions[i] == actions[j]) throw InputError("duplicate action '" + actions[i] + "'");
    }
  }
  if (!(rmax > 0.0)) throw InputError("rmax must be positive");
}

}  // namespace

Mdp Mdp::episodic(std::string name, std::size_t horizon, std::vector<std::string> actions,
                  StateId initial, double rmax, std::shared_ptr<const TransitionOracle> oracle) {
  if (horizon == 0) throw InputError("episodic horizon must be positive");
  check_header(actions, rmax);
  Mdp m;
  m.name_ = std::move(name);
  m.kind_ = HorizonKind::kEpisodic;
  m.horizon_ = horizon;
  m.actions_ = std::move(actions);
  m.initial_ = std::move(initial);
  m.rmax_ = rmax;
  m.oracle_ = std::move(oracle);
  return m;
}

Mdp Mdp::discounted(std::string name, double gamma, std::vector<std::string> actions,
                    StateId initial, double rmax, std::shared_ptr<const TransitionOracle> oracle) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InputError("gamma must lie in [0,1)");
  check_header(actions, rmax);
  Mdp m;
  m.name_ = std::move(name);
  m.kind_ = HorizonKind::kDiscounted;
  m.gamma_ = gamma;
  m.actions_ = std::move(actions);
  m.initial_ = std::move(initial);
  m.rmax_ = rmax;
  m.oracle_ = std::move(oracle);
  return m;
}

Mdp Mdp::from_tables(MdpTables t) {
  const bool episodic = t.kind == HorizonKind::kEpisodic;
  const std::size_t expected_layers = episodic ? t.horizon + 1 : 1;
  if (t.layers.size() != expected_layers) {
    throw InputError("expected " + std::to_string(expected_layers) + " layers, got " +
                     std::to_string(t.layers.size()));
  }
  const std::size_t decision = episodic ? t.horizon : 1;
  for (std::size_t h = 0; h < t.layers.size(); ++h) {
    auto& layer = t.layers[h];
    if (h < decision) {
      if (layer.transitions.size() != layer.states.size() ||
          layer.rewards.size() != layer.states.size()) {
        throw InputError("layer " + std::to_string(h) + " has rows for " +
                         std::to_string(layer.transitions.size()) + " states but lists " +
                         std::to_string(layer.states.size()));
      }
      for (std::size_t i = 0; i < layer.states.size(); ++i) {
        if (layer.transitions[i].size() != t.actions.size() ||
            layer.rewards[i].size() != t.actions.size()) {
          throw InputError("state '" + layer.states[i] + "' does not define every action");
        }
      }
    } else {
      layer.transitions.clear();
      layer.rewards.clear();
    }
  }
  auto name = t.name;
  auto actions = t.actions;
  auto initial = t.initial;
  const double rmax = t.rmax;
  const std::size_t horizon = t.horizon;
  const double gamma = t.gamma;
  auto oracle = std::make_shared<const TableOracle>(std::move(t));
  if (!oracle->contains(0, initial)) throw InputError("initial state '" + initial + "' not in layer 0");
  return episodic ? Mdp::episodic(std::move(name), horizon, std::move(actions), std::move(initial),
                                  rmax, std::move(oracle))
                  : Mdp::discounted(std::move(name), gamma, std::move(actions),
                                    std::move(initial), rmax, std::move(oracle));
}

double Mdp::vmax() const {
  return episodic() ? rmax_ * static_cast<double>(horizon_) : rmax_ / (1.0 - gamma_);
}

ActionIndex Mdp::action_index(std::string_view name) const {
  auto it = std::find(actions_.begin(), actions_.end(), name);
  if (it == actions_.end()) throw InputError("unknown action '" + std::string(name) + "'");
  return static_cast<ActionIndex>(it - actions_.begin());
}

void Mdp::check_query(std::size_t layer, std::string_view s, ActionIndex a) const {
  if (layer >= decision_layers()) {
    throw InputError("no actions are taken in layer " + std::to_string(layer));
  }
  if (a >= actions_.size()) throw InputError("action index out of range");
  if (!oracle_->contains(layer, s)) {
    throw InputError("state '" + std::string(s) + "' is not in layer " + std::to_string(layer) +
                     " of " + name_);
  }
}

bool Mdp::contains(std::size_t layer, std::string_view s) const {
  return layer < num_layers() && oracle_->contains(layer, s);
}

Distribution Mdp::next(std::size_t layer, std::string_view s, ActionIndex a) const {
  check_query(layer, s, a);
  return oracle_->next(layer, s, a);
}

double Mdp::reward(std::size_t layer, std::string_view s, ActionIndex a) const {
  check_query(layer, s, a);
  return oracle_->reward(layer, s, a);
}

std::vector<StateId> Mdp::states(std::size_t layer) const {
  if (layer >= num_layers()) throw InputError("layer out of range");
  return oracle_->enumerate(layer);
}

MdpTables tabulate(const Mdp& m) {
  MdpTables t;
  t.name = m.name();
  t.kind = m.kind();
  t.horizon = m.horizon();
  t.gamma = m.gamma();
  t.actions = m.actions();
  t.initial = m.initial();
  t.rmax = m.rmax();
  t.layers.resize(m.num_layers());
  for (std::size_t h = 0; h < m.num_layers(); ++h) {
    auto& layer = t.layers[h];
    layer.states = m.states(h);
    if (m.terminal(h)) continue;
    for (const auto& s : layer.states) {
      std::vector<Distribution> row;
      std::vector<double> rewards;
      for (ActionIndex a = 0; a < m.num_actions(); ++a) {
        row.push_back(m.next(h, s, a));
        rewards.push_back(m.reward(h, s, a));
      }
      layer.transitions.push_back(std::move(row));
      layer.rewards.push_back(std::move(rewards));
    }
  }
  return t;
}

std::vector<Violation> validate(const Mdp& m) {
  std::vector<Violation> out;
  if (!m.contains(0, m.initial())) {
    out.push_back({0, m.initial(), "", "initial state is not in layer 0"});
    return out;
  }
  for (std::size_t h = 0; h < m.decision_layers(); ++h) {
    const std::size_t next_layer = m.next_layer(h);
    for (const auto& s : m.states(h)) {
      for (ActionIndex a = 0; a < m.num_actions(); ++a) {
        const auto& action = m.actions()[a];
        const Distribution d = m.next(h, s, a);
        if (auto why = d.check(); !why.empty()) out.push_back({h, s, action, why});
        for (const auto& sp : d.support) {
          if (!m.contains(next_layer, sp)) {
            out.push_back({h, s, action,
                           "next state '" + sp + "' is not in layer " + std::to_string(next_layer)});
          }
        }
        const double r = m.reward(h, s, a);
        if (!(r >= 0.0 && r <= m.rmax())) {
          std::ostringstream why;
          why << "reward " << r << " outside [0, " << m.rmax() << "]";
          out.push_back({h, s, action, why.str()});
        }
        if (m.procedural() && (m.next(h, s, a) != d || m.reward(h, s, a) != r)) {
          out.push_back({h, s, action, "oracle answers differ between repeated queries"});
        }
      }
    }
  }
  return out;
}

}  // namespace mbrl
