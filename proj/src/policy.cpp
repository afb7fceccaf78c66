#include "mbrl/policy.hpp"

#include <cmath>
#include <set>

#include "mbrl/error.hpp"
#include "mbrl/mdp.hpp"

namespace mbrl {

// Encoder

Encoder::Encoder(std::vector<LayerMap> layers) : layers_(std::move(layers)) {
  latents_.reserve(layers_.size());
  for (const auto& layer : layers_) {
    std::set<LatentId> image;
    for (const auto& [s, x] : layer) image.insert(x);
    latents_.emplace_back(image.begin(), image.end());
  }
}

Encoder Encoder::identity(const Mdp& m) {
  std::vector<LayerMap> layers(m.num_layers());
  for (std::size_t h = 0; h < m.num_layers(); ++h) {
    for (const auto& s : m.states(h)) layers[h].emplace(s, s);
  }
  return Encoder(std::move(layers));
}

Encoder Encoder::constant(const Mdp& m, const LatentId& label) {
  std::vector<LayerMap> layers(m.num_layers());
  for (std::size_t h = 0; h < m.num_layers(); ++h) {
    for (const auto& s : m.states(h)) layers[h].emplace(s, label);
  }
  return Encoder(std::move(layers));
}

std::size_t Encoder::num_latents() const {
  std::size_t n = 0;
  for (const auto& x : latents_) n += x.size();
  return n;
}

std::optional<LatentId> Encoder::try_encode(std::size_t layer, std::string_view s) const {
  if (layer >= layers_.size()) return std::nullopt;
  auto it = layers_[layer].find(s);
  if (it == layers_[layer].end()) return std::nullopt;
  return it->second;
}

const LatentId& Encoder::encode(std::size_t layer, std::string_view s) const {
  if (layer < layers_.size()) {
    auto it = layers_[layer].find(s);
    if (it != layers_[layer].end()) return it->second;
  }
  throw InputError("encoder does not map state '" + std::string(s) + "' in layer " +
                   std::to_string(layer));
}

std::vector<StateId> Encoder::cell(std::size_t h, std::string_view x) const {
  std::vector<StateId> out;
  for (const auto& [s, label] : layers_.at(h)) {
    if (label == x) out.push_back(s);
  }
  return out;
}

Encoder Encoder::canonical() const {
  std::vector<LayerMap> layers(layers_.size());
  for (std::size_t h = 0; h < layers_.size(); ++h) {
    std::map<LatentId, std::string> relabel;
    for (const auto& [s, x] : layers_[h]) {
      auto it = relabel.find(x);
      if (it == relabel.end()) it = relabel.emplace(x, std::to_string(relabel.size())).first;
      layers[h].emplace(s, it->second);
    }
  }
  return Encoder(std::move(layers));
}

// Policy

Policy Policy::uniform() { return Policy(Uniform{}); }
Policy Policy::constant(ActionIndex a) { return Policy(Constant{a}); }
Policy Policy::deterministic(ActionTable table) { return Policy(std::move(table)); }

Policy Policy::tabular(ProbTable table) {
  for (std::size_t h = 0; h < table.size(); ++h) {
    for (const auto& [s, p] : table[h]) {
      double sum = 0.0;
      for (double x : p) {
        if (!(x >= 0.0)) throw InputError("negative action probability at state '" + s + "'");
        sum += x;
      }
      if (std::abs(sum - 1.0) > kDistributionTolerance) {
        throw InputError("action probabilities at state '" + s + "' do not sum to 1");
      }
    }
  }
  return Policy(std::move(table));
}

Policy Policy::lifted(Encoder phi, Policy latent_policy) {
  return Policy(Lifted{std::move(phi), std::make_shared<const Policy>(std::move(latent_policy))});
}

PolicyKind Policy::kind() const {
  switch (v_.index()) {
    case 0: return PolicyKind::kUniform;
    case 1: return PolicyKind::kConstant;
    case 2: return PolicyKind::kDeterministic;
    case 3: return PolicyKind::kTabular;
    default: return PolicyKind::kLatent;
  }
}

namespace {

[[noreturn]] void undefined(std::size_t layer, std::string_view s) {
  throw InputError("policy is undefined at state '" + std::string(s) + "' in layer " +
                   std::to_string(layer));
}

}  // namespace

std::vector<double> Policy::probs(std::size_t layer, std::string_view s,
                                  std::size_t num_actions) const {
  if (std::holds_alternative<Uniform>(v_)) {
    return std::vector<double>(num_actions, 1.0 / static_cast<double>(num_actions));
  }
  if (const auto* c = std::get_if<Constant>(&v_)) {
    if (c->action >= num_actions) throw InputError("constant policy action out of range");
    std::vector<double> p(num_actions, 0.0);
    p[c->action] = 1.0;
    return p;
  }
  if (const auto* t = std::get_if<ActionTable>(&v_)) {
    if (layer >= t->size()) undefined(layer, s);
    auto it = (*t)[layer].find(s);
    if (it == (*t)[layer].end()) undefined(layer, s);
    if (it->second >= num_actions) throw InputError("policy action out of range");
    std::vector<double> p(num_actions, 0.0);
    p[it->second] = 1.0;
    return p;
  }
  if (const auto* t = std::get_if<ProbTable>(&v_)) {
    if (layer >= t->size()) undefined(layer, s);
    auto it = (*t)[layer].find(s);
    if (it == (*t)[layer].end()) undefined(layer, s);
    if (it->second.size() != num_actions) throw InputError("policy row has wrong action count");
    return it->second;
  }
  const auto& lifted = std::get<Lifted>(v_);
  return lifted.inner->probs(layer, lifted.phi.encode(layer, s), num_actions);
}

std::string Policy::describe() const {
  switch (kind()) {
    case PolicyKind::kUniform: return "uniform";
    case PolicyKind::kConstant: return "constant:" + std::to_string(std::get<Constant>(v_).action);
    case PolicyKind::kDeterministic: return "deterministic";
    case PolicyKind::kTabular: return "tabular";
    case PolicyKind::kLatent: return "lifted(" + std::get<Lifted>(v_).inner->describe() + ")";
  }
  return "unknown";
}

const Policy::ActionTable* Policy::actions_table() const { return std::get_if<ActionTable>(&v_); }
const Policy::ProbTable* Policy::probs_table() const { return std::get_if<ProbTable>(&v_); }

ActionIndex Policy::constant_action() const {
  if (const auto* c = std::get_if<Constant>(&v_)) return c->action;
  throw InputError("policy is not constant");
}

const Encoder* Policy::encoder() const {
  const auto* l = std::get_if<Lifted>(&v_);
  return l ? &l->phi : nullptr;
}

const Policy* Policy::inner() const {
  const auto* l = std::get_if<Lifted>(&v_);
  return l ? l->inner.get() : nullptr;
}

}  // namespace mbrl
