#include "mbrl/abstraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "loss_detail.hpp"
#include "mbrl/error.hpp"
#include "mbrl/parallel.hpp"

namespace mbrl {

const Distribution& LatentModel::kernel(std::size_t layer, std::string_view x,
                                        ActionIndex a) const {
  if (layer < dynamics.size()) {
    auto it = dynamics[layer].find(x);
    if (it != dynamics[layer].end()) return it->second.at(a);
  }
  throw InputError("latent model has no dynamics for '" + std::string(x) + "' in layer " +
                   std::to_string(layer));
}

double LatentModel::reward(std::size_t layer, std::string_view x, ActionIndex a) const {
  if (layer < rewards.size()) {
    auto it = rewards[layer].find(x);
    if (it != rewards[layer].end()) return it->second.at(a);
  }
  throw InputError("latent model has no reward for '" + std::string(x) + "' in layer " +
                   std::to_string(layer));
}

Mdp latent_mdp(const LatentModel& lm, const Mdp& reference) {
  MdpTables t;
  t.name = reference.name() + "/latent";
  t.kind = reference.kind();
  t.horizon = reference.horizon();
  t.gamma = reference.gamma();
  t.actions = reference.actions();
  t.rmax = reference.rmax();
  t.initial = lm.encoder.encode(0, reference.initial());
  t.layers.resize(reference.num_layers());
  for (std::size_t h = 0; h < reference.num_layers(); ++h) {
    auto& layer = t.layers[h];
    layer.states = lm.encoder.latents(h);
    if (reference.terminal(h)) continue;
    for (const auto& x : layer.states) {
      std::vector<Distribution> row;
      std::vector<double> rewards;
      for (ActionIndex a = 0; a < reference.num_actions(); ++a) {
        row.push_back(lm.kernel(h, x, a));
        rewards.push_back(lm.reward(h, x, a));
      }
      layer.transitions.push_back(std::move(row));
      layer.rewards.push_back(std::move(rewards));
    }
  }
  return Mdp::from_tables(std::move(t));
}

void require_total(const Encoder& phi, const Mdp& m) {
  if (phi.num_layers() != m.num_layers()) {
    throw InputError("encoder has " + std::to_string(phi.num_layers()) + " layers, MDP has " +
                     std::to_string(m.num_layers()));
  }
  for (std::size_t h = 0; h < m.num_layers(); ++h) {
    for (const auto& s : m.states(h)) {
      if (!phi.try_encode(h, s)) {
        throw InputError("encoder does not map state '" + s + "' in layer " + std::to_string(h));
      }
    }
  }
}

Distribution induced_abstract_kernel(const Mdp& truth, const Encoder& phi, std::size_t layer,
                                     std::string_view s, ActionIndex a) {
  const Distribution d = truth.next(layer, s, a);
  const std::size_t next_layer = truth.next_layer(layer);
  const auto& latents = phi.latents(next_layer);
  std::vector<double> mass(latents.size(), 0.0);
  for (std::size_t k = 0; k < d.size(); ++k) {
    const LatentId& x = phi.encode(next_layer, d.support[k]);
    const auto it = std::lower_bound(latents.begin(), latents.end(), x);
    mass[static_cast<std::size_t>(it - latents.begin())] += d.probs[k];
  }
  Distribution out;
  for (std::size_t i = 0; i < latents.size(); ++i) {
    if (mass[i] == 0.0) continue;
    out.support.push_back(latents[i]);
    out.probs.push_back(mass[i]);
  }
  return out;
}

namespace {

bool same_kernel(const Distribution& p, const Distribution& q) {
  std::vector<double> pv, qv;
  align(p, q, pv, qv);
  for (std::size_t i = 0; i < pv.size(); ++i) {
    if (std::abs(pv[i] - qv[i]) > kBisimulationTolerance) return false;
  }
  return true;
}

}  // namespace

BisimulationResult bisimulation_check(const Mdp& truth, const Encoder& phi) {
  require_total(phi, truth);
  const std::size_t na = truth.num_actions();
  LatentModel lm;
  lm.encoder = phi;
  lm.dynamics.resize(truth.decision_layers());
  lm.rewards.resize(truth.decision_layers());
  BisimulationResult result;
  for (std::size_t h = 0; h < truth.decision_layers(); ++h) {
    for (const auto& x : phi.latents(h)) {
      const auto members = phi.cell(h, x);
      const StateId& rep = members.front();
      std::vector<Distribution> rep_kernels;
      std::vector<double> rep_rewards;
      for (ActionIndex a = 0; a < na; ++a) {
        rep_kernels.push_back(induced_abstract_kernel(truth, phi, h, rep, a));
        rep_rewards.push_back(truth.reward(h, rep, a));
      }
      for (std::size_t i = 1; i < members.size(); ++i) {
        for (ActionIndex a = 0; a < na; ++a) {
          if (std::abs(truth.reward(h, members[i], a) - rep_rewards[a]) > kBisimulationTolerance) {
            result.witness = BisimulationWitness{h, rep, members[i], a, "reward"};
            return result;
          }
          if (!same_kernel(induced_abstract_kernel(truth, phi, h, members[i], a), rep_kernels[a])) {
            result.witness = BisimulationWitness{h, rep, members[i], a, "kernel"};
            return result;
          }
        }
      }
      lm.dynamics[h].emplace(x, std::move(rep_kernels));
      lm.rewards[h].emplace(x, std::move(rep_rewards));
    }
  }
  result.is_bisimulation = true;
  result.induced = std::move(lm);
  return result;
}

LossReport latent_mle_loss(const LatentModel& lm, const Dataset& data) {
  const auto& phi = lm.encoder;
  LossReport out = detail::aggregate_transitions(
      data,
      [&](std::size_t h, const StateId& s, ActionIndex a,
          const StateId& next) -> std::optional<double> {
        const std::size_t next_layer = data.kind == DatasetKind::kTuples ? 0 : h + 1;
        const double p = lm.kernel(h, phi.encode(h, s), a).prob(phi.encode(next_layer, next));
        if (p <= 0.0) return std::nullopt;
        return -std::log(p);
      },
      "latent-mle");
  bool constant = true;
  for (std::size_t h = 0; h < phi.num_layers(); ++h) constant = constant && phi.latents(h).size() <= 1;
  if (constant) {
    out.warnings.push_back(
        "encoder maps every layer to a single latent; zero loss here is degenerate");
  }
  return out;
}

LossReport expected_latent_mle_loss(const LatentModel& lm, const Mdp& truth,
                                    const Occupancy& data_dist) {
  const auto& phi = lm.encoder;
  LossReport out;
  out.name = "expected-latent-mle";
  LossDecomposition parts;
  out.per_layer.assign(data_dist.num_layers(), 0.0);
  for (std::size_t h = 0; h < data_dist.num_layers(); ++h) {
    for (const auto& [s, weights] : data_dist.layer(h)) {
      const LatentId& x = phi.encode(h, s);
      for (ActionIndex a = 0; a < weights.size(); ++a) {
        const double w = weights[a];
        if (w == 0.0) continue;
        const Distribution pushforward = induced_abstract_kernel(truth, phi, h, s, a);
        const Distribution& model = lm.kernel(h, x, a);
        double ce = 0.0, ent = 0.0, kl = 0.0;
        for (std::size_t k = 0; k < pushforward.size(); ++k) {
          const double p = pushforward.probs[k];
          if (p == 0.0) continue;
          const double q = model.prob(pushforward.support[k]);
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
    const double inf = std::numeric_limits<double>::infinity();
    parts.excess = inf;
    out.loss = inf;
    out.warnings.push_back("latent model assigns zero probability to an observed latent");
  } else {
    for (double x : out.per_layer) out.loss += x;
  }
  out.decomposition = parts;
  return out;
}

LatentModel optimal_latent_dynamics(const Encoder& phi, const Mdp& truth,
                                    const Occupancy& data_dist) {
  require_total(phi, truth);
  const std::size_t na = truth.num_actions();
  LatentModel lm;
  lm.encoder = phi;
  lm.dynamics.resize(truth.decision_layers());
  lm.rewards.resize(truth.decision_layers());
  for (std::size_t h = 0; h < truth.decision_layers(); ++h) {
    const auto& next_latents = phi.latents(truth.next_layer(h));
    for (const auto& x : phi.latents(h)) {
      const auto members = phi.cell(h, x);
      std::vector<Distribution> rows;
      std::vector<double> rewards;
      bool flagged = false;
      for (ActionIndex a = 0; a < na; ++a) {
        std::vector<double> mix(next_latents.size(), 0.0);
        double total = 0.0, reward = 0.0, plain_reward = 0.0;
        for (const auto& s : members) {
          const double r = truth.reward(h, s, a);
          plain_reward += r;
          const double w = data_dist.at(h, s, a);
          if (w == 0.0) continue;
          total += w;
          reward += w * r;
          const Distribution pf = induced_abstract_kernel(truth, phi, h, s, a);
          for (std::size_t k = 0; k < pf.size(); ++k) {
            const auto it = std::lower_bound(next_latents.begin(), next_latents.end(),
                                             pf.support[k]);
            mix[static_cast<std::size_t>(it - next_latents.begin())] += w * pf.probs[k];
          }
        }
        Distribution row;
        if (total > 0.0) {
          for (std::size_t i = 0; i < next_latents.size(); ++i) {
            if (mix[i] == 0.0) continue;
            row.support.push_back(next_latents[i]);
            row.probs.push_back(mix[i] / total);
          }
          rewards.push_back(reward / total);
        } else {
          row = Distribution::uniform(next_latents);
          rewards.push_back(plain_reward / static_cast<double>(members.size()));
          flagged = true;
        }
        rows.push_back(std::move(row));
      }
      if (flagged) lm.zero_mass_cells.emplace_back(h, x);
      lm.dynamics[h].emplace(x, std::move(rows));
      lm.rewards[h].emplace(x, std::move(rewards));
    }
  }
  return lm;
}

std::string encoder_id(const Encoder& phi) {
  const Encoder c = phi.canonical();
  std::string id;
  for (std::size_t h = 0; h < c.num_layers(); ++h) {
    if (h > 0) id += '|';
    bool first = true;
    for (const auto& [s, x] : c.layer(h)) {
      if (!first) id += '.';
      id += x;
      first = false;
    }
  }
  return id;
}

namespace {

// Restricted growth strings over `n` states with at most `max_blocks` blocks;
// admissible(i, block_rep) says whether state i may join the block whose first
// member is block_rep.
void enumerate_partitions(std::size_t n, std::size_t max_blocks,
                          const std::function<bool(std::size_t, std::size_t)>& admissible,
                          std::vector<std::vector<std::size_t>>& out) {
  std::vector<std::size_t> labels(n, 0), reps;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == n) {
      out.push_back(labels);
      return;
    }
    for (std::size_t b = 0; b < reps.size(); ++b) {
      if (!admissible(i, reps[b])) continue;
      labels[i] = b;
      rec(i + 1);
    }
    if (reps.size() < max_blocks) {
      labels[i] = reps.size();
      reps.push_back(i);
      rec(i + 1);
      reps.pop_back();
    }
  };
  if (n == 0) {
    out.emplace_back();
    return;
  }
  rec(0);
}

}  // namespace

std::vector<EncoderCandidate> search_encoders(const Mdp& truth, const Occupancy& data_dist,
                                              std::size_t max_latents) {
  if (max_latents == 0) throw InputError("max_latents must be positive");
  const std::size_t na = truth.num_actions();
  std::vector<std::vector<StateId>> states(truth.num_layers());
  std::vector<std::vector<std::vector<std::size_t>>> partitions(truth.num_layers());
  std::size_t total = 1;
  for (std::size_t h = 0; h < truth.num_layers(); ++h) {
    states[h] = truth.states(h);
    std::sort(states[h].begin(), states[h].end());
    if (states[h].size() > kMaxSearchStates) {
      throw SizeError("encoder search supports at most " + std::to_string(kMaxSearchStates) +
                      " states per layer");
    }
    std::vector<std::vector<double>> rewards(states[h].size());
    if (!truth.terminal(h)) {
      for (std::size_t i = 0; i < states[h].size(); ++i) {
        for (ActionIndex a = 0; a < na; ++a) rewards[i].push_back(truth.reward(h, states[h][i], a));
      }
    }
    enumerate_partitions(
        states[h].size(), max_latents,
        [&](std::size_t i, std::size_t rep) {
          for (std::size_t a = 0; a < rewards[i].size(); ++a) {
            if (std::abs(rewards[i][a] - rewards[rep][a]) > kBisimulationTolerance) return false;
          }
          return true;
        },
        partitions[h]);
    if (partitions[h].empty()) return {};
    if (total > kMaxSearchEncoders / partitions[h].size()) {
      throw SizeError("encoder search would evaluate more than " +
                      std::to_string(kMaxSearchEncoders) + " encoders");
    }
    total *= partitions[h].size();
  }

  auto candidates = parallel_map(total, [&](std::size_t index) {
    std::vector<Encoder::LayerMap> layers(truth.num_layers());
    std::size_t rest = index;
    std::size_t num_latents = 0;
    // Layer 0 is the most significant digit, so index order is lexicographic.
    for (std::size_t h = truth.num_layers(); h-- > 0;) {
      const auto& labels = partitions[h][rest % partitions[h].size()];
      rest /= partitions[h].size();
      std::size_t blocks = 0;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        layers[h].emplace(states[h][i], std::to_string(labels[i]));
        blocks = std::max(blocks, labels[i] + 1);
      }
      num_latents += blocks;
    }
    EncoderCandidate c;
    c.encoder = Encoder(std::move(layers));
    c.id = encoder_id(c.encoder);
    c.num_latents = num_latents;
    const LatentModel lm = optimal_latent_dynamics(c.encoder, truth, data_dist);
    const LossReport r = expected_latent_mle_loss(lm, truth, data_dist);
    c.loss = r.loss;
    c.entropy = r.decomposition->entropy;
    c.excess = r.decomposition->excess;
    c.is_bisimulation = bisimulation_check(truth, c.encoder).is_bisimulation;
    return c;
  });
  // Losses are compared on a 1e-12 grid so that rounding noise cannot reorder
  // tied encoders.
  auto key = [](double loss) {
    return std::isfinite(loss) ? std::llround(loss * 1e12) : std::numeric_limits<long long>::max();
  };
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](const EncoderCandidate& a, const EncoderCandidate& b) {
                     return key(a.loss) < key(b.loss);
                   });
  return candidates;
}

Policy lift_policy(const Encoder& phi, const Policy& latent_pi) {
  if (const auto* table = latent_pi.actions_table()) {
    for (std::size_t h = 0; h < table->size(); ++h) {
      for (const auto& x : phi.latents(h)) {
        if (!(*table)[h].count(x)) throw InputError("latent policy is undefined at '" + x + "'");
      }
    }
  }
  if (const auto* table = latent_pi.probs_table()) {
    for (std::size_t h = 0; h < table->size(); ++h) {
      for (const auto& x : phi.latents(h)) {
        if (!(*table)[h].count(x)) throw InputError("latent policy is undefined at '" + x + "'");
      }
    }
  }
  return Policy::lifted(phi, latent_pi);
}

}  // namespace mbrl
