#include "oracles.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <stdexcept>

#include "mbrl/error.hpp"

namespace oracle {

std::size_t Raw::index(std::size_t h, const std::string& s) const {
  for (std::size_t i = 0; i < states[h].size(); ++i) {
    if (states[h][i] == s) return i;
  }
  throw std::out_of_range("no state " + s);
}

namespace {

Vec random_row(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec p(n, 0.0);
  double total = 0.0;
  while (total == 0.0) {
    for (std::size_t j = 0; j < n; ++j) {
      p[j] = u(rng) < 0.6 ? u(rng) + 0.05 : 0.0;
      total += p[j];
    }
  }
  for (auto& x : p) x /= total;
  return p;
}

double random_reward(std::mt19937_64& rng, bool quantized) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (quantized) return std::floor(u(rng) * 3.0) / 2.0;
  return u(rng);
}

}  // namespace

Raw random_raw(std::mt19937_64& rng, bool episodic, std::size_t max_states,
               std::size_t num_actions, std::size_t horizon, double gamma) {
  std::uniform_int_distribution<std::size_t> count(1, max_states);
  std::bernoulli_distribution coin(0.5);
  Raw m;
  m.episodic = episodic;
  m.horizon = episodic ? horizon : 0;
  m.gamma = gamma;
  m.num_actions = num_actions;
  const std::size_t layers = episodic ? horizon + 1 : 1;
  m.states.resize(layers);
  for (std::size_t h = 0; h < layers; ++h) {
    std::size_t n = count(rng);
    if (episodic && h == 0) n = std::min<std::size_t>(n, 2);
    if (!episodic) n = std::max<std::size_t>(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
      m.states[h].push_back(episodic ? "h" + std::to_string(h) + "s" + std::to_string(i)
                                     : "s" + std::to_string(i));
    }
  }
  const bool quantized = coin(rng);
  m.P.resize(m.decision());
  m.R.resize(m.decision());
  for (std::size_t h = 0; h < m.decision(); ++h) {
    const std::size_t n_next = m.states[m.next(h)].size();
    for (std::size_t i = 0; i < m.states[h].size(); ++i) {
      std::vector<Vec> rows;
      Vec rewards;
      for (std::size_t a = 0; a < num_actions; ++a) {
        rows.push_back(random_row(rng, n_next));
        rewards.push_back(random_reward(rng, quantized));
      }
      m.P[h].push_back(std::move(rows));
      m.R[h].push_back(std::move(rewards));
    }
  }
  return m;
}

Raw resample_kernels(const Raw& m, std::mt19937_64& rng) {
  Raw out = m;
  for (std::size_t h = 0; h < m.decision(); ++h) {
    for (auto& row : out.P[h]) {
      for (auto& p : row) p = random_row(rng, p.size());
    }
  }
  return out;
}

mbrl::Mdp to_mdp(const Raw& m, const std::string& name) {
  mbrl::MdpTables t;
  t.name = name;
  t.kind = m.episodic ? mbrl::HorizonKind::kEpisodic : mbrl::HorizonKind::kDiscounted;
  t.horizon = m.horizon;
  t.gamma = m.gamma;
  for (std::size_t a = 0; a < m.num_actions; ++a) t.actions.push_back("a" + std::to_string(a));
  t.initial = m.states[0][m.init];
  t.rmax = m.rmax;
  t.layers.resize(m.states.size());
  for (std::size_t h = 0; h < m.states.size(); ++h) {
    t.layers[h].states = m.states[h];
    if (h >= m.decision()) continue;
    const auto& next = m.states[m.next(h)];
    for (std::size_t i = 0; i < m.states[h].size(); ++i) {
      std::vector<mbrl::Distribution> row;
      for (std::size_t a = 0; a < m.num_actions; ++a) {
        mbrl::Distribution d;
        for (std::size_t j = 0; j < next.size(); ++j) {
          if (m.P[h][i][a][j] > 0.0) {
            d.support.push_back(next[j]);
            d.probs.push_back(m.P[h][i][a][j]);
          }
        }
        row.push_back(std::move(d));
      }
      t.layers[h].transitions.push_back(std::move(row));
      t.layers[h].rewards.push_back(m.R[h][i]);
    }
  }
  return mbrl::Mdp::from_tables(std::move(t));
}

Raw from_mdp(const mbrl::Mdp& mdp) {
  Raw m;
  m.episodic = mdp.episodic();
  m.horizon = mdp.horizon();
  m.gamma = mdp.gamma();
  m.num_actions = mdp.num_actions();
  m.rmax = mdp.rmax();
  for (std::size_t h = 0; h < mdp.num_layers(); ++h) m.states.push_back(mdp.states(h));
  m.init = m.index(0, mdp.initial());
  m.P.resize(m.decision());
  m.R.resize(m.decision());
  for (std::size_t h = 0; h < m.decision(); ++h) {
    const std::size_t nh = m.next(h);
    for (const auto& s : m.states[h]) {
      std::vector<Vec> rows;
      Vec rewards;
      for (std::size_t a = 0; a < m.num_actions; ++a) {
        Vec p(m.states[nh].size(), 0.0);
        const auto d = mdp.next(h, s, a);
        for (std::size_t k = 0; k < d.size(); ++k) p[m.index(nh, d.support[k])] += d.probs[k];
        rows.push_back(std::move(p));
        rewards.push_back(mdp.reward(h, s, a));
      }
      m.P[h].push_back(std::move(rows));
      m.R[h].push_back(std::move(rewards));
    }
  }
  return m;
}

PolicyMatrix random_policy(const Raw& m, std::mt19937_64& rng, bool deterministic) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, m.num_actions - 1);
  PolicyMatrix pi(m.decision());
  for (std::size_t h = 0; h < m.decision(); ++h) {
    for (std::size_t i = 0; i < m.states[h].size(); ++i) {
      Vec p(m.num_actions, 0.0);
      if (deterministic) {
        p[pick(rng)] = 1.0;
      } else {
        double total = 0.0;
        for (auto& x : p) total += (x = u(rng) + 0.01);
        for (auto& x : p) x /= total;
      }
      pi[h].push_back(std::move(p));
    }
  }
  return pi;
}

PolicyMatrix uniform_policy(const Raw& m) {
  PolicyMatrix pi(m.decision());
  for (std::size_t h = 0; h < m.decision(); ++h) {
    pi[h].assign(m.states[h].size(), Vec(m.num_actions, 1.0 / static_cast<double>(m.num_actions)));
  }
  return pi;
}

mbrl::Policy to_policy(const Raw& m, const PolicyMatrix& pi) {
  mbrl::Policy::ProbTable table(m.decision());
  for (std::size_t h = 0; h < m.decision(); ++h) {
    for (std::size_t i = 0; i < m.states[h].size(); ++i) table[h][m.states[h][i]] = pi[h][i];
  }
  return mbrl::Policy::tabular(std::move(table));
}

std::vector<Vec> values(const Raw& m, const PolicyMatrix& pi) {
  if (m.episodic) {
    std::vector<Vec> v(m.states.size());
    v[m.horizon].assign(m.states[m.horizon].size(), 0.0);
    for (std::size_t h = m.horizon; h-- > 0;) {
      v[h].assign(m.states[h].size(), 0.0);
      for (std::size_t i = 0; i < m.states[h].size(); ++i) {
        for (std::size_t a = 0; a < m.num_actions; ++a) {
          double q = m.R[h][i][a];
          for (std::size_t j = 0; j < v[h + 1].size(); ++j) q += m.P[h][i][a][j] * v[h + 1][j];
          v[h][i] += pi[h][i][a] * q;
        }
      }
    }
    return v;
  }
  const std::size_t n = m.states[0].size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < m.num_actions; ++a) {
      r(i) += pi[0][i][a] * m.R[0][i][a];
      for (std::size_t j = 0; j < n; ++j) A(i, j) -= m.gamma * pi[0][i][a] * m.P[0][i][a][j];
    }
  }
  const Eigen::VectorXd v = A.partialPivLu().solve(r);
  return {Vec(v.data(), v.data() + n)};
}

std::vector<std::vector<Vec>> occupancy(const Raw& m, const PolicyMatrix& pi) {
  std::vector<std::vector<Vec>> d(m.decision());
  if (m.episodic) {
    Vec mu(m.states[0].size(), 0.0);
    mu[m.init] = 1.0;
    for (std::size_t h = 0; h < m.horizon; ++h) {
      Vec next(m.states[h + 1].size(), 0.0);
      for (std::size_t i = 0; i < mu.size(); ++i) {
        Vec row(m.num_actions, 0.0);
        for (std::size_t a = 0; a < m.num_actions; ++a) {
          row[a] = mu[i] * pi[h][i][a];
          for (std::size_t j = 0; j < next.size(); ++j) next[j] += row[a] * m.P[h][i][a][j];
        }
        d[h].push_back(std::move(row));
      }
      mu = std::move(next);
    }
    return d;
  }
  const std::size_t n = m.states[0].size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < m.num_actions; ++a) {
      for (std::size_t j = 0; j < n; ++j) A(i, j) -= m.gamma * pi[0][i][a] * m.P[0][i][a][j];
    }
  }
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e(m.init) = 1.0 - m.gamma;
  const Eigen::VectorXd mu = A.transpose().partialPivLu().solve(e);
  for (std::size_t i = 0; i < n; ++i) {
    Vec row(m.num_actions);
    for (std::size_t a = 0; a < m.num_actions; ++a) row[a] = mu(i) * pi[0][i][a];
    d[0].push_back(std::move(row));
  }
  return d;
}

std::vector<Vec> brute_force_optimal(const Raw& m) {
  std::vector<std::pair<std::size_t, std::size_t>> slots;
  for (std::size_t h = 0; h < m.decision(); ++h) {
    for (std::size_t i = 0; i < m.states[h].size(); ++i) slots.emplace_back(h, i);
  }
  PolicyMatrix pi = uniform_policy(m);
  std::vector<std::size_t> choice(slots.size(), 0);
  std::vector<Vec> best;
  while (true) {
    for (std::size_t k = 0; k < slots.size(); ++k) {
      auto& row = pi[slots[k].first][slots[k].second];
      std::fill(row.begin(), row.end(), 0.0);
      row[choice[k]] = 1.0;
    }
    const auto v = values(m, pi);
    if (best.empty()) {
      best = v;
    } else {
      for (std::size_t h = 0; h < v.size(); ++h) {
        for (std::size_t i = 0; i < v[h].size(); ++i) best[h][i] = std::max(best[h][i], v[h][i]);
      }
    }
    std::size_t k = 0;
    while (k < choice.size() && ++choice[k] == m.num_actions) choice[k++] = 0;
    if (k == choice.size()) break;
  }
  return best;
}

double reward_prediction_expected(const Raw& candidate, const Raw& truth, const PolicyMatrix& pi_d) {
  const std::size_t H = truth.horizon;
  double total = 0.0;
  std::vector<std::size_t> states(H), actions(H);
  std::vector<double> rewards(H);
  // Expected squared error of rolling the candidate from data state at
  // `start` along the recorded actions.
  auto rollout = [&](std::size_t start) {
    Vec dist(candidate.states[start].size(), 0.0);
    dist[candidate.index(start, truth.states[start][states[start]])] = 1.0;
    double err = 0.0;
    for (std::size_t k = start; k < H; ++k) {
      Vec next(candidate.states[k + 1].size(), 0.0);
      for (std::size_t x = 0; x < dist.size(); ++x) {
        if (dist[x] == 0.0) continue;
        const double e = rewards[k] - candidate.R[k][x][actions[k]];
        err += dist[x] * e * e;
        for (std::size_t j = 0; j < next.size(); ++j) next[j] += dist[x] * candidate.P[k][x][actions[k]][j];
      }
      dist = std::move(next);
    }
    return err;
  };
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t h, std::size_t i,
                                                                    double prob) {
    if (prob == 0.0) return;
    if (h == H) {
      double loss = 0.0;
      for (std::size_t s = 0; s < H; ++s) loss += rollout(s);
      total += prob * loss;
      return;
    }
    states[h] = i;
    for (std::size_t a = 0; a < truth.num_actions; ++a) {
      if (pi_d[h][i][a] == 0.0) continue;
      actions[h] = a;
      rewards[h] = truth.R[h][i][a];
      for (std::size_t j = 0; j < truth.states[h + 1].size(); ++j) {
        walk(h + 1, j, prob * pi_d[h][i][a] * truth.P[h][i][a][j]);
      }
    }
  };
  walk(0, truth.init, 1.0);
  return total;
}

namespace {

// counts[h][x][a][x'] accumulated over all trajectories of pi_d.
using Counts = std::vector<std::map<std::string, std::map<std::size_t, std::map<std::string, double>>>>;

Counts latent_counts(const Raw& truth, const EncoderMaps& phi, const PolicyMatrix& pi_d) {
  Counts counts(truth.horizon);
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t h, std::size_t i,
                                                                    double prob) {
    if (prob == 0.0 || h == truth.horizon) return;
    for (std::size_t a = 0; a < truth.num_actions; ++a) {
      for (std::size_t j = 0; j < truth.states[h + 1].size(); ++j) {
        const double p = prob * pi_d[h][i][a] * truth.P[h][i][a][j];
        if (p == 0.0) continue;
        counts[h][phi[h].at(truth.states[h][i])][a][phi[h + 1].at(truth.states[h + 1][j])] += p;
        walk(h + 1, j, p);
      }
    }
  };
  walk(0, truth.init, 1.0);
  return counts;
}

}  // namespace

double latent_loss_by_enumeration(const Raw& truth, const EncoderMaps& phi,
                                  const PolicyMatrix& pi_d) {
  const Counts counts = latent_counts(truth, phi, pi_d);
  double loss = 0.0;
  for (const auto& layer : counts) {
    for (const auto& [x, by_action] : layer) {
      for (const auto& [a, row] : by_action) {
        double mass = 0.0;
        for (const auto& [y, w] : row) mass += w;
        for (const auto& [y, w] : row) loss -= w * std::log(w / mass);
      }
    }
  }
  return loss;
}

double latent_return_by_enumeration(const Raw& truth, const EncoderMaps& phi,
                                    const PolicyMatrix& pi_d, std::size_t action) {
  const Counts counts = latent_counts(truth, phi, pi_d);
  // Latent rewards: every member of a cell must agree, take any.
  std::vector<std::map<std::string, double>> reward(truth.horizon);
  for (std::size_t h = 0; h < truth.horizon; ++h) {
    for (std::size_t i = 0; i < truth.states[h].size(); ++i) {
      reward[h][phi[h].at(truth.states[h][i])] = truth.R[h][i][action];
    }
  }
  std::function<double(std::size_t, const std::string&)> value = [&](std::size_t h,
                                                                     const std::string& x) {
    if (h == truth.horizon) return 0.0;
    double v = reward[h].at(x);
    const auto& row = counts[h].at(x).at(action);
    double mass = 0.0;
    for (const auto& [y, w] : row) mass += w;
    for (const auto& [y, w] : row) v += w / mass * value(h + 1, y);
    return v;
  };
  return value(0, phi[0].at(truth.states[0][truth.init]));
}

double kl(const Vec& p, const Vec& q) {
  double out = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return INFINITY;
    out += p[i] * std::log(p[i] / q[i]);
  }
  return out;
}

}  // namespace oracle
