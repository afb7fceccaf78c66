#include "loss_detail.hpp"

#include <algorithm>
#include <cmath>

namespace mbrl::detail {

double mean(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return xs.empty() ? 0.0 : sum / static_cast<double>(xs.size());
}

double standard_error(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mu) * (x - mu);
  const double n = static_cast<double>(xs.size());
  return std::sqrt(ss / (n - 1.0) / n);
}

// Tuples: mean over tuples with a finite loss. Trajectories: per-trajectory
// sums of finite terms, averaged over trajectories.
LossReport aggregate_transitions(const Dataset& data, const TransitionLoss& loss,
                                 std::string name) {
  LossReport out;
  out.name = std::move(name);
  out.exact = false;
  std::vector<double> groups;
  std::vector<double> layer_sums;
  if (data.kind == DatasetKind::kTuples) {
    layer_sums.assign(1, 0.0);
    for (const auto& t : data.tuples) {
      auto v = loss(0, t.state, t.action, t.next_state);
      if (!v) {
        ++out.zero_prob_events;
        continue;
      }
      groups.push_back(*v);
      layer_sums[0] += *v;
    }
    out.n_effective = groups.size();
  } else {
    std::size_t horizon = 0;
    for (const auto& t : data.trajectories) horizon = std::max(horizon, t.length());
    layer_sums.assign(horizon > 0 ? horizon - 1 : 0, 0.0);
    for (const auto& t : data.trajectories) {
      double sum = 0.0;
      for (std::size_t h = 0; h + 1 < t.length(); ++h) {
        auto v = loss(h, t.states[h], t.actions[h], t.states[h + 1]);
        if (!v) {
          ++out.zero_prob_events;
          continue;
        }
        sum += *v;
        layer_sums[h] += *v;
        ++out.n_effective;
      }
      groups.push_back(sum);
    }
  }
  out.loss = mean(groups);
  out.standard_error = standard_error(groups);
  const double n = static_cast<double>(std::max<std::size_t>(groups.size(), 1));
  for (double& x : layer_sums) x /= n;
  out.per_layer = std::move(layer_sums);
  if (out.zero_prob_events > 0) {
    out.warnings.push_back(std::to_string(out.zero_prob_events) +
                           " transitions have zero probability under the candidate");
  }
  return out;
}

}  // namespace mbrl::detail
