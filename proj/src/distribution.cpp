#include "mbrl/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace mbrl {

Distribution Distribution::point(StateId s) { return Distribution{{std::move(s)}, {1.0}}; }

Distribution Distribution::uniform(std::vector<StateId> support) {
  const double p = support.empty() ? 0.0 : 1.0 / static_cast<double>(support.size());
  std::vector<double> probs(support.size(), p);
  return Distribution{std::move(support), std::move(probs)};
}

double Distribution::prob(std::string_view s) const {
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i] == s) return probs[i];
  }
  return 0.0;
}

double Distribution::total() const {
  double sum = 0.0;
  for (double p : probs) sum += p;
  return sum;
}

std::string Distribution::check() const {
  std::ostringstream why;
  if (support.size() != probs.size()) {
    why << "support has " << support.size() << " atoms but " << probs.size() << " probabilities";
    return why.str();
  }
  if (support.empty()) return "empty distribution";
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0.0) || !std::isfinite(probs[i])) {
      why << "probability of '" << support[i] << "' is " << probs[i];
      return why.str();
    }
  }
  std::set<std::string_view> seen;
  for (const auto& s : support) {
    if (!seen.insert(s).second) return "duplicate atom '" + s + "'";
  }
  const double sum = total();
  if (std::abs(sum - 1.0) > kDistributionTolerance) {
    why.precision(17);
    why << "probabilities sum to " << sum;
    return why.str();
  }
  return {};
}

std::size_t Distribution::select(double u) const {
  double cumulative = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cumulative += probs[i];
    if (u < cumulative) return i;
  }
  // Rounding can leave the cumulative sum just below 1; fall back to the last
  // atom with positive mass.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return i;
  }
  return 0;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  double l1 = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) l1 += std::abs(p[i] - q[i]);
  return 0.5 * l1;
}

double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

void align(const Distribution& p, const Distribution& q, std::vector<double>& pv,
           std::vector<double>& qv, std::vector<StateId>* atoms) {
  std::vector<StateId> universe = p.support;
  for (const auto& s : q.support) {
    if (std::find(universe.begin(), universe.end(), s) == universe.end()) universe.push_back(s);
  }
  pv.assign(universe.size(), 0.0);
  qv.assign(universe.size(), 0.0);
  for (std::size_t i = 0; i < universe.size(); ++i) {
    pv[i] = p.prob(universe[i]);
    qv[i] = q.prob(universe[i]);
  }
  if (atoms) *atoms = std::move(universe);
}

}  // namespace mbrl
