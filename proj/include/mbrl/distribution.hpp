#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mbrl {

using StateId = std::string;
using ActionIndex = std::size_t;

inline constexpr double kDistributionTolerance = 1e-9;
inline constexpr double kDerivedTolerance = 1e-8;

/// Finite distribution over state identifiers. Entries are kept in support
/// order, which is also the summation order used by every evaluator.
struct Distribution {
  std::vector<StateId> support;
  std::vector<double> probs;

  static Distribution point(StateId s);
  static Distribution uniform(std::vector<StateId> support);

  std::size_t size() const { return support.size(); }
  double prob(std::string_view s) const;
  double total() const;

  /// Empty string when valid, otherwise a human readable reason.
  std::string check() const;

  /// Index of the atom selected by a uniform draw u in [0,1).
  std::size_t select(double u) const;

  friend bool operator==(const Distribution&, const Distribution&) = default;
};

/// Probability vectors on a shared, ordered universe of atoms.
double total_variation(const std::vector<double>& p, const std::vector<double>& q);
double entropy(const std::vector<double>& p);

/// Aligns two distributions on the union of their supports (first p's order,
/// then q's extra atoms).
void align(const Distribution& p, const Distribution& q, std::vector<double>& pv,
           std::vector<double>& qv, std::vector<StateId>* atoms = nullptr);

}  // namespace mbrl
