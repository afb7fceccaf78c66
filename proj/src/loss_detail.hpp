#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mbrl/losses.hpp"

namespace mbrl::detail {

double mean(const std::vector<double>& xs);
double standard_error(const std::vector<double>& xs);

// Per-transition loss; std::nullopt marks a zero-probability event.
using TransitionLoss = std::function<std::optional<double>(std::size_t layer, const StateId& s,
                                                           ActionIndex a, const StateId& next)>;

// Tuples: mean over tuples with a finite loss. Trajectories: per-trajectory
// sums of finite terms, averaged over trajectories.
LossReport aggregate_transitions(const Dataset& data, const TransitionLoss& loss,
                                 std::string name);

}  // namespace mbrl::detail
