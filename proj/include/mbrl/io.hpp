#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mbrl/encoder.hpp"
#include "mbrl/losses.hpp"
#include "mbrl/mdp.hpp"
#include "mbrl/policy.hpp"
#include "mbrl/sampling.hpp"

namespace mbrl {

using Json = nlohmann::ordered_json;

// Every parser throws InputError naming the offending field. Writers emit
// keys in a fixed order so equal inputs serialize to equal bytes.

/// Explicit MDP schema. State ids must be unique across layers because
/// transitions and rewards are keyed "state|action". Procedural MDPs are
/// tabulated first (SizeError if too large).
Json mdp_to_json(const Mdp& m);
/// Accepts the explicit schema or a {"builtin": name, "role", "horizon",
/// "p_b"} reference.
Mdp mdp_from_json(const Json& j);

Json policy_to_json(const Policy& pi, const std::vector<std::string>& actions);
Policy policy_from_json(const Json& j, const std::vector<std::string>& actions);

Json encoder_to_json(const Encoder& phi);
Encoder encoder_from_json(const Json& j);

Json embedding_to_json(const Embedding& emb);
Embedding embedding_from_json(const Json& j);

/// Non-finite numbers become null with a companion "<key>_infinite" flag.
Json loss_report_to_json(const LossReport& r);

/// JSONL: a header line, then one tuple or trajectory per line.
void write_dataset(std::ostream& out, const Dataset& d);
/// Errors carry the 1-based line number.
Dataset read_dataset(std::istream& in);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Finite numbers as-is, non-finite as null.
Json number(double x);

}  // namespace mbrl
