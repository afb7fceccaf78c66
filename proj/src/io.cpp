#include "mbrl/io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mbrl/counterexamples.hpp"
#include "mbrl/error.hpp"

namespace mbrl {
namespace {

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw InputError(where + ": missing field '" + key + "'");
  }
  return j.at(key);
}

template <class T>
T get(const Json& j, const char* key, const std::string& where) {
  const Json& v = field(j, key, where);
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError(where + ": field '" + key + "' has the wrong type");
  }
}

std::vector<std::string> string_list(const Json& j, const char* key, const std::string& where) {
  return get<std::vector<std::string>>(j, key, where);
}

std::string key_of(const std::string& s, const std::string& a) { return s + "|" + a; }

std::size_t find_action(const std::vector<std::string>& actions, const std::string& name) {
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i] == name) return i;
  }
  throw InputError("unknown action '" + name + "'");
}

}  // namespace

Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

// ---------------------------------------------------------------------------

Json mdp_to_json(const Mdp& m) {
  const MdpTables t = tabulate(m);
  Json j;
  j["name"] = t.name;
  j["kind"] = m.episodic() ? "episodic" : "discounted";
  if (m.episodic()) {
    j["horizon"] = t.horizon;
  } else {
    j["gamma"] = t.gamma;
  }
  j["actions"] = t.actions;
  if (m.episodic()) {
    Json layers = Json::array();
    for (const auto& layer : t.layers) layers.push_back({{"states", layer.states}});
    j["layers"] = layers;
  } else {
    j["states"] = t.layers[0].states;
  }
  Json transitions = Json::object();
  Json rewards = Json::object();
  for (std::size_t h = 0; h < m.decision_layers(); ++h) {
    const auto& layer = t.layers[h];
    for (std::size_t i = 0; i < layer.states.size(); ++i) {
      for (std::size_t a = 0; a < t.actions.size(); ++a) {
        const auto key = key_of(layer.states[i], t.actions[a]);
        Json row = Json::array();
        const auto& d = layer.transitions[i][a];
        for (std::size_t k = 0; k < d.size(); ++k) row.push_back({d.support[k], d.probs[k]});
        transitions[key] = row;
        rewards[key] = layer.rewards[i][a];
      }
    }
  }
  j["transitions"] = transitions;
  j["rewards"] = rewards;
  j["initial"] = t.initial;
  j["rmax"] = t.rmax;
  return j;
}

Mdp mdp_from_json(const Json& j) {
  const std::string where = "mdp";
  if (!j.is_object()) throw InputError("mdp: expected an object");
  if (j.contains("builtin")) {
    const auto name = get<std::string>(j, "builtin", where);
    const auto role = j.contains("role") ? get<std::string>(j, "role", where) : "truth";
    const auto horizon = j.contains("horizon") ? get<std::size_t>(j, "horizon", where) : 20;
    const auto p_b = j.contains("p_b") ? get<double>(j, "p_b", where) : 0.0;
    return builtin_mdp(name, role, horizon, p_b);
  }
  MdpTables t;
  t.name = j.contains("name") ? get<std::string>(j, "name", where) : "mdp";
  const auto kind = get<std::string>(j, "kind", where);
  if (kind == "episodic") {
    t.kind = HorizonKind::kEpisodic;
    t.horizon = get<std::size_t>(j, "horizon", where);
  } else if (kind == "discounted") {
    t.kind = HorizonKind::kDiscounted;
    t.gamma = get<double>(j, "gamma", where);
  } else {
    throw InputError("mdp: kind must be 'episodic' or 'discounted', got '" + kind + "'");
  }
  t.actions = string_list(j, "actions", where);
  t.initial = get<std::string>(j, "initial", where);
  t.rmax = get<double>(j, "rmax", where);
  if (t.kind == HorizonKind::kEpisodic) {
    const Json& layers = field(j, "layers", where);
    if (!layers.is_array()) throw InputError("mdp: 'layers' must be an array");
    for (std::size_t h = 0; h < layers.size(); ++h) {
      LayerTable layer;
      layer.states = string_list(layers[h], "states", "mdp layer " + std::to_string(h));
      t.layers.push_back(std::move(layer));
    }
  } else {
    LayerTable layer;
    layer.states = string_list(j, "states", where);
    t.layers.push_back(std::move(layer));
  }
  std::set<std::string> seen;
  for (const auto& layer : t.layers) {
    for (const auto& s : layer.states) {
      if (!seen.insert(s).second) {
        throw InputError("mdp: state '" + s + "' appears more than once");
      }
    }
  }
  const Json& transitions = field(j, "transitions", where);
  const Json empty = Json::object();
  const Json& rewards = j.contains("rewards") ? j.at("rewards") : empty;
  if (!transitions.is_object() || !rewards.is_object()) {
    throw InputError("mdp: 'transitions' and 'rewards' must be objects");
  }
  std::set<std::string> used;
  const std::size_t decision = t.kind == HorizonKind::kEpisodic ? t.horizon : 1;
  for (std::size_t h = 0; h < std::min(decision, t.layers.size()); ++h) {
    auto& layer = t.layers[h];
    for (const auto& s : layer.states) {
      std::vector<Distribution> row;
      std::vector<double> rrow;
      for (const auto& a : t.actions) {
        const auto key = key_of(s, a);
        if (!transitions.contains(key)) throw InputError("mdp: missing transition '" + key + "'");
        used.insert(key);
        Distribution d;
        const Json& entries = transitions.at(key);
        if (!entries.is_array()) throw InputError("mdp: transition '" + key + "' must be an array");
        for (const auto& e : entries) {
          if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_number()) {
            throw InputError("mdp: transition '" + key + "' entries must be [state, prob]");
          }
          d.support.push_back(e[0].get<std::string>());
          d.probs.push_back(e[1].get<double>());
        }
        row.push_back(std::move(d));
        double r = 0.0;
        if (rewards.contains(key)) {
          if (!rewards.at(key).is_number()) throw InputError("mdp: reward '" + key + "' must be a number");
          r = rewards.at(key).get<double>();
        }
        rrow.push_back(r);
      }
      layer.transitions.push_back(std::move(row));
      layer.rewards.push_back(std::move(rrow));
    }
  }
  for (const auto& [key, value] : transitions.items()) {
    if (!used.count(key)) throw InputError("mdp: transition '" + key + "' names no decision state");
  }
  for (const auto& [key, value] : rewards.items()) {
    if (!used.count(key)) throw InputError("mdp: reward '" + key + "' names no decision state");
  }
  return Mdp::from_tables(std::move(t));
}

// ---------------------------------------------------------------------------

Json policy_to_json(const Policy& pi, const std::vector<std::string>& actions) {
  Json j;
  switch (pi.kind()) {
    case PolicyKind::kUniform:
      j["kind"] = "uniform";
      break;
    case PolicyKind::kConstant:
      j["kind"] = "constant";
      j["action"] = actions.at(pi.constant_action());
      break;
    case PolicyKind::kDeterministic: {
      j["kind"] = "deterministic";
      Json layers = Json::array();
      for (const auto& layer : *pi.actions_table()) {
        Json map = Json::object();
        for (const auto& [s, a] : layer) map[s] = actions.at(a);
        layers.push_back({{"map", map}});
      }
      j["layers"] = layers;
      break;
    }
    case PolicyKind::kTabular: {
      j["kind"] = "tabular";
      Json layers = Json::array();
      for (const auto& layer : *pi.probs_table()) {
        Json map = Json::object();
        for (const auto& [s, p] : layer) map[s] = p;
        layers.push_back({{"map", map}});
      }
      j["layers"] = layers;
      break;
    }
    case PolicyKind::kLatent:
      j["kind"] = "latent";
      j["encoder"] = encoder_to_json(*pi.encoder());
      j["policy"] = policy_to_json(*pi.inner(), actions);
      break;
  }
  return j;
}

Policy policy_from_json(const Json& j, const std::vector<std::string>& actions) {
  const std::string where = "policy";
  const auto kind = get<std::string>(j, "kind", where);
  if (kind == "uniform") return Policy::uniform();
  if (kind == "constant") return Policy::constant(find_action(actions, get<std::string>(j, "action", where)));
  if (kind == "deterministic" || kind == "tabular") {
    const Json& layers = field(j, "layers", where);
    if (!layers.is_array()) throw InputError("policy: 'layers' must be an array");
    if (kind == "deterministic") {
      Policy::ActionTable table(layers.size());
      for (std::size_t h = 0; h < layers.size(); ++h) {
        const auto map = get<std::map<std::string, std::string>>(layers[h], "map",
                                                                 "policy layer " + std::to_string(h));
        for (const auto& [s, a] : map) table[h].emplace(s, find_action(actions, a));
      }
      return Policy::deterministic(std::move(table));
    }
    Policy::ProbTable table(layers.size());
    for (std::size_t h = 0; h < layers.size(); ++h) {
      const auto map = get<std::map<std::string, std::vector<double>>>(
          layers[h], "map", "policy layer " + std::to_string(h));
      for (const auto& [s, p] : map) {
        if (p.size() != actions.size()) {
          throw InputError("policy: row '" + s + "' needs one probability per action");
        }
        table[h].emplace(s, p);
      }
    }
    return Policy::tabular(std::move(table));
  }
  if (kind == "latent") {
    return Policy::lifted(encoder_from_json(field(j, "encoder", where)),
                          policy_from_json(field(j, "policy", where), actions));
  }
  throw InputError("policy: unknown kind '" + kind + "'");
}

// ---------------------------------------------------------------------------

Json encoder_to_json(const Encoder& phi) {
  Json layers = Json::array();
  for (std::size_t h = 0; h < phi.num_layers(); ++h) {
    Json map = Json::object();
    for (const auto& [s, x] : phi.layer(h)) map[s] = x;
    layers.push_back({{"map", map}});
  }
  return Json{{"layers", layers}};
}

Encoder encoder_from_json(const Json& j) {
  const Json& layers = field(j, "layers", "encoder");
  if (!layers.is_array()) throw InputError("encoder: 'layers' must be an array");
  std::vector<Encoder::LayerMap> maps;
  for (std::size_t h = 0; h < layers.size(); ++h) {
    const auto map =
        get<std::map<std::string, std::string>>(layers[h], "map", "encoder layer " + std::to_string(h));
    maps.emplace_back(map.begin(), map.end());
  }
  return Encoder(std::move(maps));
}

Json embedding_to_json(const Embedding& emb) {
  Json points = Json::object();
  for (const auto& [s, x] : emb.points()) points[s] = x;
  return Json{{"points", points}};
}

Embedding embedding_from_json(const Json& j) {
  const auto points = get<std::map<std::string, std::vector<double>>>(j, "points", "embedding");
  return Embedding({points.begin(), points.end()});
}

// ---------------------------------------------------------------------------

Json loss_report_to_json(const LossReport& r) {
  Json j;
  j["name"] = r.name;
  j["loss"] = number(r.loss);
  j["loss_infinite"] = std::isinf(r.loss) || r.infinite;
  j["se"] = number(r.standard_error);
  j["exact"] = r.exact;
  if (r.decomposition) {
    j["decomposition"] = {{"entropy", number(r.decomposition->entropy)},
                          {"excess", number(r.decomposition->excess)},
                          {"excess_infinite", std::isinf(r.decomposition->excess)}};
  } else {
    j["decomposition"] = nullptr;
  }
  j["zero_prob_events"] = r.zero_prob_events;
  j["n_effective"] = r.n_effective;
  Json per_layer = Json::array();
  for (double x : r.per_layer) per_layer.push_back(number(x));
  j["per_layer"] = per_layer;
  j["warnings"] = r.warnings;
  return j;
}

// ---------------------------------------------------------------------------

void write_dataset(std::ostream& out, const Dataset& d) {
  Json header;
  header["seed"] = d.seed;
  header["mdp"] = d.source.mdp;
  header["policy"] = d.source.policy;
  header["data_distribution"] = d.source.data_distribution;
  header["kind"] = d.kind == DatasetKind::kTuples ? "tuples" : "trajectories";
  header["actions"] = d.actions;
  header["count"] = d.count();
  out << header.dump() << '\n';
  if (d.kind == DatasetKind::kTuples) {
    for (const auto& t : d.tuples) {
      Json line;
      line["s"] = t.state;
      line["a"] = d.actions.at(t.action);
      line["r"] = t.reward;
      line["s_next"] = t.next_state;
      out << line.dump() << '\n';
    }
    return;
  }
  for (const auto& tr : d.trajectories) {
    Json line;
    line["states"] = tr.states;
    Json acts = Json::array();
    for (auto a : tr.actions) acts.push_back(d.actions.at(a));
    line["actions"] = acts;
    line["rewards"] = tr.rewards;
    out << line.dump() << '\n';
  }
}

Dataset read_dataset(std::istream& in) {
  Dataset d;
  std::string text;
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t expected_count = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "dataset line " + std::to_string(line_no);
    Json j;
    try {
      j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError(where + ": invalid JSON (" + e.what() + ")");
    }
    if (!j.is_object()) throw InputError(where + ": expected an object");
    if (!have_header) {
      d.seed = get<std::uint64_t>(j, "seed", where);
      d.source.mdp = get<std::string>(j, "mdp", where);
      d.source.policy = get<std::string>(j, "policy", where);
      if (j.contains("data_distribution")) {
        d.source.data_distribution = get<std::string>(j, "data_distribution", where);
      }
      const auto kind = get<std::string>(j, "kind", where);
      if (kind == "tuples") {
        d.kind = DatasetKind::kTuples;
      } else if (kind == "trajectories") {
        d.kind = DatasetKind::kTrajectories;
      } else {
        throw InputError(where + ": kind must be 'tuples' or 'trajectories'");
      }
      d.actions = string_list(j, "actions", where);
      expected_count = j.contains("count") ? get<std::size_t>(j, "count", where) : 0;
      have_header = true;
      continue;
    }
    auto action = [&](const std::string& name) {
      for (std::size_t i = 0; i < d.actions.size(); ++i) {
        if (d.actions[i] == name) return i;
      }
      throw InputError(where + ": unknown action '" + name + "'");
    };
    if (d.kind == DatasetKind::kTuples) {
      Transition t;
      t.state = get<std::string>(j, "s", where);
      t.action = action(get<std::string>(j, "a", where));
      t.reward = get<double>(j, "r", where);
      t.next_state = get<std::string>(j, "s_next", where);
      d.tuples.push_back(std::move(t));
    } else {
      Trajectory tr;
      tr.states = string_list(j, "states", where);
      for (const auto& a : string_list(j, "actions", where)) tr.actions.push_back(action(a));
      tr.rewards = get<std::vector<double>>(j, "rewards", where);
      if (tr.states.size() != tr.actions.size() || tr.rewards.size() != tr.actions.size()) {
        throw InputError(where + ": states, actions and rewards must have equal length");
      }
      d.trajectories.push_back(std::move(tr));
    }
  }
  if (!have_header) throw InputError("dataset: missing header line");
  if (expected_count != 0 && expected_count != d.count()) {
    throw InputError("dataset: header announces " + std::to_string(expected_count) +
                     " records, found " + std::to_string(d.count()));
  }
  return d;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": invalid JSON (" + e.what() + ")");
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
  if (!out) throw InputError("failed writing '" + path + "'");
}

}  // namespace mbrl
