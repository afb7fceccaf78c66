#include "mbrl/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mbrl/abstraction.hpp"
#include "mbrl/counterexamples.hpp"
#include "mbrl/diagnostics.hpp"
#include "mbrl/error.hpp"
#include "mbrl/io.hpp"
#include "mbrl/losses.hpp"
#include "mbrl/parallel.hpp"
#include "mbrl/plot.hpp"
#include "mbrl/sampling.hpp"

namespace mbrl {
namespace {

struct Options {
  std::string name;
  std::string experiment;
  std::string loss;
  std::string mdp_path;
  std::string builtin;
  std::string role = "truth";
  std::string data_path;
  std::string encoder_path;
  std::string embedding_path;
  std::string policy_path;
  std::string out;
  std::string format = "json";
  std::string range;
  std::size_t horizon = 0;
  std::size_t samples = 0;
  std::size_t trajectories = 0;
  std::uint64_t seed = 7;
  double p_b = 0.1;
  bool squared = false;
  std::size_t max_latents = 5;
};

/// Named pass/fail checks of one command.
struct Checks {
  Json list = Json::array();
  std::vector<std::string> failed;

  void add(const std::string& name, bool passed, Json detail = nullptr) {
    Json c;
    c["name"] = name;
    c["passed"] = passed;
    if (!detail.is_null()) c["detail"] = std::move(detail);
    list.push_back(std::move(c));
    if (!passed) failed.push_back(name);
  }
  bool ok() const { return failed.empty(); }
};

/// One headline row: quantity, whether it is exact or an estimate, value.
struct Headline {
  std::string quantity;
  std::string kind;
  double value;
};

struct Outcome {
  Json report;
  std::vector<Headline> headline;
  bool passed = true;
  std::vector<std::string> failures;
  /// Extra files written next to --out: suffix -> contents.
  std::vector<std::pair<std::string, std::string>> extras;
};

Json certificates_json(const std::vector<Certificate>& certs) {
  Json out = Json::array();
  for (const auto& c : certs) {
    out.push_back({{"name", c.name},
                   {"stored", number(c.stored)},
                   {"computed", number(c.computed)},
                   {"passed", c.passed}});
  }
  return out;
}

Json coverage_json(const CoverageResult& c, const std::vector<std::string>& actions) {
  return {{"ratio", number(c.ratio)},
          {"infinite", c.infinite},
          {"argmax", {{"layer", c.layer}, {"state", c.state}, {"action", actions.at(c.action)}}}};
}

Json estimate_json(const LossReport& r, double exact) {
  return {{"estimate", number(r.loss)},
          {"se", number(r.standard_error)},
          {"exact", number(exact)},
          {"abs_error", number(std::abs(r.loss - exact))},
          {"n", r.n_effective}};
}

std::string headline_csv(const std::vector<Headline>& rows) {
  std::string out = "quantity,kind,value\n";
  for (const auto& r : rows) out += r.quantity + "," + r.kind + "," + format_number(r.value) + "\n";
  return out;
}

void finish(Outcome& o, const Checks& checks) {
  o.report["checks"] = checks.list;
  o.passed = checks.ok();
  o.failures = checks.failed;
  o.report["passed"] = o.passed;
}

// ---------------------------------------------------------------------------

Outcome run_prop1(const Options& opt, bool variant) {
  const Prop1Instance inst = variant ? build_prop1_variant(opt.p_b) : build_prop1();
  const std::size_t n = opt.samples ? opt.samples : 100000;
  Outcome o;
  Json& r = o.report;
  r["instance"] = variant ? "prop1-variant" : "prop1";
  r["params"] = {{"p_b", inst.p_b}, {"samples", n}, {"seed", opt.seed}};
  const double lt = prop1_truth_loss(inst.p_b), lw = prop1_wrong_loss(inst.p_b);
  const double jt = expected_return(inst.truth, inst.pi_target);
  const double jw = expected_return(inst.wrong, inst.pi_target);
  r["exact"] = {{"loss_truth", lt},  {"loss_wrong", lw}, {"return_truth", jt},
                {"return_wrong", jw}, {"ope_gap", std::abs(jt - jw)}};
  r["certificates"] = certificates_json(inst.certificates);

  const Dataset data = sample_trajectories(inst.truth, inst.pi_d, n, opt.seed);
  const LossReport mt = reward_prediction_loss_empirical(inst.truth, data, opt.seed);
  const LossReport mw = reward_prediction_loss_empirical(inst.wrong, data, opt.seed);
  r["monte_carlo"] = {{"loss_truth", estimate_json(mt, lt)}, {"loss_wrong", estimate_json(mw, lw)}};

  Checks checks;
  checks.add("wrong_model_has_lower_exact_loss", lw < lt);
  for (auto [label, rep, exact] : {std::tuple{"truth", &mt, lt}, {"wrong", &mw, lw}}) {
    const double err = std::abs(rep->loss - exact);
    checks.add(std::string("mc_") + label + "_within_0.01", err <= 0.01);
    checks.add(std::string("mc_") + label + "_within_3se", err <= 3.0 * rep->standard_error);
  }
  if (variant) {
    const Prop1Threshold t = prop1_threshold();
    r["threshold"] = {{"bracket", {t.lo, t.hi}},
                      {"diff_at_lo", t.diff_lo},
                      {"diff_at_hi", t.diff_hi},
                      {"ordering_flips", t.threshold.has_value()},
                      {"threshold", t.threshold ? Json(*t.threshold) : Json(nullptr)}};
  }
  finish(o, checks);
  o.headline = {{"loss_truth", "exact", lt},           {"loss_wrong", "exact", lw},
                {"return_truth", "exact", jt},         {"return_wrong", "exact", jw},
                {"loss_truth", "monte_carlo", mt.loss}, {"loss_wrong", "monte_carlo", mw.loss}};
  return o;
}

std::size_t count_all_r(const Dataset& d) {
  std::size_t count = 0;
  for (const auto& t : d.trajectories) {
    bool all_r = true;
    for (auto a : t.actions) all_r = all_r && a == 1;
    count += all_r;
  }
  return count;
}

Outcome run_prop2(const Options& opt) {
  const std::size_t horizon = opt.horizon ? opt.horizon : 20;
  const std::size_t n = opt.trajectories ? opt.trajectories : (opt.samples ? opt.samples : 1000);
  const Prop2Instance inst = build_prop2(horizon);
  const auto& actions = inst.truth.actions();
  Outcome o;
  Json& r = o.report;
  r["instance"] = "prop2";
  r["params"] = {{"horizon", horizon}, {"trajectories", n}, {"seed", opt.seed}};

  const Occupancy data_occ = occupancy(inst.truth, inst.pi_d);
  const auto cov = state_action_coverage(inst.truth, inst.pi_target, data_occ);
  const auto traj = trajectory_coverage(inst.truth, inst.pi_target, inst.pi_d);
  const auto model_side = state_action_coverage(inst.wrong, inst.pi_target, data_occ);
  const double jw = expected_return(inst.wrong, inst.pi_target);
  const double jt = expected_return(inst.truth, inst.pi_target);
  const double pd = distinguishing_probability(horizon);
  const double pn = dataset_detection_probability(horizon, n);
  // Only the all-R trajectory separates the models: the tree predicts 100
  // where the data shows 0, once, from the root.
  const double loss_wrong_exact = 1e4 * pd;
  r["exact"] = {{"state_action_coverage", coverage_json(cov, actions)},
                {"trajectory_coverage", coverage_json(traj, actions)},
                {"model_side_coverage", coverage_json(model_side, actions)},
                {"distinguishing_probability", pd},
                {"dataset_detection_probability", pn},
                {"return_wrong_all_r", jw},
                {"return_truth_all_r", jt},
                {"ope_gap", jw - jt},
                {"loss_truth", 0.0},
                {"loss_wrong", loss_wrong_exact}};
  r["certificates"] = certificates_json(inst.certificates);

  const Dataset data = sample_trajectories(inst.truth, inst.pi_d, n, opt.seed);
  const std::size_t all_r = count_all_r(data);
  const auto per_truth = reward_prediction_losses(inst.truth, data, opt.seed);
  const auto per_wrong = reward_prediction_losses(inst.wrong, data, opt.seed);
  const LossReport mt = reward_prediction_loss_empirical(inst.truth, data, opt.seed);
  const LossReport mw = reward_prediction_loss_empirical(inst.wrong, data, opt.seed);
  const bool identical = per_truth == per_wrong;
  r["monte_carlo"] = {{"all_r_trajectories", all_r},
                      {"loss_truth", estimate_json(mt, 0.0)},
                      {"loss_wrong", estimate_json(mw, loss_wrong_exact)},
                      {"losses_identical", identical}};

  Checks checks;
  checks.add("losses_identical_iff_no_all_r_sequence", identical == (all_r == 0),
             {{"all_r_trajectories", all_r}, {"identical", identical}});
  checks.add("state_action_coverage_is_2", !cov.infinite && cov.ratio == 2.0);
  checks.add("model_side_coverage_unbounded", model_side.infinite);
  if (horizon <= 12) {
    const double exact_eval = reward_prediction_loss_expected(inst.wrong, inst.truth, inst.pi_d).loss;
    checks.add("loss_wrong_closed_form_matches_evaluator",
               std::abs(exact_eval - loss_wrong_exact) <= 1e-9, {{"evaluator", exact_eval}});
  }
  finish(o, checks);
  o.headline = {{"state_action_coverage", "exact", cov.ratio},
                {"trajectory_coverage", "exact", traj.ratio},
                {"distinguishing_probability", "exact", pd},
                {"dataset_detection_probability", "exact", pn},
                {"ope_gap", "exact", jw - jt},
                {"all_r_trajectories", "sample", static_cast<double>(all_r)},
                {"loss_truth", "monte_carlo", mt.loss},
                {"loss_wrong", "monte_carlo", mw.loss}};
  return o;
}

Outcome run_bisim(const Options& opt) {
  const BisimDegenerateInstance inst = build_bisim_degenerate();
  const auto& actions = inst.truth.actions();
  const std::size_t n = opt.samples ? opt.samples : 100000;
  Outcome o;
  Json& r = o.report;
  r["instance"] = "bisim-degenerate";
  r["provenance"] = "constructed";
  r["params"] = {{"max_latents", opt.max_latents}, {"samples", n}, {"seed", opt.seed}};

  const auto ranking = search_encoders(inst.truth, inst.data_dist, opt.max_latents);
  Json rows = Json::array();
  std::string search_csv = "encoder_id,loss,entropy,excess,is_bisim,num_latents\n";
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    const auto& c = ranking[i];
    rows.push_back({{"rank", i + 1},
                    {"encoder_id", c.id},
                    {"loss", number(c.loss)},
                    {"entropy", number(c.entropy)},
                    {"excess", number(c.excess)},
                    {"is_bisimulation", c.is_bisimulation},
                    {"num_latents", c.num_latents}});
    search_csv += c.id + "," + format_number(c.loss) + "," + format_number(c.entropy) + "," +
                  format_number(c.excess) + "," + (c.is_bisimulation ? "1" : "0") + "," +
                  std::to_string(c.num_latents) + "\n";
  }
  o.extras.emplace_back(".encoders.csv", search_csv);

  const LatentModel lm_deg = optimal_latent_dynamics(inst.phi_degenerate, inst.truth, inst.data_dist);
  const LatentModel lm_bis = optimal_latent_dynamics(inst.phi_bisim, inst.truth, inst.data_dist);
  const double loss_deg = expected_latent_mle_loss(lm_deg, inst.truth, inst.data_dist).loss;
  const double loss_bis = expected_latent_mle_loss(lm_bis, inst.truth, inst.data_dist).loss;
  const Policy latent_l = Policy::constant(0);
  const double j_true = expected_return(inst.truth, inst.pi_target);
  const double j_deg = expected_return(latent_mdp(lm_deg, inst.truth), latent_l);
  const double j_bis = expected_return(latent_mdp(lm_bis, inst.truth), latent_l);
  const auto check_deg = bisimulation_check(inst.truth, inst.phi_degenerate);
  Json witness = nullptr;
  if (check_deg.witness) {
    const auto& w = *check_deg.witness;
    witness = {{"layer", w.layer},
               {"first", w.first},
               {"second", w.second},
               {"action", actions.at(w.action)},
               {"reason", w.reason}};
  }
  r["exact"] = {{"latent_loss_degenerate", loss_deg},
                {"latent_loss_bisimulation", loss_bis},
                {"return_true_always_l", j_true},
                {"return_degenerate_model", j_deg},
                {"return_bisimulation_model", j_bis},
                {"ope_error_degenerate", std::abs(j_true - j_deg)},
                {"ope_error_bisimulation", std::abs(j_true - j_bis)},
                {"degenerate_witness", witness},
                {"encoder_ranking", rows}};
  r["certificates"] = certificates_json(inst.certificates);

  const Dataset data = sample_trajectories(inst.truth, Policy::uniform(), n, opt.seed);
  const LossReport md = latent_mle_loss(lm_deg, data);
  const LossReport mb = latent_mle_loss(lm_bis, data);
  r["monte_carlo"] = {{"latent_loss_degenerate", estimate_json(md, loss_deg)},
                      {"latent_loss_bisimulation", estimate_json(mb, loss_bis)}};

  Checks checks;
  bool top_beats_bisim = !ranking.empty() && !ranking.front().is_bisimulation;
  for (const auto& c : ranking) {
    if (c.is_bisimulation) top_beats_bisim = top_beats_bisim && ranking.front().loss < c.loss;
  }
  checks.add("degenerate_ranked_above_every_bisimulation", top_beats_bisim,
             {{"top", ranking.empty() ? "" : ranking.front().id}});
  checks.add("top_encoder_is_degenerate",
             !ranking.empty() && ranking.front().encoder == inst.phi_degenerate.canonical());
  checks.add("degenerate_ope_error_at_least_0.15", std::abs(j_true - j_deg) >= 0.15);
  checks.add("bisimulation_ope_error_below_1e-9", std::abs(j_true - j_bis) < 1e-9);
  checks.add("mc_degenerate_below_bisimulation", md.loss < mb.loss);
  finish(o, checks);
  o.headline = {{"latent_loss_degenerate", "exact", loss_deg},
                {"latent_loss_bisimulation", "exact", loss_bis},
                {"return_true_always_l", "exact", j_true},
                {"return_degenerate_model", "exact", j_deg},
                {"ope_gap", "exact", j_true - j_deg},
                {"latent_loss_degenerate", "monte_carlo", md.loss},
                {"latent_loss_bisimulation", "monte_carlo", mb.loss}};
  return o;
}

Outcome cmd_counterexample(const Options& opt) {
  if (opt.name == "prop1") return run_prop1(opt, false);
  if (opt.name == "prop1-variant") return run_prop1(opt, true);
  if (opt.name == "prop2") return run_prop2(opt);
  if (opt.name == "bisim-degenerate") return run_bisim(opt);
  throw InputError("unknown counterexample '" + opt.name + "'");
}

// ---------------------------------------------------------------------------

Mdp load_mdp(const Options& opt) {
  if (!opt.mdp_path.empty() && !opt.builtin.empty()) {
    throw InputError("pass either --mdp or --builtin, not both");
  }
  if (!opt.mdp_path.empty()) return mdp_from_json(read_json_file(opt.mdp_path));
  if (opt.builtin.empty()) throw InputError("one of --mdp or --builtin is required");
  return builtin_mdp(opt.builtin, opt.role, opt.horizon ? opt.horizon : 20, opt.p_b);
}

Dataset load_dataset(const std::string& path) {
  if (path.empty()) throw InputError("--data is required");
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return read_dataset(in);
}

Outcome cmd_eval_loss(const Options& opt) {
  const Mdp m = load_mdp(opt);
  const Dataset data = load_dataset(opt.data_path);
  if (data.actions != m.actions()) throw InputError("dataset actions differ from the MDP's");
  LossReport rep;
  if (opt.loss == "mle") {
    rep = mle_loss(m, data);
  } else if (opt.loss == "l2") {
    if (opt.embedding_path.empty()) throw InputError("--embedding is required for l2");
    rep = l2_loss(DeterministicModel(m), data, embedding_from_json(read_json_file(opt.embedding_path)),
                  opt.squared);
  } else if (opt.loss == "latent-mle") {
    if (opt.encoder_path.empty()) throw InputError("--encoder is required for latent-mle");
    const Encoder phi = encoder_from_json(read_json_file(opt.encoder_path));
    const LatentModel lm = optimal_latent_dynamics(phi, m, empirical_occupancy(data));
    rep = latent_mle_loss(lm, data);
  } else if (opt.loss == "reward-pred") {
    rep = reward_prediction_loss_empirical(m, data, opt.seed);
  } else {
    throw InputError("unknown loss '" + opt.loss + "'");
  }
  Outcome o;
  o.report = loss_report_to_json(rep);
  o.headline = {{"loss", rep.exact ? "exact" : "monte_carlo", rep.loss},
                {"se", "monte_carlo", rep.standard_error}};
  return o;
}

// ---------------------------------------------------------------------------

std::vector<double> parse_range(const std::string& text, std::vector<double> fallback) {
  if (text.empty()) return fallback;
  std::vector<double> out;
  auto to_num = [&](const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      throw InputError("bad range '" + text + "'");
    }
    if (pos != s.size()) throw InputError("bad range '" + text + "'");
    return v;
  };
  if (text.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(to_num(item));
    if (parts.size() < 2 || parts.size() > 3) throw InputError("range must be a:b or a:b:step");
    const double step = parts.size() == 3 ? parts[2] : 1.0;
    if (!(step > 0)) throw InputError("range step must be positive");
    for (double x = parts[0]; x <= parts[1] + 1e-9; x += step) out.push_back(x);
  } else {
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) out.push_back(to_num(item));
  }
  if (out.empty()) throw InputError("empty range");
  return out;
}

std::vector<double> integer_range(double lo, double hi) {
  std::vector<double> out;
  for (double x = lo; x <= hi; x += 1.0) out.push_back(x);
  return out;
}

Outcome cmd_sweep(const Options& opt) {
  Outcome o;
  Json& r = o.report;
  r["experiment"] = opt.experiment;
  r["seed"] = opt.seed;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::string svg;
  Checks checks;
  if (opt.experiment == "prop2-detection-vs-H") {
    const auto hs = parse_range(opt.range, integer_range(2, 20));
    const std::size_t n = opt.trajectories ? opt.trajectories : 1000;
    rows = parallel_map(hs.size(), [&](std::size_t i) {
      const auto h = static_cast<std::size_t>(hs[i]);
      const Prop2Instance inst = build_prop2(h);
      const Dataset data = sample_trajectories(inst.truth, inst.pi_d, n, opt.seed);
      const bool same = reward_prediction_losses(inst.truth, data, opt.seed) ==
                        reward_prediction_losses(inst.wrong, data, opt.seed);
      return std::vector<double>{hs[i], static_cast<double>(n), distinguishing_probability(h),
                                 dataset_detection_probability(h, n),
                                 static_cast<double>(count_all_r(data)), same ? 1.0 : 0.0};
    });
    header = {"H", "n", "distinguishing_probability", "detection_probability",
              "all_r_in_sample", "losses_identical"};
    bool monotone = true;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i][0] > rows[i - 1][0]) monotone = monotone && rows[i][3] <= rows[i - 1][3];
    }
    checks.add("detection_probability_decreasing_in_H", monotone);
    std::vector<double> det, dist;
    for (const auto& row : rows) det.push_back(row[3]), dist.push_back(row[2]);
    svg = svg_line_plot("Detection probability vs horizon", "H", hs,
                        {{"dataset detection", det}, {"single trajectory", dist}}, true);
  } else if (opt.experiment == "prop1-loss-vs-n") {
    const auto ns = parse_range(opt.range, {100, 1000, 10000, 100000});
    const Prop1Instance inst = build_prop1();
    rows = parallel_map(ns.size(), [&](std::size_t i) {
      const auto n = static_cast<std::size_t>(ns[i]);
      if (n == 0) throw InputError("sample sizes must be positive");
      const Dataset data = sample_trajectories(inst.truth, inst.pi_d, n, opt.seed);
      const auto t = reward_prediction_loss_empirical(inst.truth, data, opt.seed);
      const auto w = reward_prediction_loss_empirical(inst.wrong, data, opt.seed);
      return std::vector<double>{ns[i], t.loss, t.standard_error, w.loss, w.standard_error,
                                 prop1_truth_loss(0.0), prop1_wrong_loss(0.0)};
    });
    header = {"n", "mc_loss_truth", "se_truth", "mc_loss_wrong", "se_wrong", "exact_loss_truth",
              "exact_loss_wrong"};
    std::vector<double> t, w, et, ew;
    for (const auto& row : rows) {
      t.push_back(row[1]), w.push_back(row[3]), et.push_back(row[5]), ew.push_back(row[6]);
    }
    svg = svg_line_plot("Reward prediction loss vs sample size", "n", ns,
                        {{"truth (MC)", t}, {"wrong (MC)", w}, {"truth (exact)", et},
                         {"wrong (exact)", ew}},
                        false, true);
  } else if (opt.experiment == "coverage-vs-H") {
    const auto hs = parse_range(opt.range, integer_range(2, 20));
    rows = parallel_map(hs.size(), [&](std::size_t i) {
      const auto h = static_cast<std::size_t>(hs[i]);
      const Prop2Instance inst = build_prop2(h);
      const Occupancy data = occupancy(inst.truth, inst.pi_d);
      const auto sa = state_action_coverage(inst.truth, inst.pi_target, data);
      const auto tr = trajectory_coverage(inst.truth, inst.pi_target, inst.pi_d);
      const auto ms = state_action_coverage(inst.wrong, inst.pi_target, data);
      return std::vector<double>{hs[i], sa.ratio, tr.ratio, ms.ratio};
    });
    header = {"H", "state_action_coverage", "trajectory_coverage", "model_side_coverage"};
    bool ok = true;
    std::vector<double> sa, tr;
    for (const auto& row : rows) {
      ok = ok && row[1] == 2.0 && row[2] == std::ldexp(1.0, static_cast<int>(row[0]));
      sa.push_back(row[1]), tr.push_back(row[2]);
    }
    checks.add("state_action_2_trajectory_2_pow_H", ok);
    svg = svg_line_plot("Coverage vs horizon", "H", hs,
                        {{"state-action", sa}, {"trajectory", tr}}, true);
  } else {
    throw InputError("unknown experiment '" + opt.experiment + "'");
  }
  Json table = Json::array();
  for (const auto& row : rows) {
    Json obj;
    for (std::size_t k = 0; k < header.size(); ++k) obj[header[k]] = number(row[k]);
    table.push_back(std::move(obj));
  }
  r["rows"] = table;
  finish(o, checks);
  o.extras.emplace_back(".svg", svg);
  // The CSV is the primary artifact of a sweep.
  o.headline.clear();
  o.report["csv"] = csv_table(header, rows);
  return o;
}

// ---------------------------------------------------------------------------

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream o;
  o << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return o.str();
}

std::string stem_of(const std::string& path) {
  std::filesystem::path p(path);
  return (p.parent_path() / p.stem()).string();
}

void write_sidecar(const std::string& out, const std::vector<std::string>& args) {
  Json meta;
  meta["timestamp"] = timestamp();
  meta["args"] = args;
  write_text_file(out + ".meta.json", meta.dump(2) + "\n");
}

/// Writes the outcome and returns the exit code.
int emit(const Outcome& o, const Options& opt, const std::vector<std::string>& args, bool sweep,
         std::ostream& out, std::ostream& err) {
  std::string primary;
  if (sweep) {
    primary = o.report.at("csv").get<std::string>();
  } else if (opt.format == "csv") {
    primary = headline_csv(o.headline);
  } else {
    primary = o.report.dump(2) + "\n";
  }
  if (opt.out.empty()) {
    out << primary;
  } else {
    write_text_file(opt.out, primary);
    const std::string stem = stem_of(opt.out);
    if (sweep) {
      Json report = o.report;
      report.erase("csv");
      write_text_file(stem + ".json", report.dump(2) + "\n");
    } else if (opt.format == "json" && !o.headline.empty()) {
      write_text_file(stem + ".csv", headline_csv(o.headline));
    }
    for (const auto& [suffix, text] : o.extras) write_text_file(stem + suffix, text);
    write_sidecar(opt.out, args);
  }
  if (!o.passed) {
    err << "failed checks:";
    for (const auto& f : o.failures) err << ' ' << f;
    err << '\n';
    return kExitCertificate;
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Model-based RL theory lab: counterexamples, losses and diagnostics", "mbrl_lab"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* c) {
    c->add_option("--seed", opt.seed, "RNG seed");
    c->add_option("--out", opt.out, "Output path (stdout when omitted)");
  };
  auto add_mdp = [&](CLI::App* c) {
    c->add_option("--mdp", opt.mdp_path, "MDP JSON file");
    c->add_option("--builtin", opt.builtin, "Registered instance name");
    c->add_option("--role", opt.role, "truth or wrong")->check(CLI::IsMember({"truth", "wrong"}));
    c->add_option("--horizon", opt.horizon, "Horizon of a builtin instance");
    c->add_option("--p-b", opt.p_b, "P(B) of the prop1 variant");
  };

  auto* ce = app.add_subcommand("counterexample", "Build an instance and run its certificate suite");
  ce->add_option("name", opt.name, "prop1, prop1-variant, prop2 or bisim-degenerate")->required();
  ce->add_option("--horizon", opt.horizon, "Horizon (prop2)");
  ce->add_option("--samples", opt.samples, "Monte-Carlo sample size");
  ce->add_option("--trajectories", opt.trajectories, "Number of trajectories (prop2)");
  ce->add_option("--p-b", opt.p_b, "P(B) in the truth (prop1-variant)");
  ce->add_option("--max-latents", opt.max_latents, "Latents per layer in the encoder search");
  ce->add_option("--format", opt.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  add_common(ce);

  auto* ev = app.add_subcommand("eval-loss", "Evaluate a model loss on a dataset");
  ev->add_option("--loss", opt.loss, "mle, l2, latent-mle or reward-pred")
      ->required()
      ->check(CLI::IsMember({"mle", "l2", "latent-mle", "reward-pred"}));
  add_mdp(ev);
  ev->add_option("--data", opt.data_path, "Dataset JSONL")->required();
  ev->add_option("--encoder", opt.encoder_path, "Encoder JSON (latent-mle)");
  ev->add_option("--embedding", opt.embedding_path, "Embedding JSON (l2)");
  ev->add_flag("--squared", opt.squared, "Squared L2 distance");
  ev->add_option("--format", opt.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  add_common(ev);

  auto* sw = app.add_subcommand("sweep", "Tabulate a quantity over a grid; writes CSV and SVG");
  sw->add_option("experiment", opt.experiment,
                 "prop2-detection-vs-H, prop1-loss-vs-n or coverage-vs-H")
      ->required();
  sw->add_option("--range", opt.range, "a:b, a:b:step or a,b,c");
  sw->add_option("--trajectories", opt.trajectories, "Dataset size (prop2-detection-vs-H)");
  add_common(sw);

  auto* sa = app.add_subcommand("sample", "Sample a dataset as JSONL");
  add_mdp(sa);
  sa->add_option("--policy", opt.policy_path, "Behavior policy JSON (uniform by default)");
  sa->add_option("--samples,--trajectories", opt.samples, "Number of tuples or trajectories")
      ->required();
  add_common(sa);

  auto* va = app.add_subcommand("validate", "Check MDP invariants");
  add_mdp(va);
  va->add_option("--out", opt.out, "Output path");

  auto* ex = app.add_subcommand("export", "Write an MDP as explicit JSON");
  add_mdp(ex);
  ex->add_option("--out", opt.out, "Output path");

  std::vector<std::string> argv_store{"mbrl_lab"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (ce->parsed()) return emit(cmd_counterexample(opt), opt, args, false, out, err);
    if (ev->parsed()) return emit(cmd_eval_loss(opt), opt, args, false, out, err);
    if (sw->parsed()) return emit(cmd_sweep(opt), opt, args, true, out, err);
    if (sa->parsed()) {
      const Mdp m = load_mdp(opt);
      const Policy pi = opt.policy_path.empty()
                            ? Policy::uniform()
                            : policy_from_json(read_json_file(opt.policy_path), m.actions());
      const Dataset d = m.episodic() ? sample_trajectories(m, pi, opt.samples, opt.seed)
                                     : sample_tuples(m, occupancy(m, pi), opt.samples, opt.seed);
      std::ostringstream text;
      write_dataset(text, d);
      if (opt.out.empty()) {
        out << text.str();
      } else {
        write_text_file(opt.out, text.str());
        write_sidecar(opt.out, args);
      }
      return kExitOk;
    }
    if (va->parsed()) {
      const Mdp m = load_mdp(opt);
      const auto violations = validate(m);
      Json j;
      j["mdp"] = m.name();
      j["valid"] = violations.empty();
      Json list = Json::array();
      for (const auto& v : violations) {
        list.push_back({{"layer", v.layer}, {"state", v.state}, {"action", v.action},
                        {"message", v.message}});
      }
      j["violations"] = list;
      const std::string text = j.dump(2) + "\n";
      if (opt.out.empty()) {
        out << text;
      } else {
        write_text_file(opt.out, text);
      }
      return violations.empty() ? kExitOk : kExitCertificate;
    }
    if (ex->parsed()) {
      const std::string text = mdp_to_json(load_mdp(opt)).dump(2) + "\n";
      if (opt.out.empty()) {
        out << text;
      } else {
        write_text_file(opt.out, text);
      }
      return kExitOk;
    }
  } catch (const CertificateError& e) {
    err << "certificate failure: " << e.what() << '\n';
    return kExitCertificate;
  } catch (const ConvergenceError& e) {
    err << "convergence failure: " << e.what() << '\n';
    return kExitCertificate;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace mbrl
