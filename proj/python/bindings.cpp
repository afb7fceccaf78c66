#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "mbrl/abstraction.hpp"
#include "mbrl/cli.hpp"
#include "mbrl/counterexamples.hpp"
#include "mbrl/diagnostics.hpp"
#include "mbrl/error.hpp"
#include "mbrl/evaluation.hpp"
#include "mbrl/io.hpp"
#include "mbrl/losses.hpp"
#include "mbrl/sampling.hpp"

namespace py = pybind11;
using namespace mbrl;

namespace {

// Structured results cross the boundary as JSON and come back as dicts.
py::object to_py(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json from_py(const py::object& o) {
  return Json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

Distribution to_distribution(const std::vector<double>& probs) {
  Distribution d;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    d.support.push_back(std::to_string(i));
    d.probs.push_back(probs[i]);
  }
  return d;
}

py::dict certificates_of(const std::vector<Certificate>& certs) {
  py::dict out;
  for (const auto& c : certs) {
    py::dict row;
    row["stored"] = c.stored;
    row["computed"] = c.computed;
    row["passed"] = c.passed;
    out[py::str(c.name)] = row;
  }
  return out;
}

py::dict coverage_dict(const CoverageResult& r) {
  py::dict d;
  d["ratio"] = r.infinite ? py::float_(INFINITY) : py::float_(r.ratio);
  d["infinite"] = r.infinite;
  d["layer"] = r.layer;
  d["state"] = r.state;
  d["action"] = r.action;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact and sampled model-learning diagnostics on finite MDPs";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<SizeError>(m, "SizeError", PyExc_ValueError);
  py::register_exception<CertificateError>(m, "CertificateError", PyExc_RuntimeError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

  py::class_<Mdp>(m, "Mdp")
      .def_property_readonly("name", &Mdp::name)
      .def_property_readonly("episodic", [](const Mdp& self) { return self.episodic(); })
      .def_property_readonly("horizon", &Mdp::horizon)
      .def_property_readonly("gamma", &Mdp::gamma)
      .def_property_readonly("actions", &Mdp::actions)
      .def_property_readonly("initial", &Mdp::initial)
      .def_property_readonly("num_layers", &Mdp::num_layers)
      .def("states", &Mdp::states, py::arg("layer"))
      .def("reward", [](const Mdp& self, std::size_t h, const std::string& s,
                        ActionIndex a) { return self.reward(h, s, a); })
      .def("next",
           [](const Mdp& self, std::size_t h, const std::string& s, ActionIndex a) {
             const Distribution d = self.next(h, s, a);
             std::map<std::string, double> out;
             for (std::size_t k = 0; k < d.size(); ++k) out[d.support[k]] = d.probs[k];
             return out;
           })
      .def("to_json", [](const Mdp& self) { return to_py(mdp_to_json(self)); })
      .def_static("from_json", [](const py::object& o) { return mdp_from_json(from_py(o)); });

  py::class_<Policy>(m, "Policy")
      .def_static("uniform", &Policy::uniform)
      .def_static("constant", &Policy::constant, py::arg("action"))
      .def_static("from_json",
                  [](const py::object& o, const std::vector<std::string>& actions) {
                    return policy_from_json(from_py(o), actions);
                  })
      .def("probs", &Policy::probs, py::arg("layer"), py::arg("state"), py::arg("num_actions"));

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("count", &Dataset::count)
      .def_property_readonly("seed", [](const Dataset& d) { return d.seed; })
      .def("to_jsonl",
           [](const Dataset& d) {
             std::ostringstream o;
             write_dataset(o, d);
             return o.str();
           })
      .def_static("from_jsonl", [](const std::string& text) {
        std::istringstream in(text);
        return read_dataset(in);
      });

  m.def("builtin_mdp", &builtin_mdp, py::arg("name"), py::arg("role") = "truth",
        py::arg("horizon") = 20, py::arg("p_b") = 0.0);
  m.def("counterexample_names", &counterexample_names);
  m.def("validate", [](const Mdp& mdp) {
    std::vector<std::string> out;
    for (const auto& v : validate(mdp)) out.push_back(v.message);
    return out;
  });

  m.def("expected_return", &expected_return, py::arg("mdp"), py::arg("policy"));
  m.def("plan_optimal", [](const Mdp& mdp) {
    const PlanResult r = plan_optimal(mdp);
    return py::make_tuple(r.policy, r.values.at(0, mdp.initial()));
  });

  m.def("sample_trajectories", &sample_trajectories, py::arg("mdp"), py::arg("policy"),
        py::arg("n"), py::arg("seed"));
  m.def(
      "sample_tuples",
      [](const Mdp& mdp, const Policy& pi, std::size_t n, std::uint64_t seed) {
        return sample_tuples(mdp, occupancy(mdp, pi), n, seed);
      },
      py::arg("mdp"), py::arg("policy"), py::arg("n"), py::arg("seed"),
      "Tuples drawn from the occupancy of `policy`.");

  m.def(
      "reward_prediction_loss_expected",
      [](const Mdp& cand, const Mdp& truth, const Policy& pi) {
        return to_py(loss_report_to_json(reward_prediction_loss_expected(cand, truth, pi)));
      },
      py::arg("candidate"), py::arg("truth"), py::arg("pi_d"));
  m.def(
      "reward_prediction_loss_empirical",
      [](const Mdp& cand, const Dataset& d, std::uint64_t seed) {
        return to_py(loss_report_to_json(reward_prediction_loss_empirical(cand, d, seed)));
      },
      py::arg("candidate"), py::arg("data"), py::arg("seed"));
  m.def(
      "mle_loss", [](const Mdp& cand, const Dataset& d) { return to_py(loss_report_to_json(mle_loss(cand, d))); },
      py::arg("candidate"), py::arg("data"));
  m.def(
      "expected_mle_loss",
      [](const Mdp& cand, const Mdp& truth, const Policy& pi) {
        return to_py(loss_report_to_json(expected_mle_loss(cand, truth, occupancy(truth, pi))));
      },
      py::arg("candidate"), py::arg("truth"), py::arg("pi_d"));

  m.def("pinsker_check", [](const std::vector<double>& p, const std::vector<double>& q) {
    const PinskerResult r = pinsker_check(to_distribution(p), to_distribution(q));
    py::dict d;
    d["tv"] = r.tv;
    d["kl"] = r.kl_infinite ? INFINITY : r.kl;
    d["kl_infinite"] = r.kl_infinite;
    d["bound_holds"] = r.bound_holds;
    return d;
  });

  m.def("simulation_lemma_terms", [](const Mdp& model, const Mdp& truth, const Policy& pi) {
    const auto r = simulation_lemma_terms(model, truth, pi);
    py::dict d;
    d["j_truth"] = r.j_truth;
    d["j_model"] = r.j_model;
    d["lhs"] = r.lhs;
    d["eq1_rhs"] = r.eq1_rhs;
    d["eq2_bound"] = r.eq2_bound;
    d["half_l1_bound"] = r.half_l1_bound;
    d["expected_tv"] = r.expected_tv;
    return d;
  });

  m.def("state_action_coverage", [](const Mdp& mdp, const Policy& pi, const Policy& pi_d) {
    return coverage_dict(state_action_coverage(mdp, pi, occupancy(mdp, pi_d)));
  });
  m.def("trajectory_coverage", [](const Mdp& mdp, const Policy& pi, const Policy& pi_d) {
    return coverage_dict(trajectory_coverage(mdp, pi, pi_d));
  });

  m.def("distinguishing_probability", &distinguishing_probability, py::arg("horizon"));
  m.def("dataset_detection_probability", &dataset_detection_probability, py::arg("horizon"),
        py::arg("n"));

  m.def(
      "certificates",
      [](const std::string& name, std::size_t horizon, double p_b) {
        if (name == "prop1") return certificates_of(build_prop1().certificates);
        if (name == "prop1-variant") return certificates_of(build_prop1_variant(p_b).certificates);
        if (name == "prop2") return certificates_of(build_prop2(horizon).certificates);
        if (name == "bisim-degenerate") return certificates_of(build_bisim_degenerate().certificates);
        throw InputError("unknown instance '" + name + "'");
      },
      py::arg("name"), py::arg("horizon") = 20, py::arg("p_b") = 0.1);

  m.def(
      "search_encoders",
      [](std::size_t max_latents) {
        const auto inst = build_bisim_degenerate();
        py::list out;
        for (const auto& c : search_encoders(inst.truth, inst.data_dist, max_latents)) {
          py::dict d;
          d["id"] = c.id;
          d["loss"] = c.loss;
          d["entropy"] = c.entropy;
          d["excess"] = c.excess;
          d["is_bisimulation"] = c.is_bisimulation;
          d["num_latents"] = c.num_latents;
          out.append(d);
        }
        return out;
      },
      py::arg("max_latents") = 5,
      "Encoder ranking on the bisimulation-degeneracy instance.");

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  });
}
