#include <optional>
#include <stdexcept>
#include <string>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "mtrl/experiment.hpp"
#include "mtrl/json_io.hpp"
#include "mtrl/oracle.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

mtrl::LearnerConfig make_config(const std::string& mode, double delta,
                                std::optional<double> epsilon_input,
                                const std::string& preset, std::uint64_t seed,
                                const std::string& name) {
  mtrl::LearnerConfig cfg;
  if (mode == "multitask") {
    cfg.mode = mtrl::LearnerMode::kMultitask;
  } else if (mode == "individual_baseline") {
    cfg.mode = mtrl::LearnerMode::kIndividualBaseline;
  } else {
    throw std::invalid_argument("mode: \"multitask\" or \"individual_baseline\"");
  }
  cfg.delta = delta;
  cfg.epsilon_input = epsilon_input;
  if (preset == "practical") {
    cfg.bonus = mtrl::BonusConfig::practical(delta);
  } else if (preset == "theory") {
    cfg.bonus = mtrl::BonusConfig::theory(delta);
  } else {
    throw std::invalid_argument("preset: \"practical\" or \"theory\"");
  }
  cfg.seed = seed;
  cfg.name = name;
  return cfg;
}

const mtrl::LayeredMDP& task_of(const mtrl::MultiTaskInstance& inst, int player) {
  if (player < 0 || player >= inst.num_players()) {
    throw std::out_of_range("player out of range");
  }
  return inst.task(player);
}

}  // namespace

PYBIND11_MODULE(_mtrl, m) {
  m.doc() = "multi-task episodic RL simulator core";

  py::class_<mtrl::MultiTaskInstance>(m, "Instance")
      .def_property_readonly("num_players", &mtrl::MultiTaskInstance::num_players)
      .def_property_readonly("declared_epsilon",
                             [](const mtrl::MultiTaskInstance& inst) {
                               return inst.declared_epsilon;
                             })
      .def_property_readonly("num_states",
                             [](const mtrl::MultiTaskInstance& inst) {
                               return inst.tasks.at(0).num_states();
                             })
      .def_property_readonly("num_actions",
                             [](const mtrl::MultiTaskInstance& inst) {
                               return inst.tasks.at(0).num_actions;
                             })
      .def_property_readonly("horizon",
                             [](const mtrl::MultiTaskInstance& inst) {
                               return inst.tasks.at(0).horizon;
                             })
      .def("to_json", [](const mtrl::MultiTaskInstance& inst) {
        return mtrl::instance_to_json(inst).dump();
      })
      .def("__repr__", [](const mtrl::MultiTaskInstance& inst) {
        const mtrl::Shape shape = inst.tasks.at(0).shape();
        char buf[128];
        std::snprintf(buf, sizeof(buf),
                      "Instance(players=%d, states=%d, actions=%d, horizon=%d, "
                      "epsilon=%g)",
                      inst.num_players(), shape.num_states(), shape.num_actions,
                      shape.horizon, inst.declared_epsilon);
        return std::string(buf);
      });

  py::class_<mtrl::RegretLog>(m, "RegretLog")
      .def_property_readonly("episodes",
                             [](const mtrl::RegretLog& log) { return log.episodes; })
      .def_property_readonly("num_players",
                             [](const mtrl::RegretLog& log) { return log.num_players; })
      .def_property_readonly("regret_increment",
                             [](const mtrl::RegretLog& log) {
                               return log.regret_increment;
                             })
      .def_property_readonly("cum_collective",
                             [](const mtrl::RegretLog& log) { return log.cum_collective; })
      .def_property_readonly("realized_return",
                             [](const mtrl::RegretLog& log) { return log.realized_return; })
      .def_property_readonly("total_violations",
                             [](const mtrl::RegretLog& log) { return log.total_violations; })
      .def_property_readonly("min_surplus",
                             [](const mtrl::RegretLog& log) {
                               return log.global_min_surplus;
                             })
      .def("final_regret", &mtrl::RegretLog::final_regret)
      .def("cum_at", &mtrl::RegretLog::cum_at, py::arg("episode"))
      .def("policy_at", &mtrl::RegretLog::policy_at, py::arg("episode"),
           py::arg("player"), py::arg("state"));

  m.def("load_instance", &mtrl::load_instance, py::arg("path"));
  m.def("save_instance", &mtrl::save_instance, py::arg("instance"), py::arg("path"));
  m.def("instance_from_json",
        [](const std::string& text) {
          mtrl::MultiTaskInstance inst = mtrl::instance_from_json(json::parse(text));
          mtrl::require_valid(inst);
          return inst;
        },
        py::arg("text"));
  m.def("generate",
        [](const std::string& params) {
          return mtrl::generate_from_json(json::parse(params));
        },
        py::arg("params"), "Generate an instance from generator params JSON.");

  m.def("validate",
        [](const mtrl::MultiTaskInstance& inst) { return mtrl::validate(inst).issues; },
        py::arg("instance"), "Validation issues; empty means valid.");

  m.def("measure_dissimilarity",
        [](const mtrl::MultiTaskInstance& inst) {
          const mtrl::Dissimilarity d = mtrl::measure_dissimilarity(inst);
          py::dict out;
          out["epsilon"] = d.eps();
          out["reward"] = d.eps_reward;
          out["transition"] = d.eps_transition;
          out["reward_witness"] = py::make_tuple(d.reward_arg[0], d.reward_arg[1],
                                                 d.reward_arg[2], d.reward_arg[3]);
          out["transition_witness"] =
              py::make_tuple(d.transition_arg[0], d.transition_arg[1],
                             d.transition_arg[2], d.transition_arg[3]);
          return out;
        },
        py::arg("instance"));

  m.def("subpar_set", &mtrl::subpar_set, py::arg("instance"), py::arg("epsilon"));

  m.def("verify_lemma1",
        [](const mtrl::MultiTaskInstance& inst, double eps) {
          const mtrl::Lemma1Report rep = mtrl::verify_lemma1(inst, eps);
          py::dict out;
          out["passed"] = rep.passed;
          out["max_q_diff"] = rep.max_q_diff;
          out["q_bound"] = rep.q_bound;
          out["max_gap_diff"] = rep.max_gap_diff;
          out["gap_bound"] = rep.gap_bound;
          out["summary"] = rep.str();
          return out;
        },
        py::arg("instance"), py::arg("epsilon"));

  m.def("verify_lemma2",
        [](const mtrl::MultiTaskInstance& inst, double eps) {
          const mtrl::Lemma2Report rep = mtrl::verify_lemma2(inst, eps);
          py::dict out;
          out["passed"] = rep.passed;
          out["subpar_count"] = rep.subpar_count;
          out["vacuous"] = rep.vacuous();
          out["min_gap_on_subpar"] = rep.min_gap_on_subpar;
          out["worst_ratio"] = rep.worst_ratio;
          out["summary"] = rep.str();
          return out;
        },
        py::arg("instance"), py::arg("epsilon"));

  m.def("optimal_values",
        [](const mtrl::MultiTaskInstance& inst, int player) {
          const mtrl::ValueTables vt = mtrl::optimal_values(task_of(inst, player));
          return py::make_tuple(vt.v, vt.q);
        },
        py::arg("instance"), py::arg("player"));

  m.def("gaps",
        [](const mtrl::MultiTaskInstance& inst, int player) {
          return mtrl::gaps(task_of(inst, player)).gap;
        },
        py::arg("instance"), py::arg("player"));

  m.def("policy_value",
        [](const mtrl::MultiTaskInstance& inst, int player,
           const mtrl::Policy& policy) {
          return mtrl::expected_return(task_of(inst, player), policy);
        },
        py::arg("instance"), py::arg("player"), py::arg("policy"));

  m.def("brute_force_optimal",
        [](const mtrl::MultiTaskInstance& inst, int player) {
          const mtrl::ValueTables vt = mtrl::brute_force_optimal(task_of(inst, player));
          return py::make_tuple(vt.v, vt.q);
        },
        py::arg("instance"), py::arg("player"));

  m.def("run",
        [](const mtrl::MultiTaskInstance& inst, long episodes, const std::string& mode,
           double delta, std::optional<double> epsilon_input, const std::string& preset,
           std::uint64_t seed, const std::string& name) {
          return mtrl::run(inst, make_config(mode, delta, epsilon_input, preset, seed,
                                             name),
                           episodes);
        },
        py::arg("instance"), py::arg("episodes"), py::arg("mode") = "multitask",
        py::arg("delta") = 0.1, py::arg("epsilon_input") = py::none(),
        py::arg("preset") = "practical", py::arg("seed") = 0, py::arg("name") = "",
        "Run the learner; regret increments are exact DP expectations.");

  m.def("check_regret_decomposition",
        [](const mtrl::MultiTaskInstance& inst, const mtrl::RegretLog& log) {
          const mtrl::DecompositionReport rep =
              mtrl::check_regret_decomposition(inst, log);
          py::dict out;
          out["regret_total"] = rep.regret_total;
          out["weighted_gap_total"] = rep.weighted_gap_total;
          out["inequality_holds"] = rep.inequality_holds;
          out["identity_applicable"] = rep.identity_applicable;
          out["identity_holds"] = rep.identity_holds;
          out["max_identity_error"] = rep.max_identity_error;
          out["summary"] = rep.str();
          return out;
        },
        py::arg("instance"), py::arg("log"));

  m.def("run_experiment",
        [](const std::string& spec_text, bool force) {
          const mtrl::ExperimentSpec spec =
              mtrl::parse_experiment_spec(json::parse(spec_text));
          const mtrl::MultiTaskInstance inst = mtrl::resolve_instance(spec);
          return mtrl::run_experiment(spec, inst, force).dump();
        },
        py::arg("spec"), py::arg("force") = false,
        "Execute an experiment spec JSON; returns the summary JSON.");

  m.def("thread_budget", &mtrl::thread_budget);
}
