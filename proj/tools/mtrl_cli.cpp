#include <cstdio>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mtrl/experiment.hpp"
#include "mtrl/json_io.hpp"
#include "mtrl/verification.hpp"

namespace {

using nlohmann::json;

constexpr int kOk = 0;
constexpr int kValidationError = 1;
constexpr int kVerificationFailure = 2;
constexpr int kIoError = 3;

struct GenerateArgs {
  std::string variant;
  std::string out = "instance.json";
  std::string params_file;
  std::string delta_table_file;
  bool force = false;
  // Flag values; only flags the user passed are overlaid onto params.
  long s1 = 0, s = 0, a = 0, h = 0, m = 0, k = 0, l = 0, seed = 0;
  double epsilon = 0.0, reward_scale = 1.0;
};

void print_instance_report(const mtrl::MultiTaskInstance& inst, double probe_epsilon) {
  const mtrl::Shape shape = inst.tasks[0].shape();
  const mtrl::Dissimilarity dis = mtrl::measure_dissimilarity(inst);
  const mtrl::GapAnalysis analysis = mtrl::analyze_gaps(inst);

  std::printf("players %d, states %d, actions %d, horizon %d\n", inst.num_players(),
              shape.num_states(), shape.num_actions, shape.horizon);
  std::printf("declared epsilon %.17g\n", inst.declared_epsilon);
  std::printf("measured epsilon %.17g (reward %.17g, transition %.17g)\n", dis.eps(),
              dis.eps_reward, dis.eps_transition);
  if (analysis.gap_min) {
    std::printf("min positive gap %.17g\n", *analysis.gap_min);
  } else {
    std::printf("min positive gap n/a (all gaps zero)\n");
  }

  std::set<double> grid = {0.0};
  for (double scale : {0.125, 0.25, 0.5, 1.0, 2.0}) {
    if (inst.declared_epsilon > 0.0) grid.insert(scale * inst.declared_epsilon);
  }
  if (probe_epsilon > 0.0) grid.insert(probe_epsilon);
  std::printf("%-24s %s\n", "epsilon", "|subpar set|");
  for (double eps : grid) {
    std::printf("%-24.17g %zu\n", eps, mtrl::subpar_set(inst, eps).size());
  }
}

int cmd_generate(const GenerateArgs& args, const std::vector<std::string>& passed) {
  json params;
  if (!args.params_file.empty()) params = mtrl::read_json_file(args.params_file);
  if (!params.is_object()) params = json::object();
  params["variant"] = args.variant;

  auto overlay = [&](const char* flag, const char* key, const json& value) {
    if (std::find(passed.begin(), passed.end(), flag) != passed.end()) {
      params[key] = value;
    }
  };
  overlay("--s1", "layer_width", args.s1);
  overlay("--S", "num_states", args.s);
  overlay("--A", "num_actions", args.a);
  overlay("--H", "horizon", args.h);
  overlay("--M", "num_players", args.m);
  overlay("--K", "episodes", args.k);
  overlay("--l", "subpar_target", args.l);
  overlay("--seed", "seed", args.seed);
  overlay("--epsilon", "epsilon", args.epsilon);
  overlay("--reward-scale", "reward_scale", args.reward_scale);
  if (!args.delta_table_file.empty()) {
    params["delta_table"] = mtrl::read_json_file(args.delta_table_file);
  }

  mtrl::MultiTaskInstance inst;
  double probe = 0.0;
  if (args.variant == "random") {
    // Random generation keys on layer_width; tolerate --S as an alias when
    // --H divides it.
    if (!params.contains("layer_width") && params.contains("num_states")) {
      const long s_total = params["num_states"].get<long>();
      const long h = params.value("horizon", 1L);
      if (h < 1 || s_total % h != 0) {
        throw std::invalid_argument("random variant: --S must be divisible by --H");
      }
      params["layer_width"] = s_total / h;
    }
    params.erase("num_states");
    inst = mtrl::gen_random(mtrl::random_config_from_json(params));
  } else {
    const mtrl::HardInstanceParams hp = mtrl::hard_params_from_json(params);
    const mtrl::HardInstanceResult result =
        hp.variant == mtrl::HardVariant::kGapDependent
            ? mtrl::gen_gap_dependent_hard(hp)
            : mtrl::gen_gap_independent_hard(hp);
    inst = result.instance;
    probe = result.epsilon / (192.0 * hp.horizon);
    std::printf("realized delta %.17g, declared epsilon %.17g, subpar target >= %ld\n",
                result.delta, result.epsilon, result.subpar_lower_bound);
  }

  if (std::filesystem::exists(args.out) && !args.force) {
    throw std::runtime_error(args.out + " exists (pass --force to overwrite)");
  }
  mtrl::save_instance(inst, args.out);
  std::printf("wrote %s\n", args.out.c_str());
  print_instance_report(inst, probe);
  return kOk;
}

int cmd_run(const std::string& spec_file, const std::string& out_override,
            long episodes_override, const std::string& instance_override, bool force) {
  json j = mtrl::read_json_file(spec_file);
  if (!out_override.empty()) j["output_dir"] = out_override;
  if (episodes_override > 0) j["episodes"] = episodes_override;
  if (!instance_override.empty()) {
    j["instance_path"] = instance_override;
    j.erase("generator");
  }
  const mtrl::ExperimentSpec spec = mtrl::parse_experiment_spec(j);
  const mtrl::MultiTaskInstance inst = mtrl::resolve_instance(spec);
  const json summary = mtrl::run_experiment(spec, inst, force);

  for (const auto& [name, entry] : summary.at("configs").items()) {
    long last_episode = 0;
    double final_mean = 0.0;
    for (const auto& [ck, stats] : entry.at("regret").items()) {
      const long episode = std::stol(ck);
      if (episode >= last_episode) {
        last_episode = episode;
        final_mean = stats.at("mean").get<double>();
      }
    }
    std::printf("%s: mean regret %.6g after %ld episodes, violating runs %d, "
                "min surplus %.6g\n",
                name.c_str(), final_mean, last_episode,
                entry.at("violating_runs").get<int>(),
                entry.at("min_surplus").get<double>());
  }
  std::printf("artifacts in %s\n", spec.output_dir.c_str());
  return kOk;
}

int cmd_verify(const std::vector<std::string>& suites, bool quick,
               const std::string& json_out) {
  const std::set<std::string> all = {"oracle", "lemmas", "construction", "bounds",
                                     "decomposition", "degeneracy", "trend"};
  std::set<std::string> wanted(suites.begin(), suites.end());
  if (wanted.empty()) wanted = all;
  for (const auto& name : wanted) {
    if (!all.count(name)) {
      throw std::invalid_argument("unknown suite: " + name);
    }
  }

  std::vector<mtrl::SuiteResult> results;
  if (wanted.count("oracle")) {
    results.push_back(mtrl::verify_oracle_suite(quick ? 20 : 100));
  }
  if (wanted.count("lemmas")) {
    results.push_back(mtrl::verify_lemma1_suite(quick ? 30 : 200));
    results.push_back(mtrl::verify_lemma2_suite(quick ? 30 : 200));
  }
  if (wanted.count("construction")) {
    results.push_back(mtrl::verify_construction_suite(quick ? 10 : 50));
  }
  if (wanted.count("bounds")) {
    const mtrl::BoundsSuiteOutcome outcome =
        quick ? mtrl::verify_bounds_suite(10, 500, 1) : mtrl::verify_bounds_suite();
    results.push_back(outcome.validity);
    results.push_back(outcome.optimism);
  }
  if (wanted.count("decomposition")) {
    results.push_back(mtrl::verify_decomposition_suite(quick ? 200 : 500));
  }
  if (wanted.count("degeneracy")) {
    results.push_back(quick ? mtrl::verify_degeneracy_suite(100, 2)
                            : mtrl::verify_degeneracy_suite());
  }
  if (wanted.count("trend")) {
    const mtrl::RegretTrendOutcome outcome =
        quick ? mtrl::verify_regret_trend_suite(4000, 3)
              : mtrl::verify_regret_trend_suite();
    results.push_back(outcome.sublinear);
    results.push_back(outcome.advantage);
  }

  bool all_passed = true;
  json report = json::array();
  for (const auto& r : results) {
    std::printf("%-14s %s  %s\n", r.name.c_str(), r.passed ? "PASS" : "FAIL",
                r.detail.c_str());
    all_passed = all_passed && r.passed;
    report.push_back({{"suite", r.name}, {"passed", r.passed}, {"detail", r.detail},
                      {"data", r.data}});
  }
  if (!json_out.empty()) mtrl::write_json_file(report, json_out);
  return all_passed ? kOk : kVerificationFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"epsilon-dissimilar multi-task episodic RL toolkit"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "generate an instance file");
  generate->add_option("--variant", gen.variant,
                       "random | gap-independent-case1 | gap-independent-case2 | "
                       "gap-dependent")
      ->required();
  generate->add_option("--out", gen.out, "output instance path");
  generate->add_option("--params", gen.params_file, "params JSON (flags override)");
  generate->add_option("--delta-table", gen.delta_table_file,
                       "JSON file with [state][action][player] gap targets");
  generate->add_flag("--force", gen.force, "overwrite existing output");
  generate->add_option("--s1", gen.s1, "states per layer (random variant)");
  generate->add_option("--S", gen.s, "total states");
  generate->add_option("--A", gen.a, "actions");
  generate->add_option("--H", gen.h, "horizon");
  generate->add_option("--M", gen.m, "players");
  generate->add_option("--K", gen.k, "episode budget the construction calibrates to");
  generate->add_option("--l", gen.l, "subpar pair target");
  generate->add_option("--seed", gen.seed, "generator seed");
  generate->add_option("--epsilon", gen.epsilon, "dissimilarity budget");
  generate->add_option("--reward-scale", gen.reward_scale, "reward scale (random)");

  std::string run_spec, run_out, run_instance;
  long run_episodes = 0;
  bool run_force = false;
  CLI::App* run = app.add_subcommand("run", "run an experiment spec");
  run->add_option("--spec", run_spec, "experiment spec JSON")->required();
  run->add_option("--out", run_out, "override output_dir");
  run->add_option("--episodes", run_episodes, "override episode count");
  run->add_option("--instance", run_instance, "override instance path");
  run->add_flag("--force", run_force, "overwrite existing artifacts");

  std::vector<std::string> verify_suites;
  bool verify_quick = false;
  std::string verify_json;
  CLI::App* verify = app.add_subcommand("verify", "run property suites");
  verify->add_option("--suite", verify_suites,
                     "oracle|lemmas|construction|bounds|decomposition|degeneracy|trend "
                     "(default: all)");
  verify->add_flag("--quick", verify_quick, "smaller corpora for a fast pass");
  verify->add_option("--json", verify_json, "write machine-readable results here");

  try {
    app.parse(argc, argv);
    if (generate->parsed()) {
      std::vector<std::string> passed;
      for (const auto* opt : generate->get_options()) {
        if (opt->count() > 0) passed.push_back(opt->get_name());
      }
      return cmd_generate(gen, passed);
    }
    if (run->parsed()) {
      return cmd_run(run_spec, run_out, run_episodes, run_instance, run_force);
    }
    if (verify->parsed()) {
      return cmd_verify(verify_suites, verify_quick, verify_json);
    }
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidationError;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kValidationError;
  } catch (const std::logic_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kValidationError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kIoError;
  }
  return kOk;
}
