#include "mtrl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <thread>

#include "mtrl/detail/strfmt.hpp"
#include "mtrl/json_io.hpp"

namespace mtrl {

using detail::fmt;
using nlohmann::json;

namespace fs = std::filesystem;

int thread_budget() {
  if (const char* env = std::getenv("MTRL_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end && *end == '\0' && parsed >= 1) return static_cast<int>(parsed);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

[[noreturn]] void bad(const std::string& what) { throw std::invalid_argument(what); }

LearnerConfig learner_config_from_json(const json& j) {
  if (!j.is_object()) bad("configs entries must be objects");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "name" && key != "mode" && key != "delta" && key != "epsilon_input" &&
        key != "preset" && key != "bonus") {
      bad(fmt("config: unknown key \"%s\"", key.c_str()));
    }
  }
  LearnerConfig cfg;
  if (j.contains("name")) cfg.name = j.at("name").get<std::string>();
  if (j.contains("mode")) {
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "multitask") {
      cfg.mode = LearnerMode::kMultitask;
    } else if (mode == "individual_baseline") {
      cfg.mode = LearnerMode::kIndividualBaseline;
    } else {
      bad("config.mode: \"multitask\" or \"individual_baseline\"");
    }
  }
  if (j.contains("delta")) cfg.delta = j.at("delta").get<double>();
  if (j.contains("epsilon_input") && !j.at("epsilon_input").is_null()) {
    cfg.epsilon_input = j.at("epsilon_input").get<double>();
  }
  if (j.contains("preset")) {
    const auto preset = j.at("preset").get<std::string>();
    if (preset == "practical") {
      cfg.bonus = BonusConfig::practical(cfg.delta);
    } else if (preset == "theory") {
      cfg.bonus = BonusConfig::theory(cfg.delta);
    } else {
      bad("config.preset: \"practical\" or \"theory\"");
    }
  }
  if (j.contains("bonus")) {
    const json& b = j.at("bonus");
    for (const auto& [key, value] : b.items()) {
      if (key == "c_rw") {
        cfg.bonus.c_rw = value.get<double>();
      } else if (key == "c_var") {
        cfg.bonus.c_var = value.get<double>();
      } else if (key == "c_str") {
        cfg.bonus.c_str = value.get<double>();
      } else if (key == "c_lot") {
        cfg.bonus.c_lot = value.get<double>();
      } else {
        bad(fmt("config.bonus: unknown key \"%s\"", key.c_str()));
      }
    }
  }
  return cfg;
}

struct RunOutcome {
  std::vector<double> cum;  // collective cumulative regret per episode
  long violation_rows = 0;
  double min_surplus = 0.0;
};

double mean_of(const std::vector<double>& xs) {
  double total = 0.0;
  for (double x : xs) total += x;
  return xs.empty() ? 0.0 : total / static_cast<double>(xs.size());
}

double std_of(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double total = 0.0;
  for (double x : xs) total += (x - mean) * (x - mean);
  return std::sqrt(total / static_cast<double>(xs.size() - 1));
}

}  // namespace

ExperimentSpec parse_experiment_spec(const json& j) {
  if (!j.is_object()) bad("experiment spec: expected an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "instance_path" && key != "generator" && key != "configs" &&
        key != "seeds" && key != "episodes" && key != "output_dir" && key != "emit") {
      bad(fmt("experiment spec: unknown key \"%s\"", key.c_str()));
    }
  }
  ExperimentSpec spec;
  if (j.contains("instance_path")) spec.instance_path = j.at("instance_path").get<std::string>();
  if (j.contains("generator")) spec.generator = j.at("generator");
  if (spec.instance_path.empty() == spec.generator.is_null()) {
    bad("experiment spec: exactly one of instance_path or generator");
  }
  if (!j.contains("configs") || !j.at("configs").is_array() || j.at("configs").empty()) {
    bad("experiment spec: configs must be a non-empty array");
  }
  for (const auto& c : j.at("configs")) spec.configs.push_back(learner_config_from_json(c));
  if (!j.contains("seeds") || !j.at("seeds").is_array() || j.at("seeds").empty()) {
    bad("experiment spec: seeds must be a non-empty array");
  }
  for (const auto& s : j.at("seeds")) {
    if (!s.is_number_integer()) bad("experiment spec: seeds must be integers");
    spec.seeds.push_back(s.get<std::uint64_t>());
  }
  if (!j.contains("episodes")) bad("experiment spec: episodes required");
  spec.episodes = j.at("episodes").get<long>();
  if (spec.episodes < 1) bad("experiment spec: episodes must be >= 1");
  if (j.contains("output_dir")) spec.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("emit")) {
    const json& e = j.at("emit");
    for (const auto& [key, value] : e.items()) {
      if (key == "regret_csv") {
        spec.emit.regret_csv = value.get<bool>();
      } else if (key == "summary") {
        spec.emit.summary = value.get<bool>();
      } else if (key == "plotdata") {
        spec.emit.plotdata = value.get<bool>();
      } else {
        bad(fmt("experiment spec: unknown emit key \"%s\"", key.c_str()));
      }
    }
  }

  // Distinct artifact names per config.
  for (std::size_t i = 0; i < spec.configs.size(); ++i) {
    for (std::size_t k = i + 1; k < spec.configs.size(); ++k) {
      if (spec.configs[i].resolved_name() == spec.configs[k].resolved_name()) {
        bad("experiment spec: duplicate config name " + spec.configs[i].resolved_name());
      }
    }
  }
  return spec;
}

MultiTaskInstance resolve_instance(const ExperimentSpec& spec) {
  if (!spec.instance_path.empty()) return load_instance(spec.instance_path);
  return generate_from_json(spec.generator);
}

void write_regret_csv(const RegretLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "episode,player,regret_increment,cum_collective_regret,violations,min_surplus\n";
  char buf[160];
  for (long k = 0; k < log.episodes; ++k) {
    for (int p = 0; p < log.num_players; ++p) {
      const std::size_t r = log.row(k, p);
      std::snprintf(buf, sizeof(buf), "%ld,%d,%.17g,%.17g,%d,%.17g\n", k + 1, p,
                    log.regret_increment[r], log.cum_collective[r], log.violations[r],
                    log.min_surplus[r]);
      out << buf;
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

json run_experiment(const ExperimentSpec& spec, const MultiTaskInstance& inst,
                    bool force) {
  require_valid(inst);
  const fs::path dir(spec.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string());

  const std::size_t jobs = spec.configs.size() * spec.seeds.size();
  auto csv_path = [&](const LearnerConfig& cfg, std::uint64_t seed) {
    return dir / fmt("%s_seed%llu.csv", cfg.resolved_name().c_str(),
                     static_cast<unsigned long long>(seed));
  };

  std::vector<fs::path> outputs;
  if (spec.emit.regret_csv) {
    for (const auto& cfg : spec.configs) {
      for (std::uint64_t seed : spec.seeds) outputs.push_back(csv_path(cfg, seed));
    }
  }
  if (spec.emit.summary) outputs.push_back(dir / "summary.json");
  if (spec.emit.plotdata) outputs.push_back(dir / "plotdata.csv");
  if (!force) {
    for (const auto& path : outputs) {
      if (fs::exists(path)) {
        throw std::runtime_error(path.string() + " exists (pass --force to overwrite)");
      }
    }
  }

  std::vector<RunOutcome> outcomes(jobs);
  std::vector<std::exception_ptr> errors(jobs);
  std::atomic<std::size_t> next{0};
  const int workers = std::min<int>(thread_budget(), static_cast<int>(jobs));

  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs) return;
      try {
        LearnerConfig cfg = spec.configs[i / spec.seeds.size()];
        cfg.seed = spec.seeds[i % spec.seeds.size()];
        RegretLog log = run(inst, cfg, spec.episodes);
        if (spec.emit.regret_csv) {
          write_regret_csv(log, csv_path(cfg, cfg.seed).string());
        }
        RunOutcome& out = outcomes[i];
        out.cum.resize(spec.episodes);
        for (long k = 0; k < spec.episodes; ++k) out.cum[k] = log.cum_at(k);
        out.violation_rows = log.total_violations;
        out.min_surplus = log.global_min_surplus;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }

  std::vector<long> checkpoints;
  for (long c : {spec.episodes / 10, spec.episodes / 2, spec.episodes}) {
    c = std::max(1L, c);
    if (std::find(checkpoints.begin(), checkpoints.end(), c) == checkpoints.end()) {
      checkpoints.push_back(c);
    }
  }
  std::sort(checkpoints.begin(), checkpoints.end());

  const Shape shape = inst.tasks[0].shape();
  json summary;
  summary["episodes"] = spec.episodes;
  summary["seeds"] = spec.seeds;
  summary["instance"] = {{"num_players", inst.num_players()},
                         {"num_states", shape.num_states()},
                         {"num_actions", shape.num_actions},
                         {"horizon", shape.horizon},
                         {"declared_epsilon", inst.declared_epsilon}};

  json configs = json::object();
  std::vector<std::vector<double>> means_at(spec.configs.size());
  for (std::size_t c = 0; c < spec.configs.size(); ++c) {
    const std::string name = spec.configs[c].resolved_name();
    json regret = json::object();
    for (long ck : checkpoints) {
      std::vector<double> finals;
      for (std::size_t s = 0; s < spec.seeds.size(); ++s) {
        finals.push_back(outcomes[c * spec.seeds.size() + s].cum[ck - 1]);
      }
      const double mean = mean_of(finals);
      regret[std::to_string(ck)] = {{"mean", mean}, {"std", std_of(finals, mean)}};
      means_at[c].push_back(mean);
    }
    long violation_rows = 0;
    int violating_runs = 0;
    double min_surplus = std::numeric_limits<double>::infinity();
    json per_seed = json::array();
    for (std::size_t s = 0; s < spec.seeds.size(); ++s) {
      const RunOutcome& out = outcomes[c * spec.seeds.size() + s];
      violation_rows += out.violation_rows;
      if (out.violation_rows > 0) ++violating_runs;
      min_surplus = std::min(min_surplus, out.min_surplus);
      per_seed.push_back(out.cum.back());
    }
    configs[name] = {{"regret", regret},
                     {"final_per_seed", per_seed},
                     {"violation_rows", violation_rows},
                     {"violating_runs", violating_runs},
                     {"min_surplus", min_surplus}};
  }
  summary["configs"] = std::move(configs);

  json ratios = json::object();
  for (std::size_t a = 0; a < spec.configs.size(); ++a) {
    for (std::size_t b = 0; b < spec.configs.size(); ++b) {
      if (a == b) continue;
      json per_ck = json::object();
      for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        if (means_at[b][i] != 0.0) {
          per_ck[std::to_string(checkpoints[i])] = means_at[a][i] / means_at[b][i];
        } else {
          per_ck[std::to_string(checkpoints[i])] = nullptr;
        }
      }
      ratios[spec.configs[a].resolved_name() + "/" + spec.configs[b].resolved_name()] =
          std::move(per_ck);
    }
  }
  summary["ratios"] = std::move(ratios);

  if (spec.emit.summary) write_json_file(summary, (dir / "summary.json").string());

  if (spec.emit.plotdata) {
    std::ofstream out(dir / "plotdata.csv");
    if (!out) throw std::runtime_error("cannot open plotdata.csv for writing");
    out << "episode";
    for (const auto& cfg : spec.configs) {
      out << ',' << cfg.resolved_name() << "_mean," << cfg.resolved_name() << "_std";
    }
    out << '\n';
    char buf[64];
    std::vector<double> finals(spec.seeds.size());
    for (long k = 0; k < spec.episodes; ++k) {
      out << (k + 1);
      for (std::size_t c = 0; c < spec.configs.size(); ++c) {
        for (std::size_t s = 0; s < spec.seeds.size(); ++s) {
          finals[s] = outcomes[c * spec.seeds.size() + s].cum[k];
        }
        const double mean = mean_of(finals);
        std::snprintf(buf, sizeof(buf), ",%.17g,%.17g", mean, std_of(finals, mean));
        out << buf;
      }
      out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: plotdata.csv");
  }
  return summary;
}

}  // namespace mtrl
