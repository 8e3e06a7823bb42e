#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "mtrl/experiment.hpp"
#include "mtrl/json_io.hpp"

using namespace mtrl;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json base_spec(const std::string& out_dir) {
  return json{{"generator",
               {{"variant", "random"},
                {"layer_width", 2},
                {"horizon", 2},
                {"num_actions", 2},
                {"num_players", 2},
                {"epsilon", 0.1},
                {"seed", 3}}},
              {"configs",
               {{{"name", "a"}, {"mode", "multitask"}},
                {{"name", "b"}, {"mode", "individual_baseline"}}}},
              {"seeds", {1, 2}},
              {"episodes", 10},
              {"output_dir", out_dir}};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const char* tag)
      : path(fs::temp_directory_path() / tag) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("experiment spec parsing and rejection") {
  const json good = base_spec("out");
  const ExperimentSpec spec = parse_experiment_spec(good);
  CHECK(spec.episodes == 10);
  CHECK(spec.seeds == std::vector<std::uint64_t>{1, 2});
  CHECK(spec.configs.size() == 2);
  CHECK(spec.configs[0].resolved_name() == "a");
  CHECK(spec.configs[1].mode == LearnerMode::kIndividualBaseline);
  CHECK(spec.output_dir == "out");
  CHECK(spec.emit.regret_csv);
  CHECK(spec.emit.summary);
  CHECK(spec.emit.plotdata);

  SUBCASE("unknown top-level key") {
    json j = good;
    j["bogus"] = 1;
    CHECK_THROWS_AS(static_cast<void>(parse_experiment_spec(j)), std::invalid_argument);
  }
  SUBCASE("instance source must be exclusive") {
    json j = good;
    j["instance_path"] = "x.json";
    CHECK_THROWS_AS(static_cast<void>(parse_experiment_spec(j)), std::invalid_argument);
    j.erase("generator");
    j.erase("instance_path");
    CHECK_THROWS_AS(static_cast<void>(parse_experiment_spec(j)), std::invalid_argument);
  }
  SUBCASE("configs, seeds, episodes sanity") {
    json j = good;
    j["configs"] = json::array();
    CHECK_THROWS_AS(static_cast<void>(parse_experiment_spec(j)), std::invalid_argument);
    j = good;
    j["seeds"] = json::array();
    CHECK_THROWS_AS(static_cast<void>(parse_experiment_spec(j)), std::invalid_argument);
    j = good;
    j["episodes"] = 0;
    CHECK_THROWS_AS(static_cast<void>(parse_experiment_spec(j)), std::invalid_argument);
  }
  SUBCASE("duplicate config names") {
    json j = good;
    j["configs"][1]["name"] = "a";
    CHECK_THROWS_WITH_AS(static_cast<void>(parse_experiment_spec(j)),
                         doctest::Contains("duplicate config name"),
                         std::invalid_argument);
  }
  SUBCASE("config details") {
    json j = good;
    j["configs"][0]["preset"] = "theory";
    j["configs"][0]["bonus"] = {{"c_rw", 2.5}};
    j["configs"][0]["delta"] = 0.05;
    j["configs"][0]["epsilon_input"] = nullptr;
    const ExperimentSpec parsed = parse_experiment_spec(j);
    CHECK(parsed.configs[0].bonus.c_rw == 2.5);
    CHECK(parsed.configs[0].bonus.c_var == 4.0);
    CHECK(parsed.configs[0].delta == 0.05);
    CHECK_FALSE(parsed.configs[0].epsilon_input.has_value());

    j["configs"][0]["mode"] = "solo";
    CHECK_THROWS_AS(static_cast<void>(parse_experiment_spec(j)), std::invalid_argument);
  }
}

TEST_CASE("experiment artifacts, collision handling, and CSV shape") {
  TempDir dir("mtrl_exp_test");
  const ExperimentSpec spec = parse_experiment_spec(base_spec(dir.path.string()));
  const MultiTaskInstance inst = resolve_instance(spec);
  const json summary = run_experiment(spec, inst);

  for (const char* name : {"a_seed1.csv", "a_seed2.csv", "b_seed1.csv", "b_seed2.csv",
                           "summary.json", "plotdata.csv"}) {
    CHECK(fs::exists(dir.path / name));
  }

  const std::string csv = slurp(dir.path / "a_seed1.csv");
  std::istringstream lines(csv);
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line ==
        "episode,player,regret_increment,cum_collective_regret,violations,min_surplus");
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    if (rows == 1) CHECK(line.substr(0, 4) == "1,0,");
    // 6 comma-separated fields per row.
    CHECK(std::count(line.begin(), line.end(), ',') == 5);
  }
  CHECK(rows == 10 * 2);

  const std::string plot = slurp(dir.path / "plotdata.csv");
  CHECK(plot.substr(0, plot.find('\n')) == "episode,a_mean,a_std,b_mean,b_std");

  const json from_disk = read_json_file((dir.path / "summary.json").string());
  CHECK(from_disk == summary);
  CHECK(summary.at("episodes") == 10);
  CHECK(summary.at("configs").contains("a"));
  CHECK(summary.at("configs").at("a").at("regret").contains("10"));
  CHECK(summary.at("configs").at("a").at("regret").contains("5"));
  CHECK(summary.at("configs").at("a").at("regret").contains("1"));
  CHECK(summary.at("configs").at("a").at("final_per_seed").size() == 2);
  CHECK(summary.at("ratios").contains("a/b"));
  CHECK(summary.at("ratios").contains("b/a"));

  // Same outputs again: refused without force, replaced with force.
  CHECK_THROWS_WITH_AS(static_cast<void>(run_experiment(spec, inst)),
                       doctest::Contains("--force"), std::runtime_error);
  const json again = run_experiment(spec, inst, true);
  CHECK(again == summary);
}

TEST_CASE("csv doubles survive a text round trip") {
  TempDir dir("mtrl_csv_test");
  json j = base_spec(dir.path.string());
  j["episodes"] = 3;
  j["configs"] = json::array({{{"name", "a"}}});
  j["seeds"] = {1};
  const ExperimentSpec spec = parse_experiment_spec(j);
  const MultiTaskInstance inst = resolve_instance(spec);
  run_experiment(spec, inst);

  LearnerConfig cfg = spec.configs[0];
  cfg.seed = 1;
  const RegretLog log = run(inst, cfg, 3);

  std::ifstream in(dir.path / "a_seed1.csv");
  std::string line;
  std::getline(in, line);  // header
  for (long k = 0; k < 3; ++k) {
    for (int p = 0; p < 2; ++p) {
      REQUIRE(std::getline(in, line));
      std::istringstream row(line);
      std::string field;
      std::getline(row, field, ',');
      CHECK(std::stol(field) == k + 1);
      std::getline(row, field, ',');
      CHECK(std::stoi(field) == p);
      std::getline(row, field, ',');
      CHECK(std::strtod(field.c_str(), nullptr) == log.regret_increment[log.row(k, p)]);
      std::getline(row, field, ',');
      CHECK(std::strtod(field.c_str(), nullptr) == log.cum_collective[log.row(k, p)]);
      std::getline(row, field, ',');
      CHECK(std::stoi(field) == log.violations[log.row(k, p)]);
      std::getline(row, field, ',');
      CHECK(std::strtod(field.c_str(), nullptr) == log.min_surplus[log.row(k, p)]);
    }
  }
}

TEST_CASE("thread budget and cross-thread determinism") {
  char saved[64] = {0};
  const char* old = std::getenv("MTRL_THREADS");
  if (old) std::snprintf(saved, sizeof(saved), "%s", old);

  setenv("MTRL_THREADS", "7", 1);
  CHECK(thread_budget() == 7);
  setenv("MTRL_THREADS", "0", 1);
  CHECK(thread_budget() >= 1);
  setenv("MTRL_THREADS", "junk", 1);
  CHECK(thread_budget() >= 1);

  TempDir dir1("mtrl_thr1_test");
  TempDir dir2("mtrl_thr2_test");
  json j = base_spec(dir1.path.string());
  setenv("MTRL_THREADS", "1", 1);
  const ExperimentSpec spec1 = parse_experiment_spec(j);
  const json s1 = run_experiment(spec1, resolve_instance(spec1));

  j["output_dir"] = dir2.path.string();
  setenv("MTRL_THREADS", "4", 1);
  const ExperimentSpec spec2 = parse_experiment_spec(j);
  const json s2 = run_experiment(spec2, resolve_instance(spec2));

  CHECK(s1 == s2);
  CHECK(slurp(dir1.path / "a_seed2.csv") == slurp(dir2.path / "a_seed2.csv"));
  CHECK(slurp(dir1.path / "plotdata.csv") == slurp(dir2.path / "plotdata.csv"));

  if (old) {
    setenv("MTRL_THREADS", saved, 1);
  } else {
    unsetenv("MTRL_THREADS");
  }
}

TEST_CASE("emit flags suppress artifacts") {
  TempDir dir("mtrl_emit_test");
  json j = base_spec(dir.path.string());
  j["emit"] = {{"plotdata", false}, {"summary", false}};
  const ExperimentSpec spec = parse_experiment_spec(j);
  run_experiment(spec, resolve_instance(spec));
  CHECK(fs::exists(dir.path / "a_seed1.csv"));
  CHECK_FALSE(fs::exists(dir.path / "summary.json"));
  CHECK_FALSE(fs::exists(dir.path / "plotdata.csv"));

  json e = j;
  e["emit"]["bogus"] = true;
  CHECK_THROWS_AS(static_cast<void>(parse_experiment_spec(e)), std::invalid_argument);
}
