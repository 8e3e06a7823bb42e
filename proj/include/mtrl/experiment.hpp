#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtrl/learner.hpp"

namespace mtrl {

struct EmitFlags {
  bool regret_csv = true;
  bool summary = true;
  bool plotdata = true;
};

/// One experiment: an instance (path or inline generator params), learner
/// configs to compare, seeds, and what to write where.
struct ExperimentSpec {
  std::string instance_path;          // exclusive with generator
  nlohmann::json generator;           // inline generator params (object) or null
  std::vector<LearnerConfig> configs; // seed field ignored; seeds below apply
  std::vector<std::uint64_t> seeds;
  long episodes = 0;
  std::string output_dir = ".";
  EmitFlags emit;
};

/// Parse a spec JSON; unknown keys are rejected. Flags from the CLI override
/// fields before the spec is executed.
ExperimentSpec parse_experiment_spec(const nlohmann::json& j);

/// Materialize the spec's instance (load or generate).
MultiTaskInstance resolve_instance(const ExperimentSpec& spec);

/**
 * Run every (config, seed) pair, parallelized over a worker pool sized by
 * MTRL_THREADS (default: hardware concurrency), then write per-run regret
 * CSVs, an aggregate summary JSON, and a per-episode plotdata CSV. Results
 * are deterministic for fixed seeds regardless of thread count. Returns the
 * summary. Refuses to overwrite existing artifacts unless `force`.
 */
nlohmann::json run_experiment(const ExperimentSpec& spec, const MultiTaskInstance& inst,
                              bool force = false);

/// Streamed CSV of one run's log (header + one row per (episode, player)).
void write_regret_csv(const RegretLog& log, const std::string& path);

int thread_budget();  // MTRL_THREADS or hardware concurrency, >= 1

}  // namespace mtrl
