#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "mtrl/generators.hpp"
#include "mtrl/instance.hpp"

namespace mtrl {

// On-disk schema: compact nested arrays (transition indexed
// layer -> state-in-layer -> action -> next-layer state; init_dist over the
// first layer only). Doubles round-trip bit-exactly.

nlohmann::json mdp_to_json(const LayeredMDP& mdp);
LayeredMDP mdp_from_json(const nlohmann::json& j);  // structural errors throw

nlohmann::json instance_to_json(const MultiTaskInstance& inst);
MultiTaskInstance instance_from_json(const nlohmann::json& j);

/// Load + parse + validate; throws std::runtime_error on I/O problems and
/// std::invalid_argument on schema or validation failures.
MultiTaskInstance load_instance(const std::string& path);
void save_instance(const MultiTaskInstance& inst, const std::string& path);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const nlohmann::json& j, const std::string& path);

HardInstanceParams hard_params_from_json(const nlohmann::json& j);
RandomInstanceConfig random_config_from_json(const nlohmann::json& j);

/// Dispatch a generator params object by its "variant" field.
MultiTaskInstance generate_from_json(const nlohmann::json& j);

}  // namespace mtrl
