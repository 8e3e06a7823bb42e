#include "mtrl/json_io.hpp"

#include <fstream>
#include <initializer_list>
#include <stdexcept>

#include "mtrl/detail/strfmt.hpp"

namespace mtrl {

using detail::fmt;
using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw std::invalid_argument(what); }

const json& need(const json& j, const char* key, const char* ctx) {
  if (!j.is_object()) bad(fmt("%s: expected an object", ctx));
  auto it = j.find(key);
  if (it == j.end()) bad(fmt("%s: missing key \"%s\"", ctx, key));
  return *it;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const char* ctx) {
  if (!j.is_object()) bad(fmt("%s: expected an object", ctx));
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool ok = false;
    for (const char* k : allowed) {
      if (key == k) {
        ok = true;
        break;
      }
    }
    if (!ok) bad(fmt("%s: unknown key \"%s\"", ctx, key.c_str()));
  }
}

long need_int(const json& j, const char* key, const char* ctx) {
  const json& v = need(j, key, ctx);
  if (!v.is_number_integer()) bad(fmt("%s: \"%s\" must be an integer", ctx, key));
  return v.get<long>();
}

double need_double(const json& j, const char* key, const char* ctx) {
  const json& v = need(j, key, ctx);
  if (!v.is_number()) bad(fmt("%s: \"%s\" must be a number", ctx, key));
  return v.get<double>();
}

std::vector<double> need_double_array(const json& v, const char* ctx) {
  if (!v.is_array()) bad(fmt("%s: expected an array", ctx));
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) {
    if (!x.is_number()) bad(fmt("%s: expected numbers", ctx));
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

json mdp_to_json(const LayeredMDP& mdp) {
  const Shape shape = mdp.shape();
  json j;
  j["horizon"] = mdp.horizon;
  json sizes = json::array();
  for (int h = 0; h < mdp.horizon; ++h) sizes.push_back(shape.layer_size(h));
  j["layer_sizes"] = std::move(sizes);
  j["num_actions"] = mdp.num_actions;

  json p0 = json::array();
  for (int s = 0; s < shape.layer_size(0); ++s) p0.push_back(mdp.init_dist[s]);
  j["init_dist"] = std::move(p0);

  json layers = json::array();
  for (int h = 0; h < mdp.horizon; ++h) {
    const int nb = shape.next_begin(h);
    const int width = shape.next_width(h);
    json states = json::array();
    for (int s = shape.layer_offset[h]; s < shape.layer_offset[h + 1]; ++s) {
      json actions = json::array();
      for (int a = 0; a < mdp.num_actions; ++a) {
        auto row = mdp.row(s, a);
        json dist = json::array();
        for (int i = 0; i < width; ++i) dist.push_back(row[nb + i]);
        actions.push_back(std::move(dist));
      }
      states.push_back(std::move(actions));
    }
    layers.push_back(std::move(states));
  }
  j["transition"] = std::move(layers);

  json rewards = json::array();
  for (int s = 0; s < shape.num_states(); ++s) {
    json per_action = json::array();
    for (int a = 0; a < mdp.num_actions; ++a) per_action.push_back(mdp.reward(s, a));
    rewards.push_back(std::move(per_action));
  }
  j["mean_reward"] = std::move(rewards);
  j["reward_kind"] = mdp.reward_kind == RewardKind::kBernoulli ? "bernoulli"
                                                               : "deterministic";
  return j;
}

LayeredMDP mdp_from_json(const json& j) {
  const char* ctx = "mdp";
  check_keys(j, {"horizon", "layer_sizes", "num_actions", "init_dist", "transition",
                 "mean_reward", "reward_kind"}, ctx);
  const long horizon = need_int(j, "horizon", ctx);
  const long a_total = need_int(j, "num_actions", ctx);
  if (horizon < 1) bad("mdp: horizon must be >= 1");
  if (a_total < 1) bad("mdp: num_actions must be >= 1");

  const json& sizes = need(j, "layer_sizes", ctx);
  if (!sizes.is_array() || static_cast<long>(sizes.size()) != horizon) {
    bad(fmt("mdp: layer_sizes must be an array of %ld entries", horizon));
  }
  Shape shape;
  shape.horizon = static_cast<int>(horizon);
  shape.num_actions = static_cast<int>(a_total);
  shape.layer_offset.assign(horizon + 1, 0);
  for (long h = 0; h < horizon; ++h) {
    if (!sizes[h].is_number_integer() || sizes[h].get<long>() < 1) {
      bad(fmt("mdp: layer_sizes[%ld] must be a positive integer", h));
    }
    shape.layer_offset[h + 1] = shape.layer_offset[h] + sizes[h].get<int>();
  }

  LayeredMDP mdp = LayeredMDP::blank(shape);

  const auto p0 = need_double_array(need(j, "init_dist", ctx), "mdp.init_dist");
  if (static_cast<int>(p0.size()) != shape.layer_size(0)) {
    bad(fmt("mdp.init_dist: %zu entries, want first-layer size %d", p0.size(),
            shape.layer_size(0)));
  }
  std::copy(p0.begin(), p0.end(), mdp.init_dist.begin());

  const json& layers = need(j, "transition", ctx);
  if (!layers.is_array() || static_cast<long>(layers.size()) != horizon) {
    bad(fmt("mdp.transition: must have %ld layers", horizon));
  }
  for (long h = 0; h < horizon; ++h) {
    const json& states = layers[h];
    const int expect_states = shape.layer_size(static_cast<int>(h));
    if (!states.is_array() || static_cast<int>(states.size()) != expect_states) {
      bad(fmt("mdp.transition[%ld]: %zu states, want %d", h, states.size(),
              expect_states));
    }
    const int nb = shape.next_begin(static_cast<int>(h));
    const int width = shape.next_width(static_cast<int>(h));
    for (int i = 0; i < expect_states; ++i) {
      const json& actions = states[i];
      if (!actions.is_array() || static_cast<long>(actions.size()) != a_total) {
        bad(fmt("mdp.transition[%ld][%d]: %zu actions, want %ld", h, i,
                actions.size(), a_total));
      }
      const int s = shape.layer_offset[h] + i;
      for (long a = 0; a < a_total; ++a) {
        const auto dist = need_double_array(actions[a],
                                            fmt("mdp.transition[%ld][%d][%ld]", h, i, a).c_str());
        if (static_cast<int>(dist.size()) != width) {
          bad(fmt("mdp.transition[%ld][%d][%ld]: %zu entries, want successor width %d",
                  h, i, a, dist.size(), width));
        }
        auto row = mdp.row(s, static_cast<int>(a));
        for (int x = 0; x < width; ++x) row[nb + x] = dist[x];
      }
    }
  }

  const json& rewards = need(j, "mean_reward", ctx);
  if (!rewards.is_array() || static_cast<int>(rewards.size()) != shape.num_states()) {
    bad(fmt("mdp.mean_reward: must have %d state rows", shape.num_states()));
  }
  for (int s = 0; s < shape.num_states(); ++s) {
    const auto per_action = need_double_array(rewards[s], "mdp.mean_reward row");
    if (static_cast<long>(per_action.size()) != a_total) {
      bad(fmt("mdp.mean_reward[%d]: %zu entries, want %ld", s, per_action.size(),
              a_total));
    }
    for (long a = 0; a < a_total; ++a) mdp.mean_reward[s * a_total + a] = per_action[a];
  }

  const json& kind = need(j, "reward_kind", ctx);
  if (kind == "bernoulli") {
    mdp.reward_kind = RewardKind::kBernoulli;
  } else if (kind == "deterministic") {
    mdp.reward_kind = RewardKind::kDeterministic;
  } else {
    bad("mdp.reward_kind: must be \"bernoulli\" or \"deterministic\"");
  }
  return mdp;
}

json instance_to_json(const MultiTaskInstance& inst) {
  json j;
  j["declared_epsilon"] = inst.declared_epsilon;
  json tasks = json::array();
  for (const LayeredMDP& task : inst.tasks) tasks.push_back(mdp_to_json(task));
  j["tasks"] = std::move(tasks);
  return j;
}

MultiTaskInstance instance_from_json(const json& j) {
  check_keys(j, {"declared_epsilon", "tasks"}, "instance");
  MultiTaskInstance inst;
  inst.declared_epsilon = need_double(j, "declared_epsilon", "instance");
  const json& tasks = need(j, "tasks", "instance");
  if (!tasks.is_array() || tasks.empty()) bad("instance.tasks: non-empty array required");
  for (const auto& t : tasks) inst.tasks.push_back(mdp_from_json(t));
  return inst;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    bad(path + ": " + e.what());
  }
  return j;
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

MultiTaskInstance load_instance(const std::string& path) {
  MultiTaskInstance inst = instance_from_json(read_json_file(path));
  require_valid(inst);
  return inst;
}

void save_instance(const MultiTaskInstance& inst, const std::string& path) {
  require_valid(inst);
  write_json_file(instance_to_json(inst), path);
}

MultiTaskInstance generate_from_json(const json& j) {
  const json& variant = need(j, "variant", "generator");
  if (variant == "random") return gen_random(random_config_from_json(j));
  HardInstanceParams params = hard_params_from_json(j);
  if (params.variant == HardVariant::kGapDependent) {
    return gen_gap_dependent_hard(params).instance;
  }
  return gen_gap_independent_hard(params).instance;
}

RandomInstanceConfig random_config_from_json(const json& j) {
  const char* ctx = "generator(random)";
  check_keys(j, {"variant", "layer_width", "horizon", "num_actions", "num_players",
                 "epsilon", "reward_scale", "seed"}, ctx);
  RandomInstanceConfig cfg;
  cfg.layer_width = static_cast<int>(need_int(j, "layer_width", ctx));
  cfg.horizon = static_cast<int>(need_int(j, "horizon", ctx));
  cfg.num_actions = static_cast<int>(need_int(j, "num_actions", ctx));
  cfg.num_players = static_cast<int>(need_int(j, "num_players", ctx));
  if (j.contains("epsilon")) cfg.epsilon = need_double(j, "epsilon", ctx);
  if (j.contains("reward_scale")) cfg.reward_scale = need_double(j, "reward_scale", ctx);
  if (j.contains("seed")) cfg.seed = static_cast<std::uint64_t>(need_int(j, "seed", ctx));
  return cfg;
}

HardInstanceParams hard_params_from_json(const json& j) {
  const char* ctx = "generator(hard)";
  check_keys(j, {"variant", "num_states", "num_actions", "horizon", "num_players",
                 "episodes", "subpar_target", "seed", "delta_table", "epsilon"}, ctx);
  HardInstanceParams params;
  const json& variant = need(j, "variant", ctx);
  if (variant == "gap-independent-case1") {
    params.variant = HardVariant::kGapIndependentCase1;
  } else if (variant == "gap-independent-case2") {
    params.variant = HardVariant::kGapIndependentCase2;
  } else if (variant == "gap-dependent") {
    params.variant = HardVariant::kGapDependent;
  } else {
    bad("generator: unknown variant");
  }
  params.num_states = static_cast<int>(need_int(j, "num_states", ctx));
  params.num_actions = static_cast<int>(need_int(j, "num_actions", ctx));
  params.horizon = static_cast<int>(need_int(j, "horizon", ctx));
  params.num_players = static_cast<int>(need_int(j, "num_players", ctx));
  if (j.contains("episodes")) params.episodes = need_int(j, "episodes", ctx);
  if (j.contains("subpar_target")) params.subpar_target = need_int(j, "subpar_target", ctx);
  if (j.contains("seed")) params.seed = static_cast<std::uint64_t>(need_int(j, "seed", ctx));
  if (j.contains("epsilon")) params.epsilon = need_double(j, "epsilon", ctx);

  if (params.variant == HardVariant::kGapDependent) {
    const json& table = need(j, "delta_table", ctx);
    const int s1 = params.num_states - 2 * (params.horizon - 1);
    if (!table.is_array() || static_cast<int>(table.size()) != s1) {
      bad(fmt("generator.delta_table: want %d state rows", s1));
    }
    for (const auto& per_state : table) {
      if (!per_state.is_array() ||
          static_cast<int>(per_state.size()) != params.num_actions) {
        bad("generator.delta_table: each state row needs one entry per action");
      }
      for (const auto& per_action : per_state) {
        const auto per_player = need_double_array(per_action, "generator.delta_table");
        if (static_cast<int>(per_player.size()) != params.num_players) {
          bad("generator.delta_table: each action entry needs one value per player");
        }
        params.delta_table.insert(params.delta_table.end(), per_player.begin(),
                                  per_player.end());
      }
    }
  }
  return params;
}

}  // namespace mtrl
