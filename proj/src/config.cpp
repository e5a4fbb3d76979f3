#include "sumrecom/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "sumrecom/error.hpp"

namespace sumrecom {

using nlohmann::json;

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kNoActive: return "AC";
    case Variant::kNoPreference: return "PR";
    case Variant::kGeneratorOnly: return "GE";
  }
  return "full";
}

Variant parse_variant(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  if (s == "FULL") return Variant::kFull;
  if (s == "AC") return Variant::kNoActive;
  if (s == "PR") return Variant::kNoPreference;
  if (s == "GE") return Variant::kGeneratorOnly;
  fail(ErrorCode::kValidation, "unknown variant '" + std::string(name) + "'");
}

namespace {

std::string_view policy_mode_name(PolicyMode m) {
  return m == PolicyMode::kBandit ? "bandit" : "sequential";
}

PolicyMode parse_policy_mode(std::string_view s) {
  if (s == "bandit") return PolicyMode::kBandit;
  if (s == "sequential") return PolicyMode::kSequential;
  fail(ErrorCode::kValidation, "unknown policy mode '" + std::string(s) + "'");
}

RefitMode parse_refit(std::string_view s) {
  if (s == "incremental") return RefitMode::kIncremental;
  if (s == "full") return RefitMode::kFull;
  fail(ErrorCode::kValidation, "unknown refit mode '" + std::string(s) + "'");
}

}  // namespace

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) fail(ErrorCode::kValidation, msg);
  };
  require(budget >= 1, "budget must be at least 1");
  require(length_limit >= 1, "length_limit must be at least 1");
  require(reward_budget >= 1, "reward_budget must be at least 1");
  require(seeds >= 1, "seeds must be at least 1");
  require(concept_learning_rate > 0 && summary_learning_rate > 0, "learning rates must be positive");
  require(epochs >= 1, "epochs must be at least 1");
  require(pool_size >= 1, "pool_size must be at least 1");
  require(redundancy_cap >= 0, "redundancy_cap must be nonnegative");
  require(preferred_fraction >= 0 && preferred_fraction <= 1, "preferred_fraction must lie in [0,1]");
  require(reward_iterations >= 1, "reward_iterations must be at least 1");
  require(policy_episodes >= 1, "policy_episodes must be at least 1");
  require(initial_temperature > 0 && final_temperature > 0, "temperatures must be positive");
  require(truncation >= 0, "truncation must be nonnegative");
  require(noise >= 0 && noise < 1, "noise must lie in [0,1)");
  const auto& names = concept_feature_names();
  for (const auto& f : features) {
    require(std::find(names.begin(), names.end(), f) != names.end(), "unknown feature '" + f + "'");
  }
}

json to_json(const RunConfig& c) {
  return json{{"unit", to_string(c.unit)},
              {"budget", c.budget},
              {"length_limit", c.length_limit},
              {"strategy", to_string(c.strategy)},
              {"reward_mode", to_string(c.reward_mode)},
              {"reward_budget", c.reward_budget},
              {"seed", c.seed},
              {"seeds", c.seeds},
              {"concept_learning_rate", c.concept_learning_rate},
              {"summary_learning_rate", c.summary_learning_rate},
              {"epochs", c.epochs},
              {"alpha", c.alpha},
              {"beta", c.beta},
              {"gamma", c.gamma},
              {"pool_size", c.pool_size},
              {"redundancy_cap", c.redundancy_cap},
              {"preferred_fraction", c.preferred_fraction},
              {"reward_iterations", c.reward_iterations},
              {"reward_l2", c.reward_l2},
              {"policy_mode", policy_mode_name(c.policy_mode)},
              {"policy_episodes", c.policy_episodes},
              {"policy_learning_rate", c.policy_learning_rate},
              {"initial_temperature", c.initial_temperature},
              {"final_temperature", c.final_temperature},
              {"truncation", c.truncation},
              {"diversity_weight", c.diversity_weight},
              {"noise", c.noise},
              {"refit", c.refit == RefitMode::kFull ? "full" : "incremental"},
              {"variant", to_string(c.variant)},
              {"features", c.features}};
}

RunConfig merge_config(RunConfig c, const json& j) {
  if (!j.is_object()) fail(ErrorCode::kValidation, "config must be a JSON object");
  static const std::vector<std::string> known = [] {
    std::vector<std::string> keys;
    const json defaults = to_json(RunConfig{});
    for (auto it = defaults.begin(); it != defaults.end(); ++it) keys.push_back(it.key());
    return keys;
  }();
  try {
    for (auto& [k, v] : j.items()) {
      if (std::find(known.begin(), known.end(), k) == known.end()) {
        fail(ErrorCode::kValidation, "unknown config key '" + k + "'");
      }
    }
    if (j.contains("unit")) c.unit = parse_concept_unit(j["unit"].get<std::string>());
    if (j.contains("budget")) c.budget = j["budget"].get<int>();
    if (j.contains("length_limit")) c.length_limit = j["length_limit"].get<int>();
    if (j.contains("strategy")) c.strategy = parse_strategy(j["strategy"].get<std::string>());
    if (j.contains("reward_mode")) c.reward_mode = parse_reward_mode(j["reward_mode"].get<std::string>());
    if (j.contains("reward_budget")) c.reward_budget = j["reward_budget"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("seeds")) c.seeds = j["seeds"].get<int>();
    if (j.contains("concept_learning_rate")) c.concept_learning_rate = j["concept_learning_rate"].get<double>();
    if (j.contains("summary_learning_rate")) c.summary_learning_rate = j["summary_learning_rate"].get<double>();
    if (j.contains("epochs")) c.epochs = j["epochs"].get<int>();
    if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
    if (j.contains("beta")) c.beta = j["beta"].get<double>();
    if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
    if (j.contains("pool_size")) c.pool_size = j["pool_size"].get<int>();
    if (j.contains("redundancy_cap")) c.redundancy_cap = j["redundancy_cap"].get<double>();
    if (j.contains("preferred_fraction")) c.preferred_fraction = j["preferred_fraction"].get<double>();
    if (j.contains("reward_iterations")) c.reward_iterations = j["reward_iterations"].get<int>();
    if (j.contains("reward_l2")) c.reward_l2 = j["reward_l2"].get<double>();
    if (j.contains("policy_mode")) c.policy_mode = parse_policy_mode(j["policy_mode"].get<std::string>());
    if (j.contains("policy_episodes")) c.policy_episodes = j["policy_episodes"].get<int>();
    if (j.contains("policy_learning_rate")) c.policy_learning_rate = j["policy_learning_rate"].get<double>();
    if (j.contains("initial_temperature")) c.initial_temperature = j["initial_temperature"].get<double>();
    if (j.contains("final_temperature")) c.final_temperature = j["final_temperature"].get<double>();
    if (j.contains("truncation")) c.truncation = j["truncation"].get<int>();
    if (j.contains("diversity_weight")) c.diversity_weight = j["diversity_weight"].get<double>();
    if (j.contains("noise")) c.noise = j["noise"].get<double>();
    if (j.contains("refit")) c.refit = parse_refit(j["refit"].get<std::string>());
    if (j.contains("variant")) c.variant = parse_variant(j["variant"].get<std::string>());
    if (j.contains("features")) c.features = j["features"].get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kValidation, std::string("bad config value: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path, const RunConfig& base) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::kValidation, "config " + path + " is not valid JSON: " + e.what());
  }
  return merge_config(base, j);
}

RougeOptions rouge_options(const RunConfig& c) {
  RougeOptions o;
  o.mode = RougeMode::kRecall;
  if (c.truncation > 0) {
    o.truncation = c.truncation;
  } else {
    o.truncation.reset();
  }
  return o;
}

RunConfig effective_config(RunConfig c) {
  if (c.variant == Variant::kNoActive) c.strategy = Strategy::kRandom;
  return c;
}

}  // namespace sumrecom
