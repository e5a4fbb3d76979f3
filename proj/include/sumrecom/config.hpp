#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sumrecom/active.hpp"
#include "sumrecom/corpus.hpp"
#include "sumrecom/policy.hpp"
#include "sumrecom/reward.hpp"

namespace sumrecom {

enum class Variant { kFull, kNoActive, kNoPreference, kGeneratorOnly };

std::string_view to_string(Variant v);
/// Accepts full, AC, PR, GE (case-insensitive).
Variant parse_variant(std::string_view name);

enum class RefitMode { kIncremental, kFull };

struct RunConfig {
  ConceptUnit unit = ConceptUnit::kBigram;
  int budget = 20;
  int length_limit = 100;
  Strategy strategy = Strategy::kHeuristic;
  RewardMode reward_mode = RewardMode::kPairwise;
  int reward_budget = 10;
  std::uint64_t seed = 0;
  int seeds = 20;
  double concept_learning_rate = 0.001;
  double summary_learning_rate = 0.005;
  int epochs = 50;
  double alpha = 0.8;
  double beta = 0.5;
  double gamma = 0.25;
  int pool_size = 20;
  double redundancy_cap = 0.5;
  double preferred_fraction = 0.25;
  int reward_iterations = 2000;
  double reward_l2 = 1e-4;
  PolicyMode policy_mode = PolicyMode::kBandit;
  int policy_episodes = 2000;
  double policy_learning_rate = 0.01;
  double initial_temperature = 1.0;
  double final_temperature = 0.1;
  int truncation = 75;  // 0 disables
  double diversity_weight = 1.0;
  double noise = 0.0;
  RefitMode refit = RefitMode::kIncremental;
  Variant variant = Variant::kFull;
  std::vector<std::string> features;  // empty means the full schema

  void validate() const;
};

nlohmann::json to_json(const RunConfig& config);
/// Fields missing from `j` keep the values already in `base`.
RunConfig merge_config(RunConfig base, const nlohmann::json& j);
RunConfig load_config(const std::string& path, const RunConfig& base = {});

RougeOptions rouge_options(const RunConfig& config);

/// Config after applying the ablation variant's overrides.
RunConfig effective_config(RunConfig config);

}  // namespace sumrecom
