#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sumrecom/corpus.hpp"
#include "sumrecom/sumgen.hpp"

namespace sumrecom {

struct DraftState {
  std::vector<SentenceId> chosen_sentence_ids;  // in selection order
  int remaining_budget = 0;
  bool terminated = false;
};

/// Fresh draft for a length limit L; total length must stay strictly below L.
DraftState initial_state(int L);

struct Action {
  bool terminate = false;
  SentenceId sentence = -1;

  friend bool operator==(const Action&, const Action&) = default;
};

/// {terminate} plus every unused sentence that fits the remaining budget.
std::vector<Action> actions(const DraftState& state, const DocumentCluster& cluster);

DraftState apply_action(const DraftState& state, const Action& action,
                        const DocumentCluster& cluster);

Summary draft_summary(const DraftState& state, const DocumentCluster& cluster,
                      const ConceptWeights& weights);

using SummaryReward = std::function<double(const Summary&)>;

/// reward(summary) once terminated, 0 before.
double episode_reward(const DraftState& state, const DocumentCluster& cluster,
                      const ConceptWeights& weights, const SummaryReward& reward);

/// Numerically stable softmax at the given temperature.
std::vector<double> softmax(const std::vector<double>& values, double temperature);

enum class PolicyMode { kBandit, kSequential };

struct PolicyOptions {
  PolicyMode mode = PolicyMode::kBandit;
  int episodes = 2000;
  double learning_rate = 0.01;
  double initial_temperature = 1.0;
  double final_temperature = 0.1;
  int checkpoints = 10;
  std::uint64_t seed = 0;
};

struct PolicyModel {
  std::vector<double> weights;
  double temperature = 1.0;
  PolicyMode mode = PolicyMode::kBandit;
};

struct LearningCurvePoint {
  int episode = 0;
  double greedy_value = 0.0;
};

struct PolicyInputs {
  const DocumentCluster* cluster = nullptr;
  const SummaryPool* pool = nullptr;
  // Per pool member features (bandit mode); row i describes pool.summaries[i].
  const std::vector<std::vector<double>>* pool_features = nullptr;
  // Draft featurizer for sequential mode.
  std::function<std::vector<double>(const Summary&)> featurize;
  ConceptWeights concept_weights;
  SummaryReward reward;
  int L = 0;
};

struct PolicyResult {
  PolicyModel model;
  std::vector<LearningCurvePoint> curve;
};

/// Linear TD(0) with softmax exploration annealed linearly between the two
/// temperatures. Bandit mode picks whole pool members; sequential mode builds
/// drafts sentence by sentence with afterstate values.
PolicyResult train_policy(const PolicyInputs& inputs, const PolicyOptions& options);

/// Action distribution of the model over the pool (bandit mode).
std::vector<double> pool_distribution(const PolicyModel& model, const PolicyInputs& inputs);

/// Greedy decoding. Ties go to the lowest pool index or sentence id.
Summary best_summary(const PolicyModel& model, const PolicyInputs& inputs);
std::size_t best_pool_index(const PolicyModel& model, const PolicyInputs& inputs);

std::string learning_curve_csv(const std::vector<LearningCurvePoint>& curve);

}  // namespace sumrecom
