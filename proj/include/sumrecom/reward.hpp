#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sumrecom/corpus.hpp"
#include "sumrecom/preflearn.hpp"
#include "sumrecom/rouge.hpp"
#include "sumrecom/sumgen.hpp"

namespace sumrecom {

struct SummaryFeatureVector {
  std::vector<double> values;
};

/// mean_* and max_* for every concept feature, then length_ratio,
/// redundancy, rouge1, rouge2. Each sentence is described by the mean
/// feature vector of its concepts; the summary takes the mean and the max of
/// those over its sentences.
std::vector<std::string> summary_feature_names(const DocumentCluster& cluster);

/// ROUGE components are zero when `references` is null or empty.
SummaryFeatureVector summary_features(const Summary& summary, const DocumentCluster& cluster,
                                      int L, const std::vector<Tokens>* references,
                                      const RougeOptions& rouge_options = {});

enum class RewardMode { kPoint, kPairwise };

std::string_view to_string(RewardMode mode);
RewardMode parse_reward_mode(std::string_view name);

struct RewardModel {
  std::vector<double> weights;
  RewardMode mode = RewardMode::kPairwise;
  double learning_rate = 0.005;
  int iterations = 2000;
  double l2 = 1e-4;
};

double predict(const RewardModel& model, const SummaryFeatureVector& features);
double predict(std::span<const double> weights, std::span<const double> features);

struct ScoredSample {
  std::vector<double> features;
  double score = 0.0;
};

/// (1/L) sum (w.x - v)^2 + l2 ||w||^2
double mse_loss(std::span<const double> weights, std::span<const ScoredSample> samples, double l2);
std::vector<double> mse_gradient(std::span<const double> weights,
                                 std::span<const ScoredSample> samples, double l2);

/// -sum [y log H + (1-y) log(1-H)] + l2 ||w||^2 with H = sigmoid(V(left) - V(right)).
double cross_entropy_loss(std::span<const double> weights,
                          std::span<const PreferenceRecord> prefs, const FeatureRows& features,
                          double l2);
std::vector<double> cross_entropy_gradient(std::span<const double> weights,
                                           std::span<const PreferenceRecord> prefs,
                                           const FeatureRows& features, double l2);

/// Probability that summary `left` beats `right` under the model.
double summary_preference_probability(std::span<const double> weights,
                                      std::span<const double> left,
                                      std::span<const double> right);

/// Full-batch gradient descent on the MSE loss.
RewardModel fit_point(RewardModel model, std::span<const ScoredSample> samples);

/// Full-batch gradient descent on the pairwise cross-entropy loss.
RewardModel fit_pairwise(RewardModel model, std::span<const PreferenceRecord> prefs,
                         const FeatureRows& features);

/// Max-min selection in feature space: the `k` new indices whose smallest
/// distance to each other and to the already-asked items is largest. With
/// nothing asked, index 0 (the top-scoring pool member) is the first pick.
/// Exhaustive over subsets when there are few, greedy otherwise.
std::vector<std::size_t> select_query_summaries(const FeatureRows& features,
                                                const std::vector<std::size_t>& asked,
                                                std::size_t k);

}  // namespace sumrecom
