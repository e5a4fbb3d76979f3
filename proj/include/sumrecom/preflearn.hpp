#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "sumrecom/corpus.hpp"

namespace sumrecom {

/// One answered pairwise query. label == 1 means `left` was preferred.
struct PreferenceRecord {
  int left_id = 0;
  int right_id = 0;
  int label = 0;
  int round = 0;
};

void validate(const PreferenceRecord& record);

/// Linear utility U*(c) = w . phi(c) trained with stochastic gradient ascent on
/// the Bradley-Terry log-likelihood.
struct UtilityModel {
  std::vector<double> weights;
  double learning_rate = 0.001;
  int epochs = 50;
  std::uint64_t seed = 0;

  static UtilityModel zeros(std::size_t dims) {
    UtilityModel m;
    m.weights.assign(dims, 0.0);
    return m;
  }
};

double dot(std::span<const double> a, std::span<const double> b);
double logistic(double z);

double utility(const UtilityModel& model, const Concept& c);

/// Probability that `a` is preferred over `b`: 1 / (1 + exp(U(b) - U(a))).
double preference_probability(const UtilityModel& model, const Concept& a, const Concept& b);

/// Feature matrix view used by the learners: rows[i] is phi of item i.
using FeatureRows = std::vector<std::vector<double>>;

FeatureRows concept_rows(const DocumentCluster& cluster);

/// Two-class cross-entropy log-likelihood J(w) over the records, with
/// probabilities clamped to [1e-12, 1 - 1e-12].
double preference_log_likelihood(std::span<const double> weights,
                                 std::span<const PreferenceRecord> prefs,
                                 const FeatureRows& rows);

/// Analytic gradient of preference_log_likelihood.
std::vector<double> preference_gradient(std::span<const double> weights,
                                        std::span<const PreferenceRecord> prefs,
                                        const FeatureRows& rows);

/// One stochastic ascent step on a single record. Returns the model's
/// probability for the record's label before the step.
double sga_step(std::vector<double>& weights, double learning_rate,
                const PreferenceRecord& record, const FeatureRows& rows);

/// `epochs` shuffled passes of stochastic gradient ascent, warm-started from
/// model.weights.
UtilityModel fit(UtilityModel model, std::span<const PreferenceRecord> prefs,
                 const DocumentCluster& cluster);
UtilityModel fit(UtilityModel model, std::span<const PreferenceRecord> prefs,
                 const FeatureRows& rows);

/// Deterministic full-batch gradient ascent; J is non-decreasing for a small
/// enough learning rate.
UtilityModel fit_full_batch(UtilityModel model, std::span<const PreferenceRecord> prefs,
                            const FeatureRows& rows, int iterations);

/// Warm-start update used during live elicitation: one step on the newest
/// record followed by one in-order replay pass over the whole history.
void incremental_update(UtilityModel& model, std::span<const PreferenceRecord> history,
                        const FeatureRows& rows);

std::vector<double> utilities(const UtilityModel& model, const DocumentCluster& cluster);

/// rank[i] = number of items with strictly smaller value; ties broken by id
/// so the result is a permutation of 0..N-1.
std::vector<int> rank_values(std::span<const double> values);

std::map<ConceptId, int> rank(const UtilityModel& model, const DocumentCluster& cluster);

/// Kendall tau-a between two score vectors (pairs tied in either are counted
/// as neither concordant nor discordant).
double kendall_tau(std::span<const double> a, std::span<const double> b);

}  // namespace sumrecom
