#include "sumrecom/preflearn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "sumrecom/error.hpp"

namespace sumrecom {
namespace {

constexpr double kProbFloor = 1e-12;

const std::vector<double>& row_of(const FeatureRows& rows, int id) {
  if (id < 0 || static_cast<std::size_t>(id) >= rows.size()) {
    fail(ErrorCode::kValidation, "preference refers to unknown item " + std::to_string(id));
  }
  return rows[static_cast<std::size_t>(id)];
}

void check_schema(std::size_t weights, std::size_t features) {
  if (weights != features) {
    fail(ErrorCode::kValidation, "schema mismatch: " + std::to_string(weights) +
                                     " weights vs " + std::to_string(features) + " features");
  }
}

double margin(std::span<const double> w, const std::vector<double>& a,
              const std::vector<double>& b) {
  double z = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) z += w[k] * (a[k] - b[k]);
  return z;
}

}  // namespace

void validate(const PreferenceRecord& record) {
  if (record.left_id == record.right_id) {
    fail(ErrorCode::kValidation, "preference compares an item with itself");
  }
  if (record.label != 0 && record.label != 1) {
    fail(ErrorCode::kValidation, "preference label must be 0 or 1");
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_schema(a.size(), b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double utility(const UtilityModel& model, const Concept& c) {
  return dot(model.weights, c.features.values);
}

double preference_probability(const UtilityModel& model, const Concept& a, const Concept& b) {
  return logistic(utility(model, a) - utility(model, b));
}

FeatureRows concept_rows(const DocumentCluster& cluster) {
  FeatureRows rows;
  rows.reserve(cluster.concepts.size());
  for (const auto& c : cluster.concepts) rows.push_back(c.features.values);
  return rows;
}

double preference_log_likelihood(std::span<const double> weights,
                                 std::span<const PreferenceRecord> prefs,
                                 const FeatureRows& rows) {
  double j = 0.0;
  for (const auto& p : prefs) {
    const auto& a = row_of(rows, p.left_id);
    const auto& b = row_of(rows, p.right_id);
    check_schema(weights.size(), a.size());
    const double h = std::clamp(logistic(margin(weights, a, b)), kProbFloor, 1.0 - kProbFloor);
    j += p.label * std::log(h) + (1 - p.label) * std::log(1.0 - h);
  }
  return j;
}

std::vector<double> preference_gradient(std::span<const double> weights,
                                        std::span<const PreferenceRecord> prefs,
                                        const FeatureRows& rows) {
  std::vector<double> g(weights.size(), 0.0);
  for (const auto& p : prefs) {
    const auto& a = row_of(rows, p.left_id);
    const auto& b = row_of(rows, p.right_id);
    check_schema(weights.size(), a.size());
    const double h = logistic(margin(weights, a, b));
    const double r = p.label - h;
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += r * (a[k] - b[k]);
  }
  return g;
}

double sga_step(std::vector<double>& weights, double learning_rate,
                const PreferenceRecord& record, const FeatureRows& rows) {
  const auto& a = row_of(rows, record.left_id);
  const auto& b = row_of(rows, record.right_id);
  check_schema(weights.size(), a.size());
  const double h = logistic(margin(weights, a, b));
  const double r = record.label - h;
  for (std::size_t k = 0; k < weights.size(); ++k) weights[k] += learning_rate * r * (a[k] - b[k]);
  return record.label == 1 ? h : 1.0 - h;
}

UtilityModel fit(UtilityModel model, std::span<const PreferenceRecord> prefs,
                 const FeatureRows& rows) {
  if (prefs.empty()) fail(ErrorCode::kValidation, "cannot fit on an empty preference set");
  for (const auto& p : prefs) validate(p);
  std::vector<std::size_t> order(prefs.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(model.seed);
  for (int epoch = 0; epoch < model.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (auto i : order) sga_step(model.weights, model.learning_rate, prefs[i], rows);
  }
  return model;
}

UtilityModel fit(UtilityModel model, std::span<const PreferenceRecord> prefs,
                 const DocumentCluster& cluster) {
  return fit(std::move(model), prefs, concept_rows(cluster));
}

UtilityModel fit_full_batch(UtilityModel model, std::span<const PreferenceRecord> prefs,
                            const FeatureRows& rows, int iterations) {
  if (prefs.empty()) fail(ErrorCode::kValidation, "cannot fit on an empty preference set");
  for (int it = 0; it < iterations; ++it) {
    const auto g = preference_gradient(model.weights, prefs, rows);
    for (std::size_t k = 0; k < g.size(); ++k) model.weights[k] += model.learning_rate * g[k];
  }
  return model;
}

void incremental_update(UtilityModel& model, std::span<const PreferenceRecord> history,
                        const FeatureRows& rows) {
  if (history.empty()) return;
  sga_step(model.weights, model.learning_rate, history.back(), rows);
  for (const auto& p : history) sga_step(model.weights, model.learning_rate, p, rows);
}

std::vector<double> utilities(const UtilityModel& model, const DocumentCluster& cluster) {
  std::vector<double> u;
  u.reserve(cluster.concepts.size());
  for (const auto& c : cluster.concepts) u.push_back(utility(model, c));
  return u;
}

std::vector<int> rank_values(std::span<const double> values) {
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  // Ascending value; among equal values the smaller id ranks lower.
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return values[a] < values[b]; });
  std::vector<int> ranks(values.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) ranks[order[pos]] = static_cast<int>(pos);
  return ranks;
}

std::map<ConceptId, int> rank(const UtilityModel& model, const DocumentCluster& cluster) {
  const auto u = utilities(model, cluster);
  const auto r = rank_values(u);
  std::map<ConceptId, int> out;
  for (std::size_t i = 0; i < r.size(); ++i) out[cluster.concepts[i].id] = r[i];
  return out;
}

double kendall_tau(std::span<const double> a, std::span<const double> b) {
  check_schema(a.size(), b.size());
  const std::size_t n = a.size();
  if (n < 2) return 1.0;
  double concordant = 0.0, discordant = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = (a[i] - a[j]) * (b[i] - b[j]);
      if (s > 0) concordant += 1.0;
      else if (s < 0) discordant += 1.0;
    }
  }
  return (concordant - discordant) / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

}  // namespace sumrecom
