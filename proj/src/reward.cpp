#include "sumrecom/reward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sumrecom/error.hpp"

namespace sumrecom {

std::vector<std::string> summary_feature_names(const DocumentCluster& cluster) {
  std::vector<std::string> names;
  for (const auto& f : cluster.feature_names) names.push_back("mean_" + f);
  for (const auto& f : cluster.feature_names) names.push_back("max_" + f);
  names.insert(names.end(), {"length_ratio", "redundancy", "rouge1", "rouge2"});
  return names;
}

SummaryFeatureVector summary_features(const Summary& summary, const DocumentCluster& cluster,
                                      int L, const std::vector<Tokens>* references,
                                      const RougeOptions& rouge_options) {
  const std::size_t d = cluster.num_features();
  std::vector<double> mean(d, 0.0), hi(d, 0.0);
  for (SentenceId s : summary.sentence_ids) {
    const auto& ids = cluster.concepts_by_sentence[static_cast<std::size_t>(s)];
    std::vector<double> row(d, 0.0);
    for (ConceptId c : ids) {
      const auto& v = cluster.concepts[static_cast<std::size_t>(c)].features.values;
      for (std::size_t k = 0; k < d; ++k) row[k] += v[k] / static_cast<double>(ids.size());
    }
    for (std::size_t k = 0; k < d; ++k) {
      mean[k] += row[k];
      hi[k] = std::max(hi[k], row[k]);
    }
  }
  if (!summary.sentence_ids.empty()) {
    for (double& m : mean) m /= static_cast<double>(summary.sentence_ids.size());
  }
  SummaryFeatureVector out;
  out.values = mean;
  out.values.insert(out.values.end(), hi.begin(), hi.end());
  out.values.push_back(L > 0 ? static_cast<double>(summary.length) / L : 0.0);
  out.values.push_back(summary.redundancy);
  double r1 = 0.0, r2 = 0.0;
  if (references && !references->empty()) {
    const auto cand = rouge_tokens(summary_text(summary, cluster));
    r1 = rouge_n(cand, *references, 1, rouge_options);
    r2 = rouge_n(cand, *references, 2, rouge_options);
  }
  out.values.push_back(r1);
  out.values.push_back(r2);
  return out;
}

std::string_view to_string(RewardMode mode) {
  return mode == RewardMode::kPoint ? "point" : "pairwise";
}

RewardMode parse_reward_mode(std::string_view name) {
  if (name == "point") return RewardMode::kPoint;
  if (name == "pairwise") return RewardMode::kPairwise;
  fail(ErrorCode::kValidation, "unknown reward mode '" + std::string(name) + "'");
}

double predict(std::span<const double> weights, std::span<const double> features) {
  return dot(weights, features);
}

double predict(const RewardModel& model, const SummaryFeatureVector& features) {
  return predict(model.weights, features.values);
}

double mse_loss(std::span<const double> w, std::span<const ScoredSample> samples, double l2) {
  double loss = 0.0;
  for (const auto& s : samples) {
    const double r = predict(w, s.features) - s.score;
    loss += r * r;
  }
  loss /= static_cast<double>(std::max<std::size_t>(samples.size(), 1));
  for (double x : w) loss += l2 * x * x;
  return loss;
}

std::vector<double> mse_gradient(std::span<const double> w, std::span<const ScoredSample> samples,
                                 double l2) {
  std::vector<double> g(w.size(), 0.0);
  const double scale = 2.0 / static_cast<double>(std::max<std::size_t>(samples.size(), 1));
  for (const auto& s : samples) {
    const double r = predict(w, s.features) - s.score;
    for (std::size_t k = 0; k < w.size(); ++k) g[k] += scale * r * s.features[k];
  }
  for (std::size_t k = 0; k < w.size(); ++k) g[k] += 2.0 * l2 * w[k];
  return g;
}

double summary_preference_probability(std::span<const double> w, std::span<const double> left,
                                      std::span<const double> right) {
  return logistic(predict(w, left) - predict(w, right));
}

namespace {

const std::vector<double>& row(const FeatureRows& rows, int id) {
  if (id < 0 || static_cast<std::size_t>(id) >= rows.size()) {
    fail(ErrorCode::kValidation, "summary preference refers to unknown summary " +
                                     std::to_string(id));
  }
  return rows[static_cast<std::size_t>(id)];
}

void ensure_weights(RewardModel& model, std::size_t dims) {
  if (model.weights.empty()) model.weights.assign(dims, 0.0);
  if (model.weights.size() != dims) {
    fail(ErrorCode::kValidation, "reward schema mismatch: " + std::to_string(model.weights.size()) +
                                     " weights vs " + std::to_string(dims) + " features");
  }
}

}  // namespace

double cross_entropy_loss(std::span<const double> w, std::span<const PreferenceRecord> prefs,
                          const FeatureRows& features, double l2) {
  double loss = 0.0;
  for (const auto& p : prefs) {
    const double h = std::clamp(
        summary_preference_probability(w, row(features, p.left_id), row(features, p.right_id)),
        1e-12, 1.0 - 1e-12);
    loss -= p.label * std::log(h) + (1 - p.label) * std::log(1.0 - h);
  }
  for (double x : w) loss += l2 * x * x;
  return loss;
}

std::vector<double> cross_entropy_gradient(std::span<const double> w,
                                           std::span<const PreferenceRecord> prefs,
                                           const FeatureRows& features, double l2) {
  std::vector<double> g(w.size(), 0.0);
  for (const auto& p : prefs) {
    const auto& a = row(features, p.left_id);
    const auto& b = row(features, p.right_id);
    const double h = summary_preference_probability(w, a, b);
    const double r = h - p.label;
    for (std::size_t k = 0; k < w.size(); ++k) g[k] += r * (a[k] - b[k]);
  }
  for (std::size_t k = 0; k < w.size(); ++k) g[k] += 2.0 * l2 * w[k];
  return g;
}

RewardModel fit_point(RewardModel model, std::span<const ScoredSample> samples) {
  if (samples.empty()) fail(ErrorCode::kValidation, "cannot fit a reward on zero samples");
  ensure_weights(model, samples.front().features.size());
  model.mode = RewardMode::kPoint;
  for (int it = 0; it < model.iterations; ++it) {
    const auto g = mse_gradient(model.weights, samples, model.l2);
    for (std::size_t k = 0; k < g.size(); ++k) model.weights[k] -= model.learning_rate * g[k];
  }
  return model;
}

RewardModel fit_pairwise(RewardModel model, std::span<const PreferenceRecord> prefs,
                         const FeatureRows& features) {
  if (prefs.empty()) fail(ErrorCode::kValidation, "cannot fit a reward on zero preferences");
  if (features.empty()) fail(ErrorCode::kValidation, "no summary features supplied");
  for (const auto& p : prefs) validate(p);
  ensure_weights(model, features.front().size());
  model.mode = RewardMode::kPairwise;
  for (int it = 0; it < model.iterations; ++it) {
    const auto g = cross_entropy_gradient(model.weights, prefs, features, model.l2);
    for (std::size_t k = 0; k < g.size(); ++k) model.weights[k] -= model.learning_rate * g[k];
  }
  return model;
}

constexpr double kExactSubsetLimit = 20000.0;

std::vector<std::size_t> select_query_summaries(const FeatureRows& features,
                                                const std::vector<std::size_t>& asked,
                                                std::size_t k) {
  const std::size_t n = features.size();
  if (asked.size() + k > n) {
    fail(ErrorCode::kValidation, "pool of " + std::to_string(n) + " cannot supply " +
                                     std::to_string(k) + " more summaries");
  }
  auto dist = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t i = 0; i < features[a].size(); ++i) {
      const double d = features[a][i] - features[b][i];
      s += d * d;
    }
    return std::sqrt(s);
  };
  std::vector<char> taken(n, 0);
  std::vector<std::size_t> selected = asked;
  for (auto a : asked) taken.at(a) = 1;
  std::vector<std::size_t> out;
  if (selected.empty() && k > 0) {
    selected.push_back(0);
    taken[0] = 1;
    out.push_back(0);
  }
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < n; ++i) {
    if (!taken[i]) free.push_back(i);
  }
  const std::size_t r = k - out.size();

  // Exact: the r-subset of free items maximizing the smallest distance that
  // involves a new item. Falls back to greedy when there are too many subsets.
  double combos = 1.0;
  for (std::size_t i = 0; i < r; ++i) {
    combos = combos * static_cast<double>(free.size() - i) / static_cast<double>(i + 1);
  }
  if (r > 0 && combos <= kExactSubsetLimit) {
    std::vector<std::size_t> idx(r), best_idx;
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    double best = -1.0;
    while (true) {
      double spread = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < r; ++i) {
        for (auto s : selected) spread = std::min(spread, dist(free[idx[i]], s));
        for (std::size_t j = i + 1; j < r; ++j) spread = std::min(spread, dist(free[idx[i]], free[idx[j]]));
      }
      if (spread > best) {
        best = spread;
        best_idx = idx;
      }
      std::size_t pos = r;
      while (pos > 0 && idx[pos - 1] == free.size() - r + pos - 1) --pos;
      if (pos == 0) break;
      ++idx[pos - 1];
      for (std::size_t j = pos; j < r; ++j) idx[j] = idx[j - 1] + 1;
    }
    for (auto i : best_idx) out.push_back(free[i]);
    return out;
  }

  while (out.size() < k) {
    double best = -1.0;
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      double nearest = std::numeric_limits<double>::infinity();
      for (auto s : selected) nearest = std::min(nearest, dist(i, s));
      if (nearest > best) {
        best = nearest;
        pick = i;
      }
    }
    taken[pick] = 1;
    selected.push_back(pick);
    out.push_back(pick);
  }
  return out;
}

}  // namespace sumrecom
