#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "sumrecom/error.hpp"
#include "sumrecom/preflearn.hpp"
#include "sumrecom/reward.hpp"

using namespace sumrecom;
using sumrecom::testing::make_cluster;
using sumrecom::testing::rel_error;
using sumrecom::testing::synthetic_concept_cluster;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0,
                                  double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

double min_dist_to(const FeatureRows& f, std::size_t i, const std::vector<std::size_t>& set) {
  double best = 1e18;
  for (std::size_t j : set) {
    double d = 0.0;
    for (std::size_t k = 0; k < f[i].size(); ++k) d += (f[i][k] - f[j][k]) * (f[i][k] - f[j][k]);
    best = std::min(best, std::sqrt(d));
  }
  return best;
}

}  // namespace

TEST_CASE("summary_features: layout and ROUGE placeholders") {
  const auto c = make_cluster({"Heavy rain flooded the town. Boats rescued families.", "The river rose fast."},
                              ConceptUnit::kUnigram, {"Rain flooded the town and the river rose."});
  const auto s = make_summary(c, {0, 2}, ConceptWeights(c.concepts.size(), 1.0));
  const std::size_t d = c.num_features();
  const auto names = summary_feature_names(c);
  REQUIRE(names.size() == 2 * d + 4);
  CHECK(names[0] == "mean_" + c.feature_names[0]);
  CHECK(names[d] == "max_" + c.feature_names[0]);
  CHECK(names[2 * d + 2] == "rouge1");

  const auto none = summary_features(s, c, 100, nullptr);
  CHECK(none.values[2 * d + 2] == 0.0);
  CHECK(none.values[2 * d + 3] == 0.0);
  const std::vector<Tokens> empty;
  CHECK(summary_features(s, c, 100, &empty).values[2 * d + 2] == 0.0);
  const auto refs = rouge_tokens(c.references);
  const auto with = summary_features(s, c, 100, &refs);
  CHECK(with.values[2 * d + 2] > 0.0);
  CHECK(with.values[2 * d] == doctest::Approx(static_cast<double>(s.length) / 100.0));
}

TEST_CASE("summary_features: single sentence has equal mean and max") {
  const auto c = make_cluster({"Heavy rain flooded the town. Boats rescued families."});
  const auto s = make_summary(c, {0}, ConceptWeights(c.concepts.size(), 1.0));
  const auto f = summary_features(s, c, 100, nullptr);
  const std::size_t d = c.num_features();
  for (std::size_t k = 0; k < d; ++k) CHECK(f.values[k] == f.values[d + k]);
}

TEST_CASE("summary_features: two sentences with hand-built features") {
  auto c = synthetic_concept_cluster({{0, 1}, {2}}, {4, 4}, 3);
  c.feature_names = {"f", "g"};
  c.concepts[0].features.values = {0.2, 1.0};
  c.concepts[1].features.values = {0.6, 0.0};
  c.concepts[2].features.values = {0.9, 0.3};
  const auto s = make_summary(c, {0, 1}, {1, 1, 1});
  const auto f = summary_features(s, c, 10, nullptr);
  // sentence 0 -> (0.4, 0.5), sentence 1 -> (0.9, 0.3)
  CHECK(f.values[0] == doctest::Approx(0.65));
  CHECK(f.values[1] == doctest::Approx(0.4));
  CHECK(f.values[2] == doctest::Approx(0.9));
  CHECK(f.values[3] == doctest::Approx(0.5));
  CHECK(f.values[4] == doctest::Approx(0.8));
}

TEST_CASE("fit_point") {
  RewardModel defaults;
  CHECK(defaults.learning_rate == 0.005);

  RewardModel m;
  m.mode = RewardMode::kPoint;
  m.iterations = 20000;
  m.learning_rate = 0.05;
  m.l2 = 0.0;
  const std::vector<ScoredSample> one = {{{0.5, 1.0, 0.2}, 0.7}};
  const auto fitted = fit_point(m, one);
  CHECK(std::abs(predict(fitted.weights, one[0].features) - 0.7) < 1e-3);

  std::mt19937_64 rng(31);
  const std::vector<double> planted = {0.8, -0.4, 1.5};
  std::vector<ScoredSample> samples;
  for (int i = 0; i < 30; ++i) {
    auto x = random_vector(rng, 3, 0.0, 1.0);
    samples.push_back({x, dot(planted, x)});
  }
  RewardModel p;
  p.mode = RewardMode::kPoint;
  p.iterations = 200000;
  p.learning_rate = 0.5;
  p.l2 = 0.0;
  const auto rec = fit_point(p, samples);
  for (std::size_t k = 0; k < 3; ++k) CHECK(rel_error(rec.weights[k], planted[k]) < 1e-2);

  CHECK_THROWS_AS(fit_point(m, std::vector<ScoredSample>{}), Error);
}

TEST_CASE("fit_point: training MSE never increases") {
  std::mt19937_64 rng(32);
  std::vector<ScoredSample> samples;
  for (int i = 0; i < 10; ++i) samples.push_back({random_vector(rng, 4, 0, 1), random_vector(rng, 1)[0]});
  RewardModel m;
  m.mode = RewardMode::kPoint;
  m.iterations = 1;
  m.weights.assign(4, 0.0);
  double prev = mse_loss(m.weights, samples, m.l2);
  for (int i = 0; i < 200; ++i) {
    m = fit_point(m, samples);
    const double cur = mse_loss(m.weights, samples, m.l2);
    CHECK(cur <= prev + 1e-15);
    prev = cur;
  }
}

TEST_CASE("fit_pairwise") {
  const FeatureRows f = {{0.9, 0.2}, {0.1, 0.7}};
  const std::vector<PreferenceRecord> one = {{0, 1, 1, 0}};
  const auto m = fit_pairwise(RewardModel{}, one, f);
  CHECK(predict(m.weights, f[0]) > predict(m.weights, f[1]));

  std::mt19937_64 rng(33);
  for (int t = 0; t < 20; ++t) {
    const auto w = random_vector(rng, 3, -4, 4);
    const auto a = random_vector(rng, 3), b = random_vector(rng, 3);
    CHECK(summary_preference_probability(w, a, b) + summary_preference_probability(w, b, a) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("fit_pairwise: planted linear V over 8 summaries") {
  std::mt19937_64 rng(34);
  const std::vector<double> planted = {1.2, -0.6, 0.9, 0.3};
  FeatureRows f;
  std::vector<double> truth;
  for (int i = 0; i < 8; ++i) {
    f.push_back(random_vector(rng, 4, 0, 1));
    truth.push_back(dot(planted, f.back()));
  }
  std::vector<PreferenceRecord> prefs;
  for (int i = 0; i < 8; ++i) {
    for (int j = i + 1; j < 8; ++j) {
      prefs.push_back({i, j, truth[static_cast<std::size_t>(i)] > truth[static_cast<std::size_t>(j)] ? 1 : 0, 0});
    }
  }
  REQUIRE(prefs.size() == 28);
  RewardModel converged;
  converged.iterations = 20000;
  const auto m = fit_pairwise(converged, prefs, f);
  std::vector<double> learned;
  for (const auto& row : f) learned.push_back(predict(m.weights, row));
  CHECK(kendall_tau(learned, truth) >= 0.95);

  auto flipped = prefs;
  for (auto& p : flipped) {
    std::swap(p.left_id, p.right_id);
    p.label = 1 - p.label;
  }
  const auto m2 = fit_pairwise(converged, flipped, f);
  for (std::size_t k = 0; k < 4; ++k) CHECK(m2.weights[k] == doctest::Approx(m.weights[k]).epsilon(1e-9));

  for (double s : {0.1, 7.0}) {
    auto scaled = m.weights;
    for (auto& x : scaled) x *= s;
    std::vector<double> v;
    for (const auto& row : f) v.push_back(predict(scaled, row));
    CHECK(rank_values(v) == rank_values(learned));
  }
  CHECK_THROWS_AS(fit_pairwise(RewardModel{}, std::vector<PreferenceRecord>{}, f), Error);
}

TEST_CASE("loss gradients match central finite differences") {
  std::mt19937_64 rng(35);
  const double h = 1e-6;
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 2 + rng() % 5;
    std::vector<ScoredSample> samples;
    for (int i = 0; i < 6; ++i) samples.push_back({random_vector(rng, d), random_vector(rng, 1)[0]});
    FeatureRows rows;
    for (int i = 0; i < 6; ++i) rows.push_back(random_vector(rng, d));
    std::vector<PreferenceRecord> prefs;
    for (int k = 0; k < 8; ++k) {
      int a = static_cast<int>(rng() % 6), b = static_cast<int>(rng() % 6);
      if (a == b) b = (a + 1) % 6;
      prefs.push_back({a, b, static_cast<int>(rng() % 2), k});
    }
    const auto w = random_vector(rng, d);
    const double l2 = 1e-4;
    const auto g_mse = mse_gradient(w, samples, l2);
    const auto g_ce = cross_entropy_gradient(w, prefs, rows, l2);
    for (std::size_t k = 0; k < d; ++k) {
      auto wp = w, wm = w;
      wp[k] += h;
      wm[k] -= h;
      const double fd_mse = (mse_loss(wp, samples, l2) - mse_loss(wm, samples, l2)) / (2 * h);
      const double fd_ce =
          (cross_entropy_loss(wp, prefs, rows, l2) - cross_entropy_loss(wm, prefs, rows, l2)) / (2 * h);
      CHECK(rel_error(g_mse[k], fd_mse) < 1e-5);
      CHECK(rel_error(g_ce[k], fd_ce) < 1e-5);
    }
  }
}

TEST_CASE("select_query_summaries") {
  const FeatureRows f = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {0.9, 0.9}, {0.5, 0.4}, {0.2, 0.1}};
  const auto all = select_query_summaries(f, {}, 6);
  CHECK(all.size() == 6);
  CHECK(std::set<std::size_t>(all.begin(), all.end()).size() == 6);
  CHECK(all.front() == 0);

  // Exhaustive max-min oracle over 3-subsets that contain the seed item 0.
  const auto got = select_query_summaries(f, {}, 3);
  REQUIRE(got.size() == 3);
  double best = -1.0;
  for (std::size_t a = 1; a < 6; ++a) {
    for (std::size_t b = a + 1; b < 6; ++b) {
      const std::vector<std::size_t> set = {0, a, b};
      double spread = 1e18;
      for (std::size_t i = 0; i < 3; ++i) {
        std::vector<std::size_t> others;
        for (std::size_t j = 0; j < 3; ++j) {
          if (j != i) others.push_back(set[j]);
        }
        spread = std::min(spread, min_dist_to(f, set[i], others));
      }
      best = std::max(best, spread);
    }
  }
  double got_spread = 1e18;
  for (std::size_t i = 0; i < 3; ++i) {
    std::vector<std::size_t> others;
    for (std::size_t j = 0; j < 3; ++j) {
      if (j != i) others.push_back(got[j]);
    }
    got_spread = std::min(got_spread, min_dist_to(f, got[i], others));
  }
  CHECK(got_spread == doctest::Approx(best));

  const auto next = select_query_summaries(f, {0, 3}, 1);
  REQUIRE(next.size() == 1);
  CHECK(next[0] != 0);
  CHECK(next[0] != 3);
  CHECK_THROWS_AS(select_query_summaries(f, {0, 1, 2}, 4), Error);
}
