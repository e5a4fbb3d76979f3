#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "sumrecom/error.hpp"
#include "sumrecom/preflearn.hpp"

using namespace sumrecom;
using sumrecom::testing::rel_error;

namespace {

Concept concept_with(int id, std::vector<double> phi) {
  Concept c;
  c.id = id;
  c.surface = "c" + std::to_string(id);
  c.tokens = {c.surface};
  c.features.values = std::move(phi);
  return c;
}

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0,
                                  double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("utility") {
  const auto c = concept_with(0, {0.3, 0.7, 0.1});
  CHECK(utility(UtilityModel::zeros(3), c) == 0.0);
  for (std::size_t k = 0; k < 3; ++k) {
    UtilityModel m = UtilityModel::zeros(3);
    m.weights[k] = 1.0;
    CHECK(utility(m, c) == c.features.values[k]);
  }
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    UtilityModel m;
    m.weights = random_vector(rng, 5);
    const auto phi = random_vector(rng, 5);
    double expect = 0.0;
    for (std::size_t k = 0; k < 5; ++k) expect += m.weights[k] * phi[k];
    CHECK(utility(m, concept_with(1, phi)) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("preference_probability") {
  UtilityModel m;
  m.weights = {1.0};
  CHECK(preference_probability(m, concept_with(0, {0.4}), concept_with(1, {0.4})) == 0.5);
  CHECK(preference_probability(m, concept_with(0, {2.0}), concept_with(1, {0.0})) ==
        doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));
  CHECK(preference_probability(m, concept_with(0, {2.0}), concept_with(1, {0.0})) ==
        doctest::Approx(0.8808).epsilon(1e-4));
  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    UtilityModel r;
    r.weights = random_vector(rng, 4, -3, 3);
    const auto a = concept_with(0, random_vector(rng, 4));
    const auto b = concept_with(1, random_vector(rng, 4));
    CHECK(preference_probability(r, a, b) + preference_probability(r, b, a) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("fit: documented default learning rate") {
  UtilityModel m;
  CHECK(m.learning_rate == 0.001);
  CHECK(m.epochs == 50);
}

TEST_CASE("fit: a single preference is respected") {
  const FeatureRows rows = {{0.9, 0.1}, {0.2, 0.6}};
  const std::vector<PreferenceRecord> prefs = {{0, 1, 1, 0}};
  const auto m = fit(UtilityModel::zeros(2), prefs, rows);
  CHECK(preference_probability(m, concept_with(0, rows[0]), concept_with(1, rows[1])) > 0.5);
}

TEST_CASE("fit: all pairs of a separable total order recover the ranking") {
  std::mt19937_64 rng(3);
  const std::vector<double> truth = {1.0, -0.5, 0.8};
  FeatureRows rows;
  std::vector<double> true_u;
  for (int i = 0; i < 10; ++i) {
    rows.push_back(random_vector(rng, 3, 0.0, 1.0));
    true_u.push_back(dot(truth, rows.back()));
  }
  std::vector<PreferenceRecord> prefs;
  for (int i = 0; i < 10; ++i) {
    for (int j = i + 1; j < 10; ++j) {
      prefs.push_back({i, j, true_u[static_cast<std::size_t>(i)] > true_u[static_cast<std::size_t>(j)] ? 1 : 0, 0});
    }
  }
  REQUIRE(prefs.size() == 45);
  UtilityModel m = UtilityModel::zeros(3);
  m.epochs = 2000;
  m.learning_rate = 0.05;
  m = fit(m, prefs, rows);
  std::vector<double> learned;
  for (const auto& r : rows) learned.push_back(dot(m.weights, r));
  CHECK(kendall_tau(learned, true_u) == 1.0);
}

TEST_CASE("rank_values") {
  const std::vector<double> u = {3, 1, 2};
  CHECK(rank_values(u) == std::vector<int>{2, 0, 1});
  const std::vector<double> eq(5, 0.7);
  CHECK(rank_values(eq) == std::vector<int>{0, 1, 2, 3, 4});

  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> small(0, 6);  // forces ties
  for (int t = 0; t < 10; ++t) {
    std::vector<double> v(20);
    for (auto& x : v) x = small(rng);
    const auto r = rank_values(v);
    for (std::size_t i = 0; i < v.size(); ++i) {
      int count = 0;
      for (std::size_t j = 0; j < v.size(); ++j) {
        if (v[j] < v[i] || (v[j] == v[i] && j < i)) ++count;
      }
      CHECK(r[i] == count);
    }
    auto sorted = r;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 20; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
  }
}

TEST_CASE("rank is invariant to positive scaling of w") {
  std::mt19937_64 rng(5);
  DocumentCluster cluster;
  for (int i = 0; i < 15; ++i) cluster.concepts.push_back(concept_with(i, random_vector(rng, 4)));
  UtilityModel m;
  m.weights = random_vector(rng, 4);
  const auto base = rank(m, cluster);
  for (double s : {0.01, 0.5, 3.0, 1000.0}) {
    UtilityModel scaled = m;
    for (auto& w : scaled.weights) w *= s;
    CHECK(rank(scaled, cluster) == base);
  }
}

TEST_CASE("J gradient matches central finite differences") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 100; ++t) {
    const std::size_t dims = 2 + rng() % 4;
    FeatureRows rows;
    for (int i = 0; i < 6; ++i) rows.push_back(random_vector(rng, dims));
    std::vector<PreferenceRecord> prefs;
    for (int k = 0; k < 8; ++k) {
      int a = static_cast<int>(rng() % 6), b = static_cast<int>(rng() % 6);
      if (a == b) b = (a + 1) % 6;
      prefs.push_back({a, b, static_cast<int>(rng() % 2), k});
    }
    const auto w = random_vector(rng, dims);
    const auto g = preference_gradient(w, prefs, rows);
    const double h = 1e-6;
    for (std::size_t k = 0; k < dims; ++k) {
      auto wp = w, wm = w;
      wp[k] += h;
      wm[k] -= h;
      const double fd = (preference_log_likelihood(wp, prefs, rows) -
                         preference_log_likelihood(wm, prefs, rows)) /
                        (2 * h);
      CHECK(rel_error(g[k], fd) < 1e-5);
    }
  }
}

TEST_CASE("full-batch ascent never decreases J") {
  std::mt19937_64 rng(7);
  FeatureRows rows;
  for (int i = 0; i < 12; ++i) rows.push_back(random_vector(rng, 4, 0, 1));
  std::vector<PreferenceRecord> prefs;
  for (int k = 0; k < 30; ++k) {
    int a = static_cast<int>(rng() % 12), b = static_cast<int>(rng() % 12);
    if (a == b) b = (a + 1) % 12;
    prefs.push_back({a, b, static_cast<int>(rng() % 2), k});
  }
  UtilityModel m = UtilityModel::zeros(4);
  double prev = preference_log_likelihood(m.weights, prefs, rows);
  for (int step = 0; step < 50; ++step) {
    m = fit_full_batch(m, prefs, rows, 1);
    const double cur = preference_log_likelihood(m.weights, prefs, rows);
    CHECK(cur >= prev - 1e-12);
    prev = cur;
  }
}

TEST_CASE("preference records are validated") {
  try {
    validate(PreferenceRecord{0, 1, 2, 0});
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kValidation);
  }
  try {
    validate(PreferenceRecord{3, 3, 1, 0});
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kValidation);
  }
}

TEST_CASE("kendall_tau") {
  const std::vector<double> a = {1, 2, 3, 4};
  const std::vector<double> b = {4, 3, 2, 1};
  CHECK(kendall_tau(a, a) == 1.0);
  CHECK(kendall_tau(a, b) == -1.0);
}
