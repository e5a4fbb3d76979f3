#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "sumrecom/error.hpp"
#include "sumrecom/sumgen.hpp"

using namespace sumrecom;
using sumrecom::testing::make_cluster;
using sumrecom::testing::synthetic_concept_cluster;

namespace {

struct Subset {
  std::vector<SentenceId> ids;
  int length = 0;
  double score = 0.0;
};

// Every nonempty subset with total length strictly below L.
std::vector<Subset> feasible_subsets(const DocumentCluster& c, const ConceptWeights& w, int L) {
  std::vector<Subset> out;
  const std::size_t n = c.sentences.size();
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    Subset s;
    std::set<ConceptId> cover;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        s.ids.push_back(static_cast<SentenceId>(i));
        s.length += c.sentences[i].length;
        for (ConceptId k : c.concepts_by_sentence[i]) cover.insert(k);
      }
    }
    if (s.length >= L) continue;
    for (ConceptId k : cover) s.score += w[static_cast<std::size_t>(k)];
    out.push_back(s);
  }
  return out;
}

double exhaustive_best(const DocumentCluster& c, const ConceptWeights& w, int L) {
  double best = 0.0;
  for (const auto& s : feasible_subsets(c, w, L)) best = std::max(best, s.score);
  return best;
}

DocumentCluster random_cluster(std::mt19937_64& rng, int sentences, int concepts) {
  std::vector<std::vector<int>> covers;
  std::vector<int> lengths;
  for (int s = 0; s < sentences; ++s) {
    std::set<int> cov;
    const int k = 1 + static_cast<int>(rng() % 4);
    for (int j = 0; j < k; ++j) cov.insert(static_cast<int>(rng() % static_cast<unsigned>(concepts)));
    covers.emplace_back(cov.begin(), cov.end());
    lengths.push_back(std::max<int>(static_cast<int>(cov.size()), 3 + static_cast<int>(rng() % 10)));
  }
  return synthetic_concept_cluster(covers, lengths, concepts);
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::size_t inter = 0;
  for (const auto& x : a) inter += b.count(x);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

}  // namespace

TEST_CASE("generate_optimal: three disjoint sentences") {
  const auto c = synthetic_concept_cluster({{0}, {1}, {2}}, {5, 5, 5}, 3);
  const ConceptWeights w = {3, 2, 1};
  const auto s = generate_optimal(c, w, 11);
  CHECK(s.sentence_ids == std::vector<SentenceId>{0, 1});
  CHECK(s.score == 5.0);
  CHECK(s.score == exhaustive_best(c, w, 11));
  CHECK(feasible_subsets(c, w, 11).size() == 6);
}

TEST_CASE("generate_optimal: zero weights give the empty summary") {
  const auto c = synthetic_concept_cluster({{0}, {1}, {2}}, {5, 5, 5}, 3);
  const auto s = generate_optimal(c, {0, 0, 0}, 11);
  CHECK(s.sentence_ids.empty());
  CHECK(s.score == 0.0);
}

TEST_CASE("generate_optimal: a dominant sentence is selected alone") {
  const auto c = synthetic_concept_cluster({{3}, {0, 1, 2}, {4}}, {4, 6, 4}, 5);
  const auto s = generate_optimal(c, {1.0, 2.0, 0.5, 0.0, 0.0}, 20);
  CHECK(s.sentence_ids == std::vector<SentenceId>{1});
}

TEST_CASE("generate_optimal: exact on random small clusters, feasible, monotone in weight") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    const int n = 4 + static_cast<int>(rng() % 9);
    const auto c = random_cluster(rng, n, 10);
    ConceptWeights w(10);
    for (auto& x : w) x = u(rng);
    const int L = 10 + static_cast<int>(rng() % 25);
    const auto s = generate_optimal(c, w, L);
    CHECK(s.score == doctest::Approx(exhaustive_best(c, w, L)).epsilon(1e-12));
    CHECK(s.length < L);
    auto heavier = w;
    heavier[rng() % 10] += 0.5;
    CHECK(generate_optimal(c, heavier, L).score >= s.score - 1e-12);
  }
}

TEST_CASE("generate_optimal: infeasible length limit") {
  const auto c = synthetic_concept_cluster({{0}}, {5}, 1);
  try {
    generate_optimal(c, {1.0}, 0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::kValidation || e.code() == ErrorCode::kInfeasible));
  }
}

TEST_CASE("redundancy") {
  const auto c = make_cluster({"Storm damaged the harbour wall. Storm damaged the harbour wall.",
                               "Farmers sold grain early. Grain prices fell sharply."});
  Summary one;
  one.sentence_ids = {0};
  CHECK(redundancy(one, c, {}) == 0.0);

  Summary twins;
  twins.sentence_ids = {0, 1};
  CHECK(redundancy(twins, c, {}) == doctest::Approx(0.5));

  Summary three;
  three.sentence_ids = {0, 2, 3};
  std::vector<std::set<std::string>> sets;
  for (SentenceId id : three.sentence_ids) {
    const auto& s = c.sentences[static_cast<std::size_t>(id)];
    sets.emplace_back(s.content.begin(), s.content.end());
  }
  const double mean = (jaccard(sets[0], sets[1]) + jaccard(sets[0], sets[2]) + jaccard(sets[1], sets[2])) / 3.0;
  CHECK(redundancy(three, c, {}) == doctest::Approx(mean / 3.0));
  CHECK(mean > 0.0);
}

TEST_CASE("build_pool: size 1 equals generate_optimal") {
  std::mt19937_64 rng(22);
  const auto c = random_cluster(rng, 8, 8);
  const ConceptWeights w = {0.9, 0.1, 0.5, 0.3, 0.7, 0.2, 0.6, 0.4};
  PoolOptions opts;
  opts.pool_size = 1;
  const auto pool = build_pool(c, w, 20, opts);
  REQUIRE(pool.summaries.size() == 1);
  CHECK(pool.summaries[0].sentence_ids == generate_optimal(c, w, 20).sentence_ids);
}

TEST_CASE("build_pool: top-5 equals exhaustive enumeration after redundancy filtering") {
  const auto c = make_cluster({"Heavy rain flooded the town centre. Boats rescued families from homes.",
                               "The river rose two metres overnight. Rain continued across the town.",
                               "Engineers inspected the flood wall. Families returned home on Wednesday."});
  REQUIRE(c.sentences.size() == 6);
  ConceptWeights w(c.concepts.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<double>((i * 7) % 5) / 4.0;
  PoolOptions opts;
  opts.pool_size = 5;
  opts.redundancy_cap = 0.05;
  const int L = 20;
  const auto pool = build_pool(c, w, L, opts);

  std::vector<double> expect;
  for (const auto& s : feasible_subsets(c, w, L)) {
    Summary sum;
    sum.sentence_ids = s.ids;
    if (redundancy(sum, c, {}) <= opts.redundancy_cap + 1e-12) expect.push_back(s.score);
  }
  std::sort(expect.rbegin(), expect.rend());
  expect.resize(5);
  REQUIRE(pool.summaries.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(pool.summaries[i].score == doctest::Approx(expect[i]));

  std::set<std::vector<SentenceId>> distinct;
  for (const auto& s : pool.summaries) {
    CHECK(distinct.insert(s.sentence_ids).second);
    CHECK(s.length < L);
    CHECK(s.redundancy <= opts.redundancy_cap + 1e-12);
  }
}

TEST_CASE("build_pool: zero redundancy cap on overlapping sentences keeps singletons") {
  const auto c = make_cluster({"Rain fell on the town. Town rain continued. Rain flooded the town."});
  ConceptWeights w(c.concepts.size(), 1.0);
  PoolOptions opts;
  opts.pool_size = 10;
  opts.redundancy_cap = 0.0;
  const auto pool = build_pool(c, w, 40, opts);
  CHECK(pool.summaries.size() == 3);
  for (const auto& s : pool.summaries) CHECK(s.sentence_ids.size() == 1);
}

TEST_CASE("build_pool: validation") {
  const auto c = synthetic_concept_cluster({{0}}, {5}, 1);
  PoolOptions opts;
  opts.pool_size = 0;
  CHECK_THROWS_AS(build_pool(c, {1.0}, 10, opts), Error);
}

TEST_CASE("greedy mode stays feasible on larger clusters") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto c = random_cluster(rng, 40, 30);
  ConceptWeights w(30);
  for (auto& x : w) x = u(rng);
  const auto s = generate_optimal(c, w, 50);
  CHECK(s.length < 50);
  CHECK(s.score > 0.0);
  PoolOptions opts;
  opts.pool_size = 6;
  const auto pool = build_pool(c, w, 50, opts);
  std::set<std::vector<SentenceId>> distinct;
  for (const auto& p : pool.summaries) {
    CHECK(p.length < 50);
    CHECK(distinct.insert(p.sentence_ids).second);
  }
}

TEST_CASE("top_concepts") {
  const auto top = top_concepts({0.1, 0.9, 0.5, 0.7}, 0.5);
  CHECK(top == std::set<ConceptId>{1, 3});
}
