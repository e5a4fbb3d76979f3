#include "sumrecom/sumgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "sumrecom/error.hpp"

namespace sumrecom {
namespace {

constexpr double kTieEps = 1e-9;

double weight_of(const ConceptWeights& w, ConceptId id) {
  return static_cast<std::size_t>(id) < w.size() ? w[static_cast<std::size_t>(id)] : 0.0;
}

struct Ranked {
  double score = 0.0;
  std::vector<SentenceId> ids;
};

// Strict "a ranks ahead of b": higher score, then fewer sentences, then the
// lexicographically smaller id sequence.
bool ahead(double sa, const std::vector<SentenceId>& a, double sb,
           const std::vector<SentenceId>& b) {
  if (sa > sb + kTieEps) return true;
  if (sb > sa + kTieEps) return false;
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

// Keeps the K best accepted leaves in ranked order.
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) {}

  bool full() const { return items_.size() >= k_; }
  const Ranked& worst() const { return items_.back(); }
  const std::vector<Ranked>& items() const { return items_; }

  void offer(double score, const std::vector<SentenceId>& ids) {
    if (full() && !ahead(score, ids, worst().score, worst().ids)) return;
    auto pos = std::find_if(items_.begin(), items_.end(), [&](const Ranked& r) {
      return ahead(score, ids, r.score, r.ids);
    });
    items_.insert(pos, Ranked{score, ids});
    if (items_.size() > k_) items_.pop_back();
  }

 private:
  std::size_t k_;
  std::vector<Ranked> items_;
};

struct SentenceSets {
  // Content tokens per sentence with preferred-concept tokens removed.
  std::vector<std::set<std::string>> tokens;
};

SentenceSets stripped_sets(const DocumentCluster& cluster, const std::set<ConceptId>& preferred) {
  std::set<std::string> drop;
  for (ConceptId id : preferred) {
    if (static_cast<std::size_t>(id) >= cluster.concepts.size()) continue;
    const auto& c = cluster.concepts[static_cast<std::size_t>(id)];
    if (c.unit == ConceptUnit::kSentence) {
      for (const auto& t : cluster.sentences[c.sentence_ids.front()].content) drop.insert(t);
    } else {
      drop.insert(c.tokens.begin(), c.tokens.end());
    }
  }
  SentenceSets sets;
  sets.tokens.reserve(cluster.sentences.size());
  for (const auto& s : cluster.sentences) {
    std::set<std::string> t;
    for (const auto& tok : s.content) {
      if (!drop.count(tok)) t.insert(tok);
    }
    sets.tokens.push_back(std::move(t));
  }
  return sets;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& x : a) inter += b.count(x);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

double redundancy_of(const std::vector<SentenceId>& ids, const SentenceSets& sets) {
  if (ids.size() < 2) return 0.0;
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      sum += jaccard(sets.tokens[ids[i]], sets.tokens[ids[j]]);
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs) / static_cast<double>(ids.size());
}

// Depth-first include/exclude search over sentences in index order with a
// fractional-knapsack upper bound on the remaining coverage gain.
class BranchAndBound {
 public:
  BranchAndBound(const DocumentCluster& cluster, const ConceptWeights& weights, int L,
                 std::size_t k, bool allow_empty, double redundancy_cap,
                 const SentenceSets* sets)
      : cluster_(cluster), weights_(weights), capacity_(L - 1), top_(k),
        allow_empty_(allow_empty), cap_(redundancy_cap), sets_(sets),
        covered_(cluster.concepts.size(), 0) {}

  std::vector<Ranked> run() {
    std::vector<SentenceId> chosen;
    search(0, chosen, 0, 0.0);
    return top_.items();
  }

 private:
  double gain(SentenceId s) const {
    double g = 0.0;
    for (ConceptId c : cluster_.concepts_by_sentence[s]) {
      if (!covered_[c]) g += std::max(0.0, weight_of(weights_, c));
    }
    return g;
  }

  double exact_gain(SentenceId s) const {
    double g = 0.0;
    for (ConceptId c : cluster_.concepts_by_sentence[s]) {
      if (!covered_[c]) g += weight_of(weights_, c);
    }
    return g;
  }

  double bound(std::size_t from, int used) const {
    struct Item {
      double value;
      int length;
    };
    std::vector<Item> items;
    for (std::size_t s = from; s < cluster_.sentences.size(); ++s) {
      const int len = cluster_.sentences[s].length;
      if (used + len > capacity_) continue;
      const double g = gain(static_cast<SentenceId>(s));
      if (g > 0.0) items.push_back({g, len});
    }
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
      return a.value * b.length > b.value * a.length;
    });
    double total = 0.0;
    int room = capacity_ - used;
    for (const auto& it : items) {
      if (room <= 0) break;
      if (it.length <= room) {
        total += it.value;
        room -= it.length;
      } else {
        total += it.value * static_cast<double>(room) / static_cast<double>(it.length);
        room = 0;
      }
    }
    return total;
  }

  void search(std::size_t k, std::vector<SentenceId>& chosen, int used, double score) {
    if (top_.full()) {
      const double ub = score + bound(k, used);
      const auto& worst = top_.worst();
      if (ub < worst.score - kTieEps) return;
      // Every leaf below extends `chosen`, so on a tie it can only win by size
      // or order.
      if (ub <= worst.score + kTieEps &&
          (chosen.size() > worst.ids.size() ||
           (chosen.size() == worst.ids.size() && chosen > worst.ids))) {
        return;
      }
    }
    if (k == cluster_.sentences.size()) {
      if (chosen.empty() && !allow_empty_) return;
      if (sets_ && redundancy_of(chosen, *sets_) > cap_ + 1e-12) return;
      top_.offer(score, chosen);
      return;
    }
    const auto s = static_cast<SentenceId>(k);
    const int len = cluster_.sentences[k].length;
    if (used + len <= capacity_) {
      const double g = exact_gain(s);
      std::vector<ConceptId> newly;
      for (ConceptId c : cluster_.concepts_by_sentence[s]) {
        if (!covered_[c]++) newly.push_back(c);
      }
      chosen.push_back(s);
      search(k + 1, chosen, used + len, score + g);
      chosen.pop_back();
      for (ConceptId c : cluster_.concepts_by_sentence[s]) --covered_[c];
    }
    search(k + 1, chosen, used, score);
  }

  const DocumentCluster& cluster_;
  const ConceptWeights& weights_;
  int capacity_;
  TopK top_;
  bool allow_empty_;
  double cap_;
  const SentenceSets* sets_;
  std::vector<int> covered_;
};

double score_of(const DocumentCluster& cluster, const std::vector<SentenceId>& ids,
                const ConceptWeights& weights) {
  std::vector<char> covered(cluster.concepts.size(), 0);
  double total = 0.0;
  for (SentenceId s : ids) {
    for (ConceptId c : cluster.concepts_by_sentence[s]) {
      if (!covered[c]) {
        covered[c] = 1;
        total += weight_of(weights, c);
      }
    }
  }
  return total;
}

// Greedy by gain per token, then first-improvement 1-swaps until stable.
std::vector<SentenceId> greedy_with_swap(const DocumentCluster& cluster,
                                         const ConceptWeights& weights, int L) {
  const int capacity = L - 1;
  const std::size_t n = cluster.sentences.size();
  std::vector<SentenceId> chosen;
  std::vector<char> in(n, 0);
  int used = 0;
  auto add_best = [&]() {
    double best_ratio = 0.0;
    std::ptrdiff_t best = -1;
    const double base = score_of(cluster, chosen, weights);
    for (std::size_t s = 0; s < n; ++s) {
      if (in[s] || used + cluster.sentences[s].length > capacity) continue;
      auto trial = chosen;
      trial.push_back(static_cast<SentenceId>(s));
      const double g = score_of(cluster, trial, weights) - base;
      const double ratio = g / cluster.sentences[s].length;
      if (g > kTieEps && ratio > best_ratio) {
        best_ratio = ratio;
        best = static_cast<std::ptrdiff_t>(s);
      }
    }
    if (best < 0) return false;
    chosen.push_back(static_cast<SentenceId>(best));
    in[best] = 1;
    used += cluster.sentences[best].length;
    return true;
  };
  while (add_best()) {
  }

  bool improved = true;
  while (improved) {
    improved = false;
    const double base = score_of(cluster, chosen, weights);
    for (std::size_t i = 0; i < chosen.size() && !improved; ++i) {
      for (std::size_t t = 0; t < n && !improved; ++t) {
        if (in[t]) continue;
        const int len = used - cluster.sentences[chosen[i]].length + cluster.sentences[t].length;
        if (len > capacity) continue;
        auto trial = chosen;
        trial[i] = static_cast<SentenceId>(t);
        if (score_of(cluster, trial, weights) > base + kTieEps) {
          in[chosen[i]] = 0;
          in[t] = 1;
          chosen = std::move(trial);
          used = len;
          improved = true;
        }
      }
    }
    if (improved) {
      while (add_best()) {
      }
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

void require_feasible(const DocumentCluster& cluster, int L) {
  for (const auto& s : cluster.sentences) {
    if (s.length < L) return;
  }
  fail(ErrorCode::kInfeasible, "no sentence fits within the length limit " + std::to_string(L));
}

}  // namespace

Summary make_summary(const DocumentCluster& cluster, std::vector<SentenceId> ids,
                     const ConceptWeights& weights) {
  std::sort(ids.begin(), ids.end());
  Summary s;
  std::set<ConceptId> cover;
  for (SentenceId id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= cluster.sentences.size()) {
      fail(ErrorCode::kValidation, "sentence id " + std::to_string(id) + " out of range");
    }
    s.length += cluster.sentences[id].length;
    cover.insert(cluster.concepts_by_sentence[id].begin(), cluster.concepts_by_sentence[id].end());
  }
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    fail(ErrorCode::kValidation, "summary repeats a sentence");
  }
  s.concept_cover.assign(cover.begin(), cover.end());
  for (ConceptId c : s.concept_cover) s.score += weight_of(weights, c);
  s.sentence_ids = std::move(ids);
  return s;
}

std::string summary_text(const Summary& summary, const DocumentCluster& cluster) {
  std::string out;
  for (SentenceId id : summary.sentence_ids) {
    if (!out.empty()) out.push_back(' ');
    out += cluster.sentences[id].text;
  }
  return out;
}

double redundancy(const Summary& summary, const DocumentCluster& cluster,
                  const std::set<ConceptId>& preferred) {
  if (summary.sentence_ids.empty()) {
    fail(ErrorCode::kValidation, "redundancy of an empty summary is undefined");
  }
  const auto sets = stripped_sets(cluster, preferred);
  return redundancy_of(summary.sentence_ids, sets);
}

Summary generate_optimal(const DocumentCluster& cluster, const ConceptWeights& weights, int L,
                         const GeneratorOptions& options) {
  require_feasible(cluster, L);
  std::vector<SentenceId> ids;
  if (cluster.sentences.size() <= options.exact_limit) {
    BranchAndBound bnb(cluster, weights, L, 1, /*allow_empty=*/true, 1.0, nullptr);
    auto best = bnb.run();
    ids = best.front().ids;
  } else {
    ids = greedy_with_swap(cluster, weights, L);
  }
  return make_summary(cluster, std::move(ids), weights);
}

SummaryPool build_pool(const DocumentCluster& cluster, const ConceptWeights& weights, int L,
                       const PoolOptions& options) {
  if (options.pool_size < 1) fail(ErrorCode::kValidation, "pool_size must be at least 1");
  require_feasible(cluster, L);
  const auto sets = stripped_sets(cluster, options.preferred);

  std::vector<Ranked> ranked;
  if (cluster.sentences.size() <= options.generator.exact_limit) {
    BranchAndBound bnb(cluster, weights, L, static_cast<std::size_t>(options.pool_size),
                       /*allow_empty=*/false, options.redundancy_cap, &sets);
    ranked = bnb.run();
  } else {
    std::mt19937_64 rng(options.generator.seed);
    std::uniform_real_distribution<double> jitter(0.5, 1.5);
    std::set<std::vector<SentenceId>> seen;
    const int rounds = options.pool_size * std::max(1, options.perturbation_rounds);
    for (int r = 0; r < rounds; ++r) {
      ConceptWeights w = weights;
      if (r > 0) {
        for (double& x : w) x *= jitter(rng);
      }
      auto ids = greedy_with_swap(cluster, w, L);
      if (ids.empty() || !seen.insert(ids).second) continue;
      if (redundancy_of(ids, sets) > options.redundancy_cap + 1e-12) continue;
      ranked.push_back({score_of(cluster, ids, weights), ids});
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
      return ahead(a.score, a.ids, b.score, b.ids);
    });
    if (ranked.size() > static_cast<std::size_t>(options.pool_size)) {
      ranked.resize(static_cast<std::size_t>(options.pool_size));
    }
  }
  if (ranked.empty()) {
    fail(ErrorCode::kInfeasible, "no feasible summary passes the redundancy cap");
  }

  SummaryPool pool;
  pool.budget_L = L;
  for (auto& r : ranked) {
    auto s = make_summary(cluster, std::move(r.ids), weights);
    s.redundancy = redundancy_of(s.sentence_ids, sets);
    pool.summaries.push_back(std::move(s));
  }
  return pool;
}

std::set<ConceptId> top_concepts(const ConceptWeights& weights, double fraction) {
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return weights[a] > weights[b]; });
  const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(weights.size())));
  std::set<ConceptId> out;
  for (std::size_t i = 0; i < std::min(k, order.size()); ++i) {
    out.insert(static_cast<ConceptId>(order[i]));
  }
  return out;
}

}  // namespace sumrecom
