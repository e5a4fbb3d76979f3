#include "sumrecom/active.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "sumrecom/error.hpp"
#include "sumrecom/kernels.hpp"
#include "sumrecom/text.hpp"

namespace sumrecom {

double normalized_levenshtein(std::string_view a, std::string_view b) {
  const std::size_t n = a.size(), m = b.size();
  if (n == 0 && m == 0) return 0.0;
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return static_cast<double>(prev[m]) / static_cast<double>(std::max(n, m));
}

namespace {

std::set<std::string> stemmed_content(const std::vector<std::string>& tokens) {
  std::set<std::string> out;
  for (const auto& t : tokens) {
    if (!text::is_stopword(t)) out.insert(text::stem(t));
  }
  return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& x : a) inter += b.count(x);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

std::vector<double> features_of_surfaces(const std::string& sa, const std::vector<std::string>& ta,
                                         const std::string& sb, const std::vector<std::string>& tb,
                                         const EmbeddingTable* embeddings) {
  double emb = 0.0;
  if (embeddings && !embeddings->empty()) {
    const auto va = mean_vector(*embeddings, ta);
    const auto vb = mean_vector(*embeddings, tb);
    emb = std::clamp(cosine(va, vb), 0.0, 1.0);
  }
  return {1.0 - normalized_levenshtein(sa, sb), jaccard(stemmed_content(ta), stemmed_content(tb)),
          emb};
}

}  // namespace

std::vector<double> similarity_features(const Concept& a, const Concept& b,
                                        const EmbeddingTable* embeddings) {
  return features_of_surfaces(a.surface, a.tokens, b.surface, b.tokens, embeddings);
}

double coreference_probability(const SimilarityModel& model, std::span<const double> delta) {
  if (model.form == SigmoidForm::kShifted) {
    double z = 0.0;
    for (double d : delta) z += d;
    z /= static_cast<double>(std::max<std::size_t>(delta.size(), 1));
    return 1.0 / (1.0 + std::exp(model.scale * (1.0 - z)));
  }
  return logistic(dot(model.theta, delta) + model.bias);
}

double coreference_probability(const SimilarityModel& model, const Concept& a, const Concept& b,
                               const EmbeddingTable* embeddings) {
  return coreference_probability(model, similarity_features(a, b, embeddings));
}

const std::vector<CorefExample>& bundled_coref_examples() {
  static const std::vector<CorefExample> kExamples = {
      {"cancer treatment", "cancer treatments", 1},
      {"tumor", "tumors", 1},
      {"president obama", "obama", 1},
      {"election results", "election result", 1},
      {"oil price", "oil prices", 1},
      {"earthquake", "earthquakes", 1},
      {"climate change", "climate changes", 1},
      {"vaccine trial", "vaccine trials", 1},
      {"stock market", "stock markets", 1},
      {"rescue workers", "rescue worker", 1},
      {"police officer", "police officers", 1},
      {"flooding", "floods", 1},
      {"government", "governments", 1},
      {"peace talks", "peace talk", 1},
      {"hurricane", "hurricane", 1},
      {"cancer treatment", "stock market", 0},
      {"tumor", "election", 0},
      {"oil price", "vaccine trial", 0},
      {"earthquake", "president", 0},
      {"hurricane", "court ruling", 0},
      {"climate change", "police officer", 0},
      {"flood", "senate", 0},
      {"rescue workers", "interest rates", 0},
      {"cancer treatment", "cancer symptoms", 0},
      {"election results", "election fraud", 0},
      {"oil", "soil", 0},
      {"peace talks", "trade talks", 0},
      {"government", "governor", 0},
      {"storm", "stock", 0},
      {"market", "marker", 0},
  };
  return kExamples;
}

SimilarityModel train_similarity_model(const std::vector<CorefExample>& examples, int iterations,
                                       double learning_rate) {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (const auto& ex : examples) {
    x.push_back(features_of_surfaces(ex.a, text::tokenize(ex.a), ex.b, text::tokenize(ex.b),
                                     nullptr));
    y.push_back(ex.label);
  }
  SimilarityModel model;
  // Without embeddings the third feature is always zero; give it the mean of
  // the two lexical weights so a user-supplied table is not ignored.
  std::vector<double> w(3, 0.0);
  double b = 0.0;
  const double n = static_cast<double>(std::max<std::size_t>(x.size(), 1));
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> g(3, 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - logistic(dot(w, x[i]) + b);
      for (std::size_t k = 0; k < 3; ++k) g[k] += r * x[i][k];
      gb += r;
    }
    for (std::size_t k = 0; k < 3; ++k) w[k] += learning_rate * (g[k] / n - 1e-3 * w[k]);
    b += learning_rate * gb / n;
  }
  w[2] = 0.5 * (w[0] + w[1]);
  model.theta = w;
  model.bias = b;
  return model;
}

const SimilarityModel& default_similarity_model() {
  static const SimilarityModel kModel = train_similarity_model(bundled_coref_examples());
  return kModel;
}

// ---------------------------------------------------------------------------

int Partition::num_clusters() const {
  int hi = -1;
  for (int l : labels) hi = std::max(hi, l);
  return hi + 1;
}

Partition canonical_partition(std::vector<int> labels) {
  std::map<int, int> remap;
  for (int& l : labels) {
    auto [it, inserted] = remap.try_emplace(l, static_cast<int>(remap.size()));
    l = it->second;
  }
  return Partition{std::move(labels)};
}

double partition_objective(const ProbabilityTable& probs, const Partition& partition) {
  double total = 0.0;
  const std::size_t n = probs.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = probs(i, j);
      total += partition.coreferent(i, j) ? p : 1.0 - p;
    }
  }
  return total;
}

bool is_transitive(const Partition& partition) {
  const std::size_t n = partition.labels.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        const int xij = partition.coreferent(i, j), xjk = partition.coreferent(j, k),
                  xik = partition.coreferent(i, k);
        if (xik < xij + xjk - 1) return false;
      }
    }
  }
  return true;
}

namespace {

// Local search state: labels in [0, n), affinity[i*n + c] = sum over j in
// cluster c (j != i) of (2 p_ij - 1).
class LocalSearch {
 public:
  LocalSearch(const ProbabilityTable& probs, std::vector<int> labels)
      : probs_(probs), n_(probs.size()), labels_(std::move(labels)),
        size_(n_, 0), affinity_(n_ * n_, 0.0) {
    for (std::size_t i = 0; i < n_; ++i) ++size_[labels_[i]];
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        if (j != i) affinity_[i * n_ + labels_[j]] += 2.0 * probs_(i, j) - 1.0;
      }
    }
  }

  const std::vector<int>& labels() const { return labels_; }

  // Applies the best strictly improving move; returns its gain or 0.
  double step() {
    double best_gain = kMinGain;
    enum class Kind { kNone, kMove, kMerge } kind = Kind::kNone;
    std::size_t who = 0;
    int target = 0, other = 0;

    int empty_slot = -1;
    for (std::size_t c = 0; c < n_; ++c) {
      if (size_[c] == 0) {
        empty_slot = static_cast<int>(c);
        break;
      }
    }

    for (std::size_t i = 0; i < n_; ++i) {
      const int from = labels_[i];
      const double stay = affinity_[i * n_ + from];
      for (std::size_t c = 0; c < n_; ++c) {
        if (static_cast<int>(c) == from || size_[c] == 0) continue;
        const double gain = affinity_[i * n_ + c] - stay;
        if (gain > best_gain) {
          best_gain = gain;
          kind = Kind::kMove;
          who = i;
          target = static_cast<int>(c);
        }
      }
      // Split out into a fresh singleton.
      if (size_[from] > 1 && empty_slot >= 0 && -stay > best_gain) {
        best_gain = -stay;
        kind = Kind::kMove;
        who = i;
        target = empty_slot;
      }
    }

    // between[a*n + b] = total affinity of cluster a's members towards b.
    std::vector<double> between(n_ * n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const auto a = static_cast<std::size_t>(labels_[i]);
      for (std::size_t c = 0; c < n_; ++c) between[a * n_ + c] += affinity_[i * n_ + c];
    }
    for (std::size_t a = 0; a < n_; ++a) {
      if (size_[a] == 0) continue;
      for (std::size_t b = a + 1; b < n_; ++b) {
        if (size_[b] == 0) continue;
        const double gain = between[a * n_ + b];
        if (gain > best_gain) {
          best_gain = gain;
          kind = Kind::kMerge;
          target = static_cast<int>(a);
          other = static_cast<int>(b);
        }
      }
    }

    switch (kind) {
      case Kind::kNone:
        return 0.0;
      case Kind::kMove:
        move(who, target);
        break;
      case Kind::kMerge:
        for (std::size_t i = 0; i < n_; ++i) {
          if (labels_[i] == other) move(i, target);
        }
        break;
    }
    return best_gain;
  }

 private:
  static constexpr double kMinGain = 1e-12;

  void move(std::size_t i, int to) {
    const int from = labels_[i];
    if (from == to) return;
    for (std::size_t j = 0; j < n_; ++j) {
      if (j == i) continue;
      const double w = 2.0 * probs_(i, j) - 1.0;
      affinity_[j * n_ + from] -= w;
      affinity_[j * n_ + to] += w;
    }
    --size_[from];
    ++size_[to];
    labels_[i] = to;
  }

  const ProbabilityTable& probs_;
  std::size_t n_;
  std::vector<int> labels_;
  std::vector<int> size_;
  std::vector<double> affinity_;
};

}  // namespace

Partition partition_concepts(const ProbabilityTable& probs, const PartitionOptions& options) {
  const std::size_t n = probs.size();
  if (n == 0) fail(ErrorCode::kValidation, "cannot partition an empty concept set");

  std::mt19937_64 rng(options.seed);
  Partition best;
  double best_objective = -1.0;
  std::vector<double> best_trace;
  const int restarts = std::max(1, options.restarts);
  for (int r = 0; r < restarts; ++r) {
    std::vector<int> init(n);
    if (r == 0) {
      std::iota(init.begin(), init.end(), 0);
    } else if (r == 1) {
      std::fill(init.begin(), init.end(), 0);
    } else {
      const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(double(n))));
      for (auto& l : init) l = static_cast<int>(rng() % k);
    }
    LocalSearch search(probs, init);
    std::vector<double> trace;
    double objective = partition_objective(probs, Partition{init});
    trace.push_back(objective);
    for (int it = 0; it < options.max_iters; ++it) {
      const double gain = search.step();
      if (gain <= 0.0) break;
      objective += gain;
      trace.push_back(objective);
    }
    auto candidate = canonical_partition(search.labels());
    const double exact = partition_objective(probs, candidate);
    if (exact > best_objective + 1e-12) {
      best_objective = exact;
      best = std::move(candidate);
      best_trace = std::move(trace);
    }
  }
  if (options.trace) *options.trace = std::move(best_trace);
  return best;
}

// ---------------------------------------------------------------------------

void QueryState::mark_asked(ConceptPair pair) {
  pair = make_pair_key(pair.first, pair.second);
  if (asked_set.insert(pair).second) asked.push_back(pair);
}

void record_feedback(QueryState& state, const PreferenceRecord& record, double gain) {
  validate(record);
  state.history.push_back(record);
  state.gains.push_back(gain);
}

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::kHeuristic: return "heuristic";
    case Strategy::kRandom: return "random";
    case Strategy::kUncertainty: return "uncertainty";
    case Strategy::kExpectedModelChange: return "expected_model_change";
    case Strategy::kQueryByCommittee: return "query_by_committee";
    case Strategy::kConformal: return "conformal";
    case Strategy::kBandit: return "bandit";
  }
  return "heuristic";
}

Strategy parse_strategy(std::string_view name) {
  for (auto s : all_strategies()) {
    if (to_string(s) == name) return s;
  }
  fail(ErrorCode::kValidation, "unknown query strategy '" + std::string(name) + "'");
}

const std::vector<Strategy>& all_strategies() {
  static const std::vector<Strategy> kAll = {
      Strategy::kHeuristic,           Strategy::kRandom,           Strategy::kUncertainty,
      Strategy::kExpectedModelChange, Strategy::kQueryByCommittee, Strategy::kConformal,
      Strategy::kBandit};
  return kAll;
}

double pair_similarity_to_history(const ProbabilityTable& probs, ConceptPair pair,
                                  const std::vector<ConceptPair>& asked) {
  double best = 0.0;
  const auto a = static_cast<std::size_t>(pair.first), b = static_cast<std::size_t>(pair.second);
  for (const auto& [c0, d0] : asked) {
    const auto c = static_cast<std::size_t>(c0), d = static_cast<std::size_t>(d0);
    const double straight = 0.5 * (probs(a, c) + probs(b, d));
    const double crossed = 0.5 * (probs(a, d) + probs(b, c));
    best = std::max({best, straight, crossed});
  }
  return best;
}

namespace {

std::vector<ConceptPair> unasked_pairs(std::size_t n, const QueryState& state) {
  std::vector<ConceptPair> out;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      ConceptPair p{static_cast<ConceptId>(i), static_cast<ConceptId>(j)};
      if (!state.asked_set.count(p)) out.push_back(p);
    }
  }
  return out;
}

// Picks among maximal-score candidates using the seed; the pair is marked.
std::optional<ConceptPair> pick_max(QueryState& state, const std::vector<ConceptPair>& pairs,
                                    const std::vector<double>& scores, std::uint64_t seed) {
  if (pairs.empty()) return std::nullopt;
  const double hi = *std::max_element(scores.begin(), scores.end());
  std::vector<std::size_t> ties;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] >= hi - 1e-12) ties.push_back(i);
  }
  std::mt19937_64 rng(seed);
  const auto chosen = pairs[ties[ties.size() == 1 ? 0 : rng() % ties.size()]];
  state.mark_asked(chosen);
  return chosen;
}

const std::vector<double>& features_of(const QueryContext& ctx, ConceptId id) {
  return ctx.cluster.concepts[static_cast<std::size_t>(id)].features.values;
}

double model_probability(const std::vector<double>& w, const std::vector<double>& a,
                         const std::vector<double>& b) {
  double z = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) z += w[k] * (a[k] - b[k]);
  return logistic(z);
}

}  // namespace

std::optional<ConceptPair> next_query_heuristic(QueryState& state, const Partition& partition,
                                                const ProbabilityTable& probs,
                                                const HeuristicOptions& options) {
  if (state.exhausted()) return std::nullopt;
  const std::size_t n = probs.size();
  auto pairs = unasked_pairs(n, state);
  std::vector<ConceptPair> cross;
  for (const auto& p : pairs) {
    if (!partition.coreferent(p.first, p.second)) cross.push_back(p);
  }
  const auto& candidates = cross.empty() ? pairs : cross;
  if (candidates.empty()) return std::nullopt;

  std::vector<double> p_values(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    p_values[i] = probs(candidates[i].first, candidates[i].second);
  }
  const double fraction = state.budget > 0 ? static_cast<double>(state.asked.size()) /
                                                 static_cast<double>(state.budget)
                                           : 0.0;
  auto sorted = p_values;
  const auto q_index = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(sorted.size() - 1)));
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(q_index),
                   sorted.end());
  const double target = sorted[q_index];

  const auto best = kernels::argmin(candidates.size(), [&](std::size_t i) {
    return std::abs(p_values[i] - target) +
           options.diversity_weight * pair_similarity_to_history(probs, candidates[i], state.asked);
  });
  const auto chosen = candidates[best.index];
  state.mark_asked(chosen);
  return chosen;
}

std::optional<ConceptPair> next_query_strategy(Strategy strategy, QueryState& state,
                                               const QueryContext& ctx, std::uint64_t seed) {
  if (state.exhausted()) return std::nullopt;
  if (strategy == Strategy::kHeuristic) {
    return next_query_heuristic(state, ctx.partition, ctx.probs, ctx.heuristic);
  }
  const std::size_t n = ctx.cluster.concepts.size();
  const auto pairs = unasked_pairs(n, state);
  if (pairs.empty()) return std::nullopt;
  const auto& w = ctx.model.weights;

  switch (strategy) {
    case Strategy::kRandom: {
      std::mt19937_64 rng(seed);
      const auto chosen = pairs[rng() % pairs.size()];
      state.mark_asked(chosen);
      return chosen;
    }
    case Strategy::kUncertainty: {
      const auto scores = kernels::evaluate(pairs.size(), [&](std::size_t i) {
        const double h = model_probability(w, features_of(ctx, pairs[i].first),
                                           features_of(ctx, pairs[i].second));
        return -std::abs(h - 0.5);
      });
      return pick_max(state, pairs, scores, seed);
    }
    case Strategy::kExpectedModelChange: {
      // Gradient norm of J for the pair labelled with the model's own
      // prediction: min(H, 1-H) * ||phi(a) - phi(b)||.
      const auto scores = kernels::evaluate(pairs.size(), [&](std::size_t i) {
        const auto& a = features_of(ctx, pairs[i].first);
        const auto& b = features_of(ctx, pairs[i].second);
        const double h = model_probability(w, a, b);
        double norm = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) norm += (a[k] - b[k]) * (a[k] - b[k]);
        return std::min(h, 1.0 - h) * std::sqrt(norm);
      });
      return pick_max(state, pairs, scores, seed);
    }
    case Strategy::kQueryByCommittee: {
      const auto rows = concept_rows(ctx.cluster);
      std::vector<std::vector<double>> committee;
      std::mt19937_64 rng(seed);
      for (int k = 0; k < ctx.committee_size; ++k) {
        UtilityModel member = UtilityModel::zeros(w.size());
        member.learning_rate = ctx.model.learning_rate;
        member.epochs = ctx.model.epochs;
        member.seed = rng();
        if (!state.history.empty()) {
          std::vector<PreferenceRecord> sample;
          for (std::size_t i = 0; i < state.history.size(); ++i) {
            sample.push_back(state.history[rng() % state.history.size()]);
          }
          member = fit(member, sample, rows);
        }
        committee.push_back(member.weights);
      }
      const auto scores = kernels::evaluate(pairs.size(), [&](std::size_t i) {
        const auto& a = features_of(ctx, pairs[i].first);
        const auto& b = features_of(ctx, pairs[i].second);
        double mean = 0.0, sq = 0.0;
        for (const auto& m : committee) {
          const double h = model_probability(m, a, b);
          mean += h;
          sq += h * h;
        }
        const double k = static_cast<double>(committee.size());
        mean /= k;
        return sq / k - mean * mean;
      });
      return pick_max(state, pairs, scores, seed);
    }
    case Strategy::kConformal: {
      const auto scores = kernels::evaluate(pairs.size(), [&](std::size_t i) {
        return -pair_similarity_to_history(ctx.probs, pairs[i], state.asked);
      });
      return pick_max(state, pairs, scores, seed);
    }
    case Strategy::kBandit: {
      // Arms are unordered pairs of partition labels.
      std::map<std::pair<int, int>, std::vector<ConceptPair>> arms;
      for (const auto& p : pairs) {
        const int la = ctx.partition.labels[p.first], lb = ctx.partition.labels[p.second];
        arms[{std::min(la, lb), std::max(la, lb)}].push_back(p);
      }
      std::map<std::pair<int, int>, std::pair<double, int>> stats;
      for (std::size_t i = 0; i < state.history.size(); ++i) {
        const auto& r = state.history[i];
        const int la = ctx.partition.labels[r.left_id], lb = ctx.partition.labels[r.right_id];
        auto& s = stats[{std::min(la, lb), std::max(la, lb)}];
        s.first += i < state.gains.size() ? state.gains[i] : 0.0;
        s.second += 1;
      }
      std::mt19937_64 rng(seed);
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      auto arm = arms.begin();
      if (u < ctx.bandit_epsilon) {
        std::advance(arm, static_cast<std::ptrdiff_t>(rng() % arms.size()));
      } else {
        double best = -1.0;
        for (auto it = arms.begin(); it != arms.end(); ++it) {
          auto s = stats.find(it->first);
          // Unexplored arms are optimistic.
          const double value = s == stats.end() ? 1.0 : s->second.first / s->second.second;
          if (value > best) {
            best = value;
            arm = it;
          }
        }
      }
      const auto& members = arm->second;
      const auto chosen = members[rng() % members.size()];
      state.mark_asked(chosen);
      return chosen;
    }
    case Strategy::kHeuristic:
      break;
  }
  return std::nullopt;
}

}  // namespace sumrecom
