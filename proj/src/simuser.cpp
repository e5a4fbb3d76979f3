#include "sumrecom/simuser.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "background.hpp"
#include "sumrecom/error.hpp"
#include "sumrecom/text.hpp"

namespace sumrecom {

using nlohmann::json;

namespace {

double utility_of(const GroundTruthUser& user, ConceptId id) {
  if (id < 0 || static_cast<std::size_t>(id) >= user.true_utilities.size()) {
    fail(ErrorCode::kValidation, "unknown concept id " + std::to_string(id));
  }
  return user.true_utilities[static_cast<std::size_t>(id)];
}

}  // namespace

PreferenceRecord answer_preference(const GroundTruthUser& user, ConceptId a, ConceptId b,
                                   std::mt19937_64& rng, int round) {
  const double ua = utility_of(user, a);
  const double ub = utility_of(user, b);
  int label = ua > ub ? 1 : 0;
  if (user.noise > 0.0) {
    std::bernoulli_distribution flip(user.noise);
    if (flip(rng)) label = 1 - label;
  }
  return PreferenceRecord{a, b, label, round};
}

PreferenceRecord answer_preference(const GroundTruthUser& user, ConceptId a, ConceptId b,
                                   std::uint64_t seed, int round) {
  std::mt19937_64 rng(seed);
  return answer_preference(user, a, b, rng, round);
}

GroundTruthUser make_ground_truth_user(const DocumentCluster& cluster,
                                       const std::vector<double>& planted, double noise,
                                       std::uint64_t seed, double jitter) {
  if (noise < 0.0 || noise >= 1.0) fail(ErrorCode::kValidation, "noise must lie in [0,1)");
  const std::size_t n = cluster.concepts.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  GroundTruthUser user;
  user.noise = noise;
  user.true_utilities.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double base = dot(planted, cluster.concepts[i].features.values);
    user.true_utilities[i] = base + jitter * static_cast<double>(perm[i] + 1) / static_cast<double>(n);
  }
  // Resolve any residual exact collisions.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return user.true_utilities[x] < user.true_utilities[y] ||
           (user.true_utilities[x] == user.true_utilities[y] && x < y);
  });
  for (std::size_t k = 1; k < n; ++k) {
    double& cur = user.true_utilities[order[k]];
    const double prev = user.true_utilities[order[k - 1]];
    if (cur <= prev) cur = std::nextafter(prev, INFINITY);
  }
  return user;
}

GroundTruthUser planted_concept_user(const DocumentCluster& cluster,
                                     const std::map<std::string, double>& word_importance,
                                     double noise, std::uint64_t seed, double jitter) {
  double lo = 0.0;
  if (!word_importance.empty()) {
    lo = std::min_element(word_importance.begin(), word_importance.end(),
                          [](const auto& a, const auto& b) { return a.second < b.second; })
             ->second;
  }
  DocumentCluster view;
  view.concepts = cluster.concepts;
  for (auto& c : view.concepts) {
    const std::set<std::string> words(c.tokens.begin(), c.tokens.end());
    double sum = 0.0;
    for (const auto& t : words) {
      auto it = word_importance.find(t);
      if (it != word_importance.end()) sum += it->second - lo;
    }
    c.features.values = {sum};
  }
  return make_ground_truth_user(view, {1.0}, noise, seed, jitter);
}

GroundTruthReward make_ground_truth_reward(const std::vector<std::string>& references,
                                           double alpha, double beta, double gamma,
                                           RougeOptions rouge) {
  GroundTruthReward gt{alpha, beta, gamma, rouge_tokens(references), rouge};
  return gt;
}

double ground_truth_value(const GroundTruthReward& gt, double r1, double r2, double red) {
  return gt.alpha * r1 + gt.beta * r2 - gt.gamma * red;
}

double score_summary(const GroundTruthReward& gt, const Summary& summary,
                     const DocumentCluster& cluster) {
  if (gt.references.empty()) fail(ErrorCode::kValidation, "ground-truth reward needs references");
  const auto cand = rouge_tokens(summary_text(summary, cluster));
  const double r1 = rouge_n(cand, gt.references, 1, gt.rouge);
  const double r2 = rouge_n(cand, gt.references, 2, gt.rouge);
  const double red = summary.sentence_ids.empty() ? 0.0 : redundancy(summary, cluster, {});
  return ground_truth_value(gt, r1, r2, red);
}

PreferenceRecord answer_summary_preference(const GroundTruthReward& gt, const Summary& left,
                                           const Summary& right, const DocumentCluster& cluster,
                                           int left_index, int right_index, int round) {
  const double vl = score_summary(gt, left, cluster);
  const double vr = score_summary(gt, right, cluster);
  return PreferenceRecord{left_index, right_index, vl > vr ? 1 : 0, round};
}

// ---------------------------------------------------------------------------
// Synthetic clusters
// ---------------------------------------------------------------------------

namespace {

void check_spec(const SyntheticSpec& s) {
  if (s.vocab_size < 2) fail(ErrorCode::kValidation, "generator vocabulary must have >= 2 words");
  if (s.documents < 1 || s.sentences_per_document < 1) {
    fail(ErrorCode::kValidation, "generator needs at least one document and sentence");
  }
  if (s.topic_weights.empty()) fail(ErrorCode::kValidation, "generator needs topic weights");
  for (double w : s.topic_weights) {
    if (!(w > 0.0)) fail(ErrorCode::kValidation, "topic weights must be positive");
  }
  if (static_cast<int>(s.topic_weights.size()) > s.vocab_size) {
    fail(ErrorCode::kValidation, "more topics than vocabulary words");
  }
  if (s.min_words < 1 || s.max_words < s.min_words) {
    fail(ErrorCode::kValidation, "bad sentence word range");
  }
  if (s.embedding_dim < 1) fail(ErrorCode::kValidation, "embedding_dim must be positive");
  if (s.references < 1) fail(ErrorCode::kValidation, "at least one reference is required");
}

}  // namespace

SyntheticSpec parse_synthetic_spec(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kValidation, std::string("bad generator spec: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::kValidation, "generator spec must be a JSON object");
  SyntheticSpec s;
  const json known = json::parse(synthetic_spec_json(s));
  for (auto& [k, v] : j.items()) {
    if (!known.contains(k)) fail(ErrorCode::kValidation, "unknown generator spec key '" + k + "'");
  }
  try {
    s.id = j.value("id", s.id);
    s.documents = j.value("documents", s.documents);
    s.sentences_per_document = j.value("sentences_per_document", s.sentences_per_document);
    s.vocab_size = j.value("vocab_size", s.vocab_size);
    s.topic_weights = j.value("topic_weights", s.topic_weights);
    s.min_words = j.value("min_words", s.min_words);
    s.max_words = j.value("max_words", s.max_words);
    s.stopword_rate = j.value("stopword_rate", s.stopword_rate);
    s.entity_rate = j.value("entity_rate", s.entity_rate);
    s.embedding_dim = j.value("embedding_dim", s.embedding_dim);
    s.embedding_noise = j.value("embedding_noise", s.embedding_noise);
    s.references = j.value("references", s.references);
    s.reference_length = j.value("reference_length", s.reference_length);
    if (j.contains("utility_weights")) {
      for (auto& [k, v] : j.at("utility_weights").items()) {
        if (!s.utility_weights.count(k)) fail(ErrorCode::kValidation, "unknown utility weight '" + k + "'");
        s.utility_weights[k] = v.get<double>();
      }
    }
    s.jitter = j.value("jitter", s.jitter);
    s.reference_noise = j.value("reference_noise", s.reference_noise);
    s.importance_quantile = j.value("importance_quantile", s.importance_quantile);
  } catch (const json::exception& e) {
    fail(ErrorCode::kValidation, std::string("bad generator spec: ") + e.what());
  }
  check_spec(s);
  return s;
}

std::string synthetic_spec_json(const SyntheticSpec& s) {
  json j{{"id", s.id},
         {"documents", s.documents},
         {"sentences_per_document", s.sentences_per_document},
         {"vocab_size", s.vocab_size},
         {"topic_weights", s.topic_weights},
         {"min_words", s.min_words},
         {"max_words", s.max_words},
         {"stopword_rate", s.stopword_rate},
         {"entity_rate", s.entity_rate},
         {"embedding_dim", s.embedding_dim},
         {"embedding_noise", s.embedding_noise},
         {"references", s.references},
         {"reference_length", s.reference_length},
         {"utility_weights", s.utility_weights},
         {"jitter", s.jitter},
         {"reference_noise", s.reference_noise},
         {"importance_quantile", s.importance_quantile}};
  return j.dump(2);
}

namespace {

// Pronounceable made-up words built from consonant-vowel syllables. They end
// in a vowel, so the stemmer leaves them alone.
std::vector<std::string> make_vocabulary(std::size_t count) {
  static constexpr std::string_view kCons = "bdfgklmnprtvz";
  static constexpr std::string_view kVow = "aeiou";
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; out.size() < count; ++i) {
    std::string w;
    std::size_t x = i;
    const int syllables = i < 65 * 65 ? 2 : 3;
    for (int s = 0; s < syllables; ++s) {
      const std::size_t syl = x % 65;
      x /= 65;
      w.push_back(kCons[syl / 5]);
      w.push_back(kVow[syl % 5]);
    }
    if (text::is_stopword(w) || detail::background_count(w) > 0 || !seen.insert(w).second) continue;
    out.push_back(w);
  }
  return out;
}

std::string capitalize(std::string w) {
  if (!w.empty()) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
  return w;
}

const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> words{"the", "of", "and", "to", "in", "was", "with", "for", "on", "by"};
  return words;
}

// Greedy coverage of the planted important words under the reference
// length. A word is worth its importance above the spec's quantile; references
// after the first perturb that worth multiplicatively.
std::vector<std::string> build_references(const DocumentCluster& cluster,
                                          const std::map<std::string, double>& importance,
                                          const SyntheticSpec& spec, std::mt19937_64& rng) {
  std::vector<double> sorted;
  for (const auto& [w, v] : importance) sorted.push_back(v);
  std::sort(sorted.begin(), sorted.end());
  double lo = 0.0;
  if (!sorted.empty()) {
    const double q = std::clamp(spec.importance_quantile, 0.0, 1.0);
    lo = sorted[static_cast<std::size_t>(q * static_cast<double>(sorted.size() - 1))];
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::string> refs;
  for (int r = 0; r < spec.references; ++r) {
    std::map<std::string, double> value;
    for (const auto& [w, v] : importance) {
      const double noise = r == 0 ? 1.0 : std::exp(spec.reference_noise * gauss(rng));
      value[w] = std::max(0.0, v - lo) * noise;
    }
    std::set<std::string> covered;
    std::vector<char> used(cluster.sentences.size(), 0);
    std::vector<SentenceId> chosen;
    int length = 0;
    while (true) {
      double best = 0.0;
      std::size_t pick = cluster.sentences.size();
      for (std::size_t i = 0; i < cluster.sentences.size(); ++i) {
        const auto& s = cluster.sentences[i];
        if (used[i] || length + s.length >= spec.reference_length) continue;
        double gain = 0.0;
        std::set<std::string> fresh(s.content.begin(), s.content.end());
        for (const auto& w : fresh) {
          if (!covered.count(w)) gain += value[w];
        }
        if (gain > best) {
          best = gain;
          pick = i;
        }
      }
      if (pick == cluster.sentences.size()) break;
      used[pick] = 1;
      length += cluster.sentences[pick].length;
      covered.insert(cluster.sentences[pick].content.begin(), cluster.sentences[pick].content.end());
      chosen.push_back(static_cast<SentenceId>(pick));
    }
    std::sort(chosen.begin(), chosen.end());
    std::string text;
    for (SentenceId id : chosen) {
      if (!text.empty()) text.push_back(' ');
      text += cluster.sentences[static_cast<std::size_t>(id)].text;
    }
    refs.push_back(text);
  }
  return refs;
}

}  // namespace

SyntheticInput generate_synthetic_input(const SyntheticSpec& spec, std::uint64_t seed) {
  check_spec(spec);
  std::mt19937_64 rng(seed);
  const std::size_t topics = spec.topic_weights.size();

  // Topic word lists: words are dealt round-robin; within a topic, rank r
  // has Zipf weight 1/(r+1). The last word of each topic is its entity.
  const auto vocab = make_vocabulary(static_cast<std::size_t>(spec.vocab_size) + topics);
  std::vector<std::vector<std::string>> topic_words(topics);
  for (int i = 0; i < spec.vocab_size; ++i) {
    topic_words[static_cast<std::size_t>(i) % topics].push_back(vocab[static_cast<std::size_t>(i)]);
  }
  std::vector<std::string> entities;
  for (std::size_t t = 0; t < topics; ++t) entities.push_back(vocab[spec.vocab_size + t]);

  std::vector<std::discrete_distribution<std::size_t>> zipf;
  for (const auto& words : topic_words) {
    std::vector<double> p;
    for (std::size_t r = 0; r < words.size(); ++r) p.push_back(1.0 / static_cast<double>(r + 1));
    zipf.emplace_back(p.begin(), p.end());
  }
  std::discrete_distribution<std::size_t> topic_pick(spec.topic_weights.begin(),
                                                     spec.topic_weights.end());
  std::uniform_int_distribution<int> length_pick(spec.min_words, spec.max_words);
  std::bernoulli_distribution stop_pick(spec.stopword_rate);
  std::bernoulli_distribution entity_pick(spec.entity_rate);
  std::uniform_int_distribution<std::size_t> filler_pick(0, filler_words().size() - 1);

  SyntheticInput out;
  out.input.id = spec.id;
  struct Drafted {
    std::size_t topic;
    std::string text;
    int tokens;
  };
  std::vector<Drafted> all;
  for (int d = 0; d < spec.documents; ++d) {
    std::vector<Drafted> sentences;
    for (int s = 0; s < spec.sentences_per_document; ++s) {
      const std::size_t t = topic_pick(rng);
      const int n = length_pick(rng);
      std::vector<std::string> words;
      for (int k = 0; k < n; ++k) {
        if (k > 0 && stop_pick(rng)) words.push_back(filler_words()[filler_pick(rng)]);
        words.push_back(topic_words[t][zipf[t](rng)]);
      }
      if (entity_pick(rng)) {
        words.insert(words.begin() + 1, capitalize(entities[t]));
      }
      words[0] = capitalize(words[0]);
      sentences.push_back({t, text::join(words) + ".", static_cast<int>(words.size())});
    }
    // Heavier topics lead each document.
    std::stable_sort(sentences.begin(), sentences.end(), [&](const Drafted& a, const Drafted& b) {
      return spec.topic_weights[a.topic] > spec.topic_weights[b.topic];
    });
    std::string body;
    for (const auto& s : sentences) {
      if (!body.empty()) body.push_back(' ');
      body += s.text;
      out.sentence_topics.push_back(static_cast<int>(s.topic));
      all.push_back(s);
    }
    char name[32];
    std::snprintf(name, sizeof name, "d%02d", d);
    out.input.documents.push_back({name, body});
  }

  // Word vectors: topic centre plus isotropic noise.
  std::normal_distribution<double> gauss(0.0, 1.0);
  out.embeddings = EmbeddingTable(static_cast<std::size_t>(spec.embedding_dim));
  for (std::size_t t = 0; t < topics; ++t) {
    std::vector<double> centre(static_cast<std::size_t>(spec.embedding_dim));
    for (double& x : centre) x = gauss(rng);
    auto words = topic_words[t];
    words.push_back(entities[t]);
    for (const auto& w : words) {
      std::vector<double> v = centre;
      for (double& x : v) x += spec.embedding_noise * gauss(rng);
      out.embeddings.add(w, std::move(v));
    }
  }

  // Planted importance from the unigram view of the generated text.
  const DocumentCluster unigrams =
      featurize_concepts(build_cluster(out.input, ConceptUnit::kUnigram), &out.embeddings);
  const auto weights = planted_weights(spec, unigrams.feature_names);
  for (const auto& c : unigrams.concepts) {
    out.word_importance[c.surface] = dot(weights, c.features.values);
  }
  out.input.references = build_references(unigrams, out.word_importance, spec, rng);
  return out;
}

std::vector<double> planted_weights(const SyntheticSpec& spec,
                                    const std::vector<std::string>& feature_names) {
  std::vector<double> w;
  for (const auto& name : feature_names) {
    auto it = spec.utility_weights.find(name);
    w.push_back(it == spec.utility_weights.end() ? 0.0 : it->second);
  }
  return w;
}

SyntheticCluster make_synthetic_cluster(const SyntheticSpec& spec, std::uint64_t seed,
                                        ConceptUnit unit, double noise) {
  SyntheticCluster out;
  out.raw = generate_synthetic_input(spec, seed);
  out.cluster = featurize_concepts(build_cluster(out.raw.input, unit), &out.raw.embeddings);
  out.user = planted_concept_user(out.cluster, out.raw.word_importance, noise,
                                  seed ^ 0x9e3779b97f4a7c15ULL, spec.jitter);
  out.references = out.raw.input.references;
  return out;
}

// ---------------------------------------------------------------------------
// ROUGE-1 oracle bound
// ---------------------------------------------------------------------------

namespace {

class RougeBound {
 public:
  RougeBound(const DocumentCluster& cluster, const std::vector<Tokens>& refs, int L)
      : capacity_(L - 1) {
    std::unordered_map<std::string, int> ids;
    auto id_of = [&](const std::string& w) {
      auto [it, fresh] = ids.emplace(w, static_cast<int>(ids.size()));
      return it->second;
    };
    for (const auto& r : refs) {
      std::unordered_map<int, int> counts;
      for (const auto& w : r) ++counts[id_of(w)];
      ref_counts_.push_back(std::move(counts));
      total_ += static_cast<double>(r.size());
    }
    for (const auto& s : cluster.sentences) {
      std::unordered_map<int, int> counts;
      for (const auto& w : rouge_tokens(s.text)) ++counts[id_of(w)];
      sentences_.push_back({std::vector<std::pair<int, int>>(counts.begin(), counts.end()),
                            s.length});
    }
    have_.assign(ids.size(), 0);
  }

  double run() {
    if (total_ == 0.0) return 0.0;
    search(0, 0, 0.0);
    return best_ / total_;
  }

 private:
  struct Item {
    std::vector<std::pair<int, int>> counts;
    int length;
  };

  double clipped(int word, int count) const {
    double m = 0.0;
    for (const auto& r : ref_counts_) {
      auto it = r.find(word);
      if (it != r.end()) m += std::min(count, it->second);
    }
    return m;
  }

  double gain(std::size_t s) const {
    double g = 0.0;
    for (auto [w, c] : sentences_[s].counts) g += clipped(w, have_[w] + c) - clipped(w, have_[w]);
    return g;
  }

  void search(std::size_t i, int used, double value) {
    best_ = std::max(best_, value);
    if (i == sentences_.size()) return;
    // Fractional knapsack over individual marginal gains bounds any completion.
    std::vector<std::pair<double, int>> rest;
    for (std::size_t k = i; k < sentences_.size(); ++k) {
      if (used + sentences_[k].length <= capacity_) rest.push_back({gain(k), sentences_[k].length});
    }
    std::sort(rest.begin(), rest.end(), [](auto a, auto b) {
      return a.first * b.second > b.first * a.second;
    });
    double bound = value;
    int room = capacity_ - used;
    for (auto [g, l] : rest) {
      if (l <= room) {
        bound += g;
        room -= l;
      } else {
        bound += g * room / std::max(l, 1);
        break;
      }
    }
    if (bound <= best_ + 1e-12) return;
    const auto& item = sentences_[i];
    if (used + item.length <= capacity_) {
      const double g = gain(i);
      for (auto [w, c] : item.counts) have_[w] += c;
      search(i + 1, used + item.length, value + g);
      for (auto [w, c] : item.counts) have_[w] -= c;
    }
    search(i + 1, used, value);
  }

  int capacity_;
  std::vector<std::unordered_map<int, int>> ref_counts_;
  std::vector<Item> sentences_;
  std::vector<int> have_;
  double total_ = 0.0;
  double best_ = 0.0;
};

}  // namespace

double oracle_rouge1_bound(const DocumentCluster& cluster, const std::vector<Tokens>& references,
                           int L) {
  if (references.empty()) fail(ErrorCode::kValidation, "oracle bound needs references");
  if (L < 1) fail(ErrorCode::kValidation, "summary length limit must be at least 1");
  return RougeBound(cluster, references, L).run();
}

}  // namespace sumrecom
