#include "sumrecom/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "sumrecom/error.hpp"
#include "sumrecom/pipeline.hpp"

namespace sumrecom {

Stat summarize(const std::vector<double>& v) {
  Stat s;
  s.n = v.size();
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string Table::csv() const {
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out.str();
}

std::vector<std::uint64_t> seed_range(std::uint64_t base, int count) {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < count; ++i) out.push_back(base + static_cast<std::uint64_t>(i));
  return out;
}

namespace {

SimulationResult simulate_seed(const SyntheticSpec& spec, RunConfig config, std::uint64_t seed,
                               bool track = false) {
  config.seed = seed;
  const auto raw = generate_synthetic_input(spec, seed);
  SimulationOptions opts;
  opts.track_drafts = track;
  return run_simulation(raw.input, raw.embeddings, config, planted_user(raw, spec, config.noise, seed),
                        opts);
}

}  // namespace

std::vector<BudgetRow> run_budget_analysis(const SyntheticSpec& spec, RunConfig config,
                                           const std::vector<int>& budgets,
                                           const std::vector<std::uint64_t>& seeds) {
  std::vector<BudgetRow> rows;
  for (int b : budgets) {
    config.budget = b;
    std::vector<double> r1, r2, v;
    for (auto seed : seeds) {
      const auto r = simulate_seed(spec, config, seed);
      r1.push_back(r.rouge1);
      r2.push_back(r.rouge2);
      v.push_back(r.ground_truth);
    }
    rows.push_back({b, summarize(r1), summarize(r2), summarize(v)});
  }
  return rows;
}

Table budget_table(const std::vector<BudgetRow>& rows) {
  Table t{{"budget", "runs", "rouge1_mean", "rouge1_std", "rouge2_mean", "rouge2_std",
           "ground_truth_mean", "ground_truth_std"},
          {}};
  for (const auto& r : rows) {
    t.rows.push_back({std::to_string(r.budget), std::to_string(r.rouge1.n),
                      format_number(r.rouge1.mean), format_number(r.rouge1.stddev),
                      format_number(r.rouge2.mean), format_number(r.rouge2.stddev),
                      format_number(r.ground_truth.mean), format_number(r.ground_truth.stddev)});
  }
  return t;
}

std::vector<StrategyRow> run_strategy_analysis(const SyntheticSpec& spec, RunConfig config,
                                               const std::vector<Strategy>& strategies,
                                               const std::vector<std::uint64_t>& seeds) {
  std::vector<StrategyRow> rows;
  for (auto s : strategies) {
    config.strategy = s;
    std::vector<double> r1, r2, tau;
    for (auto seed : seeds) {
      const auto r = simulate_seed(spec, config, seed);
      r1.push_back(r.rouge1);
      r2.push_back(r.rouge2);
      tau.push_back(r.kendall_tau);
    }
    rows.push_back({s, summarize(r1), summarize(r2), summarize(tau)});
  }
  return rows;
}

Table strategy_table(const std::vector<StrategyRow>& rows) {
  Table t{{"strategy", "runs", "rouge1_mean", "rouge1_std", "rouge2_mean", "rouge2_std",
           "kendall_tau_mean"},
          {}};
  for (const auto& r : rows) {
    t.rows.push_back({std::string(to_string(r.strategy)), std::to_string(r.rouge1.n),
                      format_number(r.rouge1.mean), format_number(r.rouge1.stddev),
                      format_number(r.rouge2.mean), format_number(r.rouge2.stddev),
                      format_number(r.kendall_tau.mean)});
  }
  return t;
}

std::vector<UnitRow> run_unit_analysis(const SyntheticSpec& spec, RunConfig config,
                                       const std::vector<ConceptUnit>& units,
                                       const std::vector<std::uint64_t>& seeds, double tolerance) {
  const std::size_t k = units.size();
  std::vector<std::vector<double>> rounds(k), r1(k), concepts(k);
  for (auto seed : seeds) {
    const auto raw = generate_synthetic_input(spec, seed);
    std::vector<SimulationResult> runs;
    double target = 0.0;
    for (std::size_t u = 0; u < k; ++u) {
      config.unit = units[u];
      runs.push_back(simulate_seed(spec, config, seed, true));
      target = std::max(target, runs.back().oracle_draft_rouge1);
      concepts[u].push_back(static_cast<double>(build_cluster(raw.input, units[u]).concepts.size()));
    }
    for (std::size_t u = 0; u < k; ++u) {
      rounds[u].push_back(rounds_to_convergence(runs[u].draft_rouge1, target, tolerance));
      r1[u].push_back(runs[u].rouge1);
    }
  }
  std::vector<UnitRow> rows;
  for (std::size_t u = 0; u < k; ++u) {
    rows.push_back({units[u], summarize(rounds[u]), summarize(r1[u]), summarize(concepts[u])});
  }
  return rows;
}

Table unit_table(const std::vector<UnitRow>& rows) {
  Table t{{"unit", "runs", "rounds_to_converge_mean", "rounds_to_converge_std", "rouge1_mean",
           "concepts_mean"},
          {}};
  for (const auto& r : rows) {
    t.rows.push_back({std::string(to_string(r.unit)), std::to_string(r.rouge1.n),
                      format_number(r.rounds_to_converge.mean),
                      format_number(r.rounds_to_converge.stddev), format_number(r.rouge1.mean),
                      format_number(r.concepts.mean)});
  }
  return t;
}

const std::vector<std::string>& feature_importance_order() {
  static const std::vector<std::string> order{"tfidf",        "signature",       "position",
                                              "doc_freq",     "cooccurrence",    "sentence_length",
                                              "uppercase",    "embed_cosine",    "unit_length"};
  return order;
}

std::vector<FeatureRow> run_feature_analysis(const SyntheticSpec& spec, RunConfig config,
                                             const std::vector<int>& sizes,
                                             const std::vector<std::uint64_t>& seeds) {
  const auto& order = feature_importance_order();
  std::vector<FeatureRow> rows;
  for (int k : sizes) {
    if (k < 1) fail(ErrorCode::kValidation, "feature schema size must be at least 1");
    const int used = std::min<int>(k, static_cast<int>(order.size()));
    config.features.assign(order.begin(), order.begin() + used);
    std::vector<double> r1, tau;
    for (auto seed : seeds) {
      const auto r = simulate_seed(spec, config, seed);
      r1.push_back(r.rouge1);
      tau.push_back(r.kendall_tau);
    }
    rows.push_back({k, used, summarize(r1), summarize(tau)});
  }
  return rows;
}

Table feature_table(const std::vector<FeatureRow>& rows) {
  Table t{{"requested_features", "used_features", "runs", "rouge1_mean", "rouge1_std",
           "kendall_tau_mean"},
          {}};
  for (const auto& r : rows) {
    t.rows.push_back({std::to_string(r.requested), std::to_string(r.used),
                      std::to_string(r.rouge1.n), format_number(r.rouge1.mean),
                      format_number(r.rouge1.stddev), format_number(r.kendall_tau.mean)});
  }
  return t;
}

std::vector<AblationRow> run_ablation(const SyntheticSpec& spec, RunConfig config,
                                      const std::vector<Variant>& variants,
                                      const std::vector<std::uint64_t>& seeds) {
  std::vector<AblationRow> rows;
  for (auto v : variants) {
    config.variant = v;
    std::vector<double> gt, r1, r2;
    for (auto seed : seeds) {
      const auto r = simulate_seed(spec, config, seed);
      gt.push_back(r.ground_truth);
      r1.push_back(r.rouge1);
      r2.push_back(r.rouge2);
    }
    rows.push_back({v, summarize(gt), summarize(r1), summarize(r2)});
  }
  return rows;
}

Table ablation_table(const std::vector<AblationRow>& rows) {
  Table t{{"variant", "runs", "ground_truth_mean", "ground_truth_std", "rouge1_mean",
           "rouge1_std", "rouge2_mean", "rouge2_std"},
          {}};
  for (const auto& r : rows) {
    t.rows.push_back({std::string(to_string(r.variant)), std::to_string(r.rouge1.n),
                      format_number(r.ground_truth.mean), format_number(r.ground_truth.stddev),
                      format_number(r.rouge1.mean), format_number(r.rouge1.stddev),
                      format_number(r.rouge2.mean), format_number(r.rouge2.stddev)});
  }
  return t;
}

std::vector<OracleRow> run_oracle_bounds(const SyntheticSpec& spec, const RunConfig& config,
                                         const std::vector<std::uint64_t>& seeds) {
  std::vector<OracleRow> rows;
  for (auto seed : seeds) {
    const auto raw = generate_synthetic_input(spec, seed);
    const auto cluster = build_cluster(raw.input, config.unit);
    rows.push_back({seed, oracle_rouge1_bound(cluster, rouge_tokens(raw.input.references),
                                              config.length_limit)});
  }
  return rows;
}

Table oracle_table(const std::vector<OracleRow>& rows) {
  Table t{{"seed", "rouge1_upper_bound"}, {}};
  for (const auto& r : rows) t.rows.push_back({std::to_string(r.seed), format_number(r.bound)});
  return t;
}

Table run_named_analysis(const std::string& name, const SyntheticSpec& spec,
                         const RunConfig& config) {
  const auto seeds = seed_range(config.seed, config.seeds);
  if (name == "budget") {
    return budget_table(run_budget_analysis(spec, config, {10, 15, 20, 25, 30, 35}, seeds));
  }
  if (name == "strategy") {
    return strategy_table(run_strategy_analysis(spec, config, all_strategies(), seeds));
  }
  if (name == "unit") {
    return unit_table(run_unit_analysis(
        spec, config, {ConceptUnit::kUnigram, ConceptUnit::kBigram, ConceptUnit::kSentence}, seeds));
  }
  if (name == "feature") {
    return feature_table(run_feature_analysis(spec, config, {2, 5, 8, 10, 12, 15}, seeds));
  }
  if (name == "ablation") {
    return ablation_table(run_ablation(
        spec, config,
        {Variant::kFull, Variant::kNoActive, Variant::kNoPreference, Variant::kGeneratorOnly}, seeds));
  }
  if (name == "oracle") return oracle_table(run_oracle_bounds(spec, config, seeds));
  fail(ErrorCode::kValidation, "unknown analysis '" + name + "'");
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    fail(ErrorCode::kValidation, "spearman needs two equal-length series of length >= 2");
  }
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const Stat sx = summarize(rx), sy = summarize(ry);
  if (sx.stddev == 0.0 || sy.stddev == 0.0) return 0.0;
  double cov = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) cov += (rx[i] - sx.mean) * (ry[i] - sy.mean);
  cov /= static_cast<double>(rx.size() - 1);
  return cov / (sx.stddev * sy.stddev);
}

}  // namespace sumrecom
