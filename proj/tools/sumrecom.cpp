// Command-line front door: ingest, simulate, evaluate, ablate, serve.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sumrecom/analysis.hpp"
#include "sumrecom/config.hpp"
#include "sumrecom/error.hpp"
#include "sumrecom/pipeline.hpp"
#include "sumrecom/server.hpp"
#include "sumrecom/session.hpp"
#include "sumrecom/simuser.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sumrecom;

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> unit;
  std::optional<int> budget;
  std::optional<int> length_limit;
  std::optional<std::string> strategy;
  std::optional<std::string> reward_mode;
  std::optional<int> reward_budget;
  std::optional<int> seeds;
  std::optional<double> noise;
  std::optional<std::string> variant;

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Global random seed");
    app.add_option("--unit", unit, "Concept unit: unigram, bigram or sentence");
    app.add_option("--budget", budget, "Concept query budget");
    app.add_option("--length", length_limit, "Summary length limit L in tokens");
    app.add_option("--strategy", strategy, "Query strategy");
    app.add_option("--reward-mode", reward_mode, "Reward learning mode: point or pairwise");
    app.add_option("--reward-budget", reward_budget, "Number of expert judgments");
    app.add_option("--seeds", seeds, "Number of seeds for analyses");
    app.add_option("--noise", noise, "Simulated user label-flip probability");
  }

  // defaults < config file < flags
  RunConfig resolve() const {
    RunConfig c;
    if (!config_path.empty()) c = load_config(config_path, c);
    json j = json::object();
    if (seed) j["seed"] = *seed;
    if (unit) j["unit"] = *unit;
    if (budget) j["budget"] = *budget;
    if (length_limit) j["length_limit"] = *length_limit;
    if (strategy) j["strategy"] = *strategy;
    if (reward_mode) j["reward_mode"] = *reward_mode;
    if (reward_budget) j["reward_budget"] = *reward_budget;
    if (seeds) j["seeds"] = *seeds;
    if (noise) j["noise"] = *noise;
    if (variant) j["variant"] = *variant;
    c = merge_config(c, j);
    c.validate();
    return c;
  }
};

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), {}};
}

SyntheticSpec load_spec(const std::string& path) {
  return path.empty() ? SyntheticSpec{} : parse_synthetic_spec(read_file(path));
}

int cmd_ingest(const std::string& path, const Overrides& o, const fs::path& out_dir) {
  const RunConfig config = o.resolve();
  const ClusterInput input = read_cluster_input(path);
  const DocumentCluster cluster = featurize_concepts(build_cluster(input, config.unit));
  json out = to_json(input);
  out["unit"] = to_string(config.unit);
  out["sentences"] = cluster.sentences.size();
  out["concepts"] = cluster.concepts.size();
  out["candidate_pairs"] = count_candidate_pairs(cluster);
  out["config"] = to_json(config);
  write_file(out_dir / "cluster.json", out.dump(2) + "\n");
  std::cout << "wrote " << (out_dir / "cluster.json").string() << " (" << cluster.sentences.size()
            << " sentences, " << cluster.concepts.size() << " concepts)\n";
  return 0;
}

int cmd_simulate(const std::string& cluster_path, const std::string& spec_path,
                 const Overrides& o, const fs::path& out_dir) {
  const RunConfig config = o.resolve();
  SimulationResult result;
  if (!cluster_path.empty()) {
    const ClusterInput input = read_cluster_input(cluster_path);
    result = run_simulation(input, std::nullopt, config, reference_user(config.noise, config.seed));
  } else {
    const SyntheticSpec spec = load_spec(spec_path);
    const auto raw = generate_synthetic_input(spec, config.seed);
    result = run_simulation(raw.input, raw.embeddings, config,
                            planted_user(raw, spec, config.noise, config.seed));
  }
  json summary = result.final_json;
  summary["config"] = to_json(config);
  write_file(out_dir / "summary.json", summary.dump(2) + "\n");
  write_file(out_dir / "metrics.json", metrics_json(result, config).dump(2) + "\n");
  std::string log;
  for (const auto& e : result.log) log += to_json(e).dump() + "\n";
  write_file(out_dir / "session.jsonl", log);
  std::cout << "rouge1=" << format_number(result.rouge1) << " rouge2=" << format_number(result.rouge2)
            << " ground_truth=" << format_number(result.ground_truth) << "\n";
  return 0;
}

void write_table(const fs::path& out_dir, const std::string& name, const Table& table,
                 const RunConfig& config, const std::string& spec_json) {
  write_file(out_dir / (name + ".csv"), table.csv());
  json echo{{"analysis", name}, {"config", to_json(config)}, {"generator", json::parse(spec_json)}};
  write_file(out_dir / (name + ".config.json"), echo.dump(2) + "\n");
  std::cout << table.csv();
}

int cmd_evaluate(const std::string& analysis, const std::string& spec_path, const Overrides& o,
                 const fs::path& out_dir) {
  const RunConfig config = o.resolve();
  const SyntheticSpec spec = load_spec(spec_path);
  write_table(out_dir, analysis, run_named_analysis(analysis, spec, config), config,
              synthetic_spec_json(spec));
  return 0;
}

int cmd_ablate(const std::string& variant, const std::string& spec_path, const Overrides& o,
               const fs::path& out_dir) {
  const RunConfig config = o.resolve();
  const SyntheticSpec spec = load_spec(spec_path);
  std::vector<Variant> variants;
  if (variant == "all") {
    variants = {Variant::kFull, Variant::kNoActive, Variant::kNoPreference, Variant::kGeneratorOnly};
  } else {
    variants = {parse_variant(variant)};
  }
  const auto rows = run_ablation(spec, config, variants, seed_range(config.seed, config.seeds));
  write_table(out_dir, "ablation", ablation_table(rows), config, synthetic_spec_json(spec));
  return 0;
}

ApiServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_serve(std::string host, int port, std::string data_dir) {
  if (const char* env = std::getenv("SUMRECOM_DATA_DIR"); env && data_dir.empty()) data_dir = env;
  if (const char* env = std::getenv("SUMRECOM_BIND"); env && host.empty()) host = env;
  if (host.empty()) host = "127.0.0.1";
  SessionStore store(data_dir);
  ApiServer server(store);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "listening on " << host << ":" << port
            << (data_dir.empty() ? " (in-memory)" : " data=" + data_dir) << std::endl;
  if (!server.listen(host, port)) {
    std::cerr << "error: cannot bind " << host << ":" << port << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interactive preference-driven multi-document summarization"};
  app.require_subcommand(1);
  std::string out = "out";

  Overrides ingest_o, sim_o, eval_o, ablate_o;

  auto* ingest = app.add_subcommand("ingest", "Normalize a document cluster to JSON");
  std::string ingest_path;
  ingest->add_option("path", ingest_path, "Cluster directory or JSON file")->required();
  ingest->add_option("--out", out, "Output directory");
  ingest_o.attach(*ingest);

  auto* simulate = app.add_subcommand("simulate", "Run a seeded simulated session offline");
  std::string sim_cluster, sim_spec;
  simulate->add_option("--cluster", sim_cluster, "Cluster directory or JSON with references");
  simulate->add_option("--synthetic", sim_spec, "Synthetic generator spec (JSON)");
  simulate->add_option("--variant", sim_o.variant, "full, AC, PR or GE");
  simulate->add_option("--out", out, "Output directory");
  sim_o.attach(*simulate);

  auto* evaluate = app.add_subcommand("evaluate", "Run an analysis over seeded synthetic clusters");
  std::string analysis, eval_spec;
  evaluate->add_option("--analysis", analysis, "budget, strategy, unit, feature, ablation or oracle")
      ->required();
  evaluate->add_option("--synthetic", eval_spec, "Synthetic generator spec (JSON)");
  evaluate->add_option("--out", out, "Output directory");
  eval_o.attach(*evaluate);

  auto* ablate = app.add_subcommand("ablate", "Compare the pipeline against its ablations");
  std::string variant = "all", ablate_spec;
  ablate->add_option("--variant", variant, "full, AC, PR, GE or all");
  ablate->add_option("--synthetic", ablate_spec, "Synthetic generator spec (JSON)");
  ablate->add_option("--out", out, "Output directory");
  ablate_o.attach(*ablate);

  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  std::string host, data_dir;
  int port = 8080;
  serve->add_option("--host", host, "Bind address (env SUMRECOM_BIND)");
  serve->add_option("--port", port, "Port");
  serve->add_option("--data-dir", data_dir, "Session storage directory (env SUMRECOM_DATA_DIR)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*ingest) return cmd_ingest(ingest_path, ingest_o, out);
    if (*simulate) return cmd_simulate(sim_cluster, sim_spec, sim_o, out);
    if (*evaluate) return cmd_evaluate(analysis, eval_spec, eval_o, out);
    if (*ablate) return cmd_ablate(variant, ablate_spec, ablate_o, out);
    if (*serve) return cmd_serve(host, port, data_dir);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
