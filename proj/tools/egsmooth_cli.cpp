// egsmooth: index building, query inspection, dataset and QA evaluation over
// typed entailment graphs with vertex smoothing.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "egsmooth/egsmooth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a command may need. Precedence: flags > manifest > defaults.
struct RunManifest {
  std::string graph;
  std::string embeddings;
  std::string index;
  std::string lexdb;
  std::string dataset;
  std::string qa;
  std::string out = ".";
  std::string p_mode = "off";
  std::string h_mode = "off";
  std::size_t k_prem = 4;
  std::size_t k_hyp = 2;
  std::string trigger = "on-miss";
  std::string bands = "2,5,10,15";
  std::size_t leaf_size = 40;
  std::size_t threads = 0;
  std::uint64_t seed = 0;
  std::size_t sample_per_band = 0;
  std::string premise;
  std::string hypothesis;
};

struct Flags {
  std::string manifest;
  RunManifest values;
};

void init_logging() {
  auto logger = spdlog::stderr_color_mt("egsmooth");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("EGSMOOTH_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

template <typename T>
void take(const json& m, const char* key, T& dst) {
  if (m.contains(key)) dst = m.at(key).get<T>();
}

/// Merges defaults, then the manifest file, then every flag given explicitly.
RunManifest resolve(const CLI::App& cmd, const Flags& flags) {
  RunManifest r;
  if (!flags.manifest.empty()) {
    std::ifstream in(flags.manifest);
    if (!in) throw egsmooth::IoError("cannot open manifest " + flags.manifest);
    json m;
    try {
      m = json::parse(in);
    } catch (const json::exception& e) {
      throw egsmooth::ParseError(flags.manifest + ": " + e.what());
    }
    try {
      take(m, "graph", r.graph);
      take(m, "embeddings", r.embeddings);
      take(m, "index", r.index);
      take(m, "lexdb", r.lexdb);
      take(m, "dataset", r.dataset);
      take(m, "qa", r.qa);
      take(m, "out", r.out);
      take(m, "p_mode", r.p_mode);
      take(m, "h_mode", r.h_mode);
      take(m, "k_prem", r.k_prem);
      take(m, "k_hyp", r.k_hyp);
      take(m, "trigger", r.trigger);
      take(m, "bands", r.bands);
      take(m, "leaf_size", r.leaf_size);
      take(m, "threads", r.threads);
      take(m, "seed", r.seed);
      take(m, "sample_per_band", r.sample_per_band);
    } catch (const json::exception& e) {
      throw UsageError(flags.manifest + ": " + e.what());
    }
  }
  const auto& f = flags.values;
  auto set = [&](const char* name, auto& dst, const auto& src) {
    if (auto* opt = cmd.get_option_no_throw(name); opt != nullptr && opt->count() > 0) dst = src;
  };
  set("--graph", r.graph, f.graph);
  set("--embeddings", r.embeddings, f.embeddings);
  set("--index", r.index, f.index);
  set("--lexdb", r.lexdb, f.lexdb);
  set("--dataset", r.dataset, f.dataset);
  set("--qa", r.qa, f.qa);
  set("--out", r.out, f.out);
  set("--p-mode", r.p_mode, f.p_mode);
  set("--h-mode", r.h_mode, f.h_mode);
  set("--k-prem", r.k_prem, f.k_prem);
  set("--k-hyp", r.k_hyp, f.k_hyp);
  set("--trigger", r.trigger, f.trigger);
  set("--bands", r.bands, f.bands);
  set("--leaf-size", r.leaf_size, f.leaf_size);
  set("--threads", r.threads, f.threads);
  set("--seed", r.seed, f.seed);
  set("--sample-per-band", r.sample_per_band, f.sample_per_band);
  set("--premise", r.premise, f.premise);
  set("--hypothesis", r.hypothesis, f.hypothesis);
  return r;
}

egsmooth::SmoothingConfig smoothing_config(const RunManifest& m) {
  egsmooth::SmoothingConfig c;
  try {
    c.premise_mode = egsmooth::parse_smoothing_mode(m.p_mode);
    c.hypothesis_mode = egsmooth::parse_smoothing_mode(m.h_mode);
    c.trigger = egsmooth::parse_trigger(m.trigger);
    c.k_prem = m.k_prem;
    c.k_hyp = m.k_hyp;
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

void require(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string("missing required input: ") + what);
  if (!fs::exists(path)) throw egsmooth::IoError(std::string(what) + " not found: " + path);
}

bool uses(const egsmooth::SmoothingConfig& c, egsmooth::SmoothingMode mode) {
  return c.premise_mode == mode || c.hypothesis_mode == mode;
}

bool uses_lexical(const egsmooth::SmoothingConfig& c) {
  return uses(c, egsmooth::SmoothingMode::lex_hypernym) || uses(c, egsmooth::SmoothingMode::lex_hyponym);
}

/// Loaded inputs kept alive for the duration of a command.
struct Loaded {
  egsmooth::EntailmentGraph graph;
  std::optional<egsmooth::EmbeddingStore> embeddings;
  std::optional<egsmooth::IndexSet> indexes;
  std::optional<egsmooth::LexicalDB> lexdb;

  egsmooth::SmoothingResources resources() const {
    return {&graph, indexes ? &*indexes : nullptr, embeddings ? &*embeddings : nullptr, lexdb ? &*lexdb : nullptr};
  }
};

Loaded load_inputs(const RunManifest& m, const egsmooth::SmoothingConfig& config) {
  Loaded l;
  require(m.graph, "graph");
  l.graph = egsmooth::load_graph(m.graph);
  spdlog::info("graph: {} subgraphs, {} vertices, {} edges", l.graph.subgraphs().size(), l.graph.num_vertices(),
               l.graph.num_edges());
  if (uses(config, egsmooth::SmoothingMode::knn)) {
    require(m.embeddings, "embeddings");
    l.embeddings = egsmooth::load_embeddings(m.embeddings);
    if (!m.index.empty()) {
      require(m.index, "index bundle");
      l.indexes = egsmooth::load_index_bundle(m.index);
    } else {
      egsmooth::IndexSetReport report;
      l.indexes = egsmooth::build_indexes(l.graph, *l.embeddings, m.leaf_size, &report);
      if (report.missing_total() > 0 || !report.skipped.empty())
        spdlog::warn("{} graph vertices lack embeddings; {} subgraphs not indexed", report.missing_total(),
                     report.skipped.size());
    }
  }
  if (uses_lexical(config)) {
    require(m.lexdb, "lexdb");
    l.lexdb = egsmooth::load_lexdb(m.lexdb);
  }
  return l;
}

json config_json(const egsmooth::SmoothingConfig& c) {
  return {{"p_mode", egsmooth::to_string(c.premise_mode)},
          {"h_mode", egsmooth::to_string(c.hypothesis_mode)},
          {"k_prem", c.k_prem},
          {"k_hyp", c.k_hyp},
          {"trigger", egsmooth::to_string(c.trigger)}};
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  return std::to_string(std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count());
}

fs::path output_dir(const RunManifest& m) {
  fs::path dir(m.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw egsmooth::IoError("cannot create output directory " + m.out + ": " + ec.message());
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw egsmooth::IoError("cannot write " + path.string());
  out << content;
}

int cmd_index(const RunManifest& m) {
  require(m.graph, "graph");
  require(m.embeddings, "embeddings");
  const auto graph = egsmooth::load_graph(m.graph);
  const auto store = egsmooth::load_embeddings(m.embeddings);
  egsmooth::IndexSetReport report;
  const auto indexes = egsmooth::build_indexes(graph, store, m.leaf_size, &report);
  const auto dir = output_dir(m);
  egsmooth::save_index_bundle(indexes, (dir / "index.egix").string());

  json rep;
  rep["indexes"] = json::array();
  for (const auto& [sig, idx] : indexes.all()) {
    json missing = json::array();
    if (auto it = report.missing.find(sig); it != report.missing.end())
      for (const auto& p : it->second) missing.push_back(p.str());
    rep["indexes"].push_back({{"signature", sig.str()}, {"size", idx.size()}, {"missing", missing}});
  }
  rep["skipped_subgraphs"] = json::array();
  for (const auto& sig : report.skipped) rep["skipped_subgraphs"].push_back(sig.str());
  rep["missing_total"] = report.missing_total();
  rep["dim"] = store.dim();
  rep["leaf_size"] = m.leaf_size;
  write_file(dir / "index_report.json", rep.dump(2) + "\n");

  for (const auto& [sig, missing] : report.missing)
    spdlog::warn("{}: {} vertices without vectors excluded", sig.str(), missing.size());
  for (const auto& sig : report.skipped) spdlog::warn("{}: no embedded vertices, not indexed", sig.str());
  std::cout << "indexed " << indexes.size() << " subgraphs (" << report.missing_total()
            << " vertices without vectors) -> " << (dir / "index.egix").string() << "\n";
  return kExitOk;
}

int cmd_eval(const RunManifest& m) {
  const auto config = smoothing_config(m);
  require(m.dataset, "dataset");
  const auto loaded = load_inputs(m, config);
  const auto dataset = egsmooth::load_dataset(m.dataset);
  const auto scored = egsmooth::score_dataset(dataset, loaded.resources(), config, m.threads);
  const auto labels = egsmooth::to_scored_labels(scored);
  const auto metrics = egsmooth::compute_metrics(labels);

  const auto dir = output_dir(m);
  json out = egsmooth::to_json(metrics);
  out["config"] = config_json(config);
  out["timestamp"] = timestamp();
  write_file(dir / "metrics.json", out.dump(2) + "\n");
  {
    std::ofstream csv(dir / "pr_curve.csv");
    egsmooth::write_curve_csv(metrics.curve, csv);
  }
  {
    std::ofstream tsv(dir / "scores.tsv");
    tsv << "premise\thypothesis\tlabel\tscore\texplanation\n";
    for (const auto& s : scored)
      tsv << s.example->premise.str() << '\t' << s.example->hypothesis.str() << '\t'
          << (s.example->label ? "True" : "False") << '\t' << json(s.verdict.score).dump() << '\t'
          << s.verdict.explanation << '\n';
  }
  std::cout << "AUC_n " << 100.0 * metrics.auc_norm << "%  AP " << 100.0 * metrics.average_precision
            << "%  max recall " << 100.0 * metrics.max_recall << "%  (" << metrics.n_examples << " examples)\n";
  return kExitOk;
}

std::vector<egsmooth::QAExample> sample_per_band(std::vector<egsmooth::QAExample> examples,
                                                 const std::vector<egsmooth::ContextBand>& bands, std::size_t n,
                                                 std::uint64_t seed) {
  const auto part = egsmooth::band_partition(examples, bands);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> keep;
  for (auto members : part.members) {
    // Fisher-Yates prefix of length n, reproducible for a given seed.
    for (std::size_t i = 0; i < members.size() && i < n; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, members.size() - 1);
      std::swap(members[i], members[pick(rng)]);
    }
    members.resize(std::min(n, members.size()));
    keep.insert(keep.end(), members.begin(), members.end());
  }
  std::sort(keep.begin(), keep.end());
  std::vector<egsmooth::QAExample> out;
  for (auto i : keep) out.push_back(std::move(examples[i]));
  return out;
}

int cmd_qa(const RunManifest& m) {
  const auto config = smoothing_config(m);
  require(m.qa, "qa");
  std::vector<egsmooth::ContextBand> bands;
  try {
    bands = egsmooth::parse_bands(m.bands);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto loaded = load_inputs(m, config);
  auto examples = egsmooth::load_qa(m.qa);
  if (m.sample_per_band > 0) examples = sample_per_band(std::move(examples), bands, m.sample_per_band, m.seed);
  const auto part = egsmooth::band_partition(examples, bands);
  if (!part.dropped.empty())
    spdlog::info("{} questions outside all bands dropped", part.dropped.size());
  const auto report = egsmooth::band_metrics(part, examples, loaded.resources(), config, m.threads);

  const auto dir = output_dir(m);
  json out = egsmooth::to_json(report);
  out["config"] = config_json(config);
  out["timestamp"] = timestamp();
  write_file(dir / "qa_bands.json", out.dump(2) + "\n");
  {
    std::ofstream csv(dir / "qa_bands.csv");
    egsmooth::write_band_csv(report, csv);
  }
  for (const auto& b : report.bands) {
    std::cout << b.band.label() << "  n=" << b.n_questions << "  AUC_n ";
    if (b.auc_norm)
      std::cout << 100.0 * *b.auc_norm << "%";
    else
      std::cout << "undefined";
    std::cout << "  miss rate " << 100.0 * b.miss_rate << "%\n";
  }
  return kExitOk;
}

void print_candidates(const char* title, const std::vector<egsmooth::Candidate>& cands) {
  std::cout << title << ":\n";
  if (cands.empty()) std::cout << "  (none)\n";
  for (const auto& c : cands) {
    std::cout << "  " << c.predicate.str() << "  [";
    switch (c.provenance.kind) {
      case egsmooth::Provenance::Kind::direct: std::cout << "direct"; break;
      case egsmooth::Provenance::Kind::knn: std::cout << "knn d=" << c.provenance.distance; break;
      case egsmooth::Provenance::Kind::lexical:
        std::cout << egsmooth::to_string(c.provenance.relation) << " of " << c.provenance.source_word;
        break;
    }
    std::cout << "]\n";
  }
}

int cmd_explain(const RunManifest& m) {
  const auto config = smoothing_config(m);
  if (m.premise.empty() || m.hypothesis.empty()) throw UsageError("explain needs --premise and --hypothesis");
  const auto p = egsmooth::Predicate::parse(m.premise);
  const auto h = egsmooth::Predicate::parse(m.hypothesis);
  const auto loaded = load_inputs(m, config);
  const auto verdict = egsmooth::score_query(p, h, loaded.resources(), config);
  std::cout << "premise:    " << p.str() << (loaded.graph.contains_predicate(p) ? "" : "  (missing from graph)")
            << "\n";
  std::cout << "hypothesis: " << h.str() << (loaded.graph.contains_predicate(h) ? "" : "  (missing from graph)")
            << "\n";
  print_candidates("premise candidates", verdict.query.premise_candidates);
  print_candidates("hypothesis candidates", verdict.query.hypothesis_candidates);
  std::cout << "chain: " << verdict.explanation << "\n";
  std::cout << "score: " << verdict.score << "\n";
  return kExitOk;
}

int cmd_lexdb_import(const std::string& index_path, const std::string& data_path, const std::string& out_path) {
  std::ifstream index(index_path), data(data_path);
  if (!index) throw egsmooth::IoError("cannot open " + index_path);
  if (!data) throw egsmooth::IoError("cannot open " + data_path);
  const auto db = egsmooth::wordnet::import(index, data);
  std::ofstream out(out_path);
  if (!out) throw egsmooth::IoError("cannot write " + out_path);
  egsmooth::write_lexdb(db, out);
  std::cout << "wrote " << db.size() << " lexical entries -> " << out_path << "\n";
  return kExitOk;
}

void add_resource_flags(CLI::App* cmd, Flags& f, bool with_dataset, bool with_qa) {
  auto& v = f.values;
  cmd->add_option("--manifest", f.manifest, "JSON run manifest; flags override its values");
  cmd->add_option("--graph", v.graph, "entailment graph (JSON lines)");
  cmd->add_option("--embeddings", v.embeddings, "EGEM embedding file (graph and query predicates)");
  cmd->add_option("--index", v.index, "prebuilt index bundle from `egsmooth index`");
  cmd->add_option("--lexdb", v.lexdb, "lexical database (JSON lines)");
  if (with_dataset) cmd->add_option("--dataset", v.dataset, "entailment dataset (TSV)");
  if (with_qa) {
    cmd->add_option("--qa", v.qa, "boolean QA questions (JSON lines)");
    cmd->add_option("--bands", v.bands, "context-size band edges, e.g. 2,5,10,15");
    cmd->add_option("--sample-per-band", v.sample_per_band, "sample at most N questions per band (0 = all)");
  }
  cmd->add_option("--p-mode", v.p_mode, "premise smoothing")->check(CLI::IsMember({"off", "knn", "hypernym", "hyponym"}));
  cmd->add_option("--h-mode", v.h_mode, "hypothesis smoothing")
      ->check(CLI::IsMember({"off", "knn", "hypernym", "hyponym"}));
  cmd->add_option("--k-prem", v.k_prem, "neighbours per missing premise")->check(CLI::PositiveNumber);
  cmd->add_option("--k-hyp", v.k_hyp, "neighbours per missing hypothesis")->check(CLI::PositiveNumber);
  cmd->add_option("--trigger", v.trigger, "when to smooth")->check(CLI::IsMember({"on-miss", "always"}));
  cmd->add_option("--leaf-size", v.leaf_size, "ball tree leaf size")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", v.threads, "worker threads (0 = all cores)");
  cmd->add_option("--seed", v.seed, "seed for sampling utilities");
  cmd->add_option("--out", v.out, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();
  CLI::App app{"Directional entailment over typed entailment graphs with vertex smoothing"};
  app.require_subcommand(1);

  Flags flags;
  auto* index = app.add_subcommand("index", "precompute KNN indexes for every typed subgraph");
  index->add_option("--manifest", flags.manifest, "JSON run manifest");
  index->add_option("--graph", flags.values.graph, "entailment graph (JSON lines)");
  index->add_option("--embeddings", flags.values.embeddings, "EGEM embedding file");
  index->add_option("--leaf-size", flags.values.leaf_size, "ball tree leaf size")->check(CLI::PositiveNumber);
  index->add_option("--out", flags.values.out, "output directory");

  auto* eval = app.add_subcommand("eval", "score a directional entailment dataset");
  add_resource_flags(eval, flags, true, false);

  auto* qa = app.add_subcommand("qa", "boolean QA evaluation by context-size band");
  add_resource_flags(qa, flags, false, true);

  auto* explain = app.add_subcommand("explain", "show candidates and the witness chain for one query");
  add_resource_flags(explain, flags, false, false);
  explain->add_option("--premise", flags.values.premise, "premise relation")->required();
  explain->add_option("--hypothesis", flags.values.hypothesis, "hypothesis relation")->required();

  std::string wn_index, wn_data, wn_out;
  auto* lex = app.add_subcommand("lexdb-import", "convert WordNet index/data files to the lexical database format");
  lex->add_option("--wn-index", wn_index, "WordNet index.<pos> file")->required();
  lex->add_option("--wn-data", wn_data, "WordNet data.<pos> file")->required();
  lex->add_option("--out", wn_out, "output JSON-lines file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*index) return cmd_index(resolve(*index, flags));
    if (*eval) return cmd_eval(resolve(*eval, flags));
    if (*qa) return cmd_qa(resolve(*qa, flags));
    if (*explain) return cmd_explain(resolve(*explain, flags));
    if (*lex) return cmd_lexdb_import(wn_index, wn_data, wn_out);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const egsmooth::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
