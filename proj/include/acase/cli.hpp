#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "acase/corpus.hpp"
#include "acase/embeddings.hpp"
#include "acase/explain.hpp"
#include "acase/nn/checkpoint.hpp"
#include "acase/quality.hpp"
#include "acase/split.hpp"
#include "acase/synth.hpp"
#include "acase/tasks/report.hpp"

// Command-line front end. Exit codes: 0 success, 1 usage error, 2 data error.
namespace acase::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

inline constexpr const char* kSynopsis =
    "usage: acase <command> [options]\n"
    "commands:\n"
    "  stats      per-group graph statistics\n"
    "  quality    node/edge quality of LLM graphs against human counterparts\n"
    "  train-link link prediction across provenance scenarios\n"
    "  train-clf  human vs LLM graph classification\n"
    "  explain    masks, fidelity, GEF and node importance for a classifier\n"
    "  synth      write a synthetic corpus\n"
    "  convert    convert external graph JSON into the corpus format\n"
    "run 'acase <command> --help' for options\n";

// Raised for bad flag values discovered after parsing; maps to exit code 1.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct FeatureOptions {
  std::string corpus;
  std::string embeddings;
  std::size_t hash_dim = 256;
  std::uint64_t hash_seed = 0;
  bool fallback_hash = false;

  ojson to_json() const {
    return {{"corpus", corpus},       {"embeddings", embeddings},       {"hash_dim", hash_dim},
            {"hash_seed", hash_seed}, {"fallback_hash", fallback_hash}};
  }
};

inline void add_feature_options(CLI::App* cmd, FeatureOptions& o) {
  cmd->add_option("--corpus", o.corpus, "corpus JSON file")->required();
  cmd->add_option("--embeddings", o.embeddings, "ACEV embedding file (hashed features when omitted)");
  cmd->add_option("--hash-dim", o.hash_dim, "hashed feature dimension")->check(CLI::PositiveNumber);
  cmd->add_option("--hash-seed", o.hash_seed, "hashed feature seed");
  cmd->add_flag("--fallback-hash", o.fallback_hash, "hash nodes missing from the embedding file");
}

inline Corpus load_featured_corpus(const FeatureOptions& o) {
  Corpus c = load_corpus(o.corpus);
  if (o.embeddings.empty()) return attach_hashed(std::move(c), o.hash_dim, o.hash_seed);
  return attach_embeddings(std::move(c), load_embeddings(o.embeddings),
                           o.fallback_hash ? AttachPolicy::FallbackHash : AttachPolicy::Strict, o.hash_seed);
}

inline std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string item;
  try {
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      const auto dash = item.find('-');
      if (dash == std::string::npos) {
        out.push_back(std::stoull(item));
      } else {
        const auto lo = std::stoull(item.substr(0, dash)), hi = std::stoull(item.substr(dash + 1));
        if (hi < lo) throw UsageError("bad seed range '" + item + "'");
        for (auto v = lo; v <= hi; ++v) out.push_back(v);
      }
    }
  } catch (const std::logic_error&) {
    throw UsageError("bad seed list '" + s + "'");
  }
  if (out.empty()) throw UsageError("no seeds given");
  return out;
}

inline SplitRatios parse_ratios(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  try {
    while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
  } catch (const std::logic_error&) {
    throw UsageError("bad ratios '" + s + "'");
  }
  if (v.size() != 3 || v[0] < 0 || v[1] < 0 || v[2] <= 0 || v[0] + v[1] + v[2] <= 0)
    throw UsageError("ratios must be three non-negative numbers with a positive test share");
  return {v[0], v[1], v[2]};
}

inline void write_text(const fs::path& p, const std::string& s) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  out << s;
}

inline void write_json(const fs::path& p, const ojson& j) { write_text(p, j.dump(2) + "\n"); }

// run_config.json is the reproducibility record; run_info.json holds the
// wall-clock facts that must stay out of results.json.
inline void write_run_files(const fs::path& dir, const ojson& config, std::chrono::steady_clock::time_point start) {
  write_json(dir / "run_config.json", config);
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_json(dir / "run_info.json", ojson{{"finished_utc", stamp}, {"seconds", secs}});
}

// ---------------------------------------------------------------------------
// stats

struct StatsRow {
  std::string group;
  std::size_t graphs = 0;
  double nodes = 0, edges = 0, density = 0, in_deg = 0, out_deg = 0, homophily = 0, words = 0, chars = 0;
};

// Unweighted per-graph means within each group, groups in key order.
inline std::vector<StatsRow> stats_rows(const Corpus& c, const std::map<std::string, std::string>& group_of) {
  std::map<std::string, StatsRow> acc;
  for (const auto& g : c.graphs) {
    const auto it = group_of.find(g.graph_id);
    if (it == group_of.end()) continue;
    const GraphStats s = compute_stats(g);
    StatsRow& r = acc[it->second];
    r.group = it->second;
    ++r.graphs;
    r.nodes += static_cast<double>(s.num_nodes);
    r.edges += static_cast<double>(s.num_edges);
    r.density += s.density;
    r.in_deg += s.avg_in_deg;
    r.out_deg += s.avg_out_deg;
    r.homophily += s.edge_homophily;
    r.words += s.avg_words;
    r.chars += s.avg_chars;
  }
  std::vector<StatsRow> rows;
  for (auto& [_, r] : acc) {
    const double n = static_cast<double>(r.graphs);
    for (double* x : {&r.nodes, &r.edges, &r.density, &r.in_deg, &r.out_deg, &r.homophily, &r.words, &r.chars})
      *x /= n;
    rows.push_back(r);
  }
  return rows;
}

inline int cmd_stats(const FeatureOptions& fo, const std::string& scenario, std::uint64_t split_seed,
                     const std::string& ratios, const std::string& out_dir, std::ostream& out) {
  const Corpus c = load_corpus(fo.corpus);
  std::map<std::string, std::string> group_of;
  if (scenario.empty()) {
    for (const auto& g : c.graphs)
      group_of[g.graph_id] = (g.source_tag.empty() ? std::string("-") : g.source_tag) + "/" + to_string(g.provenance);
  } else {
    const auto split = make_split(c, parse_scenario(scenario), split_seed, parse_ratios(ratios));
    const auto tag = [&](const std::string& id) {
      const auto p = c.at(id).provenance;
      return p == Provenance::Human ? std::string("H") : p == Provenance::LLM ? std::string("M") : std::string("U");
    };
    for (const auto& id : split.train) group_of[id] = "1 Train " + tag(id);
    for (const auto& id : split.val) group_of[id] = "2 Val " + tag(id);
    for (const auto& id : split.test) group_of[id] = "3 Test " + tag(id);
  }
  const auto rows = stats_rows(c, group_of);

  std::ostringstream table;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-24s %7s %8s %8s %8s %8s %8s %10s %8s %9s\n", "Group", "Graphs", "Nodes", "Edges",
                "Density", "In-deg", "Out-deg", "Homophily", "Words", "Chars");
  table << buf << std::string(106, '-') << '\n';
  ojson jrows = ojson::array();
  for (const auto& r : rows) {
    // split groups carry a sort prefix ("1 ", "2 ", "3 ") that is not shown
    const std::string name = scenario.empty() ? r.group : r.group.substr(2);
    std::snprintf(buf, sizeof buf, "%-24s %7zu %8.2f %8.2f %8.2f %8.2f %8.2f %10.2f %8.2f %9.2f\n", name.c_str(),
                  r.graphs, r.nodes, r.edges, r.density, r.in_deg, r.out_deg, r.homophily, r.words, r.chars);
    table << buf;
    jrows.push_back({{"group", name},
                     {"graphs", r.graphs},
                     {"avg_nodes", r.nodes},
                     {"avg_edges", r.edges},
                     {"density", r.density},
                     {"avg_in_deg", r.in_deg},
                     {"avg_out_deg", r.out_deg},
                     {"edge_homophily", r.homophily},
                     {"avg_words", r.words},
                     {"avg_chars", r.chars}});
  }
  out << table.str();
  if (!out_dir.empty()) {
    const auto start = std::chrono::steady_clock::now();
    write_json(fs::path(out_dir) / "results.json", ojson{{"task", "stats"}, {"rows", jrows}});
    write_text(fs::path(out_dir) / "tables" / "stats.txt", table.str());
    write_run_files(out_dir,
                    ojson{{"command", "stats"},
                          {"corpus", fo.corpus},
                          {"scenario", scenario},
                          {"split_seed", split_seed},
                          {"ratios", ratios}},
                    start);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// quality

inline std::vector<std::pair<const AssuranceGraph*, const AssuranceGraph*>> counterpart_pairs(const Corpus& c) {
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<std::pair<const AssuranceGraph*, const AssuranceGraph*>> out;
  for (const auto& g : c.graphs) {
    if (g.counterpart.empty()) continue;
    const AssuranceGraph* other = c.find(g.counterpart);
    if (!other) throw ValidationError("graph '" + g.graph_id + "' names unknown counterpart '" + g.counterpart + "'");
    const AssuranceGraph* h = g.provenance == Provenance::Human ? &g : other;
    const AssuranceGraph* l = g.provenance == Provenance::Human ? other : &g;
    if (h->provenance != Provenance::Human || l->provenance != Provenance::LLM)
      throw ValidationError("counterpart pair '" + g.graph_id + "'/'" + g.counterpart + "' is not human/LLM");
    if (seen.emplace(h->graph_id, l->graph_id).second) out.emplace_back(h, l);
  }
  return out;
}

inline std::string quality_table(const quality::QualityReport& rep) {
  std::ostringstream os;
  char buf[200];
  std::snprintf(buf, sizeof buf, "matching: optimal one-to-one, similarity (cos+1)/2 >= tau = %.3f\n", rep.tau);
  os << buf;
  std::snprintf(buf, sizeof buf, "%-20s %6s %8s %9s %10s %9s %8s\n", "Source", "Pairs", "Cosine", "Node-Rec",
                "Edge-Prec", "Edge-Rec", "Edge-F1");
  os << buf << std::string(76, '-') << '\n';
  for (const auto& r : rep.rows) {
    std::snprintf(buf, sizeof buf, "%-20s %6zu %8.3f %9.3f %10.3f %9.3f %8.3f\n",
                  (r.source_tag.empty() ? "-" : r.source_tag.c_str()), r.num_pairs, r.cosine, r.node_recall,
                  r.edge_prec, r.edge_rec, r.edge_f1);
    os << buf;
  }
  return os.str();
}

inline ojson quality_json(const quality::QualityReport& rep) {
  ojson rows = ojson::array(), pairs = ojson::array();
  for (const auto& r : rep.rows)
    rows.push_back({{"source_tag", r.source_tag},
                    {"pairs", r.num_pairs},
                    {"cosine", r.cosine},
                    {"node_recall", r.node_recall},
                    {"edge_prec", r.edge_prec},
                    {"edge_rec", r.edge_rec},
                    {"edge_f1", r.edge_f1}});
  for (const auto& p : rep.pairs)
    pairs.push_back({{"human", p.human_id},
                     {"llm", p.llm_id},
                     {"cosine", p.cosine},
                     {"node_recall", p.node_recall},
                     {"edge_prec", p.edges.precision},
                     {"edge_rec", p.edges.recall},
                     {"edge_f1", p.edges.f1}});
  return {{"task", "quality"},
          {"tau", rep.tau},
          {"matching", "optimal one-to-one assignment over pairs with (cos+1)/2 >= tau; exact text scores 1"},
          {"cosine", "mean raw cosine over matched node pairs"},
          {"rows", rows},
          {"pairs", pairs}};
}

inline int cmd_quality(const FeatureOptions& fo, double tau, bool self, const std::string& out_dir,
                       std::ostream& out) {
  if (tau < 0.0 || tau > 1.0) throw UsageError("--tau must lie in [0, 1]");
  const auto start = std::chrono::steady_clock::now();
  const Corpus c = load_featured_corpus(fo);
  std::vector<std::pair<const AssuranceGraph*, const AssuranceGraph*>> pairs;
  if (self) {
    for (const auto& g : c.graphs) pairs.emplace_back(&g, &g);
  } else {
    pairs = counterpart_pairs(c);
  }
  if (pairs.empty()) throw InsufficientData("no human/LLM counterpart pairs in corpus (use --self for identity)");
  auto rep = quality::corpus_quality_report(pairs, tau);
  if (self)  // group identity runs by the graph's own tag
    for (auto& r : rep.rows) r.source_tag = r.source_tag.empty() ? "self" : r.source_tag + " (self)";
  const std::string table = quality_table(rep);
  out << table;
  if (!out_dir.empty()) {
    write_json(fs::path(out_dir) / "results.json", quality_json(rep));
    write_text(fs::path(out_dir) / "tables" / "quality.txt", table);
    auto cfg = fo.to_json();
    cfg["command"] = "quality";
    cfg["tau"] = tau;
    cfg["self"] = self;
    write_run_files(out_dir, cfg, start);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// train-link / train-clf / explain

struct TrainOptions {
  std::string scenario;
  std::string arch = "sage";
  int layers = 1;
  int hidden = 256;
  int epochs = 200;
  double lr = 1e-5;
  double weight_decay = 0.01;
  std::string seeds = "1";
  std::uint64_t split_seed = 0;
  std::string ratios = "0.6,0.2,0.2";
  bool shuffle_labels = false;
  bool no_checkpoints = false;

  ojson to_json() const {
    return {{"scenario", scenario},         {"arch", arch},
            {"layers", layers},             {"hidden", hidden},
            {"epochs", epochs},             {"lr", lr},
            {"weight_decay", weight_decay}, {"seeds", seeds},
            {"split_seed", split_seed},     {"ratios", ratios},
            {"shuffle_labels", shuffle_labels}};
  }

  nn::ModelConfig model_config() const {
    nn::ModelConfig c;
    c.arch = nn::parse_arch(arch);
    c.num_layers = layers;
    c.hidden = hidden;
    return c;
  }

  tasks::TrainParams params() const {
    if (epochs < 0) throw UsageError("--epochs must be >= 0");
    if (!(lr > 0.0)) throw UsageError("--lr must be positive");
    tasks::TrainParams p;
    p.epochs = epochs;
    p.lr = lr;
    p.weight_decay = weight_decay;
    p.shuffle_labels = shuffle_labels;
    return p;
  }
};

enum class TrainCommand { Link, Classify, Explain };

inline void add_train_options(CLI::App* cmd, TrainOptions& o, TrainCommand kind) {
  const bool link = kind == TrainCommand::Link;
  cmd->add_option("--scenario", o.scenario, link ? "hh|mh|mix (default hh)" : "split scenario (default custom)");
  cmd->add_option("--arch", o.arch, "gcn|sage|gat");
  cmd->add_option("--layers", o.layers, "GNN layers")->check(CLI::PositiveNumber);
  cmd->add_option("--hidden", o.hidden, "hidden size")->check(CLI::PositiveNumber);
  cmd->add_option("--epochs", o.epochs, "training epochs");
  cmd->add_option("--lr", o.lr, "Adam learning rate");
  cmd->add_option("--weight-decay", o.weight_decay, "decoupled weight decay");
  cmd->add_option("--seeds", o.seeds, "comma list or ranges, e.g. 1,2,3 or 1-5");
  cmd->add_option("--split-seed", o.split_seed, "seed of the train/val/test split");
  cmd->add_option("--ratios", o.ratios, "train,val,test shares");
  if (kind == TrainCommand::Explain) return;
  if (!link) cmd->add_flag("--shuffle-labels", o.shuffle_labels, "permutation control: shuffle provenance labels");
  cmd->add_flag("--no-checkpoints", o.no_checkpoints, "do not write model checkpoints");
}

inline int cmd_train(tasks::Task task, const FeatureOptions& fo, TrainOptions to, const std::string& out_dir,
                     std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  if (to.scenario.empty()) to.scenario = task == tasks::Task::Link ? "hh" : "custom";
  const Scenario scenario = parse_scenario(to.scenario);
  const auto config = to.model_config();
  const auto hp = to.params();
  const auto seeds = parse_seeds(to.seeds);
  const auto ratios = parse_ratios(to.ratios);
  const Corpus c = load_featured_corpus(fo);

  std::vector<nn::ModelState> models;
  const auto report = tasks::run_scenario(c, task, scenario, config, hp, seeds, to.split_seed, ratios, &models);
  const std::string table = tasks::format_table({report});
  out << table;

  const fs::path dir(out_dir);
  write_json(dir / "results.json", tasks::to_json(report));
  write_text(dir / "tables" / (task == tasks::Task::Link ? "link.txt" : "classification.txt"), table);
  if (!to.no_checkpoints) {
    fs::create_directories(dir / "checkpoints");
    for (std::size_t k = 0; k < models.size(); ++k)
      nn::save_checkpoint(models[k], dir / "checkpoints" / ("seed-" + std::to_string(seeds[k]) + ".acpt"));
  }
  auto cfg = fo.to_json();
  cfg["command"] = task == tasks::Task::Link ? "train-link" : "train-clf";
  cfg.update(to.to_json());
  cfg["scenario"] = to.scenario;
  cfg["negatives"] = "train: resampled every epoch; val/test: fixed per seed";
  cfg["selection"] = task == tasks::Task::Link ? "best validation ROC-AUC" : "best validation accuracy, then loss";
  write_run_files(dir, cfg, start);
  return 0;
}

struct ExplainOptions {
  std::string checkpoint;
  double keep_ratio = 0.3;
  int mask_epochs = 100;
  double mask_lr = 0.01;
  double size_coef = 0.005;
  double ent_coef = 1.0;
  bool all_graphs = false;
};

inline int cmd_explain(const FeatureOptions& fo, TrainOptions to, const ExplainOptions& eo, const std::string& out_dir,
                       std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  if (eo.keep_ratio < 0.0 || eo.keep_ratio > 1.0) throw UsageError("--keep-ratio must lie in [0, 1]");
  if (to.scenario.empty()) to.scenario = "custom";
  const Corpus c = load_featured_corpus(fo);
  const auto split = make_split(c, parse_scenario(to.scenario), to.split_seed, parse_ratios(to.ratios));

  nn::ModelState model;
  if (!eo.checkpoint.empty()) {
    model = nn::load_checkpoint(eo.checkpoint);
  } else {
    const auto seeds = parse_seeds(to.seeds);
    model = tasks::train_graph_classifier(split, c, to.model_config(), to.params(), seeds.front()).model;
  }
  explain::require_trained_classifier(model);

  std::vector<std::string> ids = split.test;
  if (eo.all_graphs) {
    ids.clear();
    for (const auto& g : c.graphs) ids.push_back(g.graph_id);
  }
  explain::ExplainParams ep{eo.mask_epochs, eo.mask_lr, eo.size_coef, eo.ent_coef};
  std::vector<explain::ExplanationMask> masks;
  std::vector<explain::FaithfulnessScores> scores;
  const fs::path dir(out_dir);
  for (const auto& id : ids) {
    const auto& g = c.at(id);
    const auto pg = tasks::prepare_graph(g);
    const int actual = tasks::provenance_label(g.provenance);
    auto mask = explain::learn_masks(model, pg, ep);
    const auto s = explain::faithfulness(model, pg, mask, eo.keep_ratio, actual);
    write_json(dir / "explanations" / (id + ".json"), explain::explanation_json(g, mask, actual, s));
    masks.push_back(std::move(mask));
    scores.push_back(s);
  }
  const auto mean = explain::mean_scores(scores);
  const auto imp = explain::node_importance_by_type(masks, c);
  const std::string table = explain::format_faithfulness_table({{model.config.label(), mean}});
  out << table;
  write_text(dir / "tables" / "faithfulness.txt", table);
  write_text(dir / "importance.csv", explain::importance_csv(imp));
  std::size_t converged = 0;
  for (const auto& m : masks) converged += m.converged;
  write_json(dir / "results.json", ojson{{"task", "explain"},
                                         {"model", model.config.label()},
                                         {"graphs", masks.size()},
                                         {"converged", converged},
                                         {"keep_ratio", eo.keep_ratio},
                                         {"fidelity", "correctness drop against the true label"},
                                         {"mean", explain::to_json(mean)},
                                         {"importance", explain::to_json(imp)}});
  auto cfg = fo.to_json();
  cfg["command"] = "explain";
  cfg.update(to.to_json());
  cfg["scenario"] = to.scenario;
  cfg["checkpoint"] = eo.checkpoint;
  cfg["keep_ratio"] = eo.keep_ratio;
  cfg["mask_epochs"] = eo.mask_epochs;
  cfg["mask_lr"] = eo.mask_lr;
  cfg["size_coef"] = eo.size_coef;
  cfg["ent_coef"] = eo.ent_coef;
  cfg["all_graphs"] = eo.all_graphs;
  write_run_files(dir, cfg, start);
  return 0;
}

// ---------------------------------------------------------------------------
// synth

struct SynthOptions {
  std::string style = "family";
  std::size_t count = 20;
  std::size_t min_nodes = 10;
  std::size_t max_nodes = 40;
  std::uint64_t seed = 1;
  std::string out;
};

inline int cmd_synth(const SynthOptions& o, std::ostream& out) {
  if (o.min_nodes < 2 || o.max_nodes < o.min_nodes) throw UsageError("need 2 <= --min-nodes <= --max-nodes");
  Corpus c;
  if (o.style == "tree") c = synthetic_corpus(SynthSpec::Style::Tree, o.count, o.min_nodes, o.max_nodes, o.seed);
  else if (o.style == "flat") c = synthetic_corpus(SynthSpec::Style::Flat, o.count, o.min_nodes, o.max_nodes, o.seed);
  else if (o.style == "family") c = synthetic_family_corpus(o.count, o.min_nodes, o.max_nodes, o.seed);
  else if (o.style == "motif") {
    Rng rng(o.seed);
    for (std::size_t i = 0; i < o.count; ++i) {
      const std::size_t base = o.min_nodes + rng.below(o.max_nodes - o.min_nodes + 1);
      c.graphs.push_back(generate_motif_graph(base, i % 2 == 0, rng(), "motif" + std::to_string(i)).graph);
    }
  } else {
    throw UsageError("unknown --style '" + o.style + "' (expected tree|flat|family|motif)");
  }
  save_corpus(c, o.out);
  out << "wrote " << c.graphs.size() << " graphs to " << o.out << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// convert

namespace detail {

inline std::string text_of(const nlohmann::json& n) {
  for (const char* k : {"text", "description", "desc", "label", "name"})
    if (n.contains(k) && n.at(k).is_string()) return n.at(k).get<std::string>();
  return "";
}

inline std::string id_of(const nlohmann::json& n, const char* key, std::size_t fallback) {
  if (n.contains(key)) {
    const auto& v = n.at(key);
    return v.is_string() ? v.get<std::string>() : v.dump();
  }
  return "n" + std::to_string(fallback);
}

inline void add_nested(const nlohmann::json& n, const std::string* parent, AssuranceGraph& g) {
  std::string id = id_of(n, "id", g.nodes.size());
  g.nodes.push_back({id, NodeType::parse(n.value("type", std::string("Other"))), text_of(n), std::nullopt});
  if (parent) g.edges.push_back({*parent, id, std::nullopt});
  if (n.contains("children"))
    for (const auto& ch : n.at("children")) add_nested(ch, &id, g);
}

inline AssuranceGraph convert_graph(const nlohmann::json& j, std::size_t index, const std::string& source,
                                    const std::string& source_tag) {
  AssuranceGraph g;
  g.graph_id = j.contains("graph_id") ? j.at("graph_id").get<std::string>()
               : j.contains("name")   ? j.at("name").get<std::string>()
                                      : "graph" + std::to_string(index);
  g.provenance = parse_provenance(j.value("source", source));
  g.source_tag = j.value("source_tag", source_tag);
  g.counterpart = j.value("counterpart", std::string{});
  if (j.contains("nodes")) {
    for (const auto& n : j.at("nodes"))
      g.nodes.push_back({id_of(n, "id", g.nodes.size()), NodeType::parse(n.value("type", std::string("Other"))),
                         text_of(n), std::nullopt});
    const char* key = j.contains("links") ? "links" : "edges";
    if (j.contains(key))
      for (const auto& e : j.at(key)) {
        const char* s = e.contains("source") ? "source" : "src";
        const char* d = e.contains("target") ? "target" : "dst";
        ArgEdge edge{id_of(e, s, 0), id_of(e, d, 0), std::nullopt};
        if (e.contains("attr")) edge.attr = e.at("attr").get<std::vector<double>>();
        g.edges.push_back(std::move(edge));
      }
  } else {
    add_nested(j.contains("root") ? j.at("root") : j, nullptr, g);
  }
  return g;
}

}  // namespace detail

// Accepts a single graph, an array of graphs or {"graphs": [...]}. A graph is
// either nodes + links/edges (networkx node-link style) or a nested tree of
// {"id", "type", "text", "children": [...]}.
inline Corpus convert_external(const nlohmann::json& j, const std::string& source, const std::string& source_tag) {
  Corpus c;
  try {
    const nlohmann::json& list = j.is_array() ? j : j.contains("graphs") ? j.at("graphs") : nlohmann::json::array({j});
    std::size_t i = 0;
    for (const auto& jg : list) c.graphs.push_back(detail::convert_graph(jg, i++, source, source_tag));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("external graph JSON: ") + e.what());
  }
  // Round-trip through the corpus reader so every validity rule applies.
  return corpus_from_json(nlohmann::json::parse(corpus_to_json(c).dump()));
}

inline int cmd_convert(const std::string& input, const std::string& output, const std::string& source,
                       const std::string& source_tag, std::ostream& out) {
  std::ifstream in(input);
  if (!in) throw ParseError("cannot open '" + input + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("'" + input + "': " + e.what());
  }
  const Corpus c = convert_external(j, source, source_tag);
  save_corpus(c, output);
  out << "converted " << c.graphs.size() << " graphs to " << output << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// entry point

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Assurance-case graph diagnostics", "acase"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every command");

  FeatureOptions fo;
  TrainOptions to;
  ExplainOptions eo;
  SynthOptions so;
  std::string out_dir, scenario, ratios = "0.6,0.2,0.2", input, output, source = "unknown", source_tag;
  std::uint64_t split_seed = 0;
  double tau = 0.5;
  bool self = false;

  auto* stats = app.add_subcommand("stats", "per-group graph statistics");
  stats->add_option("--corpus", fo.corpus, "corpus JSON file")->required();
  stats->add_option("--scenario", scenario, "group by split role of this scenario instead of by source");
  stats->add_option("--split-seed", split_seed, "seed of the split");
  stats->add_option("--ratios", ratios, "train,val,test shares");
  stats->add_option("--out", out_dir, "output directory");

  auto* qual = app.add_subcommand("quality", "quality of LLM graphs against human counterparts");
  add_feature_options(qual, fo);
  qual->add_option("--tau", tau, "similarity threshold on the (cos+1)/2 scale");
  qual->add_flag("--self", self, "compare every graph with itself");
  qual->add_option("--out", out_dir, "output directory");

  auto* link = app.add_subcommand("train-link", "link prediction");
  add_feature_options(link, fo);
  add_train_options(link, to, TrainCommand::Link);
  link->add_option("--out", out_dir, "output directory")->required();

  auto* clf = app.add_subcommand("train-clf", "provenance classification");
  add_feature_options(clf, fo);
  add_train_options(clf, to, TrainCommand::Classify);
  clf->add_option("--out", out_dir, "output directory")->required();

  auto* expl = app.add_subcommand("explain", "explain a provenance classifier");
  add_feature_options(expl, fo);
  add_train_options(expl, to, TrainCommand::Explain);
  expl->add_option("--checkpoint", eo.checkpoint, "trained classifier (trains one when omitted)");
  expl->add_option("--keep-ratio", eo.keep_ratio, "share of elements treated as the explanation");
  expl->add_option("--mask-epochs", eo.mask_epochs, "mask optimisation epochs");
  expl->add_option("--mask-lr", eo.mask_lr, "mask optimisation step size");
  expl->add_option("--size-coef", eo.size_coef, "mask size penalty");
  expl->add_option("--ent-coef", eo.ent_coef, "mask entropy penalty");
  expl->add_flag("--all-graphs", eo.all_graphs, "explain every graph, not just the test split");
  expl->add_option("--out", out_dir, "output directory")->required();

  auto* syn = app.add_subcommand("synth", "write a synthetic corpus");
  syn->add_option("--style", so.style, "tree|flat|family|motif");
  syn->add_option("--count", so.count, "graphs (per family for 'family')");
  syn->add_option("--min-nodes", so.min_nodes, "smallest graph");
  syn->add_option("--max-nodes", so.max_nodes, "largest graph");
  syn->add_option("--seed", so.seed, "generator seed");
  syn->add_option("--out", so.out, "output corpus JSON")->required();

  auto* conv = app.add_subcommand("convert", "convert external graph JSON");
  conv->add_option("--input", input, "external JSON")->required();
  conv->add_option("--output", output, "corpus JSON to write")->required();
  conv->add_option("--source", source, "provenance when the input does not say (human|llm|unknown)");
  conv->add_option("--source-tag", source_tag, "dataset tag when the input does not say");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << kSynopsis;
    return 1;
  }

  try {
    if (stats->parsed()) return cmd_stats(fo, scenario, split_seed, ratios, out_dir, out);
    if (qual->parsed()) return cmd_quality(fo, tau, self, out_dir, out);
    if (link->parsed()) return cmd_train(tasks::Task::Link, fo, to, out_dir, out);
    if (clf->parsed()) return cmd_train(tasks::Task::Classify, fo, to, out_dir, out);
    if (expl->parsed()) return cmd_explain(fo, to, eo, out_dir, out);
    if (syn->parsed()) return cmd_synth(so, out);
    if (conv->parsed()) return cmd_convert(input, output, source, source_tag, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << kSynopsis;
    return 1;
  } catch (const InvalidSpec& e) {
    err << "error: " << e.what() << "\n" << kSynopsis;
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  err << kSynopsis;
  return 1;
}

}  // namespace acase::cli
