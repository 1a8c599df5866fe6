#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "acase/errors.hpp"
#include "acase/graph.hpp"

namespace acase {

struct Corpus {
  std::vector<AssuranceGraph> graphs;
  std::optional<std::size_t> embedding_dim;

  const AssuranceGraph* find(const std::string& id) const {
    for (const auto& g : graphs)
      if (g.graph_id == id) return &g;
    return nullptr;
  }
  const AssuranceGraph& at(const std::string& id) const {
    const auto* g = find(id);
    if (!g) throw InsufficientData("graph '" + id + "' not in corpus");
    return *g;
  }
};

inline Provenance parse_provenance(const std::string& s) {
  if (s == "human") return Provenance::Human;
  if (s == "llm") return Provenance::LLM;
  if (s == "unknown") return Provenance::Unknown;
  throw ParseError("unknown source '" + s + "' (expected human|llm|unknown)");
}

// Corpus JSON:
//   {"graphs":[{"graph_id", "source", "source_tag", "nodes":[{"id","type","text"}],
//               "edges":[{"src","dst"}]}]}
// Optional extras: graph "counterpart", edge "attr" (number array).
inline Corpus corpus_from_json(const nlohmann::json& j) {
  Corpus c;
  try {
    std::set<std::string> ids;
    for (const auto& jg : j.at("graphs")) {
      AssuranceGraph g;
      g.graph_id = jg.at("graph_id").get<std::string>();
      g.provenance = parse_provenance(jg.at("source").get<std::string>());
      g.source_tag = jg.value("source_tag", std::string{});
      g.counterpart = jg.value("counterpart", std::string{});
      for (const auto& jn : jg.at("nodes"))
        g.nodes.push_back({jn.at("id").get<std::string>(), NodeType::parse(jn.at("type").get<std::string>()),
                           jn.value("text", std::string{}), std::nullopt});
      for (const auto& je : jg.at("edges")) {
        ArgEdge e{je.at("src").get<std::string>(), je.at("dst").get<std::string>(), std::nullopt};
        if (je.contains("attr")) e.attr = je.at("attr").get<std::vector<double>>();
        g.edges.push_back(std::move(e));
      }
      if (!ids.insert(g.graph_id).second) throw ValidationError("duplicate graph_id '" + g.graph_id + "'");
      c.graphs.push_back(std::move(g));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("corpus schema: ") + e.what());
  }
  for (const auto& g : c.graphs) {
    const auto v = validate_graph(g);
    if (!v.empty()) throw ValidationError("graph '" + g.graph_id + "': " + describe(v.front()));
  }
  return c;
}

inline nlohmann::ordered_json corpus_to_json(const Corpus& c) {
  nlohmann::ordered_json graphs = nlohmann::ordered_json::array();
  for (const auto& g : c.graphs) {
    nlohmann::ordered_json jg;
    jg["graph_id"] = g.graph_id;
    jg["source"] = to_string(g.provenance);
    jg["source_tag"] = g.source_tag;
    if (!g.counterpart.empty()) jg["counterpart"] = g.counterpart;
    auto& nodes = jg["nodes"] = nlohmann::ordered_json::array();
    for (const auto& n : g.nodes) nodes.push_back({{"id", n.id}, {"type", n.type.name()}, {"text", n.text}});
    auto& edges = jg["edges"] = nlohmann::ordered_json::array();
    for (const auto& e : g.edges) {
      nlohmann::ordered_json je{{"src", e.src}, {"dst", e.dst}};
      if (e.attr) je["attr"] = *e.attr;
      edges.push_back(std::move(je));
    }
    graphs.push_back(std::move(jg));
  }
  return {{"graphs", std::move(graphs)}};
}

inline Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open corpus '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("corpus '" + path.string() + "': " + e.what());
  }
  return corpus_from_json(j);
}

inline void save_corpus(const Corpus& c, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << corpus_to_json(c).dump(1) << '\n';
}

}  // namespace acase
