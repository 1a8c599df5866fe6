#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "acase/errors.hpp"

namespace acase {

// Assurance-case element kinds. Anything not in the fixed list is carried as
// Other with its original label.
struct NodeType {
  enum class Kind {
    Goal,
    Strategy,
    Context,
    Solution,
    Justification,
    Assumption,
    Evidence,
    Claim,
    Argument,
    Other,
  };

  Kind kind = Kind::Goal;
  std::string label;  // only meaningful for Other

  NodeType() = default;
  NodeType(Kind k) : kind(k) {}  // NOLINT(google-explicit-constructor)
  static NodeType other(std::string lbl) {
    NodeType t(Kind::Other);
    t.label = std::move(lbl);
    return t;
  }

  std::string name() const {
    switch (kind) {
      case Kind::Goal: return "Goal";
      case Kind::Strategy: return "Strategy";
      case Kind::Context: return "Context";
      case Kind::Solution: return "Solution";
      case Kind::Justification: return "Justification";
      case Kind::Assumption: return "Assumption";
      case Kind::Evidence: return "Evidence";
      case Kind::Claim: return "Claim";
      case Kind::Argument: return "Argument";
      case Kind::Other: return label;
    }
    return label;
  }

  // Case-insensitive parse; unknown strings become Other(label) verbatim.
  static NodeType parse(std::string_view s) {
    std::string low(s);
    std::transform(low.begin(), low.end(), low.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    static const std::pair<const char*, Kind> table[] = {
        {"goal", Kind::Goal},
        {"strategy", Kind::Strategy},
        {"context", Kind::Context},
        {"solution", Kind::Solution},
        {"justification", Kind::Justification},
        {"assumption", Kind::Assumption},
        {"evidence", Kind::Evidence},
        {"claim", Kind::Claim},
        {"argument", Kind::Argument},
    };
    for (const auto& [key, kind] : table)
      if (low == key) return NodeType(kind);
    return other(std::string(s));
  }

  friend bool operator==(const NodeType& a, const NodeType& b) {
    if (a.kind != b.kind) return false;
    return a.kind != Kind::Other || a.label == b.label;
  }
  friend bool operator<(const NodeType& a, const NodeType& b) { return a.name() < b.name(); }
};

enum class Provenance { Human, LLM, Unknown };

inline std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Human: return "human";
    case Provenance::LLM: return "llm";
    case Provenance::Unknown: return "unknown";
  }
  return "unknown";
}

struct ArgNode {
  std::string id;
  NodeType type;
  std::string text;
  std::optional<std::vector<double>> feature;
};

// Directed parent -> child relation. attr is carried through I/O but no model
// reads it.
struct ArgEdge {
  std::string src;
  std::string dst;
  std::optional<std::vector<double>> attr;
};

struct AssuranceGraph {
  std::string graph_id;
  Provenance provenance = Provenance::Unknown;
  std::string source_tag;
  // Optional id of the human ground-truth graph this one was generated from;
  // used to pair graphs for quality reports.
  std::string counterpart;
  std::vector<ArgNode> nodes;
  std::vector<ArgEdge> edges;

  std::unordered_map<std::string, std::size_t> node_index() const {
    std::unordered_map<std::string, std::size_t> idx;
    idx.reserve(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) idx.emplace(nodes[i].id, i);
    return idx;
  }

  // Edges as (src index, dst index). Requires a valid graph.
  std::vector<std::pair<int, int>> edge_indices() const {
    const auto idx = node_index();
    std::vector<std::pair<int, int>> out;
    out.reserve(edges.size());
    for (const auto& e : edges)
      out.emplace_back(static_cast<int>(idx.at(e.src)), static_cast<int>(idx.at(e.dst)));
    return out;
  }
};

struct Violation {
  enum class Kind {
    NoNodes,
    EmptyNodeId,
    DuplicateNode,
    EmptyOtherLabel,
    FeatureDimension,
    DanglingEdge,
    SelfLoop,
    DuplicateEdge,
  };
  Kind kind;
  std::string subject;  // offending node id, or "src->dst" for edges

  friend bool operator==(const Violation&, const Violation&) = default;
};

inline std::string describe(const Violation& v) {
  switch (v.kind) {
    case Violation::Kind::NoNodes: return "graph has no nodes";
    case Violation::Kind::EmptyNodeId: return "node with empty id";
    case Violation::Kind::DuplicateNode: return "duplicate node id '" + v.subject + "'";
    case Violation::Kind::EmptyOtherLabel: return "node '" + v.subject + "' has an empty type label";
    case Violation::Kind::FeatureDimension:
      return "node '" + v.subject + "' feature dimension differs from the graph";
    case Violation::Kind::DanglingEdge: return "edge references absent node '" + v.subject + "'";
    case Violation::Kind::SelfLoop: return "self-loop on '" + v.subject + "'";
    case Violation::Kind::DuplicateEdge: return "duplicate edge " + v.subject;
  }
  return "unknown violation";
}

inline std::vector<Violation> validate_graph(const AssuranceGraph& g) {
  using K = Violation::Kind;
  std::vector<Violation> out;
  if (g.nodes.empty()) out.push_back({K::NoNodes, g.graph_id});

  std::set<std::string> ids;
  std::optional<std::size_t> dim;
  for (const auto& n : g.nodes) {
    if (n.id.empty()) out.push_back({K::EmptyNodeId, ""});
    else if (!ids.insert(n.id).second) out.push_back({K::DuplicateNode, n.id});
    if (n.type.kind == NodeType::Kind::Other && n.type.label.empty())
      out.push_back({K::EmptyOtherLabel, n.id});
    if (n.feature) {
      if (!dim) dim = n.feature->size();
      else if (*dim != n.feature->size()) out.push_back({K::FeatureDimension, n.id});
    }
  }

  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& e : g.edges) {
    bool ok = true;
    if (!ids.count(e.src)) {
      out.push_back({K::DanglingEdge, e.src});
      ok = false;
    }
    if (!ids.count(e.dst)) {
      out.push_back({K::DanglingEdge, e.dst});
      ok = false;
    }
    if (e.src == e.dst) {
      out.push_back({K::SelfLoop, e.src});
      ok = false;
    }
    if (ok && !seen.insert({e.src, e.dst}).second)
      out.push_back({K::DuplicateEdge, e.src + "->" + e.dst});
  }
  return out;
}

inline void require_valid(const AssuranceGraph& g) {
  const auto v = validate_graph(g);
  if (!v.empty()) throw InvalidGraph("graph '" + g.graph_id + "': " + describe(v.front()));
}

struct GraphStats {
  std::size_t num_nodes = 0;
  std::size_t num_edges = 0;
  double avg_words = 0.0;
  double avg_chars = 0.0;
  double density = 0.0;
  double avg_in_deg = 0.0;
  double avg_out_deg = 0.0;
  double edge_homophily = 0.0;
};

inline std::size_t word_count(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    const bool space = std::isspace(c) != 0;
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

// Number of Unicode scalar values, counting UTF-8 lead bytes.
inline std::size_t utf8_length(std::string_view text) {
  std::size_t n = 0;
  for (unsigned char c : text)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

// Fraction of edges whose endpoints share a node type; 0 for edgeless graphs.
inline double edge_homophily(const AssuranceGraph& g) {
  if (g.edges.empty()) return 0.0;
  const auto idx = g.node_index();
  std::size_t same = 0;
  for (const auto& e : g.edges)
    if (g.nodes[idx.at(e.src)].type == g.nodes[idx.at(e.dst)].type) ++same;
  return static_cast<double>(same) / static_cast<double>(g.edges.size());
}

inline GraphStats compute_stats(const AssuranceGraph& g) {
  require_valid(g);
  GraphStats s;
  s.num_nodes = g.nodes.size();
  s.num_edges = g.edges.size();
  double words = 0.0, chars = 0.0;
  for (const auto& n : g.nodes) {
    words += static_cast<double>(word_count(n.text));
    chars += static_cast<double>(utf8_length(n.text));
  }
  const double n = static_cast<double>(s.num_nodes);
  const double e = static_cast<double>(s.num_edges);
  s.avg_words = words / n;
  s.avg_chars = chars / n;
  s.density = s.num_nodes > 1 ? e / (n * (n - 1.0)) : 0.0;
  s.avg_in_deg = e / n;
  s.avg_out_deg = e / n;
  s.edge_homophily = edge_homophily(g);
  return s;
}

// Ordered pairs (src, dst), src != dst, that are not edges, sorted by
// (src id, dst id).
inline std::vector<std::pair<std::string, std::string>> candidate_non_edges(const AssuranceGraph& g) {
  std::vector<std::string> ids;
  ids.reserve(g.nodes.size());
  for (const auto& n : g.nodes) ids.push_back(n.id);
  std::sort(ids.begin(), ids.end());
  std::set<std::pair<std::string_view, std::string_view>> present;
  for (const auto& e : g.edges) present.emplace(e.src, e.dst);

  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& a : ids)
    for (const auto& b : ids)
      if (a != b && !present.count({a, b})) out.emplace_back(a, b);
  return out;
}

}  // namespace acase
