#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "acase/corpus.hpp"
#include "acase/errors.hpp"
#include "acase/graph.hpp"
#include "acase/random.hpp"

namespace acase {

// Synthetic assurance cases for tests and smoke experiments.
//   Tree: rooted GSN-like hierarchy, Goal -> Strategy -> Goal/Solution, with
//         occasional Context leaves hanging off goals.
//   Flat: shallow star, a Goal hub with every other element as a direct child.
struct SynthSpec {
  enum class Style { Tree, Flat };
  Style style = Style::Tree;
  std::size_t num_nodes = 10;
  std::string graph_id = "synth";
  Provenance provenance = Provenance::Unknown;  // Unknown -> Human for Tree, LLM for Flat
  std::string source_tag = "synthetic";
};

namespace detail {

inline constexpr std::array<const char*, 12> kTopics = {
    "braking", "navigation", "battery", "altitude", "geofence", "telemetry",
    "collision", "landing", "motor", "sensor", "firmware", "communication"};
inline constexpr std::array<const char*, 8> kComponents = {
    "controller", "subsystem", "module", "unit", "monitor", "interface", "software", "hardware"};

inline const char* pick(Rng& rng, const auto& arr) { return arr[rng.below(arr.size())]; }

inline std::string tree_text(NodeType::Kind kind, const std::string& topic, Rng& rng) {
  using K = NodeType::Kind;
  const std::string comp = pick(rng, kComponents);
  switch (kind) {
    case K::Goal: return "the " + topic + " " + comp + " is acceptably safe";
    case K::Strategy: return "argument over identified " + topic + " hazards";
    case K::Solution: return topic + " " + comp + " test results";
    case K::Context: return topic + " operating environment definition";
    default: return topic + " " + comp;
  }
}

inline std::string flat_text(NodeType::Kind kind, const std::string& topic, Rng& rng) {
  using K = NodeType::Kind;
  const std::string comp = pick(rng, kComponents);
  switch (kind) {
    case K::Goal: return "The system shall ensure that all " + topic + " " + comp + " risks are mitigated";
    case K::Strategy: return "Demonstrate safety by addressing each " + topic + " requirement in turn";
    case K::Context: return "The " + topic + " " + comp + " operates within the defined mission profile";
    case K::Solution: return "Verification evidence confirming the " + topic + " " + comp + " behaviour";
    case K::Justification: return "The " + topic + " approach is justified by industry standards";
    case K::Assumption: return "It is assumed that the " + topic + " " + comp + " is correctly configured";
    default: return topic + " " + comp;
  }
}

}  // namespace detail

inline AssuranceGraph generate_synthetic(const SynthSpec& spec, std::uint64_t seed) {
  using K = NodeType::Kind;
  if (spec.num_nodes < 2) throw InvalidSpec("synthetic graph needs at least 2 nodes");
  Rng rng(derive_seed(seed, 0x5e17));

  AssuranceGraph g;
  g.graph_id = spec.graph_id;
  g.source_tag = spec.source_tag;
  g.provenance = spec.provenance != Provenance::Unknown
                     ? spec.provenance
                     : (spec.style == SynthSpec::Style::Tree ? Provenance::Human : Provenance::LLM);

  const auto add_node = [&](K kind, std::string text) {
    const std::string prefix = NodeType(kind).name().substr(0, 1);
    g.nodes.push_back({prefix + std::to_string(g.nodes.size()), NodeType(kind), std::move(text), std::nullopt});
  };

  if (spec.style == SynthSpec::Style::Tree) {
    std::vector<std::string> topic;
    topic.push_back(detail::pick(rng, detail::kTopics));
    add_node(K::Goal, detail::tree_text(K::Goal, topic[0], rng));
    std::vector<std::size_t> expandable{0};
    while (g.nodes.size() < spec.num_nodes) {
      const std::size_t parent = expandable[rng.below(expandable.size())];
      const K pkind = g.nodes[parent].type.kind;
      K kind;
      if (pkind == K::Goal) kind = rng.bernoulli(0.8) ? K::Strategy : K::Context;
      else kind = rng.bernoulli(0.5) ? K::Goal : K::Solution;
      const std::string t = rng.bernoulli(0.75) ? topic[parent] : std::string(detail::pick(rng, detail::kTopics));
      const std::size_t child = g.nodes.size();
      add_node(kind, detail::tree_text(kind, t, rng));
      topic.push_back(t);
      g.edges.push_back({g.nodes[parent].id, g.nodes[child].id, std::nullopt});
      if (kind == K::Goal || kind == K::Strategy) expandable.push_back(child);
    }
  } else {
    static constexpr std::array<K, 9> kFlatKinds = {K::Goal, K::Goal, K::Strategy, K::Strategy, K::Context,
                                                    K::Solution, K::Solution, K::Justification, K::Assumption};
    const std::string hub_topic = detail::pick(rng, detail::kTopics);
    add_node(K::Goal, detail::flat_text(K::Goal, hub_topic, rng));
    while (g.nodes.size() < spec.num_nodes) {
      const K kind = kFlatKinds[rng.below(kFlatKinds.size())];
      const std::string t = rng.bernoulli(0.5) ? hub_topic : std::string(detail::pick(rng, detail::kTopics));
      add_node(kind, detail::flat_text(kind, t, rng));
      g.edges.push_back({g.nodes[0].id, g.nodes.back().id, std::nullopt});
    }
  }
  return g;
}

// A tree-style graph with three extra "motif" nodes. When planted, the motif
// nodes are wired to each other (M0->M1, M0->M2, M1->M2) and M0 hangs off a
// random base node; otherwise each motif node hangs off its own random base
// node. Node texts are identical in both variants, so only the motif wiring
// separates the classes.
struct MotifGraph {
  AssuranceGraph graph;
  std::vector<std::pair<std::string, std::string>> motif_edges;
  bool planted = false;
};

inline MotifGraph generate_motif_graph(std::size_t base_nodes, bool planted, std::uint64_t seed,
                                       std::string graph_id = "motif") {
  SynthSpec spec;
  spec.style = SynthSpec::Style::Tree;
  spec.num_nodes = base_nodes;
  spec.graph_id = std::move(graph_id);
  MotifGraph out;
  out.planted = planted;
  out.graph = generate_synthetic(spec, seed);
  out.graph.provenance = planted ? Provenance::LLM : Provenance::Human;
  out.graph.source_tag = "motif";

  Rng rng(derive_seed(seed, 0x307f));
  const std::array<const char*, 3> texts = {"independent hazard log review record",
                                            "independent hazard log audit record",
                                            "independent hazard log closure record"};
  std::vector<std::string> ids;
  for (int k = 0; k < 3; ++k) {
    ids.push_back("M" + std::to_string(k));
    out.graph.nodes.push_back({ids.back(), NodeType(NodeType::Kind::Evidence), texts[k], std::nullopt});
  }
  const auto base = [&] { return out.graph.nodes[rng.below(base_nodes)].id; };
  if (planted) {
    out.graph.edges.push_back({base(), ids[0], std::nullopt});
    out.motif_edges = {{ids[0], ids[1]}, {ids[0], ids[2]}, {ids[1], ids[2]}};
    for (const auto& [s, d] : out.motif_edges) out.graph.edges.push_back({s, d, std::nullopt});
  } else {
    for (const auto& id : ids) out.graph.edges.push_back({base(), id, std::nullopt});
  }
  return out;
}

// count graphs of one style with node counts drawn uniformly from
// [min_nodes, max_nodes].
inline Corpus synthetic_corpus(SynthSpec::Style style, std::size_t count, std::size_t min_nodes,
                               std::size_t max_nodes, std::uint64_t seed, const std::string& prefix = "g") {
  Rng rng(derive_seed(seed, 0xc0de));
  Corpus c;
  for (std::size_t i = 0; i < count; ++i) {
    SynthSpec spec;
    spec.style = style;
    spec.num_nodes = min_nodes + rng.below(max_nodes - min_nodes + 1);
    spec.graph_id = prefix + std::to_string(i);
    spec.source_tag = style == SynthSpec::Style::Tree ? "synthetic-tree" : "synthetic-flat";
    c.graphs.push_back(generate_synthetic(spec, rng()));
  }
  return c;
}

// Tree family labelled Human, flat family labelled LLM.
inline Corpus synthetic_family_corpus(std::size_t per_family, std::size_t min_nodes, std::size_t max_nodes,
                                      std::uint64_t seed) {
  Corpus c = synthetic_corpus(SynthSpec::Style::Tree, per_family, min_nodes, max_nodes, derive_seed(seed, 1), "h");
  Corpus f = synthetic_corpus(SynthSpec::Style::Flat, per_family, min_nodes, max_nodes, derive_seed(seed, 2), "m");
  for (auto& g : f.graphs) c.graphs.push_back(std::move(g));
  return c;
}

}  // namespace acase
