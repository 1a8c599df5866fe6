#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "acase/corpus.hpp"
#include "acase/embeddings.hpp"
#include "acase/nn/model.hpp"
#include "acase/nn/optim.hpp"
#include "acase/quality.hpp"
#include "acase/split.hpp"
#include "acase/tasks/metrics.hpp"

namespace acase::tasks {

using nn::Matrix;
using nn::ModelConfig;
using nn::ModelState;
using nn::NodePair;

struct TrainParams {
  int epochs = 200;
  double lr = 1e-5;
  double weight_decay = 0.01;
  double threshold = 0.5;        // decision threshold for F1
  bool shuffle_labels = false;   // classification permutation control
};

// A graph turned into encoder inputs: dense features, message-passing
// structure, positive (edge) pairs and every candidate negative pair.
struct PreparedGraph {
  const AssuranceGraph* graph = nullptr;
  Matrix features;
  nn::Adjacency adj;
  std::vector<NodePair> positives;
  std::vector<NodePair> non_edges;  // lexicographic by (src id, dst id)

  nn::GraphView view() const { return {&features, &adj, {}, {}}; }
};

inline Matrix feature_matrix(const AssuranceGraph& g) {
  if (g.nodes.empty()) throw EmptyGraph("graph '" + g.graph_id + "' has no nodes");
  const auto dim = quality::feature_of(g.nodes[0]).size();
  Matrix x(static_cast<nn::Index>(g.nodes.size()), static_cast<nn::Index>(dim));
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& f = quality::feature_of(g.nodes[i]);
    if (f.size() != dim) throw ShapeMismatch("graph '" + g.graph_id + "' mixes feature dimensions");
    for (std::size_t k = 0; k < dim; ++k) x(static_cast<nn::Index>(i), static_cast<nn::Index>(k)) = f[k];
  }
  return x;
}

inline PreparedGraph prepare_graph(const AssuranceGraph& g) {
  PreparedGraph p;
  p.graph = &g;
  p.features = feature_matrix(g);
  const auto index = g.node_index();
  for (const auto& e : g.edges) p.positives.emplace_back(static_cast<int>(index.at(e.src)), static_cast<int>(index.at(e.dst)));
  p.adj = nn::Adjacency::symmetric(g.nodes.size(), p.positives);
  for (const auto& [s, d] : candidate_non_edges(g))
    p.non_edges.emplace_back(static_cast<int>(index.at(s)), static_cast<int>(index.at(d)));
  return p;
}

inline std::vector<PreparedGraph> prepare_all(const Corpus& c, const std::vector<std::string>& ids) {
  std::vector<PreparedGraph> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(prepare_graph(c.at(id)));
  return out;
}

inline std::size_t input_dim_of(const std::vector<PreparedGraph>& gs) {
  for (const auto& g : gs) return static_cast<std::size_t>(g.features.cols());
  throw InsufficientData("no graphs to train on");
}

// Per-seed evaluation row.
struct SeedResult {
  std::uint64_t seed = 0;
  double auc = std::numeric_limits<double>::quiet_NaN();  // NaN when undefined
  double f1 = 0.0;
  double acc = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  int best_epoch = 0;       // epoch whose weights were kept (0 = initial)
  bool short_negatives = false;
};

struct TrainOutput {
  ModelState model;
  SeedResult result;
};

// ---------------------------------------------------------------------------
// Link prediction

// Positives plus a fixed negative sample per graph, drawn once per seed.
struct LinkEvalSet {
  std::vector<std::vector<NodePair>> pairs;
  std::vector<std::vector<double>> labels;
  bool short_negatives = false;
};

inline std::vector<NodePair> draw_negatives(const PreparedGraph& g, std::size_t k, Rng& rng, bool* short_flag) {
  if (short_flag && g.non_edges.size() < k) *short_flag = true;
  auto picks = rng.sample_indices(g.non_edges.size(), std::min(k, g.non_edges.size()));
  std::sort(picks.begin(), picks.end());
  std::vector<NodePair> out;
  out.reserve(picks.size());
  for (std::size_t i : picks) out.push_back(g.non_edges[i]);
  return out;
}

inline LinkEvalSet make_link_eval_set(const std::vector<PreparedGraph>& gs, std::uint64_t seed) {
  LinkEvalSet s;
  for (const auto& g : gs) {
    Rng rng(derive_seed(seed, detail::fnv1a(g.graph->graph_id)));
    auto neg = draw_negatives(g, g.positives.size(), rng, &s.short_negatives);
    std::vector<NodePair> pairs = g.positives;
    std::vector<double> labels(pairs.size(), 1.0);
    pairs.insert(pairs.end(), neg.begin(), neg.end());
    labels.resize(pairs.size(), 0.0);
    s.pairs.push_back(std::move(pairs));
    s.labels.push_back(std::move(labels));
  }
  return s;
}

struct LinkScores {
  std::vector<double> scores;
  std::vector<int> labels;
};

inline LinkScores score_links(const ModelState& m, const std::vector<PreparedGraph>& gs, const LinkEvalSet& es) {
  LinkScores out;
  for (std::size_t i = 0; i < gs.size(); ++i) {
    if (es.pairs[i].empty()) continue;
    const auto p = nn::link_probabilities(m, gs[i].view(), es.pairs[i]);
    for (std::size_t k = 0; k < p.size(); ++k) {
      out.scores.push_back(p[k]);
      out.labels.push_back(es.labels[i][k] > 0.5 ? 1 : 0);
    }
  }
  return out;
}

// AUC if both classes are present, NaN otherwise.
inline double safe_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  try {
    return roc_auc_labeled(scores, labels);
  } catch (const EmptyClass&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

inline void fill_binary(SeedResult& r, const std::vector<double>& scores, const std::vector<int>& labels,
                        double threshold) {
  r.auc = safe_auc(scores, labels);
  const auto b = f1_at_threshold(scores, labels, threshold);
  r.f1 = b.f1;
  r.acc = b.accuracy;
  r.precision = b.precision;
  r.recall = b.recall;
}

// Trains the encoder + bilinear decoder. Each epoch visits the training
// graphs in a seeded shuffled order, one Adam step per graph on its edges
// plus an equal number of freshly drawn non-edges. The kept weights are those
// with the best validation ROC-AUC (the final weights when no validation AUC
// is defined). Message passing always sees the graph's full edge list.
inline TrainOutput train_link(const ScenarioSplit& split, const Corpus& corpus, ModelConfig config,
                              const TrainParams& hp, std::uint64_t seed) {
  config.head = nn::HeadKind::LinkBilinear;
  const auto train = prepare_all(corpus, split.train);
  const auto val = prepare_all(corpus, split.val);
  const auto test = prepare_all(corpus, split.test);
  std::size_t train_edges = 0;
  for (const auto& g : train) train_edges += g.positives.size();
  if (train_edges == 0) throw InsufficientData("link training set has no edges");
  if (test.empty()) throw InsufficientData("link test set is empty");

  ModelState model = nn::init_model(config, input_dim_of(train), seed);
  const LinkEvalSet val_set = make_link_eval_set(val, derive_seed(seed, 0x7661));
  const LinkEvalSet test_set = make_link_eval_set(test, derive_seed(seed, 0x7465));
  Rng rng(derive_seed(seed, 0x7472));

  ModelState best = model;
  int best_epoch = 0;
  double best_auc = -1.0;
  const auto consider = [&](int epoch) {
    if (val.empty()) return;
    const auto s = score_links(model, val, val_set);
    const double auc = safe_auc(s.scores, s.labels);
    if (!std::isnan(auc) && auc > best_auc) {
      best_auc = auc;
      best = model;
      best_epoch = epoch;
    }
  };
  consider(0);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 1; epoch <= hp.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t gi : order) {
      const auto& g = train[gi];
      if (g.positives.empty()) continue;
      auto pairs = g.positives;
      std::vector<double> labels(pairs.size(), 1.0);
      const auto neg = draw_negatives(g, g.positives.size(), rng, nullptr);
      pairs.insert(pairs.end(), neg.begin(), neg.end());
      labels.resize(pairs.size(), 0.0);
      nn::link_objective(model, g.view(), pairs, labels, true);
      nn::adam_step(model, hp.lr, hp.weight_decay);
    }
    consider(epoch);
  }
  if (best_auc < 0.0) {
    best = model;
    best_epoch = hp.epochs;
  }

  TrainOutput out{std::move(best), {}};
  out.result.seed = seed;
  out.result.best_epoch = best_epoch;
  out.result.short_negatives = test_set.short_negatives;
  const auto s = score_links(out.model, test, test_set);
  fill_binary(out.result, s.scores, s.labels, hp.threshold);
  return out;
}

// ---------------------------------------------------------------------------
// Graph classification (Human = 0, LLM = 1)

inline int provenance_label(Provenance p) {
  if (p == Provenance::Human) return 0;
  if (p == Provenance::LLM) return 1;
  throw InsufficientData("graph with unknown provenance cannot be classified");
}

struct GraphScores {
  std::vector<double> p_llm;
  std::vector<int> labels;
  double loss = 0.0;
};

inline GraphScores score_graphs(const ModelState& m, const std::vector<PreparedGraph>& gs,
                                const std::vector<int>& labels) {
  GraphScores out;
  for (std::size_t i = 0; i < gs.size(); ++i) {
    const auto p = nn::graph_probabilities(m, gs[i].view());
    out.p_llm.push_back(p(1));
    out.labels.push_back(labels[i]);
    out.loss -= std::log(std::max(p(labels[i]), nn::kProbClamp));
  }
  if (!gs.empty()) out.loss /= static_cast<double>(gs.size());
  return out;
}

// Labels for train/val/test, optionally permuted across all split graphs.
struct SplitLabels {
  std::vector<int> train, val, test;
};

inline SplitLabels split_labels(const ScenarioSplit& split, const Corpus& c, bool shuffle, std::uint64_t seed) {
  std::vector<int> all;
  for (const auto* part : {&split.train, &split.val, &split.test})
    for (const auto& id : *part) all.push_back(provenance_label(c.at(id).provenance));
  if (shuffle) {
    Rng rng(derive_seed(seed, 0x5048));
    rng.shuffle(all);
  }
  SplitLabels out;
  const auto n_train = split.train.size(), n_val = split.val.size();
  out.train.assign(all.begin(), all.begin() + static_cast<long>(n_train));
  out.val.assign(all.begin() + static_cast<long>(n_train), all.begin() + static_cast<long>(n_train + n_val));
  out.test.assign(all.begin() + static_cast<long>(n_train + n_val), all.end());
  return out;
}

// Encoder -> mean readout -> softmax; one Adam step per training graph. Keeps
// the weights with the best validation accuracy, ties going to the lower
// validation loss. Test F1 treats LLM as the positive class.
inline TrainOutput train_graph_classifier(const ScenarioSplit& split, const Corpus& corpus, ModelConfig config,
                                          const TrainParams& hp, std::uint64_t seed) {
  config.head = nn::HeadKind::GraphSoftmax;
  config.num_classes = 2;
  const auto labels = split_labels(split, corpus, hp.shuffle_labels, seed);
  if (std::count(labels.train.begin(), labels.train.end(), 0) == 0 ||
      std::count(labels.train.begin(), labels.train.end(), 1) == 0)
    throw SingleClassTrainingSet("classification training set contains a single class");
  const auto train = prepare_all(corpus, split.train);
  const auto val = prepare_all(corpus, split.val);
  const auto test = prepare_all(corpus, split.test);
  if (test.empty()) throw InsufficientData("classification test set is empty");

  ModelState model = nn::init_model(config, input_dim_of(train), seed);
  Rng rng(derive_seed(seed, 0x6373));
  ModelState best = model;
  int best_epoch = 0;
  double best_acc = -1.0, best_loss = std::numeric_limits<double>::infinity();
  const auto consider = [&](int epoch) {
    if (val.empty()) return;
    const auto s = score_graphs(model, val, labels.val);
    const double acc = f1_at_threshold(s.p_llm, s.labels, 0.5).accuracy;
    if (acc > best_acc || (acc == best_acc && s.loss < best_loss)) {
      best_acc = acc;
      best_loss = s.loss;
      best = model;
      best_epoch = epoch;
    }
  };
  consider(0);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 1; epoch <= hp.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t gi : order) {
      nn::graph_objective(model, train[gi].view(), labels.train[gi], true);
      nn::adam_step(model, hp.lr, hp.weight_decay);
    }
    consider(epoch);
  }
  if (val.empty()) {
    best = model;
    best_epoch = hp.epochs;
  }

  TrainOutput out{std::move(best), {}};
  out.result.seed = seed;
  out.result.best_epoch = best_epoch;
  const auto s = score_graphs(out.model, test, labels.test);
  fill_binary(out.result, s.p_llm, s.labels, hp.threshold);
  return out;
}

}  // namespace acase::tasks
