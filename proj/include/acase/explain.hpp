#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "acase/errors.hpp"
#include "acase/nn/model.hpp"
#include "acase/tasks/train.hpp"

namespace acase::explain {

using nn::Matrix;
using nn::ModelState;
using tasks::PreparedGraph;

struct ExplainParams {
  int epochs = 100;
  double lr = 0.01;
  double size_coef = 0.005;  // lambda_size
  double ent_coef = 1.0;     // lambda_ent
};

struct ExplanationMask {
  std::string graph_id;
  std::vector<double> edge_mask;  // one per edge, in graph edge order
  std::vector<double> feat_mask;  // one per feature column
  int predicted = 0;              // model's label on the unmasked graph
  bool converged = false;         // objective settled over the last epochs
  double initial_objective = 0.0;
  double final_objective = 0.0;
};

struct FaithfulnessScores {
  double node_fid_plus = 0.0;
  double node_fid_minus = 0.0;
  double edge_fid_plus = 0.0;
  double edge_fid_minus = 0.0;
  double gef = 0.0;       // edge and feature masks applied together
  double node_gef = 0.0;  // feature mask only
  double edge_gef = 0.0;  // edge mask only
};

enum class FidelityMode { NodePlus, NodeMinus, EdgePlus, EdgeMinus };

namespace detail {

inline double sigmoid(double z) { return nn::sigmoid(z); }

// Binary entropy and its derivative, clamped away from 0 and 1.
inline double entropy(double s) {
  const double p = std::clamp(s, nn::kProbClamp, 1.0 - nn::kProbClamp);
  return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}
inline double entropy_grad(double s) {
  const double p = std::clamp(s, nn::kProbClamp, 1.0 - nn::kProbClamp);
  return std::log((1.0 - p) / p);
}

inline double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Adam over a flat logit vector (no weight decay).
struct VecAdam {
  std::vector<double> m, v;
  std::uint64_t t = 0;
  void step(std::vector<double>& x, const std::vector<double>& g, double lr) {
    if (m.empty()) m.assign(x.size(), 0.0), v.assign(x.size(), 0.0);
    ++t;
    const double c1 = 1.0 - std::pow(0.9, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(0.999, static_cast<double>(t));
    for (std::size_t i = 0; i < x.size(); ++i) {
      m[i] = 0.9 * m[i] + 0.1 * g[i];
      v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
      x[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + 1e-8);
    }
  }
};

inline int argmax(const nn::RowVector& p) {
  Eigen::Index k = 0;
  p.maxCoeff(&k);
  return static_cast<int>(k);
}

}  // namespace detail

inline void require_trained_classifier(const ModelState& m) {
  if (m.config.head != nn::HeadKind::GraphSoftmax) throw UntrainedModel("explanations need a graph classifier");
  if (m.adam.step == 0) throw UntrainedModel("model has never been trained");
}

// Class distribution of the model on a graph restricted to some edges, with
// optionally zeroed node rows and feature columns.
inline nn::RowVector predict_subgraph(const ModelState& m, const PreparedGraph& g, const std::vector<bool>& keep_edge,
                                      const std::vector<bool>& keep_node, const std::vector<bool>& keep_feat) {
  Matrix x = g.features;
  for (nn::Index i = 0; i < x.rows(); ++i)
    if (!keep_node.empty() && !keep_node[static_cast<std::size_t>(i)]) x.row(i).setZero();
  for (nn::Index k = 0; k < x.cols(); ++k)
    if (!keep_feat.empty() && !keep_feat[static_cast<std::size_t>(k)]) x.col(k).setZero();
  std::vector<nn::NodePair> edges;
  for (std::size_t e = 0; e < g.positives.size(); ++e) {
    const auto [s, d] = g.positives[e];
    if (!keep_edge.empty() && !keep_edge[e]) continue;
    if (!keep_node.empty() && (!keep_node[static_cast<std::size_t>(s)] || !keep_node[static_cast<std::size_t>(d)]))
      continue;
    edges.push_back(g.positives[e]);
  }
  const nn::Adjacency adj = nn::Adjacency::symmetric(static_cast<std::size_t>(x.rows()), edges);
  return nn::graph_probabilities(m, {&x, &adj, {}, {}});
}

inline nn::RowVector predict_full(const ModelState& m, const PreparedGraph& g) {
  return nn::graph_probabilities(m, g.view());
}

// GNNExplainer-style masks. Logits start at 0 (mask 0.5) and are trained with
// Adam to keep the model's own prediction under the masked input, regularised
// by lambda_size * mean(mask) + lambda_ent * mean(binary entropy) on both the
// edge mask and the feature mask.
inline ExplanationMask learn_masks(const ModelState& model, const PreparedGraph& g, const ExplainParams& hp = {}) {
  require_trained_classifier(model);
  ModelState m = model;  // gradients land here; the caller's model stays untouched
  ExplanationMask out;
  out.graph_id = g.graph->graph_id;
  out.predicted = detail::argmax(predict_full(model, g));

  const std::size_t ne = g.positives.size();
  const std::size_t nf = static_cast<std::size_t>(g.features.cols());
  std::vector<double> le(ne, 0.0), lf(nf, 0.0), se(ne), sf(nf);
  detail::VecAdam opt_e, opt_f;

  const auto objective = [&](bool backprop, std::vector<double>* ge, std::vector<double>* gf) {
    for (std::size_t i = 0; i < ne; ++i) se[i] = detail::sigmoid(le[i]);
    for (std::size_t k = 0; k < nf; ++k) sf[k] = detail::sigmoid(lf[k]);
    nn::GateGrads gg;
    const nn::GraphView gv{&g.features, &g.adj, se, sf};
    double loss = nn::graph_objective(m, gv, out.predicted, backprop, backprop ? &gg : nullptr);
    m.zero_grad();
    const auto reg = [&](const std::vector<double>& s, const std::vector<double>* dgate, std::vector<double>* grad) {
      if (s.empty()) return 0.0;
      const double n = static_cast<double>(s.size());
      double r = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) {
        r += (hp.size_coef * s[i] + hp.ent_coef * detail::entropy(s[i])) / n;
        if (grad) {
          const double ds = (*dgate)[i] + (hp.size_coef + hp.ent_coef * detail::entropy_grad(s[i])) / n;
          (*grad)[i] = ds * s[i] * (1.0 - s[i]);
        }
      }
      return r;
    };
    if (backprop) {
      ge->assign(ne, 0.0);
      gf->assign(nf, 0.0);
    }
    loss += reg(se, backprop ? &gg.edge : nullptr, backprop ? ge : nullptr);
    loss += reg(sf, backprop ? &gg.feat : nullptr, backprop ? gf : nullptr);
    return loss;
  };

  std::vector<double> ge, gf, history;
  out.initial_objective = objective(false, nullptr, nullptr);
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    history.push_back(objective(true, &ge, &gf));
    opt_e.step(le, ge, hp.lr);
    opt_f.step(lf, gf, hp.lr);
  }
  out.final_objective = objective(false, nullptr, nullptr);
  history.push_back(out.final_objective);
  const std::size_t window = std::min<std::size_t>(10, history.size() - 1);
  const double before = history[history.size() - 1 - window];
  out.converged = std::abs(before - out.final_objective) <= 1e-3 * std::max(1.0, std::abs(before));

  out.edge_mask.resize(ne);
  out.feat_mask.resize(nf);
  for (std::size_t i = 0; i < ne; ++i) out.edge_mask[i] = detail::sigmoid(le[i]);
  for (std::size_t k = 0; k < nf; ++k) out.feat_mask[k] = detail::sigmoid(lf[k]);
  return out;
}

// Mean of incident edge-mask values; 0 for isolated nodes.
inline std::vector<double> incident_edge_importance(std::size_t num_nodes, const std::vector<nn::NodePair>& edges,
                                                    const std::vector<double>& edge_mask) {
  std::vector<double> sum(num_nodes, 0.0), cnt(num_nodes, 0.0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    for (int v : {edges[e].first, edges[e].second}) {
      sum[static_cast<std::size_t>(v)] += edge_mask[e];
      cnt[static_cast<std::size_t>(v)] += 1.0;
    }
  }
  for (std::size_t i = 0; i < num_nodes; ++i) sum[i] = cnt[i] > 0.0 ? sum[i] / cnt[i] : 0.0;
  return sum;
}

// Node score for fidelity: incident-edge importance plus the feature-mask
// weighted share of the node's feature magnitude.
inline std::vector<double> node_scores(const PreparedGraph& g, const ExplanationMask& mask) {
  auto s = incident_edge_importance(static_cast<std::size_t>(g.features.rows()), g.positives, mask.edge_mask);
  for (nn::Index i = 0; i < g.features.rows(); ++i) {
    double num = 0.0, den = 0.0;
    for (nn::Index k = 0; k < g.features.cols(); ++k) {
      const double a = std::abs(g.features(i, k));
      num += mask.feat_mask[static_cast<std::size_t>(k)] * a;
      den += a;
    }
    if (den > 0.0) s[static_cast<std::size_t>(i)] += num / den;
  }
  return s;
}

// Indicator of the top ceil(keep_ratio * k) scores; ties go to lower index.
inline std::vector<bool> top_fraction(const std::vector<double>& scores, double keep_ratio) {
  if (keep_ratio < 0.0 || keep_ratio > 1.0) throw InvalidSpec("keep_ratio must lie in [0, 1]");
  const std::size_t k = scores.size();
  const auto take = static_cast<std::size_t>(std::ceil(keep_ratio * static_cast<double>(k) - 1e-12));
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<bool> chosen(k, false);
  for (std::size_t i = 0; i < std::min(take, k); ++i) chosen[order[i]] = true;
  return chosen;
}

// Correctness drop against the true label: Plus removes the important
// elements, Minus keeps only them. Each instance scores -1, 0 or 1.
inline double fidelity(const ModelState& m, const PreparedGraph& g, const ExplanationMask& mask, FidelityMode mode,
                       double keep_ratio, int label) {
  const auto correct = [&](const nn::RowVector& p) { return detail::argmax(p) == label ? 1.0 : 0.0; };
  const double full = correct(predict_full(m, g));
  const bool node_mode = mode == FidelityMode::NodePlus || mode == FidelityMode::NodeMinus;
  const bool plus = mode == FidelityMode::NodePlus || mode == FidelityMode::EdgePlus;
  std::vector<bool> important = node_mode ? top_fraction(node_scores(g, mask), keep_ratio)
                                          : top_fraction(mask.edge_mask, keep_ratio);
  std::vector<bool> keep(important.size());
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = plus ? !important[i] : important[i];
  const auto p = node_mode ? predict_subgraph(m, g, {}, keep, {}) : predict_subgraph(m, g, keep, {}, {});
  return full - correct(p);
}

// 1 - exp(-KL(p || q)) with both distributions clamped at 1e-12.
inline double gef_from_distributions(const nn::RowVector& p, const nn::RowVector& q) {
  double kl = 0.0;
  for (nn::Index k = 0; k < p.cols(); ++k) {
    const double pk = std::max(p(k), nn::kProbClamp);
    const double qk = std::max(q(k), nn::kProbClamp);
    kl += pk * std::log(pk / qk);
  }
  return std::clamp(1.0 - std::exp(-std::max(kl, 0.0)), 0.0, 1.0);
}

enum class GefScope { Both, EdgesOnly, FeaturesOnly };

// Unfaithfulness of the mask thresholded at 0.5: edges below are dropped,
// feature columns below are zeroed.
inline double gef(const ModelState& m, const PreparedGraph& g, const ExplanationMask& mask,
                  GefScope scope = GefScope::Both) {
  std::vector<bool> ke, kf;
  if (scope != GefScope::FeaturesOnly)
    for (double w : mask.edge_mask) ke.push_back(w >= 0.5);
  if (scope != GefScope::EdgesOnly)
    for (double w : mask.feat_mask) kf.push_back(w >= 0.5);
  return gef_from_distributions(predict_full(m, g), predict_subgraph(m, g, ke, {}, kf));
}

inline FaithfulnessScores faithfulness(const ModelState& m, const PreparedGraph& g, const ExplanationMask& mask,
                                       double keep_ratio, int label) {
  FaithfulnessScores s;
  s.node_fid_plus = fidelity(m, g, mask, FidelityMode::NodePlus, keep_ratio, label);
  s.node_fid_minus = fidelity(m, g, mask, FidelityMode::NodeMinus, keep_ratio, label);
  s.edge_fid_plus = fidelity(m, g, mask, FidelityMode::EdgePlus, keep_ratio, label);
  s.edge_fid_minus = fidelity(m, g, mask, FidelityMode::EdgeMinus, keep_ratio, label);
  s.gef = gef(m, g, mask, GefScope::Both);
  s.node_gef = gef(m, g, mask, GefScope::FeaturesOnly);
  s.edge_gef = gef(m, g, mask, GefScope::EdgesOnly);
  return s;
}

inline FaithfulnessScores mean_scores(const std::vector<FaithfulnessScores>& xs) {
  FaithfulnessScores r;
  if (xs.empty()) return r;
  for (const auto& x : xs) {
    r.node_fid_plus += x.node_fid_plus;
    r.node_fid_minus += x.node_fid_minus;
    r.edge_fid_plus += x.edge_fid_plus;
    r.edge_fid_minus += x.edge_fid_minus;
    r.gef += x.gef;
    r.node_gef += x.node_gef;
    r.edge_gef += x.edge_gef;
  }
  const double n = static_cast<double>(xs.size());
  for (double* f : {&r.node_fid_plus, &r.node_fid_minus, &r.edge_fid_plus, &r.edge_fid_minus, &r.gef, &r.node_gef,
                    &r.edge_gef})
    *f /= n;
  return r;
}

// ---------------------------------------------------------------------------
// Node importance by type

struct ImportanceSample {
  std::string type;
  Provenance provenance = Provenance::Unknown;
  double importance = 0.0;
};

struct TypeSummary {
  std::string type;
  Provenance provenance = Provenance::Unknown;
  std::size_t count = 0;
  double mean = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

struct ImportanceReport {
  std::vector<ImportanceSample> samples;  // graph order, then node order
  std::vector<TypeSummary> summary;       // sorted by (provenance, type)
};

// Linear-interpolation quantile of sorted values.
inline double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Per-type importance distributions grouped by provenance. With
// require_both_provenances the masks must cover a Human and an LLM graph.
inline ImportanceReport node_importance_by_type(const std::vector<ExplanationMask>& masks, const Corpus& corpus,
                                                bool require_both_provenances = true) {
  if (masks.empty()) throw InsufficientData("no explanation masks");
  ImportanceReport rep;
  bool human = false, llm = false;
  std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
  std::map<std::pair<std::string, std::string>, std::pair<std::string, Provenance>> keys;
  for (const auto& mask : masks) {
    const AssuranceGraph& g = corpus.at(mask.graph_id);
    human |= g.provenance == Provenance::Human;
    llm |= g.provenance == Provenance::LLM;
    const auto index = g.node_index();
    std::vector<nn::NodePair> edges;
    for (const auto& e : g.edges) edges.emplace_back(static_cast<int>(index.at(e.src)), static_cast<int>(index.at(e.dst)));
    if (edges.size() != mask.edge_mask.size()) throw ShapeMismatch("mask does not match graph '" + g.graph_id + "'");
    const auto imp = incident_edge_importance(g.nodes.size(), edges, mask.edge_mask);
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      const std::string type = g.nodes[i].type.name();
      rep.samples.push_back({type, g.provenance, imp[i]});
      const auto key = std::make_pair(to_string(g.provenance), type);
      groups[key].push_back(imp[i]);
      keys[key] = {type, g.provenance};
    }
  }
  if (require_both_provenances && !(human && llm))
    throw InsufficientData("importance comparison needs explanations for both human and LLM graphs");
  for (auto& [key, values] : groups) {
    std::sort(values.begin(), values.end());
    TypeSummary s;
    s.type = keys[key].first;
    s.provenance = keys[key].second;
    s.count = values.size();
    s.mean = detail::mean(values);
    s.q1 = quantile(values, 0.25);
    s.median = quantile(values, 0.5);
    s.q3 = quantile(values, 0.75);
    rep.summary.push_back(s);
  }
  return rep;
}

inline std::string importance_csv(const ImportanceReport& rep) {
  std::ostringstream os;
  os << "type,provenance,importance\n";
  for (const auto& s : rep.samples) {
    std::string type = s.type;
    if (type.find_first_of(",\"\n") != std::string::npos) {
      std::string q = "\"";
      for (char c : type) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      type = q + "\"";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", s.importance);
    os << type << ',' << to_string(s.provenance) << ',' << buf << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::ordered_json to_json(const FaithfulnessScores& s) {
  return {{"node_fid_plus", s.node_fid_plus}, {"node_fid_minus", s.node_fid_minus},
          {"edge_fid_plus", s.edge_fid_plus}, {"edge_fid_minus", s.edge_fid_minus},
          {"gef", s.gef},                     {"node_gef", s.node_gef},
          {"edge_gef", s.edge_gef}};
}

inline nlohmann::ordered_json explanation_json(const AssuranceGraph& g, const ExplanationMask& mask, int actual,
                                               const FaithfulnessScores& scores) {
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (std::size_t e = 0; e < g.edges.size(); ++e)
    edges.push_back({{"src", g.edges[e].src}, {"dst", g.edges[e].dst}, {"w", mask.edge_mask[e]}});
  const auto label = [](int c) { return c == 1 ? "llm" : "human"; };
  return {{"graph_id", g.graph_id},
          {"predicted", label(mask.predicted)},
          {"actual", label(actual)},
          {"edge_mask", std::move(edges)},
          {"feat_mask", mask.feat_mask},
          {"converged", mask.converged},
          {"scores", to_json(scores)}};
}

inline nlohmann::ordered_json to_json(const ImportanceReport& rep) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& s : rep.summary)
    arr.push_back({{"type", s.type},
                   {"provenance", to_string(s.provenance)},
                   {"count", s.count},
                   {"mean", s.mean},
                   {"q1", s.q1},
                   {"median", s.median},
                   {"q3", s.q3}});
  return arr;
}

// Node / Edge x Fid+ / Fid- / GEF, one row per model.
inline std::string format_faithfulness_table(const std::vector<std::pair<std::string, FaithfulnessScores>>& rows) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-10s  %-25s  %-25s\n", "", "Node", "Edge");
  os << buf;
  std::snprintf(buf, sizeof buf, "%-10s  %-7s  %-7s  %-7s  %-7s  %-7s  %-7s\n", "Model", "Fid+", "Fid-", "GEF", "Fid+",
                "Fid-", "GEF");
  os << buf << std::string(62, '-') << '\n';
  for (const auto& [model, s] : rows) {
    std::snprintf(buf, sizeof buf, "%-10s  %-7.3f  %-7.3f  %-7.3f  %-7.3f  %-7.3f  %-7.3f\n", model.c_str(),
                  s.node_fid_plus, s.node_fid_minus, s.node_gef, s.edge_fid_plus, s.edge_fid_minus, s.edge_gef);
    os << buf;
  }
  return os.str();
}

}  // namespace acase::explain
