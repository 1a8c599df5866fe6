#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "acase/errors.hpp"
#include "acase/nn/heads.hpp"
#include "acase/nn/layers.hpp"
#include "acase/nn/tensor.hpp"
#include "acase/random.hpp"

namespace acase::nn {

enum class Arch { GCN, SAGE, GAT };
enum class HeadKind { LinkBilinear, GraphSoftmax };

inline std::string to_string(Arch a) {
  switch (a) {
    case Arch::GCN: return "gcn";
    case Arch::SAGE: return "sage";
    case Arch::GAT: return "gat";
  }
  return "gcn";
}

inline Arch parse_arch(const std::string& s) {
  if (s == "gcn" || s == "GCN") return Arch::GCN;
  if (s == "sage" || s == "SAGE") return Arch::SAGE;
  if (s == "gat" || s == "GAT") return Arch::GAT;
  throw InvalidSpec("unknown architecture '" + s + "' (expected gcn|sage|gat)");
}

inline std::string to_string(HeadKind h) { return h == HeadKind::LinkBilinear ? "link" : "graph"; }

struct ModelConfig {
  Arch arch = Arch::SAGE;
  int num_layers = 1;
  int hidden = 256;
  int heads = 1;  // GAT attention heads; only 1 is supported
  HeadKind head = HeadKind::LinkBilinear;
  int num_classes = 2;

  void validate() const {
    if (hidden < 1) throw InvalidSpec("hidden size must be >= 1");
    if (num_layers < 1) throw InvalidSpec("need at least one GNN layer");
    if (heads != 1) throw InvalidSpec("only single-head attention is supported");
    if (num_classes < 2) throw InvalidSpec("classifier needs at least two classes");
  }

  std::string label() const { return to_string(arch) + "-" + std::to_string(num_layers); }
};

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::uint64_t step = 0;
};

struct ModelState {
  ModelConfig config;
  std::size_t input_dim = 0;
  std::vector<Parameter> params;
  AdamState adam;
  std::uint64_t seed = 0;

  std::size_t params_per_layer() const {
    switch (config.arch) {
      case Arch::GCN: return 1;
      case Arch::SAGE: return 2;
      case Arch::GAT: return 3;
    }
    return 1;
  }
  std::size_t layer_param(int layer, std::size_t k = 0) const {
    return static_cast<std::size_t>(layer) * params_per_layer() + k;
  }
  std::size_t head_param(std::size_t k = 0) const { return layer_param(config.num_layers) + k; }

  Parameter& param(const std::string& name) {
    for (auto& p : params)
      if (p.name == name) return p;
    throw InvalidSpec("no parameter named '" + name + "'");
  }
  const Parameter& param(const std::string& name) const { return const_cast<ModelState*>(this)->param(name); }

  void zero_grad() {
    for (auto& p : params) p.grad.setZero();
  }
};

inline ModelState init_model(const ModelConfig& config, std::size_t input_dim, std::uint64_t seed) {
  config.validate();
  if (input_dim == 0) throw InvalidSpec("input feature dimension must be >= 1");
  ModelState m;
  m.config = config;
  m.input_dim = input_dim;
  m.seed = seed;
  Rng rng(derive_seed(seed, 0x1a17));
  const Index h = config.hidden;
  for (int l = 0; l < config.num_layers; ++l) {
    const Index in = l == 0 ? static_cast<Index>(input_dim) : h;
    const std::string pre = "layer" + std::to_string(l) + ".";
    switch (config.arch) {
      case Arch::GCN:
        m.params.emplace_back(pre + "weight", glorot(in, h, rng));
        break;
      case Arch::SAGE:
        m.params.emplace_back(pre + "w_self", glorot(in, h, rng));
        m.params.emplace_back(pre + "w_neigh", glorot(in, h, rng));
        break;
      case Arch::GAT:
        m.params.emplace_back(pre + "weight", glorot(in, h, rng));
        m.params.emplace_back(pre + "att_self", glorot(1, h, rng));
        m.params.emplace_back(pre + "att_neigh", glorot(1, h, rng));
        break;
    }
  }
  if (config.head == HeadKind::LinkBilinear) {
    m.params.emplace_back("decoder.weight", glorot(h, h, rng));
  } else {
    m.params.emplace_back("classifier.weight", glorot(h, config.num_classes, rng));
    m.params.emplace_back("classifier.bias", Matrix::Zero(1, config.num_classes));
  }
  for (const auto& p : m.params) {
    m.adam.m.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
    m.adam.v.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
  }
  return m;
}

// One graph as seen by the encoder. Gates are optional explanation masks:
// edge_gate scales edge messages, feat_gate scales feature columns.
struct GraphView {
  const Matrix* features = nullptr;
  const Adjacency* adj = nullptr;
  std::span<const double> edge_gate;
  std::span<const double> feat_gate;
};

struct GateGrads {
  std::vector<double> edge;
  std::vector<double> feat;
};

struct ForwardTrace {
  Matrix gated_input;
  std::vector<LayerTrace> layers;
  Matrix output;
};

inline Matrix encode(const ModelState& m, const GraphView& gv, ForwardTrace& tr) {
  const Matrix& x = *gv.features;
  if (static_cast<std::size_t>(x.cols()) != m.input_dim)
    throw ShapeMismatch("features have dim " + std::to_string(x.cols()) + ", model expects " +
                        std::to_string(m.input_dim));
  if (!gv.edge_gate.empty() && gv.edge_gate.size() != gv.adj->num_edges)
    throw ShapeMismatch("edge gate length != edge count");
  if (!gv.feat_gate.empty() && gv.feat_gate.size() != m.input_dim)
    throw ShapeMismatch("feature gate length != feature dim");
  tr.gated_input = x;
  if (!gv.feat_gate.empty())
    for (Index k = 0; k < x.cols(); ++k) tr.gated_input.col(k) *= gv.feat_gate[static_cast<std::size_t>(k)];
  tr.layers.assign(static_cast<std::size_t>(m.config.num_layers), LayerTrace{});
  Matrix h = tr.gated_input;
  for (int l = 0; l < m.config.num_layers; ++l) {
    auto& t = tr.layers[static_cast<std::size_t>(l)];
    const auto p = [&](std::size_t k) -> const Matrix& { return m.params[m.layer_param(l, k)].value; };
    switch (m.config.arch) {
      case Arch::GCN: h = gcn_forward(h, *gv.adj, gv.edge_gate, p(0), t); break;
      case Arch::SAGE: h = sage_forward(h, *gv.adj, gv.edge_gate, p(0), p(1), t); break;
      case Arch::GAT: h = gat_forward(h, *gv.adj, gv.edge_gate, p(0), p(1), p(2), t); break;
    }
  }
  tr.output = h;
  return h;
}

inline void encode_backward(ModelState& m, const GraphView& gv, const ForwardTrace& tr, Matrix d_h,
                            GateGrads* gg) {
  if (gg) {
    gg->edge.assign(gv.adj->num_edges, 0.0);
    gg->feat.assign(m.input_dim, 0.0);
  }
  for (int l = m.config.num_layers - 1; l >= 0; --l) {
    const auto& t = tr.layers[static_cast<std::size_t>(l)];
    Matrix d_in;
    LayerGrads lg;
    if (l > 0 || gg) lg.d_input = &d_in;
    if (gg) lg.d_gate = &gg->edge;
    const auto p = [&](std::size_t k) -> Parameter& { return m.params[m.layer_param(l, k)]; };
    switch (m.config.arch) {
      case Arch::GCN: gcn_backward(d_h, *gv.adj, gv.edge_gate, p(0).value, t, p(0).grad, lg); break;
      case Arch::SAGE:
        sage_backward(d_h, *gv.adj, gv.edge_gate, p(0).value, p(1).value, t, p(0).grad, p(1).grad, lg);
        break;
      case Arch::GAT:
        gat_backward(d_h, *gv.adj, gv.edge_gate, p(0).value, p(1).value, p(2).value, t, p(0).grad, p(1).grad,
                     p(2).grad, lg);
        break;
    }
    d_h = std::move(d_in);
  }
  if (gg) {
    const Matrix& x = *gv.features;
    for (Index k = 0; k < x.cols(); ++k) gg->feat[static_cast<std::size_t>(k)] = d_h.col(k).dot(x.col(k));
  }
}

// Smallest |pre-activation| over every ReLU/LeakyReLU site; used to keep
// finite-difference probes away from kinks.
inline double min_abs_preactivation(const ForwardTrace& tr) {
  double mn = std::numeric_limits<double>::infinity();
  for (const auto& t : tr.layers) {
    if (t.pre.size() > 0) mn = std::min(mn, t.pre.cwiseAbs().minCoeff());
    for (double s : t.score) mn = std::min(mn, std::abs(s));
  }
  return mn;
}

// ---------------------------------------------------------------------------
// Link head

using NodePair = std::pair<int, int>;

inline std::vector<double> link_logits(const ModelState& m, const Matrix& h, std::span<const NodePair> pairs) {
  const Matrix& w = m.params[m.head_param()].value;
  const Matrix hw = h * w;
  std::vector<double> z(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) z[k] = hw.row(pairs[k].first).dot(h.row(pairs[k].second));
  return z;
}

inline std::vector<double> link_probabilities(const ModelState& m, const GraphView& gv, std::span<const NodePair> pairs) {
  if (m.config.head != HeadKind::LinkBilinear) throw InvalidSpec("model has no link head");
  ForwardTrace tr;
  const Matrix h = encode(m, gv, tr);
  auto z = link_logits(m, h, pairs);
  for (double& v : z) v = sigmoid(v);
  return z;
}

// Mean BCE over scored pairs; accumulates parameter gradients when backprop.
inline double link_objective(ModelState& m, const GraphView& gv, std::span<const NodePair> pairs,
                             std::span<const double> labels, bool backprop, GateGrads* gg = nullptr) {
  if (m.config.head != HeadKind::LinkBilinear) throw InvalidSpec("model has no link head");
  if (pairs.size() != labels.size()) throw ShapeMismatch("pairs/labels length mismatch");
  if (pairs.empty()) return 0.0;
  ForwardTrace tr;
  const Matrix h = encode(m, gv, tr);
  const auto z = link_logits(m, h, pairs);
  const double n = static_cast<double>(pairs.size());
  double loss = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) loss += bce_with_logit(z[k], labels[k]) / n;
  if (!backprop) return loss;

  Parameter& w = m.params[m.head_param()];
  Matrix d_h = Matrix::Zero(h.rows(), h.cols());
  const Matrix hw = h * w.value;
  const Matrix hwt = h * w.value.transpose();
  for (std::size_t k = 0; k < z.size(); ++k) {
    const double dz = (sigmoid(z[k]) - labels[k]) / n;
    const auto [s, d] = pairs[k];
    d_h.row(s) += dz * hwt.row(d);
    d_h.row(d) += dz * hw.row(s);
    w.grad.noalias() += dz * h.row(s).transpose() * h.row(d);
  }
  encode_backward(m, gv, tr, std::move(d_h), gg);
  return loss;
}

// ---------------------------------------------------------------------------
// Graph classification head

inline RowVector graph_logits(const ModelState& m, const Matrix& h) {
  const Matrix& w = m.params[m.head_param(0)].value;
  const Matrix& b = m.params[m.head_param(1)].value;
  return mean_readout(h) * w + b;
}

inline RowVector graph_probabilities(const ModelState& m, const GraphView& gv) {
  if (m.config.head != HeadKind::GraphSoftmax) throw InvalidSpec("model has no graph head");
  ForwardTrace tr;
  return softmax(graph_logits(m, encode(m, gv, tr)));
}

// CE of the graph prediction against label.
inline double graph_objective(ModelState& m, const GraphView& gv, int label, bool backprop, GateGrads* gg = nullptr) {
  if (m.config.head != HeadKind::GraphSoftmax) throw InvalidSpec("model has no graph head");
  if (label < 0 || label >= m.config.num_classes) throw InvalidSpec("class label out of range");
  ForwardTrace tr;
  const Matrix h = encode(m, gv, tr);
  const RowVector hg = mean_readout(h);
  Parameter& w = m.params[m.head_param(0)];
  Parameter& b = m.params[m.head_param(1)];
  const RowVector logits = hg * w.value + b.value;
  const double loss = ce_with_logits(logits, label);
  if (!backprop) return loss;
  RowVector d_logits = softmax(logits);
  d_logits(label) -= 1.0;
  w.grad.noalias() += hg.transpose() * d_logits;
  b.grad += d_logits;
  const RowVector d_hg = d_logits * w.value.transpose();
  Matrix d_h = d_hg.replicate(h.rows(), 1) / static_cast<double>(h.rows());
  encode_backward(m, gv, tr, std::move(d_h), gg);
  return loss;
}

}  // namespace acase::nn
