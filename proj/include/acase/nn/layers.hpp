#pragma once

#include <span>
#include <utility>
#include <vector>

#include "acase/nn/tensor.hpp"

namespace acase::nn {

// Message-passing structure. Every directed edge (s, d) is propagated in both
// directions, s -> d and d -> s; both messages carry the edge's index so an
// edge gate (explanation mask) scales them together.
struct Adjacency {
  struct Message {
    int src;
    int edge;
  };

  std::size_t num_nodes = 0;
  std::size_t num_edges = 0;
  std::vector<std::vector<Message>> incoming;

  static Adjacency symmetric(std::size_t n, std::span<const std::pair<int, int>> edges) {
    Adjacency a;
    a.num_nodes = n;
    a.num_edges = edges.size();
    a.incoming.resize(n);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto [s, d] = edges[e];
      if (s < 0 || d < 0 || static_cast<std::size_t>(s) >= n || static_cast<std::size_t>(d) >= n)
        throw ShapeMismatch("edge endpoint out of range");
      a.incoming[static_cast<std::size_t>(d)].push_back({s, static_cast<int>(e)});
      a.incoming[static_cast<std::size_t>(s)].push_back({d, static_cast<int>(e)});
    }
    return a;
  }
};

// Multiplicative gate on edge messages; empty span means every gate is 1.
inline double gate_of(std::span<const double> gate, int edge) {
  return gate.empty() ? 1.0 : gate[static_cast<std::size_t>(edge)];
}

// Everything a layer's backward pass needs from its forward pass.
struct LayerTrace {
  Matrix input;  // X
  Matrix proj;   // X W (GCN, GAT)
  Matrix agg;    // neighbour mean of X (SAGE)
  Matrix pre;    // pre-activation Z; output = ReLU(Z)
  std::vector<double> deg_inv_sqrt;  // GCN
  std::vector<std::size_t> offset;   // GAT: start of node i's attention slots
  std::vector<double> score;         // GAT: a_self.P_i + a_neigh.P_j per slot
  std::vector<double> alpha;         // GAT: attention weight per slot
};

struct LayerGrads {
  Matrix* d_input = nullptr;        // optional dL/dX
  std::vector<double>* d_gate = nullptr;  // optional dL/dgate, accumulated
};

inline void require_nodes(const Matrix& x, const Adjacency& adj) {
  if (static_cast<std::size_t>(x.rows()) != adj.num_nodes)
    throw ShapeMismatch("feature rows " + std::to_string(x.rows()) + " != node count " + std::to_string(adj.num_nodes));
}

// ---------------------------------------------------------------------------
// GCN: Z = D^-1/2 (A + I) D^-1/2 X W with degrees from the ungated adjacency
// and each edge message scaled by its gate.

inline Matrix gcn_forward(const Matrix& x, const Adjacency& adj, std::span<const double> gate, const Matrix& w,
                          LayerTrace& t) {
  require_nodes(x, adj);
  if (w.rows() != x.cols()) throw ShapeMismatch("GCN weight rows != feature dim");
  const std::size_t n = adj.num_nodes;
  t.input = x;
  t.proj = x * w;
  t.deg_inv_sqrt.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    t.deg_inv_sqrt[i] = 1.0 / std::sqrt(1.0 + static_cast<double>(adj.incoming[i].size()));
  t.pre.resize(t.proj.rows(), t.proj.cols());
  for (std::size_t i = 0; i < n; ++i) {
    const double di = t.deg_inv_sqrt[i];
    auto zi = t.pre.row(static_cast<Index>(i));
    zi = di * di * t.proj.row(static_cast<Index>(i));
    for (const auto& m : adj.incoming[i])
      zi += di * t.deg_inv_sqrt[static_cast<std::size_t>(m.src)] * gate_of(gate, m.edge) * t.proj.row(m.src);
  }
  return relu(t.pre);
}

inline void gcn_backward(const Matrix& d_out, const Adjacency& adj, std::span<const double> gate, const Matrix& w,
                         const LayerTrace& t, Matrix& d_w, LayerGrads g) {
  const Matrix dz = d_out.cwiseProduct((t.pre.array() > 0.0).cast<double>().matrix());
  Matrix dp = Matrix::Zero(t.proj.rows(), t.proj.cols());
  for (std::size_t i = 0; i < adj.num_nodes; ++i) {
    const double di = t.deg_inv_sqrt[i];
    const auto dzi = dz.row(static_cast<Index>(i));
    dp.row(static_cast<Index>(i)) += di * di * dzi;
    for (const auto& m : adj.incoming[i]) {
      const double c = di * t.deg_inv_sqrt[static_cast<std::size_t>(m.src)];
      dp.row(m.src) += c * gate_of(gate, m.edge) * dzi;
      if (g.d_gate) (*g.d_gate)[static_cast<std::size_t>(m.edge)] += c * dzi.dot(t.proj.row(m.src));
    }
  }
  d_w.noalias() += t.input.transpose() * dp;
  if (g.d_input) *g.d_input = dp * w.transpose();
}

// ---------------------------------------------------------------------------
// GraphSAGE (mean): Z = X W_self + mean_{j in N(i)} (gate * X_j) W_neigh.
// Isolated nodes get a zero aggregate.

inline Matrix sage_forward(const Matrix& x, const Adjacency& adj, std::span<const double> gate, const Matrix& w_self,
                           const Matrix& w_neigh, LayerTrace& t) {
  require_nodes(x, adj);
  if (w_self.rows() != x.cols() || w_neigh.rows() != x.cols() || w_self.cols() != w_neigh.cols())
    throw ShapeMismatch("SAGE weight shapes do not match feature dim");
  t.input = x;
  t.agg = Matrix::Zero(x.rows(), x.cols());
  for (std::size_t i = 0; i < adj.num_nodes; ++i) {
    const auto& in = adj.incoming[i];
    if (in.empty()) continue;
    auto ai = t.agg.row(static_cast<Index>(i));
    for (const auto& m : in) ai += gate_of(gate, m.edge) * x.row(m.src);
    ai /= static_cast<double>(in.size());
  }
  t.pre = x * w_self + t.agg * w_neigh;
  return relu(t.pre);
}

inline void sage_backward(const Matrix& d_out, const Adjacency& adj, std::span<const double> gate,
                          const Matrix& w_self, const Matrix& w_neigh, const LayerTrace& t, Matrix& d_w_self,
                          Matrix& d_w_neigh, LayerGrads g) {
  const Matrix dz = d_out.cwiseProduct((t.pre.array() > 0.0).cast<double>().matrix());
  d_w_self.noalias() += t.input.transpose() * dz;
  d_w_neigh.noalias() += t.agg.transpose() * dz;
  if (!g.d_input && !g.d_gate) return;
  const Matrix d_agg = dz * w_neigh.transpose();
  Matrix dx;
  if (g.d_input) dx = dz * w_self.transpose();
  for (std::size_t i = 0; i < adj.num_nodes; ++i) {
    const auto& in = adj.incoming[i];
    if (in.empty()) continue;
    const double inv = 1.0 / static_cast<double>(in.size());
    const auto dai = d_agg.row(static_cast<Index>(i));
    for (const auto& m : in) {
      if (g.d_input) dx.row(m.src) += inv * gate_of(gate, m.edge) * dai;
      if (g.d_gate) (*g.d_gate)[static_cast<std::size_t>(m.edge)] += inv * dai.dot(t.input.row(m.src));
    }
  }
  if (g.d_input) *g.d_input = std::move(dx);
}

// ---------------------------------------------------------------------------
// GAT, one head: e_ij = LeakyReLU(a_self.P_i + a_neigh.P_j) over j in N(i) and
// i itself, alpha = softmax_j(e_ij), Z_i = sum_j alpha_ij gate_ij P_j, P = X W.
// Slot 0 of every node is its self-loop (gate 1).

inline constexpr double kGatSlope = 0.2;

inline Matrix gat_forward(const Matrix& x, const Adjacency& adj, std::span<const double> gate, const Matrix& w,
                          const Matrix& att_self, const Matrix& att_neigh, LayerTrace& t) {
  require_nodes(x, adj);
  if (w.rows() != x.cols()) throw ShapeMismatch("GAT weight rows != feature dim");
  require_shape(att_self, 1, w.cols(), "GAT att_self");
  require_shape(att_neigh, 1, w.cols(), "GAT att_neigh");
  const std::size_t n = adj.num_nodes;
  t.input = x;
  t.proj = x * w;
  const Eigen::VectorXd src_score = t.proj * att_self.transpose();
  const Eigen::VectorXd dst_score = t.proj * att_neigh.transpose();
  t.offset.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) t.offset[i + 1] = t.offset[i] + 1 + adj.incoming[i].size();
  t.score.assign(t.offset[n], 0.0);
  t.alpha.assign(t.offset[n], 0.0);
  t.pre = Matrix::Zero(t.proj.rows(), t.proj.cols());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t base = t.offset[i];
    const auto& in = adj.incoming[i];
    const auto I = static_cast<Index>(i);
    t.score[base] = src_score(I) + dst_score(I);
    for (std::size_t k = 0; k < in.size(); ++k) t.score[base + 1 + k] = src_score(I) + dst_score(in[k].src);
    double mx = -1e300;
    for (std::size_t k = base; k < t.offset[i + 1]; ++k) mx = std::max(mx, leaky_relu(t.score[k], kGatSlope));
    double sum = 0.0;
    for (std::size_t k = base; k < t.offset[i + 1]; ++k) {
      t.alpha[k] = std::exp(leaky_relu(t.score[k], kGatSlope) - mx);
      sum += t.alpha[k];
    }
    for (std::size_t k = base; k < t.offset[i + 1]; ++k) t.alpha[k] /= sum;
    auto zi = t.pre.row(I);
    zi += t.alpha[base] * t.proj.row(I);
    for (std::size_t k = 0; k < in.size(); ++k)
      zi += t.alpha[base + 1 + k] * gate_of(gate, in[k].edge) * t.proj.row(in[k].src);
  }
  return relu(t.pre);
}

inline void gat_backward(const Matrix& d_out, const Adjacency& adj, std::span<const double> gate, const Matrix& w,
                         const Matrix& att_self, const Matrix& att_neigh, const LayerTrace& t, Matrix& d_w,
                         Matrix& d_att_self, Matrix& d_att_neigh, LayerGrads g) {
  const Matrix dz = d_out.cwiseProduct((t.pre.array() > 0.0).cast<double>().matrix());
  Matrix dp = Matrix::Zero(t.proj.rows(), t.proj.cols());
  std::vector<double> d_alpha;
  std::vector<int> src;
  std::vector<double> gates;
  for (std::size_t i = 0; i < adj.num_nodes; ++i) {
    const auto I = static_cast<Index>(i);
    const std::size_t base = t.offset[i];
    const std::size_t slots = t.offset[i + 1] - base;
    const auto& in = adj.incoming[i];
    const auto dzi = dz.row(I);
    src.assign(slots, static_cast<int>(i));
    gates.assign(slots, 1.0);
    for (std::size_t k = 0; k < in.size(); ++k) {
      src[k + 1] = in[k].src;
      gates[k + 1] = gate_of(gate, in[k].edge);
    }
    d_alpha.assign(slots, 0.0);
    double weighted = 0.0;
    for (std::size_t k = 0; k < slots; ++k) {
      const double a = t.alpha[base + k];
      const double dot = dzi.dot(t.proj.row(src[k]));
      d_alpha[k] = gates[k] * dot;
      weighted += a * d_alpha[k];
      dp.row(src[k]) += a * gates[k] * dzi;
      if (g.d_gate && k > 0) (*g.d_gate)[static_cast<std::size_t>(in[k - 1].edge)] += a * dot;
    }
    for (std::size_t k = 0; k < slots; ++k) {
      const double a = t.alpha[base + k];
      const double s = t.score[base + k];
      const double ds = a * (d_alpha[k] - weighted) * (s > 0.0 ? 1.0 : kGatSlope);
      if (ds == 0.0) continue;
      d_att_self += ds * t.proj.row(I);
      d_att_neigh += ds * t.proj.row(src[k]);
      dp.row(I) += ds * att_self;
      dp.row(src[k]) += ds * att_neigh;
    }
  }
  d_w.noalias() += t.input.transpose() * dp;
  if (g.d_input) *g.d_input = dp * w.transpose();
}

// ---------------------------------------------------------------------------
// Single-call forms over a plain edge list.

inline Matrix gcn_layer(const Matrix& h, std::span<const std::pair<int, int>> edges, const Matrix& w) {
  LayerTrace t;
  return gcn_forward(h, Adjacency::symmetric(static_cast<std::size_t>(h.rows()), edges), {}, w, t);
}

inline Matrix sage_layer(const Matrix& h, std::span<const std::pair<int, int>> edges, const Matrix& w_self,
                         const Matrix& w_neigh) {
  LayerTrace t;
  return sage_forward(h, Adjacency::symmetric(static_cast<std::size_t>(h.rows()), edges), {}, w_self, w_neigh, t);
}

inline Matrix gat_layer(const Matrix& h, std::span<const std::pair<int, int>> edges, const Matrix& w,
                        const Matrix& att_self, const Matrix& att_neigh) {
  LayerTrace t;
  return gat_forward(h, Adjacency::symmetric(static_cast<std::size_t>(h.rows()), edges), {}, w, att_self, att_neigh,
                     t);
}

}  // namespace acase::nn
