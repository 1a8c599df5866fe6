#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "acase/errors.hpp"
#include "acase/graph.hpp"

namespace acase::quality {

using EdgeSet = std::set<std::pair<std::string, std::string>>;

struct MatchedPair {
  std::size_t human = 0;  // row index into H.nodes
  std::size_t llm = 0;    // column index into L.nodes
  double similarity = 0.0;
};

struct MatchResult {
  std::vector<MatchedPair> pairs;
  double node_recall = 0.0;
  EdgeSet human_edges_projected;  // E_H^M, in L's id space
  EdgeSet llm_edges_restricted;   // E_L^M
};

struct EdgePRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t intersection_size = 0;
};

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

inline const std::vector<double>& feature_of(const ArgNode& n) {
  if (!n.feature) throw MissingFeature("node '" + n.id + "' has no feature vector");
  return *n.feature;
}

// Raw cosine between node features, rows = H nodes, cols = L nodes.
inline Eigen::MatrixXd cosine_matrix(const std::vector<ArgNode>& h_nodes, const std::vector<ArgNode>& l_nodes) {
  Eigen::MatrixXd c(h_nodes.size(), l_nodes.size());
  std::size_t dim = 0;
  bool have_dim = false;
  for (const auto* side : {&h_nodes, &l_nodes})
    for (const auto& n : *side) {
      const auto& f = feature_of(n);
      if (!have_dim) {
        dim = f.size();
        have_dim = true;
      } else if (f.size() != dim) {
        throw ShapeMismatch("node '" + n.id + "' feature dimension " + std::to_string(f.size()) + " != " +
                            std::to_string(dim));
      }
    }
  for (std::size_t i = 0; i < h_nodes.size(); ++i)
    for (std::size_t j = 0; j < l_nodes.size(); ++j)
      c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          cosine(*h_nodes[i].feature, *l_nodes[j].feature);
  return c;
}

// s(h, l) in [0, 1]: (cos + 1) / 2, or exactly 1 when the texts are identical.
inline Eigen::MatrixXd similarity_matrix(const std::vector<ArgNode>& h_nodes, const std::vector<ArgNode>& l_nodes) {
  Eigen::MatrixXd s = cosine_matrix(h_nodes, l_nodes);
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    for (Eigen::Index j = 0; j < s.cols(); ++j)
      s(i, j) = h_nodes[static_cast<std::size_t>(i)].text == l_nodes[static_cast<std::size_t>(j)].text
                    ? 1.0
                    : (s(i, j) + 1.0) / 2.0;
  return s;
}

namespace detail {

// Minimum-cost assignment of every row to a distinct column (rows <= cols),
// shortest augmenting path with potentials. Returns col index per row.
inline std::vector<std::size_t> min_cost_assignment(const Eigen::MatrixXd& cost) {
  const auto n = static_cast<std::size_t>(cost.rows());
  const auto m = static_cast<std::size_t>(cost.cols());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= m; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace detail

// One-to-one matching maximising total similarity over pairs with
// sim >= tau. Pairs below tau are given weight 0 for the assignment and then
// discarded, which leaves the optimum over admissible matchings unchanged.
// Returned pairs are sorted by human row.
inline std::vector<MatchedPair> match_nodes(const Eigen::MatrixXd& sim, double tau) {
  std::vector<MatchedPair> out;
  if (sim.rows() == 0 || sim.cols() == 0) return out;
  const bool transpose = sim.rows() > sim.cols();
  Eigen::MatrixXd w = transpose ? Eigen::MatrixXd(sim.transpose()) : sim;
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      if (w(i, j) < tau) w(i, j) = 0.0;
  const auto assign = detail::min_cost_assignment(-w);
  for (std::size_t r = 0; r < assign.size(); ++r) {
    const std::size_t h = transpose ? assign[r] : r;
    const std::size_t l = transpose ? r : assign[r];
    const double s = sim(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(l));
    if (s >= tau) out.push_back({h, l, s});
  }
  std::sort(out.begin(), out.end(), [](const MatchedPair& a, const MatchedPair& b) { return a.human < b.human; });
  return out;
}

inline double total_similarity(const std::vector<MatchedPair>& m) {
  double t = 0.0;
  for (const auto& p : m) t += p.similarity;
  return t;
}

// E_H^M: human edges with both endpoints matched, renamed into L's ids.
// E_L^M: LLM edges with both endpoints in the range of the matching.
inline std::pair<EdgeSet, EdgeSet> project_edges(const AssuranceGraph& H, const AssuranceGraph& L,
                                                 const std::vector<MatchedPair>& m) {
  std::map<std::string, std::string> h_to_l;
  std::set<std::string> l_range;
  for (const auto& p : m) {
    h_to_l[H.nodes[p.human].id] = L.nodes[p.llm].id;
    l_range.insert(L.nodes[p.llm].id);
  }
  EdgeSet eh, el;
  for (const auto& e : H.edges) {
    const auto a = h_to_l.find(e.src), b = h_to_l.find(e.dst);
    if (a != h_to_l.end() && b != h_to_l.end()) eh.emplace(a->second, b->second);
  }
  for (const auto& e : L.edges)
    if (l_range.count(e.src) && l_range.count(e.dst)) el.emplace(e.src, e.dst);
  return {std::move(eh), std::move(el)};
}

inline EdgePRF edge_prf(const EdgeSet& human_projected, const EdgeSet& llm_restricted) {
  EdgePRF r;
  for (const auto& e : llm_restricted)
    if (human_projected.count(e)) ++r.intersection_size;
  const auto inter = static_cast<double>(r.intersection_size);
  r.precision = llm_restricted.empty() ? 0.0 : inter / static_cast<double>(llm_restricted.size());
  r.recall = human_projected.empty() ? 0.0 : inter / static_cast<double>(human_projected.size());
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

struct PairQuality {
  std::string human_id;
  std::string llm_id;
  double cosine = 0.0;  // mean raw cosine over matched pairs
  double node_recall = 0.0;
  EdgePRF edges;
};

inline PairQuality compare_graphs(const AssuranceGraph& H, const AssuranceGraph& L, double tau,
                                  MatchResult* detail_out = nullptr) {
  const Eigen::MatrixXd cos = cosine_matrix(H.nodes, L.nodes);
  const Eigen::MatrixXd sim = similarity_matrix(H.nodes, L.nodes);
  MatchResult mr;
  mr.pairs = match_nodes(sim, tau);
  mr.node_recall = H.nodes.empty() ? 0.0 : static_cast<double>(mr.pairs.size()) / static_cast<double>(H.nodes.size());
  std::tie(mr.human_edges_projected, mr.llm_edges_restricted) = project_edges(H, L, mr.pairs);

  PairQuality q;
  q.human_id = H.graph_id;
  q.llm_id = L.graph_id;
  q.node_recall = mr.node_recall;
  q.edges = edge_prf(mr.human_edges_projected, mr.llm_edges_restricted);
  for (const auto& p : mr.pairs)
    q.cosine += cos(static_cast<Eigen::Index>(p.human), static_cast<Eigen::Index>(p.llm));
  if (!mr.pairs.empty()) q.cosine /= static_cast<double>(mr.pairs.size());
  if (detail_out) *detail_out = std::move(mr);
  return q;
}

struct QualityRow {
  std::string source_tag;
  std::size_t num_pairs = 0;
  double cosine = 0.0;
  double node_recall = 0.0;
  double edge_prec = 0.0;
  double edge_rec = 0.0;
  double edge_f1 = 0.0;
};

struct QualityReport {
  double tau = 0.5;
  std::vector<PairQuality> pairs;  // sorted by (llm id, human id)
  std::vector<QualityRow> rows;    // one per LLM-side source_tag, sorted
};

// Unweighted per-source means over (human, llm) graph pairs.
inline QualityReport corpus_quality_report(
    const std::vector<std::pair<const AssuranceGraph*, const AssuranceGraph*>>& graph_pairs, double tau) {
  QualityReport rep;
  rep.tau = tau;
  std::vector<std::pair<std::string, PairQuality>> tagged;
  for (const auto& [h, l] : graph_pairs) tagged.emplace_back(l->source_tag, compare_graphs(*h, *l, tau));
  std::sort(tagged.begin(), tagged.end(), [](const auto& a, const auto& b) {
    return std::tie(a.second.llm_id, a.second.human_id) < std::tie(b.second.llm_id, b.second.human_id);
  });
  std::map<std::string, QualityRow> rows;
  for (const auto& [tag, q] : tagged) {
    auto& r = rows[tag];
    r.source_tag = tag;
    ++r.num_pairs;
    r.cosine += q.cosine;
    r.node_recall += q.node_recall;
    r.edge_prec += q.edges.precision;
    r.edge_rec += q.edges.recall;
    r.edge_f1 += q.edges.f1;
    rep.pairs.push_back(q);
  }
  for (auto& [tag, r] : rows) {
    const auto n = static_cast<double>(r.num_pairs);
    r.cosine /= n;
    r.node_recall /= n;
    r.edge_prec /= n;
    r.edge_rec /= n;
    r.edge_f1 /= n;
    rep.rows.push_back(r);
  }
  return rep;
}

}  // namespace acase::quality
