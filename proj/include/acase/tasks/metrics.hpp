#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "acase/errors.hpp"
#include "acase/graph.hpp"
#include "acase/random.hpp"

namespace acase::tasks {

struct NegativeSample {
  std::vector<std::pair<std::string, std::string>> pairs;
  bool short_sample = false;  // fewer than k non-edges were available
};

// Uniform sample of min(k, available) non-edges without replacement, returned
// in the lexicographic order of candidate_non_edges.
inline NegativeSample sample_negatives(const AssuranceGraph& g, std::size_t k, std::uint64_t seed) {
  auto all = candidate_non_edges(g);
  NegativeSample out;
  out.short_sample = all.size() < k;
  Rng rng(seed);
  auto picks = rng.sample_indices(all.size(), std::min(k, all.size()));
  std::sort(picks.begin(), picks.end());
  for (std::size_t i : picks) out.pairs.push_back(std::move(all[i]));
  return out;
}

// Mann-Whitney AUC with average ranks for ties:
// P(pos > neg) + 0.5 P(pos == neg).
inline double roc_auc(std::span<const double> pos, std::span<const double> neg) {
  if (pos.empty() || neg.empty()) throw EmptyClass("roc_auc needs at least one positive and one negative score");
  std::vector<std::pair<double, bool>> all;
  all.reserve(pos.size() + neg.size());
  for (double s : pos) all.emplace_back(s, true);
  for (double s : neg) all.emplace_back(s, false);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1 .. j
    for (std::size_t k = i; k < j; ++k)
      if (all[k].second) rank_sum += avg_rank;
    i = j;
  }
  const double np = static_cast<double>(pos.size()), nn = static_cast<double>(neg.size());
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

// Convenience overload over parallel score/label arrays (label 1 = positive).
inline double roc_auc_labeled(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ShapeMismatch("scores/labels length mismatch");
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < scores.size(); ++i) (labels[i] ? pos : neg).push_back(scores[i]);
  return roc_auc(pos, neg);
}

struct BinaryMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// Predict positive iff score >= theta. Zero denominators give 0.
inline BinaryMetrics f1_at_threshold(std::span<const double> scores, std::span<const int> labels,
                                     double theta = 0.5) {
  if (scores.size() != labels.size()) throw ShapeMismatch("scores/labels length mismatch");
  BinaryMetrics m;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= theta;
    const bool truth = labels[i] != 0;
    if (pred && truth) ++m.tp;
    else if (pred) ++m.fp;
    else if (truth) ++m.fn;
    else ++m.tn;
  }
  const auto ratio = [](std::size_t a, std::size_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / b; };
  m.precision = ratio(m.tp, m.tp + m.fp);
  m.recall = ratio(m.tp, m.tp + m.fn);
  m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  m.accuracy = ratio(m.tp + m.tn, scores.size());
  return m;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for fewer than two values
};

inline MeanStd mean_std(std::span<const double> xs) {
  MeanStd r;
  if (xs.empty()) return r;
  r.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() < 2) return r;
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  r.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return r;
}

}  // namespace acase::tasks
