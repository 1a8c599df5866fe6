#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "acase/tasks/train.hpp"

namespace acase::tasks {

enum class Task { Link, Classify };

inline std::string to_string(Task t) { return t == Task::Link ? "link" : "classify"; }

struct MetricsReport {
  Task task = Task::Link;
  std::string scenario;
  std::string model;
  std::vector<SeedResult> seeds;  // in the order the seeds were given
  MeanStd auc, f1, acc;
  bool std_flagged = false;  // fewer than two seeds, std reported as 0
};

// Parallelism cap: ACASE_THREADS if set to a positive integer, else the
// hardware concurrency.
inline unsigned thread_budget() {
  if (const char* env = std::getenv("ACASE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline MetricsReport summarize(Task task, const std::string& scenario, const std::string& model,
                               std::vector<SeedResult> rows) {
  MetricsReport r;
  r.task = task;
  r.scenario = scenario;
  r.model = model;
  r.seeds = std::move(rows);
  std::vector<double> auc, f1, acc;
  for (const auto& s : r.seeds) {
    if (!std::isnan(s.auc)) auc.push_back(s.auc);
    f1.push_back(s.f1);
    acc.push_back(s.acc);
  }
  r.auc = mean_std(auc);
  if (auc.empty()) r.auc.mean = std::numeric_limits<double>::quiet_NaN();
  r.f1 = mean_std(f1);
  r.acc = mean_std(acc);
  r.std_flagged = r.seeds.size() < 2;
  return r;
}

// One model per seed on a split fixed by split_seed. Seeds train
// concurrently (each on its own ModelState); results keep seed order, so the
// report does not depend on scheduling.
inline MetricsReport run_scenario(const Corpus& corpus, Task task, Scenario scenario, const ModelConfig& config,
                                  const TrainParams& hp, const std::vector<std::uint64_t>& seeds,
                                  std::uint64_t split_seed = 0, const SplitRatios& ratios = {},
                                  std::vector<ModelState>* models = nullptr) {
  if (seeds.empty()) throw InvalidSpec("run_scenario needs at least one seed");
  const ScenarioSplit split = make_split(corpus, scenario, split_seed, ratios);
  std::vector<std::optional<TrainOutput>> outs(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  const auto work = [&](std::size_t k) {
    try {
      outs[k] = task == Task::Link ? train_link(split, corpus, config, hp, seeds[k])
                                   : train_graph_classifier(split, corpus, config, hp, seeds[k]);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  const std::size_t workers = std::min<std::size_t>(thread_budget(), seeds.size());
  if (workers <= 1) {
    for (std::size_t k = 0; k < seeds.size(); ++k) work(k);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < seeds.size(); k += workers) work(k);
      });
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<SeedResult> rows;
  for (auto& o : outs) {
    rows.push_back(o->result);
    if (models) models->push_back(std::move(o->model));
  }
  return summarize(task, to_string(scenario), config.label(), std::move(rows));
}

inline nlohmann::ordered_json number_or_null(double x) {
  return std::isnan(x) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(x);
}

inline nlohmann::ordered_json to_json(const MetricsReport& r) {
  nlohmann::ordered_json seeds = nlohmann::ordered_json::array();
  for (const auto& s : r.seeds)
    seeds.push_back({{"seed", s.seed},
                     {"auc", number_or_null(s.auc)},
                     {"f1", s.f1},
                     {"acc", s.acc},
                     {"precision", s.precision},
                     {"recall", s.recall},
                     {"best_epoch", s.best_epoch},
                     {"short_negatives", s.short_negatives}});
  return {{"task", to_string(r.task)},
          {"scenario", r.scenario},
          {"model", r.model},
          {"seeds", std::move(seeds)},
          {"mean", {{"auc", number_or_null(r.auc.mean)}, {"f1", r.f1.mean}, {"acc", r.acc.mean}}},
          {"std", {{"auc", number_or_null(r.auc.std)}, {"f1", r.f1.std}, {"acc", r.acc.std}}},
          {"std_flagged", r.std_flagged}};
}

inline std::string mean_pm_std(const MeanStd& m) {
  if (std::isnan(m.mean)) return "n/a";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3f ± %.3f", m.mean, m.std);
  return buf;
}

// Aligned text table. Link reports: Model | Scenario | ROC-AUC | F1.
// Classification reports: Model | Acc | F1.
inline std::string format_table(const std::vector<MetricsReport>& reports) {
  std::vector<std::vector<std::string>> rows;
  const bool link = !reports.empty() && reports.front().task == Task::Link;
  rows.push_back(link ? std::vector<std::string>{"Model", "Scenario", "ROC-AUC", "F1"}
                      : std::vector<std::string>{"Model", "Acc", "F1"});
  for (const auto& r : reports) {
    if (link) rows.push_back({r.model, r.scenario, mean_pm_std(r.auc), mean_pm_std(r.f1)});
    else rows.push_back({r.model, mean_pm_std(r.acc), mean_pm_std(r.f1)});
  }
  // "±" is two bytes but one column wide.
  const auto width = [](const std::string& s) {
    std::size_t w = 0;
    for (unsigned char c : s) w += (c & 0xC0) != 0x80;
    return w;
  };
  std::vector<std::size_t> w(rows[0].size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) w[c] = std::max(w[c], width(row[c]));
  std::ostringstream os;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      os << rows[i][c];
      if (c + 1 < rows[i].size()) os << std::string(w[c] - width(rows[i][c]) + 2, ' ');
    }
    os << '\n';
    if (i == 0) {
      std::size_t total = 0;
      for (auto x : w) total += x + 2;
      os << std::string(total - 2, '-') << '\n';
    }
  }
  if (std::any_of(reports.begin(), reports.end(), [](const auto& r) { return r.std_flagged; }))
    os << "(single seed: std reported as 0)\n";
  return os.str();
}

}  // namespace acase::tasks
