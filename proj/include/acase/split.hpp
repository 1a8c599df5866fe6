#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "acase/corpus.hpp"
#include "acase/errors.hpp"
#include "acase/random.hpp"

namespace acase {

enum class Scenario { HumanToHuman, LLMToHuman, MixToHuman, Custom };

inline std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::HumanToHuman: return "H->H";
    case Scenario::LLMToHuman: return "M->H";
    case Scenario::MixToHuman: return "Mix->H";
    case Scenario::Custom: return "custom";
  }
  return "custom";
}

inline Scenario parse_scenario(const std::string& s) {
  if (s == "hh" || s == "human" || s == "H->H") return Scenario::HumanToHuman;
  if (s == "mh" || s == "llm" || s == "M->H") return Scenario::LLMToHuman;
  if (s == "mix" || s == "Mix->H") return Scenario::MixToHuman;
  if (s == "custom" || s == "all") return Scenario::Custom;
  throw InvalidSpec("unknown scenario '" + s + "' (expected hh|mh|mix|custom)");
}

struct SplitRatios {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

struct ScenarioSplit {
  Scenario name = Scenario::Custom;
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
};

namespace detail {

// Shuffles ids and cuts them into train/val/test by rounded ratio counts.
// Every part with a positive ratio gets at least one graph when there are
// enough graphs to go round.
inline std::array<std::vector<std::string>, 3> partition(std::vector<std::string> ids, const SplitRatios& r,
                                                         Rng& rng) {
  std::sort(ids.begin(), ids.end());
  rng.shuffle(ids);
  const double total = r.train + r.val + r.test;
  const std::array<double, 3> ratio = {r.train / total, r.val / total, r.test / total};
  const auto n = static_cast<long>(ids.size());
  std::array<long, 3> count{};
  count[0] = std::lround(static_cast<double>(n) * ratio[0]);
  count[1] = std::lround(static_cast<double>(n) * ratio[1]);
  count[1] = std::min(count[1], n - count[0]);
  count[2] = n - count[0] - count[1];
  const long positive = std::count_if(ratio.begin(), ratio.end(), [](double x) { return x > 0.0; });
  if (n >= positive) {
    for (int k = 0; k < 3; ++k) {
      if (ratio[k] <= 0.0 || count[k] > 0) continue;
      const int donor = static_cast<int>(std::max_element(count.begin(), count.end()) - count.begin());
      --count[donor];
      ++count[k];
    }
  }
  std::array<std::vector<std::string>, 3> parts;
  long pos = 0;
  for (int k = 0; k < 3; ++k) {
    parts[k].assign(ids.begin() + pos, ids.begin() + pos + count[k]);
    std::sort(parts[k].begin(), parts[k].end());
    pos += count[k];
  }
  return parts;
}

inline void append(std::vector<std::string>& dst, const std::vector<std::string>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
  std::sort(dst.begin(), dst.end());
}

}  // namespace detail

// Human and LLM graphs are each partitioned once per seed; every scenario is
// assembled from those two partitions, so the held-out human test set is the
// same for H->H, M->H and Mix->H. Custom stacks both partitions (stratified by
// provenance) and is what graph classification uses.
inline ScenarioSplit make_split(const Corpus& c, Scenario scenario, std::uint64_t seed,
                                const SplitRatios& ratios = {}) {
  std::vector<std::string> human, llm;
  for (const auto& g : c.graphs) {
    if (g.provenance == Provenance::Human) human.push_back(g.graph_id);
    else if (g.provenance == Provenance::LLM) llm.push_back(g.graph_id);
  }
  const bool need_llm = scenario == Scenario::LLMToHuman || scenario == Scenario::MixToHuman;
  if (human.empty() && scenario != Scenario::Custom)
    throw InsufficientData(to_string(scenario) + " split needs human graphs, corpus has none");
  if (need_llm && llm.empty()) throw InsufficientData(to_string(scenario) + " split needs LLM graphs, corpus has none");
  if (scenario == Scenario::Custom && human.empty() && llm.empty())
    throw InsufficientData("corpus has no human or LLM graphs");

  Rng rng_h(derive_seed(seed, 0x4855));
  Rng rng_m(derive_seed(seed, 0x4d4d));
  const auto hp = detail::partition(human, ratios, rng_h);
  const auto mp = detail::partition(llm, ratios, rng_m);

  ScenarioSplit s;
  s.name = scenario;
  switch (scenario) {
    case Scenario::HumanToHuman:
      s.train = hp[0];
      s.val = hp[1];
      s.test = hp[2];
      break;
    case Scenario::LLMToHuman:
      s.train = mp[0];
      s.val = mp[1];
      s.test = hp[2];
      break;
    case Scenario::MixToHuman:
      s.train = hp[0];
      detail::append(s.train, mp[0]);
      s.val = hp[1];
      detail::append(s.val, mp[1]);
      s.test = hp[2];
      break;
    case Scenario::Custom:
      s.train = hp[0];
      detail::append(s.train, mp[0]);
      s.val = hp[1];
      detail::append(s.val, mp[1]);
      s.test = hp[2];
      detail::append(s.test, mp[2]);
      break;
  }
  if (s.test.empty()) throw InsufficientData(to_string(scenario) + " split has an empty test set");
  return s;
}

}  // namespace acase
