#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "acase/embeddings.hpp"
#include "acase/nn/checkpoint.hpp"
#include "acase/synth.hpp"
#include "acase/tasks/report.hpp"

using namespace acase;
using namespace acase::tasks;

namespace {

AssuranceGraph chain(int n) {
  AssuranceGraph g;
  g.graph_id = "chain";
  g.provenance = Provenance::Human;
  for (int i = 0; i < n; ++i) g.nodes.push_back({"n" + std::to_string(i), NodeType(NodeType::Kind::Goal), "x", {}});
  for (int i = 1; i < n; ++i) g.edges.push_back({"n" + std::to_string(i - 1), "n" + std::to_string(i), {}});
  return g;
}

double brute_auc(const std::vector<double>& pos, const std::vector<double>& neg) {
  double s = 0.0;
  for (double p : pos)
    for (double q : neg) s += p > q ? 1.0 : p == q ? 0.5 : 0.0;
  return s / static_cast<double>(pos.size() * neg.size());
}

TrainParams fast_params(int epochs = 5) {
  TrainParams p;
  p.epochs = epochs;
  p.lr = 0.01;
  p.weight_decay = 0.0;
  return p;
}

ModelConfig small_config(nn::Arch arch = nn::Arch::SAGE) {
  ModelConfig c;
  c.arch = arch;
  c.hidden = 16;
  return c;
}

ScenarioSplit same_graph_split(const std::string& id) {
  ScenarioSplit s;
  s.train = s.val = s.test = {id};
  return s;
}

}  // namespace

// --------------------------------------------------------------------------
// Negative sampling

TEST(SampleNegatives, CompleteGraphHasNone) {
  AssuranceGraph g = chain(3);
  g.edges.clear();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      if (a != b) g.edges.push_back({"n" + std::to_string(a), "n" + std::to_string(b), {}});
  const auto s = sample_negatives(g, 4, 1);
  EXPECT_TRUE(s.pairs.empty());
  EXPECT_TRUE(s.short_sample);
}

TEST(SampleNegatives, TakesAllWhenKEqualsAvailable) {
  const AssuranceGraph g = chain(4);  // 12 ordered pairs, 3 edges
  const auto s = sample_negatives(g, 9, 7);
  EXPECT_FALSE(s.short_sample);
  EXPECT_EQ(s.pairs, candidate_non_edges(g));
}

TEST(SampleNegatives, ShortWhenKExceedsAvailable) {
  const auto s = sample_negatives(chain(4), 10, 7);
  EXPECT_TRUE(s.short_sample);
  EXPECT_EQ(s.pairs.size(), 9u);
}

TEST(SampleNegatives, DeterministicDistinctAndNotEdges) {
  const AssuranceGraph g = chain(8);
  const auto a = sample_negatives(g, 6, 42), b = sample_negatives(g, 6, 42), c = sample_negatives(g, 6, 43);
  EXPECT_EQ(a.pairs, b.pairs);
  EXPECT_NE(a.pairs, c.pairs);
  std::set<std::pair<std::string, std::string>> edges;
  for (const auto& e : g.edges) edges.emplace(e.src, e.dst);
  const std::set<std::pair<std::string, std::string>> uniq(a.pairs.begin(), a.pairs.end());
  EXPECT_EQ(uniq.size(), 6u);
  for (const auto& p : a.pairs) {
    EXPECT_FALSE(edges.count(p));
    EXPECT_NE(p.first, p.second);
  }
}

// --------------------------------------------------------------------------
// ROC-AUC

TEST(RocAuc, HandExample) {
  const std::vector<double> pos = {0.8, 0.4}, neg = {0.6, 0.2};
  EXPECT_DOUBLE_EQ(roc_auc(pos, neg), 0.75);
}

TEST(RocAuc, TiesCountHalf) {
  const std::vector<double> pos = {0.5, 0.5}, neg = {0.5};
  EXPECT_DOUBLE_EQ(roc_auc(pos, neg), 0.5);
  const std::vector<double> p2 = {1.0, 0.5}, n2 = {0.5, 0.0};
  EXPECT_DOUBLE_EQ(roc_auc(p2, n2), (1 + 1 + 0.5 + 1) / 4.0);
}

TEST(RocAuc, PerfectAndInverted) {
  const std::vector<double> hi = {0.9, 0.8}, lo = {0.1, 0.2};
  EXPECT_DOUBLE_EQ(roc_auc(hi, lo), 1.0);
  EXPECT_DOUBLE_EQ(roc_auc(lo, hi), 0.0);
}

TEST(RocAuc, EmptyClassThrows) {
  const std::vector<double> some = {0.1}, none;
  EXPECT_THROW(roc_auc(some, none), EmptyClass);
  EXPECT_THROW(roc_auc(none, some), EmptyClass);
}

TEST(RocAuc, MatchesPairwiseCountOnRandomInputs) {
  Rng rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> pos(1 + rng.below(12)), neg(1 + rng.below(12));
    // coarse grid so ties are common
    for (auto& x : pos) x = static_cast<double>(rng.below(6)) / 5.0;
    for (auto& x : neg) x = static_cast<double>(rng.below(6)) / 5.0;
    ASSERT_NEAR(roc_auc(pos, neg), brute_auc(pos, neg), 1e-12) << "trial " << trial;
  }
}

TEST(RocAuc, InvariantUnderMonotoneTransform) {
  Rng rng(5);
  std::vector<double> pos(30), neg(40);
  for (auto& x : pos) x = rng.uniform(-2.0, 2.0);
  for (auto& x : neg) x = rng.uniform(-2.0, 1.0);
  std::vector<double> tp, tn;
  for (double x : pos) tp.push_back(nn::sigmoid(3.0 * x) + 7.0);
  for (double x : neg) tn.push_back(nn::sigmoid(3.0 * x) + 7.0);
  EXPECT_NEAR(roc_auc(pos, neg), roc_auc(tp, tn), 1e-12);
}

TEST(RocAuc, LabeledOverload) {
  const std::vector<double> s = {0.8, 0.6, 0.4, 0.2};
  const std::vector<int> y = {1, 0, 1, 0};
  EXPECT_DOUBLE_EQ(roc_auc_labeled(s, y), 0.75);
  const std::vector<int> short_y = {1, 0};
  EXPECT_THROW(roc_auc_labeled(s, short_y), ShapeMismatch);
}

// --------------------------------------------------------------------------
// F1 and aggregation

TEST(F1, HandExample) {
  const std::vector<double> s = {0.9, 0.6, 0.4, 0.7, 0.1};
  const std::vector<int> y = {1, 1, 1, 0, 0};
  const auto m = f1_at_threshold(s, y);
  EXPECT_EQ(m.tp, 2u);
  EXPECT_EQ(m.fp, 1u);
  EXPECT_EQ(m.fn, 1u);
  EXPECT_EQ(m.tn, 1u);
  EXPECT_DOUBLE_EQ(m.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.f1, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.6);
}

TEST(F1, ThresholdIsInclusive) {
  const std::vector<double> s = {0.5};
  const std::vector<int> y = {1};
  EXPECT_DOUBLE_EQ(f1_at_threshold(s, y).f1, 1.0);
}

TEST(F1, NoPredictedPositivesGivesZero) {
  const std::vector<double> s = {0.1, 0.2};
  const std::vector<int> y = {1, 0};
  const auto m = f1_at_threshold(s, y);
  EXPECT_DOUBLE_EQ(m.precision, 0.0);
  EXPECT_DOUBLE_EQ(m.f1, 0.0);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.5);
}

TEST(MeanStd, SampleStandardDeviation) {
  const std::vector<double> xs = {1.0, 2.0, 3.0, 4.0};
  const auto r = mean_std(xs);
  EXPECT_DOUBLE_EQ(r.mean, 2.5);
  EXPECT_NEAR(r.std, std::sqrt(5.0 / 3.0), 1e-12);
  const std::vector<double> one = {0.7};
  EXPECT_DOUBLE_EQ(mean_std(one).std, 0.0);
}

// --------------------------------------------------------------------------
// Training

TEST(TrainLink, OverfitsASingleGraph) {
  Corpus c = attach_hashed(synthetic_corpus(SynthSpec::Style::Tree, 1, 14, 14, 9), 32);
  for (auto arch : {nn::Arch::GCN, nn::Arch::SAGE}) {
    auto config = small_config(arch);
    config.hidden = 64;  // enough capacity to memorise 13 edges
    const auto out = train_link(same_graph_split("g0"), c, config, fast_params(150), 1);
    EXPECT_GE(out.result.auc, 0.95) << config.label();
    EXPECT_GT(out.result.best_epoch, 0);
  }
}

TEST(TrainLink, ZeroEpochsKeepsInitialWeights) {
  Corpus c = attach_hashed(synthetic_corpus(SynthSpec::Style::Tree, 1, 14, 14, 9), 32);
  const auto out = train_link(same_graph_split("g0"), c, small_config(), fast_params(0), 1);
  EXPECT_EQ(out.result.best_epoch, 0);
  EXPECT_EQ(nn::serialize_checkpoint(out.model), nn::serialize_checkpoint(nn::init_model(out.model.config, 32, 1)));
}

TEST(TrainLink, RequiresTrainingEdges) {
  Corpus c;
  c.graphs.push_back(chain(1));
  c = attach_hashed(std::move(c), 8);
  EXPECT_THROW(train_link(same_graph_split("chain"), c, small_config(), fast_params(1), 1), InsufficientData);
}

TEST(TrainLink, DeterministicPerSeed) {
  Corpus c = attach_hashed(synthetic_corpus(SynthSpec::Style::Tree, 10, 8, 12, 2), 32);
  const auto split = make_split(c, Scenario::HumanToHuman, 0);
  const auto a = train_link(split, c, small_config(nn::Arch::GCN), fast_params(), 4);
  const auto b = train_link(split, c, small_config(nn::Arch::GCN), fast_params(), 4);
  EXPECT_EQ(a.result.auc, b.result.auc);
  EXPECT_EQ(a.result.f1, b.result.f1);
  EXPECT_EQ(nn::serialize_checkpoint(a.model), nn::serialize_checkpoint(b.model));
}

TEST(TrainClassifier, SingleClassTrainingSetThrows) {
  Corpus c = attach_hashed(synthetic_corpus(SynthSpec::Style::Tree, 6, 5, 8, 1), 16);
  const auto split = make_split(c, Scenario::Custom, 0);
  EXPECT_THROW(train_graph_classifier(split, c, small_config(), fast_params(), 1), SingleClassTrainingSet);
}

TEST(TrainClassifier, UnknownProvenanceIsRejected) {
  EXPECT_THROW(provenance_label(Provenance::Unknown), InsufficientData);
  EXPECT_EQ(provenance_label(Provenance::Human), 0);
  EXPECT_EQ(provenance_label(Provenance::LLM), 1);
}

TEST(TrainClassifier, SeparatesTreeFromFlat) {
  Corpus c = attach_hashed(synthetic_family_corpus(10, 8, 16, 3), 32);
  const auto split = make_split(c, Scenario::Custom, 0);
  const auto out = train_graph_classifier(split, c, small_config(nn::Arch::GCN), fast_params(40), 1);
  EXPECT_GE(out.result.acc, 0.9);
  EXPECT_EQ(out.model.config.head, nn::HeadKind::GraphSoftmax);
}

TEST(SplitLabels, ShufflePermutesButKeepsCounts) {
  Corpus c = synthetic_family_corpus(10, 5, 6, 4);
  const auto split = make_split(c, Scenario::Custom, 0);
  const auto plain = split_labels(split, c, false, 1), shuffled = split_labels(split, c, true, 1);
  auto all = [](const SplitLabels& s) {
    std::vector<int> v = s.train;
    v.insert(v.end(), s.val.begin(), s.val.end());
    v.insert(v.end(), s.test.begin(), s.test.end());
    return v;
  };
  const auto a = all(plain), b = all(shuffled);
  EXPECT_EQ(std::count(a.begin(), a.end(), 1), std::count(b.begin(), b.end(), 1));
  EXPECT_NE(a, b);
}

// --------------------------------------------------------------------------
// run_scenario and reporting

TEST(RunScenario, ShapeAndSeedOrder) {
  Corpus c = attach_hashed(synthetic_corpus(SynthSpec::Style::Tree, 10, 6, 10, 5), 16);
  const std::vector<std::uint64_t> seeds = {3, 1, 2};
  std::vector<ModelState> models;
  const auto r = run_scenario(c, Task::Link, Scenario::HumanToHuman, small_config(), fast_params(2), seeds, 0, {},
                              &models);
  ASSERT_EQ(r.seeds.size(), 3u);
  EXPECT_EQ(models.size(), 3u);
  for (std::size_t k = 0; k < seeds.size(); ++k) EXPECT_EQ(r.seeds[k].seed, seeds[k]);
  EXPECT_EQ(r.model, "sage-1");
  EXPECT_EQ(r.scenario, "H->H");
  EXPECT_FALSE(r.std_flagged);
  const auto j = to_json(r);
  for (const char* key : {"task", "scenario", "model", "seeds", "mean", "std"}) EXPECT_TRUE(j.contains(key)) << key;
  for (const char* key : {"seed", "auc", "f1", "acc"}) EXPECT_TRUE(j["seeds"][0].contains(key)) << key;
}

TEST(RunScenario, SingleSeedFlagsStd) {
  Corpus c = attach_hashed(synthetic_corpus(SynthSpec::Style::Tree, 10, 6, 10, 5), 16);
  const auto r = run_scenario(c, Task::Link, Scenario::HumanToHuman, small_config(), fast_params(1), {7});
  EXPECT_TRUE(r.std_flagged);
  EXPECT_DOUBLE_EQ(r.auc.std, 0.0);
  EXPECT_NE(format_table({r}).find("single seed"), std::string::npos);
}

TEST(RunScenario, IndependentOfThreadCount) {
  Corpus c = attach_hashed(synthetic_family_corpus(6, 6, 10, 6), 16);
  const std::vector<std::uint64_t> seeds = {1, 2, 3};
  setenv("ACASE_THREADS", "1", 1);
  const auto a = to_json(run_scenario(c, Task::Classify, Scenario::Custom, small_config(), fast_params(3), seeds));
  setenv("ACASE_THREADS", "3", 1);
  const auto b = to_json(run_scenario(c, Task::Classify, Scenario::Custom, small_config(), fast_params(3), seeds));
  unsetenv("ACASE_THREADS");
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(RunScenario, NoSeedsIsInvalid) {
  Corpus c = attach_hashed(synthetic_corpus(SynthSpec::Style::Tree, 10, 6, 10, 5), 16);
  EXPECT_THROW(run_scenario(c, Task::Link, Scenario::HumanToHuman, small_config(), fast_params(1), {}), InvalidSpec);
}

TEST(Report, TableFormatsMeanPlusMinusStd) {
  MetricsReport r = summarize(Task::Link, "H->H", "sage-1", {SeedResult{1, 0.8, 0.5, 0.6}, SeedResult{2, 0.9, 0.7, 0.6}});
  EXPECT_NEAR(r.auc.mean, 0.85, 1e-12);
  const std::string t = format_table({r});
  EXPECT_NE(t.find("0.850 ± 0.071"), std::string::npos) << t;
  EXPECT_NE(t.find("ROC-AUC"), std::string::npos);
}

TEST(Report, UndefinedAucSerializesAsNull) {
  MetricsReport r = summarize(Task::Link, "H->H", "gcn-1", {SeedResult{}});
  EXPECT_TRUE(to_json(r)["seeds"][0]["auc"].is_null());
  EXPECT_TRUE(to_json(r)["mean"]["auc"].is_null());
}

// --------------------------------------------------------------------------
// Checkpoints

TEST(Checkpoint, RoundTripPreservesPredictions) {
  Corpus c = attach_hashed(synthetic_family_corpus(6, 6, 10, 8), 16);
  const auto split = make_split(c, Scenario::Custom, 0);
  const auto out = train_graph_classifier(split, c, small_config(nn::Arch::GAT), fast_params(3), 2);
  const auto path = std::filesystem::temp_directory_path() / "acase_test_ckpt.acpt";
  nn::save_checkpoint(out.model, path);
  const auto back = nn::load_checkpoint(path);
  std::filesystem::remove(path);
  EXPECT_EQ(nn::serialize_checkpoint(back), nn::serialize_checkpoint(out.model));
  const auto pg = prepare_graph(c.graphs.front());
  EXPECT_TRUE(nn::graph_probabilities(back, pg.view()).isApprox(nn::graph_probabilities(out.model, pg.view())));
}

TEST(Checkpoint, CorruptBytesAreFormatErrors) {
  const auto m = nn::init_model(small_config(), 4, 1);
  std::string bytes = nn::serialize_checkpoint(m);
  EXPECT_THROW(nn::parse_checkpoint(bytes.substr(0, bytes.size() - 3)), FormatError);
  EXPECT_THROW(nn::parse_checkpoint(bytes + "x"), FormatError);
  bytes[0] = 'X';
  EXPECT_THROW(nn::parse_checkpoint(bytes), FormatError);
}
