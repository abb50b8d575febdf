#include <random>

#include <gtest/gtest.h>

#include <tcinf/pipeline.hpp>
#include <tcinf/synthgen.hpp>

#include "fixtures.hpp"
#include "oracle.hpp"

using namespace tcinf;
using fixtures::hours;

namespace {

TrainEvalConfig quick_config() {
  TrainEvalConfig c;
  c.forest.n_trees = 10;
  c.forest.max_depth = 5;
  c.logistic.epochs = 200;
  c.features.gamma = 5;
  return c;
}

ActivityLog synth_log(std::uint64_t seed) {
  GenParams p;
  p.n_users = 150;
  p.n_topics = 8;
  return generate(p, seed);
}

} // namespace

TEST(Pipeline, MatrixColumnsFollowTheRequest) {
  TemporalIndex index{fixtures::log_a()};
  const auto set = build_balanced_set(index, std::nullopt, TimeConstraints::hours(720, 720), 1);
  const auto table = build_feature_table(index, set, {});
  const Feature cols[] = {Feature::Prr, Feature::Nan};
  const auto m = to_matrix(table, cols);
  ASSERT_EQ(m.rows(), set.samples.size());
  EXPECT_EQ(m.feature_names(), (std::vector<std::string>{"PRR", "NAN"}));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    EXPECT_EQ(m.row(i)[0], table.vectors[i].prr);
    EXPECT_EQ(m.row(i)[1], table.vectors[i].nan);
    EXPECT_EQ(m.label(i), set.samples[i].label);
  }
}

TEST(Pipeline, FullSpanWindowsMatchTheUnconstrainedPath) {
  const auto log = synth_log(5);
  TemporalIndex index{log};
  ASSERT_LE(log.time_span()->second - log.time_span()->first, Hours{720});
  for (Classifier c : {Classifier::Forest, Classifier::Logistic}) {
    auto config = quick_config();
    config.classifier = c;
    const auto cmp = compare_with_unconstrained(index, std::nullopt, TimeConstraints::hours(720, 720), 3, config);
    EXPECT_EQ(cmp.sigma_with, cmp.sigma_without);
    ASSERT_EQ(cmp.rows.size(), kAllFeatures.size() + 1);
    for (const auto& row : cmp.rows) {
      if (row.error) continue;
      EXPECT_EQ(row.with_constraints->confusion, row.without_constraints->confusion) << row.label;
      EXPECT_EQ(row.with_constraints->f1, row.without_constraints->f1) << row.label;
    }
    EXPECT_FALSE(cmp.rows.back().error.has_value());
  }
}

TEST(Pipeline, DeterministicAndIndependentOfWorkers) {
  const auto log = synth_log(6);
  TemporalIndex index{log};
  const auto config = quick_config();
  const auto tc = TimeConstraints::hours(168, 24);
  const auto a = run_train_eval(index, std::nullopt, tc, 9, config, 1);
  const auto b = run_train_eval(index, std::nullopt, tc, 9, config, 3);
  EXPECT_EQ(a.metrics.confusion, b.metrics.confusion);
  EXPECT_EQ(a.sigma, b.sigma);
  EXPECT_EQ(a.train_rows + a.test_rows, a.samples);
}

// The longest delay in the log (B adopting #y 100 hours after A) happens after
// every sample the training split can see, so only the global estimate includes it.
TEST(Pipeline, LeakageStrictSigmaUsesTrainingPeriodOnly) {
  ActivityLog log;
  for (int h = 0; h < 20; ++h) {
    log.append("f" + std::to_string(h), "e", "#b", hours(10 + h));
    log.append("e", "s" + std::to_string(h), "#a", hours(10 + h) + Seconds{1});
  }
  log.append("B", "A", "#z", hours(1));
  log.append("A", "x", "#y", hours(2));
  log.append("B", "A", "#y", hours(102));
  TemporalIndex index{log};
  const auto set = build_balanced_set(index, std::nullopt, TimeConstraints::unconstrained(), 1);
  ASSERT_FALSE(set.samples.empty());

  auto config = quick_config();
  config.leakage_strict = false;
  EXPECT_EQ(resolve_sigma(index, set, config), Hours{100});
  config.leakage_strict = true;
  EXPECT_LT(resolve_sigma(index, set, config), Hours{100});
  config.sigma = Hours{5};
  EXPECT_EQ(resolve_sigma(index, set, config), Hours{5});
}

TEST(Pipeline, StrictSigmaNeverExceedsGlobal) {
  std::mt19937_64 rng(44);
  for (int l = 0; l < 4; ++l) {
    auto log = oracle::random_log(rng);
    TemporalIndex index{log};
    const auto set = build_balanced_set(index, std::nullopt, TimeConstraints::hours(168, 72), 2);
    if (set.samples.size() < 2) continue;
    auto config = quick_config();
    const auto strict = resolve_sigma(index, set, config);
    config.leakage_strict = false;
    EXPECT_LE(strict, resolve_sigma(index, set, config));
  }
}

TEST(Pipeline, SplitBoundaryMatchesTheMatrixSplit) {
  const auto log = synth_log(8);
  TemporalIndex index{log};
  const auto set = build_balanced_set(index, std::nullopt, TimeConstraints::hours(72, 24), 4);
  const auto table = build_feature_table(index, set, {});
  const auto split = chronological_split(to_matrix(table, kAllFeatures), 0.9);
  std::vector<Timestamp> times;
  for (const auto& s : set.samples) times.push_back(s.time);
  const Timestamp boundary = split_boundary(times, 0.9);
  for (std::size_t i = 0; i < split.train.rows(); ++i) EXPECT_LE(split.train.time(i), boundary);
  for (std::size_t i = 0; i < split.test.rows(); ++i) EXPECT_GT(split.test.time(i), boundary);
}
