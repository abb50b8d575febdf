#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "features.hpp"
#include "forest.hpp"
#include "learning.hpp"
#include "logistic.hpp"
#include "sampling.hpp"

namespace tcinf {

/// A balanced sample set with the feature vector of every sample.
struct FeatureTable {
  SampleSet set;
  FeatureConfig config;
  std::vector<FeatureVector> vectors;
};

inline FeatureTable build_feature_table(const TemporalIndex& index, const SampleSet& set, const FeatureConfig& config,
                                        unsigned workers = 1) {
  config.validate();
  FeatureTable table{set, config, std::vector<FeatureVector>(set.samples.size())};
  parallel_for(set.samples.size(), workers, [&](std::size_t i) {
    table.vectors[i] = compute_all(index, context_of(set.samples[i]), set.tc, config);
  });
  return table;
}

inline LabeledMatrix to_matrix(const FeatureTable& table, std::span<const Feature> columns) {
  std::vector<std::string> names;
  for (Feature f : columns) names.emplace_back(feature_name(f));
  LabeledMatrix m(std::move(names));
  std::vector<double> row(columns.size());
  for (std::size_t i = 0; i < table.vectors.size(); ++i) {
    for (std::size_t c = 0; c < columns.size(); ++c) row[c] = table.vectors[i].get(columns[c]);
    const Sample& s = table.set.samples[i];
    m.add_row(row, s.label, s.time);
  }
  return m;
}

/// Time of the last training row under chronological_split; it depends on the
/// sample times alone.
inline Timestamp split_boundary(std::vector<Timestamp> times, double ratio) {
  if (times.size() < 2) throw DegenerateDataError("need at least two rows to split");
  std::sort(times.begin(), times.end());
  std::size_t n_train = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(times.size()) - 1e-9));
  n_train = std::clamp<std::size_t>(n_train, 1, times.size());
  return times[n_train - 1];
}

enum class Classifier { Forest, Logistic };

struct TrainEvalConfig {
  Classifier classifier = Classifier::Forest;
  ForestParams forest;
  LogisticParams logistic;
  double split_ratio = 0.9;
  // Estimate sigma from the training period only.
  bool leakage_strict = true;
  // Fixed CDI decay scale; estimated from the log when unset.
  std::optional<Seconds> sigma;
  FeatureConfig features;
  SamplingOptions sampling;
  std::vector<Feature> columns{kAllFeatures.begin(), kAllFeatures.end()};
};

struct TrainEvalResult {
  Metrics metrics;
  Seconds sigma{0};
  std::size_t train_rows = 0, test_rows = 0;
  std::size_t samples = 0;
};

/// The sigma a run will use: the override if present, else the longest
/// adoption delay in the log, cut at the training boundary in strict mode.
inline Seconds resolve_sigma(const TemporalIndex& index, const SampleSet& set, const TrainEvalConfig& config) {
  if (config.sigma) return *config.sigma;
  std::optional<Timestamp> until;
  if (config.leakage_strict) {
    std::vector<Timestamp> times;
    for (const auto& s : set.samples) times.push_back(s.time);
    until = split_boundary(std::move(times), config.split_ratio);
  }
  return estimate_sigma(index, until);
}

inline Metrics fit_and_score(const LabeledMatrix& train, const LabeledMatrix& test, const TrainEvalConfig& config) {
  if (config.classifier == Classifier::Logistic) return evaluate(train_logistic(train, config.logistic), test);
  return evaluate(train_forest(train, config.forest), test);
}

/// Trains on the chronological head of the feature table and scores the tail.
inline TrainEvalResult train_eval(const FeatureTable& table, std::span<const Feature> columns,
                                  const TrainEvalConfig& config) {
  const auto matrix = to_matrix(table, columns);
  const auto split = chronological_split(matrix, config.split_ratio);
  TrainEvalResult out;
  out.metrics = fit_and_score(split.train, split.test, config);
  out.sigma = table.config.sigma;
  out.train_rows = split.train.rows();
  out.test_rows = split.test.rows();
  out.samples = matrix.rows();
  return out;
}

/// Samples under `tc`, resolves sigma, computes features, then trains and
/// scores on `config.columns`.
inline TrainEvalResult run_train_eval(const TemporalIndex& index, const std::optional<FilterSpec>& filter,
                                      const TimeConstraints& tc, std::uint64_t seed, const TrainEvalConfig& config,
                                      unsigned workers = 1) {
  SamplingOptions sampling = config.sampling;
  sampling.workers = workers;
  const auto set = build_balanced_set(index, filter, tc, seed, sampling);
  FeatureConfig features = config.features;
  features.sigma = resolve_sigma(index, set, config);
  const auto table = build_feature_table(index, set, features, workers);
  return train_eval(table, config.columns, config);
}

struct ComparisonRow {
  std::string label; // feature name or "ALL"
  std::optional<Metrics> with_constraints;
  std::optional<Metrics> without_constraints;
  std::optional<std::string> error;

  std::optional<double> improvement() const {
    if (!with_constraints || !without_constraints || without_constraints->f1 == 0) return std::nullopt;
    return (with_constraints->f1 - without_constraints->f1) / without_constraints->f1;
  }
};

struct Comparison {
  TimeConstraints tc = TimeConstraints::unconstrained();
  Seconds sigma_with{0}, sigma_without{0};
  std::vector<ComparisonRow> rows;
};

/// F1 for every single feature and for all features together, under `tc` and
/// with the time constraints removed.
inline Comparison compare_with_unconstrained(const TemporalIndex& index, const std::optional<FilterSpec>& filter,
                                             const TimeConstraints& tc, std::uint64_t seed,
                                             const TrainEvalConfig& config, unsigned workers = 1) {
  Comparison out;
  out.tc = tc;
  auto tables = [&](const TimeConstraints& c) {
    SamplingOptions sampling = config.sampling;
    sampling.workers = workers;
    const auto set = build_balanced_set(index, filter, c, seed, sampling);
    FeatureConfig features = config.features;
    features.sigma = resolve_sigma(index, set, config);
    return build_feature_table(index, set, features, workers);
  };
  const auto with = tables(tc);
  const auto without = tables(TimeConstraints::unconstrained());
  out.sigma_with = with.config.sigma;
  out.sigma_without = without.config.sigma;

  std::vector<std::pair<std::string, std::vector<Feature>>> groups;
  for (Feature f : config.columns) groups.push_back({std::string(feature_name(f)), {f}});
  groups.push_back({"ALL", config.columns});
  for (const auto& [label, cols] : groups) {
    ComparisonRow row{label, std::nullopt, std::nullopt, std::nullopt};
    try {
      row.with_constraints = train_eval(with, cols, config).metrics;
      row.without_constraints = train_eval(without, cols, config).metrics;
    } catch (const DegenerateDataError& e) {
      row.error = e.what();
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

} // namespace tcinf
