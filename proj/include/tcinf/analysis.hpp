#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "features.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "sampling.hpp"
#include "temporal_index.hpp"

namespace tcinf {

struct CurvePoint {
  double value;
  double probability;
  std::size_t support;
  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct CurveConfig {
  // Group by exact value; otherwise equal-width bins over the observed range.
  bool exact_values = true;
  std::size_t bins = 20;
  std::size_t min_support = 5;
};

/// Empirical adoption probability per feature value (or bin). A bin's value is
/// the mean of its members. Groups below `min_support` are dropped; points are
/// sorted by value.
inline std::vector<CurvePoint> probability_curve(std::span<const Label> labels, std::span<const double> values,
                                                 const CurveConfig& config = {}) {
  if (labels.size() != values.size()) throw std::invalid_argument("labels and values differ in length");
  if (values.empty()) return {};
  struct Group {
    double sum = 0;
    std::size_t positives = 0, total = 0;
  };
  std::map<double, Group> exact;
  std::vector<Group> binned;
  double lo = 0, width = 0;
  if (!config.exact_values) {
    if (config.bins == 0) throw ConfigError("bin count must be positive");
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    lo = *mn;
    width = (*mx - *mn) / static_cast<double>(config.bins);
    binned.resize(width > 0 ? config.bins : 1);
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    Group* g;
    if (config.exact_values) {
      g = &exact[values[i]];
    } else {
      std::size_t b = width > 0 ? static_cast<std::size_t>((values[i] - lo) / width) : 0;
      g = &binned[std::min(b, binned.size() - 1)];
    }
    g->sum += values[i];
    g->positives += labels[i] == Label::Positive ? 1 : 0;
    ++g->total;
  }
  std::vector<CurvePoint> out;
  auto emit = [&](const Group& g, double value) {
    if (g.total == 0 || g.total < config.min_support) return;
    out.push_back({value, static_cast<double>(g.positives) / static_cast<double>(g.total), g.total});
  };
  if (config.exact_values) {
    for (const auto& [v, g] : exact) emit(g, v);
  } else {
    for (const auto& g : binned)
      if (g.total > 0) emit(g, g.sum / static_cast<double>(g.total));
  }
  return out;
}

/// Product-moment correlation. Throws UndefinedCorrelation when either input
/// is constant.
inline double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("pearson: inputs differ in length");
  if (xs.size() < 2) throw std::invalid_argument("pearson: need at least two points");
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) throw UndefinedCorrelation("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

enum class CorrelationLevel {
  // Feature value vs. adoption probability across curve points.
  Curve,
  // Feature value vs. 0/1 label across samples (point-biserial).
  Sample,
};

/// The correlation of one feature with adoption over one sample set; nullopt
/// when undefined (too few points or zero variance).
inline std::optional<double> adoption_correlation(std::span<const Label> labels, std::span<const double> values,
                                                  CorrelationLevel level, CurveConfig curve) {
  try {
    if (level == CorrelationLevel::Sample) {
      std::vector<double> ys(labels.size());
      for (std::size_t i = 0; i < labels.size(); ++i) ys[i] = labels[i] == Label::Positive ? 1.0 : 0.0;
      if (values.size() < 2) return std::nullopt;
      return pearson(values, ys);
    }
    const auto points = probability_curve(labels, values, curve);
    if (points.size() < 2) return std::nullopt;
    std::vector<double> xs, ps;
    for (const auto& p : points) {
      xs.push_back(p.value);
      ps.push_back(p.probability);
    }
    return pearson(xs, ps);
  } catch (const UndefinedCorrelation&) {
    return std::nullopt;
  }
}

/// The twelve span values, in hours, swept by default.
inline std::vector<Seconds> default_tau_grid() {
  std::vector<Seconds> out;
  for (int h : {8, 16, 24, 48, 72, 96, 120, 144, 168, 336, 504, 720}) out.push_back(Hours{h});
  return out;
}

struct SweepConfig {
  std::vector<Seconds> taus = default_tau_grid();
  // Cell every gain is measured against.
  TimeConstraints baseline = TimeConstraints::hours(720, 720);
  FeatureConfig features;
  CorrelationLevel level = CorrelationLevel::Curve;
  std::size_t bins = 20;
  std::size_t min_support = 5;
  CandidateRule rule = CandidateRule::NeverAdopted;
  bool filter_negatives = false;
  unsigned workers = 1;
};

/// Correlation (rho) and relative gain over the baseline cell for every
/// (susceptible, forgettable) pair, row-major with the susceptible span as row.
struct GainGrid {
  Feature feature = Feature::Nan;
  std::vector<Seconds> taus;
  std::vector<std::optional<double>> rho;
  std::vector<std::optional<double>> gain;
  std::optional<double> baseline_rho;
  TimeConstraints baseline = TimeConstraints::hours(720, 720);
  // Balanced sample count (positives + negatives) per cell.
  std::vector<std::size_t> samples;

  std::size_t size() const noexcept { return taus.size(); }
  std::size_t cell(std::size_t sus_index, std::size_t fos_index) const { return sus_index * taus.size() + fos_index; }
  std::optional<std::size_t> find(Seconds sus, Seconds fos) const {
    auto i = std::find(taus.begin(), taus.end(), sus);
    auto j = std::find(taus.begin(), taus.end(), fos);
    if (i == taus.end() || j == taus.end()) return std::nullopt;
    return cell(static_cast<std::size_t>(i - taus.begin()), static_cast<std::size_t>(j - taus.begin()));
  }
  std::optional<double> gain_at(Seconds sus, Seconds fos) const {
    auto c = find(sus, fos);
    return c ? gain[*c] : std::nullopt;
  }
  std::optional<double> rho_at(Seconds sus, Seconds fos) const {
    auto c = find(sus, fos);
    return c ? rho[*c] : std::nullopt;
  }
};

/// (rho - rho_base) / |rho_base|; nullopt when either side is missing or the
/// baseline is zero.
inline std::optional<double> relative_gain(std::optional<double> rho, std::optional<double> base) {
  if (!rho || !base || *base == 0.0) return std::nullopt;
  return (*rho - *base) / std::abs(*base);
}

/// Seed of the sample set drawn for one cell; depends on the spans, not on the
/// cell's position, so the baseline draws the same set inside or outside a grid.
inline std::uint64_t cell_seed(std::uint64_t master, const TimeConstraints& tc) {
  return derive_seed(master, {static_cast<std::uint64_t>(tc.susceptible().count()),
                              static_cast<std::uint64_t>(tc.forgettable().count())});
}

struct CellEvaluation {
  std::vector<std::optional<double>> rho; // one per requested feature
  std::size_t samples = 0;
};

/// Draws the balanced set for `tc` and correlates each requested feature with
/// adoption.
inline CellEvaluation evaluate_cell(const TemporalIndex& index, std::span<const Feature> features,
                                    const std::optional<FilterSpec>& filter, std::uint64_t seed,
                                    const TimeConstraints& tc, const SweepConfig& config, unsigned workers = 1) {
  SamplingOptions options;
  options.rule = config.rule;
  options.workers = workers;
  options.filter_negatives = config.filter_negatives;
  const auto set = build_balanced_set(index, filter, tc, cell_seed(seed, tc), options);
  std::vector<Label> labels;
  labels.reserve(set.samples.size());
  for (const auto& s : set.samples) labels.push_back(s.label);
  std::vector<FeatureVector> vectors(set.samples.size());
  parallel_for(set.samples.size(), workers,
               [&](std::size_t i) { vectors[i] = compute_all(index, context_of(set.samples[i]), tc, config.features); });
  CellEvaluation out;
  out.samples = set.samples.size();
  for (Feature f : features) {
    std::vector<double> values(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) values[i] = vectors[i].get(f);
    CurveConfig curve{is_integer_valued(f), config.bins, config.min_support};
    out.rho.push_back(adoption_correlation(labels, values, config.level, curve));
  }
  return out;
}

/// Sweeps every (susceptible, forgettable) pair over `config.taus` for several
/// features at once; each cell re-draws its own balanced sample set.
inline std::vector<GainGrid> sweep_grid(const TemporalIndex& index, std::span<const Feature> features,
                                        const std::optional<FilterSpec>& filter, std::uint64_t seed,
                                        const SweepConfig& config) {
  config.features.validate();
  const std::size_t k = config.taus.size();
  std::vector<TimeConstraints> cells;
  for (Seconds sus : config.taus)
    for (Seconds fos : config.taus) cells.emplace_back(sus, fos);
  const bool baseline_in_grid = std::find(cells.begin(), cells.end(), config.baseline) != cells.end();
  if (!baseline_in_grid) cells.push_back(config.baseline);

  std::vector<CellEvaluation> results(cells.size());
  parallel_for(cells.size(), config.workers,
               [&](std::size_t c) { results[c] = evaluate_cell(index, features, filter, seed, cells[c], config); });

  const std::size_t base_cell =
      static_cast<std::size_t>(std::find(cells.begin(), cells.end(), config.baseline) - cells.begin());
  std::vector<GainGrid> grids;
  for (std::size_t f = 0; f < features.size(); ++f) {
    GainGrid g;
    g.feature = features[f];
    g.taus = config.taus;
    g.baseline = config.baseline;
    g.baseline_rho = results[base_cell].rho[f];
    for (std::size_t c = 0; c < k * k; ++c) {
      g.rho.push_back(results[c].rho[f]);
      g.gain.push_back(relative_gain(results[c].rho[f], g.baseline_rho));
      g.samples.push_back(results[c].samples);
    }
    grids.push_back(std::move(g));
  }
  return grids;
}

inline GainGrid sweep_grid(const TemporalIndex& index, Feature feature, const std::optional<FilterSpec>& filter,
                           std::uint64_t seed, const SweepConfig& config) {
  const Feature one[] = {feature};
  return std::move(sweep_grid(index, one, filter, seed, config).front());
}

} // namespace tcinf
