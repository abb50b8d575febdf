#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sampling.hpp"
#include "types.hpp"

namespace tcinf {

/// Row-major feature matrix with a binary label and a timestamp per row.
class LabeledMatrix {
public:
  LabeledMatrix() = default;
  explicit LabeledMatrix(std::vector<std::string> feature_names) : names_(std::move(feature_names)) {}

  std::size_t rows() const noexcept { return labels_.size(); }
  std::size_t cols() const noexcept { return names_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  const std::vector<std::string>& feature_names() const noexcept { return names_; }

  std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols(), cols()}; }
  Label label(std::size_t i) const { return labels_[i]; }
  Timestamp time(std::size_t i) const { return times_[i]; }
  std::span<const Label> labels() const noexcept { return labels_; }

  void add_row(std::span<const double> values, Label label, Timestamp time) {
    if (values.size() != cols()) throw std::invalid_argument("row width does not match the feature count");
    values_.insert(values_.end(), values.begin(), values.end());
    labels_.push_back(label);
    times_.push_back(time);
  }

  LabeledMatrix select_rows(std::span<const std::size_t> rows) const {
    LabeledMatrix out(names_);
    for (std::size_t r : rows) out.add_row(row(r), labels_[r], times_[r]);
    return out;
  }

  LabeledMatrix select_columns(std::span<const std::size_t> columns) const {
    std::vector<std::string> names;
    for (std::size_t c : columns) names.push_back(names_.at(c));
    LabeledMatrix out(std::move(names));
    std::vector<double> buf(columns.size());
    for (std::size_t r = 0; r < rows(); ++r) {
      for (std::size_t k = 0; k < columns.size(); ++k) buf[k] = row(r)[columns[k]];
      out.add_row(buf, labels_[r], times_[r]);
    }
    return out;
  }

  bool has_both_classes() const {
    const bool any_pos = std::find(labels_.begin(), labels_.end(), Label::Positive) != labels_.end();
    const bool any_neg = std::find(labels_.begin(), labels_.end(), Label::Negative) != labels_.end();
    return any_pos && any_neg;
  }

private:
  std::vector<std::string> names_;
  std::vector<double> values_;
  std::vector<Label> labels_;
  std::vector<Timestamp> times_;
};

struct Split {
  LabeledMatrix train;
  LabeledMatrix test;
};

/// Sorts rows by time and puts the first ceil(ratio * n) in the training
/// split. Rows tied with the last training row are pulled into training so no
/// test row predates a training row. Ties are ordered by row content, which
/// makes the split independent of the input order.
inline Split chronological_split(const LabeledMatrix& m, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("split ratio must lie in (0, 1)");
  const std::size_t n = m.rows();
  if (n < 2) throw DegenerateDataError("need at least two rows to split");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (m.time(a) != m.time(b)) return m.time(a) < m.time(b);
    const auto ra = m.row(a), rb = m.row(b);
    if (!std::equal(ra.begin(), ra.end(), rb.begin()))
      return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    return m.label(a) < m.label(b);
  });
  std::size_t n_train = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n) - 1e-9));
  n_train = std::clamp<std::size_t>(n_train, 1, n);
  const Timestamp boundary = m.time(order[n_train - 1]);
  while (n_train < n && m.time(order[n_train]) == boundary) ++n_train;
  if (n_train == n) throw DegenerateDataError("empty test split");
  const std::span<const std::size_t> all(order);
  return {m.select_rows(all.first(n_train)), m.select_rows(all.subspan(n_train))};
}

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

struct Metrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  Confusion confusion;

  static Metrics from(const Confusion& c) {
    Metrics m;
    m.confusion = c;
    m.precision = c.tp + c.fp == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    m.recall = c.tp + c.fn == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    // 2pr / (p + r), written over the counts so that it is exact when p = r
    const std::size_t denom = 2 * c.tp + c.fp + c.fn;
    m.f1 = c.tp == 0 ? 0.0 : static_cast<double>(2 * c.tp) / static_cast<double>(denom);
    return m;
  }
};

inline nlohmann::json to_json(const Metrics& m) {
  return {{"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"confusion", {{"tp", m.confusion.tp}, {"fp", m.confusion.fp}, {"tn", m.confusion.tn}, {"fn", m.confusion.fn}}}};
}

template <typename Model>
concept ProbabilisticClassifier = requires(const Model& m, std::span<const double> row) {
  { m.predict_probability(row) } -> std::convertible_to<double>;
};

/// Predicts positive when the model's probability exceeds 0.5.
template <ProbabilisticClassifier Model>
Metrics evaluate(const Model& model, const LabeledMatrix& test) {
  if (test.empty()) throw DegenerateDataError("empty test set");
  Confusion c;
  for (std::size_t i = 0; i < test.rows(); ++i) {
    const bool predicted = model.predict_probability(test.row(i)) > 0.5;
    const bool actual = test.label(i) == Label::Positive;
    if (predicted && actual) ++c.tp;
    else if (predicted) ++c.fp;
    else if (actual) ++c.fn;
    else ++c.tn;
  }
  return Metrics::from(c);
}

} // namespace tcinf
