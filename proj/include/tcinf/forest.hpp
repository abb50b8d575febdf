#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "learning.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace tcinf {

struct ForestParams {
  std::size_t n_trees = 100;
  std::size_t max_depth = 8;
  // 0 picks floor(sqrt(d)), at least 1.
  std::size_t features_per_split = 0;
  std::size_t min_samples_split = 2;
  bool bootstrap = true;
  std::uint64_t seed = 1;
  unsigned workers = 1;

  std::size_t features_for(std::size_t d) const {
    if (features_per_split > 0) return std::min(features_per_split, d);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d)))));
  }
};

struct TreeNode {
  // -1 marks a leaf
  std::int32_t feature = -1;
  double threshold = 0;
  std::uint32_t left = 0, right = 0;
  // class distribution of the training rows that reached the node
  std::uint32_t positives = 0, total = 0;

  bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;
  std::vector<std::size_t> out_of_bag;

  const TreeNode& leaf_for(std::span<const double> row) const {
    const TreeNode* node = &nodes.front();
    while (!node->is_leaf())
      node = &nodes[row[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left : node->right];
    return *node;
  }
  double predict_probability(std::span<const double> row) const {
    const TreeNode& leaf = leaf_for(row);
    return leaf.total == 0 ? 0.0 : static_cast<double>(leaf.positives) / static_cast<double>(leaf.total);
  }
  bool votes_positive(std::span<const double> row) const {
    const TreeNode& leaf = leaf_for(row);
    return 2 * leaf.positives > leaf.total;
  }
  std::size_t depth() const {
    std::vector<std::size_t> d(nodes.size(), 0);
    std::size_t best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      best = std::max(best, d[i]);
      if (!nodes[i].is_leaf()) d[nodes[i].left] = d[nodes[i].right] = d[i] + 1;
    }
    return best;
  }
};

struct ForestModel {
  static constexpr int kSchemaVersion = 1;

  ForestParams params;
  std::size_t n_features = 0;
  std::vector<DecisionTree> trees;

  /// Share of trees voting positive; above 0.5 is a majority.
  double predict_probability(std::span<const double> row) const {
    std::size_t votes = 0;
    for (const auto& t : trees) votes += t.votes_positive(row) ? 1 : 0;
    return static_cast<double>(votes) / static_cast<double>(trees.size());
  }
};

namespace detail {

class TreeBuilder {
public:
  TreeBuilder(const LabeledMatrix& data, const ForestParams& params, Rng& rng)
      : data_(data), params_(params), rng_(rng), mtry_(params.features_for(data.cols())) {}

  DecisionTree build(std::vector<std::size_t> rows) {
    grow(rows, 0);
    return std::move(tree_);
  }

private:
  struct Best {
    double score;
    std::int32_t feature = -1;
    double threshold = 0;
  };

  static double gini_mass(double pos, double total) {
    if (total == 0) return 0;
    const double p = pos / total;
    return total * 2.0 * p * (1.0 - p);
  }

  std::uint32_t grow(std::vector<std::size_t>& rows, std::size_t depth) {
    const auto id = static_cast<std::uint32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    std::uint32_t pos = 0;
    for (std::size_t r : rows) pos += data_.label(r) == Label::Positive ? 1 : 0;
    tree_.nodes[id].positives = pos;
    tree_.nodes[id].total = static_cast<std::uint32_t>(rows.size());
    if (depth >= params_.max_depth || rows.size() < params_.min_samples_split || pos == 0 || pos == rows.size())
      return id;

    const Best best = find_split(rows, pos);
    if (best.feature < 0) return id;
    std::vector<std::size_t> left, right;
    for (std::size_t r : rows)
      (data_.row(r)[static_cast<std::size_t>(best.feature)] <= best.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const std::uint32_t l = grow(left, depth + 1);
    const std::uint32_t r = grow(right, depth + 1);
    auto& node = tree_.nodes[id];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  // Tries features in random order until `mtry` non-constant ones were scored.
  Best find_split(const std::vector<std::size_t>& rows, std::uint32_t pos) {
    const double n = static_cast<double>(rows.size());
    Best best{gini_mass(pos, n)};
    const double parent = best.score;
    std::vector<std::size_t> order(data_.cols());
    for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
    std::vector<std::pair<double, bool>> column(rows.size());
    std::size_t scored = 0;
    for (std::size_t i = 0; i < order.size() && scored < mtry_; ++i) {
      std::swap(order[i], order[i + uniform_below(rng_, order.size() - i)]);
      const std::size_t f = order[i];
      for (std::size_t k = 0; k < rows.size(); ++k)
        column[k] = {data_.row(rows[k])[f], data_.label(rows[k]) == Label::Positive};
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;
      ++scored;
      double left_pos = 0;
      for (std::size_t k = 0; k + 1 < column.size(); ++k) {
        left_pos += column[k].second ? 1 : 0;
        if (column[k].first == column[k + 1].first) continue;
        const double nl = static_cast<double>(k + 1);
        const double score = gini_mass(left_pos, nl) + gini_mass(pos - left_pos, n - nl);
        if (score < best.score - 1e-12) {
          best.score = score;
          best.feature = static_cast<std::int32_t>(f);
          best.threshold = column[k].first + (column[k + 1].first - column[k].first) / 2;
        }
      }
    }
    if (best.score >= parent - 1e-12) best.feature = -1;
    return best;
  }

  const LabeledMatrix& data_;
  const ForestParams& params_;
  Rng& rng_;
  std::size_t mtry_;
  DecisionTree tree_;
};

} // namespace detail

/// Bagged Gini trees. Tree i draws its bootstrap sample and split features
/// from a stream derived from (seed, i), so the model does not depend on the
/// worker count.
inline ForestModel train_forest(const LabeledMatrix& train, const ForestParams& params = {}) {
  if (train.empty()) throw DegenerateDataError("empty training set");
  if (params.n_trees < 1) throw ConfigError("forest needs at least one tree");
  if (train.cols() < 1) throw ConfigError("forest needs at least one feature");
  ForestModel model;
  model.params = params;
  model.n_features = train.cols();
  model.trees.resize(params.n_trees);
  const std::size_t n = train.rows();
  parallel_for(params.n_trees, params.workers, [&](std::size_t t) {
    Rng rng = make_rng(params.seed, {static_cast<std::uint64_t>(t)});
    std::vector<std::size_t> rows(n);
    std::vector<bool> drawn(n, !params.bootstrap);
    for (std::size_t i = 0; i < n; ++i) {
      rows[i] = params.bootstrap ? static_cast<std::size_t>(uniform_below(rng, n)) : i;
      drawn[rows[i]] = true;
    }
    std::sort(rows.begin(), rows.end());
    detail::TreeBuilder builder(train, params, rng);
    auto tree = builder.build(std::move(rows));
    for (std::size_t i = 0; i < n; ++i)
      if (!drawn[i]) tree.out_of_bag.push_back(i);
    model.trees[t] = std::move(tree);
  });
  return model;
}

inline nlohmann::json to_json(const ForestParams& p) {
  return {{"n_trees", p.n_trees},
          {"max_depth", p.max_depth},
          {"features_per_split", p.features_per_split},
          {"min_samples_split", p.min_samples_split},
          {"bootstrap", p.bootstrap},
          {"seed", p.seed}};
}

inline nlohmann::json to_json(const ForestModel& m) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : m.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& node : t.nodes)
      nodes.push_back({node.feature, node.threshold, node.left, node.right, node.positives, node.total});
    trees.push_back({{"nodes", std::move(nodes)}, {"out_of_bag", t.out_of_bag.size()}});
  }
  return {{"schema", "tcinf.forest"},
          {"version", ForestModel::kSchemaVersion},
          {"n_features", m.n_features},
          {"params", to_json(m.params)},
          {"trees", std::move(trees)}};
}

inline ForestModel forest_from_json(const nlohmann::json& j) {
  if (j.value("schema", "") != "tcinf.forest" || j.value("version", 0) != ForestModel::kSchemaVersion)
    throw ConfigError("not a version 1 forest model");
  ForestModel m;
  j.at("n_features").get_to(m.n_features);
  const auto& p = j.at("params");
  p.at("n_trees").get_to(m.params.n_trees);
  p.at("max_depth").get_to(m.params.max_depth);
  p.at("features_per_split").get_to(m.params.features_per_split);
  p.at("min_samples_split").get_to(m.params.min_samples_split);
  p.at("bootstrap").get_to(m.params.bootstrap);
  p.at("seed").get_to(m.params.seed);
  for (const auto& jt : j.at("trees")) {
    DecisionTree t;
    for (const auto& jn : jt.at("nodes")) {
      TreeNode node;
      node.feature = jn.at(0).get<std::int32_t>();
      node.threshold = jn.at(1).get<double>();
      node.left = jn.at(2).get<std::uint32_t>();
      node.right = jn.at(3).get<std::uint32_t>();
      node.positives = jn.at(4).get<std::uint32_t>();
      node.total = jn.at(5).get<std::uint32_t>();
      t.nodes.push_back(node);
    }
    if (t.nodes.empty()) throw ConfigError("forest model holds an empty tree");
    m.trees.push_back(std::move(t));
  }
  if (m.trees.empty()) throw ConfigError("forest model holds no trees");
  return m;
}

} // namespace tcinf
