#pragma once

// Bagged CART classifier with Gini splits and cost-complexity pruning.
//
// Each tree is grown once to purity. Weakest-link pruning then assigns every
// internal node the complexity level at which it collapses into a leaf, so a
// fitted forest answers for any ccp_alpha without refitting: prediction stops
// descending at the first node whose collapse level is <= ccp_alpha.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ctxsense/error.hpp"
#include "ctxsense/numeric.hpp"

namespace ctxsense::learn {

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  Matrix select_rows(std::span<const std::size_t> idx) const {
    Matrix m(idx.size(), cols);
    for (std::size_t i = 0; i < idx.size(); ++i)
      std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(idx[i] * cols), cols,
                  m.data.begin() + static_cast<std::ptrdiff_t>(i * cols));
    return m;
  }

  Matrix select_cols(std::span<const std::size_t> idx) const {
    Matrix m(rows, idx.size());
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < idx.size(); ++j) m(r, j) = (*this)(r, idx[j]);
    return m;
  }
};

enum class MaxFeatures { Sqrt, All };

struct ForestParams {
  std::size_t n_trees = 500;
  MaxFeatures max_features = MaxFeatures::Sqrt;
  double ccp_alpha = 0.0;
  std::uint64_t seed = 0;
  bool bootstrap = true;
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double collapse_alpha = std::numeric_limits<double>::infinity();
  int majority = 0;
};

struct Tree {
  std::vector<TreeNode> nodes;
  std::vector<double> class_weight;  // nodes.size() x n_classes

  const TreeNode& leaf_for(std::span<const double> x, double ccp_alpha) const {
    const TreeNode* n = &nodes[0];
    while (n->feature >= 0 && n->collapse_alpha > ccp_alpha)
      n = &nodes[static_cast<std::size_t>(x[static_cast<std::size_t>(n->feature)] <= n->threshold ? n->left
                                                                                                   : n->right)];
    return *n;
  }

  std::size_t leaf_count(double ccp_alpha) const {
    std::size_t count = 0;
    std::vector<int> stack{0};
    while (!stack.empty()) {
      const auto& n = nodes[static_cast<std::size_t>(stack.back())];
      stack.pop_back();
      if (n.feature < 0 || n.collapse_alpha <= ccp_alpha) {
        ++count;
      } else {
        stack.push_back(n.left);
        stack.push_back(n.right);
      }
    }
    return count;
  }
};

namespace detail {

struct TreeBuilder {
  const Matrix& X;
  std::span<const int> y;
  std::size_t n_classes;
  std::size_t max_features;
  std::mt19937_64& rng;

  std::vector<std::size_t> samples;  // in-bag sample ids, partitioned per node
  std::vector<double> weight;        // per training row (bootstrap count)
  Tree tree;
  std::vector<double> node_weight;
  std::vector<double> node_impurity;

  struct Item {
    double x;
    std::size_t id;
  };
  std::vector<Item> scratch;

  static double gini(std::span<const double> w, double total) {
    if (total <= 0.0) return 0.0;
    double s = 0.0;
    for (double v : w) s += v * v;
    return 1.0 - s / (total * total);
  }

  int make_node(std::size_t begin, std::size_t end) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const std::size_t base = tree.class_weight.size();
    tree.class_weight.resize(base + n_classes, 0.0);
    double total = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      tree.class_weight[base + static_cast<std::size_t>(y[samples[i]])] += weight[samples[i]];
      total += weight[samples[i]];
    }
    int best = 0;
    for (std::size_t c = 1; c < n_classes; ++c)
      if (tree.class_weight[base + c] > tree.class_weight[base + static_cast<std::size_t>(best)])
        best = static_cast<int>(c);
    tree.nodes.back().majority = best;
    node_weight.push_back(total);
    node_impurity.push_back(gini(std::span<const double>(tree.class_weight).subspan(base, n_classes), total));
    return id;
  }

  void build() {
    struct Pending {
      int node;
      std::size_t begin, end;
    };
    std::vector<Pending> stack;
    stack.push_back({make_node(0, samples.size()), 0, samples.size()});
    std::vector<std::size_t> features(X.cols);
    std::vector<double> left_w(n_classes), right_w(n_classes);
    const std::size_t base_total = 0;
    (void)base_total;

    while (!stack.empty()) {
      const auto [node, begin, end] = stack.back();
      stack.pop_back();
      const auto nid = static_cast<std::size_t>(node);
      if (end - begin < 2 || node_impurity[nid] <= 1e-12) continue;

      const double total = node_weight[nid];
      std::span<const double> parent_w(tree.class_weight.data() + nid * n_classes, n_classes);
      double parent_score = 0.0;
      for (double v : parent_w) parent_score += v * v;
      parent_score /= total;

      std::iota(features.begin(), features.end(), 0);
      double best_score = -std::numeric_limits<double>::infinity();
      int best_feature = -1;
      double best_threshold = 0.0;
      std::size_t visited = 0;
      for (std::size_t k = 0; k < features.size() && visited < max_features; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, features.size() - 1);
        std::swap(features[k], features[pick(rng)]);
        const std::size_t f = features[k];

        scratch.clear();
        for (std::size_t i = begin; i < end; ++i) scratch.push_back({X(samples[i], f), samples[i]});
        std::sort(scratch.begin(), scratch.end(), [](const Item& a, const Item& b) { return a.x < b.x; });
        if (scratch.front().x == scratch.back().x) continue;  // constant here, draw another
        ++visited;

        std::fill(left_w.begin(), left_w.end(), 0.0);
        std::copy(parent_w.begin(), parent_w.end(), right_w.begin());
        double lw = 0.0, lsq = 0.0, rsq = 0.0;
        for (double v : right_w) rsq += v * v;
        for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
          const auto c = static_cast<std::size_t>(y[scratch[i].id]);
          const double w = weight[scratch[i].id];
          lsq += (2.0 * left_w[c] + w) * w;
          rsq += (-2.0 * right_w[c] + w) * w;
          left_w[c] += w;
          right_w[c] -= w;
          lw += w;
          if (scratch[i].x == scratch[i + 1].x) continue;
          const double rw = total - lw;
          const double score = lsq / lw + rsq / rw;
          if (score > best_score + 1e-12) {
            best_score = score;
            best_feature = static_cast<int>(f);
            best_threshold = 0.5 * (scratch[i].x + scratch[i + 1].x);
            if (best_threshold >= scratch[i + 1].x) best_threshold = scratch[i].x;
          }
        }
      }
      if (best_feature < 0 || best_score < parent_score - 1e-12) continue;

      const auto bf = static_cast<std::size_t>(best_feature);
      const auto mid = static_cast<std::size_t>(
          std::partition(samples.begin() + static_cast<std::ptrdiff_t>(begin),
                         samples.begin() + static_cast<std::ptrdiff_t>(end),
                         [&](std::size_t s) { return X(s, bf) <= best_threshold; }) -
          samples.begin());
      const int left = make_node(begin, mid);
      const int right = make_node(mid, end);
      auto& n = tree.nodes[nid];
      n.feature = best_feature;
      n.threshold = best_threshold;
      n.left = left;
      n.right = right;
      stack.push_back({right, mid, end});
      stack.push_back({left, begin, mid});
    }
  }

  /// Weakest-link pruning sequence: R(t) = (W_t / W_root) * gini(t).
  void assign_collapse_alphas() {
    const std::size_t n = tree.nodes.size();
    std::vector<int> parent(n, -1);
    for (std::size_t i = 0; i < n; ++i)
      if (tree.nodes[i].feature >= 0) {
        parent[static_cast<std::size_t>(tree.nodes[i].left)] = static_cast<int>(i);
        parent[static_cast<std::size_t>(tree.nodes[i].right)] = static_cast<int>(i);
      }
    const double root_w = node_weight[0];
    std::vector<double> risk(n), subtree_risk(n), leaves(n);
    for (std::size_t i = 0; i < n; ++i) risk[i] = node_weight[i] / root_w * node_impurity[i];
    // Children always have larger ids than their parent.
    for (std::size_t i = n; i-- > 0;) {
      const auto& nd = tree.nodes[i];
      if (nd.feature < 0) {
        subtree_risk[i] = risk[i];
        leaves[i] = 1.0;
      } else {
        const auto l = static_cast<std::size_t>(nd.left), r = static_cast<std::size_t>(nd.right);
        subtree_risk[i] = subtree_risk[l] + subtree_risk[r];
        leaves[i] = leaves[l] + leaves[r];
      }
    }
    std::vector<bool> active(n, false);  // internal and still in the pruned tree
    for (std::size_t i = 0; i < n; ++i) active[i] = tree.nodes[i].feature >= 0;

    double level = 0.0;
    while (true) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_node = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (!active[i]) continue;
        const double g = (risk[i] - subtree_risk[i]) / (leaves[i] - 1.0);
        if (g < best) best = g, best_node = i;
      }
      if (best_node == n) break;
      level = std::max(level, best);
      tree.nodes[best_node].collapse_alpha = level;
      // Deactivate the collapsed subtree.
      std::vector<std::size_t> stack{best_node};
      while (!stack.empty()) {
        const auto i = stack.back();
        stack.pop_back();
        if (!active[i]) continue;
        active[i] = false;
        stack.push_back(static_cast<std::size_t>(tree.nodes[i].left));
        stack.push_back(static_cast<std::size_t>(tree.nodes[i].right));
      }
      const double dr = risk[best_node] - subtree_risk[best_node];
      const double dl = leaves[best_node] - 1.0;
      subtree_risk[best_node] = risk[best_node];
      leaves[best_node] = 1.0;
      for (int p = parent[best_node]; p >= 0; p = parent[static_cast<std::size_t>(p)]) {
        subtree_risk[static_cast<std::size_t>(p)] += dr;
        leaves[static_cast<std::size_t>(p)] -= dl;
      }
    }
  }
};

}  // namespace detail

class RandomForest {
 public:
  ForestParams params;
  std::size_t n_features = 0;
  std::size_t n_classes = 0;
  std::size_t n_train = 0;
  std::vector<Tree> trees;
  std::vector<std::vector<std::uint16_t>> inbag;  // per tree, bootstrap count of each training row

  /// Majority vote at the given pruning level; ties go to the larger summed
  /// leaf probability, then the lower class index.
  int predict_one(std::span<const double> x, double ccp_alpha) const {
    return vote(x, ccp_alpha, nullptr, 0);
  }

  std::vector<int> predict(const Matrix& X) const { return predict(X, params.ccp_alpha); }

  std::vector<int> predict(const Matrix& X, double ccp_alpha) const {
    std::vector<int> out(X.rows);
    for (std::size_t r = 0; r < X.rows; ++r) out[r] = vote(X.row(r), ccp_alpha, nullptr, 0);
    return out;
  }

  /// Out-of-bag prediction for training row `row`: only trees that did not
  /// see it vote. Returns -1 when every tree saw it.
  int predict_oob(std::span<const double> x, std::size_t row, double ccp_alpha) const {
    return vote(x, ccp_alpha, &inbag, row);
  }

  std::vector<int> predict_oob(const Matrix& X_train, double ccp_alpha) const {
    std::vector<int> out(X_train.rows);
    for (std::size_t r = 0; r < X_train.rows; ++r) out[r] = predict_oob(X_train.row(r), r, ccp_alpha);
    return out;
  }

 private:
  int vote(std::span<const double> x, double ccp_alpha, const std::vector<std::vector<std::uint16_t>>* mask,
           std::size_t row) const {
    std::vector<double> votes(n_classes, 0.0), prob(n_classes, 0.0);
    bool any = false;
    for (std::size_t t = 0; t < trees.size(); ++t) {
      if (mask && (*mask)[t][row] > 0) continue;
      const auto& tree = trees[t];
      const auto& leaf = tree.leaf_for(x, ccp_alpha);
      votes[static_cast<std::size_t>(leaf.majority)] += 1.0;
      const auto id = static_cast<std::size_t>(&leaf - tree.nodes.data());
      double total = 0.0;
      for (std::size_t c = 0; c < n_classes; ++c) total += tree.class_weight[id * n_classes + c];
      for (std::size_t c = 0; c < n_classes; ++c)
        prob[c] += total > 0 ? tree.class_weight[id * n_classes + c] / total : 0.0;
      any = true;
    }
    if (!any) return -1;
    std::size_t best = 0;
    for (std::size_t c = 1; c < n_classes; ++c)
      if (votes[c] > votes[best] || (votes[c] == votes[best] && prob[c] > prob[best])) best = c;
    return static_cast<int>(best);
  }
};

inline std::size_t resolve_max_features(MaxFeatures policy, std::size_t d) {
  if (policy == MaxFeatures::All) return d;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d))));
}

inline RandomForest train_forest(const Matrix& X, std::span<const int> y, const ForestParams& params) {
  if (X.rows != y.size()) throw TrainError("X and y differ in length");
  if (X.rows == 0 || X.cols == 0) throw TrainError("empty training set");
  if (params.n_trees == 0) throw TrainError("n_trees must be at least 1");
  if (!(params.ccp_alpha >= 0.0)) throw TrainError("ccp_alpha must be non-negative");
  for (double v : X.data)
    if (!std::isfinite(v)) throw TrainError("training data contains missing or non-finite values");
  int max_label = 0;
  for (int v : y) {
    if (v < 0) throw TrainError("labels must be non-negative");
    max_label = std::max(max_label, v);
  }
  std::vector<bool> present(static_cast<std::size_t>(max_label) + 1, false);
  for (int v : y) present[static_cast<std::size_t>(v)] = true;
  if (std::count(present.begin(), present.end(), true) < 2) throw TrainError("training labels have a single class");

  RandomForest f;
  f.params = params;
  f.n_features = X.cols;
  f.n_classes = static_cast<std::size_t>(max_label) + 1;
  f.n_train = X.rows;
  f.trees.reserve(params.n_trees);
  f.inbag.reserve(params.n_trees);
  const std::size_t max_features = resolve_max_features(params.max_features, X.cols);

  for (std::size_t t = 0; t < params.n_trees; ++t) {
    std::mt19937_64 rng(derive_seed(params.seed, t));
    std::vector<std::uint16_t> counts(X.rows, 0);
    if (params.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, X.rows - 1);
      for (std::size_t i = 0; i < X.rows; ++i) ++counts[pick(rng)];
    } else {
      std::fill(counts.begin(), counts.end(), 1);
    }
    detail::TreeBuilder b{X, y, f.n_classes, max_features, rng, {}, {}, {}, {}, {}, {}};
    b.weight.resize(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i) {
      b.weight[i] = counts[i];
      if (counts[i] > 0) b.samples.push_back(i);
    }
    b.build();
    b.assign_collapse_alphas();
    f.trees.push_back(std::move(b.tree));
    f.inbag.push_back(std::move(counts));
  }
  return f;
}

}  // namespace ctxsense::learn
