#pragma once

// HDBSCAN: density-based hierarchical clustering with excess-of-mass cluster
// selection, plus the per-class purity report used for post-hoc analysis.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "ctxsense/error.hpp"
#include "ctxsense/learn/forest.hpp"

namespace ctxsense {

enum class ClusterSelection { ExcessOfMass, Leaf };

struct HdbscanParams {
  std::size_t min_cluster_size = 5;
  std::size_t min_samples = 5;
  ClusterSelection selection = ClusterSelection::ExcessOfMass;
  bool allow_single_cluster = false;
};

struct ClusterAssignment {
  std::vector<int> labels;       // -1 = outlier, clusters numbered 0..C-1
  std::vector<double> stability;  // per cluster
  std::size_t n_clusters() const { return stability.size(); }
};

namespace detail {

struct CondensedEdge {
  std::size_t parent;
  std::size_t child;  // < n: a point; >= n: a cluster
  double lambda;
  std::size_t size;
};

struct UnionFind {
  std::vector<std::size_t> parent, size;
  explicit UnionFind(std::size_t n) : parent(n), size(n, 1) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
};

inline std::vector<double> core_distances(const learn::Matrix& X, std::size_t min_samples) {
  const std::size_t n = X.rows;
  const std::size_t k = std::min(min_samples, n);
  std::vector<double> core(n), dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < X.cols; ++c) s += (X(i, c) - X(j, c)) * (X(i, c) - X(j, c));
      dist[j] = std::sqrt(s);
    }
    // The point itself counts as its first neighbour.
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
    core[i] = dist[k - 1];
  }
  return core;
}

}  // namespace detail

inline ClusterAssignment hdbscan_fit(const learn::Matrix& X, const HdbscanParams& params = {}) {
  const std::size_t n = X.rows;
  const std::size_t mcs = params.min_cluster_size;
  if (mcs < 2) throw ClusterError("min_cluster_size must be at least 2");
  if (params.min_samples < 1) throw ClusterError("min_samples must be at least 1");
  if (n < mcs) throw ClusterError("need at least min_cluster_size = " + std::to_string(mcs) + " rows, got " +
                                  std::to_string(n));
  for (double v : X.data)
    if (!std::isfinite(v)) throw ClusterError("non-finite feature value");

  const auto core = detail::core_distances(X, params.min_samples);
  auto mrd = [&](std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t c = 0; c < X.cols; ++c) s += (X(i, c) - X(j, c)) * (X(i, c) - X(j, c));
    return std::max({std::sqrt(s), core[i], core[j]});
  };

  // Prim's MST on the dense mutual-reachability graph.
  struct Edge {
    std::size_t a, b;
    double w;
  };
  std::vector<Edge> mst;
  mst.reserve(n - 1);
  {
    std::vector<bool> in_tree(n, false);
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> from(n, 0);
    std::size_t current = 0;
    in_tree[0] = true;
    for (std::size_t step = 1; step < n; ++step) {
      std::size_t next = n;
      for (std::size_t j = 0; j < n; ++j) {
        if (in_tree[j]) continue;
        const double w = mrd(current, j);
        if (w < best[j]) best[j] = w, from[j] = current;
        if (next == n || best[j] < best[next]) next = j;
      }
      mst.push_back({from[next], next, best[next]});
      in_tree[next] = true;
      current = next;
    }
  }
  std::stable_sort(mst.begin(), mst.end(), [](const Edge& a, const Edge& b) { return a.w < b.w; });

  // Single-linkage dendrogram: node n + i merges two components at mst[i].w.
  const std::size_t n_nodes = 2 * n - 1;
  std::vector<std::size_t> left(n_nodes, 0), right(n_nodes, 0), size(n_nodes, 1);
  std::vector<double> height(n_nodes, 0.0);
  {
    detail::UnionFind uf(n_nodes);
    std::vector<std::size_t> node_of(n_nodes);
    std::iota(node_of.begin(), node_of.end(), 0);
    for (std::size_t i = 0; i < mst.size(); ++i) {
      const std::size_t ra = uf.find(mst[i].a), rb = uf.find(mst[i].b);
      const std::size_t node = n + i;
      left[node] = node_of[ra];
      right[node] = node_of[rb];
      size[node] = size[left[node]] + size[right[node]];
      height[node] = mst[i].w;
      uf.parent[ra] = uf.parent[rb] = node;
      node_of[node] = node;
    }
  }
  const std::size_t root = n_nodes - 1;

  auto collect_points = [&](std::size_t node, std::vector<std::size_t>& out) {
    std::vector<std::size_t> stack{node};
    while (!stack.empty()) {
      const auto x = stack.back();
      stack.pop_back();
      if (x < n) {
        out.push_back(x);
      } else {
        stack.push_back(left[x]);
        stack.push_back(right[x]);
      }
    }
  };

  // Condense: splits where both sides reach min_cluster_size create clusters;
  // smaller sides shed their points at that density level.
  std::vector<detail::CondensedEdge> condensed;
  std::vector<std::size_t> relabel(n_nodes, 0);
  std::size_t next_label = n + 1;
  relabel[root] = n;
  if (n > 1) {
    std::vector<std::size_t> queue{root};
    std::vector<std::size_t> points;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      const std::size_t node = queue[qi];
      const double lambda = height[node] > 0 ? 1.0 / height[node] : std::numeric_limits<double>::infinity();
      const std::size_t l = left[node], r = right[node];
      const bool big_l = size[l] >= mcs, big_r = size[r] >= mcs;
      const std::size_t parent = relabel[node];
      auto shed = [&](std::size_t child) {
        points.clear();
        collect_points(child, points);
        for (auto p : points) condensed.push_back({parent, p, lambda, 1});
      };
      auto descend = [&](std::size_t child, std::size_t label) {
        relabel[child] = label;
        if (child >= n) queue.push_back(child);
        else condensed.push_back({parent, child, lambda, 1});
      };
      if (big_l && big_r) {
        for (auto child : {l, r}) {
          relabel[child] = next_label++;
          condensed.push_back({parent, relabel[child], lambda, size[child]});
          if (child >= n) queue.push_back(child);
        }
      } else if (!big_l && !big_r) {
        shed(l);
        shed(r);
      } else if (big_l) {
        shed(r);
        descend(l, parent);
      } else {
        shed(l);
        descend(r, parent);
      }
    }
  }

  const std::size_t n_labels = next_label - n;  // condensed clusters, root = 0
  std::vector<double> birth(n_labels, 0.0), stability(n_labels, 0.0);
  std::vector<std::vector<std::size_t>> children(n_labels);
  for (const auto& e : condensed)
    if (e.child >= n) {
      birth[e.child - n] = e.lambda;
      children[e.parent - n].push_back(e.child - n);
    }
  for (const auto& e : condensed) {
    const double lam = std::isinf(e.lambda) ? birth[e.parent - n] : e.lambda;
    stability[e.parent - n] += (lam - birth[e.parent - n]) * static_cast<double>(e.size);
  }

  std::vector<bool> selected(n_labels, false);
  auto clear_below = [&](std::size_t c) {
    std::vector<std::size_t> stack(children[c].begin(), children[c].end());
    while (!stack.empty()) {
      const auto x = stack.back();
      stack.pop_back();
      selected[x] = false;
      stack.insert(stack.end(), children[x].begin(), children[x].end());
    }
  };
  const std::size_t first = params.allow_single_cluster ? 0 : 1;
  if (params.selection == ClusterSelection::Leaf) {
    for (std::size_t c = first; c < n_labels; ++c) selected[c] = children[c].empty();
  } else {
    std::vector<double> best = stability;
    // Children always carry larger labels than their parent.
    for (std::size_t c = n_labels; c-- > first;) {
      selected[c] = true;
      double below = 0.0;
      for (auto ch : children[c]) below += best[ch];
      if (!children[c].empty() && below > stability[c]) {
        selected[c] = false;
        best[c] = below;
      } else {
        clear_below(c);
      }
    }
  }

  ClusterAssignment out;
  out.labels.assign(n, -1);
  std::vector<int> final_label(n_labels, -1);
  for (std::size_t c = 0; c < n_labels; ++c)
    if (selected[c]) {
      final_label[c] = static_cast<int>(out.stability.size());
      out.stability.push_back(stability[c]);
    }
  // Each point belongs to the selected cluster (if any) on its path to the root.
  std::vector<std::size_t> parent_of(n_labels, 0);
  for (std::size_t c = 0; c < n_labels; ++c)
    for (auto ch : children[c]) parent_of[ch] = c;
  for (const auto& e : condensed) {
    if (e.child >= n) continue;
    std::size_t c = e.parent - n;
    int label = -1;
    while (true) {
      if (final_label[c] >= 0) label = final_label[c];
      if (c == 0) break;
      c = parent_of[c];
    }
    out.labels[e.child] = label;
  }
  return out;
}

struct ClusterSummary {
  std::size_t size = 0;
  int majority_class = 0;
  double purity = 0.0;
};

struct ClassClusterStats {
  std::string name;
  std::size_t count = 0;
  double mean_size = 0.0;
  double mean_purity = 0.0;
  std::size_t outliers = 0;
};

struct ClusterReport {
  std::vector<ClusterSummary> clusters;
  std::vector<ClassClusterStats> per_class;
  std::size_t n_rows = 0;
};

/// Attributes each cluster to its majority class (ties to the lower class)
/// and summarises clusters and outliers per class.
inline ClusterReport cluster_report(const ClusterAssignment& a, std::span<const int> class_labels,
                                    std::span<const std::string_view> class_names) {
  if (class_labels.size() != a.labels.size()) throw ClusterError("class labels and assignment differ in length");
  const std::size_t C = class_names.size();
  ClusterReport r;
  r.n_rows = a.labels.size();
  std::vector<std::vector<std::size_t>> counts(a.n_clusters(), std::vector<std::size_t>(C, 0));
  r.per_class.resize(C);
  for (std::size_t c = 0; c < C; ++c) r.per_class[c].name = std::string(class_names[c]);
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    const int cls = class_labels[i];
    if (cls < 0 || static_cast<std::size_t>(cls) >= C) throw ClusterError("class label out of range");
    if (a.labels[i] < 0) ++r.per_class[static_cast<std::size_t>(cls)].outliers;
    else ++counts[static_cast<std::size_t>(a.labels[i])][static_cast<std::size_t>(cls)];
  }
  for (const auto& cnt : counts) {
    ClusterSummary s;
    s.size = std::accumulate(cnt.begin(), cnt.end(), std::size_t{0});
    s.majority_class = static_cast<int>(std::max_element(cnt.begin(), cnt.end()) - cnt.begin());
    s.purity = s.size ? static_cast<double>(cnt[static_cast<std::size_t>(s.majority_class)]) / static_cast<double>(s.size) : 0.0;
    auto& g = r.per_class[static_cast<std::size_t>(s.majority_class)];
    ++g.count;
    g.mean_size += static_cast<double>(s.size);
    g.mean_purity += s.purity;
    r.clusters.push_back(s);
  }
  for (auto& g : r.per_class)
    if (g.count) {
      g.mean_size /= static_cast<double>(g.count);
      g.mean_purity /= static_cast<double>(g.count);
    }
  return r;
}

}  // namespace ctxsense
