#pragma once

// Univariate filter scores for k-best feature selection.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ctxsense/error.hpp"
#include "ctxsense/learn/forest.hpp"
#include "ctxsense/numeric.hpp"

namespace ctxsense::learn {

enum class Selector { Anova, MutualInfo };

inline constexpr std::string_view to_token(Selector s) { return s == Selector::Anova ? "anova" : "mutual_info"; }

inline Selector parse_selector(std::string_view token) {
  if (token == "anova") return Selector::Anova;
  if (token == "mutual_info") return Selector::MutualInfo;
  throw ParseError("unknown selector '" + std::string(token) + "'");
}

/// One-way ANOVA F per column. Constant columns score 0; columns with zero
/// within-class spread but distinct class means score +inf.
inline std::vector<double> anova_f_scores(const Matrix& X, std::span<const int> y) {
  int n_classes = 0;
  for (int v : y) n_classes = std::max(n_classes, v + 1);
  std::vector<double> scores(X.cols, 0.0);
  const auto n = static_cast<double>(X.rows);
  std::vector<double> sum(static_cast<std::size_t>(n_classes)), count(static_cast<std::size_t>(n_classes));
  for (int v : y) count[static_cast<std::size_t>(v)] += 1.0;
  const auto groups = static_cast<double>(std::count_if(count.begin(), count.end(), [](double c) { return c > 0; }));
  if (groups < 2 || n - groups <= 0) return scores;

  for (std::size_t f = 0; f < X.cols; ++f) {
    std::fill(sum.begin(), sum.end(), 0.0);
    double total = 0.0;
    for (std::size_t r = 0; r < X.rows; ++r) {
      sum[static_cast<std::size_t>(y[r])] += X(r, f);
      total += X(r, f);
    }
    const double grand = total / n;
    double ssb = 0.0, ssw = 0.0;
    for (std::size_t c = 0; c < sum.size(); ++c)
      if (count[c] > 0) ssb += count[c] * std::pow(sum[c] / count[c] - grand, 2);
    for (std::size_t r = 0; r < X.rows; ++r) {
      const auto c = static_cast<std::size_t>(y[r]);
      ssw += std::pow(X(r, f) - sum[c] / count[c], 2);
    }
    // Round-off guard: spreads this small relative to the data are zero.
    double scale = 0.0;
    for (std::size_t r = 0; r < X.rows; ++r) scale = std::max(scale, std::abs(X(r, f)));
    const double eps = 1e-24 * std::max(1.0, scale * scale) * n;
    if (ssb <= eps) {
      scores[f] = 0.0;
    } else if (ssw <= eps) {
      scores[f] = std::numeric_limits<double>::infinity();
    } else {
      scores[f] = (ssb / (groups - 1.0)) / (ssw / (n - groups));
    }
  }
  return scores;
}

/// Plug-in mutual information (nats) between each column, discretised into
/// 10 quantile bins, and the class label.
inline std::vector<double> mutual_info_scores(const Matrix& X, std::span<const int> y, std::size_t n_bins = 10) {
  int n_classes = 0;
  for (int v : y) n_classes = std::max(n_classes, v + 1);
  const auto C = static_cast<std::size_t>(n_classes);
  std::vector<double> scores(X.cols, 0.0);
  if (X.rows == 0) return scores;
  const auto n = static_cast<double>(X.rows);

  std::vector<double> col(X.rows), edges(n_bins - 1);
  std::vector<double> joint(n_bins * C), pb(n_bins), pc(C);
  for (int v : y) pc[static_cast<std::size_t>(v)] += 1.0 / n;
  for (std::size_t f = 0; f < X.cols; ++f) {
    for (std::size_t r = 0; r < X.rows; ++r) col[r] = X(r, f);
    std::sort(col.begin(), col.end());
    for (std::size_t b = 1; b < n_bins; ++b)
      edges[b - 1] = percentile_sorted(col, 100.0 * static_cast<double>(b) / static_cast<double>(n_bins));
    std::fill(joint.begin(), joint.end(), 0.0);
    std::fill(pb.begin(), pb.end(), 0.0);
    for (std::size_t r = 0; r < X.rows; ++r) {
      const auto b = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), X(r, f)) - edges.begin());
      joint[b * C + static_cast<std::size_t>(y[r])] += 1.0 / n;
      pb[b] += 1.0 / n;
    }
    double mi = 0.0;
    for (std::size_t b = 0; b < n_bins; ++b)
      for (std::size_t c = 0; c < C; ++c) {
        const double p = joint[b * C + c];
        if (p > 0) mi += p * std::log(p / (pb[b] * pc[c]));
      }
    scores[f] = mi > 1e-12 ? mi : 0.0;
  }
  return scores;
}

inline std::vector<double> selector_scores(const Matrix& X, std::span<const int> y, Selector method) {
  return method == Selector::Anova ? anova_f_scores(X, y) : mutual_info_scores(X, y);
}

/// Indices of the k best-scoring columns in ascending index order; ties in
/// score go to the lower index.
inline std::vector<std::size_t> select_k_best(const Matrix& X, std::span<const int> y, std::size_t k,
                                              Selector method) {
  if (k < 1 || k > X.cols)
    throw std::invalid_argument("k must be in [1, " + std::to_string(X.cols) + "], got " + std::to_string(k));
  const auto scores = selector_scores(X, y, method);
  std::vector<std::size_t> order(X.cols);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace ctxsense::learn
