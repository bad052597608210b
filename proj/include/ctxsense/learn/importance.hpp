#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "ctxsense/learn/forest.hpp"
#include "ctxsense/learn/metrics.hpp"
#include "ctxsense/numeric.hpp"

namespace ctxsense::learn {

struct FeatureImportance {
  std::vector<double> mean_drop;  // per column
  std::vector<double> sd_drop;
  double baseline = 0.0;
};

namespace detail {

inline double oob_score(const RandomForest& model, const Matrix& X, std::span<const int> y) {
  std::vector<int> yt, yp;
  for (std::size_t r = 0; r < X.rows; ++r) {
    const int p = model.predict_oob(X.row(r), r, model.params.ccp_alpha);
    if (p < 0) continue;
    yt.push_back(y[r]);
    yp.push_back(p);
  }
  return macro_accuracy(yt, yp, model.n_classes);
}

}  // namespace detail

/// Mean decrease in out-of-bag macro-accuracy when one column is shuffled.
/// X and y must be the rows the model was trained on.
inline FeatureImportance permutation_importance(const RandomForest& model, const Matrix& X, std::span<const int> y,
                                                std::size_t n_repeats, std::uint64_t seed) {
  if (X.rows != model.n_train || X.cols != model.n_features)
    throw std::invalid_argument("permutation importance needs the training matrix");
  FeatureImportance out;
  out.baseline = detail::oob_score(model, X, y);
  out.mean_drop.assign(X.cols, 0.0);
  out.sd_drop.assign(X.cols, 0.0);
  Matrix work = X;
  std::vector<double> column(X.rows), drops;
  for (std::size_t f = 0; f < X.cols; ++f) {
    for (std::size_t r = 0; r < X.rows; ++r) column[r] = X(r, f);
    drops.clear();
    for (std::size_t rep = 0; rep < n_repeats; ++rep) {
      std::mt19937_64 rng(derive_seed(seed, f * n_repeats + rep));
      auto shuffled = column;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      for (std::size_t r = 0; r < X.rows; ++r) work(r, f) = shuffled[r];
      drops.push_back(out.baseline - detail::oob_score(model, work, y));
    }
    for (std::size_t r = 0; r < X.rows; ++r) work(r, f) = column[r];
    if (!drops.empty()) {
      out.mean_drop[f] = mean(drops);
      out.sd_drop[f] = drops.size() > 1 ? sample_sd(drops) : 0.0;
    }
  }
  return out;
}

}  // namespace ctxsense::learn
