#pragma once

// Cross-task benchmarks: participant-level conditioning ablation and the
// NN-cleaning comparison.

#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ctxsense/features.hpp"
#include "ctxsense/hrv.hpp"
#include "ctxsense/learn/cv.hpp"

namespace ctxsense::learn {

struct BenchmarkCell {
  double mean = 0.0;
  double sem = 0.0;
  std::size_t n_folds = 0;
  std::map<TaskKind, double> per_task;
};

/// Pools outer-fold scores over tasks; tasks that cannot be built are skipped.
inline BenchmarkCell cross_task_score(const FeatureMatrix& m, std::span<const TaskKind> tasks, const CVConfig& cfg,
                                      std::span<const std::size_t> columns) {
  BenchmarkCell cell;
  std::vector<double> pooled;
  for (auto t : tasks) {
    TaskDataset d;
    try {
      d = build_task(m, t);
    } catch (const TaskConstructionError&) {
      continue;
    }
    const auto data = to_labeled(d, columns);
    const auto report = nlopocv(data, cfg, data.X.cols);
    cell.per_task[t] = report.mean;
    const auto s = report.fold_scores();
    pooled.insert(pooled.end(), s.begin(), s.end());
  }
  if (pooled.empty()) throw InsufficientDataError("no task could be evaluated");
  cell.mean = mean(pooled);
  cell.sem = standard_error(pooled);
  cell.n_folds = pooled.size();
  return cell;
}

struct ConditioningRow {
  bool center = false;
  bool scale = false;
  BenchmarkCell score;
};

/// Rows in the order (center, scale) = (on, on), (on, off), (off, on), (off, off).
inline std::vector<ConditioningRow> conditioning_benchmark(const FeatureMatrix& raw, std::span<const TaskKind> tasks,
                                                           const CVConfig& cfg) {
  std::vector<ConditioningRow> rows;
  for (bool center : {true, false})
    for (bool scale : {true, false}) {
      const auto m = condition_matrix(raw, center, scale);
      rows.push_back({center, scale, cross_task_score(m, tasks, cfg, {})});
    }
  return rows;
}

struct NNBenchmarkRow {
  NNCleaning method = NNCleaning::None;
  double window_s = 0.0;  // <= 0 means all data
  BenchmarkCell score;
  bool best_in_window = false;
};

using NNFeatureSets = std::map<std::pair<NNCleaning, double>, FeatureMatrix>;

/// Scores each (method, window) feature matrix on the NN-derived features
/// only, after participant centering.
inline std::vector<NNBenchmarkRow> nn_filter_benchmark(const NNFeatureSets& sets, std::span<const TaskKind> tasks,
                                                       const CVConfig& cfg) {
  std::vector<std::size_t> nn_cols(kNumNNFeatures);
  std::iota(nn_cols.begin(), nn_cols.end(), 0);
  std::vector<NNBenchmarkRow> rows;
  for (const auto& [key, m] : sets) {
    const auto centered = condition_matrix(m, true, false);
    rows.push_back({key.first, key.second, cross_task_score(centered, tasks, cfg, nn_cols), false});
  }
  std::map<double, std::size_t> best;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto it = best.find(rows[i].window_s);
    if (it == best.end() || rows[i].score.mean > rows[it->second].score.mean) best[rows[i].window_s] = i;
  }
  for (const auto& [w, i] : best) rows[i].best_in_window = true;
  return rows;
}

}  // namespace ctxsense::learn
