#pragma once

// Nested leave-one-participant-out cross-validation and k-best curves.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ctxsense/error.hpp"
#include "ctxsense/features.hpp"
#include "ctxsense/learn/forest.hpp"
#include "ctxsense/learn/metrics.hpp"
#include "ctxsense/learn/selection.hpp"
#include "ctxsense/numeric.hpp"
#include "ctxsense/parallel.hpp"

namespace ctxsense::learn {

/// Rows with labels and participant membership, independent of the feature set.
struct LabeledData {
  Matrix X;
  std::vector<int> y;
  std::vector<std::size_t> group;        // index into group_names
  std::vector<std::string> group_names;  // sorted

  std::size_t size() const { return y.size(); }
};

inline LabeledData to_labeled(const TaskDataset& d, std::span<const std::size_t> columns = {}) {
  std::vector<std::size_t> cols(columns.begin(), columns.end());
  if (cols.empty()) {
    cols.resize(kNumFeatures);
    std::iota(cols.begin(), cols.end(), 0);
  }
  LabeledData out;
  out.X = Matrix(d.rows.size(), cols.size());
  out.group_names = d.participants;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < d.participants.size(); ++i) index[d.participants[i]] = i;
  for (std::size_t r = 0; r < d.rows.size(); ++r) {
    for (std::size_t j = 0; j < cols.size(); ++j) out.X(r, j) = d.rows[r].values[cols[j]];
    out.y.push_back(d.rows[r].label);
    out.group.push_back(index.at(d.rows[r].participant_id));
  }
  return out;
}

enum class InnerCV { Lopo, Group5 };

inline constexpr std::string_view to_token(InnerCV m) { return m == InnerCV::Lopo ? "lopo" : "group5"; }

inline InnerCV parse_inner_cv(std::string_view token) {
  if (token == "lopo") return InnerCV::Lopo;
  if (token == "group5") return InnerCV::Group5;
  throw ParseError("unknown inner CV mode '" + std::string(token) + "'");
}

struct CVConfig {
  ForestParams forest;
  std::vector<double> ccp_grid{0.0, 0.001, 0.01, 0.05, 0.1};
  std::vector<Selector> selectors{Selector::Anova, Selector::MutualInfo};
  InnerCV inner = InnerCV::Lopo;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

struct FoldResult {
  std::string participant;
  bool skipped = false;
  std::string skip_reason;
  double macro_accuracy = 0.0;
  double ccp_alpha = 0.0;
  Selector selector = Selector::Anova;
  double inner_score = 0.0;
  std::vector<std::size_t> features;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
};

struct CVReport {
  std::size_t k = 0;
  std::vector<FoldResult> folds;  // one per participant, in participant order
  double mean = 0.0;
  double sem = 0.0;
  std::size_t n_evaluated = 0;

  std::vector<double> fold_scores() const {
    std::vector<double> v;
    for (const auto& f : folds)
      if (!f.skipped) v.push_back(f.macro_accuracy);
    return v;
  }
};

inline double standard_error(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  return sample_sd(v) / std::sqrt(static_cast<double>(v.size()));
}

namespace detail {

inline bool has_both_classes(std::span<const int> y, std::span<const std::size_t> rows, std::size_t n_classes) {
  std::vector<bool> seen(n_classes, false);
  for (auto r : rows) seen[static_cast<std::size_t>(y[r])] = true;
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

inline std::vector<int> take(std::span<const int> y, std::span<const std::size_t> rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(y[r]);
  return out;
}

/// Inner splits over the outer-training participants: each entry lists the
/// held-out participants of one inner fold.
inline std::vector<std::vector<std::size_t>> inner_splits(std::vector<std::size_t> participants, InnerCV mode,
                                                          std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> splits;
  if (mode == InnerCV::Lopo) {
    for (auto p : participants) splits.push_back({p});
    return splits;
  }
  std::mt19937_64 rng(seed);
  std::shuffle(participants.begin(), participants.end(), rng);
  const std::size_t k = std::min<std::size_t>(5, participants.size());
  splits.resize(k);
  for (std::size_t i = 0; i < participants.size(); ++i) splits[i % k].push_back(participants[i]);
  for (auto& s : splits) std::sort(s.begin(), s.end());
  return splits;
}

struct Candidate {
  Selector selector;
  double ccp;
};

}  // namespace detail

/// Nested leave-one-participant-out CV with k selected features. The inner
/// loop tunes (selector, ccp_alpha) by mean inner macro-accuracy; ties go to
/// the earlier grid entry. Folds whose held-out participant has a single class
/// are skipped and recorded.
inline CVReport nlopocv(const LabeledData& data, const CVConfig& cfg, std::size_t k) {
  const std::size_t d = data.X.cols;
  if (k < 1 || k > d) throw std::invalid_argument("k out of range");
  if (data.group_names.size() < 3) throw InsufficientDataError("nested CV needs at least 3 participants");
  if (cfg.ccp_grid.empty() || cfg.selectors.empty()) throw std::invalid_argument("empty hyperparameter grid");
  std::size_t n_classes = 0;
  for (int v : data.y) n_classes = std::max(n_classes, static_cast<std::size_t>(v) + 1);
  n_classes = std::max<std::size_t>(n_classes, 2);

  // With every feature kept the selector is irrelevant.
  const std::vector<Selector> selectors =
      k == d ? std::vector<Selector>{cfg.selectors.front()} : cfg.selectors;

  const std::size_t n_groups = data.group_names.size();
  std::vector<std::vector<std::size_t>> rows_of(n_groups);
  for (std::size_t r = 0; r < data.size(); ++r) rows_of[data.group[r]].push_back(r);

  CVReport report;
  report.k = k;
  report.folds.resize(n_groups);

  auto fit_predict = [&](std::span<const std::size_t> train, std::span<const std::size_t> test, Selector sel,
                         std::uint64_t seed, std::vector<std::size_t>& features) {
    const Matrix Xtr = data.X.select_rows(train);
    const auto ytr = detail::take(data.y, train);
    features = k == d ? [&] {
      std::vector<std::size_t> all(d);
      std::iota(all.begin(), all.end(), 0);
      return all;
    }()
                      : select_k_best(Xtr, ytr, k, sel);
    ForestParams fp = cfg.forest;
    fp.seed = seed;
    return std::make_pair(train_forest(Xtr.select_cols(features), ytr, fp), data.X.select_rows(test).select_cols(features));
  };

  parallel_for(n_groups, cfg.jobs, [&](std::size_t outer) {
    FoldResult& fold = report.folds[outer];
    fold.participant = data.group_names[outer];
    const auto& test = rows_of[outer];
    std::vector<std::size_t> train;
    for (std::size_t g = 0; g < n_groups; ++g)
      if (g != outer) train.insert(train.end(), rows_of[g].begin(), rows_of[g].end());
    std::sort(train.begin(), train.end());
    fold.n_train = train.size();
    fold.n_test = test.size();
    for (auto r : train)
      if (data.group[r] == outer) throw std::logic_error("participant leaked into its own training fold");
    if (test.empty() || !detail::has_both_classes(data.y, test, n_classes)) {
      fold.skipped = true;
      fold.skip_reason = "held-out participant has a single class";
      return;
    }
    if (!detail::has_both_classes(data.y, train, n_classes)) {
      fold.skipped = true;
      fold.skip_reason = "training participants have a single class";
      return;
    }
    const std::uint64_t outer_seed = derive_seed(cfg.seed, outer);

    std::vector<std::size_t> inner_groups;
    for (std::size_t g = 0; g < n_groups; ++g)
      if (g != outer) inner_groups.push_back(g);
    const auto splits = detail::inner_splits(inner_groups, cfg.inner, derive_seed(outer_seed, 0x5eed));

    std::vector<detail::Candidate> grid;
    for (auto s : selectors)
      for (double a : cfg.ccp_grid) grid.push_back({s, a});
    std::vector<double> score_sum(grid.size(), 0.0);
    std::size_t valid_inner = 0;

    for (std::size_t i = 0; i < splits.size(); ++i) {
      std::vector<std::size_t> itest, itrain;
      for (auto g : splits[i]) itest.insert(itest.end(), rows_of[g].begin(), rows_of[g].end());
      for (auto r : train)
        if (std::find(splits[i].begin(), splits[i].end(), data.group[r]) == splits[i].end()) itrain.push_back(r);
      std::sort(itest.begin(), itest.end());
      if (!detail::has_both_classes(data.y, itest, n_classes) ||
          !detail::has_both_classes(data.y, itrain, n_classes))
        continue;
      ++valid_inner;
      const auto ytest = detail::take(data.y, itest);
      // Selectors that agree on the feature set share one forest.
      std::vector<std::pair<std::vector<std::size_t>, std::vector<double>>> cache;
      for (std::size_t s = 0; s < selectors.size(); ++s) {
        const Matrix Xtr = data.X.select_rows(itrain);
        const auto ytr = detail::take(data.y, itrain);
        std::vector<std::size_t> feats(d);
        std::iota(feats.begin(), feats.end(), 0);
        if (k < d) feats = select_k_best(Xtr, ytr, k, selectors[s]);
        const std::vector<double>* scores = nullptr;
        for (const auto& [f, sc] : cache)
          if (f == feats) scores = &sc;
        if (!scores) {
          ForestParams fp = cfg.forest;
          fp.seed = derive_seed(outer_seed, i + 1);
          const auto model = train_forest(Xtr.select_cols(feats), ytr, fp);
          const Matrix Xte = data.X.select_rows(itest).select_cols(feats);
          std::vector<double> sc;
          for (double a : cfg.ccp_grid) sc.push_back(macro_accuracy(ytest, model.predict(Xte, a), n_classes));
          cache.emplace_back(feats, std::move(sc));
          scores = &cache.back().second;
        }
        for (std::size_t a = 0; a < cfg.ccp_grid.size(); ++a) score_sum[s * cfg.ccp_grid.size() + a] += (*scores)[a];
      }
    }

    std::size_t best = 0;
    if (valid_inner > 0)
      for (std::size_t c = 1; c < grid.size(); ++c)
        if (score_sum[c] > score_sum[best] + 1e-12) best = c;
    fold.selector = grid[best].selector;
    fold.ccp_alpha = grid[best].ccp;
    fold.inner_score = valid_inner > 0 ? score_sum[best] / static_cast<double>(valid_inner) : 0.0;

    auto [model, Xte] = fit_predict(train, test, fold.selector, derive_seed(outer_seed, 0), fold.features);
    fold.macro_accuracy = macro_accuracy(detail::take(data.y, test), model.predict(Xte, fold.ccp_alpha), n_classes);
  });

  const auto scores = report.fold_scores();
  report.n_evaluated = scores.size();
  if (scores.empty()) throw InsufficientDataError("no outer fold could be evaluated");
  report.mean = mean(scores);
  report.sem = standard_error(scores);
  return report;
}

inline CVReport nlopocv(const TaskDataset& task, const CVConfig& cfg, std::size_t k = kNumFeatures) {
  return nlopocv(to_labeled(task), cfg, k);
}

struct KBestCurve {
  std::vector<CVReport> points;  // points[i] is k = i + 1
  std::size_t peak_k = 0;
  std::size_t minimal_k = 0;  // smallest k within one SEM of the peak
};

inline std::size_t minimal_k_within_sem(std::span<const double> means, std::span<const double> sems,
                                        std::size_t* peak_out = nullptr) {
  std::size_t peak = 0;
  for (std::size_t i = 1; i < means.size(); ++i)
    if (means[i] > means[peak]) peak = i;
  if (peak_out) *peak_out = peak + 1;
  for (std::size_t i = 0; i < means.size(); ++i)
    if (means[i] >= means[peak] - sems[peak]) return i + 1;
  return peak + 1;
}

inline KBestCurve kbest_curve(const LabeledData& data, const CVConfig& cfg, std::size_t k_max = 0) {
  if (k_max == 0 || k_max > data.X.cols) k_max = data.X.cols;
  KBestCurve curve;
  std::vector<double> means, sems;
  for (std::size_t k = 1; k <= k_max; ++k) {
    curve.points.push_back(nlopocv(data, cfg, k));
    means.push_back(curve.points.back().mean);
    sems.push_back(curve.points.back().sem);
  }
  curve.minimal_k = minimal_k_within_sem(means, sems, &curve.peak_k);
  return curve;
}

inline KBestCurve kbest_curve(const TaskDataset& task, const CVConfig& cfg, std::size_t k_max = 0) {
  return kbest_curve(to_labeled(task), cfg, k_max);
}

}  // namespace ctxsense::learn
