#include <random>

#include <gtest/gtest.h>

#include "ctxsense/learn/benchmarks.hpp"
#include "ctxsense/learn/cv.hpp"
#include "ctxsense/learn/forest.hpp"
#include "ctxsense/learn/importance.hpp"
#include "ctxsense/learn/metrics.hpp"
#include "ctxsense/learn/selection.hpp"

using namespace ctxsense;
using namespace ctxsense::learn;

namespace {

// n participants x per rows each, balanced labels, noise columns; `signal`
// adds `shift` to label-1 rows of the listed columns.
LabeledData planted(std::size_t participants, std::size_t per, std::size_t cols, std::vector<std::size_t> signal,
                    double shift, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  LabeledData d;
  d.X = Matrix(participants * per, cols);
  for (std::size_t p = 0; p < participants; ++p) {
    d.group_names.push_back("P" + std::to_string(100 + p));
    for (std::size_t i = 0; i < per; ++i) {
      const std::size_t r = p * per + i;
      const int label = static_cast<int>(i % 2);
      for (std::size_t c = 0; c < cols; ++c) d.X(r, c) = g(rng);
      if (label)
        for (auto c : signal) d.X(r, c) += shift;
      d.y.push_back(label);
      d.group.push_back(p);
    }
  }
  return d;
}

CVConfig fast_cv(std::uint64_t seed) {
  CVConfig cfg;
  cfg.forest.n_trees = 40;
  cfg.ccp_grid = {0.0, 0.01};
  cfg.inner = InnerCV::Group5;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST(MacroAccuracy, HandExample) {
  const std::vector<int> y{0, 0, 1, 1}, p{0, 1, 1, 1};
  EXPECT_DOUBLE_EQ(macro_accuracy(y, p), 0.75);
  EXPECT_DOUBLE_EQ(macro_accuracy(y, y), 1.0);
}

TEST(MacroAccuracy, InvariantToClassImbalance) {
  // Predicting the majority class scores chance however skewed the data.
  std::vector<int> y(100, 0), p(100, 0);
  for (int i = 0; i < 10; ++i) y[static_cast<std::size_t>(i)] = 1;
  EXPECT_DOUBLE_EQ(macro_accuracy(y, p), 0.5);
  EXPECT_THROW(macro_accuracy(std::vector<int>{0, 0}, std::vector<int>{0, 0}), MetricError);
  EXPECT_THROW(macro_accuracy(std::vector<int>{0}, std::vector<int>{0, 1}), MetricError);
}

TEST(Forest, SeparableDataIsFitExactly) {
  const auto d = planted(10, 10, 3, {0}, 20.0, 1);
  ForestParams fp;
  fp.n_trees = 30;
  fp.seed = 3;
  const auto f = train_forest(d.X, d.y, fp);
  EXPECT_EQ(f.predict(d.X), d.y);
}

TEST(Forest, DeterministicForSeed) {
  const auto d = planted(8, 10, 4, {1}, 1.0, 2);
  ForestParams fp;
  fp.n_trees = 25;
  fp.seed = 11;
  EXPECT_EQ(train_forest(d.X, d.y, fp).predict_oob(d.X, 0.0), train_forest(d.X, d.y, fp).predict_oob(d.X, 0.0));
}

TEST(Forest, PruningCollapsesToMajority) {
  const auto d = planted(10, 10, 3, {0}, 0.5, 4);
  ForestParams fp;
  fp.n_trees = 10;
  fp.seed = 1;
  const auto f = train_forest(d.X, d.y, fp);
  // With a huge alpha every tree is its root, so all predictions agree.
  const auto pred = f.predict(d.X, 1e9);
  for (int v : pred) EXPECT_EQ(v, pred.front());
}

TEST(Forest, OutOfBagOnNoiseIsChance) {
  const auto d = planted(20, 20, 5, {}, 0.0, 5);
  ForestParams fp;
  fp.n_trees = 100;
  fp.seed = 2;
  const auto f = train_forest(d.X, d.y, fp);
  const auto oob = f.predict_oob(d.X, 0.0);
  EXPECT_NEAR(macro_accuracy(d.y, oob), 0.5, 0.08);
}

TEST(Forest, RejectsBadInput) {
  Matrix X(2, 1);
  ForestParams fp;
  EXPECT_THROW(train_forest(X, std::vector<int>{0, 0}, fp), TrainError);
  EXPECT_THROW(train_forest(X, std::vector<int>{0}, fp), TrainError);
  X(0, 0) = std::nan("");
  EXPECT_THROW(train_forest(X, std::vector<int>{0, 1}, fp), TrainError);
}

TEST(Selection, FindsPlantedColumns) {
  const auto d = planted(20, 10, 10, {2, 7}, 1.5, 6);
  EXPECT_EQ(select_k_best(d.X, d.y, 2, Selector::Anova), (std::vector<std::size_t>{2, 7}));
  EXPECT_EQ(select_k_best(d.X, d.y, 2, Selector::MutualInfo), (std::vector<std::size_t>{2, 7}));
  EXPECT_THROW(select_k_best(d.X, d.y, 0, Selector::Anova), std::invalid_argument);
  EXPECT_THROW(select_k_best(d.X, d.y, 11, Selector::Anova), std::invalid_argument);
}

TEST(Selection, AnovaMatchesTwoSampleFormula) {
  // For two classes F equals the squared pooled-variance t statistic.
  Matrix X(6, 1);
  const std::vector<double> v{1, 2, 3, 5, 6, 9};
  for (std::size_t i = 0; i < 6; ++i) X(i, 0) = v[i];
  const std::vector<int> y{0, 0, 0, 1, 1, 1};
  const double m0 = 2, m1 = 20.0 / 3, ss0 = 2, ss1 = (5 - m1) * (5 - m1) + (6 - m1) * (6 - m1) + (9 - m1) * (9 - m1);
  const double sp2 = (ss0 + ss1) / 4, t = (m1 - m0) / std::sqrt(sp2 * (1.0 / 3 + 1.0 / 3));
  EXPECT_NEAR(anova_f_scores(X, y)[0], t * t, 1e-9);
}

TEST(NestedCV, SeparableScoresHigh) {
  const auto d = planted(12, 8, 4, {0, 1}, 4.0, 7);
  const auto r = nlopocv(d, fast_cv(1), 2);
  EXPECT_EQ(r.folds.size(), 12u);
  EXPECT_EQ(r.n_evaluated, 12u);
  EXPECT_GE(r.mean, 0.95);
  for (const auto& f : r.folds) EXPECT_EQ(f.features, (std::vector<std::size_t>{0, 1}));
}

TEST(NestedCV, NullScoresChance) {
  double total = 0;
  for (std::uint64_t s = 0; s < 4; ++s) total += nlopocv(planted(12, 8, 4, {}, 0.0, 50 + s), fast_cv(s), 2).mean;
  EXPECT_NEAR(total / 4, 0.5, 0.1);
}

TEST(NestedCV, OneFoldPerParticipant) {
  const auto d = planted(46, 4, 3, {0}, 2.0, 8);
  CVConfig cfg = fast_cv(2);
  cfg.forest.n_trees = 15;
  cfg.ccp_grid = {0.0};
  cfg.selectors = {Selector::Anova};
  const auto r = nlopocv(d, cfg, 3);
  ASSERT_EQ(r.folds.size(), 46u);
  for (std::size_t i = 0; i < 46; ++i) {
    EXPECT_EQ(r.folds[i].participant, d.group_names[i]);
    EXPECT_EQ(r.folds[i].n_test, 4u);
    EXPECT_EQ(r.folds[i].n_train, 180u);
  }
}

TEST(NestedCV, SingleClassParticipantIsSkipped) {
  auto d = planted(6, 6, 3, {0}, 3.0, 9);
  for (std::size_t r = 0; r < 6; ++r) d.y[r] = 0;
  const auto rep = nlopocv(d, fast_cv(3), 1);
  EXPECT_TRUE(rep.folds[0].skipped);
  EXPECT_FALSE(rep.folds[0].skip_reason.empty());
  EXPECT_EQ(rep.n_evaluated, 5u);
}

TEST(NestedCV, DeterministicAndParallelInvariant) {
  const auto d = planted(8, 8, 5, {3}, 1.0, 10);
  auto cfg = fast_cv(4);
  const auto a = nlopocv(d, cfg, 2);
  cfg.jobs = 3;
  const auto b = nlopocv(d, cfg, 2);
  EXPECT_EQ(a.fold_scores(), b.fold_scores());
  EXPECT_EQ(a.mean, b.mean);
}

TEST(NestedCV, TooFewParticipants) {
  EXPECT_THROW(nlopocv(planted(2, 6, 2, {0}, 1.0, 1), fast_cv(1), 1), InsufficientDataError);
}

TEST(KBest, MinimalKWithinOneSem) {
  const std::vector<double> means{0.6, 0.74, 0.75, 0.7}, sems{0.02, 0.02, 0.02, 0.02};
  std::size_t peak = 0;
  EXPECT_EQ(minimal_k_within_sem(means, sems, &peak), 2u);
  EXPECT_EQ(peak, 3u);
}

TEST(KBest, CurveFindsTwoInformativeColumns) {
  const auto d = planted(12, 8, 5, {1, 3}, 2.5, 11);
  auto cfg = fast_cv(5);
  cfg.selectors = {Selector::Anova};
  const auto c = kbest_curve(d, cfg);
  ASSERT_EQ(c.points.size(), 5u);
  EXPECT_EQ(c.minimal_k, 2u);
}

TEST(Importance, SoleInformativeColumnDropsToChance) {
  auto d = planted(20, 10, 3, {0}, 30.0, 12);
  ForestParams fp;
  fp.n_trees = 100;
  fp.seed = 5;
  fp.max_features = MaxFeatures::All;
  const auto f = train_forest(d.X, d.y, fp);
  const auto imp = permutation_importance(f, d.X, d.y, 5, 9);
  EXPECT_NEAR(imp.baseline, 1.0, 1e-9);
  EXPECT_NEAR(imp.mean_drop[0], 0.5, 0.1);
  EXPECT_NEAR(imp.mean_drop[1], 0.0, 0.05);
  EXPECT_NEAR(imp.mean_drop[2], 0.0, 0.05);
}

TEST(Importance, RedundantCopiesShareCredit) {
  auto d = planted(20, 10, 3, {0}, 30.0, 13);
  for (std::size_t r = 0; r < d.X.rows; ++r) d.X(r, 1) = d.X(r, 0);
  ForestParams fp;
  fp.n_trees = 100;
  fp.seed = 6;
  const auto f = train_forest(d.X, d.y, fp);
  const auto imp = permutation_importance(f, d.X, d.y, 5, 9);
  EXPECT_LT(imp.mean_drop[0], 0.4);
  EXPECT_LT(imp.mean_drop[1], 0.4);
  EXPECT_THROW(permutation_importance(f, d.X.select_cols(std::vector<std::size_t>{0}), d.y, 1, 1),
               std::invalid_argument);
}

TEST(Benchmarks, CenteringRemovesParticipantOffsets) {
  // Large per-participant offsets swamp a small within-participant shift.
  std::mt19937_64 rng(14);
  std::normal_distribution<double> g;
  std::vector<FeatureRow> rows;
  for (int p = 0; p < 12; ++p) {
    FeatureVector offset;
    for (auto& o : offset) o = 8.0 * g(rng);
    double t = 0;
    for (auto e : kAllEvents)
      for (auto ph : kAllPhases) {
        FeatureRow r{"P" + std::to_string(10 + p), e, ph, t += 100, {}};
        for (std::size_t f = 0; f < kNumFeatures; ++f)
          r.values[f] = offset[f] + 0.3 * g(rng) + (e != EventKind::Alone && f < 3 ? 1.0 : 0.0);
        rows.push_back(r);
      }
  }
  const auto m = assemble_matrix(std::move(rows));
  const std::vector<TaskKind> tasks{TaskKind::AloneVsSocial};
  auto cfg = fast_cv(6);
  cfg.selectors = {Selector::Anova};
  const auto bench = conditioning_benchmark(m, tasks, cfg);
  ASSERT_EQ(bench.size(), 4u);
  EXPECT_TRUE(bench[1].center && !bench[1].scale);
  EXPECT_TRUE(!bench[3].center && !bench[3].scale);
  EXPECT_GT(bench[1].score.mean, bench[3].score.mean + 0.1);
  EXPECT_EQ(bench[1].score.n_folds, 12u);
}
