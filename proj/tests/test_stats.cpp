#include <random>

#include <gtest/gtest.h>

#include "ctxsense/stats.hpp"
#include "oracles.hpp"

using namespace ctxsense;

TEST(Wilcoxon, HandExamples) {
  const auto a = wilcoxon_signed_rank(std::vector<double>{1, -2, 3, 4, 5});
  EXPECT_DOUBLE_EQ(a.statistic, 2.0);
  EXPECT_DOUBLE_EQ(a.p_value, 0.1875);
  EXPECT_TRUE(a.exact);

  const auto b = wilcoxon_signed_rank(std::vector<double>{1, 2, 3, 4, 5, 6});
  EXPECT_DOUBLE_EQ(b.statistic, 0.0);
  EXPECT_DOUBLE_EQ(b.p_value, 0.03125);
}

TEST(Wilcoxon, ZerosDroppedAndDegenerate) {
  const auto r = wilcoxon_signed_rank(std::vector<double>{0, 1, -2, 0, 3, 4, 5});
  EXPECT_EQ(r.n, 5u);
  EXPECT_DOUBLE_EQ(r.p_value, 0.1875);
  EXPECT_THROW(wilcoxon_signed_rank(std::vector<double>{0, 0, 0}), DegenerateError);
}

TEST(Wilcoxon, MatchesSignEnumeration) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + trial % 12;
    std::vector<double> d(n);
    // Integer-valued draws force tied ranks in many trials.
    std::uniform_int_distribution<int> u(-6, 6);
    for (auto& x : d) x = trial % 2 ? u(rng) : u(rng) + 0.37 * (u(rng) + 6);
    bool any = false;
    for (double x : d) any = any || x != 0.0;
    if (!any) continue;
    EXPECT_NEAR(wilcoxon_signed_rank(d).p_value, oracle::wilcoxon_p(d), 1e-12) << "trial " << trial;
  }
}

TEST(Wilcoxon, LargeSampleApproximation) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.3, 1.0);
  std::vector<double> d(60);
  for (auto& x : d) x = g(rng);
  const auto r = wilcoxon_signed_rank(d);
  EXPECT_FALSE(r.exact);
  EXPECT_GT(r.p_value, 0.0);
  EXPECT_LE(r.p_value, 1.0);
  // Mirrored samples are perfectly balanced.
  std::vector<double> sym;
  for (int i = 1; i <= 40; ++i) sym.push_back(i), sym.push_back(-i);
  EXPECT_NEAR(wilcoxon_signed_rank(sym).p_value, 1.0, 1e-9);
}

TEST(BenjaminiHochberg, HandExample) {
  const auto r = benjamini_hochberg(std::vector<double>{0.01, 0.02, 0.03, 0.04, 0.2}, 0.05);
  EXPECT_EQ(r, (std::vector<bool>{true, true, true, true, false}));
}

TEST(BenjaminiHochberg, StepUpRescuesEarlierFailures) {
  // p(1) = 0.03 > 0.0125 but p(4) = 0.04 <= 0.05 rejects everything below it.
  EXPECT_EQ(benjamini_hochberg(std::vector<double>{0.04, 0.03, 0.035, 0.038}, 0.05),
            (std::vector<bool>{true, true, true, true}));
  EXPECT_TRUE(benjamini_hochberg(std::vector<double>{}, 0.05).empty());
}

TEST(BenjaminiHochberg, MatchesDirectDefinition) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> p(1 + trial % 30);
    for (auto& x : p) x = trial % 3 ? u(rng) * u(rng) * 0.2 : u(rng);
    EXPECT_EQ(benjamini_hochberg(p, 0.05), oracle::bh_reject(p, 0.05)) << "trial " << trial;
  }
}

TEST(BootstrapCI, OneToHundred) {
  std::vector<double> x(100);
  for (int i = 0; i < 100; ++i) x[static_cast<std::size_t>(i)] = i + 1;
  const auto ci = bootstrap_median_ci(x, 0.95, 10000, 42);
  EXPECT_DOUBLE_EQ(ci.median, 50.5);
  EXPECT_LE(ci.lo, 50.5);
  EXPECT_GE(ci.hi, 50.5);
  EXPECT_GE(ci.lo, 40.0);
  EXPECT_LE(ci.hi, 61.0);
}

TEST(BootstrapCI, DeterministicAndEdgeCases) {
  const std::vector<double> x{3, 1, 4, 1, 5, 9, 2, 6};
  const auto a = bootstrap_median_ci(x, 0.9, 500, 7), b = bootstrap_median_ci(x, 0.9, 500, 7);
  EXPECT_EQ(a.lo, b.lo);
  EXPECT_EQ(a.hi, b.hi);
  const auto one = bootstrap_median_ci(std::vector<double>{2.5}, 0.95, 100, 1);
  EXPECT_EQ(one.lo, 2.5);
  EXPECT_EQ(one.hi, 2.5);
  EXPECT_THROW(bootstrap_median_ci(std::vector<double>{}, 0.95, 100, 1), InsufficientDataError);
}

namespace {

TaskDataset shifted_task(std::uint64_t seed, std::vector<std::size_t> shifted, double shift) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  TaskDataset d;
  d.task = TaskKind::AloneVsSocial;
  for (int p = 0; p < 30; ++p) {
    const std::string pid = "P" + std::to_string(p);
    d.participants.push_back(pid);
    for (int label = 0; label < 2; ++label) {
      TaskRow r{pid, label ? EventKind::DyadImplicit : EventKind::Alone, Phase::During, {}, label};
      for (std::size_t f = 0; f < kNumFeatures; ++f) r.values[f] = g(rng);
      if (label)
        for (auto f : shifted) r.values[f] += shift;
      d.rows.push_back(r);
    }
  }
  return d;
}

}  // namespace

TEST(PairedTests, FlagsExactlyThePlantedFeatures) {
  StatsConfig cfg;
  cfg.n_resamples = 500;
  const auto rep = paired_feature_tests(shifted_task(1, {2, 5, 9}, 2.0), cfg);
  ASSERT_EQ(rep.per_feature.size(), kNumFeatures);
  for (std::size_t f = 0; f < kNumFeatures; ++f)
    EXPECT_EQ(rep.per_feature[f].significant, f == 2 || f == 5 || f == 9) << kFeatureNames[f];
  EXPECT_EQ(rep.ranked_significant.size(), 3u);
  EXPECT_EQ(rep.per_feature[2].n_pairs, 30u);
}

TEST(PairedTests, NullFalseDiscoveriesAreRare) {
  StatsConfig cfg;
  cfg.n_resamples = 200;
  std::size_t any_flag = 0;
  for (std::uint64_t s = 0; s < 40; ++s) any_flag += paired_feature_tests(shifted_task(100 + s, {}, 0.0), cfg).ranked_significant.empty() ? 0 : 1;
  // Under the global null BH controls the family-wise rate at alpha.
  EXPECT_LE(any_flag, 6u);
}

TEST(PairedTests, ParticipantsMissingAClassAreExcluded) {
  auto d = shifted_task(3, {0}, 1.0);
  d.rows.pop_back();
  StatsConfig cfg;
  cfg.n_resamples = 100;
  const auto rep = paired_feature_tests(d, cfg);
  EXPECT_EQ(rep.per_feature[0].excluded_participants, 1u);
  EXPECT_EQ(rep.per_feature[0].n_pairs, 29u);
}
