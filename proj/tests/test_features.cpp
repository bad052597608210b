#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "ctxsense/eda.hpp"
#include "ctxsense/features.hpp"
#include "ctxsense/hrv.hpp"
#include "ctxsense/synth.hpp"

using namespace ctxsense;

namespace {

NNSeries series(std::vector<double> intervals) {
  NNSeries nn;
  double t = 0;
  for (double v : intervals) nn.onsets.push_back(t), nn.intervals.push_back(v), t += v;
  return nn;
}

FeatureRow row(std::string pid, EventKind e, Phase p, double value, double start = 0) {
  FeatureRow r{std::move(pid), e, p, start, {}};
  r.values.fill(value);
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// NN series and cleaning

TEST(NNSeries, FromPeaks) {
  const std::vector<std::size_t> peaks{0, 64, 120, 192};
  const auto nn = nn_from_peaks(peaks, 64.0);
  ASSERT_EQ(nn.size(), 3u);
  EXPECT_DOUBLE_EQ(nn.intervals[1], 56.0 / 64.0);
  EXPECT_DOUBLE_EQ(nn.onsets[2], 120.0 / 64.0);
  EXPECT_THROW(nn_from_peaks(std::vector<std::size_t>{3}, 64.0), InsufficientDataError);
}

TEST(CleanNN, AutomaticFortyPercentRule) {
  const auto out = clean_nn(series({0.8, 0.8, 1.3, 0.8, 0.8}), NNCleaning::Automatic);
  EXPECT_EQ(out.intervals, (std::vector<double>{0.8, 0.8, 0.8, 0.8}));
  EXPECT_EQ(out.cleaned_by, NNCleaning::Automatic);
}

TEST(CleanNN, RulesAndMedian) {
  const auto nn = series({0.8, 0.2, 0.9, 1.7, 0.85, 0.8});
  EXPECT_EQ(clean_nn(nn, NNCleaning::Rules).intervals, (std::vector<double>{0.8, 0.9, 0.85, 0.8}));
  EXPECT_EQ(clean_nn(nn, NNCleaning::Median).intervals, (std::vector<double>{0.8, 0.9, 0.85, 0.8}));
  EXPECT_EQ(clean_nn(nn, NNCleaning::None).intervals, nn.intervals);
}

TEST(CleanNN, OutputIsSubsequenceWithOnsets) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.3, 1.8);
  std::vector<double> v(200);
  for (auto& x : v) x = u(rng);
  const auto nn = series(v);
  for (auto m : {NNCleaning::Median, NNCleaning::Automatic, NNCleaning::Rules}) {
    NNSeries out;
    try {
      out = clean_nn(nn, m);
    } catch (const EmptyAfterCleaningError&) {
      continue;
    }
    std::size_t j = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      while (j < nn.size() && nn.onsets[j] != out.onsets[i]) ++j;
      ASSERT_LT(j, nn.size());
      EXPECT_EQ(nn.intervals[j], out.intervals[i]);
    }
  }
}

TEST(CleanNN, CutoffLimits) {
  const auto nn = series({0.8, 0.81, 0.8, 0.82, 0.8});
  NNCleaningParams strict;
  strict.automatic_cutoff = 0.0;
  // Only the final interval, which has no reference, survives a zero cutoff.
  EXPECT_EQ(clean_nn(nn, NNCleaning::Automatic, strict).intervals, std::vector<double>{0.8});
  NNCleaningParams loose;
  loose.automatic_cutoff = 1e9;
  EXPECT_EQ(clean_nn(nn, NNCleaning::Automatic, loose).size(), nn.size());
}

TEST(CleanNN, EmptyAndAllDropped) {
  EXPECT_THROW(clean_nn(NNSeries{}, NNCleaning::None), InsufficientDataError);
  EXPECT_THROW(clean_nn(series({2.0, 2.5, 3.0}), NNCleaning::Rules), EmptyAfterCleaningError);
  EXPECT_EQ(parse_nn_cleaning("median"), NNCleaning::Median);
  EXPECT_THROW(parse_nn_cleaning("kalman"), ParseError);
}

TEST(TruncateNN, KeepsLeadingWindow) {
  const auto nn = series({1, 1, 1, 1, 1, 1});
  EXPECT_EQ(truncate_nn(nn, 3.0).size(), 3u);
  EXPECT_EQ(truncate_nn(nn, 0.0).size(), 6u);
}

// ---------------------------------------------------------------------------
// NN features

TEST(NNFeatures, HandComputed) {
  const auto f = compute_nn_features(series({0.8, 1.0, 0.8, 1.0}));
  EXPECT_NEAR(f.mean, 0.9, 1e-12);
  EXPECT_NEAR(f.rmssd, 0.2, 1e-12);
  EXPECT_NEAR(f.sd, 0.11547005383792516, 1e-12);
  EXPECT_NEAR(f.prc20, 0.8, 1e-12);
  EXPECT_NEAR(f.prc80, 1.0, 1e-12);
}

TEST(NNFeatures, PercentilesInterpolateLinearly) {
  const auto f = compute_nn_features(series({0.5, 0.6, 0.7, 0.8, 0.9, 1.0}));
  EXPECT_NEAR(f.prc20, 0.6, 1e-12);
  EXPECT_NEAR(f.prc80, 0.9, 1e-12);
}

TEST(NNFeatures, LowFrequencyModulationDominates) {
  std::vector<double> v;
  double t = 0;
  NNSeries nn;
  while (t < 300) {
    const double x = 0.85 + 0.05 * std::sin(2 * std::numbers::pi * 0.1 * t);
    nn.onsets.push_back(t), nn.intervals.push_back(x);
    t += x;
  }
  const auto f = compute_nn_features(nn);
  EXPECT_GT(f.lfn, 0.8);
  EXPECT_LT(f.hfn, 0.1);
  EXPECT_LE(f.lfn + f.hfn, 1.0 + 1e-12);
}

TEST(NNFeatures, NormalisedPowersAreBounded) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.4, 1.4);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> v(20 + trial % 150);
    for (auto& x : v) x = u(rng);
    const auto f = compute_nn_features(series(v));
    EXPECT_GE(f.lfn, 0.0);
    EXPECT_GE(f.hfn, 0.0);
    EXPECT_LE(f.lfn + f.hfn, 1.0 + 1e-12);
  }
}

TEST(NNFeatures, TooShort) { EXPECT_THROW(compute_nn_features(series({0.8, 0.9, 1.0})), InsufficientDataError); }

// ---------------------------------------------------------------------------
// EDA

TEST(Eda, CleaningIsIdentityAboveNyquist) {
  const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14};
  EXPECT_EQ(clean_eda(x, 4.0), x);
}

TEST(Eda, DecompositionSumsToInput) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  std::vector<double> x(480);
  for (auto& v : x) v = 5 + g(rng);
  const auto d = decompose_eda(x, 4.0);
  ASSERT_EQ(d.tonic.size(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(d.tonic[i] + d.phasic[i], x[i], 1e-9);
  EXPECT_THROW(decompose_eda(std::vector<double>(8, 1.0), 4.0), InsufficientDataError);
}

TEST(Eda, SlowRampStaysTonic) {
  std::vector<double> x(480);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i) / 479.0;
  const auto d = decompose_eda(x, 4.0);
  EXPECT_LT(rms(d.phasic), 0.05 * rms(x));
}

TEST(Eda, PlantedResponsesAreSeparatedAndCounted) {
  const double rate = 4.0;
  std::vector<double> ramp(480), x(480);
  const std::vector<double> onsets{15.0, 50.0, 85.0};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = static_cast<double>(i) / rate;
    ramp[i] = 2.0 + t / 120.0;
    x[i] = ramp[i];
    for (double o : onsets) x[i] += 0.5 * detail::bateman(t - o);
  }
  const auto d = decompose_eda(clean_eda(x, rate), rate);
  std::vector<double> err(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) err[i] = d.tonic[i] - ramp[i];
  EXPECT_LT(rms(err), 0.1 * rms(ramp));

  const auto peaks = detect_scr_peaks(d.phasic, rate);
  ASSERT_EQ(peaks.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k)
    EXPECT_NEAR(static_cast<double>(peaks.indices[k]) / rate, onsets[k] + detail::bateman_peak_delay(), 0.5);

  CleanedInterval c;
  c.nn = series(std::vector<double>(140, 0.85));
  c.temperature.assign(480, 33.0);
  c.acc_magnitude.assign(3840, 1.0);
  c.eda = d;
  c.scr = peaks;
  c.duration = 120.0;
  const auto v = compute_features(c);
  EXPECT_DOUBLE_EQ(at(v, Feature::SCRPeaksn), 0.025);
}

TEST(Eda, PeakCountIsMonotoneInThreshold) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0, 0.05);
  std::vector<double> x(1200, 0.0);
  for (std::size_t i = 1; i < x.size(); ++i) x[i] = 0.9 * x[i - 1] + g(rng);
  std::size_t last = SIZE_MAX;
  for (double thr : {0.0, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2}) {
    EdaConfig cfg;
    cfg.scr_min_amplitude = thr;
    const auto n = detect_scr_peaks(x, 4.0, cfg).size();
    EXPECT_LE(n, last);
    last = n;
  }
}

// ---------------------------------------------------------------------------
// Feature vector, matrix, conditioning, tasks

TEST(Features, NamesAndOrder) {
  EXPECT_EQ(kFeatureNames.size(), 13u);
  EXPECT_EQ(kFeatureNames[0], "nn_mean");
  EXPECT_EQ(feature_index("scr_peaksn"), 12u);
  EXPECT_THROW(feature_index("heart"), ParseError);
}

TEST(Features, NonNnChannels) {
  CleanedInterval c;
  c.nn = series({0.8, 1.0, 0.8, 1.0, 0.9});
  c.temperature = {33.0, 33.5, 34.0};
  c.acc_magnitude = {1.0, 1.1, 0.9, 1.0};
  c.eda.tonic = {4.0, 4.2};
  c.eda.phasic = {0.1, -0.1};
  c.eda.rate = 4.0;
  c.duration = 10.0;
  const auto v = compute_features(c);
  EXPECT_DOUBLE_EQ(at(v, Feature::STMean), 33.5);
  EXPECT_DOUBLE_EQ(at(v, Feature::ACCMean), 1.0);
  EXPECT_NEAR(at(v, Feature::ACCSD), std::sqrt(0.02 / 3.0), 1e-12);
  EXPECT_DOUBLE_EQ(at(v, Feature::SCLMean), 4.1);
  EXPECT_DOUBLE_EQ(at(v, Feature::SCRMean), 0.0);
  EXPECT_DOUBLE_EQ(at(v, Feature::SCRPeaksn), 0.0);
  c.temperature.clear();
  EXPECT_THROW(compute_features(c), InsufficientDataError);
}

TEST(FeatureMatrix, AssemblyOrdersAndRejectsDuplicates) {
  auto m = assemble_matrix({row("P2", EventKind::Alone, Phase::Pre, 1, 5), row("P1", EventKind::Alone, Phase::Post, 2, 9),
                            row("P1", EventKind::Alone, Phase::Pre, 3, 1)});
  EXPECT_EQ(m.rows[0].participant_id, "P1");
  EXPECT_EQ(m.rows[0].phase, Phase::Pre);
  EXPECT_EQ(m.rows[2].participant_id, "P2");
  EXPECT_THROW(assemble_matrix({row("P1", EventKind::Alone, Phase::Pre, 1), row("P1", EventKind::Alone, Phase::Pre, 2)}),
               AssemblyError);
}

TEST(Conditioning, CenterAndScale) {
  FeatureMatrix m;
  m.rows = {row("P1", EventKind::Alone, Phase::Pre, 1), row("P1", EventKind::Alone, Phase::During, 2),
            row("P1", EventKind::Alone, Phase::Post, 4), row("P2", EventKind::Alone, Phase::Pre, 7)};
  const auto c = condition_matrix(m, true, false);
  EXPECT_DOUBLE_EQ(c.rows[0].values[0], -1.0);
  EXPECT_DOUBLE_EQ(c.rows[1].values[0], 0.0);
  EXPECT_DOUBLE_EQ(c.rows[2].values[0], 2.0);
  EXPECT_DOUBLE_EQ(c.rows[3].values[0], 0.0);
  EXPECT_EQ(c.conditioning, Conditioning::Centered);

  const auto cs = condition_matrix(m, true, true);
  EXPECT_DOUBLE_EQ(cs.rows[2].values[0], 2.0 / 1.5);  // IQR of {1,2,4} = 3 - 1.5
  EXPECT_DOUBLE_EQ(cs.rows[3].values[0], 0.0);        // single row: zero IQR, divided by one
  const auto raw = condition_matrix(m, false, false);
  EXPECT_DOUBLE_EQ(raw.rows[2].values[0], 4.0);
}

TEST(Conditioning, CenteringRemovesParticipantOffsets) {
  FeatureMatrix a, b;
  for (int p = 0; p < 3; ++p)
    for (auto ph : kAllPhases) {
      a.rows.push_back(row("P" + std::to_string(p), EventKind::Alone, ph, static_cast<double>(ph) * 0.1));
      b.rows.push_back(row("P" + std::to_string(p), EventKind::Alone, ph, static_cast<double>(ph) * 0.1 + 10.0 * p));
    }
  const auto ca = condition_matrix(a, true, false), cb = condition_matrix(b, true, false);
  for (std::size_t i = 0; i < ca.rows.size(); ++i)
    for (std::size_t f = 0; f < kNumFeatures; ++f) EXPECT_NEAR(ca.rows[i].values[f], cb.rows[i].values[f], 1e-9);
}

TEST(Correlation, HandComputedAndConstant) {
  FeatureMatrix m;
  const double xs[] = {1, 2, 3}, ys[] = {1, 0, 1};
  for (int i = 0; i < 3; ++i) {
    auto r = row("P", EventKind::Alone, Phase::Pre, 0.0);
    r.values[0] = xs[i];
    r.values[1] = ys[i];
    r.values[2] = 2 * xs[i];
    m.rows.push_back(r);
  }
  const auto c = correlation_matrix(m);
  EXPECT_NEAR(c.r[0][1], 0.0, 1e-12);
  EXPECT_NEAR(c.r[0][2], 1.0, 1e-12);
  EXPECT_TRUE(c.constant[5]);
  EXPECT_DOUBLE_EQ(c.r[0][5], 0.0);
  for (std::size_t a = 0; a < kNumFeatures; ++a)
    for (std::size_t b = 0; b < kNumFeatures; ++b) EXPECT_DOUBLE_EQ(c.r[a][b], c.r[b][a]);
}

TEST(Tasks, CompleteParticipantRows) {
  FeatureMatrix m;
  for (auto e : kAllEvents)
    for (auto p : kAllPhases) m.rows.push_back(row("P1", e, p, 0.0));
  const auto as = build_task(m, TaskKind::AloneVsSocial);
  ASSERT_EQ(as.size(), 5u);
  EXPECT_EQ(std::count_if(as.rows.begin(), as.rows.end(), [](const TaskRow& r) { return r.label == 0; }), 1);
  EXPECT_EQ(build_task(m, TaskKind::DuringVsPrePost).size(), 12u);
  EXPECT_EQ(build_task(m, TaskKind::PreVsPost).size(), 8u);
  EXPECT_EQ(build_task(m, TaskKind::DyadVsGroup).size(), 4u);
  EXPECT_EQ(build_task(m, TaskKind::ImplicitVsExplicit).size(), 4u);
  for (auto t : kAllTasks) EXPECT_EQ(parse_task(to_token(t)), t);
}

TEST(Tasks, MissingClassIsAnError) {
  FeatureMatrix m;
  m.rows.push_back(row("P1", EventKind::Alone, Phase::During, 0.0));
  EXPECT_THROW(build_task(m, TaskKind::AloneVsSocial), TaskConstructionError);
  EXPECT_THROW(build_task(m, TaskKind::DyadVsGroup), TaskConstructionError);
}
