#pragma once

// Paired nonparametric tests, Benjamini-Hochberg control and bootstrap CIs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "ctxsense/error.hpp"
#include "ctxsense/features.hpp"
#include "ctxsense/numeric.hpp"

namespace ctxsense {

struct WilcoxonResult {
  double statistic = 0.0;  // min(W+, W-)
  double p_value = 1.0;    // two-sided
  std::size_t n = 0;       // non-zero differences
  bool exact = true;
};

/// Average ranks (1-based) of |d|, ties sharing the mean rank.
inline std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline constexpr std::size_t kWilcoxonExactMax = 25;

/// Wilcoxon signed-rank test. Zero differences are discarded. The exact null
/// distribution of W+ is counted over all sign assignments (on doubled ranks
/// so tied half-ranks stay integral) for n <= 25; larger samples use the
/// tie-corrected normal approximation.
inline WilcoxonResult wilcoxon_signed_rank(std::span<const double> diffs) {
  std::vector<double> nz;
  for (double d : diffs)
    if (d != 0.0) nz.push_back(d);
  if (nz.empty()) throw DegenerateError("all paired differences are zero");

  const std::size_t n = nz.size();
  std::vector<double> mags(n);
  for (std::size_t i = 0; i < n; ++i) mags[i] = std::abs(nz[i]);
  const auto ranks = average_ranks(mags);
  double w_plus = 0.0, w_minus = 0.0;
  for (std::size_t i = 0; i < n; ++i) (nz[i] > 0 ? w_plus : w_minus) += ranks[i];

  WilcoxonResult res;
  res.n = n;
  res.statistic = std::min(w_plus, w_minus);

  if (n <= kWilcoxonExactMax) {
    std::vector<std::size_t> r2(n);
    std::size_t total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      r2[i] = static_cast<std::size_t>(std::llround(2.0 * ranks[i]));
      total += r2[i];
    }
    // counts[s] = number of sign vectors whose doubled W+ equals s
    std::vector<double> counts(total + 1, 0.0);
    counts[0] = 1.0;
    std::size_t reach = 0;
    for (auto r : r2) {
      for (std::size_t s = reach + 1; s-- > 0;)
        if (counts[s] != 0.0) counts[s + r] += counts[s];
      reach += r;
    }
    const auto w2 = static_cast<std::size_t>(std::llround(2.0 * res.statistic));
    double tail = 0.0;
    for (std::size_t s = 0; s <= w2; ++s) tail += counts[s];
    res.p_value = std::min(1.0, 2.0 * tail / std::ldexp(1.0, static_cast<int>(n)));
    res.exact = true;
    return res;
  }

  const auto nd = static_cast<double>(n);
  const double mu = nd * (nd + 1.0) / 4.0;
  double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0;
  std::vector<double> sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && sorted[j] == sorted[i]) ++j;
    const auto t = static_cast<double>(j - i);
    var -= (t * t * t - t) / 48.0;
    i = j;
  }
  const double z = (res.statistic - mu) / std::sqrt(var);
  res.p_value = std::min(1.0, std::erfc(-z / std::sqrt(2.0)));  // 2 * Phi(z), z <= 0
  res.exact = false;
  return res;
}

/// Step-up Benjamini-Hochberg. Flags are returned in input order.
inline std::vector<bool> benjamini_hochberg(std::span<const double> p, double alpha) {
  const std::size_t m = p.size();
  std::vector<bool> reject(m, false);
  if (m == 0) return reject;
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::size_t k = 0;  // number rejected
  for (std::size_t i = m; i >= 1; --i) {
    if (p[order[i - 1]] <= static_cast<double>(i) * alpha / static_cast<double>(m)) {
      k = i;
      break;
    }
  }
  if (k == 0) return reject;
  const double cutoff = p[order[k - 1]];
  for (std::size_t i = 0; i < m; ++i) reject[i] = p[i] <= cutoff;
  return reject;
}

struct MedianCI {
  double median = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap of the median. Endpoints are order statistics of the
/// resampled medians.
inline MedianCI bootstrap_median_ci(std::span<const double> values, double confidence, std::size_t n_resamples,
                                    std::uint64_t seed) {
  if (values.empty()) throw InsufficientDataError("bootstrap of an empty sample");
  if (n_resamples == 0) throw std::invalid_argument("need at least one bootstrap resample");
  MedianCI ci;
  ci.median = median(values);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  std::vector<double> resample(values.size());
  std::vector<double> medians(n_resamples);
  for (auto& m : medians) {
    for (auto& v : resample) v = values[pick(rng)];
    std::sort(resample.begin(), resample.end());
    m = percentile_sorted(resample, 50.0);
  }
  std::sort(medians.begin(), medians.end());
  const double tail = (1.0 - confidence) / 2.0;
  const auto b = static_cast<double>(n_resamples);
  auto lo_idx = static_cast<std::size_t>(std::floor(tail * b));
  auto hi_idx = static_cast<std::size_t>(std::ceil((1.0 - tail) * b - 1e-9));
  hi_idx = hi_idx == 0 ? 0 : hi_idx - 1;
  lo_idx = std::min(lo_idx, n_resamples - 1);
  hi_idx = std::clamp(hi_idx, lo_idx, n_resamples - 1);
  ci.lo = medians[lo_idx];
  ci.hi = medians[hi_idx];
  return ci;
}

enum class Pairing { ParticipantMedian, PerEvent };

inline constexpr std::string_view to_token(Pairing p) {
  return p == Pairing::ParticipantMedian ? "participant_median" : "per_event";
}

struct StatsConfig {
  double alpha = 0.05;
  double confidence = 0.95;
  std::size_t n_resamples = 10000;
  std::uint64_t seed = 0;
  Pairing pairing = Pairing::ParticipantMedian;
};

struct FeatureTest {
  std::string feature;
  MedianCI class_a;
  MedianCI class_b;
  double median_difference = 0.0;  // class_b - class_a, pooled medians
  std::size_t n_pairs = 0;
  std::size_t excluded_participants = 0;
  double statistic = 0.0;
  double p_value = 1.0;
  bool exact = true;
  bool significant = false;
};

struct FeatureTestReport {
  TaskKind task = TaskKind::AloneVsSocial;
  double alpha = 0.05;
  Pairing pairing = Pairing::ParticipantMedian;
  std::vector<FeatureTest> per_feature;
  std::vector<std::string> ranked_significant;  // by |median difference|, largest first
};

namespace detail {

/// Paired differences (class 1 minus class 0) for one feature.
inline std::vector<double> paired_differences(const TaskDataset& d, std::size_t f, Pairing pairing,
                                              std::size_t& excluded) {
  std::vector<double> diffs;
  excluded = 0;
  std::map<std::string, std::array<std::vector<double>, 2>> by_participant;
  for (const auto& r : d.rows) by_participant[r.participant_id][r.label].push_back(r.values[f]);

  if (pairing == Pairing::ParticipantMedian) {
    for (const auto& [pid, cls] : by_participant) {
      if (cls[0].empty() || cls[1].empty()) {
        ++excluded;
        continue;
      }
      diffs.push_back(median(cls[1]) - median(cls[0]));
    }
    return diffs;
  }

  // Per-event pairing: match rows that share every attribute except the one
  // the task contrasts.
  std::map<std::string, std::vector<const TaskRow*>> rows_of;
  for (const auto& r : d.rows) rows_of[r.participant_id].push_back(&r);
  for (const auto& [pid, rows] : rows_of) {
    const std::size_t before = diffs.size();
    for (const auto* a : rows) {
      if (a->label != 0) continue;
      std::vector<double> partners;
      for (const auto* b : rows) {
        if (b->label != 1) continue;
        bool match = false;
        switch (d.task) {
          case TaskKind::AloneVsSocial: match = true; break;
          case TaskKind::DuringVsPrePost:
          case TaskKind::PreVsPost: match = a->event == b->event; break;
          case TaskKind::DyadVsGroup: match = threat_of(a->event) == threat_of(b->event); break;
          case TaskKind::ImplicitVsExplicit: match = size_of(a->event) == size_of(b->event); break;
        }
        if (match) partners.push_back(b->values[f]);
      }
      if (partners.empty()) continue;
      if (d.task == TaskKind::AloneVsSocial) {
        for (double v : partners) diffs.push_back(v - a->values[f]);
      } else {
        diffs.push_back(median(partners) - a->values[f]);
      }
    }
    if (diffs.size() == before) ++excluded;
  }
  return diffs;
}

}  // namespace detail

/// Per-feature Wilcoxon tests on participant-paired differences, BH across
/// the thirteen features, bootstrap CIs on pooled per-class values.
inline FeatureTestReport paired_feature_tests(const TaskDataset& d, const StatsConfig& cfg = {}) {
  FeatureTestReport rep;
  rep.task = d.task;
  rep.alpha = cfg.alpha;
  rep.pairing = cfg.pairing;
  std::vector<double> pvals(kNumFeatures, 1.0);

  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    FeatureTest t;
    t.feature = std::string(kFeatureNames[f]);
    std::array<std::vector<double>, 2> pooled;
    for (const auto& r : d.rows) pooled[r.label].push_back(r.values[f]);
    for (int c = 0; c < 2; ++c) {
      const auto seed = derive_seed(cfg.seed, f * 2 + static_cast<std::size_t>(c));
      (c == 0 ? t.class_a : t.class_b) = bootstrap_median_ci(pooled[c], cfg.confidence, cfg.n_resamples, seed);
    }
    t.median_difference = t.class_b.median - t.class_a.median;

    const auto diffs = detail::paired_differences(d, f, cfg.pairing, t.excluded_participants);
    if (t.excluded_participants > 0)
      spdlog::info("{} {}: {} participants lack one class and are excluded", to_token(d.task), t.feature,
                   t.excluded_participants);
    t.n_pairs = diffs.size();
    try {
      const auto w = wilcoxon_signed_rank(diffs);
      t.statistic = w.statistic;
      t.p_value = w.p_value;
      t.exact = w.exact;
    } catch (const DegenerateError&) {
      t.statistic = 0.0;
      t.p_value = 1.0;
    }
    pvals[f] = t.p_value;
    rep.per_feature.push_back(std::move(t));
  }

  const auto flags = benjamini_hochberg(pvals, cfg.alpha);
  std::vector<std::size_t> sig;
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    rep.per_feature[f].significant = flags[f];
    if (flags[f]) sig.push_back(f);
  }
  std::stable_sort(sig.begin(), sig.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(rep.per_feature[a].median_difference) > std::abs(rep.per_feature[b].median_difference);
  });
  for (auto f : sig) rep.ranked_significant.push_back(rep.per_feature[f].feature);
  return rep;
}

}  // namespace ctxsense
