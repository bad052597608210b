#pragma once

// The thirteen per-interval features, the study matrix, participant-level
// conditioning and the five binary task datasets.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <spdlog/spdlog.h>

#include "ctxsense/dsp/lomb_scargle.hpp"
#include "ctxsense/eda.hpp"
#include "ctxsense/error.hpp"
#include "ctxsense/hrv.hpp"
#include "ctxsense/numeric.hpp"
#include "ctxsense/types.hpp"

namespace ctxsense {

inline constexpr std::size_t kNumFeatures = 13;
inline constexpr std::size_t kNumNNFeatures = 7;

enum class Feature : std::size_t {
  NNMean, NNSD, NNRMSSD, NNPrc20, NNPrc80, NNLFn, NNHFn,
  STMean, ACCMean, ACCSD, SCLMean, SCRMean, SCRPeaksn
};

inline constexpr std::array<std::string_view, kNumFeatures> kFeatureNames{
    "nn_mean", "nn_sd",    "nn_rmssd", "nn_prc20", "nn_prc80", "nn_lfn",    "nn_hfn",
    "st_mean", "acc_mean", "acc_sd",   "scl_mean", "scr_mean", "scr_peaksn"};

inline std::size_t feature_index(std::string_view name) {
  for (std::size_t i = 0; i < kNumFeatures; ++i)
    if (kFeatureNames[i] == name) return i;
  throw ParseError("unknown feature '" + std::string(name) + "'");
}

using FeatureVector = std::array<double, kNumFeatures>;

constexpr double& at(FeatureVector& v, Feature f) { return v[static_cast<std::size_t>(f)]; }
constexpr double at(const FeatureVector& v, Feature f) { return v[static_cast<std::size_t>(f)]; }

struct FeatureConfig {
  dsp::SpectrumGrid grid;
  double lf_low = 0.04, lf_high = 0.15;
  double hf_low = 0.15, hf_high = 0.40;
  std::size_t min_nn_intervals = 4;
  bool scr_mean_from_peaks = false;
};

/// Everything the feature computation needs from one cleaned interval.
struct CleanedInterval {
  NNSeries nn;
  std::vector<double> temperature;     // deg C
  std::vector<double> acc_magnitude;   // g
  EdaDecomposition eda;
  ScrPeaks scr;
  double duration = 0.0;               // s
};

struct NNFeatures {
  double mean = 0, sd = 0, rmssd = 0, prc20 = 0, prc80 = 0, lfn = 0, hfn = 0;
};

/// Time- and frequency-domain features of a cleaned NN series.
inline NNFeatures compute_nn_features(const NNSeries& nn, const FeatureConfig& cfg = {}) {
  if (nn.size() < std::max<std::size_t>(cfg.min_nn_intervals, 4))
    throw InsufficientDataError("NN series has " + std::to_string(nn.size()) + " intervals, too few for spectral features");
  NNFeatures f;
  const std::span<const double> x(nn.intervals);
  f.mean = mean(x);
  f.sd = sample_sd(x);
  double ss = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) ss += (x[i] - x[i - 1]) * (x[i] - x[i - 1]);
  f.rmssd = std::sqrt(ss / static_cast<double>(x.size() - 1));
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  f.prc20 = percentile_sorted(sorted, 20.0);
  f.prc80 = percentile_sorted(sorted, 80.0);

  // Total power spans the whole computed grid, including 0.01-0.04 Hz.
  const auto pg = dsp::lomb_scargle_psd(nn.onsets, nn.intervals, cfg.grid);
  const double total = dsp::total_power(pg);
  if (total > 0.0) {
    f.lfn = dsp::band_power(pg, cfg.lf_low, cfg.lf_high) / total;
    f.hfn = dsp::band_power(pg, cfg.hf_low, cfg.hf_high) / total;
  }
  return f;
}

inline FeatureVector compute_features(const CleanedInterval& in, const FeatureConfig& cfg = {}) {
  FeatureVector v{};
  const auto nn = compute_nn_features(in.nn, cfg);
  at(v, Feature::NNMean) = nn.mean;
  at(v, Feature::NNSD) = nn.sd;
  at(v, Feature::NNRMSSD) = nn.rmssd;
  at(v, Feature::NNPrc20) = nn.prc20;
  at(v, Feature::NNPrc80) = nn.prc80;
  at(v, Feature::NNLFn) = nn.lfn;
  at(v, Feature::NNHFn) = nn.hfn;

  if (in.temperature.empty() || in.acc_magnitude.empty() || in.eda.tonic.empty())
    throw InsufficientDataError("interval lacks temperature, accelerometer or EDA samples");
  if (!(in.duration > 0.0)) throw InsufficientDataError("interval has no duration");
  at(v, Feature::STMean) = mean(in.temperature);
  at(v, Feature::ACCMean) = mean(in.acc_magnitude);
  at(v, Feature::ACCSD) = sample_sd(in.acc_magnitude);
  at(v, Feature::SCLMean) = mean(in.eda.tonic);
  at(v, Feature::SCRMean) = cfg.scr_mean_from_peaks
                                ? (in.scr.amplitudes.empty() ? 0.0 : mean(in.scr.amplitudes))
                                : mean(in.eda.phasic);
  at(v, Feature::SCRPeaksn) = static_cast<double>(in.scr.size()) / in.duration;

  for (double x : v)
    if (!std::isfinite(x)) throw InsufficientDataError("non-finite feature value");
  return v;
}

enum class Conditioning { Raw, Centered, Scaled, CenteredScaled };

inline constexpr std::string_view to_token(Conditioning c) {
  switch (c) {
    case Conditioning::Raw: return "raw";
    case Conditioning::Centered: return "centered";
    case Conditioning::Scaled: return "scaled";
    case Conditioning::CenteredScaled: return "centered_scaled";
  }
  return "";
}

struct FeatureRow {
  std::string participant_id;
  EventKind event = EventKind::Alone;
  Phase phase = Phase::Pre;
  double start = 0.0;  // interval start, used for ordering
  FeatureVector values{};
};

struct FeatureMatrix {
  std::vector<FeatureRow> rows;
  Conditioning conditioning = Conditioning::Raw;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
};

/// Orders rows by (participant, interval start) and rejects duplicate keys.
inline FeatureMatrix assemble_matrix(std::vector<FeatureRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const FeatureRow& a, const FeatureRow& b) {
    return std::tie(a.participant_id, a.start) < std::tie(b.participant_id, b.start);
  });
  std::set<std::tuple<std::string, EventKind, Phase>> seen;
  for (const auto& r : rows)
    if (!seen.emplace(r.participant_id, r.event, r.phase).second)
      throw AssemblyError("duplicate row " + r.participant_id + " " + std::string(to_token(r.event)) + "/" +
                          std::string(to_token(r.phase)));
  return {std::move(rows), Conditioning::Raw};
}

/// Per participant and feature: subtract the median (center) and divide by
/// the interquartile range (scale). A zero IQR divides by one.
inline FeatureMatrix condition_matrix(const FeatureMatrix& m, bool center, bool scale) {
  FeatureMatrix out = m;
  out.conditioning = center ? (scale ? Conditioning::CenteredScaled : Conditioning::Centered)
                            : (scale ? Conditioning::Scaled : Conditioning::Raw);
  if (!center && !scale) return out;

  std::map<std::string, std::vector<std::size_t>> by_participant;
  for (std::size_t i = 0; i < out.rows.size(); ++i) by_participant[out.rows[i].participant_id].push_back(i);

  for (const auto& [pid, idx] : by_participant) {
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
      std::vector<double> col;
      col.reserve(idx.size());
      for (auto i : idx) col.push_back(m.rows[i].values[f]);
      std::sort(col.begin(), col.end());
      const double med = center ? percentile_sorted(col, 50.0) : 0.0;
      double spread = 1.0;
      if (scale) {
        spread = percentile_sorted(col, 75.0) - percentile_sorted(col, 25.0);
        if (spread == 0.0) {
          spdlog::warn("participant {} feature {} has zero IQR; left unscaled", pid, kFeatureNames[f]);
          spread = 1.0;
        }
      }
      for (auto i : idx) out.rows[i].values[f] = (m.rows[i].values[f] - med) / spread;
    }
  }
  return out;
}

struct CorrelationMatrix {
  std::array<std::array<double, kNumFeatures>, kNumFeatures> r{};
  std::array<bool, kNumFeatures> constant{};
};

inline CorrelationMatrix correlation_matrix(const FeatureMatrix& m) {
  if (m.rows.size() < 2) throw InsufficientDataError("correlation needs at least 2 rows");
  const auto n = static_cast<double>(m.rows.size());
  std::array<double, kNumFeatures> mu{}, sd{};
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    for (const auto& r : m.rows) mu[f] += r.values[f];
    mu[f] /= n;
    for (const auto& r : m.rows) sd[f] += (r.values[f] - mu[f]) * (r.values[f] - mu[f]);
    sd[f] = std::sqrt(sd[f]);
  }
  CorrelationMatrix c;
  for (std::size_t f = 0; f < kNumFeatures; ++f) c.constant[f] = !(sd[f] > 0.0);
  for (std::size_t a = 0; a < kNumFeatures; ++a) {
    c.r[a][a] = 1.0;
    for (std::size_t b = a + 1; b < kNumFeatures; ++b) {
      double v = 0.0;
      if (!c.constant[a] && !c.constant[b]) {
        for (const auto& r : m.rows) v += (r.values[a] - mu[a]) * (r.values[b] - mu[b]);
        v /= sd[a] * sd[b];
        v = std::clamp(v, -1.0, 1.0);
      }
      c.r[a][b] = c.r[b][a] = v;
    }
  }
  return c;
}

enum class TaskKind { AloneVsSocial, DuringVsPrePost, PreVsPost, DyadVsGroup, ImplicitVsExplicit };

inline constexpr std::array<TaskKind, 5> kAllTasks{TaskKind::AloneVsSocial, TaskKind::DuringVsPrePost,
                                                   TaskKind::PreVsPost, TaskKind::DyadVsGroup,
                                                   TaskKind::ImplicitVsExplicit};

inline constexpr std::string_view to_token(TaskKind t) {
  switch (t) {
    case TaskKind::AloneVsSocial: return "alone-social";
    case TaskKind::DuringVsPrePost: return "during-prepost";
    case TaskKind::PreVsPost: return "pre-post";
    case TaskKind::DyadVsGroup: return "dyad-group";
    case TaskKind::ImplicitVsExplicit: return "implicit-explicit";
  }
  return "";
}

inline TaskKind parse_task(std::string_view token) {
  for (auto t : kAllTasks)
    if (to_token(t) == token) return t;
  throw ParseError("unknown task '" + std::string(token) + "'");
}

/// Names of label 0 and label 1.
inline std::array<std::string_view, 2> class_names(TaskKind t) {
  switch (t) {
    case TaskKind::AloneVsSocial: return {"alone", "social"};
    case TaskKind::DuringVsPrePost: return {"during", "pre_post"};
    case TaskKind::PreVsPost: return {"pre", "post"};
    case TaskKind::DyadVsGroup: return {"dyad", "group"};
    case TaskKind::ImplicitVsExplicit: return {"implicit", "explicit"};
  }
  return {"", ""};
}

/// Label of an (event, phase) pair within a task; empty when the row does not
/// belong to the task.
inline std::optional<int> task_label(TaskKind t, EventKind e, Phase p) {
  const bool social = context_of(e) == Context::Social;
  switch (t) {
    case TaskKind::AloneVsSocial:
      if (p != Phase::During) return std::nullopt;
      return social ? 1 : 0;
    case TaskKind::DuringVsPrePost:
      if (!social) return std::nullopt;
      return p == Phase::During ? 0 : 1;
    case TaskKind::PreVsPost:
      if (!social || p == Phase::During) return std::nullopt;
      return p == Phase::Pre ? 0 : 1;
    case TaskKind::DyadVsGroup:
      if (!social || p != Phase::During) return std::nullopt;
      return *size_of(e) == GroupSize::Dyad ? 0 : 1;
    case TaskKind::ImplicitVsExplicit:
      if (!social || p != Phase::During) return std::nullopt;
      return *threat_of(e) == Threat::Implicit ? 0 : 1;
  }
  return std::nullopt;
}

struct TaskRow {
  std::string participant_id;
  EventKind event = EventKind::Alone;
  Phase phase = Phase::Pre;
  FeatureVector values{};
  int label = 0;
};

struct TaskDataset {
  TaskKind task = TaskKind::AloneVsSocial;
  std::vector<TaskRow> rows;
  std::vector<std::string> participants;  // sorted, unique

  std::size_t size() const { return rows.size(); }
};

inline TaskDataset build_task(const FeatureMatrix& m, TaskKind task) {
  TaskDataset d;
  d.task = task;
  std::set<std::string> participants;
  std::array<std::size_t, 2> counts{};
  for (const auto& r : m.rows) {
    const auto label = task_label(task, r.event, r.phase);
    if (!label) continue;
    d.rows.push_back({r.participant_id, r.event, r.phase, r.values, *label});
    participants.insert(r.participant_id);
    ++counts[static_cast<std::size_t>(*label)];
  }
  const auto names = class_names(task);
  for (std::size_t c = 0; c < 2; ++c)
    if (counts[c] == 0)
      throw TaskConstructionError(std::string(to_token(task)) + ": class '" + std::string(names[c]) +
                                  "' has no rows");
  d.participants.assign(participants.begin(), participants.end());
  return d;
}

}  // namespace ctxsense
