#pragma once

// Interval-level processing: slice a session, clean each channel and compute
// the feature row, logging why any interval is excluded.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <spdlog/spdlog.h>

#include "ctxsense/dsp/butterworth.hpp"
#include "ctxsense/dsp/peaks.hpp"
#include "ctxsense/eda.hpp"
#include "ctxsense/error.hpp"
#include "ctxsense/features.hpp"
#include "ctxsense/hrv.hpp"
#include "ctxsense/ingest.hpp"

namespace ctxsense {

struct PipelineConfig {
  int ppg_order = 3;
  double ppg_low_hz = 0.5;
  double ppg_high_hz = 8.0;
  dsp::FilterMode filter_mode = dsp::FilterMode::ZeroPhase;
  dsp::PeakDetectorConfig peaks;
  // Peaks on or near a run of identical raw samples at least this long are
  // discarded; zero disables the guard.
  double saturation_min_s = 0.1;
  double saturation_margin_s = 0.3;
  // Peaks this close to the interval start may be the dicrotic wave of a beat
  // that precedes the slice.
  double leading_edge_s = 0.3;
  NNCleaning nn_cleaning = NNCleaning::Automatic;
  NNCleaningParams nn_params;
  EdaConfig eda;
  FeatureConfig features;
};

struct Exclusion {
  std::string participant_id;
  EventKind event = EventKind::Alone;
  Phase phase = Phase::Pre;
  std::string reason;
};

/// Detected beats of one interval, before NN cleaning.
struct IntervalBeats {
  std::vector<std::size_t> peaks;
  NNSeries raw_nn;
};

inline IntervalBeats detect_beats(const SensorStream& ppg, const PipelineConfig& cfg = {}) {
  const auto spec = dsp::FilterSpec::bandpass(cfg.ppg_order, cfg.ppg_low_hz, cfg.ppg_high_hz, ppg.rate);
  const auto filtered = dsp::butterworth_filter(ppg.values, spec, cfg.filter_mode);
  IntervalBeats b;
  b.peaks = dsp::detect_systolic_peaks(filtered, ppg.rate, cfg.peaks);
  const auto edge = static_cast<std::size_t>(std::lround(cfg.leading_edge_s * ppg.rate));
  std::erase_if(b.peaks, [&](std::size_t p) { return p < edge; });
  if (cfg.saturation_min_s > 0) {
    const auto runs = dsp::flat_runs(ppg.values, static_cast<std::size_t>(std::lround(cfg.saturation_min_s * ppg.rate)));
    if (!runs.empty())
      b.peaks = dsp::drop_near_runs(b.peaks, runs, static_cast<std::size_t>(std::lround(cfg.saturation_margin_s * ppg.rate)));
  }
  b.raw_nn = nn_from_peaks(b.peaks, ppg.rate);
  return b;
}

inline std::vector<double> acc_magnitude(const SensorStream& acc) {
  std::vector<double> m(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) {
    const auto s = acc.sample(i);
    m[i] = std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]);
  }
  return m;
}

/// Everything except the NN series, which the caller supplies after cleaning.
inline CleanedInterval clean_non_nn(const IntervalSlice& slice, const PipelineConfig& cfg = {}) {
  CleanedInterval c;
  c.duration = slice.duration();
  c.temperature = slice.streams.tmp.values;
  c.acc_magnitude = acc_magnitude(slice.streams.acc);
  const auto eda = clean_eda(slice.streams.eda.values, slice.streams.eda.rate, cfg.eda);
  c.eda = decompose_eda(eda, slice.streams.eda.rate, cfg.eda);
  c.scr = detect_scr_peaks(c.eda.phasic, c.eda.rate, cfg.eda);
  return c;
}

inline FeatureRow process_interval(const IntervalSlice& slice, const PipelineConfig& cfg = {}) {
  const auto beats = detect_beats(slice.streams.ppg, cfg);
  CleanedInterval c = clean_non_nn(slice, cfg);
  c.nn = clean_nn(beats.raw_nn, cfg.nn_cleaning, cfg.nn_params);
  FeatureConfig fc = cfg.features;
  fc.scr_mean_from_peaks = fc.scr_mean_from_peaks || cfg.eda.scr_mean_from_peaks;
  return {slice.participant_id, slice.event, slice.phase, slice.start, compute_features(c, fc)};
}

// ---------------------------------------------------------------------------
// Session directories: <dir>/{BVP,ACC,EDA,TEMP}.csv and <dir>/timeline.csv.

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline constexpr std::string_view kTimelineFile = "timeline.csv";

struct LoadedSession {
  SessionStreams streams;
  SessionTimeline timeline;
};

/// Parse errors are re-thrown with the offending file prefixed.
inline LoadedSession load_session(const std::filesystem::path& dir) {
  LoadedSession s;
  auto with_file = [&](const std::filesystem::path& p, auto&& fn) {
    const auto bytes = read_file(p);
    try {
      return fn(bytes);
    } catch (const ParseError& e) {
      throw ParseError(p.string() + ": " + e.what());
    } catch (const SchemaError& e) {
      throw SchemaError(p.string() + ": " + e.what());
    }
  };
  for (auto kind : kAllSensors) {
    const auto path = dir / std::string(file_name(kind));
    s.streams.get(kind) = with_file(path, [&](const std::string& b) { return parse_stream(b, kind); });
  }
  s.timeline = with_file(dir / std::string(kTimelineFile), [](const std::string& b) { return parse_timeline(b); });
  return s;
}

struct SessionFeatures {
  std::vector<FeatureRow> rows;
  std::vector<Exclusion> excluded;
  // Per interval that produced beats: raw NN series for the cleaning benchmark.
  std::vector<std::pair<FeatureRow, NNSeries>> raw_nn;
};

inline SessionFeatures extract_session(const LoadedSession& session, const PipelineConfig& cfg = {}) {
  SessionFeatures out;
  for (const auto& slice : slice_intervals(session.streams, session.timeline)) {
    try {
      const auto beats = detect_beats(slice.streams.ppg, cfg);
      CleanedInterval c = clean_non_nn(slice, cfg);
      c.nn = clean_nn(beats.raw_nn, cfg.nn_cleaning, cfg.nn_params);
      FeatureConfig fc = cfg.features;
      fc.scr_mean_from_peaks = fc.scr_mean_from_peaks || cfg.eda.scr_mean_from_peaks;
      FeatureRow row{slice.participant_id, slice.event, slice.phase, slice.start, compute_features(c, fc)};
      out.raw_nn.emplace_back(row, beats.raw_nn);
      out.rows.push_back(std::move(row));
    } catch (const Error& e) {
      spdlog::info("excluding {} {}/{}: {}", slice.participant_id, to_token(slice.event), to_token(slice.phase),
                   e.what());
      out.excluded.push_back({slice.participant_id, slice.event, slice.phase, e.what()});
    }
  }
  return out;
}

/// NN-only feature matrices for every (cleaning method, window) cell. Cells
/// where an interval's series is too short leave that interval out.
inline std::map<std::pair<NNCleaning, double>, FeatureMatrix> nn_benchmark_sets(
    const std::vector<std::pair<FeatureRow, NNSeries>>& raw, std::span<const NNCleaning> methods,
    std::span<const double> windows, const PipelineConfig& cfg = {}) {
  std::map<std::pair<NNCleaning, double>, FeatureMatrix> out;
  for (auto m : methods)
    for (double w : windows) {
      std::vector<FeatureRow> rows;
      for (const auto& [key, nn] : raw) {
        try {
          const auto f = compute_nn_features(clean_nn(truncate_nn(nn, w), m, cfg.nn_params), cfg.features);
          FeatureRow r = key;
          r.values.fill(0.0);
          r.values[0] = f.mean, r.values[1] = f.sd, r.values[2] = f.rmssd, r.values[3] = f.prc20;
          r.values[4] = f.prc80, r.values[5] = f.lfn, r.values[6] = f.hfn;
          rows.push_back(std::move(r));
        } catch (const Error&) {
        }
      }
      out[{m, w}] = assemble_matrix(std::move(rows));
    }
  return out;
}

}  // namespace ctxsense
