#pragma once

// Seeded synthetic sessions with known ground truth: a pulse train at planted
// NN intervals, Bateman-shaped skin-conductance responses, accelerometer
// jitter and skin temperature, laid out on the study's event timeline.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ctxsense/error.hpp"
#include "ctxsense/features.hpp"
#include "ctxsense/ingest.hpp"
#include "ctxsense/numeric.hpp"
#include "ctxsense/types.hpp"

namespace ctxsense {

/// Physiology of one (context, phase) cell.
struct PhaseState {
  double hr_bpm = 70.0;
  double lf_amp_s = 0.02;   // 0.1 Hz NN modulation amplitude
  double hf_amp_s = 0.02;   // 0.25 Hz NN modulation amplitude
  double jitter_s = 0.01;   // beat-to-beat white noise
  double scr_per_min = 1.0;
  double acc_sd = 0.02;     // g, SD of the accelerometer magnitude
  double temp_offset = 0.0; // deg C
  double scl_offset = 0.0;  // microsiemens
};

struct SynthConfig {
  std::size_t participants = 46;
  // Social events completed per participant (0..4); empty means all four.
  std::vector<std::size_t> social_events;

  // [context][phase] with context 0 = alone, 1 = social.
  std::array<std::array<PhaseState, 3>, 2> physiology{{
      {{{70, 0.02, 0.02, 0.01, 1.0, 0.020, 0.0, 0.0},
        {72, 0.02, 0.02, 0.01, 2.0, 0.030, 0.0, 0.2},
        {70, 0.02, 0.02, 0.01, 1.0, 0.020, 0.0, 0.0}}},
      {{{76, 0.02, 0.015, 0.01, 3.0, 0.025, 0.1, 0.5},
        {84, 0.015, 0.012, 0.008, 5.0, 0.050, 0.2, 1.0},
        {73, 0.02, 0.02, 0.01, 2.0, 0.025, 0.1, 0.4}}},
  }};
  double group_hr_delta = 3.0;     // added to social During heart rate for group events
  double explicit_hr_delta = 2.0;  // added to social During heart rate for explicit-threat events

  // Participant-level additive offsets (SDs of the draws).
  double nn_offset_sd = 0.08;     // s
  double scl_base = 4.0;          // microsiemens
  double scl_offset_sd = 2.0;
  double temp_base = 33.0;        // deg C
  double temp_offset_sd = 0.8;
  double acc_offset_sd = 0.01;    // g, on the magnitude mean
  // Per-interval variability of the planted NN mean and ACC SD.
  double interval_nn_sd = 0.01;
  double interval_acc_sd = 0.003;

  // PPG shape and corruption.
  double ppg_amplitude = 40.0;
  double ppg_noise_sd = 0.5;
  double ppg_wander_amp = 4.0;
  double artifact_per_min = 0.0;  // Poisson rate of 0.5 s saturation bursts
  double artifact_level = 4.0;    // burst level in units of ppg_amplitude
  bool artifacts_social_only = false;  // restrict bursts to social-event intervals

  double eda_noise_sd = 0.0;
  double scr_amp_min = 0.2, scr_amp_max = 0.6;

  // Response archetypes on social and alone During intervals, placed on a
  // grid in (nn_mean, acc_sd) with spacing `archetype_separation` in units of
  // the per-interval variability.
  std::size_t social_archetypes = 0;
  std::size_t alone_archetypes = 0;
  double archetype_separation = 8.0;

  std::uint64_t seed = 1;
  double epoch = 1.6e9;
};

inline SynthConfig preset594_config(std::uint64_t seed = 1) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.participants = 46;
  cfg.social_events.assign(46, 4);
  // 16 participants stop after two conversations: 16*9 + 30*15 = 594.
  for (std::size_t i = 0; i < 16; ++i) cfg.social_events[i] = 2;
  return cfg;
}

inline void validate(const SynthConfig& cfg) {
  if (!cfg.social_events.empty() && cfg.social_events.size() != cfg.participants)
    throw ConfigError("social_events must list one count per participant");
  for (auto n : cfg.social_events)
    if (n > 4) throw ConfigError("a participant can complete at most 4 social events");
  for (const auto& ctx : cfg.physiology)
    for (const auto& s : ctx) {
      if (!(s.hr_bpm >= 30 && s.hr_bpm <= 200)) throw ConfigError("heart rate must be within 30-200 bpm");
      if (s.lf_amp_s < 0 || s.hf_amp_s < 0 || s.jitter_s < 0 || s.scr_per_min < 0 || s.acc_sd < 0)
        throw ConfigError("physiology amplitudes and rates must be non-negative");
    }
  for (double v : {cfg.nn_offset_sd, cfg.scl_offset_sd, cfg.temp_offset_sd, cfg.acc_offset_sd, cfg.interval_nn_sd,
                   cfg.interval_acc_sd, cfg.ppg_noise_sd, cfg.ppg_wander_amp, cfg.artifact_per_min, cfg.eda_noise_sd,
                   cfg.archetype_separation})
    if (!(v >= 0) || !std::isfinite(v)) throw ConfigError("noise levels and rates must be finite and non-negative");
  if (!(cfg.ppg_amplitude > 0)) throw ConfigError("ppg_amplitude must be positive");
  if (!(cfg.scr_amp_min > 0 && cfg.scr_amp_max >= cfg.scr_amp_min)) throw ConfigError("invalid SCR amplitude range");
  if (cfg.social_archetypes > 6) throw ConfigError("at most 6 social archetypes");
  if (cfg.alone_archetypes > 1) throw ConfigError("at most 1 alone archetype");
}

struct IntervalTruth {
  EventKind event = EventKind::Alone;
  Phase phase = Phase::Pre;
  double start = 0.0, end = 0.0;
  std::vector<double> beat_times;  // relative to interval start
  std::vector<double> nn;          // successive differences of beat_times
  std::vector<double> scr_times;   // SCR peak times, relative
  std::vector<double> scr_amplitudes;
  double acc_sd = 0.0;
  int archetype = -1;
};

struct SessionTruth {
  std::string participant_id;
  double nn_offset = 0.0, scl_offset = 0.0, temp_offset = 0.0, acc_offset = 0.0;
  std::vector<IntervalTruth> intervals;
};

struct SynthSession {
  SessionStreams streams;
  SessionTimeline timeline;
  SessionTruth truth;
};

inline std::string synth_participant_id(std::size_t index) {
  std::string id = std::to_string(index + 1);
  return "P" + std::string(id.size() < 2 ? 2 - id.size() : 0, '0') + id;
}

namespace detail {

inline constexpr double kBeatSigma = 0.06;
inline constexpr double kDicroticDelay = 0.25;
inline constexpr double kDicroticRatio = 0.35;
inline constexpr double kScrRise = 0.75;
inline constexpr double kScrDecay = 2.0;
inline constexpr double kGapInitial = 30.0, kGapPhase = 10.0, kGapEvent = 60.0, kTail = 10.0;

/// Bateman response normalised to unit peak.
inline double bateman(double t) {
  if (t <= 0) return 0.0;
  static const double t_peak = std::log(kScrDecay / kScrRise) * kScrRise * kScrDecay / (kScrDecay - kScrRise);
  static const double peak = std::exp(-t_peak / kScrDecay) - std::exp(-t_peak / kScrRise);
  return (std::exp(-t / kScrDecay) - std::exp(-t / kScrRise)) / peak;
}

inline double bateman_peak_delay() {
  return std::log(kScrDecay / kScrRise) * kScrRise * kScrDecay / (kScrDecay - kScrRise);
}

/// Archetype grid position (x, y) in units of the separation.
inline std::pair<double, double> archetype_position(bool social, int id) {
  if (!social) return {-1.0, 0.5};
  return {static_cast<double>(id % 3), static_cast<double>(id / 3)};
}

struct Segment {
  double start, end;
  std::optional<std::size_t> interval;  // index into truth.intervals; empty for gaps
  double nn_mean, lf, hf, jitter, acc_sd, temp, scl;
};

}  // namespace detail

/// Beat train with Gaussian systolic bumps peaking at the given times.
inline std::vector<double> pulse_train(std::span<const double> beat_times, double rate, std::size_t n_samples,
                                       double amplitude = 1.0) {
  std::vector<double> out(n_samples, 0.0);
  const double reach = 5 * detail::kBeatSigma;
  for (double tb : beat_times) {
    for (double centre : {tb, tb + detail::kDicroticDelay}) {
      const double a = centre == tb ? amplitude : amplitude * detail::kDicroticRatio;
      const auto lo = static_cast<long>(std::ceil((centre - reach) * rate));
      const auto hi = static_cast<long>(std::floor((centre + reach) * rate));
      for (long i = std::max(0L, lo); i <= hi && i < static_cast<long>(n_samples); ++i) {
        const double dt = static_cast<double>(i) / rate - centre;
        out[static_cast<std::size_t>(i)] += a * std::exp(-0.5 * dt * dt / (detail::kBeatSigma * detail::kBeatSigma));
      }
    }
  }
  return out;
}

inline SynthSession generate_session(const SynthConfig& cfg, std::size_t index) {
  validate(cfg);
  SynthSession s;
  const std::string pid = synth_participant_id(index);
  std::mt19937_64 rng(derive_seed(cfg.seed, hash_string(pid)));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  auto& truth = s.truth;
  truth.participant_id = pid;
  truth.nn_offset = cfg.nn_offset_sd * gauss(rng);
  truth.scl_offset = cfg.scl_offset_sd * gauss(rng);
  truth.temp_offset = cfg.temp_offset_sd * gauss(rng);
  truth.acc_offset = cfg.acc_offset_sd * gauss(rng);
  std::array<double, 3> direction{gauss(rng), gauss(rng), gauss(rng) + 3.0};
  const double norm = std::hypot(direction[0], direction[1], direction[2]);
  for (auto& d : direction) d /= norm;

  // Event order: alone first, then the completed social events in random order.
  std::vector<EventKind> social{EventKind::DyadImplicit, EventKind::DyadExplicit, EventKind::GroupImplicit,
                                EventKind::GroupExplicit};
  std::shuffle(social.begin(), social.end(), rng);
  const std::size_t n_social = cfg.social_events.empty() ? 4 : cfg.social_events[index];
  social.resize(n_social);
  std::vector<EventKind> events{EventKind::Alone};
  events.insert(events.end(), social.begin(), social.end());

  const double session_start = cfg.epoch + 86400.0 * static_cast<double>(index);
  s.timeline.participant_id = pid;

  // Planted physiology per interval; gaps take the alone/pre baseline.
  const auto& baseline = cfg.physiology[0][0];
  auto segment_for = [&](double start, double end, const PhaseState& ps, double hr) {
    return detail::Segment{start, end, std::nullopt, std::clamp(60.0 / hr + truth.nn_offset, 0.35, 1.6),
                           ps.lf_amp_s, ps.hf_amp_s, ps.jitter_s, ps.acc_sd, ps.temp_offset, ps.scl_offset};
  };
  std::vector<detail::Segment> segments;
  double t = session_start + detail::kGapInitial;
  segments.push_back(segment_for(session_start, t, baseline, baseline.hr_bpm));
  for (std::size_t ei = 0; ei < events.size(); ++ei) {
    const EventKind e = events[ei];
    const bool is_social = context_of(e) == Context::Social;
    std::optional<int> archetype;
    const std::size_t n_arch = is_social ? cfg.social_archetypes : cfg.alone_archetypes;
    if (n_arch > 0) archetype = static_cast<int>(std::uniform_int_distribution<std::size_t>(0, n_arch - 1)(rng));
    for (auto p : kAllPhases) {
      const double dur = p == Phase::During ? during_duration(e) : kPrePostDuration;
      const auto& ps = cfg.physiology[is_social ? 1 : 0][static_cast<std::size_t>(p)];
      double hr = ps.hr_bpm;
      if (is_social && p == Phase::During) {
        if (*size_of(e) == GroupSize::Group) hr += cfg.group_hr_delta;
        if (*threat_of(e) == Threat::Explicit) hr += cfg.explicit_hr_delta;
      }
      auto seg = segment_for(t, t + dur, ps, hr);
      IntervalTruth it;
      it.event = e;
      it.phase = p;
      it.start = t;
      it.end = t + dur;
      if (archetype && p == Phase::During) {
        const auto [x, y] = detail::archetype_position(is_social, *archetype);
        seg.nn_mean = std::clamp(60.0 / baseline.hr_bpm + truth.nn_offset +
                                     (x - 1.0) * cfg.archetype_separation * cfg.interval_nn_sd,
                                 0.35, 1.6);
        seg.acc_sd = baseline.acc_sd + y * cfg.archetype_separation * cfg.interval_acc_sd;
        it.archetype = is_social ? *archetype : 0;
      }
      seg.nn_mean = std::clamp(seg.nn_mean + cfg.interval_nn_sd * gauss(rng), 0.35, 1.6);
      seg.acc_sd = std::max(0.0, seg.acc_sd + cfg.interval_acc_sd * gauss(rng));
      it.acc_sd = seg.acc_sd;
      seg.interval = truth.intervals.size();
      truth.intervals.push_back(it);
      segments.push_back(seg);
      s.timeline.entries.push_back({e, p, t, t + dur});
      t += dur;
      const double gap = p == Phase::Post ? (ei + 1 < events.size() ? detail::kGapEvent : detail::kTail)
                                          : detail::kGapPhase;
      segments.push_back(segment_for(t, t + gap, baseline, baseline.hr_bpm));
      t += gap;
    }
  }
  const double session_end = t;
  const double session_len = session_end - session_start;

  // Beats: NN drawn from the segment containing the previous beat.
  std::vector<double> beats;
  {
    const double phi_lf = 2 * std::numbers::pi * unif(rng), phi_hf = 2 * std::numbers::pi * unif(rng);
    std::size_t si = 0;
    double tb = session_start + 0.3;
    while (tb < session_end) {
      beats.push_back(tb);
      while (si + 1 < segments.size() && tb >= segments[si].end) ++si;
      const auto& seg = segments[si];
      const double rel = tb - session_start;
      double nn = seg.nn_mean + seg.lf * std::sin(2 * std::numbers::pi * 0.1 * rel + phi_lf) +
                  seg.hf * std::sin(2 * std::numbers::pi * 0.25 * rel + phi_hf) + seg.jitter * gauss(rng);
      tb += std::clamp(nn, 0.33, 1.8);
    }
  }
  for (auto& it : truth.intervals) {
    for (double b : beats)
      if (b >= it.start && b < it.end) it.beat_times.push_back(b - it.start);
    for (std::size_t i = 1; i < it.beat_times.size(); ++i) it.nn.push_back(it.beat_times[i] - it.beat_times[i - 1]);
  }

  // PPG.
  {
    const double rate = nominal_rate(SensorKind::PPG);
    const auto n = static_cast<std::size_t>(std::floor(session_len * rate));
    std::vector<double> rel(beats.size());
    for (std::size_t i = 0; i < beats.size(); ++i) rel[i] = beats[i] - session_start;
    auto ppg = pulse_train(rel, rate, n, cfg.ppg_amplitude);
    const double phi = 2 * std::numbers::pi * unif(rng);
    for (std::size_t i = 0; i < n; ++i) {
      const double ti = static_cast<double>(i) / rate;
      ppg[i] += cfg.ppg_wander_amp * std::sin(2 * std::numbers::pi * 0.2 * ti + phi) + cfg.ppg_noise_sd * gauss(rng);
    }
    if (cfg.artifact_per_min > 0) {
      std::exponential_distribution<double> wait(cfg.artifact_per_min / 60.0);
      for (double ta = wait(rng); ta < session_len; ta += wait(rng)) {
        const double level = (unif(rng) < 0.5 ? -1.0 : 1.0) * cfg.artifact_level * cfg.ppg_amplitude;
        if (cfg.artifacts_social_only &&
            std::none_of(truth.intervals.begin(), truth.intervals.end(), [&](const IntervalTruth& it) {
              return context_of(it.event) == Context::Social && session_start + ta >= it.start &&
                     session_start + ta < it.end;
            }))
          continue;
        const auto lo = static_cast<std::size_t>(ta * rate);
        for (std::size_t i = lo; i < std::min(n, lo + static_cast<std::size_t>(0.5 * rate)); ++i) ppg[i] = level;
      }
    }
    for (auto& v : ppg) v = std::round(v * 1000.0) / 1000.0;
    s.streams.ppg = {SensorKind::PPG, session_start, rate, std::move(ppg)};
  }

  // SCRs inside intervals, at least 5 s apart and clear of the edges.
  struct Scr {
    double onset, amplitude;
  };
  std::vector<Scr> scrs;
  const double peak_delay = detail::bateman_peak_delay();
  for (std::size_t si = 0; si < segments.size(); ++si) {
    const auto& seg = segments[si];
    if (!seg.interval) continue;
    auto& it = truth.intervals[*seg.interval];
    const auto& ps = cfg.physiology[context_of(it.event) == Context::Social ? 1 : 0][static_cast<std::size_t>(it.phase)];
    if (ps.scr_per_min <= 0) continue;
    const double mean_wait = std::max(0.5, 60.0 / ps.scr_per_min - 5.0);
    std::exponential_distribution<double> wait(1.0 / mean_wait);
    for (double onset = seg.start + 5.0 + wait(rng); onset + peak_delay < seg.end - 6.0; onset += 5.0 + wait(rng)) {
      const double amp = cfg.scr_amp_min + (cfg.scr_amp_max - cfg.scr_amp_min) * unif(rng);
      scrs.push_back({onset, amp});
      it.scr_times.push_back(onset + peak_delay - it.start);
      it.scr_amplitudes.push_back(amp);
    }
  }

  // Slow per-segment levels, eased across gaps so no step lands inside an interval.
  auto eased_level = [&](double tt, auto field) {
    for (std::size_t si = 0; si < segments.size(); ++si) {
      const auto& seg = segments[si];
      if (tt >= seg.end && si + 1 < segments.size()) continue;
      if (seg.interval || si == 0 || si + 1 == segments.size()) return field(seg);
      const double prev = field(segments[si - 1]);
      const double next = field(segments[si + 1]);
      const double u = std::clamp((tt - seg.start) / (seg.end - seg.start), 0.0, 1.0);
      return prev + (next - prev) * 0.5 * (1 - std::cos(std::numbers::pi * u));
    }
    return field(segments.back());
  };

  // EDA.
  {
    const double rate = nominal_rate(SensorKind::EDA);
    const auto n = static_cast<std::size_t>(std::floor(session_len * rate));
    std::vector<double> eda(n);
    const double level = std::max(0.5, cfg.scl_base + truth.scl_offset);
    const double phi = 2 * std::numbers::pi * unif(rng);
    std::size_t first = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ti = session_start + static_cast<double>(i) / rate;
      double v = level + 0.3 * std::sin(2 * std::numbers::pi * ti / 900.0 + phi) +
                 eased_level(ti, [](const detail::Segment& g) { return g.scl; });
      while (first < scrs.size() && scrs[first].onset < ti - 40.0) ++first;
      for (std::size_t k = first; k < scrs.size() && scrs[k].onset < ti; ++k)
        v += scrs[k].amplitude * detail::bateman(ti - scrs[k].onset);
      if (cfg.eda_noise_sd > 0) v += cfg.eda_noise_sd * gauss(rng);
      eda[i] = std::round(std::max(0.0, v) * 1e6) / 1e6;
    }
    s.streams.eda = {SensorKind::EDA, session_start, rate, std::move(eda)};
  }

  // Temperature.
  {
    const double rate = nominal_rate(SensorKind::TMP);
    const auto n = static_cast<std::size_t>(std::floor(session_len * rate));
    std::vector<double> tmp(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double ti = session_start + static_cast<double>(i) / rate;
      const double v = cfg.temp_base + truth.temp_offset + 0.0002 * (ti - session_start) +
                       eased_level(ti, [](const detail::Segment& g) { return g.temp; }) + 0.01 * gauss(rng);
      tmp[i] = std::round(v * 100.0) / 100.0;
    }
    s.streams.tmp = {SensorKind::TMP, session_start, rate, std::move(tmp)};
  }

  // Accelerometer: magnitude 1 + offset + N(0, sd) along a fixed direction, in 1/64 g counts.
  {
    const double rate = nominal_rate(SensorKind::ACC);
    const auto n = static_cast<std::size_t>(std::floor(session_len * rate));
    std::vector<double> acc(3 * n);
    std::size_t si = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ti = session_start + static_cast<double>(i) / rate;
      while (si + 1 < segments.size() && ti >= segments[si].end) ++si;
      const double mag = 1.0 + truth.acc_offset + segments[si].acc_sd * gauss(rng);
      for (std::size_t c = 0; c < 3; ++c)
        acc[3 * i + c] = std::round(mag * direction[c] * kAccCountsPerG) / kAccCountsPerG;
    }
    s.streams.acc = {SensorKind::ACC, session_start, rate, std::move(acc)};
  }
  return s;
}

/// Generates every participant in order, handing each session to `sink`.
inline void generate_study(const SynthConfig& cfg, const std::function<void(SynthSession&&)>& sink) {
  validate(cfg);
  for (std::size_t i = 0; i < cfg.participants; ++i) sink(generate_session(cfg, i));
}

/// Interval count implied by the completeness pattern.
inline std::size_t expected_interval_count(const SynthConfig& cfg) {
  std::size_t total = 0;
  for (std::size_t i = 0; i < cfg.participants; ++i)
    total += 3 * (1 + (cfg.social_events.empty() ? 4 : cfg.social_events[i]));
  return total;
}

}  // namespace ctxsense
