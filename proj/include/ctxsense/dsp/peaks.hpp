#pragma once

// Systolic peak detection with two event-related moving averages.

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace ctxsense::dsp {

struct PeakDetectorConfig {
  double peak_window_s = 0.111;  // W1
  double beat_window_s = 0.667;  // W2
  double beat_offset = 0.02;     // beta
  double refractory_s = 0.3;
};

/// Centered moving average; the window shrinks at the edges.
inline std::vector<double> centered_moving_average(std::span<const double> x, std::size_t window) {
  const std::size_t n = x.size();
  std::vector<double> out(n, 0.0);
  if (n == 0 || window == 0) return out;
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) cum[i + 1] = cum[i] + x[i];
  const std::size_t left = (window - 1) / 2;
  const std::size_t right = window - 1 - left;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= left ? i - left : 0;
    const std::size_t hi = std::min(n, i + right + 1);
    out[i] = (cum[hi] - cum[lo]) / static_cast<double>(hi - lo);
  }
  return out;
}

/// Indices of systolic peaks in a bandpass-filtered PPG signal.
inline std::vector<std::size_t> detect_systolic_peaks(std::span<const double> filtered, double rate,
                                                      const PeakDetectorConfig& cfg = {}) {
  const std::size_t n = filtered.size();
  std::vector<std::size_t> peaks;
  if (n == 0) return peaks;

  std::vector<double> squared(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = filtered[i] > 0.0 ? filtered[i] : 0.0;
    squared[i] = v * v;
    total += squared[i];
  }
  const double offset = cfg.beat_offset * total / static_cast<double>(n);

  const auto w1 = static_cast<std::size_t>(std::lround(cfg.peak_window_s * rate));
  const auto w2 = static_cast<std::size_t>(std::lround(cfg.beat_window_s * rate));
  const auto refractory = static_cast<std::size_t>(std::lround(cfg.refractory_s * rate));
  const auto ma_peak = centered_moving_average(squared, w1);
  const auto ma_beat = centered_moving_average(squared, w2);

  std::size_t i = 0;
  while (i < n) {
    if (!(ma_peak[i] > ma_beat[i] + offset)) {
      ++i;
      continue;
    }
    const std::size_t begin = i;
    while (i < n && ma_peak[i] > ma_beat[i] + offset) ++i;
    if (i - begin < w1) continue;

    std::size_t best = begin;
    for (std::size_t j = begin + 1; j < i; ++j)
      if (filtered[j] > filtered[best]) best = j;
    // A block maximum on a slope (typically at the record edge) is not a beat.
    if (best == 0 || best + 1 >= n || filtered[best] < filtered[best - 1] || filtered[best] < filtered[best + 1])
      continue;

    if (!peaks.empty() && best - peaks.back() < refractory) {
      if (filtered[best] > filtered[peaks.back()]) peaks.back() = best;
    } else {
      peaks.push_back(best);
    }
  }
  return peaks;
}

/// Half-open [begin, end) runs of at least `min_length` identical samples,
/// the signature of a saturated sensor.
inline std::vector<std::pair<std::size_t, std::size_t>> flat_runs(std::span<const double> x, std::size_t min_length) {
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= x.size(); ++i)
    if (i == x.size() || x[i] != x[begin]) {
      if (i - begin >= min_length && min_length > 0) runs.emplace_back(begin, i);
      begin = i;
    }
  return runs;
}

/// Drops peaks within `margin` samples of a saturated run.
inline std::vector<std::size_t> drop_near_runs(std::span<const std::size_t> peaks,
                                               std::span<const std::pair<std::size_t, std::size_t>> runs,
                                               std::size_t margin) {
  std::vector<std::size_t> out;
  for (auto p : peaks) {
    bool near = false;
    for (const auto& [b, e] : runs)
      if (p + margin >= b && p < e + margin) {
        near = true;
        break;
      }
    if (!near) out.push_back(p);
  }
  return out;
}

}  // namespace ctxsense::dsp
