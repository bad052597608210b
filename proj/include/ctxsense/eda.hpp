#pragma once

// Tonic/phasic split of electrodermal activity and SCR peak detection.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "ctxsense/dsp/butterworth.hpp"
#include "ctxsense/error.hpp"

namespace ctxsense {

struct EdaConfig {
  double clean_lowpass_hz = 3.0;
  int clean_order = 4;
  double tonic_cutoff_hz = 0.05;
  double scr_min_amplitude = 0.01;  // microsiemens
  double scr_min_separation_s = 1.0;
  bool scr_above_tonic = true;       // peak must rise the amplitude threshold above tonic
  bool scr_mean_from_peaks = false;  // mean SCR peak amplitude instead of mean phasic level
};

struct EdaDecomposition {
  std::vector<double> tonic;
  std::vector<double> phasic;
  double rate = 0.0;
};

struct ScrPeaks {
  std::vector<std::size_t> indices;
  std::vector<double> amplitudes;  // rise above the preceding trough

  std::size_t size() const { return indices.size(); }
};

/// Lowpass cleaning of raw EDA. When the cutoff is not below Nyquist (the
/// 4 Hz wristband channel with a 3 Hz cutoff) the signal is returned as is.
inline std::vector<double> clean_eda(std::span<const double> raw, double rate, const EdaConfig& cfg = {}) {
  if (cfg.clean_lowpass_hz >= rate / 2.0) return {raw.begin(), raw.end()};
  return dsp::butterworth_filter(raw, dsp::FilterSpec::lowpass(cfg.clean_order, cfg.clean_lowpass_hz, rate));
}

/// tonic = zero-phase first-order lowpass of the input; phasic = input - tonic.
inline EdaDecomposition decompose_eda(std::span<const double> filtered, double rate, const EdaConfig& cfg = {}) {
  if (static_cast<double>(filtered.size()) < 3.0 * rate)
    throw InsufficientDataError("EDA decomposition needs at least 3 s of data");
  EdaDecomposition d;
  d.rate = rate;
  d.tonic = dsp::butterworth_filter(filtered, dsp::FilterSpec::lowpass(1, cfg.tonic_cutoff_hz, rate));
  d.phasic.resize(filtered.size());
  for (std::size_t i = 0; i < filtered.size(); ++i) d.phasic[i] = filtered[i] - d.tonic[i];
  return d;
}

/// Local maxima of the phasic component. Maxima closer than the minimum
/// separation are thinned by height (tallest first); survivors are kept when
/// their prominence reaches the amplitude threshold. Thinning does not depend
/// on the threshold, so the count is non-increasing in it. Maxima below the
/// tonic level are the smoothing residue between responses, not responses.
inline ScrPeaks detect_scr_peaks(std::span<const double> phasic, double rate, const EdaConfig& cfg = {}) {
  ScrPeaks out;
  const std::size_t n = phasic.size();
  if (n < 3) return out;

  std::vector<std::size_t> maxima;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(phasic[i] > phasic[i - 1])) continue;
    // Plateaus: take the left edge when the run eventually descends.
    std::size_t j = i;
    while (j + 1 < n && phasic[j + 1] == phasic[i]) ++j;
    if (j + 1 < n && phasic[j + 1] < phasic[i]) maxima.push_back(i);
    i = j;
  }

  const auto min_gap = static_cast<std::size_t>(std::lround(cfg.scr_min_separation_s * rate));
  std::vector<std::size_t> order(maxima.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return phasic[maxima[a]] > phasic[maxima[b]]; });
  std::vector<bool> kept(maxima.size(), true);
  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    const std::size_t a = order[oi];
    if (!kept[a]) continue;
    for (std::size_t b = a; b-- > 0 && maxima[a] - maxima[b] < min_gap;) kept[b] = false;
    for (std::size_t b = a + 1; b < maxima.size() && maxima[b] - maxima[a] < min_gap; ++b) kept[b] = false;
  }

  for (std::size_t m = 0; m < maxima.size(); ++m) {
    if (!kept[m]) continue;
    const std::size_t p = maxima[m];
    if (cfg.scr_above_tonic && !(phasic[p] >= cfg.scr_min_amplitude)) continue;
    // Bases: lowest point between the peak and the nearest higher sample on each side.
    double left_base = phasic[p];
    for (std::size_t j = p; j-- > 0;) {
      if (phasic[j] > phasic[p]) break;
      left_base = std::min(left_base, phasic[j]);
    }
    double right_base = phasic[p];
    for (std::size_t j = p + 1; j < n; ++j) {
      if (phasic[j] > phasic[p]) break;
      right_base = std::min(right_base, phasic[j]);
    }
    const double prominence = phasic[p] - std::max(left_base, right_base);
    if (prominence >= cfg.scr_min_amplitude) {
      out.indices.push_back(p);
      out.amplitudes.push_back(phasic[p] - left_base);
    }
  }
  return out;
}

}  // namespace ctxsense
