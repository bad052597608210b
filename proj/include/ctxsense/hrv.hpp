#pragma once

// Beat-to-beat (NN) interval series and the interval-cleaning strategies.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ctxsense/error.hpp"
#include "ctxsense/numeric.hpp"

namespace ctxsense {

enum class NNCleaning { None, Median, Automatic, Rules };

inline constexpr std::string_view to_token(NNCleaning m) {
  switch (m) {
    case NNCleaning::None: return "none";
    case NNCleaning::Median: return "median";
    case NNCleaning::Automatic: return "automatic";
    case NNCleaning::Rules: return "rules";
  }
  return "";
}

inline NNCleaning parse_nn_cleaning(std::string_view token) {
  for (auto m : {NNCleaning::None, NNCleaning::Median, NNCleaning::Automatic, NNCleaning::Rules})
    if (to_token(m) == token) return m;
  throw ParseError("unknown NN cleaning method '" + std::string(token) + "'");
}

/// Intervals with the time of the beat that opens each one (seconds from
/// interval start). Before cleaning, onsets[i] + intervals[i] == onsets[i+1].
/// Cleaning removes intervals without re-differencing the survivors.
struct NNSeries {
  std::vector<double> onsets;
  std::vector<double> intervals;
  NNCleaning cleaned_by = NNCleaning::None;

  std::size_t size() const { return intervals.size(); }
  bool empty() const { return intervals.empty(); }
};

struct NNCleaningParams {
  std::size_t median_window = 5;
  double median_tolerance_s = 0.25;
  double automatic_cutoff = 0.4;
  double rules_low_s = 0.33;
  double rules_high_s = 1.5;
};

inline NNSeries nn_from_peaks(std::span<const std::size_t> peaks, double rate) {
  if (peaks.size() < 2) throw InsufficientDataError("need at least 2 peaks for an NN interval");
  NNSeries nn;
  nn.onsets.reserve(peaks.size() - 1);
  nn.intervals.reserve(peaks.size() - 1);
  for (std::size_t i = 0; i + 1 < peaks.size(); ++i) {
    const double a = static_cast<double>(peaks[i]) / rate;
    const double b = static_cast<double>(peaks[i + 1]) / rate;
    nn.onsets.push_back(a);
    nn.intervals.push_back(b - a);
  }
  return nn;
}

namespace detail {

inline NNSeries keep_where(const NNSeries& nn, const std::vector<bool>& keep, NNCleaning method) {
  NNSeries out;
  out.cleaned_by = method;
  for (std::size_t i = 0; i < nn.size(); ++i) {
    if (!keep[i]) continue;
    out.onsets.push_back(nn.onsets[i]);
    out.intervals.push_back(nn.intervals[i]);
  }
  if (out.empty()) throw EmptyAfterCleaningError(std::string("all intervals dropped by ") +
                                                 std::string(to_token(method)) + " cleaning");
  return out;
}

}  // namespace detail

inline NNSeries clean_nn(const NNSeries& nn, NNCleaning method, const NNCleaningParams& params = {}) {
  if (nn.empty()) throw InsufficientDataError("empty NN series");
  const std::size_t n = nn.size();
  std::vector<bool> keep(n, true);

  switch (method) {
    case NNCleaning::None: {
      NNSeries out = nn;
      out.cleaned_by = NNCleaning::None;
      return out;
    }
    case NNCleaning::Rules:
      for (std::size_t i = 0; i < n; ++i)
        keep[i] = nn.intervals[i] >= params.rules_low_s && nn.intervals[i] <= params.rules_high_s;
      break;
    case NNCleaning::Automatic: {
      // Reference: mean of the last accepted interval and the next one.
      std::optional<double> last_kept;
      for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        int count = 0;
        if (last_kept) sum += *last_kept, ++count;
        if (i + 1 < n) sum += nn.intervals[i + 1], ++count;
        if (count == 0) break;
        const double local = sum / count;
        keep[i] = std::abs(nn.intervals[i] - local) <= params.automatic_cutoff * local;
        if (keep[i]) last_kept = nn.intervals[i];
      }
      break;
    }
    case NNCleaning::Median: {
      if (params.median_window == 0) throw std::invalid_argument("median window must be positive");
      const std::size_t half = params.median_window / 2;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(n, i + half + 1);
        const double med = median(std::span<const double>(nn.intervals).subspan(lo, hi - lo));
        keep[i] = std::abs(nn.intervals[i] - med) <= params.median_tolerance_s;
      }
      break;
    }
  }
  return detail::keep_where(nn, keep, method);
}

/// Keeps the intervals whose opening beat falls within the first `window_s`
/// seconds. A non-positive window keeps everything.
inline NNSeries truncate_nn(const NNSeries& nn, double window_s) {
  if (window_s <= 0.0) return nn;
  NNSeries out;
  out.cleaned_by = nn.cleaned_by;
  for (std::size_t i = 0; i < nn.size(); ++i) {
    if (nn.onsets[i] >= window_s) break;
    out.onsets.push_back(nn.onsets[i]);
    out.intervals.push_back(nn.intervals[i]);
  }
  return out;
}

}  // namespace ctxsense
