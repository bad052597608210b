#pragma once

// Digital Butterworth design (bilinear transform with prewarping) realized
// as cascaded second-order sections, plus forward-backward application.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "ctxsense/error.hpp"

namespace ctxsense::dsp {

enum class BandType { Lowpass, Bandpass };

struct FilterSpec {
  int order = 1;
  BandType band = BandType::Lowpass;
  double low_hz = 0.0;  // bandpass only
  double high_hz = 0.0;
  double rate = 1.0;

  static FilterSpec lowpass(int order, double high_hz, double rate) {
    return {order, BandType::Lowpass, 0.0, high_hz, rate};
  }
  static FilterSpec bandpass(int order, double low_hz, double high_hz, double rate) {
    return {order, BandType::Bandpass, low_hz, high_hz, rate};
  }
};

enum class FilterMode { ZeroPhase, Causal };

/// y = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0;
  double a1 = 0, a2 = 0;

  double dc_gain() const { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
  bool first_order() const { return b2 == 0.0 && a2 == 0.0; }
};

inline void validate(const FilterSpec& spec) {
  const double nyquist = spec.rate / 2.0;
  if (spec.order < 1) throw SpecError("filter order must be positive");
  if (!(spec.rate > 0.0)) throw SpecError("sample rate must be positive");
  if (spec.band == BandType::Bandpass) {
    if (!(spec.low_hz > 0.0 && spec.low_hz < spec.high_hz && spec.high_hz < nyquist))
      throw SpecError("bandpass requires 0 < low < high < rate/2");
  } else if (!(spec.high_hz > 0.0 && spec.high_hz < nyquist)) {
    throw SpecError("lowpass requires 0 < high < rate/2");
  }
}

inline std::vector<Biquad> design_butterworth(const FilterSpec& spec) {
  using cd = std::complex<double>;
  validate(spec);
  const int n = spec.order;
  const double fs2 = 2.0 * spec.rate;
  auto prewarp = [&](double f) { return fs2 * std::tan(std::numbers::pi * f / spec.rate); };

  // Analog prototype, unit cutoff.
  std::vector<cd> poles;
  for (int k = -n + 1; k < n; k += 2)
    poles.push_back(-std::exp(cd(0.0, std::numbers::pi * k / (2.0 * n))));
  double gain = 1.0;
  std::vector<cd> zeros;

  if (spec.band == BandType::Lowpass) {
    const double wc = prewarp(spec.high_hz);
    for (auto& p : poles) p *= wc;
    gain = std::pow(wc, n);
  } else {
    const double w1 = prewarp(spec.low_hz);
    const double w2 = prewarp(spec.high_hz);
    const double bw = w2 - w1;
    const double w0 = std::sqrt(w1 * w2);
    std::vector<cd> bp;
    for (const auto& p : poles) {
      const cd half = p * (bw / 2.0);
      const cd root = std::sqrt(half * half - w0 * w0);
      bp.push_back(half + root);
      bp.push_back(half - root);
    }
    poles = std::move(bp);
    zeros.assign(n, cd(0.0, 0.0));
    gain = std::pow(bw, n);
  }

  // Bilinear transform; zeros at analog infinity land on z = -1.
  cd num(1.0, 0.0), den(1.0, 0.0);
  for (const auto& z : zeros) num *= (fs2 - z);
  for (const auto& p : poles) den *= (fs2 - p);
  const double digital_gain = gain * (num / den).real();
  std::vector<cd> dpoles;
  for (const auto& p : poles) dpoles.push_back((fs2 + p) / (fs2 - p));

  std::vector<Biquad> sections;
  std::vector<double> real_poles;
  for (const auto& p : dpoles) {
    if (std::abs(p.imag()) <= 1e-12 * std::max(1.0, std::abs(p))) {
      real_poles.push_back(p.real());
    } else if (p.imag() > 0.0) {
      Biquad s;
      s.a1 = -2.0 * p.real();
      s.a2 = std::norm(p);
      sections.push_back(s);
    }
  }
  for (std::size_t i = 0; i + 1 < real_poles.size(); i += 2) {
    Biquad s;
    s.a1 = -(real_poles[i] + real_poles[i + 1]);
    s.a2 = real_poles[i] * real_poles[i + 1];
    sections.push_back(s);
  }
  if (real_poles.size() % 2 == 1) {
    Biquad s;
    s.a1 = -real_poles.back();
    sections.push_back(s);
  }

  // Numerators: bandpass sections get zeros {+1, -1}; lowpass {-1, -1}, or a
  // single -1 for the first-order section.
  for (auto& s : sections) {
    if (spec.band == BandType::Bandpass) {
      s.b0 = 1.0, s.b1 = 0.0, s.b2 = -1.0;
    } else if (s.first_order()) {
      s.b0 = 1.0, s.b1 = 1.0, s.b2 = 0.0;
    } else {
      s.b0 = 1.0, s.b1 = 2.0, s.b2 = 1.0;
    }
  }
  sections.front().b0 *= digital_gain;
  sections.front().b1 *= digital_gain;
  sections.front().b2 *= digital_gain;
  return sections;
}

/// Magnitude of the cascade at frequency f (Hz).
inline double magnitude_response(std::span<const Biquad> sections, double f, double rate) {
  using cd = std::complex<double>;
  const cd zinv = std::exp(cd(0.0, -2.0 * std::numbers::pi * f / rate));
  cd h(1.0, 0.0);
  for (const auto& s : sections)
    h *= (s.b0 + s.b1 * zinv + s.b2 * zinv * zinv) / (1.0 + s.a1 * zinv + s.a2 * zinv * zinv);
  return std::abs(h);
}

/// Steady-state direct-form-II-transposed state for a unit step input.
inline std::vector<std::array<double, 2>> step_initial_state(std::span<const Biquad> sections) {
  std::vector<std::array<double, 2>> zi(sections.size());
  double scale = 1.0;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    const auto& s = sections[i];
    const double g = s.dc_gain();
    const double z2 = s.b2 - s.a2 * g;
    const double z1 = s.b1 + z2 - s.a1 * g;
    zi[i] = {scale * z1, scale * z2};
    scale *= g;
  }
  return zi;
}

/// Filters in place, starting from the given per-section state.
inline void sos_filter(std::span<const Biquad> sections, std::span<double> x,
                       std::vector<std::array<double, 2>> state) {
  for (std::size_t k = 0; k < sections.size(); ++k) {
    const auto& s = sections[k];
    double z1 = state[k][0], z2 = state[k][1];
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in + z2 - s.a1 * out;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
}

namespace detail {

inline std::vector<std::array<double, 2>> scaled(std::vector<std::array<double, 2>> zi, double by) {
  for (auto& z : zi) z[0] *= by, z[1] *= by;
  return zi;
}

}  // namespace detail

/// Forward-backward filtering with odd extension at both ends and
/// steady-state initial conditions.
inline std::vector<double> sos_filtfilt(std::span<const Biquad> sections, std::span<const double> x) {
  std::size_t ntaps = 2 * sections.size() + 1;
  std::size_t first_order = 0;
  for (const auto& s : sections) first_order += s.first_order() ? 1 : 0;
  ntaps -= first_order;
  const std::size_t n = x.size();
  const std::size_t pad = std::min(3 * ntaps, n - 1);

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  const auto zi = step_initial_state(sections);
  sos_filter(sections, ext, detail::scaled(zi, ext.front()));
  std::reverse(ext.begin(), ext.end());
  sos_filter(sections, ext, detail::scaled(zi, ext.front()));
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

/// Butterworth filtering of a whole signal. Zero-phase mode squares the
/// single-pass magnitude response; causal mode runs one forward pass.
inline std::vector<double> butterworth_filter(std::span<const double> signal, const FilterSpec& spec,
                                              FilterMode mode = FilterMode::ZeroPhase) {
  const auto sections = design_butterworth(spec);
  const auto min_len = static_cast<std::size_t>(3 * 2 * spec.order);
  if (signal.size() <= min_len)
    throw FilterError("signal of " + std::to_string(signal.size()) + " samples too short for order " +
                      std::to_string(spec.order) + " forward-backward filtering");
  if (mode == FilterMode::ZeroPhase) return sos_filtfilt(sections, signal);
  std::vector<double> y(signal.begin(), signal.end());
  sos_filter(sections, y, detail::scaled(step_initial_state(sections), y.front()));
  return y;
}

}  // namespace ctxsense::dsp
