#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "ctxsense/error.hpp"
#include "ctxsense/numeric.hpp"

namespace ctxsense::dsp {

struct Periodogram {
  std::vector<double> freqs;  // Hz, evenly spaced
  std::vector<double> power;

  double step() const { return freqs.size() > 1 ? freqs[1] - freqs[0] : 0.0; }

  std::size_t argmax() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < power.size(); ++i)
      if (power[i] > power[best]) best = i;
    return best;
  }
};

struct SpectrumGrid {
  double fmin = 0.01;
  double fmax = 0.5;
  std::size_t n_freqs = 491;
};

/// Classical Lomb-Scargle periodogram with the time offset tau that makes
/// the sine and cosine terms orthogonal. Values are mean-centred; power is
/// not divided by the variance, so it scales with amplitude squared.
inline Periodogram lomb_scargle_psd(std::span<const double> times, std::span<const double> values, double fmin,
                                    double fmax, std::size_t n_freqs) {
  if (times.size() != values.size()) throw std::invalid_argument("times and values differ in length");
  if (times.size() < 4) throw InsufficientDataError("Lomb-Scargle needs at least 4 samples");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("times must be strictly increasing");
  if (n_freqs < 2 || !(fmin > 0.0) || !(fmax > fmin)) throw std::invalid_argument("invalid frequency grid");

  const std::size_t n = times.size();
  const double m = mean(values);
  std::vector<double> y(n);
  bool constant = true;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = values[i] - m;
    if (values[i] != values[0]) constant = false;
  }

  Periodogram pg;
  pg.freqs = linspace(fmin, fmax, n_freqs);
  pg.power.assign(n_freqs, 0.0);
  if (constant) return pg;

  // Per-frequency sums of y*cos(wt), y*sin(wt), cos(2wt), sin(2wt), built with
  // phase rotation along the even grid. The time origin is shifted to the
  // first sample; the periodogram does not depend on it.
  std::vector<double> yc(n_freqs, 0.0), ys(n_freqs, 0.0), c2(n_freqs, 0.0), s2(n_freqs, 0.0);
  const double df = pg.freqs[1] - pg.freqs[0];
  for (std::size_t i = 0; i < n; ++i) {
    const double t = times[i] - times[0];
    const double step_c = std::cos(2.0 * std::numbers::pi * df * t);
    const double step_s = std::sin(2.0 * std::numbers::pi * df * t);
    double rc = std::cos(2.0 * std::numbers::pi * fmin * t);
    double rs = std::sin(2.0 * std::numbers::pi * fmin * t);
    for (std::size_t k = 0; k < n_freqs; ++k) {
      yc[k] += y[i] * rc;
      ys[k] += y[i] * rs;
      c2[k] += rc * rc - rs * rs;
      s2[k] += 2.0 * rc * rs;
      const double next_c = rc * step_c - rs * step_s;
      rs = rc * step_s + rs * step_c;
      rc = next_c;
    }
  }
  const double count = static_cast<double>(n);
  for (std::size_t k = 0; k < n_freqs; ++k) {
    const double two_tau = std::atan2(s2[k], c2[k]);  // 2*w*tau
    const double ct = std::cos(0.5 * two_tau), st = std::sin(0.5 * two_tau);
    const double r = std::hypot(c2[k], s2[k]);
    const double cc = 0.5 * (count + r);
    const double ss = 0.5 * (count - r);
    const double a = ct * yc[k] + st * ys[k];
    const double b = ct * ys[k] - st * yc[k];
    double p = 0.0;
    if (cc > 1e-9) p += a * a / cc;
    if (ss > 1e-9) p += b * b / ss;
    pg.power[k] = 0.5 * p;
  }
  return pg;
}

inline Periodogram lomb_scargle_psd(std::span<const double> times, std::span<const double> values,
                                    const SpectrumGrid& grid = {}) {
  return lomb_scargle_psd(times, values, grid.fmin, grid.fmax, grid.n_freqs);
}

/// Trapezoidal power over grid points with lo <= f < hi.
inline double band_power(const Periodogram& pg, double lo, double hi) {
  const double eps = 1e-9;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pg.freqs.size(); ++i) {
    const double f0 = pg.freqs[i], f1 = pg.freqs[i + 1];
    const bool in0 = f0 >= lo - eps && f0 < hi - eps;
    const bool in1 = f1 >= lo - eps && f1 < hi - eps;
    if (in0 && in1) total += 0.5 * (pg.power[i] + pg.power[i + 1]) * (f1 - f0);
  }
  return total;
}

inline double total_power(const Periodogram& pg) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pg.freqs.size(); ++i)
    total += 0.5 * (pg.power[i] + pg.power[i + 1]) * (pg.freqs[i + 1] - pg.freqs[i]);
  return total;
}

}  // namespace ctxsense::dsp
