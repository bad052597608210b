#pragma once

// Brute-force reference implementations used to check the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace oracle {

/// Two-sided signed-rank p-value by enumerating every sign assignment of the
/// ranked non-zero differences: P(|W+ - mu| >= |w - mu|).
inline double wilcoxon_p(std::span<const double> diffs) {
  std::vector<double> mags;
  std::vector<bool> positive;
  for (double d : diffs)
    if (d != 0.0) mags.push_back(std::abs(d)), positive.push_back(d > 0);
  const std::size_t n = mags.size();
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n; ++i) {
    double below = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (mags[j] < mags[i]) ++below;
      if (mags[j] == mags[i]) ++equal;
    }
    ranks[i] = below + (equal + 1) / 2;
  }
  double w = 0, total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total += ranks[i];
    if (positive[i]) w += ranks[i];
  }
  const double mu = total / 2, observed = std::abs(w - mu);
  std::uint64_t hits = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) s += ranks[i];
    if (std::abs(s - mu) >= observed - 1e-9) ++hits;
  }
  return static_cast<double>(hits) / std::ldexp(1.0, static_cast<int>(n));
}

/// H_i is rejected iff some threshold p_(j) <= j * alpha / m has p_i <= p_(j).
inline std::vector<bool> bh_reject(std::span<const double> p, double alpha) {
  const std::size_t m = p.size();
  std::vector<double> sorted(p.begin(), p.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<bool> out(m, false);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      if (sorted[j - 1] <= static_cast<double>(j) * alpha / static_cast<double>(m) && p[i] <= sorted[j - 1]) {
        out[i] = true;
        break;
      }
  return out;
}

}  // namespace oracle
