#pragma once

#include <span>
#include <string>
#include <vector>

#include "ctxsense/error.hpp"

namespace ctxsense::learn {

/// Mean per-class recall over classes 0..n_classes-1.
inline double macro_accuracy(std::span<const int> y_true, std::span<const int> y_pred, std::size_t n_classes = 2) {
  if (y_true.size() != y_pred.size()) throw MetricError("y_true and y_pred differ in length");
  std::vector<double> hit(n_classes, 0.0), total(n_classes, 0.0);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] < 0 || static_cast<std::size_t>(y_true[i]) >= n_classes)
      throw MetricError("true label " + std::to_string(y_true[i]) + " out of range");
    const auto c = static_cast<std::size_t>(y_true[i]);
    total[c] += 1.0;
    if (y_pred[i] == y_true[i]) hit[c] += 1.0;
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (total[c] == 0.0) throw MetricError("class " + std::to_string(c) + " has no true examples");
    sum += hit[c] / total[c];
  }
  return sum / static_cast<double>(n_classes);
}

}  // namespace ctxsense::learn
