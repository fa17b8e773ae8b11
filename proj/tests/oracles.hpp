// Test-only reference implementations, kept independent of the library's
// primary code paths.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace actionslot::oracles {

// Average precision by rank counting, no sorting: the rank of sample i
// under stable descending order is 1 + |{j : s_j > s_i or (s_j == s_i and
// j < i)}|. AP = mean over positives of precision at their rank.
inline double naive_average_precision(const std::vector<double>& scores,
                                      const std::vector<uint8_t>& labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("oracle: size mismatch");
  }
  int positives = 0;
  for (uint8_t l : labels) positives += l ? 1 : 0;
  if (positives == 0) throw std::invalid_argument("oracle: no positives");

  double sum = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    int rank = 1, hits = 0;
    for (size_t j = 0; j < scores.size(); ++j) {
      bool before = scores[j] > scores[i] || (scores[j] == scores[i] && j < i);
      if (j == i) before = false;
      if (before) {
        ++rank;
        if (labels[j]) ++hits;
      }
    }
    sum += static_cast<double>(hits + 1) / rank;
  }
  return sum / positives;
}

// Mean AP over classes with at least one positive; returns the per-class
// values through `per_class` (-1 for excluded classes).
inline double naive_mean_average_precision(const std::vector<double>& scores,
                                           const std::vector<uint8_t>& labels,
                                           int samples, int num_classes,
                                           std::vector<double>* per_class = nullptr) {
  if (per_class) per_class->assign(num_classes, -1.0);
  double sum = 0;
  int counted = 0;
  for (int c = 0; c < num_classes; ++c) {
    std::vector<double> s(samples);
    std::vector<uint8_t> l(samples);
    int pos = 0;
    for (int i = 0; i < samples; ++i) {
      s[i] = scores[static_cast<size_t>(i) * num_classes + c];
      l[i] = labels[static_cast<size_t>(i) * num_classes + c];
      pos += l[i] ? 1 : 0;
    }
    if (!pos) continue;
    double ap = naive_average_precision(s, l);
    if (per_class) (*per_class)[c] = ap;
    sum += ap;
    ++counted;
  }
  return counted ? sum / counted : 0.0;
}

}  // namespace actionslot::oracles
