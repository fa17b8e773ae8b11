#pragma once

#include <map>
#include <string>
#include <vector>

#include "actionslot/labels.hpp"

namespace actionslot {

// Non-interpolated average precision: samples sorted by descending score,
// ties broken by stable original order; AP is the mean of precision at each
// positive rank. Throws std::invalid_argument when there is no positive.
double average_precision(const std::vector<double>& scores,
                         const std::vector<uint8_t>& labels);

struct EvalReport {
  std::vector<std::string> class_names;
  std::vector<double> per_class_ap;    // 0 for excluded classes
  std::vector<uint8_t> has_positives;  // 0 = excluded from the mean
  double map = 0;
  std::map<std::string, double> slice_map;  // keys C, K, P, C+, K+, P+
  double ego_accuracy = -1;                 // -1 when not evaluated
  std::string confusion_path;

  // Deterministic structured text: identical reports serialize to
  // identical bytes.
  std::string to_text() const;
};

// scores/labels: row-major [samples, num_classes]. Classes without a single
// positive are excluded from the mean and flagged. Slice means cover the
// catalog's agent-kind partition.
EvalReport mean_average_precision(const std::vector<double>& scores,
                                  const std::vector<uint8_t>& labels,
                                  int samples, const ClassCatalog& catalog);

}  // namespace actionslot
