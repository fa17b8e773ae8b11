#include "actionslot/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace actionslot {

namespace {

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

double average_precision(const std::vector<double>& scores,
                         const std::vector<uint8_t>& labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("score/label length mismatch");
  }
  int positives = 0;
  for (uint8_t l : labels) positives += l ? 1 : 0;
  if (positives == 0) {
    throw std::invalid_argument("average precision needs at least one positive");
  }
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  double sum = 0;
  int hits = 0;
  for (size_t rank = 0; rank < order.size(); ++rank) {
    if (labels[order[rank]]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  return sum / positives;
}

EvalReport mean_average_precision(const std::vector<double>& scores,
                                  const std::vector<uint8_t>& labels,
                                  int samples, const ClassCatalog& catalog) {
  const int k = catalog.size();
  if (scores.size() != static_cast<size_t>(samples) * k ||
      labels.size() != scores.size()) {
    throw std::invalid_argument("score/label matrix shape mismatch");
  }
  EvalReport report;
  report.class_names = catalog.names();
  report.per_class_ap.assign(k, 0.0);
  report.has_positives.assign(k, 0);

  std::vector<double> col_scores(samples);
  std::vector<uint8_t> col_labels(samples);
  double sum = 0;
  int counted = 0;
  for (int c = 0; c < k; ++c) {
    int positives = 0;
    for (int s = 0; s < samples; ++s) {
      col_scores[s] = scores[static_cast<size_t>(s) * k + c];
      col_labels[s] = labels[static_cast<size_t>(s) * k + c];
      positives += col_labels[s] ? 1 : 0;
    }
    if (positives == 0) continue;
    report.has_positives[c] = 1;
    report.per_class_ap[c] = average_precision(col_scores, col_labels);
    sum += report.per_class_ap[c];
    ++counted;
  }
  report.map = counted ? sum / counted : 0.0;

  for (AgentSlice slice : {AgentSlice::kC, AgentSlice::kK, AgentSlice::kP,
                           AgentSlice::kCPlus, AgentSlice::kKPlus,
                           AgentSlice::kPPlus}) {
    double s = 0;
    int n = 0;
    for (int c : catalog.slice_indices(slice)) {
      if (!report.has_positives[c]) continue;
      s += report.per_class_ap[c];
      ++n;
    }
    if (n > 0) report.slice_map[slice_name(slice)] = s / n;
  }
  return report;
}

std::string EvalReport::to_text() const {
  std::ostringstream out;
  out << "map " << format_double(map) << "\n";
  if (ego_accuracy >= 0) {
    out << "ego_accuracy " << format_double(ego_accuracy) << "\n";
  }
  for (const auto& [name, value] : slice_map) {
    out << "slice " << name << " " << format_double(value) << "\n";
  }
  for (size_t c = 0; c < class_names.size(); ++c) {
    if (has_positives[c]) {
      out << "class " << class_names[c] << " " << format_double(per_class_ap[c])
          << "\n";
    } else {
      out << "class " << class_names[c] << " excluded_no_positives\n";
    }
  }
  if (!confusion_path.empty()) {
    out << "confusion " << confusion_path << "\n";
  }
  return out.str();
}

}  // namespace actionslot
