#include "subaug/metrics.hpp"

#include <algorithm>

namespace subaug {

ConfusionCounts count_decisions(std::span<const Label> predictions, std::span<const Label> truth,
                                const LabelSpec& spec) {
  if (predictions.size() != truth.size()) {
    throw ValidationError("micro_f1: prediction/truth length mismatch");
  }
  ConfusionCounts counts;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const Label& pred = predictions[i];
    const Label& gold = truth[i];
    if (spec.task_kind == TaskKind::multiclass) {
      if (pred.size() != 1 || gold.size() != 1) {
        throw ValidationError("micro_f1: multiclass labels must have exactly one class");
      }
      if (pred[0] == gold[0]) {
        ++counts.tp;
      } else {
        ++counts.fp;
        ++counts.fn;
      }
    } else {
      // Both sets are sorted ascending.
      for (int c : pred) {
        if (std::binary_search(gold.begin(), gold.end(), c)) {
          ++counts.tp;
        } else {
          ++counts.fp;
        }
      }
      for (int c : gold) {
        if (!std::binary_search(pred.begin(), pred.end(), c)) ++counts.fn;
      }
    }
  }
  return counts;
}

double micro_f1(const ConfusionCounts& counts) {
  const long long denom = 2 * counts.tp + counts.fp + counts.fn;
  if (denom == 0) return 1.0;
  return static_cast<double>(2 * counts.tp) / static_cast<double>(denom);
}

double micro_f1(std::span<const Label> predictions, std::span<const Label> truth,
                const LabelSpec& spec) {
  return micro_f1(count_decisions(predictions, truth, spec));
}

}  // namespace subaug
