#pragma once

#include <span>

#include "subaug/common.hpp"
#include "subaug/graph.hpp"

namespace subaug {

struct ConfusionCounts {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
};

/// Aggregates decisions over all (sample, class) pairs. Multiclass compares
/// the single predicted class against the single true class; multilabel
/// compares class sets.
ConfusionCounts count_decisions(std::span<const Label> predictions, std::span<const Label> truth,
                                const LabelSpec& spec);

/// 2*TP / (2*TP + FP + FN). The no-positive-decisions case (all counts zero,
/// only reachable for multilabel) scores 1.0: nothing was wrong.
double micro_f1(const ConfusionCounts& counts);

double micro_f1(std::span<const Label> predictions, std::span<const Label> truth,
                const LabelSpec& spec);

/// Logits to hard labels: argmax (first maximum) for multiclass, logit > 0 per
/// class for multilabel.
template <typename Real>
Label decide(const Real* logits, int num_classes, const LabelSpec& spec) {
  Label label;
  if (spec.task_kind == TaskKind::multiclass) {
    int best = 0;
    for (int c = 1; c < num_classes; ++c) {
      if (logits[c] > logits[best]) best = c;
    }
    label.push_back(best);
  } else {
    for (int c = 0; c < num_classes; ++c) {
      if (logits[c] > Real(0)) label.push_back(c);
    }
  }
  return label;
}

template <typename Real>
std::vector<Label> decide(const Matrix<Real>& logits, const LabelSpec& spec) {
  std::vector<Label> out;
  out.reserve(logits.rows);
  for (int i = 0; i < logits.rows; ++i) {
    out.push_back(decide(logits.row(i).data(), logits.cols, spec));
  }
  return out;
}

}  // namespace subaug
