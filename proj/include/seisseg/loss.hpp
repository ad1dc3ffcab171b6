#pragma once

#include <cstddef>
#include <vector>

#include "seisseg/labels.hpp"
#include "seisseg/tensor.hpp"

namespace seisseg {

/// How per-pixel cross-entropy terms over the labeled set are combined.
/// `mean` divides by the number of labeled pixels; `sum` is the plain sum.
enum class Reduction { mean, sum };

struct LossResult {
  double value = 0.0;
  std::size_t n_labeled = 0;
  /// Set when no pixel was labeled; value and gradient are then zero.
  bool empty_labels = false;
  /// d(value)/d(logits), same shape as the logits.
  Tensor gradient;
};

/// Log-probabilities of every class at pixel (row, column) of logits
/// (n_class, n_z, n_x), evaluated with the max-subtraction trick.
std::vector<double> log_softmax(const Tensor& logits, std::size_t row, std::size_t column);

/// Cross-entropy restricted to the labeled pixels. The gradient is
/// (softmax - onehot) at labeled pixels (divided by their count for
/// Reduction::mean) and exactly zero everywhere else.
LossResult partial_cross_entropy(const Tensor& logits, const PartialLabels& labels,
                                 Reduction reduction = Reduction::mean);

/// Cross-entropy over every pixel of a fully labeled image.
LossResult full_cross_entropy(const Tensor& logits, const LabelImage& full,
                              Reduction reduction = Reduction::mean);

}  // namespace seisseg
