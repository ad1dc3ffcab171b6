#include "seisseg/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "seisseg/error.hpp"

namespace seisseg {
namespace {

void check_logits(const Tensor& logits) {
  if (logits.rank() != 3 || logits.channels() == 0) {
    throw ShapeError("logits must have shape (n_class, n_z, n_x), got " +
                     to_string(logits.shape()));
  }
}

// Adds the loss term of one pixel and writes softmax - onehot (times
// `weight`) into the gradient. Returns -log p[target].
double pixel_term(const Tensor& logits, std::size_t pixel, ClassId target, double weight,
                  Tensor& grad, std::vector<double>& scratch) {
  const auto n_class = logits.channels();
  const auto plane = logits.plane();
  double max_logit = logits[pixel];
  for (std::size_t c = 1; c < n_class; ++c) max_logit = std::max(max_logit, logits[c * plane + pixel]);
  double denom = 0.0;
  for (std::size_t c = 0; c < n_class; ++c) {
    scratch[c] = std::exp(logits[c * plane + pixel] - max_logit);
    denom += scratch[c];
  }
  const double log_denom = std::log(denom);
  const auto t = static_cast<std::size_t>(target);
  for (std::size_t c = 0; c < n_class; ++c) {
    grad[c * plane + pixel] += weight * (scratch[c] / denom - (c == t ? 1.0 : 0.0));
  }
  return -(logits[t * plane + pixel] - max_logit - log_denom);
}

}  // namespace

std::vector<double> log_softmax(const Tensor& logits, std::size_t row, std::size_t column) {
  check_logits(logits);
  if (row >= logits.height() || column >= logits.width()) {
    throw ContractError("log_softmax: pixel (" + std::to_string(row) + ", " +
                        std::to_string(column) + ") out of bounds");
  }
  const auto n_class = logits.channels();
  std::vector<double> out(n_class);
  double max_logit = logits.at(0, row, column);
  for (std::size_t c = 1; c < n_class; ++c) max_logit = std::max(max_logit, logits.at(c, row, column));
  double denom = 0.0;
  for (std::size_t c = 0; c < n_class; ++c) denom += std::exp(logits.at(c, row, column) - max_logit);
  const double log_denom = std::log(denom);
  for (std::size_t c = 0; c < n_class; ++c) out[c] = logits.at(c, row, column) - max_logit - log_denom;
  return out;
}

LossResult partial_cross_entropy(const Tensor& logits, const PartialLabels& labels,
                                 Reduction reduction) {
  check_logits(logits);
  if (labels.n_z != logits.height() || labels.n_x != logits.width()) {
    throw ShapeError("labels for a " + std::to_string(labels.n_z) + "x" +
                     std::to_string(labels.n_x) + " image do not match logits " +
                     to_string(logits.shape()));
  }
  LossResult r;
  r.gradient = Tensor(logits.shape());
  r.n_labeled = labels.entries.size();
  if (labels.entries.empty()) {
    r.empty_labels = true;
    return r;
  }
  const double weight =
      reduction == Reduction::mean ? 1.0 / static_cast<double>(labels.entries.size()) : 1.0;
  std::vector<double> scratch(logits.channels());
  double total = 0.0;
  for (const auto& e : labels.entries) {
    if (e.row >= labels.n_z || e.column >= labels.n_x) {
      throw ContractError("partial_cross_entropy: label position (" + std::to_string(e.row) +
                          ", " + std::to_string(e.column) + ") out of bounds");
    }
    if (e.class_id < 0 || static_cast<std::size_t>(e.class_id) >= logits.channels()) {
      throw ContractError("partial_cross_entropy: class " + std::to_string(e.class_id) +
                          " at (" + std::to_string(e.row) + ", " + std::to_string(e.column) +
                          ") not below n_class " + std::to_string(logits.channels()));
    }
    total += pixel_term(logits, e.row * labels.n_x + e.column, e.class_id, weight, r.gradient,
                        scratch);
  }
  r.value = total * weight;
  return r;
}

LossResult full_cross_entropy(const Tensor& logits, const LabelImage& full, Reduction reduction) {
  check_logits(logits);
  if (full.n_z != logits.height() || full.n_x != logits.width() ||
      full.classes.size() != logits.plane()) {
    throw ShapeError("label image " + std::to_string(full.n_z) + "x" + std::to_string(full.n_x) +
                     " does not match logits " + to_string(logits.shape()));
  }
  // Direct evaluation of -sum_i sum_j C_ij log softmax(f)_ij with one-hot C.
  const auto n_class = logits.channels();
  const auto plane = logits.plane();
  const double weight = reduction == Reduction::mean ? 1.0 / static_cast<double>(plane) : 1.0;
  LossResult r;
  r.gradient = Tensor(logits.shape());
  r.n_labeled = plane;
  r.empty_labels = plane == 0;
  std::vector<double> p(n_class);
  double total = 0.0;
  for (std::size_t i = 0; i < plane; ++i) {
    const auto target = full.classes[i];
    if (target < 0 || static_cast<std::size_t>(target) >= n_class) {
      throw ContractError("full_cross_entropy: class " + std::to_string(target) + " at pixel " +
                          std::to_string(i) + " not below n_class " + std::to_string(n_class));
    }
    const auto row = log_softmax(logits, i / full.n_x, i % full.n_x);
    for (std::size_t c = 0; c < n_class; ++c) {
      const double onehot = c == static_cast<std::size_t>(target) ? 1.0 : 0.0;
      total -= onehot * row[c];
      r.gradient[c * plane + i] = weight * (std::exp(row[c]) - onehot);
    }
  }
  r.value = total * weight;
  return r;
}

}  // namespace seisseg
