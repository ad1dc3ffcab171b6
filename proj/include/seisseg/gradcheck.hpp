#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace seisseg {

/// Scalar objective that also reports its analytic gradient when `grad` is
/// non-null (resized by the callee to the length of `x`).
using DifferentiableFn = std::function<double(std::span<const double> x, std::vector<double>* grad)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_coordinate = 0;
  std::size_t checked = 0;
};

/// Compares the analytic gradient at `point` with central differences
///   (f(x + h e_i) - f(x - h e_i)) / 2h
/// on the given coordinates (all coordinates when `coordinates` is empty).
/// The error per coordinate is |analytic - numeric| / max(1, |analytic|).
GradCheckResult finite_diff_check(const DifferentiableFn& f, std::span<const double> point,
                                  double step, std::span<const std::size_t> coordinates = {});

}  // namespace seisseg
