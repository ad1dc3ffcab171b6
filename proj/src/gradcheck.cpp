#include "seisseg/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "seisseg/error.hpp"

namespace seisseg {

GradCheckResult finite_diff_check(const DifferentiableFn& f, std::span<const double> point,
                                  double step, std::span<const std::size_t> coordinates) {
  if (!(step > 0.0)) throw ContractError("finite_diff_check: step must be positive");

  std::vector<double> analytic;
  f(point, &analytic);
  if (analytic.size() != point.size()) {
    throw ContractError("finite_diff_check: gradient has " + std::to_string(analytic.size()) +
                        " entries for " + std::to_string(point.size()) + " coordinates");
  }

  std::vector<std::size_t> all;
  if (coordinates.empty()) {
    all.resize(point.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    coordinates = all;
  }

  std::vector<double> x(point.begin(), point.end());
  GradCheckResult result;
  for (std::size_t i : coordinates) {
    if (i >= x.size()) throw ContractError("finite_diff_check: coordinate out of range");
    const double x0 = x[i];
    x[i] = x0 + step;
    const double f_plus = f(x, nullptr);
    x[i] = x0 - step;
    const double f_minus = f(x, nullptr);
    x[i] = x0;
    const double numeric = (f_plus - f_minus) / (2.0 * step);
    const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
    if (err > result.max_rel_error || result.checked == 0) {
      result.max_rel_error = err;
      result.worst_coordinate = i;
    }
    ++result.checked;
  }
  return result;
}

}  // namespace seisseg
