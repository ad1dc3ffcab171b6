#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace seisseg {

namespace detail {
// Leaves doubles uninitialized on resize; used for buffers that are fully
// overwritten right after allocation.
template <typename T>
struct DefaultInitAllocator : std::allocator<T> {
  template <typename U>
  struct rebind {
    using other = DefaultInitAllocator<U>;
  };
  using std::allocator<T>::allocator;
  template <typename U, typename... Args>
  void construct(U* p, Args&&... args) {
    if constexpr (sizeof...(Args) == 0) {
      ::new (static_cast<void*>(p)) U;
    } else {
      ::new (static_cast<void*>(p)) U(std::forward<Args>(args)...);
    }
  }
};
}  // namespace detail

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

/// Dense row-major array of doubles. Activations are rank 3 (channels,
/// height, width); kernels are rank 4 (c_out, c_in, k, k); biases and
/// normalization parameters are rank 1.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, const std::vector<double>& values);

  /// Tensor whose values are left uninitialized.
  static Tensor uninitialized(Shape shape);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  // Rank-3 accessors.
  std::size_t channels() const { return shape_.at(0); }
  std::size_t height() const { return shape_.at(1); }
  std::size_t width() const { return shape_.at(2); }
  std::size_t plane() const { return shape_.at(1) * shape_.at(2); }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  double& at(std::size_t c, std::size_t y, std::size_t x) {
    return data_[(c * shape_[1] + y) * shape_[2] + x];
  }
  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return data_[(c * shape_[1] + y) * shape_[2] + x];
  }

  std::span<double> channel(std::size_t c) { return {data_.data() + c * plane(), plane()}; }
  std::span<const double> channel(std::size_t c) const {
    return {data_.data() + c * plane(), plane()};
  }

  void fill(double v);
  bool all_finite() const noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double, detail::DefaultInitAllocator<double>> data_;
};

double dot(const Tensor& a, const Tensor& b);
double sum(const Tensor& t);

/// a += alpha * b, shapes must agree.
void axpy(double alpha, const Tensor& b, Tensor& a);

}  // namespace seisseg
