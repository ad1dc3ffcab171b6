#include "seisseg/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include <Eigen/Core>

#include "seisseg/error.hpp"

namespace seisseg::ops {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

void require_rank(const Tensor& t, std::size_t rank, const char* op, const char* what) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": " + what + " must have rank " + std::to_string(rank) +
                     ", got shape " + to_string(t.shape()));
  }
}

// Scratch column buffer, reused across calls on the same thread.
RowMat& scratch_columns() {
  thread_local RowMat buffer;
  return buffer;
}

// Output rows per im2col block, sized so a block stays cache resident.
std::size_t rows_per_block(std::size_t patch, std::size_t width, std::size_t height) {
  constexpr std::size_t kBlockDoubles = 48 * 1024;
  return std::clamp<std::size_t>(kBlockDoubles / std::max<std::size_t>(1, patch * width), 1, height);
}

// Unfolds every k x k zero-padded neighbourhood of output rows [y_begin,
// y_end) into one column of `col`: row (c*k + ky)*k + kx holds
// input(c, y + ky - k/2, x + kx - k/2).
void im2col(const Tensor& x, std::size_t k, std::ptrdiff_t y_begin, std::ptrdiff_t y_end,
            RowMat& col) {
  const auto channels = x.channels();
  const auto h = static_cast<std::ptrdiff_t>(x.height());
  const auto w = static_cast<std::ptrdiff_t>(x.width());
  const auto pad = static_cast<std::ptrdiff_t>(k / 2);
  col.resize(static_cast<Eigen::Index>(channels * k * k), (y_end - y_begin) * w);
  for (std::size_t c = 0; c < channels; ++c) {
    const double* src_plane = x.data() + c * x.plane();
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        double* row = col.row(static_cast<Eigen::Index>((c * k + ky) * k + kx)).data();
        const auto dy = static_cast<std::ptrdiff_t>(ky) - pad;
        const auto dx = static_cast<std::ptrdiff_t>(kx) - pad;
        const auto x0 = std::max<std::ptrdiff_t>(0, -dx);
        const auto x1 = std::min<std::ptrdiff_t>(w, w - dx);
        for (std::ptrdiff_t y = y_begin; y < y_end; ++y) {
          double* dst = row + (y - y_begin) * w;
          const auto sy = y + dy;
          if (sy < 0 || sy >= h || x1 <= x0) {
            std::fill(dst, dst + w, 0.0);
            continue;
          }
          const double* src = src_plane + sy * w + dx;
          std::fill(dst, dst + x0, 0.0);
          std::memcpy(dst + x0, src + x0, static_cast<std::size_t>(x1 - x0) * sizeof(double));
          std::fill(dst + x1, dst + w, 0.0);
        }
      }
    }
  }
}

// Adjoint of im2col: scatters column rows back onto the padded neighbourhoods.
void col2im_add(const RowMat& col, std::size_t k, std::ptrdiff_t y_begin, std::ptrdiff_t y_end,
                Tensor& grad) {
  const auto channels = grad.channels();
  const auto h = static_cast<std::ptrdiff_t>(grad.height());
  const auto w = static_cast<std::ptrdiff_t>(grad.width());
  const auto pad = static_cast<std::ptrdiff_t>(k / 2);
  for (std::size_t c = 0; c < channels; ++c) {
    double* dst_plane = grad.data() + c * grad.plane();
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        const double* row = col.row(static_cast<Eigen::Index>((c * k + ky) * k + kx)).data();
        const auto dy = static_cast<std::ptrdiff_t>(ky) - pad;
        const auto dx = static_cast<std::ptrdiff_t>(kx) - pad;
        const auto x0 = std::max<std::ptrdiff_t>(0, -dx);
        const auto x1 = std::min<std::ptrdiff_t>(w, w - dx);
        for (std::ptrdiff_t y = y_begin; y < y_end; ++y) {
          const auto sy = y + dy;
          if (sy < 0 || sy >= h) continue;
          const double* src = row + (y - y_begin) * w;
          double* dst = dst_plane + sy * w + dx;
          for (std::ptrdiff_t xi = x0; xi < x1; ++xi) dst[xi] += src[xi];
        }
      }
    }
  }
}

void check_conv_shapes(const Tensor& input, const Tensor& kernels, const Tensor& bias) {
  require_rank(input, 3, "conv2d", "input");
  require_rank(kernels, 4, "conv2d", "kernels");
  require_rank(bias, 1, "conv2d", "bias");
  if (kernels.dim(1) != input.channels()) {
    throw ShapeError("conv2d: input shape " + to_string(input.shape()) +
                     " has channel count incompatible with kernels " +
                     to_string(kernels.shape()));
  }
  if (kernels.dim(2) != kernels.dim(3) || kernels.dim(2) % 2 == 0) {
    throw ShapeError("conv2d: kernels must be square with odd size, got " +
                     to_string(kernels.shape()));
  }
  if (bias.dim(0) != kernels.dim(0)) {
    throw ShapeError("conv2d: bias " + to_string(bias.shape()) + " does not match kernels " +
                     to_string(kernels.shape()));
  }
  if (input.height() == 0 || input.width() == 0) {
    throw ShapeError("conv2d: empty spatial dimensions " + to_string(input.shape()));
  }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernels, const Tensor& bias) {
  check_conv_shapes(input, kernels, bias);
  const auto c_out = static_cast<Eigen::Index>(kernels.dim(0));
  const auto k = kernels.dim(2);
  const auto patch = static_cast<Eigen::Index>(kernels.dim(1) * k * k);
  const auto n = static_cast<Eigen::Index>(input.plane());

  auto out = Tensor::uninitialized({kernels.dim(0), input.height(), input.width()});
  MatMap y(out.data(), c_out, n);
  const ConstMatMap kmat(kernels.data(), c_out, patch);
  if (k == 1) {
    y.noalias() = kmat * ConstMatMap(input.data(), patch, n);
  } else {
    RowMat& col = scratch_columns();
    const auto w = input.width();
    const auto step = rows_per_block(static_cast<std::size_t>(patch), w, input.height());
    for (std::size_t y0 = 0; y0 < input.height(); y0 += step) {
      const auto y1 = std::min(input.height(), y0 + step);
      im2col(input, k, static_cast<std::ptrdiff_t>(y0), static_cast<std::ptrdiff_t>(y1), col);
      y.middleCols(static_cast<Eigen::Index>(y0 * w), static_cast<Eigen::Index>((y1 - y0) * w))
          .noalias() = kmat * col;
    }
  }
  for (Eigen::Index o = 0; o < c_out; ++o) y.row(o).array() += bias[static_cast<std::size_t>(o)];
  return out;
}

void conv2d_backward(const Tensor& input, const Tensor& kernels, const Tensor& grad_out,
                     Tensor* grad_input, Tensor* grad_kernels, Tensor* grad_bias) {
  const auto c_out = static_cast<Eigen::Index>(kernels.dim(0));
  const auto k = kernels.dim(2);
  const auto patch = static_cast<Eigen::Index>(kernels.dim(1) * k * k);
  const auto n = static_cast<Eigen::Index>(input.plane());
  const ConstMatMap dy(grad_out.data(), c_out, n);
  const ConstMatMap kmat(kernels.data(), c_out, patch);

  if (grad_bias) {
    // plain loop: Eigen's vectorized sum reassociates depending on the
    // buffer's alignment, which would make training depend on malloc
    for (Eigen::Index o = 0; o < c_out; ++o) {
      const double* row = grad_out.data() + o * n;
      double s = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) s += row[i];
      (*grad_bias)[static_cast<std::size_t>(o)] += s;
    }
  }
  if (k == 1) {
    const ConstMatMap x(input.data(), patch, n);
    if (grad_kernels) MatMap(grad_kernels->data(), c_out, patch).noalias() += dy * x.transpose();
    if (grad_input) MatMap(grad_input->data(), patch, n).noalias() += kmat.transpose() * dy;
    return;
  }
  RowMat& col = scratch_columns();
  const auto w = input.width();
  const auto step = rows_per_block(static_cast<std::size_t>(patch), w, input.height());
  for (std::size_t y0 = 0; y0 < input.height(); y0 += step) {
    const auto y1 = std::min(input.height(), y0 + step);
    const auto block = dy.middleCols(static_cast<Eigen::Index>(y0 * w),
                                     static_cast<Eigen::Index>((y1 - y0) * w));
    if (grad_kernels) {
      im2col(input, k, static_cast<std::ptrdiff_t>(y0), static_cast<std::ptrdiff_t>(y1), col);
      MatMap(grad_kernels->data(), c_out, patch).noalias() += block * col.transpose();
    }
    if (grad_input) {
      col.resize(patch, block.cols());
      col.noalias() = kmat.transpose() * block;
      col2im_add(col, k, static_cast<std::ptrdiff_t>(y0), static_cast<std::ptrdiff_t>(y1),
                 *grad_input);
    }
  }
}

Tensor relu(const Tensor& input) {
  auto out = Tensor::uninitialized(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) out[i] = input[i] > 0.0 ? input[i] : 0.0;
  return out;
}

void relu_backward(const Tensor& input, const Tensor& grad_out, Tensor& grad_input) {
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (input[i] > 0.0) grad_input[i] += grad_out[i];
  }
}

Tensor downsample2(const Tensor& input) {
  require_rank(input, 3, "downsample2", "input");
  if (input.height() % 2 != 0) {
    throw ShapeError("downsample2: height " + std::to_string(input.height()) + " is odd");
  }
  if (input.width() % 2 != 0) {
    throw ShapeError("downsample2: width " + std::to_string(input.width()) + " is odd");
  }
  const auto h = input.height() / 2;
  const auto w = input.width() / 2;
  auto out = Tensor::uninitialized({input.channels(), h, w});
  for (std::size_t c = 0; c < input.channels(); ++c) {
    for (std::size_t y = 0; y < h; ++y) {
      const double* r0 = input.data() + (c * input.height() + 2 * y) * input.width();
      const double* r1 = r0 + input.width();
      double* dst = out.data() + (c * h + y) * w;
      for (std::size_t x = 0; x < w; ++x) {
        dst[x] = 0.25 * ((r0[2 * x] + r0[2 * x + 1]) + (r1[2 * x] + r1[2 * x + 1]));
      }
    }
  }
  return out;
}

void downsample2_backward(const Tensor& grad_out, Tensor& grad_input) {
  const auto h = grad_out.height();
  const auto w = grad_out.width();
  for (std::size_t c = 0; c < grad_out.channels(); ++c) {
    for (std::size_t y = 0; y < h; ++y) {
      const double* g = grad_out.data() + (c * h + y) * w;
      double* r0 = grad_input.data() + (c * grad_input.height() + 2 * y) * grad_input.width();
      double* r1 = r0 + grad_input.width();
      for (std::size_t x = 0; x < w; ++x) {
        const double q = 0.25 * g[x];
        r0[2 * x] += q;
        r0[2 * x + 1] += q;
        r1[2 * x] += q;
        r1[2 * x + 1] += q;
      }
    }
  }
}

Tensor upsample2(const Tensor& input) {
  require_rank(input, 3, "upsample2", "input");
  const auto h = input.height();
  const auto w = input.width();
  auto out = Tensor::uninitialized({input.channels(), 2 * h, 2 * w});
  for (std::size_t c = 0; c < input.channels(); ++c) {
    for (std::size_t y = 0; y < h; ++y) {
      const double* src = input.data() + (c * h + y) * w;
      double* r0 = out.data() + (c * 2 * h + 2 * y) * 2 * w;
      double* r1 = r0 + 2 * w;
      for (std::size_t x = 0; x < w; ++x) {
        r0[2 * x] = r0[2 * x + 1] = src[x];
        r1[2 * x] = r1[2 * x + 1] = src[x];
      }
    }
  }
  return out;
}

void upsample2_backward(const Tensor& grad_out, Tensor& grad_input) {
  const auto h = grad_input.height();
  const auto w = grad_input.width();
  for (std::size_t c = 0; c < grad_input.channels(); ++c) {
    for (std::size_t y = 0; y < h; ++y) {
      const double* r0 = grad_out.data() + (c * 2 * h + 2 * y) * 2 * w;
      const double* r1 = r0 + 2 * w;
      double* dst = grad_input.data() + (c * h + y) * w;
      for (std::size_t x = 0; x < w; ++x) {
        dst[x] += (r0[2 * x] + r0[2 * x + 1]) + (r1[2 * x] + r1[2 * x + 1]);
      }
    }
  }
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  require_rank(a, 3, "concat_channels", "first input");
  require_rank(b, 3, "concat_channels", "second input");
  if (a.height() != b.height() || a.width() != b.width()) {
    throw ShapeError("concat_channels: spatial mismatch between " + to_string(a.shape()) +
                     " and " + to_string(b.shape()));
  }
  auto out = Tensor::uninitialized({a.channels() + b.channels(), a.height(), a.width()});
  std::copy(a.values().begin(), a.values().end(), out.data());
  std::copy(b.values().begin(), b.values().end(), out.data() + a.size());
  return out;
}

void concat_channels_backward(const Tensor& grad_out, Tensor* grad_a, Tensor* grad_b) {
  std::size_t offset = 0;
  if (grad_a) {
    for (std::size_t i = 0; i < grad_a->size(); ++i) (*grad_a)[i] += grad_out[i];
    offset = grad_a->size();
  } else if (grad_b) {
    offset = grad_out.size() - grad_b->size();
  }
  if (grad_b) {
    for (std::size_t i = 0; i < grad_b->size(); ++i) (*grad_b)[i] += grad_out[offset + i];
  }
}

Tensor channel_norm(const Tensor& input, const Tensor& scale, const Tensor& shift, double epsilon,
                    NormStats* stats) {
  require_rank(input, 3, "channel_norm", "input");
  if (scale.size() != input.channels() || shift.size() != input.channels()) {
    throw ShapeError("channel_norm: scale " + to_string(scale.shape()) + " / shift " +
                     to_string(shift.shape()) + " do not match input " +
                     to_string(input.shape()));
  }
  if (!(epsilon > 0.0)) throw ContractError("channel_norm: epsilon must be positive");

  const auto n = input.plane();
  auto out = Tensor::uninitialized(input.shape());
  if (stats) {
    stats->mean.assign(input.channels(), 0.0);
    stats->inv_std.assign(input.channels(), 0.0);
  }
  for (std::size_t c = 0; c < input.channels(); ++c) {
    const auto x = input.channel(c);
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    const double inv_std = 1.0 / std::sqrt(var + epsilon);
    const double a = scale[c] * inv_std;
    const double b = shift[c];
    auto y = out.channel(c);
    for (std::size_t i = 0; i < n; ++i) y[i] = a * (x[i] - mean) + b;
    if (stats) {
      stats->mean[c] = mean;
      stats->inv_std[c] = inv_std;
    }
  }
  return out;
}

void channel_norm_backward(const Tensor& input, const Tensor& scale, const NormStats& stats,
                           const Tensor& grad_out, Tensor* grad_input, Tensor* grad_scale,
                           Tensor* grad_shift) {
  const auto n = input.plane();
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t c = 0; c < input.channels(); ++c) {
    const auto x = input.channel(c);
    const auto g = grad_out.channel(c);
    const double mean = stats.mean[c];
    const double inv_std = stats.inv_std[c];
    double sum_g = 0.0;
    double sum_g_xhat = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum_g += g[i];
      sum_g_xhat += g[i] * (x[i] - mean) * inv_std;
    }
    if (grad_scale) (*grad_scale)[c] += sum_g_xhat;
    if (grad_shift) (*grad_shift)[c] += sum_g;
    if (grad_input) {
      auto dx = grad_input->channel(c);
      const double a = scale[c] * inv_std;
      const double mean_g = sum_g * inv_n;
      const double mean_g_xhat = sum_g_xhat * inv_n;
      for (std::size_t i = 0; i < n; ++i) {
        const double xhat = (x[i] - mean) * inv_std;
        dx[i] += a * (g[i] - mean_g - xhat * mean_g_xhat);
      }
    }
  }
}

}  // namespace seisseg::ops
