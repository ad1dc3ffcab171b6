#pragma once

#include <vector>

#include "seisseg/tensor.hpp"

// Forward kernels and their adjoints. Backward functions accumulate into the
// gradient buffers they are handed (`+=`), which must already have the right
// shape; a null pointer skips that gradient.
namespace seisseg::ops {

/// Same-size 2-D convolution (cross-correlation) with zero padding k/2.
/// kernels: (c_out, c_in, k, k) with odd k; bias: (c_out).
Tensor conv2d(const Tensor& input, const Tensor& kernels, const Tensor& bias);
void conv2d_backward(const Tensor& input, const Tensor& kernels, const Tensor& grad_out,
                     Tensor* grad_input, Tensor* grad_kernels, Tensor* grad_bias);

Tensor relu(const Tensor& input);
void relu_backward(const Tensor& input, const Tensor& grad_out, Tensor& grad_input);

/// 2x2 average pooling. Height and width must be even.
Tensor downsample2(const Tensor& input);
void downsample2_backward(const Tensor& grad_out, Tensor& grad_input);

/// Nearest-neighbour 2x replication.
Tensor upsample2(const Tensor& input);
void upsample2_backward(const Tensor& grad_out, Tensor& grad_input);

Tensor concat_channels(const Tensor& a, const Tensor& b);
void concat_channels_backward(const Tensor& grad_out, Tensor* grad_a, Tensor* grad_b);

/// Per-channel statistics saved by the forward pass of channel_norm.
struct NormStats {
  std::vector<double> mean;
  std::vector<double> inv_std;
};

/// Standardizes each channel over its spatial positions (population variance
/// plus epsilon), then applies scale[c] * xhat + shift[c].
Tensor channel_norm(const Tensor& input, const Tensor& scale, const Tensor& shift, double epsilon,
                    NormStats* stats = nullptr);
void channel_norm_backward(const Tensor& input, const Tensor& scale, const NormStats& stats,
                           const Tensor& grad_out, Tensor* grad_input, Tensor* grad_scale,
                           Tensor* grad_shift);

}  // namespace seisseg::ops
