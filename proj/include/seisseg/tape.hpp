#pragma once

#include <cstddef>
#include <vector>

#include "seisseg/ops.hpp"
#include "seisseg/tensor.hpp"

namespace seisseg {

/// Handle to a node recorded on a Tape.
struct NodeId {
  std::size_t index = 0;
  friend bool operator==(NodeId, NodeId) = default;
};

enum class Op {
  input,
  parameter,
  conv2d,
  relu,
  downsample2,
  upsample2,
  concat_channels,
  channel_norm,
  sum,
  weighted_sum,
  external_loss,
};

/// Reverse-mode differentiation tape.
///
/// Nodes are appended in evaluation order, so walking the tape backwards
/// visits every node after all of its consumers. Every forward value is
/// cached. Gradients are only propagated into nodes that depend on at least
/// one parameter.
class Tape {
 public:
  NodeId input(Tensor value);
  NodeId parameter(Tensor value);

  NodeId conv2d(NodeId input, NodeId kernels, NodeId bias);
  NodeId relu(NodeId input);
  NodeId downsample2(NodeId input);
  NodeId upsample2(NodeId input);
  NodeId concat_channels(NodeId a, NodeId b);
  NodeId channel_norm(NodeId input, NodeId scale, NodeId shift, double epsilon);

  /// Scalar sum of all entries.
  NodeId sum(NodeId input);
  /// Scalar <input, weights>.
  NodeId weighted_sum(NodeId input, Tensor weights);
  /// Scalar node whose value and derivative with respect to `input` were
  /// computed outside the tape (e.g. a loss with an analytic gradient).
  NodeId external_loss(NodeId input, double value, Tensor gradient);

  const Tensor& value(NodeId id) const;
  /// Gradient of the last backward root with respect to `id`; zeros when the
  /// root does not depend on it.
  const Tensor& grad(NodeId id) const;
  Op op(NodeId id) const;

  /// Parameter nodes in registration order.
  const std::vector<NodeId>& parameters() const noexcept { return parameters_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Propagates d(root)/d(node) through the tape. The root must hold a
  /// single value. Returns the gradients of all parameters in registration
  /// order.
  std::vector<Tensor> backward(NodeId root);

 private:
  struct Node {
    Op op;
    std::vector<NodeId> inputs;
    Tensor value{};
    Tensor grad{};
    bool needs_grad = false;
    double epsilon = 0.0;
    Tensor aux{};
    ops::NormStats stats{};
  };

  NodeId push(Node node);
  const Node& node(NodeId id) const;
  Tensor* grad_target(NodeId id);

  std::vector<Node> nodes_;
  std::vector<NodeId> parameters_;
};

}  // namespace seisseg
