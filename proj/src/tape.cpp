#include "seisseg/tape.hpp"

#include <string>

#include "seisseg/error.hpp"

namespace seisseg {

NodeId Tape::push(Node node) {
  for (NodeId in : node.inputs) node.needs_grad = node.needs_grad || nodes_[in.index].needs_grad;
  nodes_.push_back(std::move(node));
  return NodeId{nodes_.size() - 1};
}

const Tape::Node& Tape::node(NodeId id) const {
  if (id.index >= nodes_.size()) {
    throw ContractError("tape: node " + std::to_string(id.index) + " does not exist");
  }
  return nodes_[id.index];
}

NodeId Tape::input(Tensor value) {
  return push(Node{.op = Op::input, .inputs = {}, .value = std::move(value)});
}

NodeId Tape::parameter(Tensor value) {
  const NodeId id =
      push(Node{.op = Op::parameter, .inputs = {}, .value = std::move(value), .needs_grad = true});
  parameters_.push_back(id);
  return id;
}

NodeId Tape::conv2d(NodeId input, NodeId kernels, NodeId bias) {
  Tensor out = ops::conv2d(value(input), value(kernels), value(bias));
  return push(Node{.op = Op::conv2d, .inputs = {input, kernels, bias}, .value = std::move(out)});
}

NodeId Tape::relu(NodeId input) {
  return push(Node{.op = Op::relu, .inputs = {input}, .value = ops::relu(value(input))});
}

NodeId Tape::downsample2(NodeId input) {
  return push(
      Node{.op = Op::downsample2, .inputs = {input}, .value = ops::downsample2(value(input))});
}

NodeId Tape::upsample2(NodeId input) {
  return push(Node{.op = Op::upsample2, .inputs = {input}, .value = ops::upsample2(value(input))});
}

NodeId Tape::concat_channels(NodeId a, NodeId b) {
  return push(Node{.op = Op::concat_channels,
                   .inputs = {a, b},
                   .value = ops::concat_channels(value(a), value(b))});
}

NodeId Tape::channel_norm(NodeId input, NodeId scale, NodeId shift, double epsilon) {
  Node n{.op = Op::channel_norm, .inputs = {input, scale, shift}, .epsilon = epsilon};
  n.value = ops::channel_norm(value(input), value(scale), value(shift), epsilon, &n.stats);
  return push(std::move(n));
}

NodeId Tape::sum(NodeId input) {
  return push(Node{.op = Op::sum, .inputs = {input}, .value = Tensor({1}, seisseg::sum(value(input)))});
}

NodeId Tape::weighted_sum(NodeId input, Tensor weights) {
  const double v = dot(value(input), weights);
  return push(Node{.op = Op::weighted_sum,
                   .inputs = {input},
                   .value = Tensor({1}, v),
                   .aux = std::move(weights)});
}

NodeId Tape::external_loss(NodeId input, double value_, Tensor gradient) {
  if (gradient.shape() != value(input).shape()) {
    throw ShapeError("external_loss: gradient " + to_string(gradient.shape()) +
                     " does not match input " + to_string(value(input).shape()));
  }
  return push(Node{.op = Op::external_loss,
                   .inputs = {input},
                   .value = Tensor({1}, value_),
                   .aux = std::move(gradient)});
}

const Tensor& Tape::value(NodeId id) const { return node(id).value; }

const Tensor& Tape::grad(NodeId id) const { return node(id).grad; }

Op Tape::op(NodeId id) const { return node(id).op; }

Tensor* Tape::grad_target(NodeId id) {
  Node& n = nodes_[id.index];
  if (!n.needs_grad) return nullptr;
  if (n.grad.shape() != n.value.shape()) n.grad = Tensor(n.value.shape());
  return &n.grad;
}

std::vector<Tensor> Tape::backward(NodeId root) {
  if (node(root).value.size() != 1) {
    throw ContractError("backward: root node must be scalar, got shape " +
                        to_string(node(root).value.shape()));
  }
  for (Node& n : nodes_) n.grad = Tensor();
  nodes_[root.index].grad = Tensor(node(root).value.shape(), 1.0);

  for (std::size_t i = root.index + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.empty()) continue;
    const Tensor& g = n.grad;
    switch (n.op) {
      case Op::input:
      case Op::parameter:
        break;
      case Op::conv2d:
        ops::conv2d_backward(value(n.inputs[0]), value(n.inputs[1]), g, grad_target(n.inputs[0]),
                             grad_target(n.inputs[1]), grad_target(n.inputs[2]));
        break;
      case Op::relu:
        if (Tensor* t = grad_target(n.inputs[0])) ops::relu_backward(value(n.inputs[0]), g, *t);
        break;
      case Op::downsample2:
        if (Tensor* t = grad_target(n.inputs[0])) ops::downsample2_backward(g, *t);
        break;
      case Op::upsample2:
        if (Tensor* t = grad_target(n.inputs[0])) ops::upsample2_backward(g, *t);
        break;
      case Op::concat_channels:
        ops::concat_channels_backward(g, grad_target(n.inputs[0]), grad_target(n.inputs[1]));
        break;
      case Op::channel_norm:
        ops::channel_norm_backward(value(n.inputs[0]), value(n.inputs[1]), n.stats, g,
                                   grad_target(n.inputs[0]), grad_target(n.inputs[1]),
                                   grad_target(n.inputs[2]));
        break;
      case Op::sum:
        if (Tensor* t = grad_target(n.inputs[0])) {
          for (double& v : t->values()) v += g[0];
        }
        break;
      case Op::weighted_sum:
      case Op::external_loss:
        if (Tensor* t = grad_target(n.inputs[0])) axpy(g[0], n.aux, *t);
        break;
    }
  }

  std::vector<Tensor> grads;
  grads.reserve(parameters_.size());
  for (NodeId p : parameters_) {
    Node& n = nodes_[p.index];
    if (n.grad.shape() != n.value.shape()) n.grad = Tensor(n.value.shape());
    grads.push_back(n.grad);
  }
  return grads;
}

}  // namespace seisseg
