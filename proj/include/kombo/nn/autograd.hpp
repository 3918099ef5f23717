// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "kombo/nn/tensor.hpp"

namespace kombo::nn {

/// One value in a recorded computation. A node owns its inputs, never its
/// consumers, so a graph is released as soon as the loss handle goes away.
template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;  // allocated on first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward_fn;

  Tensor<T>& ensure_grad() {
    if (grad.size() != value.size() || grad.shape() != value.shape()) grad = Tensor<T>(value.shape());
    return grad;
  }
};

/// Handle to a node. Copies share the node.
template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  static Var constant(Tensor<T> value) { return leaf(std::move(value), false); }
  static Var leaf(Tensor<T> value, bool requires_grad) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    n->requires_grad = requires_grad;
    return Var(std::move(n));
  }

  bool defined() const { return node_ != nullptr; }
  const Tensor<T>& value() const { return node_->value; }
  Tensor<T>& mutable_value() { return node_->value; }
  const Tensor<T>& grad() const { return node_->ensure_grad(); }
  Tensor<T>& mutable_grad() { return node_->ensure_grad(); }
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const { return node_->requires_grad; }
  Node<T>* node() const { return node_.get(); }
  const std::shared_ptr<Node<T>>& shared() const { return node_; }

  void zero_grad() {
    if (node_->grad.size() == node_->value.size()) node_->grad.fill(T{0});
  }

 private:
  std::shared_ptr<Node<T>> node_;
};

/// Records an op result. `backward` runs only if some input requires grad; it
/// receives the result node and must accumulate into the inputs' grads.
template <typename T>
Var<T> make_result(Tensor<T> value, const std::vector<Var<T>>& inputs,
                   std::function<void(Node<T>&)> backward) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  for (const auto& in : inputs) {
    if (in.defined() && in.requires_grad()) n->requires_grad = true;
  }
  if (n->requires_grad) {
    n->inputs.reserve(inputs.size());
    for (const auto& in : inputs) n->inputs.push_back(in.shared());
    n->backward_fn = std::move(backward);
  }
  return Var<T>(std::move(n));
}

/// Reverse pass from a one-element root, seeded with 1.
template <typename T>
void backward(const Var<T>& root);

/// Reverse pass with an explicit seed of the root's shape.
template <typename T>
void backward(const Var<T>& root, const Tensor<T>& seed);

extern template void backward<float>(const Var<float>&);
extern template void backward<double>(const Var<double>&);
extern template void backward<float>(const Var<float>&, const Tensor<float>&);
extern template void backward<double>(const Var<double>&, const Tensor<double>&);

}  // namespace kombo::nn
