// SPDX-License-Identifier: Apache-2.0
#include "kombo/nn/autograd.hpp"

#include <unordered_set>

#include "kombo/error.hpp"

namespace kombo::nn {
namespace {

// Post-order over nodes that require grad; reversed it is a valid
// topological order for the reverse pass.
template <typename T>
std::vector<Node<T>*> topological_order(Node<T>* root) {
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> visited;
  std::vector<std::pair<Node<T>*, std::size_t>> stack;
  stack.emplace_back(root, 0);
  visited.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node<T>* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  return order;
}

}  // namespace

template <typename T>
void backward(const Var<T>& root, const Tensor<T>& seed) {
  if (!root.defined() || !root.requires_grad()) return;
  if (seed.shape() != root.shape()) {
    throw Error(ErrorKind::ShapeError, "seed shape " + shape_string(seed.shape()) + " vs root " +
                                           shape_string(root.shape()));
  }
  auto order = topological_order(root.node());
  auto& g = root.node()->ensure_grad();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += seed[i];
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* n = *it;
    if (n->backward_fn) {
      n->ensure_grad();
      n->backward_fn(*n);
    }
  }
}

template <typename T>
void backward(const Var<T>& root) {
  if (root.defined() && root.value().size() != 1) {
    throw Error(ErrorKind::ShapeError, "backward() without a seed needs a one-element root");
  }
  backward(root, Tensor<T>(root.shape(), T{1}));
}

template void backward<float>(const Var<float>&);
template void backward<double>(const Var<double>&);
template void backward<float>(const Var<float>&, const Tensor<float>&);
template void backward<double>(const Var<double>&, const Tensor<double>&);

}  // namespace kombo::nn
