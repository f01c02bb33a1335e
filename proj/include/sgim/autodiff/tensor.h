#pragma once

// Dense tensors with reverse-mode differentiation over a dynamically built
// graph. Every op records its inputs and a backward rule on the result node;
// backward() orders the reachable nodes into a tape and replays it in reverse.
//
// The engine is templated on the scalar type. Production code uses
// Tensor (float); finite-difference checks run the same code on Tensor64.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "sgim/errors.h"

namespace sgim::ad {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

inline std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

// In checked mode every op verifies that its output is finite and
// l2_normalize rejects zero rows.
void set_checked_mode(bool enabled);
bool checked_mode();

class CheckedModeGuard {
 public:
  explicit CheckedModeGuard(bool enabled) : previous_(checked_mode()) {
    set_checked_mode(enabled);
  }
  ~CheckedModeGuard() { set_checked_mode(previous_); }
  CheckedModeGuard(const CheckedModeGuard&) = delete;
  CheckedModeGuard& operator=(const CheckedModeGuard&) = delete;

 private:
  bool previous_;
};

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;
  bool requires_grad = false;
  bool is_leaf = true;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  // Adds this node's grad, scaled by local derivatives, into inputs' grads.
  std::function<void(Node&)> backward;

  std::vector<T>& ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), T(0));
    return grad;
  }
};

template <typename T>
class BasicTensor {
 public:
  using Scalar = T;

  BasicTensor() : node_(std::make_shared<Node<T>>()) {}
  explicit BasicTensor(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  static BasicTensor from(Shape shape, std::vector<T> values,
                          bool requires_grad = false) {
    if (shape_size(shape) != values.size()) {
      throw DimensionError("tensor data length " + std::to_string(values.size()) +
                           " does not match shape " + shape_string(shape));
    }
    for (std::size_t d : shape) {
      if (d == 0) throw DimensionError("zero-sized dimension in shape " + shape_string(shape));
    }
    auto node = std::make_shared<Node<T>>();
    node->shape = std::move(shape);
    node->value = std::move(values);
    node->requires_grad = requires_grad;
    return BasicTensor(std::move(node));
  }
  static BasicTensor full(Shape shape, T fill, bool requires_grad = false) {
    std::vector<T> values(shape_size(shape), fill);
    return from(std::move(shape), std::move(values), requires_grad);
  }
  static BasicTensor zeros(Shape shape, bool requires_grad = false) {
    return full(std::move(shape), T(0), requires_grad);
  }
  static BasicTensor scalar(T v, bool requires_grad = false) {
    return from({}, {v}, requires_grad);
  }

  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t size() const { return node_->value.size(); }
  // Rank-0 and rank-1 tensors behave as a single row.
  std::size_t rows() const { return rank() == 2 ? node_->shape[0] : 1; }
  std::size_t cols() const {
    if (rank() == 2) return node_->shape[1];
    return rank() == 1 ? node_->shape[0] : 1;
  }

  std::span<const T> data() const { return node_->value; }
  // Direct writes are for leaves (parameters updated by an optimizer).
  std::span<T> mutable_data() {
    if (!node_->is_leaf) throw ContractError("cannot mutate a non-leaf tensor in place");
    return node_->value;
  }
  std::span<const T> grad() const { return node_->grad; }
  bool has_grad() const { return node_->grad.size() == node_->value.size(); }

  T item() const {
    if (size() != 1) {
      throw DimensionError("item() requires a single-element tensor, got " +
                           shape_string(shape()));
    }
    return node_->value[0];
  }
  T at(std::size_t r, std::size_t c) const { return node_->value[r * cols() + c]; }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) {
    if (!node_->is_leaf) throw ContractError("requires_grad can only be set on leaves");
    node_->requires_grad = on;
  }
  void zero_grad() { node_->grad.clear(); }

  // Leaf copy of the current values, detached from any graph.
  BasicTensor detach(bool requires_grad = false) const {
    return from(shape(), node_->value, requires_grad);
  }

  template <typename U>
  BasicTensor<U> cast(bool requires_grad = false) const {
    std::vector<U> values(node_->value.begin(), node_->value.end());
    return BasicTensor<U>::from(shape(), std::move(values), requires_grad);
  }

  const std::shared_ptr<Node<T>>& node() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

using Tensor = BasicTensor<float>;
using Tensor64 = BasicTensor<double>;

// Builds a result node. The backward rule is kept only when some input
// participates in differentiation, so inference builds no graph.
template <typename T>
BasicTensor<T> make_op(const char* name, Shape shape, std::vector<T> value,
                       const std::vector<BasicTensor<T>>& inputs,
                       std::function<void(Node<T>&)> backward) {
  auto node = std::make_shared<Node<T>>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->op = name;
  node->is_leaf = false;
  for (const auto& in : inputs) node->requires_grad |= in.requires_grad();
  if (node->requires_grad) {
    node->inputs.reserve(inputs.size());
    for (const auto& in : inputs) node->inputs.push_back(in.node());
    node->backward = std::move(backward);
  }
  if (checked_mode()) {
    for (T v : node->value) {
      if (!std::isfinite(v)) {
        throw NumericalError(std::string("non-finite value produced by op '") + name + "'");
      }
    }
  }
  return BasicTensor<T>(std::move(node));
}

// Topological order of all differentiable nodes reachable from root; inputs
// precede their consumers.
template <typename T>
std::vector<Node<T>*> build_tape(Node<T>* root) {
  std::vector<Node<T>*> order;
  if (!root->requires_grad) return order;
  std::unordered_set<Node<T>*> visited{root};
  std::vector<std::pair<Node<T>*, std::size_t>> stack;
  stack.emplace_back(root, 0);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node<T>* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) {
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  return order;
}

template <typename T>
void backward(const BasicTensor<T>& loss) {
  if (loss.size() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " +
                        shape_string(loss.shape()));
  }
  if (!loss.requires_grad()) {
    throw ContractError("backward() on a loss that does not depend on any trainable tensor");
  }
  std::vector<Node<T>*> tape = build_tape(loss.node().get());
  for (Node<T>* n : tape) {
    if (!n->is_leaf) n->grad.assign(n->value.size(), T(0));
  }
  Node<T>* root = loss.node().get();
  root->ensure_grad()[0] += T(1);
  for (auto it = tape.rbegin(); it != tape.rend(); ++it) {
    Node<T>* n = *it;
    if (n->backward) n->backward(*n);
  }
}

}  // namespace sgim::ad
