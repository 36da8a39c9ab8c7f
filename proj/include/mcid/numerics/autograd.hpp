#pragma once

#include <functional>
#include <memory>
#include <unordered_set>
#include <utility>
#include <vector>

#include "mcid/numerics/tensor.hpp"

namespace mcid {

namespace detail {

struct Node {
  Tensor value;
  Tensor grad;  // allocated on first use when requires_grad
  bool requires_grad = false;
  bool is_leaf = true;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into the parents' grads.
  std::function<void(Node&)> backward_fn;

  Tensor& ensure_grad() {
    if (grad.size() != value.size()) grad = Tensor(value.shape(), 0.0);
    return grad;
  }
};

inline bool& grad_mode_flag() {
  thread_local bool enabled = true;
  return enabled;
}

}  // namespace detail

// Disables graph recording for its lifetime. Inference paths hold one so that
// intermediate activations are released as soon as they go out of scope.
class NoGradGuard {
 public:
  NoGradGuard() : previous_(detail::grad_mode_flag()) { detail::grad_mode_flag() = false; }
  ~NoGradGuard() { detail::grad_mode_flag() = previous_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

inline bool grad_enabled() { return detail::grad_mode_flag(); }

// Handle to a node of the computation graph. Copies share the node.
class Var {
 public:
  Var() : node_(std::make_shared<detail::Node>()) {}
  explicit Var(Tensor value, bool requires_grad = false) : node_(std::make_shared<detail::Node>()) {
    node_->value = std::move(value);
    node_->requires_grad = requires_grad;
    if (requires_grad) node_->ensure_grad();
  }

  const Tensor& value() const { return node_->value; }
  Tensor& mutable_value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  std::size_t size() const { return node_->value.size(); }

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return node_->grad.size() == node_->value.size(); }
  const Tensor& grad() const { return node_->ensure_grad(); }
  Tensor& mutable_grad() { return node_->ensure_grad(); }
  void zero_grad() {
    if (node_->requires_grad) node_->ensure_grad().fill(0.0);
  }

  detail::Node& node() const { return *node_; }
  const std::shared_ptr<detail::Node>& node_ptr() const { return node_; }

  bool same_node(const Var& other) const { return node_ == other.node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

// Builds the result node of an op. The backward function is attached only when
// recording is enabled and some input needs a gradient.
inline Var make_result(Tensor value, std::vector<Var> inputs, std::function<void(detail::Node&)> backward_fn) {
  Var out(std::move(value));
  bool needs = false;
  for (const auto& in : inputs) needs = needs || in.requires_grad();
  if (needs && grad_enabled()) {
    auto& node = out.node();
    node.requires_grad = true;
    node.is_leaf = false;
    node.parents.reserve(inputs.size());
    for (const auto& in : inputs) node.parents.push_back(in.node_ptr());
    node.backward_fn = std::move(backward_fn);
  }
  return out;
}

// Reverse-mode sweep from a scalar. Leaf gradients accumulate across calls;
// interior gradients are reset on every call.
inline void backward(const Var& loss) {
  if (loss.size() != 1) {
    throw UsageError("backward: loss must be a scalar, got shape " + shape_str(loss.shape()));
  }
  if (!loss.requires_grad()) return;

  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> visited;
  std::vector<std::pair<detail::Node*, std::size_t>> stack{{&loss.node(), 0}};
  visited.insert(&loss.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (auto* node : order) {
    if (!node->is_leaf) node->ensure_grad().fill(0.0);
  }
  loss.node().ensure_grad()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* node = *it;
    if (node->backward_fn) node->backward_fn(*node);
  }
}

}  // namespace mcid
