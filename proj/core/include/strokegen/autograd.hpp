#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "strokegen/tensor.hpp"

namespace strokegen::tensor {

template <std::floating_point T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;
  bool requires_grad = false;
  bool is_leaf = true;
  std::vector<std::shared_ptr<Node>> parents;
  /// Reads this node's grad and accumulates into the parents' grads.
  std::function<void(Node&)> backward_fn;

  void ensure_grad() {
    if (grad.size() != value.size()) grad = Tensor<T>(value.shape(), T{0});
  }
};

/// Handle to a value recorded on the tape. Copies share the node.
template <std::floating_point T>
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  /// Trainable leaf.
  static Var parameter(Tensor<T> value);
  static Var constant(Tensor<T> value);

  const Tensor<T>& value() const { return node_->value; }
  Tensor<T>& mutable_value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }

  /// Empty until a backward pass reached this node.
  const Tensor<T>& grad() const { return node_->grad; }
  Tensor<T>& mutable_grad() {
    node_->ensure_grad();
    return node_->grad;
  }
  void zero_grad();

  bool requires_grad() const { return node_ && node_->requires_grad; }
  bool defined() const { return node_ != nullptr; }
  Node<T>* node() const { return node_.get(); }
  const std::shared_ptr<Node<T>>& shared() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

/// Gradient recording is on by default and can be turned off per thread.
bool grad_enabled();
void set_grad_enabled(bool enabled);

class NoGradGuard {
 public:
  NoGradGuard() : previous_(grad_enabled()) { set_grad_enabled(false); }
  ~NoGradGuard() { set_grad_enabled(previous_); }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Reverse-mode sweep from a scalar. Leaf gradients accumulate across calls;
/// the seed scales the whole sweep (d loss / d loss = seed).
template <std::floating_point T>
void backward(const Var<T>& loss, T seed = T{1});

template <std::floating_point T>
Var<T> matmul(const Var<T>& a, const Var<T>& b);

/// a * b^T
template <std::floating_point T>
Var<T> matmul_nt(const Var<T>& a, const Var<T>& b);

template <std::floating_point T>
Var<T> add(const Var<T>& a, const Var<T>& b);

/// a[m, n] + bias[1, n] on every row.
template <std::floating_point T>
Var<T> add_row(const Var<T>& a, const Var<T>& bias);

/// Elementwise product.
template <std::floating_point T>
Var<T> mul(const Var<T>& a, const Var<T>& b);

template <std::floating_point T>
Var<T> scale(const Var<T>& a, T factor);

template <std::floating_point T>
Var<T> relu(const Var<T>& a);

/// Max-subtracted softmax along axis 0 (columns) or 1 (rows) of a 2-D tensor.
template <std::floating_point T>
Var<T> softmax(const Var<T>& a, int axis = 1);

/// Row softmax over allowed entries only; masked entries are exactly 0.
template <std::floating_point T>
Var<T> masked_softmax(const Var<T>& a, const Mask& mask);

/// Per-row normalization, then gain * x_hat + bias with gain/bias of shape [1, n].
template <std::floating_point T>
Var<T> layer_norm(const Var<T>& x, const Var<T>& gain, const Var<T>& bias, T eps = T(1e-5));

/// Rows of `table` picked by `ids`.
template <std::floating_point T>
Var<T> embedding(const Var<T>& table, std::span<const int> ids);

/// Mean over rows of -log softmax(logits)[target].
template <std::floating_point T>
Var<T> cross_entropy(const Var<T>& logits, std::span<const int> targets);

template <std::floating_point T>
Var<T> slice_cols(const Var<T>& a, std::size_t begin, std::size_t count);

template <std::floating_point T>
Var<T> concat_cols(std::span<const Var<T>> parts);

/// Scalar [1, 1] sum of all entries.
template <std::floating_point T>
Var<T> sum(const Var<T>& a);

}  // namespace strokegen::tensor
