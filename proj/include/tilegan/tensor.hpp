#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "tilegan/memprof.hpp"

namespace tilegan {

/// Shape of a rank-4 tensor: batch, height, width, channels. All >= 1.
struct Dims4 {
  int b = 0;
  int h = 0;
  int w = 0;
  int c = 0;

  std::size_t count() const {
    return static_cast<std::size_t>(b) * h * w * c;
  }
  std::size_t bytes() const { return count() * sizeof(float); }
  bool operator==(const Dims4&) const = default;
};

namespace detail {

struct TensorNode {
  Dims4 dims;
  memprof::FloatBuf data;
  memprof::FloatBuf grad;       // allocated eagerly for leaves, lazily otherwise
  bool requires_grad = false;   // leaf parameter flag
  bool needs_grad = false;      // this node or an ancestor requires grad
  bool consumed = false;        // backward() already ran from this node
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backprop;
};

}  // namespace detail

/// Value-semantics handle to a rank-4 float tensor with optional gradient
/// tracking. Copies share the underlying node; a fresh buffer requires an
/// explicit detach()/zeros()/from_data(). A graph and its tensors belong to
/// one thread during forward/backward; frozen tensors may be read from many.
class Tensor4 {
public:
  Tensor4() = default;

  static Tensor4 zeros(Dims4 dims, bool requires_grad = false);
  static Tensor4 full(Dims4 dims, float value, bool requires_grad = false);
  static Tensor4 from_data(Dims4 dims, std::span<const float> values,
                           bool requires_grad = false);

  bool valid() const { return node_ != nullptr; }
  const Dims4& dims() const { return node_->dims; }
  std::size_t size() const { return node_->dims.count(); }

  std::span<const float> data() const { return {node_->data.data(), node_->data.size()}; }
  /// Mutable view of the values. Only sensible on leaves (parameters, inputs).
  std::span<float> values() { return {node_->data.data(), node_->data.size()}; }

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return node_ && !node_->grad.empty(); }
  std::span<const float> grad() const;
  std::span<float> grad_mut();
  void zero_grad();

  /// Value of a 1x1x1x1 tensor.
  float scalar() const;

  /// Copy of the values as a fresh leaf with no graph attached.
  Tensor4 detach() const;

  detail::TensorNode* node() const { return node_.get(); }
  const std::shared_ptr<detail::TensorNode>& node_ptr() const { return node_; }

  /// Used by op implementations to assemble result tensors.
  static Tensor4 adopt(std::shared_ptr<detail::TensorNode> node) {
    Tensor4 t;
    t.node_ = std::move(node);
    return t;
  }

private:
  std::shared_ptr<detail::TensorNode> node_;
};

/// True while gradient recording is active on this thread (default).
bool grad_enabled();

/// Scoped switch that disables graph recording, for inference paths where
/// intermediate activations must be released as evaluation proceeds.
class NoGradGuard {
public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
  bool previous_;
};

/// Reverse-mode sweep from a scalar loss. Fills gradients of every reachable
/// tensor that requires them; gradients from multiple uses accumulate by
/// summation. Throws std::logic_error if called twice on the same graph or if
/// the loss is not scalar.
void backward(const Tensor4& loss);

}  // namespace tilegan
