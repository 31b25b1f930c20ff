#include "tilegan/tensor.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace tilegan {

namespace {

thread_local bool t_grad_enabled = true;

void check_dims(const Dims4& d) {
  if (d.b < 1 || d.h < 1 || d.w < 1 || d.c < 1)
    throw std::invalid_argument("Tensor4 dims must all be >= 1");
}

std::shared_ptr<detail::TensorNode> make_node(Dims4 dims, bool requires_grad) {
  check_dims(dims);
  auto node = std::make_shared<detail::TensorNode>();
  node->dims = dims;
  node->data.resize(dims.count(), 0.0f);
  node->requires_grad = requires_grad;
  node->needs_grad = requires_grad;
  if (requires_grad) node->grad.resize(dims.count(), 0.0f);
  return node;
}

}  // namespace

Tensor4 Tensor4::zeros(Dims4 dims, bool requires_grad) {
  return adopt(make_node(dims, requires_grad));
}

Tensor4 Tensor4::full(Dims4 dims, float value, bool requires_grad) {
  auto node = make_node(dims, requires_grad);
  std::fill(node->data.begin(), node->data.end(), value);
  return adopt(std::move(node));
}

Tensor4 Tensor4::from_data(Dims4 dims, std::span<const float> values, bool requires_grad) {
  auto node = make_node(dims, requires_grad);
  if (values.size() != node->data.size())
    throw std::invalid_argument("Tensor4::from_data: value count does not match dims");
  std::copy(values.begin(), values.end(), node->data.begin());
  return adopt(std::move(node));
}

std::span<const float> Tensor4::grad() const {
  if (!node_ || node_->grad.empty())
    throw std::logic_error("Tensor4::grad: no gradient buffer present");
  return {node_->grad.data(), node_->grad.size()};
}

std::span<float> Tensor4::grad_mut() {
  if (!node_ || node_->grad.empty())
    throw std::logic_error("Tensor4::grad_mut: no gradient buffer present");
  return {node_->grad.data(), node_->grad.size()};
}

void Tensor4::zero_grad() {
  if (node_ && !node_->grad.empty())
    std::fill(node_->grad.begin(), node_->grad.end(), 0.0f);
}

float Tensor4::scalar() const {
  if (size() != 1) throw std::logic_error("Tensor4::scalar: tensor is not 1x1x1x1");
  return node_->data[0];
}

Tensor4 Tensor4::detach() const {
  return from_data(node_->dims, data(), false);
}

bool grad_enabled() { return t_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }

void backward(const Tensor4& loss) {
  if (!loss.valid() || loss.size() != 1)
    throw std::logic_error("backward: loss must be a scalar tensor");
  detail::TensorNode* root = loss.node();
  if (root->consumed)
    throw std::logic_error("backward: graph already consumed; rebuild the forward pass first");
  root->consumed = true;

  // Iterative post-order DFS; 'order' ends up topologically sorted with the
  // root last. Shared ownership keeps nodes alive while edges are being cut
  // below, even when the caller holds no handle to the intermediates.
  std::vector<std::shared_ptr<detail::TensorNode>> order;
  std::unordered_set<detail::TensorNode*> visited;
  struct Frame {
    std::shared_ptr<detail::TensorNode> node;
    std::size_t next_parent;
  };
  std::vector<Frame> stack;
  stack.push_back({loss.node_ptr(), 0});
  visited.insert(root);
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.next_parent < top.node->parents.size()) {
      const std::shared_ptr<detail::TensorNode>& parent =
          top.node->parents[top.next_parent++];
      if (parent->needs_grad && visited.insert(parent.get()).second)
        stack.push_back({parent, 0});
    } else {
      order.push_back(std::move(top.node));
      stack.pop_back();
    }
  }

  for (const auto& node : order) {
    if (node->grad.empty()) node->grad.resize(node->dims.count(), 0.0f);
  }
  root->grad[0] = 1.0f;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::TensorNode* node = it->get();
    if (node->backprop) {
      node->backprop(*node);
      node->backprop = nullptr;
    }
    node->parents.clear();
    // Gradients of intermediates are fully accumulated once their own
    // backprop has run; release them to keep the sweep's peak low.
    if (!node->requires_grad && node != root) {
      memprof::FloatBuf empty;
      node->grad.swap(empty);
    }
  }
}

}  // namespace tilegan
