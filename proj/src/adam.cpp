#include "tilegan/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace tilegan {

AdamOptimizer::AdamOptimizer(AdamConfig config,
                             std::vector<std::pair<std::string, Tensor4>> params)
    : config_(config), params_(std::move(params)) {
  states_.resize(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (!params_[i].second.requires_grad())
      throw std::invalid_argument("AdamOptimizer: parameter '" + params_[i].first +
                                  "' does not require gradients");
    states_[i].m.resize(params_[i].second.size(), 0.0f);
    states_[i].v.resize(params_[i].second.size(), 0.0f);
  }
}

void adam_step(std::span<float> param, std::span<const float> grad, AdamState& state,
               const AdamConfig& config, std::int64_t t) {
  if (param.size() != grad.size() || param.size() != state.m.size() ||
      param.size() != state.v.size())
    throw std::invalid_argument("adam_step: parameter/gradient/moment shape mismatch");
  const float bc1 = 1.0f - std::pow(config.beta1, static_cast<float>(t));
  const float bc2 = 1.0f - std::pow(config.beta2, static_cast<float>(t));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const float g = grad[i];
    state.m[i] = config.beta1 * state.m[i] + (1.0f - config.beta1) * g;
    state.v[i] = config.beta2 * state.v[i] + (1.0f - config.beta2) * g * g;
    const float m_hat = state.m[i] / bc1;
    const float v_hat = state.v[i] / bc2;
    param[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

void AdamOptimizer::step() {
  ++t_;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor4& p = params_[i].second;
    adam_step(p.values(), p.grad(), states_[i], config_, t_);
  }
}

void AdamOptimizer::zero_grad() {
  for (auto& [name, p] : params_) p.zero_grad();
}

}  // namespace tilegan
