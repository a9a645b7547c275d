#include "amnet/optim.hpp"

#include <cmath>

namespace amnet {

Rmsprop::Rmsprop(std::vector<std::pair<std::string, Tensor>> params, RmspropConfig config)
    : params_(std::move(params)), config_(config) {
    if (config_.lr <= 0.0) throw ValueError("rmsprop: lr must be positive");
    if (config_.alpha < 0.0 || config_.alpha >= 1.0) throw ValueError("rmsprop: alpha must be in [0, 1)");
    if (config_.eps <= 0.0) throw ValueError("rmsprop: eps must be positive");
    state_.reserve(params_.size());
    for (auto& [name, p] : params_) {
        state_.emplace_back(static_cast<std::size_t>(p.numel()), 0.0);
    }
}

void Rmsprop::step() {
    for (std::size_t idx = 0; idx < params_.size(); ++idx) {
        auto& [name, p] = params_[idx];
        if (!p.has_grad()) {
            throw ValueError("rmsprop: parameter '" + name + "' has no gradient");
        }
        auto data = p.data();
        auto grad = p.grad();
        auto& v = state_[idx];
        const double lr = config_.lr, alpha = config_.alpha, eps = config_.eps;
        if (config_.eps_inside_sqrt) {
            for (std::size_t i = 0; i < v.size(); ++i) {
                const double g = grad[i];
                v[i] = alpha * v[i] + (1.0 - alpha) * g * g;
                data[i] -= lr * g / std::sqrt(v[i] + eps);
            }
        } else {
            for (std::size_t i = 0; i < v.size(); ++i) {
                const double g = grad[i];
                v[i] = alpha * v[i] + (1.0 - alpha) * g * g;
                data[i] -= lr * g / (std::sqrt(v[i]) + eps);
            }
        }
        p.zero_grad();
    }
}

}  // namespace amnet
