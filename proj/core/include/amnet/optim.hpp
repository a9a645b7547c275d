#pragma once

#include <string>
#include <utility>
#include <vector>

#include "amnet/tensor.hpp"

namespace amnet {

struct RmspropConfig {
    double lr = 0.001;
    double alpha = 0.95;
    double eps = 1e-7;
    // eps sits outside the root by default: p -= lr * g / (sqrt(v) + eps).
    bool eps_inside_sqrt = false;
};

// Plain (non-centered) RMSprop, no momentum, no weight decay. Keeps one
// squared-gradient accumulator per parameter, initialized to zeros.
class Rmsprop {
  public:
    Rmsprop(std::vector<std::pair<std::string, Tensor>> params, RmspropConfig config);

    // v <- alpha*v + (1-alpha)*g^2; p <- p - lr*g/(sqrt(v)+eps); grads cleared.
    // Throws when a parameter arrives without a populated gradient.
    void step();

    const RmspropConfig& config() const { return config_; }
    std::size_t size() const { return params_.size(); }
    const std::vector<double>& accumulator(std::size_t i) const { return state_[i]; }

  private:
    std::vector<std::pair<std::string, Tensor>> params_;
    std::vector<std::vector<double>> state_;
    RmspropConfig config_;
};

}  // namespace amnet
