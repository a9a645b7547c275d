#pragma once

#include <functional>
#include <vector>

#include "amnet/tensor.hpp"

namespace amnet {

// Records the forward graph in execution order. Each node keeps the ids of
// its operands, the id of its result, and a closure that scatters the
// result's gradient back onto the operands (accumulating, so fan-out sums).
class Tape {
  public:
    struct Node {
        std::vector<const detail::TensorStorage*> inputs;
        const detail::TensorStorage* output = nullptr;
        std::function<void()> backward;
    };

    void record(std::vector<const detail::TensorStorage*> inputs,
                const detail::TensorStorage* output, std::function<void()> backward_fn);

    std::size_t size() const { return nodes_.size(); }
    const Node& node(std::size_t i) const { return nodes_[i]; }

    bool produced(const detail::TensorStorage* t) const;

    // Seeds d(loss)/d(loss) = 1 and replays the tape in reverse. Populates
    // grad on every requires_grad tensor reachable from the loss.
    void backward(const Tensor& loss);

    void clear() { nodes_.clear(); }

  private:
    std::vector<Node> nodes_;
};

// Free-function form of Tape::backward.
void backward(const Tensor& loss, Tape& tape);

}  // namespace amnet
