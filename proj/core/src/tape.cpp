#include "amnet/tape.hpp"

#include <algorithm>

namespace amnet {

void Tape::record(std::vector<const detail::TensorStorage*> inputs,
                  const detail::TensorStorage* output, std::function<void()> backward_fn) {
    Node n;
    n.inputs = std::move(inputs);
    n.output = output;
    n.backward = std::move(backward_fn);
    nodes_.push_back(std::move(n));
}

bool Tape::produced(const detail::TensorStorage* t) const {
    return std::any_of(nodes_.begin(), nodes_.end(), [t](const Node& n) { return n.output == t; });
}

void Tape::backward(const Tensor& loss) {
    if (loss.numel() != 1) {
        throw ValueError("backward requires a scalar loss, got shape " + shape_str(loss.shape()));
    }
    if (!nodes_.empty() && !produced(loss.storage())) {
        throw ValueError("backward: loss was not produced on this tape");
    }
    loss.storage()->grad.assign(1, 1.0);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        if (it->backward) it->backward();
    }
}

void backward(const Tensor& loss, Tape& tape) { tape.backward(loss); }

}  // namespace amnet
