#pragma once

#include <optional>

#include "amnet/config.hpp"
#include "amnet/ops.hpp"
#include "amnet/rng.hpp"

namespace amnet {

struct Conv1d {
    Tensor weight;  // [Cout, Cin/groups, K]
    std::optional<Tensor> bias;
    int stride = 1;
    int padding = 0;
    int groups = 1;

    Tensor operator()(const Tensor& x, Tape* tape = nullptr) const {
        return conv1d(x, weight, bias ? &*bias : nullptr, stride, padding, groups, tape);
    }
};

struct BatchNorm1d {
    Tensor gamma;
    Tensor beta;
    Tensor running_mean;
    Tensor running_var;
    double momentum = 0.1;
    double eps = 1e-5;

    Tensor operator()(const Tensor& x, Mode mode, Tape* tape = nullptr) {
        return batchnorm1d(x, gamma, beta, running_mean, running_var, mode, momentum, eps, tape);
    }

    // Single-pass BN -> ReLU6.
    Tensor with_relu6(const Tensor& x, Mode mode, Tape* tape = nullptr) {
        return batchnorm1d_relu6(x, gamma, beta, running_mean, running_var, mode, momentum, eps, tape);
    }
};

Conv1d make_conv1d(std::int64_t cin, std::int64_t cout, std::int64_t k, int stride, int padding,
                   int groups, bool with_bias, Rng& rng);
BatchNorm1d make_batchnorm1d(std::int64_t channels, double momentum, double eps);

// depthwise conv -> BN -> ReLU6 -> pointwise conv -> BN -> ReLU6.
// dw_weight [C, 1, K] runs with groups=C; pw_weight [Cout, C, 1] at stride 1.
Tensor depthwise_separable_conv1d(const Tensor& x, const Tensor& dw_weight, const Tensor& pw_weight,
                                  int stride, int padding, BatchNorm1d& dw_bn, BatchNorm1d& pw_bn,
                                  Mode mode, Tape* tape = nullptr);

// Expand (1x1, skipped when t == 1) -> BN -> ReLU6 -> depthwise (K, stride)
// -> BN -> ReLU6 -> project (1x1) -> BN, with a residual connection when
// stride == 1 and the channel count is preserved.
struct InvertedResidual {
    std::optional<Conv1d> expand;
    std::optional<BatchNorm1d> expand_bn;
    Conv1d depthwise;
    BatchNorm1d depthwise_bn;
    Conv1d project;
    BatchNorm1d project_bn;
    bool use_skip = false;

    Tensor forward(const Tensor& x, Mode mode, Tape* tape = nullptr);
};

InvertedResidual make_inverted_residual(std::int64_t cin, std::int64_t cout, int expansion_t,
                                        int stride, std::int64_t kernel, double bn_momentum,
                                        double bn_eps, Rng& rng);

}  // namespace amnet
