#include "amnet/layers.hpp"

#include <cmath>

namespace amnet {

namespace {

// Kaiming-uniform, fan-in mode: U(-sqrt(6/fan_in), sqrt(6/fan_in)).
Tensor kaiming_uniform(std::vector<std::int64_t> shape, std::int64_t fan_in, Rng& rng) {
    Tensor t(std::move(shape), /*requires_grad=*/true);
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (double& v : t.data()) v = rng.uniform(-bound, bound);
    return t;
}

}  // namespace

Conv1d make_conv1d(std::int64_t cin, std::int64_t cout, std::int64_t k, int stride, int padding,
                   int groups, bool with_bias, Rng& rng) {
    Conv1d c;
    const std::int64_t cpg = cin / groups;
    c.weight = kaiming_uniform({cout, cpg, k}, cpg * k, rng);
    if (with_bias) {
        c.bias = Tensor({cout}, /*requires_grad=*/true);
    }
    c.stride = stride;
    c.padding = padding;
    c.groups = groups;
    return c;
}

BatchNorm1d make_batchnorm1d(std::int64_t channels, double momentum, double eps) {
    BatchNorm1d bn;
    bn.gamma = Tensor::full({channels}, 1.0);
    bn.gamma.set_requires_grad(true);
    bn.beta = Tensor({channels}, /*requires_grad=*/true);
    bn.running_mean = Tensor::zeros({channels});
    bn.running_var = Tensor::full({channels}, 1.0);
    bn.momentum = momentum;
    bn.eps = eps;
    return bn;
}

Tensor depthwise_separable_conv1d(const Tensor& x, const Tensor& dw_weight, const Tensor& pw_weight,
                                  int stride, int padding, BatchNorm1d& dw_bn, BatchNorm1d& pw_bn,
                                  Mode mode, Tape* tape) {
    const std::int64_t channels = x.dim(1);
    Tensor h = conv1d(x, dw_weight, nullptr, stride, padding, static_cast<int>(channels), tape);
    h = dw_bn.with_relu6(h, mode, tape);
    h = conv1d(h, pw_weight, nullptr, 1, 0, 1, tape);
    return pw_bn.with_relu6(h, mode, tape);
}

Tensor InvertedResidual::forward(const Tensor& x, Mode mode, Tape* tape) {
    Tensor h = x;
    if (expand) {
        h = (*expand)(h, tape);
        h = expand_bn->with_relu6(h, mode, tape);
    }
    h = depthwise(h, tape);
    h = depthwise_bn.with_relu6(h, mode, tape);
    h = project(h, tape);
    h = project_bn(h, mode, tape);
    if (use_skip) h = add(h, x, tape);
    return h;
}

InvertedResidual make_inverted_residual(std::int64_t cin, std::int64_t cout, int expansion_t,
                                        int stride, std::int64_t kernel, double bn_momentum,
                                        double bn_eps, Rng& rng) {
    InvertedResidual block;
    const std::int64_t hidden = cin * expansion_t;
    if (expansion_t != 1) {
        block.expand = make_conv1d(cin, hidden, 1, 1, 0, 1, false, rng);
        block.expand_bn = make_batchnorm1d(hidden, bn_momentum, bn_eps);
    }
    block.depthwise = make_conv1d(hidden, hidden, kernel, stride, static_cast<int>(kernel / 2),
                                  static_cast<int>(hidden), false, rng);
    block.depthwise_bn = make_batchnorm1d(hidden, bn_momentum, bn_eps);
    block.project = make_conv1d(hidden, cout, 1, 1, 0, 1, false, rng);
    block.project_bn = make_batchnorm1d(cout, bn_momentum, bn_eps);
    block.use_skip = stride == 1 && cin == cout;
    return block;
}

}  // namespace amnet
