#include "amnet/model.hpp"

#include <cmath>

namespace amnet {

Tensor Model::forward_features(const Tensor& frames, Mode mode, Tape* tape, bool require_window) {
    if (frames.rank() != 3 || frames.dim(1) != 1) {
        throw ValueError("forward: frames must be [B, 1, window], got " + shape_str(frames.shape()));
    }
    if (require_window && frames.dim(2) != config.window_samples) {
        throw ValueError("forward: frame length axis is " + std::to_string(frames.dim(2)) +
                         ", expected window_samples = " + std::to_string(config.window_samples));
    }
    Tensor h = stem(frames, tape);
    h = stem_bn.with_relu6(h, mode, tape);
    for (auto& block : blocks) h = block.forward(h, mode, tape);
    h = head(h, tape);
    h = head_bn.with_relu6(h, mode, tape);
    return global_avg_pool1d(h, tape);
}

Tensor Model::forward(const Tensor& frames, Mode mode, Tape* tape, bool require_window) {
    Tensor features = forward_features(frames, mode, tape, require_window);
    if (config.loss == LossKind::am_softmax) return features;
    return linear(features, classifier_weight, classifier_bias ? &*classifier_bias : nullptr, tape);
}

namespace {

void push(std::vector<std::pair<std::string, Tensor>>& out, const std::string& name, const Tensor& t) {
    out.emplace_back(name, t);
}

void push_conv(std::vector<std::pair<std::string, Tensor>>& out, const std::string& prefix, Conv1d& c) {
    push(out, prefix + ".weight", c.weight);
    if (c.bias) push(out, prefix + ".bias", *c.bias);
}

void push_bn(std::vector<std::pair<std::string, Tensor>>& out, const std::string& prefix, BatchNorm1d& bn) {
    push(out, prefix + ".gamma", bn.gamma);
    push(out, prefix + ".beta", bn.beta);
}

void push_bn_stats(std::vector<std::pair<std::string, Tensor>>& out, const std::string& prefix,
                   BatchNorm1d& bn) {
    push(out, prefix + ".running_mean", bn.running_mean);
    push(out, prefix + ".running_var", bn.running_var);
}

}  // namespace

std::vector<std::pair<std::string, Tensor>> Model::named_parameters() {
    std::vector<std::pair<std::string, Tensor>> out;
    push_conv(out, "stem.conv", stem);
    push_bn(out, "stem.bn", stem_bn);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const std::string p = "blocks." + std::to_string(i);
        auto& b = blocks[i];
        if (b.expand) {
            push_conv(out, p + ".expand.conv", *b.expand);
            push_bn(out, p + ".expand.bn", *b.expand_bn);
        }
        push_conv(out, p + ".depthwise.conv", b.depthwise);
        push_bn(out, p + ".depthwise.bn", b.depthwise_bn);
        push_conv(out, p + ".project.conv", b.project);
        push_bn(out, p + ".project.bn", b.project_bn);
    }
    push_conv(out, "head.conv", head);
    push_bn(out, "head.bn", head_bn);
    push(out, "classifier.weight", classifier_weight);
    if (classifier_bias) push(out, "classifier.bias", *classifier_bias);
    return out;
}

std::vector<std::pair<std::string, Tensor>> Model::named_buffers() {
    std::vector<std::pair<std::string, Tensor>> out;
    push_bn_stats(out, "stem.bn", stem_bn);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const std::string p = "blocks." + std::to_string(i);
        auto& b = blocks[i];
        if (b.expand) push_bn_stats(out, p + ".expand.bn", *b.expand_bn);
        push_bn_stats(out, p + ".depthwise.bn", b.depthwise_bn);
        push_bn_stats(out, p + ".project.bn", b.project_bn);
    }
    push_bn_stats(out, "head.bn", head_bn);
    return out;
}

std::vector<Tensor> Model::parameters() {
    std::vector<Tensor> out;
    for (auto& [name, t] : named_parameters()) out.push_back(t);
    return out;
}

Model build_mobilenet1d(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(seed);

    Model m;
    m.config = config;
    m.stem = make_conv1d(1, config.stem_channels, 3, 2, 1, 1, false, rng);
    m.stem_bn = make_batchnorm1d(config.stem_channels, config.bn_momentum, config.bn_eps);

    std::int64_t channels = config.stem_channels;
    for (const auto& spec : config.bottlenecks) {
        for (int r = 0; r < spec.repeats_n; ++r) {
            const int stride = r == 0 ? spec.first_stride_s : 1;
            m.blocks.push_back(make_inverted_residual(channels, spec.out_channels_c, spec.expansion_t,
                                                      stride, config.kernel_size, config.bn_momentum,
                                                      config.bn_eps, rng));
            channels = spec.out_channels_c;
        }
    }

    m.head = make_conv1d(channels, config.head_channels, 1, 1, 0, 1, false, rng);
    m.head_bn = make_batchnorm1d(config.head_channels, config.bn_momentum, config.bn_eps);

    const double bound = std::sqrt(6.0 / static_cast<double>(config.head_channels));
    m.classifier_weight = Tensor({config.num_classes, config.head_channels}, /*requires_grad=*/true);
    for (double& v : m.classifier_weight.data()) v = rng.uniform(-bound, bound);
    if (config.loss == LossKind::softmax) {
        m.classifier_bias = Tensor({config.num_classes}, /*requires_grad=*/true);
    }
    return m;
}

std::int64_t count_parameters(Model& model) {
    std::int64_t total = 0;
    for (auto& [name, t] : model.named_parameters()) total += t.numel();
    return total;
}

}  // namespace amnet
