#pragma once

#include <string>
#include <utility>
#include <vector>

#include "amnet/layers.hpp"

namespace amnet {

// MobileNetV2-style backbone over raw waveform frames, every spatial op 1-D:
// stem conv (K=3, stride 2) -> bottleneck stages -> 1x1 head conv -> global
// average pool -> classifier. The classifier keeps a bias for the plain
// softmax head and is bias-free for the additive-margin head, where its
// weight matrix doubles as the cosine prototype matrix.
class Model {
  public:
    ModelConfig config;

    Conv1d stem;
    BatchNorm1d stem_bn;
    std::vector<InvertedResidual> blocks;
    Conv1d head;
    BatchNorm1d head_bn;
    Tensor classifier_weight;            // [num_classes, head_channels]
    std::optional<Tensor> classifier_bias;

    // Pooled feature vector [B, head_channels].
    Tensor forward_features(const Tensor& frames, Mode mode, Tape* tape = nullptr,
                            bool require_window = true);

    // Classifier-head output: logits [B, num_classes] for the softmax head,
    // the pooled features for the additive-margin head (consumed together
    // with classifier_weight by the loss / scoring routines).
    Tensor forward(const Tensor& frames, Mode mode, Tape* tape = nullptr,
                   bool require_window = true);

    // Trainable tensors in construction order (the checkpoint layout order).
    std::vector<std::pair<std::string, Tensor>> named_parameters();
    // Batch-norm running statistics, same ordering scheme.
    std::vector<std::pair<std::string, Tensor>> named_buffers();
    std::vector<Tensor> parameters();
};

// Builds the network described by `config` with weights drawn from a
// generator seeded with `seed`; identical seeds give identical weights.
Model build_mobilenet1d(const ModelConfig& config, std::uint64_t seed);

// Total element count of trainable tensors. Running stats excluded.
std::int64_t count_parameters(Model& model);

}  // namespace amnet
