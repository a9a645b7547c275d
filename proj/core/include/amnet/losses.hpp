#pragma once

#include <span>
#include <vector>

#include "amnet/config.hpp"
#include "amnet/ops.hpp"

namespace amnet {

struct AmSoftmaxParams {
    double scale_s = 30.0;
    double margin_m = 0.5;
    double eps = 1e-11;  // added inside each norm denominator
};

// Mean over the batch of -log softmax(logits)[target], log-sum-exp shifted.
Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> targets, Tape* tape = nullptr);

// Additive-margin softmax over cosine logits: feature rows and weight rows
// are L2-normalized (eps inside the denominators), the target cosine is
// reduced by margin_m, everything is scaled by scale_s, then averaged
// cross-entropy. Gradients flow to both features and weight.
Tensor am_softmax_loss(const Tensor& features, const Tensor& weight, std::span<const int> targets,
                       const AmSoftmaxParams& params, Tape* tape = nullptr);

// Cosine similarity rows-vs-rows: [B, D] x [C, D] -> [B, C]. Scoring path,
// no gradients.
Tensor cosine_logits(const Tensor& features, const Tensor& weight, double eps);

// Row-wise log softmax, scoring path.
Tensor log_softmax_rows(const Tensor& scores);

// Argmax per row; exact ties go to the lowest class index.
std::vector<int> argmax_rows(const Tensor& scores);

// Decision rule shared by evaluation: argmax of logits for the softmax head,
// argmax of (margin-free) cosine logits for the additive-margin head.
std::vector<int> predict_class(const Tensor& features_or_logits, const Tensor* weight, LossKind kind,
                               double eps);

}  // namespace amnet
