#pragma once

#include <string>
#include <vector>

#include "amnet/batch.hpp"
#include "amnet/model.hpp"

namespace amnet {

struct UtteranceDecision {
    std::string utterance_id;
    int truth = 0;
    int predicted = 0;
};

struct EvalReport {
    double fer = 0.0;       // misclassified frames / total frames
    double cer = 0.0;       // misclassified utterances / total utterances
    double mean_loss = 0.0; // training objective averaged over frames
    std::int64_t frames_total = 0;
    std::int64_t frames_wrong = 0;
    std::int64_t utterances_total = 0;
    std::int64_t utterances_wrong = 0;
    std::vector<UtteranceDecision> per_utterance;
    std::vector<std::string> skipped;
};

struct EvalOptions {
    int batch_size = 128;
};

// Frame-level log-probabilities for one batch in eval mode: softmax over
// logits for the softmax head, softmax over scale_s * cosine (margin-free)
// for the additive-margin head.
Tensor frame_log_probs(Model& model, const Tensor& frames);

// Frame decisions plus utterance pooling: an utterance is assigned the class
// with the largest sum of per-frame log-probabilities; exact ties go to the
// lowest class index. Never mutates model state.
EvalReport evaluate(Model& model, const FrameDataset& dataset, const EvalOptions& options = {});

// Pure counting/pooling core over a precomputed frame table; `logprobs` is
// frame-major [num_frames * num_classes]. Shared by evaluate() and usable
// against reference scorers.
EvalReport score_frame_table(const std::vector<double>& logprobs, int num_classes,
                             const std::vector<int>& frame_labels, const std::vector<int>& frame_utt,
                             const std::vector<std::string>& utterance_ids,
                             const std::vector<int>& utterance_labels);

// JSON rendering of a report.
std::string eval_report_json(const EvalReport& report, const std::vector<std::string>& speakers);

}  // namespace amnet
