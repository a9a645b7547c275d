#include "amnet/eval.hpp"

#include <algorithm>

#include "amnet/losses.hpp"
#include "json_util.hpp"

namespace amnet {

Tensor frame_log_probs(Model& model, const Tensor& frames) {
    const Tensor out = model.forward(frames, Mode::eval);
    if (model.config.loss == LossKind::softmax) return log_softmax_rows(out);
    const Tensor cosines = cosine_logits(out, model.classifier_weight, model.config.loss_eps);
    return log_softmax_rows(scale(cosines, model.config.scale_s));
}

EvalReport score_frame_table(const std::vector<double>& logprobs, int num_classes,
                             const std::vector<int>& frame_labels, const std::vector<int>& frame_utt,
                             const std::vector<std::string>& utterance_ids,
                             const std::vector<int>& utterance_labels) {
    const std::size_t n = frame_labels.size();
    if (logprobs.size() != n * static_cast<std::size_t>(num_classes) || frame_utt.size() != n) {
        throw ValueError("score_frame_table: table sizes disagree");
    }
    EvalReport report;
    report.frames_total = static_cast<std::int64_t>(n);

    std::vector<std::vector<double>> pooled(utterance_ids.size(),
                                            std::vector<double>(static_cast<std::size_t>(num_classes), 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = logprobs.data() + i * static_cast<std::size_t>(num_classes);
        int best = 0;
        for (int j = 1; j < num_classes; ++j) {
            if (row[j] > row[best]) best = j;
        }
        if (best != frame_labels[i]) ++report.frames_wrong;
        auto& acc = pooled[static_cast<std::size_t>(frame_utt[i])];
        for (int j = 0; j < num_classes; ++j) acc[static_cast<std::size_t>(j)] += row[j];
    }

    report.utterances_total = static_cast<std::int64_t>(utterance_ids.size());
    for (std::size_t u = 0; u < utterance_ids.size(); ++u) {
        const auto& acc = pooled[u];
        int best = 0;
        for (int j = 1; j < num_classes; ++j) {
            if (acc[static_cast<std::size_t>(j)] > acc[static_cast<std::size_t>(best)]) best = j;
        }
        if (best != utterance_labels[u]) ++report.utterances_wrong;
        report.per_utterance.push_back({utterance_ids[u], utterance_labels[u], best});
    }

    report.fer = report.frames_total > 0
                     ? static_cast<double>(report.frames_wrong) / static_cast<double>(report.frames_total)
                     : 0.0;
    report.cer = report.utterances_total > 0 ? static_cast<double>(report.utterances_wrong) /
                                                   static_cast<double>(report.utterances_total)
                                             : 0.0;
    return report;
}

EvalReport evaluate(Model& model, const FrameDataset& dataset, const EvalOptions& options) {
    const int classes = model.config.num_classes;
    std::vector<double> logprobs(static_cast<std::size_t>(dataset.size()) * static_cast<std::size_t>(classes));
    double loss_sum = 0.0;

    BatchStream stream(dataset, options.batch_size, std::nullopt);
    std::size_t cursor = 0;
    while (auto batch = stream.next()) {
        const Tensor head_out = model.forward(batch->frames, Mode::eval);
        Tensor lp;
        Tensor batch_loss;
        if (model.config.loss == LossKind::softmax) {
            lp = log_softmax_rows(head_out);
            batch_loss = softmax_cross_entropy(head_out, batch->labels);
        } else {
            const Tensor cosines = cosine_logits(head_out, model.classifier_weight, model.config.loss_eps);
            lp = log_softmax_rows(scale(cosines, model.config.scale_s));
            AmSoftmaxParams params{model.config.scale_s, model.config.margin_m, model.config.loss_eps};
            batch_loss = am_softmax_loss(head_out, model.classifier_weight, batch->labels, params);
        }
        std::copy(lp.data().begin(), lp.data().end(),
                  logprobs.begin() + static_cast<std::ptrdiff_t>(cursor * static_cast<std::size_t>(classes)));
        loss_sum += batch_loss.item() * static_cast<double>(batch->labels.size());
        cursor += batch->labels.size();
    }

    EvalReport report = score_frame_table(logprobs, classes, dataset.labels, dataset.utt_index,
                                          dataset.utterance_ids, dataset.utterance_labels);
    report.mean_loss = dataset.size() > 0 ? loss_sum / static_cast<double>(dataset.size()) : 0.0;
    report.skipped = dataset.skipped;
    return report;
}

std::string eval_report_json(const EvalReport& report, const std::vector<std::string>& speakers) {
    auto speaker_name = [&speakers](int label) {
        return label >= 0 && static_cast<std::size_t>(label) < speakers.size() ? speakers[static_cast<std::size_t>(label)]
                                                                               : std::to_string(label);
    };
    nlohmann::json per_utt = nlohmann::json::array();
    for (const auto& d : report.per_utterance) {
        per_utt.push_back({{"utterance", d.utterance_id},
                           {"true", speaker_name(d.truth)},
                           {"predicted", speaker_name(d.predicted)}});
    }
    nlohmann::json j{
        {"fer", report.fer},
        {"cer", report.cer},
        {"mean_loss", report.mean_loss},
        {"frames_total", report.frames_total},
        {"frames_wrong", report.frames_wrong},
        {"utterances_total", report.utterances_total},
        {"utterances_wrong", report.utterances_wrong},
        {"per_utterance", per_utt},
        {"skipped", report.skipped},
    };
    return j.dump(2);
}

}  // namespace amnet
