#include "amnet/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "amnet/checkpoint.hpp"
#include "amnet/losses.hpp"
#include "amnet/rng.hpp"
#include "json_util.hpp"

namespace amnet {

void TrainConfig::validate() const {
    if (epochs < 0) throw ValueError("train: epochs must be non-negative");
    if (batch_size < 1) throw ValueError("train: batch_size must be positive");
    if (eval_every < 1) throw ValueError("train: eval_every must be positive");
    if (window_ms <= 0.0 || hop_ms <= 0.0) throw ValueError("train: window_ms and hop_ms must be positive");
}

namespace {

Tensor batch_loss(Model& model, const FrameBatch& batch, Tape& tape) {
    const Tensor head_out = model.forward(batch.frames, Mode::train, &tape);
    if (model.config.loss == LossKind::softmax) {
        return softmax_cross_entropy(head_out, batch.labels, &tape);
    }
    AmSoftmaxParams params{model.config.scale_s, model.config.margin_m, model.config.loss_eps};
    return am_softmax_loss(head_out, model.classifier_weight, batch.labels, params, &tape);
}

std::filesystem::path epoch_checkpoint_path(const std::filesystem::path& run_dir, int epoch) {
    char name[48];
    std::snprintf(name, sizeof(name), "checkpoint_epoch_%04d.amn", epoch);
    return run_dir / name;
}

}  // namespace

TrainResult train(Model& model, const FrameDataset& train_set, const FrameDataset& test_set,
                  const std::vector<std::string>& speakers, const TrainConfig& config,
                  const std::filesystem::path& run_dir) {
    config.validate();
    if (static_cast<int>(speakers.size()) != model.config.num_classes) {
        throw ValueError("train: label map covers " + std::to_string(speakers.size()) +
                         " speakers, model expects " + std::to_string(model.config.num_classes));
    }
    for (int label : train_set.labels) {
        if (label < 0 || label >= model.config.num_classes) {
            throw ValueError("train: dataset label " + std::to_string(label) + " outside the model's classes");
        }
    }

    std::error_code ec;
    std::filesystem::create_directories(run_dir, ec);
    if (ec) throw IoError("cannot create run directory '" + run_dir.string() + "': " + ec.message());
    std::ofstream metrics(run_dir / "metrics.jsonl");
    if (!metrics) throw IoError("cannot write metric log in '" + run_dir.string() + "'");

    Rmsprop optimizer(model.named_parameters(), config.optimizer);
    TrainResult result;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        BatchStream stream(train_set, config.batch_size, mix_seed(config.seed, static_cast<std::uint64_t>(epoch)));
        double loss_sum = 0.0;
        std::int64_t frames_seen = 0;
        int batch_index = 0;
        while (auto batch = stream.next()) {
            Tape tape;
            const Tensor loss = batch_loss(model, *batch, tape);
            const double value = loss.item();
            if (!std::isfinite(value)) {
                throw Error("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batch_index));
            }
            tape.backward(loss);
            optimizer.step();
            loss_sum += value * static_cast<double>(batch->labels.size());
            frames_seen += static_cast<std::int64_t>(batch->labels.size());
            ++batch_index;
        }

        EpochRecord record;
        record.epoch = epoch;
        record.train_loss = frames_seen > 0 ? loss_sum / static_cast<double>(frames_seen) : 0.0;

        const bool eval_point = epoch % config.eval_every == 0 || epoch == config.epochs;
        if (eval_point && test_set.size() > 0) {
            const EvalReport report = evaluate(model, test_set, {config.batch_size});
            record.fer = report.fer;
            record.cer = report.cer;

            char name[32];
            std::snprintf(name, sizeof(name), "eval_epoch_%04d.json", epoch);
            std::ofstream out(run_dir / name);
            out << eval_report_json(report, speakers) << "\n";
            save_checkpoint(model, speakers, epoch_checkpoint_path(run_dir, epoch));
        }

        nlohmann::json line{{"epoch", record.epoch}, {"train_loss", record.train_loss}};
        if (record.fer) line["fer"] = *record.fer;
        if (record.cer) line["cer"] = *record.cer;
        metrics << line.dump() << "\n";
        metrics.flush();
        result.log.push_back(std::move(record));
    }

    result.final_checkpoint = run_dir / "checkpoint_final.amn";
    save_checkpoint(model, speakers, result.final_checkpoint);
    return result;
}

}  // namespace amnet
