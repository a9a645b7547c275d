#pragma once

#include <filesystem>
#include <optional>

#include "amnet/eval.hpp"
#include "amnet/optim.hpp"

namespace amnet {

struct TrainConfig {
    int epochs = 360;
    int batch_size = 128;
    RmspropConfig optimizer;  // lr 0.001, alpha 0.95, eps 1e-7
    std::uint64_t seed = 1234;
    int eval_every = 8;
    // Framing settings recorded for provenance; the datasets arrive framed.
    double window_ms = 200.0;
    double hop_ms = 10.0;

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    std::optional<double> fer;
    std::optional<double> cer;
};

struct TrainResult {
    std::vector<EpochRecord> log;
    std::filesystem::path final_checkpoint;
};

// Per epoch: seeded shuffle, forward, loss, backward, RMSprop step. Every
// eval_every epochs (and at the final epoch) evaluates the test split and
// writes a checkpoint. Writes into run_dir: metrics.jsonl (one JSON record
// per epoch), eval_epoch_*.json, checkpoint_epoch_*.amn, and
// checkpoint_final.amn. A non-finite loss aborts with the epoch/batch
// coordinates.
TrainResult train(Model& model, const FrameDataset& train_set, const FrameDataset& test_set,
                  const std::vector<std::string>& speakers, const TrainConfig& config,
                  const std::filesystem::path& run_dir);

}  // namespace amnet
