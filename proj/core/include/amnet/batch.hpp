#pragma once

#include <optional>
#include <string>
#include <vector>

#include "amnet/manifest.hpp"
#include "amnet/tensor.hpp"

namespace amnet {

struct FrameBatch {
    Tensor frames;  // [B, 1, window]
    std::vector<int> labels;
    std::vector<std::string> utterance_ids;
};

struct DatasetOptions {
    double window_ms = 200.0;
    double hop_ms = 10.0;
    bool normalize = true;
    bool trim = false;
    double trim_ratio = 0.05;
};

// Every frame of one manifest split, materialized eagerly (frame-major flat
// buffer). Utterances that are shorter than one window are skipped and
// recorded.
struct FrameDataset {
    std::int64_t window = 0;
    int sample_rate = 0;
    std::vector<double> data;       // size() * window values
    std::vector<int> labels;        // per frame
    std::vector<int> utt_index;     // per frame -> utterance table index
    std::vector<std::string> utterance_ids;
    std::vector<int> utterance_labels;
    std::vector<std::string> skipped;

    std::int64_t size() const { return static_cast<std::int64_t>(labels.size()); }
};

FrameDataset build_frame_dataset(const Manifest& manifest, Split split, const DatasetOptions& options);

// Emits batches in manifest order, or in a seeded deterministic shuffle.
// The final partial batch is emitted.
class BatchStream {
  public:
    BatchStream(const FrameDataset& dataset, int batch_size, std::optional<std::uint64_t> shuffle_seed);

    std::optional<FrameBatch> next();
    std::size_t num_batches() const;

  private:
    const FrameDataset* dataset_;
    std::vector<std::int64_t> order_;
    int batch_size_;
    std::size_t pos_ = 0;
};

// Gathers the given frame indices into a batch tensor.
FrameBatch gather_batch(const FrameDataset& dataset, const std::vector<std::int64_t>& indices);

}  // namespace amnet
