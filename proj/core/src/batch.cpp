#include "amnet/batch.hpp"

#include <algorithm>

#include "amnet/audio.hpp"
#include "amnet/rng.hpp"

namespace amnet {

FrameDataset build_frame_dataset(const Manifest& manifest, Split split, const DatasetOptions& options) {
    FrameDataset ds;
    for (const auto& entry : manifest.entries) {
        if (entry.split != split) continue;

        Utterance u = read_wav(entry.path);
        u.speaker_id = entry.speaker;
        u.utterance_id = entry.path.stem().string();

        if (ds.sample_rate == 0) {
            ds.sample_rate = u.sample_rate;
            ds.window = static_cast<std::int64_t>(samples_from_ms(options.window_ms, u.sample_rate));
        } else if (u.sample_rate != ds.sample_rate) {
            throw ValueError("dataset: sample rate " + std::to_string(u.sample_rate) + " of '" +
                             entry.path.string() + "' differs from " + std::to_string(ds.sample_rate));
        }

        if (options.trim) u = energy_trim(u, options.trim_ratio).utterance;
        if (options.normalize) u = normalize_amplitude(u);

        const auto frames = frame_signal(u, options.window_ms, options.hop_ms);
        if (frames.empty()) {
            ds.skipped.push_back(u.utterance_id);
            continue;
        }
        const int label = manifest.label_map.at(entry.speaker);
        const int utt = static_cast<int>(ds.utterance_ids.size());
        ds.utterance_ids.push_back(u.utterance_id);
        ds.utterance_labels.push_back(label);
        for (const auto& frame : frames) {
            ds.data.insert(ds.data.end(), frame.begin(), frame.end());
            ds.labels.push_back(label);
            ds.utt_index.push_back(utt);
        }
    }
    return ds;
}

FrameBatch gather_batch(const FrameDataset& dataset, const std::vector<std::int64_t>& indices) {
    const std::int64_t w = dataset.window;
    FrameBatch batch;
    batch.frames = Tensor({static_cast<std::int64_t>(indices.size()), 1, w});
    double* dst = batch.frames.data().data();
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const double* src = dataset.data.data() + indices[i] * w;
        std::copy(src, src + w, dst + static_cast<std::int64_t>(i) * w);
        batch.labels.push_back(dataset.labels[static_cast<std::size_t>(indices[i])]);
        batch.utterance_ids.push_back(
            dataset.utterance_ids[static_cast<std::size_t>(dataset.utt_index[static_cast<std::size_t>(indices[i])])]);
    }
    return batch;
}

BatchStream::BatchStream(const FrameDataset& dataset, int batch_size,
                         std::optional<std::uint64_t> shuffle_seed)
    : dataset_(&dataset), batch_size_(batch_size) {
    if (batch_size < 1) throw ValueError("batch_size must be at least 1");
    order_.resize(static_cast<std::size_t>(dataset.size()));
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<std::int64_t>(i);
    if (shuffle_seed) {
        Rng rng(*shuffle_seed);
        rng.shuffle(order_);
    }
}

std::size_t BatchStream::num_batches() const {
    return (order_.size() + static_cast<std::size_t>(batch_size_) - 1) / static_cast<std::size_t>(batch_size_);
}

std::optional<FrameBatch> BatchStream::next() {
    if (pos_ >= order_.size()) return std::nullopt;
    const std::size_t end = std::min(order_.size(), pos_ + static_cast<std::size_t>(batch_size_));
    std::vector<std::int64_t> indices(order_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                      order_.begin() + static_cast<std::ptrdiff_t>(end));
    pos_ = end;
    return gather_batch(*dataset_, indices);
}

}  // namespace amnet
