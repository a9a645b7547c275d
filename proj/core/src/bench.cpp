#include "amnet/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "amnet/checkpoint.hpp"
#include "amnet/losses.hpp"
#include "amnet/parallel.hpp"
#include "amnet/rng.hpp"
#include "json_util.hpp"

namespace amnet {

TimingStats summarize_timings(const std::vector<double>& timings_ms) {
    TimingStats stats;
    if (timings_ms.empty()) return stats;
    double sum = 0.0;
    for (double t : timings_ms) sum += t;
    stats.mean_ms = sum / static_cast<double>(timings_ms.size());
    double sq = 0.0;
    for (double t : timings_ms) {
        const double d = t - stats.mean_ms;
        sq += d * d;
    }
    stats.std_ms = std::sqrt(sq / static_cast<double>(timings_ms.size()));
    return stats;
}

BenchReport measure_inference(Model& model, int batches, int batch_size, std::int64_t window_samples,
                              int warmup, std::uint64_t seed) {
    if (batches < 1) throw ValueError("bench: batches must be at least 1");
    if (batch_size < 1) throw ValueError("bench: batch_size must be at least 1");
    if (window_samples < model.config.kernel_size) {
        throw ValueError("bench: window_samples must be at least kernel_size");
    }
    if (warmup < 0) throw ValueError("bench: warmup must be non-negative");

    Tensor frames({batch_size, 1, window_samples});
    Rng rng(seed);
    for (double& v : frames.data()) v = rng.uniform(-1.0, 1.0);

    const bool strict_window = window_samples == model.config.window_samples;
    auto run_once = [&]() {
        const Tensor out = model.forward(frames, Mode::eval, nullptr, strict_window);
        if (model.config.loss == LossKind::am_softmax) {
            const Tensor cosines = cosine_logits(out, model.classifier_weight, model.config.loss_eps);
            (void)cosines;
        }
    };

    for (int i = 0; i < warmup; ++i) run_once();

    std::vector<double> timings(static_cast<std::size_t>(batches));
    for (int i = 0; i < batches; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        run_once();
        const auto t1 = std::chrono::steady_clock::now();
        timings[static_cast<std::size_t>(i)] =
            std::chrono::duration<double, std::milli>(t1 - t0).count();
    }

    const TimingStats stats = summarize_timings(timings);
    BenchReport report;
    report.mean_ms = stats.mean_ms;
    report.std_ms = stats.std_ms;
    report.batches = batches;
    report.batch_size = batch_size;
    report.window_samples = window_samples;
    report.warmup = warmup;
    report.threads = num_threads();
    report.params_total = count_parameters(model);

    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(model.config.num_classes));
    for (int i = 0; i < model.config.num_classes; ++i) {
        char name[16];
        std::snprintf(name, sizeof(name), "spk%03d", i);
        labels.emplace_back(name);
    }
    report.model_bytes = static_cast<std::int64_t>(serialize_checkpoint(model, labels).size());
    return report;
}

InfoReport info_report(const std::filesystem::path& checkpoint_path) {
    LoadedCheckpoint loaded = load_checkpoint(checkpoint_path);
    InfoReport report;
    report.params_total = count_parameters(loaded.model);
    report.model_bytes = static_cast<std::int64_t>(loaded.file_bytes);
    report.header_bytes = static_cast<std::int64_t>(loaded.header_bytes);
    report.param_delta = report.params_total - kReferenceParamCount;
    report.size_mb = static_cast<double>(report.model_bytes) / 1e6;
    report.size_delta_mb = report.size_mb - kReferenceModelMb;
    report.config = loaded.model.config;
    report.num_labels = static_cast<int>(loaded.labels.size());
    return report;
}

std::string bench_report_json(const BenchReport& report) {
    nlohmann::json j{
        {"mean_ms", report.mean_ms},
        {"std_ms", report.std_ms},
        {"batches", report.batches},
        {"batch_size", report.batch_size},
        {"window_samples", report.window_samples},
        {"warmup", report.warmup},
        {"threads", report.threads},
        {"params_total", report.params_total},
        {"model_bytes", report.model_bytes},
        {"std_estimator", report.std_estimator},
        {"timed", report.timed},
        {"reference_mean_ms", kReferenceBatchMs},
    };
    return j.dump(2);
}

std::string info_report_json(const InfoReport& report) {
    nlohmann::json j{
        {"params_total", report.params_total},
        {"param_reference", kReferenceParamCount},
        {"param_delta", report.param_delta},
        {"model_bytes", report.model_bytes},
        {"header_bytes", report.header_bytes},
        {"size_mb", report.size_mb},
        {"size_reference_mb", kReferenceModelMb},
        {"size_delta_mb", report.size_delta_mb},
        {"num_labels", report.num_labels},
        {"config", detail::config_to_json(report.config)},
    };
    return j.dump(2);
}

}  // namespace amnet
