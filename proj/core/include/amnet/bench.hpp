#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "amnet/model.hpp"

namespace amnet {

// Architecture-level comparison anchors printed by the info/bench reports.
inline constexpr std::int64_t kReferenceParamCount = 2825942;
inline constexpr double kReferenceModelMb = 11.6;
// Reported reference latency per 128-frame batch on the original hardware;
// informational only, never a pass threshold.
inline constexpr double kReferenceBatchMs = 5.85;

struct TimingStats {
    double mean_ms = 0.0;
    double std_ms = 0.0;  // population standard deviation (divide by N)
};

TimingStats summarize_timings(const std::vector<double>& timings_ms);

struct BenchReport {
    double mean_ms = 0.0;
    double std_ms = 0.0;
    int batches = 0;
    int batch_size = 0;
    std::int64_t window_samples = 0;
    int warmup = 0;
    int threads = 1;
    std::int64_t params_total = 0;
    std::int64_t model_bytes = 0;
    std::string std_estimator = "population";
    // Compute only; the frames are pre-materialized before the timed loop.
    std::string timed = "forward+scoring";
};

// Times `batches` eval-mode forward+scoring passes over one pre-generated
// seeded random batch, after `warmup` untimed passes. Wall time comes from a
// monotonic clock.
BenchReport measure_inference(Model& model, int batches, int batch_size, std::int64_t window_samples,
                              int warmup, std::uint64_t seed);

struct InfoReport {
    std::int64_t params_total = 0;
    std::int64_t model_bytes = 0;
    std::int64_t header_bytes = 0;
    std::int64_t param_delta = 0;   // params_total - reference
    double size_mb = 0.0;
    double size_delta_mb = 0.0;     // size_mb - reference
    ModelConfig config;
    int num_labels = 0;
};

// Parameter/size report for a saved checkpoint, with signed deltas against
// the reference anchors above.
InfoReport info_report(const std::filesystem::path& checkpoint_path);

std::string bench_report_json(const BenchReport& report);
std::string info_report_json(const InfoReport& report);

}  // namespace amnet
