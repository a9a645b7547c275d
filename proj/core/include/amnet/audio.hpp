#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace amnet {

struct Utterance {
    std::vector<double> samples;  // in [-1, 1]
    int sample_rate = 0;
    std::string speaker_id;
    std::string utterance_id;
};

// Reads a RIFF/WAVE file. PCM 16-bit mono only; unknown chunks are skipped.
// Samples are scaled to [-1, 1) by dividing by 32768.
Utterance read_wav(const std::filesystem::path& path);

// Writes PCM 16-bit little-endian mono; samples are clamped to [-1, 1] and
// rounded to the nearest integer level.
void write_wav_pcm16(const std::filesystem::path& path, const std::vector<double>& samples,
                     int sample_rate);

// Divides by the max absolute amplitude; a no-op on an all-zero signal.
Utterance normalize_amplitude(const Utterance& u);

// Frame start offsets 0, hop, 2*hop, ... while offset + window <= len.
std::vector<std::size_t> frame_offsets(std::size_t len, std::size_t window, std::size_t hop);

// Window/hop sample counts from millisecond settings.
std::size_t samples_from_ms(double ms, int sample_rate);

// Slices the signal into round(window_ms*rate/1000)-sample frames advanced by
// round(hop_ms*rate/1000). Short utterances yield zero frames.
std::vector<std::vector<double>> frame_signal(const Utterance& u, double window_ms, double hop_ms);

struct TrimResult {
    Utterance utterance;
    // Set when every 10 ms block fell below the threshold; the input is
    // returned unmodified in that case.
    bool all_below_threshold = false;
};

// Strips leading/trailing contiguous 10 ms blocks whose RMS falls below
// threshold_ratio times the utterance's peak block RMS.
TrimResult energy_trim(const Utterance& u, double threshold_ratio);

}  // namespace amnet
