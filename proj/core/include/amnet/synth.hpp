#pragma once

#include <cstdint>
#include <filesystem>

namespace amnet {

// Writes a reproducible synthetic speaker corpus: each speaker is a seeded
// mixture of three harmonics over a speaker-specific fundamental in
// 80-300 Hz (evenly spaced, gap >= 2 Hz), amplitude-modulated, plus 10%
// white noise. The last 30% of each speaker's utterances form the test
// split. Returns the path of the written manifest.
std::filesystem::path make_synthetic_corpus(int num_speakers, int utterances_per_speaker,
                                            double seconds, int sample_rate, std::uint64_t seed,
                                            const std::filesystem::path& out_dir);

// Fundamental frequency assigned to a speaker by the spacing rule.
double synthetic_fundamental_hz(int speaker, int num_speakers);

}  // namespace amnet
