#include "amnet/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "amnet/audio.hpp"
#include "amnet/errors.hpp"
#include "amnet/rng.hpp"

namespace amnet {

double synthetic_fundamental_hz(int speaker, int num_speakers) {
    const double spacing = num_speakers > 1 ? 220.0 / (num_speakers - 1) : 0.0;
    return 80.0 + spacing * speaker;
}

std::filesystem::path make_synthetic_corpus(int num_speakers, int utterances_per_speaker,
                                            double seconds, int sample_rate, std::uint64_t seed,
                                            const std::filesystem::path& out_dir) {
    if (num_speakers < 2) throw ValueError("synthetic corpus: num_speakers must be at least 2");
    if (utterances_per_speaker < 2) {
        throw ValueError("synthetic corpus: utterances_per_speaker must be at least 2 to cover both splits");
    }
    if (seconds <= 0.0) throw ValueError("synthetic corpus: seconds must be positive");
    if (sample_rate <= 0) throw ValueError("synthetic corpus: sample_rate must be positive");
    const double spacing = 220.0 / (num_speakers - 1);
    if (spacing < 2.0) {
        throw ValueError("synthetic corpus: " + std::to_string(num_speakers) +
                         " speakers cannot keep fundamentals 2 Hz apart in 80-300 Hz");
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "': " + ec.message());

    const std::size_t num_samples = static_cast<std::size_t>(std::llround(seconds * sample_rate));
    const int tests = std::max(1, static_cast<int>(std::llround(0.3 * utterances_per_speaker)));

    std::vector<std::string> manifest_rows;
    for (int spk = 0; spk < num_speakers; ++spk) {
        const double f0 = synthetic_fundamental_hz(spk, num_speakers);

        // Speaker timbre: harmonic amplitudes and modulation rate.
        Rng spk_rng(mix_seed(seed, static_cast<std::uint64_t>(spk)));
        const double amps[3] = {1.0, spk_rng.uniform(0.3, 0.8), spk_rng.uniform(0.1, 0.5)};
        const double mod_hz = spk_rng.uniform(2.0, 8.0);

        for (int utt = 0; utt < utterances_per_speaker; ++utt) {
            Rng utt_rng(mix_seed(seed, static_cast<std::uint64_t>(spk), static_cast<std::uint64_t>(utt) + 1));
            const double phases[3] = {utt_rng.uniform(0.0, 6.283185307179586),
                                      utt_rng.uniform(0.0, 6.283185307179586),
                                      utt_rng.uniform(0.0, 6.283185307179586)};
            const double mod_phase = utt_rng.uniform(0.0, 6.283185307179586);

            std::vector<double> tone(num_samples);
            double peak = 0.0;
            for (std::size_t i = 0; i < num_samples; ++i) {
                const double t = static_cast<double>(i) / sample_rate;
                double v = 0.0;
                for (int h = 0; h < 3; ++h) {
                    v += amps[h] * std::sin(6.283185307179586 * f0 * (h + 1) * t + phases[h]);
                }
                v *= 1.0 + 0.3 * std::sin(6.283185307179586 * mod_hz * t + mod_phase);
                tone[i] = v;
                peak = std::max(peak, std::abs(v));
            }
            const double gain = peak > 0.0 ? 0.85 / peak : 0.0;
            for (std::size_t i = 0; i < num_samples; ++i) {
                tone[i] = gain * tone[i] + 0.1 * utt_rng.uniform(-1.0, 1.0);
            }

            char name[64];
            std::snprintf(name, sizeof(name), "spk%03d_utt%03d.wav", spk, utt);
            write_wav_pcm16(out_dir / name, tone, sample_rate);

            char speaker_id[32];
            std::snprintf(speaker_id, sizeof(speaker_id), "spk%03d", spk);
            const bool is_test = utt >= utterances_per_speaker - tests;
            manifest_rows.push_back(std::string(name) + "," + speaker_id + "," + (is_test ? "test" : "train"));
        }
    }

    const std::filesystem::path manifest_path = out_dir / "manifest.csv";
    std::ofstream mf(manifest_path);
    if (!mf) throw IoError("cannot write manifest '" + manifest_path.string() + "'");
    mf << "path,speaker,split\n";
    for (const auto& row : manifest_rows) mf << row << "\n";
    if (!mf) throw IoError("short write to '" + manifest_path.string() + "'");
    return manifest_path;
}

}  // namespace amnet
