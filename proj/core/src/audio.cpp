#include "amnet/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "amnet/errors.hpp"

namespace amnet {

namespace {

std::uint32_t read_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16le(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

}  // namespace

Utterance read_wav(const std::filesystem::path& path) {
    const std::vector<unsigned char> bytes = read_file(path);
    auto truncated = [&](std::size_t offset) {
        throw IoError("'" + path.string() + "': truncated WAV at byte offset " + std::to_string(offset));
    };

    if (bytes.size() < 12) truncated(bytes.size());
    if (std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw IoError("'" + path.string() + "' is not a RIFF/WAVE file");
    }

    bool have_fmt = false;
    int sample_rate = 0;
    std::vector<double> samples;
    bool have_data = false;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        char id[5] = {0};
        std::memcpy(id, bytes.data() + pos, 4);
        const std::uint32_t chunk_size = read_u32le(bytes.data() + pos + 4);
        pos += 8;
        if (pos + chunk_size > bytes.size()) truncated(pos);

        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (chunk_size < 16) truncated(pos);
            const std::uint16_t format = read_u16le(bytes.data() + pos);
            const std::uint16_t channels = read_u16le(bytes.data() + pos + 2);
            const std::uint32_t rate = read_u32le(bytes.data() + pos + 4);
            const std::uint16_t bits = read_u16le(bytes.data() + pos + 14);
            if (format != 1) {
                throw IoError("'" + path.string() + "': unsupported format tag " + std::to_string(format) +
                              " (PCM required)");
            }
            if (channels != 1) {
                throw IoError("'" + path.string() + "': unsupported channel count " + std::to_string(channels) +
                              " (mono required)");
            }
            if (bits != 16) {
                throw IoError("'" + path.string() + "': unsupported bit depth " + std::to_string(bits) +
                              " (16-bit required)");
            }
            sample_rate = static_cast<int>(rate);
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            if (!have_fmt) throw IoError("'" + path.string() + "': data chunk precedes fmt chunk");
            const std::size_t count = chunk_size / 2;
            samples.resize(count);
            for (std::size_t i = 0; i < count; ++i) {
                const std::int16_t v =
                    static_cast<std::int16_t>(read_u16le(bytes.data() + pos + 2 * i));
                samples[i] = static_cast<double>(v) / 32768.0;
            }
            have_data = true;
        }
        pos += chunk_size + (chunk_size % 2);  // chunks are 2-byte aligned
    }

    if (!have_fmt) throw IoError("'" + path.string() + "': missing fmt chunk");
    if (!have_data) throw IoError("'" + path.string() + "': missing data chunk");
    if (samples.empty()) throw IoError("'" + path.string() + "': non-empty samples required");
    if (sample_rate <= 0) throw IoError("'" + path.string() + "': sample rate must be positive");

    Utterance u;
    u.samples = std::move(samples);
    u.sample_rate = sample_rate;
    return u;
}

void write_wav_pcm16(const std::filesystem::path& path, const std::vector<double>& samples,
                     int sample_rate) {
    if (samples.empty()) throw ValueError("write_wav_pcm16: non-empty samples required");
    if (sample_rate <= 0) throw ValueError("write_wav_pcm16: sample rate must be positive");

    const std::uint32_t data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
    std::vector<unsigned char> out;
    out.reserve(44 + data_bytes);
    auto put_u32 = [&out](std::uint32_t v) {
        out.push_back(static_cast<unsigned char>(v & 0xff));
        out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
        out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
        out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
    };
    auto put_u16 = [&out](std::uint16_t v) {
        out.push_back(static_cast<unsigned char>(v & 0xff));
        out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
    };
    auto put_tag = [&out](const char* tag) { out.insert(out.end(), tag, tag + 4); };

    put_tag("RIFF");
    put_u32(36 + data_bytes);
    put_tag("WAVE");
    put_tag("fmt ");
    put_u32(16);
    put_u16(1);  // PCM
    put_u16(1);  // mono
    put_u32(static_cast<std::uint32_t>(sample_rate));
    put_u32(static_cast<std::uint32_t>(sample_rate) * 2);  // byte rate
    put_u16(2);                                            // block align
    put_u16(16);                                           // bits per sample
    put_tag("data");
    put_u32(data_bytes);
    for (double s : samples) {
        const double scaled = std::round(std::min(1.0, std::max(-1.0, s)) * 32768.0);
        const std::int16_t v = static_cast<std::int16_t>(std::min(32767.0, std::max(-32768.0, scaled)));
        put_u16(static_cast<std::uint16_t>(v));
    }

    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write '" + path.string() + "'");
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("short write to '" + path.string() + "'");
}

Utterance normalize_amplitude(const Utterance& u) {
    if (u.samples.empty()) throw ValueError("normalize_amplitude: non-empty samples required");
    double peak = 0.0;
    for (double s : u.samples) peak = std::max(peak, std::abs(s));
    Utterance out = u;
    if (peak > 0.0) {
        for (double& s : out.samples) s /= peak;
    }
    return out;
}

std::size_t samples_from_ms(double ms, int sample_rate) {
    return static_cast<std::size_t>(std::llround(ms * sample_rate / 1000.0));
}

std::vector<std::size_t> frame_offsets(std::size_t len, std::size_t window, std::size_t hop) {
    std::vector<std::size_t> offsets;
    if (window == 0 || hop == 0 || len < window) return offsets;
    for (std::size_t off = 0; off + window <= len; off += hop) offsets.push_back(off);
    return offsets;
}

std::vector<std::vector<double>> frame_signal(const Utterance& u, double window_ms, double hop_ms) {
    if (window_ms <= 0.0) throw ValueError("frame_signal: window_ms must be positive");
    if (hop_ms <= 0.0) throw ValueError("frame_signal: hop_ms must be positive");
    const std::size_t window = samples_from_ms(window_ms, u.sample_rate);
    const std::size_t hop = samples_from_ms(hop_ms, u.sample_rate);
    std::vector<std::vector<double>> frames;
    for (std::size_t off : frame_offsets(u.samples.size(), window, hop)) {
        frames.emplace_back(u.samples.begin() + static_cast<std::ptrdiff_t>(off),
                            u.samples.begin() + static_cast<std::ptrdiff_t>(off + window));
    }
    return frames;
}

TrimResult energy_trim(const Utterance& u, double threshold_ratio) {
    if (threshold_ratio <= 0.0 || threshold_ratio >= 1.0) {
        throw ValueError("energy_trim: threshold_ratio must be in (0, 1)");
    }
    const std::size_t block = samples_from_ms(10.0, u.sample_rate);
    if (block == 0 || u.samples.size() < block) return {u, false};

    const std::size_t num_blocks = u.samples.size() / block;
    std::vector<double> rms(num_blocks);
    double peak = 0.0;
    for (std::size_t b = 0; b < num_blocks; ++b) {
        double sq = 0.0;
        for (std::size_t i = b * block; i < (b + 1) * block; ++i) sq += u.samples[i] * u.samples[i];
        rms[b] = std::sqrt(sq / static_cast<double>(block));
        peak = std::max(peak, rms[b]);
    }
    if (peak == 0.0) return {u, true};
    const double threshold = threshold_ratio * peak;

    std::size_t first = 0;
    while (first < num_blocks && rms[first] < threshold) ++first;
    if (first == num_blocks) return {u, true};
    std::size_t last = num_blocks;  // exclusive
    while (last > first && rms[last - 1] < threshold) --last;

    Utterance out = u;
    const std::size_t begin = first * block;
    // The tail keeps any remainder samples that never formed a full block.
    const std::size_t end = last == num_blocks ? u.samples.size() : last * block;
    out.samples.assign(u.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                       u.samples.begin() + static_cast<std::ptrdiff_t>(end));
    return {std::move(out), false};
}

}  // namespace amnet
