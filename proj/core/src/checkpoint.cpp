#include "amnet/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "json_util.hpp"

namespace amnet {

namespace {

constexpr char kMagic[4] = {'A', 'M', 'N', '1'};

const char* const kB64Alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string b64_encode(const std::vector<std::uint8_t>& bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 3 <= bytes.size()) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back(kB64Alphabet[(v >> 6) & 63]);
        out.push_back(kB64Alphabet[v & 63]);
        i += 3;
    }
    const std::size_t rest = bytes.size() - i;
    if (rest == 1) {
        const std::uint32_t v = bytes[i] << 16;
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back('=');
        out.push_back('=');
    } else if (rest == 2) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back(kB64Alphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::vector<std::uint8_t> b64_decode(const std::string& text) {
    static const auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    if (text.size() % 4 != 0) throw IoError("checkpoint: malformed base64 block");
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int vals[4];
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = text[i + k];
            if (c == '=') {
                vals[k] = 0;
                ++pad;
            } else {
                vals[k] = value_of(c);
                if (vals[k] < 0 || pad > 0) throw IoError("checkpoint: malformed base64 block");
            }
        }
        const std::uint32_t v = (vals[0] << 18) | (vals[1] << 12) | (vals[2] << 6) | vals[3];
        out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
        if (pad < 2) out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
        if (pad < 1) out.push_back(static_cast<std::uint8_t>(v & 0xff));
    }
    return out;
}

std::vector<std::uint8_t> tensor_to_f32le(const Tensor& t) {
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(t.numel()) * 4);
    std::uint8_t* p = bytes.data();
    for (double v : t.data()) {
        const float f = static_cast<float>(v);
        std::uint32_t u;
        std::memcpy(&u, &f, 4);
        p[0] = static_cast<std::uint8_t>(u & 0xff);
        p[1] = static_cast<std::uint8_t>((u >> 8) & 0xff);
        p[2] = static_cast<std::uint8_t>((u >> 16) & 0xff);
        p[3] = static_cast<std::uint8_t>((u >> 24) & 0xff);
        p += 4;
    }
    return bytes;
}

void f32le_into_tensor(const std::uint8_t* p, Tensor& t) {
    for (double& v : t.data()) {
        const std::uint32_t u = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                                (static_cast<std::uint32_t>(p[2]) << 16) |
                                (static_cast<std::uint32_t>(p[3]) << 24);
        float f;
        std::memcpy(&f, &u, 4);
        v = static_cast<double>(f);
        p += 4;
    }
}

nlohmann::json shape_json(const Tensor& t) {
    nlohmann::json s = nlohmann::json::array();
    for (std::int64_t d : t.shape()) s.push_back(d);
    return s;
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(Model& model, const std::vector<std::string>& labels) {
    if (static_cast<int>(labels.size()) != model.config.num_classes) {
        throw ValueError("checkpoint: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(model.config.num_classes) + " classes");
    }

    nlohmann::json header;
    header["config"] = detail::config_to_json(model.config);
    header["labels"] = labels;

    nlohmann::json buffers = nlohmann::json::array();
    for (auto& [name, t] : model.named_buffers()) {
        buffers.push_back({{"name", name}, {"shape", shape_json(t)}, {"dtype", "f32"},
                           {"data_b64", b64_encode(tensor_to_f32le(t))}});
    }
    header["buffers"] = buffers;

    nlohmann::json directory = nlohmann::json::array();
    std::vector<std::uint8_t> payload;
    std::uint64_t offset = 0;
    for (auto& [name, t] : model.named_parameters()) {
        const std::uint64_t length = static_cast<std::uint64_t>(t.numel()) * 4;
        directory.push_back(
            {{"name", name}, {"shape", shape_json(t)}, {"offset", offset}, {"length", length}});
        const auto bytes = tensor_to_f32le(t);
        payload.insert(payload.end(), bytes.begin(), bytes.end());
        offset += length;
    }
    header["tensors"] = directory;

    const std::string header_text = header.dump();
    std::vector<std::uint8_t> out;
    out.reserve(16 + header_text.size() + payload.size());
    out.insert(out.end(), kMagic, kMagic + 4);
    const std::uint32_t version = kCheckpointVersion;
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((version >> (8 * i)) & 0xff));
    const std::uint64_t hlen = header_text.size();
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((hlen >> (8 * i)) & 0xff));
    out.insert(out.end(), header_text.begin(), header_text.end());
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

std::size_t save_checkpoint(Model& model, const std::vector<std::string>& labels,
                            const std::filesystem::path& path) {
    const auto bytes = serialize_checkpoint(model, labels);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write checkpoint '" + path.string() + "'");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("short write to checkpoint '" + path.string() + "'");
    return bytes.size();
}

LoadedCheckpoint parse_checkpoint(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 16) throw IoError("checkpoint: file shorter than the 16-byte preamble");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw IoError("checkpoint: bad magic (expected AMN1)");
    std::uint32_t version = 0;
    for (int i = 0; i < 4; ++i) version |= static_cast<std::uint32_t>(bytes[4 + i]) << (8 * i);
    if (version != kCheckpointVersion) {
        throw IoError("checkpoint: unsupported format version " + std::to_string(version));
    }
    std::uint64_t hlen = 0;
    for (int i = 0; i < 8; ++i) hlen |= static_cast<std::uint64_t>(bytes[8 + i]) << (8 * i);
    if (16 + hlen > bytes.size()) throw IoError("checkpoint: declared header exceeds file size");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(hlen));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("checkpoint: malformed header JSON: ") + e.what());
    }

    LoadedCheckpoint loaded;
    ModelConfig cfg;
    try {
        cfg = detail::config_from_json(header.at("config"));
        loaded.labels = header.at("labels").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("checkpoint: header missing fields: ") + e.what());
    }
    cfg.validate();
    if (static_cast<int>(loaded.labels.size()) != cfg.num_classes) {
        throw IoError("checkpoint: label map size " + std::to_string(loaded.labels.size()) +
                      " does not match num_classes " + std::to_string(cfg.num_classes));
    }

    loaded.model = build_mobilenet1d(cfg, 0);
    loaded.header_bytes = 16 + static_cast<std::size_t>(hlen);
    loaded.file_bytes = bytes.size();

    // Validate the tensor directory against the rebuilt model before reading
    // any payload bytes.
    auto params = loaded.model.named_parameters();
    const auto& directory = header.at("tensors");
    if (directory.size() != params.size()) {
        throw IoError("checkpoint: tensor directory has " + std::to_string(directory.size()) +
                      " entries, model expects " + std::to_string(params.size()));
    }
    const std::size_t payload_size = bytes.size() - loaded.header_bytes;
    std::uint64_t expected_offset = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& entry = directory.at(i);
        auto& [name, tensor] = params[i];
        if (entry.at("name").get<std::string>() != name) {
            throw IoError("checkpoint: tensor " + std::to_string(i) + " is '" +
                          entry.at("name").get<std::string>() + "', model expects '" + name + "'");
        }
        const auto shp = entry.at("shape").get<std::vector<std::int64_t>>();
        if (shp != tensor.shape()) {
            throw IoError("checkpoint: tensor '" + name + "' shape " + shape_str(shp) +
                          " does not match config-derived shape " + shape_str(tensor.shape()));
        }
        const std::uint64_t offset = entry.at("offset").get<std::uint64_t>();
        const std::uint64_t length = entry.at("length").get<std::uint64_t>();
        if (offset != expected_offset || length != static_cast<std::uint64_t>(tensor.numel()) * 4) {
            throw IoError("checkpoint: tensor '" + name + "' directory offsets are inconsistent");
        }
        expected_offset += length;
    }
    if (expected_offset != payload_size) {
        throw IoError("checkpoint: payload is " + std::to_string(payload_size) + " bytes, directory declares " +
                      std::to_string(expected_offset));
    }
    const std::uint8_t* payload = bytes.data() + loaded.header_bytes;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const std::uint64_t offset = directory.at(i).at("offset").get<std::uint64_t>();
        f32le_into_tensor(payload + offset, params[i].second);
    }

    auto model_buffers = loaded.model.named_buffers();
    const auto& buffers = header.at("buffers");
    if (buffers.size() != model_buffers.size()) {
        throw IoError("checkpoint: buffer table has " + std::to_string(buffers.size()) +
                      " entries, model expects " + std::to_string(model_buffers.size()));
    }
    for (std::size_t i = 0; i < model_buffers.size(); ++i) {
        const auto& entry = buffers.at(i);
        auto& [name, tensor] = model_buffers[i];
        if (entry.at("name").get<std::string>() != name) {
            throw IoError("checkpoint: buffer " + std::to_string(i) + " is '" +
                          entry.at("name").get<std::string>() + "', model expects '" + name + "'");
        }
        const auto raw = b64_decode(entry.at("data_b64").get<std::string>());
        if (raw.size() != static_cast<std::size_t>(tensor.numel()) * 4) {
            throw IoError("checkpoint: buffer '" + name + "' has " + std::to_string(raw.size()) +
                          " bytes, expected " + std::to_string(tensor.numel() * 4));
        }
        f32le_into_tensor(raw.data(), tensor);
    }
    return loaded;
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_checkpoint(bytes);
}

}  // namespace amnet
