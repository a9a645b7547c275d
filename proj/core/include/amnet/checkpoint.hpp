#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "amnet/model.hpp"

namespace amnet {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout: magic "AMN1" | version u32 LE | header_len u64 LE | JSON header
// (config, label map, batch-norm running stats, tensor directory) | payload
// of trainable parameters as little-endian f32 in directory order.
//
// Values are stored at 32-bit precision, so save -> load -> save is
// byte-identical and a loaded model is an exact 32-bit image of the saved
// one.

std::vector<std::uint8_t> serialize_checkpoint(Model& model, const std::vector<std::string>& labels);

// Returns the number of bytes written.
std::size_t save_checkpoint(Model& model, const std::vector<std::string>& labels,
                            const std::filesystem::path& path);

struct LoadedCheckpoint {
    Model model;
    std::vector<std::string> labels;  // label index -> speaker id
    std::size_t header_bytes = 0;     // preamble + JSON header
    std::size_t file_bytes = 0;
};

LoadedCheckpoint parse_checkpoint(const std::vector<std::uint8_t>& bytes);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace amnet
