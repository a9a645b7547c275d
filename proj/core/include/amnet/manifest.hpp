#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace amnet {

enum class Split { train, test };

struct ManifestEntry {
    std::filesystem::path path;  // resolved against the manifest's directory
    std::string speaker;
    Split split = Split::train;
};

struct Manifest {
    std::vector<ManifestEntry> entries;
    // Speakers sorted lexicographically and mapped to contiguous labels.
    std::map<std::string, int> label_map;
    std::vector<std::string> speakers;  // label -> speaker

    int num_classes() const { return static_cast<int>(speakers.size()); }
};

// Parses a UTF-8 CSV with the exact header "path,speaker,split". Both splits
// must cover identical speaker sets and every path must exist.
Manifest load_manifest(const std::filesystem::path& path);

}  // namespace amnet
