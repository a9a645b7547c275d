#include "amnet/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "amnet/errors.hpp"

namespace amnet {

namespace {

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

}  // namespace

Manifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
    const std::filesystem::path base = path.has_parent_path() ? path.parent_path() : ".";

    std::string line;
    if (!std::getline(in, line)) throw IoError("manifest '" + path.string() + "' is empty");
    if (strip_cr(line) != "path,speaker,split") {
        throw IoError("manifest '" + path.string() + "' line 1: header must be exactly 'path,speaker,split'");
    }

    Manifest mf;
    std::set<std::string> train_speakers, test_speakers;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string p, speaker, split_tok;
        if (!std::getline(fields, p, ',') || !std::getline(fields, speaker, ',') ||
            !std::getline(fields, split_tok)) {
            throw IoError("manifest line " + std::to_string(line_no) + ": expected 'path,speaker,split'");
        }
        ManifestEntry e;
        std::filesystem::path entry_path(p);
        e.path = entry_path.is_absolute() ? entry_path : base / entry_path;
        e.speaker = speaker;
        if (split_tok == "train") {
            e.split = Split::train;
            train_speakers.insert(speaker);
        } else if (split_tok == "test") {
            e.split = Split::test;
            test_speakers.insert(speaker);
        } else {
            throw IoError("manifest line " + std::to_string(line_no) + ": unknown split token '" + split_tok +
                          "' (expected train or test)");
        }
        if (!std::filesystem::exists(e.path)) {
            throw IoError("manifest line " + std::to_string(line_no) + ": path '" + e.path.string() +
                          "' does not exist");
        }
        mf.entries.push_back(std::move(e));
    }
    if (mf.entries.empty()) throw IoError("manifest '" + path.string() + "' has no entries");

    for (const auto& s : train_speakers) {
        if (!test_speakers.count(s)) {
            throw IoError("manifest coverage: speaker '" + s + "' present in train but not in test");
        }
    }
    for (const auto& s : test_speakers) {
        if (!train_speakers.count(s)) {
            throw IoError("manifest coverage: speaker '" + s + "' present in test but not in train");
        }
    }

    mf.speakers.assign(train_speakers.begin(), train_speakers.end());  // std::set is sorted
    for (std::size_t i = 0; i < mf.speakers.size(); ++i) {
        mf.label_map[mf.speakers[i]] = static_cast<int>(i);
    }
    return mf;
}

}  // namespace amnet
