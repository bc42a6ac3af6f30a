#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace tieline::cli {

/// Hex SHA-1 of "blob <size>\0" followed by the content, as git hashes files.
std::string git_blob_hash(const std::string& content);

/// Throws std::runtime_error when the file cannot be read.
std::string git_blob_hash_file(const std::filesystem::path& path);

struct ManifestEntry {
    std::string role;  // "scenario", "traces", "model", "results", ...
    std::filesystem::path path;
    std::string hash;
};

struct RunManifest {
    std::string command;
    std::filesystem::path scenario;
    unsigned long long seed = 0;
    std::filesystem::path output_dir;
    std::vector<ManifestEntry> inputs;
    std::vector<ManifestEntry> outputs;
    std::string input_hash;  // over the role/hash pairs of all inputs
    std::string started_utc;
    std::string finished_utc;
};

std::string utc_now();

/// Derives input_hash from the inputs list.
std::string combined_hash(const std::vector<ManifestEntry>& entries);

void write_manifest(const std::filesystem::path& file, const RunManifest& m);

/// Hash recorded for `role` among the inputs of the manifest at `file`.
/// Throws std::runtime_error when the manifest or the entry is missing.
std::string manifest_input_hash(const std::filesystem::path& file, const std::string& role);

} // namespace tieline::cli
