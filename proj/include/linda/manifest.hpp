#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace linda {

// Reproducibility sidecar written next to each CLI output: the exact
// invocation, input digests, and versions needed to re-run it.
struct RunManifest {
    std::string command;                   // subcommand name
    std::vector<std::string> arguments;    // argv as received
    std::vector<std::pair<std::string, std::string>> input_digests; // path -> fnv1a64 hex
    std::string tool_version;
    std::uint64_t seed = 0;
    bool has_seed = false;
    double wall_seconds = 0.0;

    std::string to_json() const;
};

std::string digest_file_hex(const std::string& path);

// Writes <output_path>.manifest.json.
void write_manifest(const RunManifest& manifest, const std::string& output_path);

} // namespace linda
