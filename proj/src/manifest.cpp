#include "linda/manifest.hpp"

#include "linda/stats.hpp"
#include "linda/tsv.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>

namespace linda {

std::string digest_file_hex(const std::string& path) {
    const std::string bytes = read_file_bytes(path);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes.data(), bytes.size())));
    return buf;
}

std::string RunManifest::to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["arguments"] = arguments;
    nlohmann::json inputs = nlohmann::json::object();
    for (const auto& [path, digest] : input_digests) inputs[path] = digest;
    j["input_digests"] = inputs;
    j["tool_version"] = tool_version;
    if (has_seed) j["seed"] = seed;
    j["wall_seconds"] = wall_seconds;
    return j.dump(2) + "\n";
}

void write_manifest(const RunManifest& manifest, const std::string& output_path) {
    write_file_bytes(output_path + ".manifest.json", manifest.to_json());
}

} // namespace linda
