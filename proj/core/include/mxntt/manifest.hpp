#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace mxntt {

inline constexpr const char* kToolkitVersion = "0.1.0";

std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

// Reproducibility record emitted next to every run's outputs. Carries no
// timestamps: identical inputs must produce identical manifests.
struct RunManifest {
    std::string subcommand;
    std::string toolkit_version = kToolkitVersion;
    std::map<std::string, std::string> parameters;
    std::map<std::string, std::uint64_t> seeds;
    std::map<std::string, std::string> config_paths;
    std::map<std::string, std::string> output_digests; // artifact -> fnv1a-64 hex
};

std::string manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const std::string& text); // throws ParseError

} // namespace mxntt
