#include "mxntt/manifest.hpp"

#include <cstdio>

#include <json.hpp>

#include "mxntt/errors.hpp"

namespace mxntt {

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string fnv1a64_hex(std::string_view data) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(data)));
    return buf;
}

std::string manifest_to_json(const RunManifest& m) {
    nlohmann::json j;
    j["subcommand"] = m.subcommand;
    j["toolkit_version"] = m.toolkit_version;
    j["parameters"] = m.parameters;
    j["seeds"] = m.seeds;
    j["config_paths"] = m.config_paths;
    j["output_digests"] = m.output_digests;
    return j.dump(2);
}

RunManifest manifest_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("manifest malformed: ") + e.what());
    }
    RunManifest m;
    try {
        m.subcommand = j.at("subcommand").get<std::string>();
        m.toolkit_version = j.at("toolkit_version").get<std::string>();
        m.parameters = j.value("parameters", m.parameters);
        m.seeds = j.value("seeds", m.seeds);
        m.config_paths = j.value("config_paths", m.config_paths);
        m.output_digests = j.value("output_digests", m.output_digests);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("manifest fields: ") + e.what());
    }
    return m;
}

} // namespace mxntt
