#include <doctest.h>

#include <string>

#include "mxntt/errors.hpp"
#include "mxntt/manifest.hpp"

using namespace mxntt;

TEST_CASE("fnv1a-64 reference vectors") {
    CHECK(fnv1a64("") == 14695981039346656037ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
    CHECK(fnv1a64_hex("") == "cbf29ce484222325");
    CHECK(fnv1a64_hex("a").size() == 16);
    CHECK(fnv1a64_hex("a") != fnv1a64_hex("b"));
}

TEST_CASE("run manifests round-trip and stay deterministic") {
    RunManifest m;
    m.subcommand = "ntt";
    m.parameters["field"] = "bn254";
    m.parameters["degree"] = "256";
    m.seeds["seed"] = 42;
    m.config_paths["spec"] = "trace_spec.json";
    m.output_digests["ntt.json"] = fnv1a64_hex("payload");

    std::string text = manifest_to_json(m);
    RunManifest rt = manifest_from_json(text);
    CHECK(rt.subcommand == m.subcommand);
    CHECK(rt.toolkit_version == kToolkitVersion);
    CHECK(rt.parameters == m.parameters);
    CHECK(rt.seeds == m.seeds);
    CHECK(rt.config_paths == m.config_paths);
    CHECK(rt.output_digests == m.output_digests);
    // Serialization is a pure function; no timestamps, no environment leaks.
    CHECK(manifest_to_json(rt) == text);
}

TEST_CASE("malformed manifests are rejected") {
    CHECK_THROWS_AS(manifest_from_json("not json at all"), ParseError);
    CHECK_THROWS_AS(manifest_from_json("[]"), ParseError);
    CHECK_THROWS_AS(manifest_from_json("{\"subcommand\": 7}"), ParseError);
}
