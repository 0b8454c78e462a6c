#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <json.hpp>

#include "mxntt/hlo.hpp"
#include "mxntt/manifest.hpp"
#include "mxntt/scheduler.hpp"
#include "mxntt/tracegen.hpp"

using namespace mxntt;
namespace fs = std::filesystem;

namespace {

const char* cli() { return std::getenv("MXNTT_CLI"); }

int run(const std::string& args) {
    std::string cmd = std::string("\"") + cli() + "\" " + args;
    int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    REQUIRE(out.good());
}

fs::path fresh_dir(const std::string& leaf) {
    fs::path dir = fs::temp_directory_path() / "mxntt_cli_tests" / leaf;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

StackedBatch uniform_batch(WorkloadClass cls, int rows, std::int64_t degree,
                           int zone, std::int64_t first_tenant,
                           std::uint64_t seed) {
    StackedBatch b;
    b.cls = cls;
    b.rows = rows;
    b.padded_width = padded_degree(degree, class_params(cls).staging_width);
    b.zone_tag = zone;
    for (int i = 0; i < rows; ++i) {
        Request r;
        r.tenant_id = first_tenant + i;
        r.cls = cls;
        r.degree = degree;
        r.coeff_seed = seed + static_cast<std::uint64_t>(i);
        b.members.push_back(r);
    }
    return b;
}

} // namespace

TEST_CASE("usage errors exit with the usage code") {
    if (!cli()) return;
    CHECK(run("frobnicate >/dev/null 2>&1") == 3);
    CHECK(run("ntt --field f17 --degree 16 >/dev/null 2>&1") == 3); // no seed
    CHECK(run("schedule-replay >/dev/null 2>&1") == 3);             // no spec
}

TEST_CASE("transform run emits a reproducible manifest") {
    if (!cli()) return;
    fs::path dir = fresh_dir("ntt");
    std::string args = "ntt --field f17 --degree 16 --seed 3 --out \"" +
                       dir.string() + "\" >/dev/null";
    REQUIRE(run(args) == 0);

    RunManifest m = manifest_from_json(slurp_file(dir / "manifest.json"));
    CHECK(m.subcommand == "ntt");
    CHECK(m.seeds.at("coeffs") == 3);
    CHECK(m.parameters.at("field") == "f17");
    REQUIRE(m.output_digests.count("ntt.json") == 1);
    // The recorded digest matches the artifact on disk.
    CHECK(m.output_digests.at("ntt.json") ==
          fnv1a64_hex(slurp_file(dir / "ntt.json")));

    nlohmann::json report = nlohmann::json::parse(slurp_file(dir / "ntt.json"));
    CHECK(report.at("degree") == 16);
    CHECK(report.at("mismatches") == 0);

    // Same seed, second directory: byte-identical artifact.
    fs::path dir2 = fresh_dir("ntt2");
    REQUIRE(run("ntt --field f17 --degree 16 --seed 3 --out \"" + dir2.string() +
                "\" >/dev/null") == 0);
    CHECK(slurp_file(dir / "ntt.json") == slurp_file(dir2 / "ntt.json"));
}

TEST_CASE("probe grid output is deterministic") {
    if (!cli()) return;
    fs::path dir = fresh_dir("probe");
    fs::path f1 = dir / "run1.txt";
    fs::path f2 = dir / "run2.txt";
    REQUIRE(run("bench-accumulator > \"" + f1.string() + "\"") == 0);
    REQUIRE(run("bench-accumulator > \"" + f2.string() + "\"") == 0);
    CHECK(slurp_file(f1) == slurp_file(f2));
    CHECK(slurp_file(f1).find("manifest:") != std::string::npos);
}

TEST_CASE("graph audit subcommand separates clean from mutated modules") {
    if (!cli()) return;
    fs::path dir = fresh_dir("validate");

    StackedBatch batch =
        uniform_batch(WorkloadClass::BN254, 2, 256, 0, 6100, 610);
    SliceAssignment asg = co_schedule({batch}, 8);
    IrModule clean = build_module(
        asg, schedule_reductions(batch.padded_width, ReductionMode::Eager));
    spit(dir / "clean.json", module_to_json(clean));

    MutationConfig cfg;
    cfg.mix_precision = 1.0;
    MutationResult mut = adversarial_fuse(clean, 77, cfg);
    REQUIRE(!mut.injected.empty());
    spit(dir / "dirty.json", module_to_json(mut.module));

    CHECK(run("validate-hlo \"" + (dir / "clean.json").string() +
              "\" >/dev/null") == 0);

    fs::path errfile = dir / "stderr.txt";
    CHECK(run("validate-hlo \"" + (dir / "dirty.json").string() +
              "\" >/dev/null 2> \"" + errfile.string() + "\"") == 2);
    CHECK(!slurp_file(errfile).empty()); // offending subgraph goes to stderr

    CHECK(run("validate-hlo /nonexistent/module.json >/dev/null 2>&1") == 1);
    spit(dir / "garbage.json", "{this is not json");
    CHECK(run("validate-hlo \"" + (dir / "garbage.json").string() +
              "\" >/dev/null 2>&1") == 1);
}

TEST_CASE("replay subcommand reproduces a seeded trace byte-identically") {
    if (!cli()) return;
    fs::path dir = fresh_dir("replay");
    TraceSpec spec;
    spec.lambda = 512.0;
    spec.duration = 0.25;
    spec.seed = 11;
    spit(dir / "trace_spec.json", trace_spec_to_json(spec));

    fs::path out1 = dir / "out1";
    fs::path out2 = dir / "out2";
    std::string base = "schedule-replay --spec \"" +
                       (dir / "trace_spec.json").string() + "\" --out \"";
    REQUIRE(run(base + out1.string() + "\" >/dev/null") == 0);
    REQUIRE(run(base + out2.string() + "\" >/dev/null") == 0);
    CHECK(slurp_file(out1 / "replay_report.json") ==
          slurp_file(out2 / "replay_report.json"));

    nlohmann::json rep =
        nlohmann::json::parse(slurp_file(out1 / "replay_report.json"));
    CHECK(rep.contains("queue_utilization"));
    CHECK(rep.at("classes").size() == 2);
    CHECK(slurp_file(out1 / "replay_table.txt").find("Class") !=
          std::string::npos);
}

TEST_CASE("cost report subcommand") {
    if (!cli()) return;
    fs::path dir = fresh_dir("cost");
    fs::path txt = dir / "stdout.txt";
    REQUIRE(run("cost-report --out \"" + dir.string() + "\" > \"" +
                txt.string() + "\"") == 0);
    CHECK(slurp_file(txt).find("Ops per $/hr") != std::string::npos);
    nlohmann::json j =
        nlohmann::json::parse(slurp_file(dir / "cost_report.json"));
    CHECK(j.contains("cost_table"));

    REQUIRE(run("cost-report --perturb-price 10 --out \"" + dir.string() +
                "\" >/dev/null") == 0);
    CHECK(fs::exists(dir / "cost_report_perturbed.json"));
}
