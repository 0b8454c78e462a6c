#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mxntt/accumulator.hpp"
#include "mxntt/cost.hpp"
#include "mxntt/errors.hpp"
#include "mxntt/field.hpp"
#include "mxntt/hlo.hpp"
#include "mxntt/manifest.hpp"
#include "mxntt/mxu.hpp"
#include "mxntt/scheduler.hpp"
#include "mxntt/selftest.hpp"
#include "mxntt/tracegen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitViolation = 2;
constexpr int kExitUsage = 3;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw mxntt::DomainError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Records every artifact in the run manifest; writes files only under --out.
// The manifest itself goes to stdout as one line either way, so two runs can
// be compared without touching the filesystem.
struct Emitter {
    mxntt::RunManifest manifest;
    std::optional<fs::path> out_dir;

    explicit Emitter(std::string subcommand, const std::string& out) {
        manifest.subcommand = std::move(subcommand);
        if (!out.empty()) {
            out_dir = fs::path(out);
            fs::create_directories(*out_dir);
        }
    }

    void param(const std::string& key, const std::string& value) {
        manifest.parameters[key] = value;
    }
    void seed(const std::string& key, std::uint64_t value) {
        manifest.seeds[key] = value;
    }
    void config(const std::string& key, const std::string& path) {
        manifest.config_paths[key] = path;
    }

    void artifact(const std::string& name, const std::string& content) {
        manifest.output_digests[name] = mxntt::fnv1a64_hex(content);
        if (out_dir) {
            std::ofstream f(*out_dir / name, std::ios::binary);
            if (!f) throw mxntt::DomainError("cannot write " + (*out_dir / name).string());
            f << content;
        }
    }

    void finish() {
        std::string pretty = mxntt::manifest_to_json(manifest);
        if (out_dir) {
            std::ofstream f(*out_dir / "manifest.json", std::ios::binary);
            f << pretty;
        }
        std::cout << "manifest: " << json::parse(pretty).dump() << "\n";
    }
};

mxntt::AccumulatorModel model_by_name(const std::string& name) {
    if (name == "fp32") return mxntt::AccumulatorModel::fp32_mantissa();
    if (name == "int32") return mxntt::AccumulatorModel::int32();
    return mxntt::AccumulatorModel::exact_oracle();
}

int default_limbs(const std::string& field_name) {
    if (field_name == "bn254") return 4;
    if (field_name == "dilithium") return 3;
    return 1;
}

struct NttArgs {
    std::string field = "bn254";
    std::int64_t degree = 0;
    int limbs = 0; // 0: field default
    std::string accumulator = "fp32";
    std::string staging = "on";
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string input;
    std::string out;
};

int run_ntt(const NttArgs& a) {
    if (a.input.empty() && !a.seed_given) {
        std::cerr << "ntt: --seed is required when no coefficient file is given\n";
        return kExitUsage;
    }
    const mxntt::PrimeField& field = mxntt::field_by_name(a.field);
    if (a.degree < 1) throw mxntt::DomainError("degree must be positive");
    const int C = a.limbs > 0 ? a.limbs : default_limbs(a.field);
    const mxntt::AccumulatorModel model = model_by_name(a.accumulator);
    const bool staging = a.staging == "on";

    Emitter em("ntt", a.out);
    em.param("field", a.field);
    em.param("degree", std::to_string(a.degree));
    em.param("limbs", std::to_string(C));
    em.param("accumulator", a.accumulator);
    em.param("staging", a.staging);
    if (a.seed_given) em.seed("coeffs", a.seed);
    if (!a.input.empty()) em.config("coeffs", a.input);

    std::vector<mxntt::BigInt> coeffs;
    if (!a.input.empty()) {
        json j = json::parse(slurp(a.input), nullptr, false);
        if (j.is_discarded() || !j.contains("coeffs") || !j["coeffs"].is_array())
            throw mxntt::ParseError("coefficient file must hold {\"coeffs\": [..]}");
        for (const auto& c : j["coeffs"]) coeffs.emplace_back(c.get<std::string>());
        if (coeffs.size() != static_cast<std::size_t>(a.degree))
            throw mxntt::DomainError("coefficient file length does not match --degree");
        for (auto& c : coeffs) c = mxntt::positive_mod(c, field.modulus);
    } else {
        coeffs = mxntt::random_polynomial(field, static_cast<std::size_t>(a.degree),
                                          a.seed)
                     .coeffs;
    }

    // Chunk size: the model's exact window when it has one, otherwise the
    // fp32-shaped geometry so pass structure stays comparable across models.
    const std::int64_t window =
        model.has_window ? model.exact_window : (std::int64_t{1} << 24);
    const std::int64_t d_max = mxntt::accumulator_bound(C, window);
    // A solo transform evaluates at its own degree; staging only splits the
    // contraction into exact-window passes. Padding to a shared dispatch
    // width is a batching concern and lives in the scheduler.
    const std::int64_t width = a.degree;

    std::vector<std::uint64_t> channels;
    if (a.field == "bn254") {
        channels = mxntt::class_params(mxntt::WorkloadClass::BN254).channel_moduli;
    } else {
        channels = {static_cast<std::uint64_t>(field.modulus)};
    }

    // Independent route: integer-lift dot products against the same twiddle
    // powers, reduced per channel only at the end.
    const std::size_t w = static_cast<std::size_t>(width);
    mxntt::BigInt omega = mxntt::find_root_of_unity(field, std::bit_ceil(w));
    mxntt::TwiddleMatrix twiddles(field, omega, w);
    std::vector<mxntt::BigInt> lifted(w);
    for (std::size_t u = 0; u < w; ++u) {
        mxntt::BigInt acc = 0;
        for (std::size_t t = 0; t < static_cast<std::size_t>(a.degree); ++t)
            acc += coeffs[t] * twiddles.entry(t, u);
        lifted[u] = acc;
    }

    mxntt::MxuConfig cfg;
    cfg.C = C;
    cfg.accumulator = model;

    json channel_rows = json::array();
    std::uint64_t flagged = 0, overflow = 0;
    std::size_t passes = 0, mismatches = 0;
    for (std::uint64_t m : channels) {
        std::vector<std::uint64_t> x(w, 0);
        for (std::size_t t = 0; t < static_cast<std::size_t>(a.degree); ++t)
            x[t] = static_cast<std::uint64_t>(coeffs[t] % m);
        mxntt::ResiduePowerTable table = mxntt::channel_power_table(field, w, m);
        mxntt::StagedResult r = mxntt::staged_matrix_ntt(
            x, table, m, cfg, static_cast<std::size_t>(d_max), staging);
        passes = r.passes;
        flagged += r.flagged_cells;
        overflow += r.overflow_cells;
        std::size_t bad = 0;
        for (std::size_t u = 0; u < w; ++u)
            if (static_cast<std::uint64_t>(lifted[u] % m) != r.residues[u]) ++bad;
        mismatches += bad;
        std::string digest;
        {
            std::ostringstream ss;
            for (std::uint64_t v : r.residues) ss << v << ',';
            digest = mxntt::fnv1a64_hex(ss.str());
        }
        channel_rows.push_back({{"modulus", m},
                                {"mismatches", bad},
                                {"digest", digest}});
        std::cout << "channel " << m << ": " << (bad == 0 ? "agrees" : "DISAGREES")
                  << " with the wide-integer route (" << (w - bad) << "/" << w
                  << " outputs)\n";
    }

    // Single-channel fields admit a second, field-level route.
    if (channels.size() == 1) {
        std::vector<mxntt::BigInt> padded = coeffs;
        padded.resize(w, mxntt::BigInt(0));
        std::vector<mxntt::BigInt> field_route =
            mxntt::matrix_ntt_oracle(field, padded, twiddles);
        std::size_t bad = 0;
        for (std::size_t u = 0; u < w; ++u)
            if (mxntt::positive_mod(lifted[u], field.modulus) != field_route[u]) ++bad;
        if (bad != 0) throw mxntt::DomainError("integer-lift and field routes split");
        std::cout << "field-level matrix route agrees at all " << w << " outputs\n";
    }

    std::cout << "width " << width << ", passes " << passes << ", flagged cells "
              << flagged << ", overflow cells " << overflow << "\n";

    json out{{"field", a.field},
             {"degree", a.degree},
             {"width", width},
             {"limbs", C},
             {"accumulator", a.accumulator},
             {"staging", staging},
             {"passes", passes},
             {"flagged_cells", flagged},
             {"overflow_cells", overflow},
             {"mismatches", mismatches},
             {"channels", channel_rows}};
    em.artifact("ntt.json", out.dump(2) + "\n");
    em.finish();

    // With staging on, or an unwindowed model, the pipeline must agree; a
    // windowed model run in one unstaged pass may legitimately diverge, and
    // the report is the product.
    const bool must_match = staging || !model.has_window;
    if (must_match && mismatches != 0) {
        std::cerr << "ntt: " << mismatches << " outputs disagree in a configuration "
                  << "that guarantees exactness\n";
        return kExitDomain;
    }
    return kExitOk;
}

int run_bench_accumulator(const std::string& out) {
    Emitter em("bench-accumulator", out);
    const std::int64_t targets[] = {std::int64_t{1} << 23,
                                    (std::int64_t{1} << 24) - 1,
                                    std::int64_t{1} << 24,
                                    (std::int64_t{1} << 24) + 1,
                                    (std::int64_t{1} << 25) - 1,
                                    std::int64_t{1} << 28,
                                    std::int64_t{1} << 30};
    const char* names[] = {"2^23", "2^24-1", "2^24", "2^24+1", "2^25-1", "2^28",
                           "2^30"};
    const mxntt::AccumulatorModel models[] = {mxntt::AccumulatorModel::fp32_mantissa(),
                                              mxntt::AccumulatorModel::int32(),
                                              mxntt::AccumulatorModel::exact_oracle()};
    std::cout << "target      fp32  int32 exact\n";
    json rows = json::array();
    for (int i = 0; i < 7; ++i) {
        bool exact[3];
        for (int mi = 0; mi < 3; ++mi)
            exact[mi] = mxntt::accumulate_probe(targets[i], models[mi]).exact;
        char line[96];
        std::snprintf(line, sizeof line, "%-11s %-5s %-5s %-5s\n", names[i],
                      exact[0] ? "✓" : "×", exact[1] ? "✓" : "×",
                      exact[2] ? "✓" : "×");
        std::cout << line;
        rows.push_back({{"target", targets[i]},
                        {"fp32", exact[0]},
                        {"int32", exact[1]},
                        {"exact", exact[2]}});
    }
    em.artifact("probe_grid.json", json{{"rows", rows}}.dump(2) + "\n");
    em.finish();
    return kExitOk;
}

struct ReplayArgs {
    std::string spec_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    double sample_fraction = 0.0;
    std::uint64_t sample_seed = 1;
    int cores = 8;
    double flush_timeout = std::numeric_limits<double>::infinity();
    bool emit_trace = false;
    std::string out;
};

int run_schedule_replay(const ReplayArgs& a) {
    std::string spec_text = slurp(a.spec_path);
    json spec_json = json::parse(spec_text, nullptr, false);
    if (spec_json.is_discarded())
        throw mxntt::ParseError("spec file is not valid JSON: " + a.spec_path);
    if (!spec_json.contains("seed") && !a.seed_given) {
        std::cerr << "schedule-replay: the trace spec must carry a seed, or pass --seed\n";
        return kExitUsage;
    }
    mxntt::TraceSpec spec = mxntt::trace_spec_from_json(spec_text);
    if (a.seed_given) spec.seed = a.seed;

    Emitter em("schedule-replay", a.out);
    em.config("spec", a.spec_path);
    em.seed("trace", spec.seed);
    em.seed("sample", a.sample_seed);
    em.param("sample_fraction", std::to_string(a.sample_fraction));
    em.param("cores", std::to_string(a.cores));
    if (std::isfinite(a.flush_timeout))
        em.param("flush_timeout", std::to_string(a.flush_timeout));

    std::vector<mxntt::Request> trace = mxntt::generate_trace(spec);
    mxntt::ReplayConfig cfg;
    cfg.cores = a.cores;
    cfg.sample_fraction = a.sample_fraction;
    cfg.sample_seed = a.sample_seed;
    cfg.flush_timeout = a.flush_timeout;
    mxntt::ReplayReport report = mxntt::replay(trace, spec.duration, cfg);

    std::cout << mxntt::report_table(report);
    em.artifact("replay_report.json", mxntt::report_to_json(report));
    em.artifact("replay_table.txt", mxntt::report_table(report));
    if (a.emit_trace) em.artifact("trace.jsonl", mxntt::trace_to_jsonl(trace));
    em.finish();
    return kExitOk;
}

int run_validate_hlo(const std::string& path, const std::string& out) {
    Emitter em("validate-hlo", out);
    em.config("module", path);
    mxntt::IrModule m = mxntt::module_from_json(slurp(path));
    mxntt::ValidationReport vr = mxntt::validate(m);

    json violations = json::array();
    for (const mxntt::Violation& v : vr.violations) {
        violations.push_back({{"rule", rule_name(v.rule)},
                              {"nodes", v.nodes},
                              {"subgraph", v.subgraph}});
    }
    json out_json{{"ok", vr.ok},
                  {"node_count", vr.node_count},
                  {"violations", violations}};
    em.artifact("validation.json", out_json.dump(2) + "\n");

    std::cout << "nodes: " << vr.node_count << ", violations: " << vr.violations.size()
              << ", " << vr.validation_seconds * 1e3 << " ms\n";
    em.finish();
    if (!vr.ok) {
        for (const mxntt::Violation& v : vr.violations)
            std::cerr << rule_name(v.rule) << ":\n" << v.subgraph << "\n";
        return kExitViolation;
    }
    return kExitOk;
}

int run_cost_report(double perturb_pct, bool perturb_given, const std::string& out) {
    Emitter em("cost-report", out);
    mxntt::CalibrationConstants c;
    std::cout << mxntt::cost_report_text(c);
    em.artifact("cost_report.json", mxntt::cost_report_json(c));
    em.artifact("cost_report.txt", mxntt::cost_report_text(c));

    if (perturb_given) {
        em.param("perturb_price_pct", std::to_string(perturb_pct));
        mxntt::CalibrationConstants p = mxntt::perturb_gpu_price(c, perturb_pct);
        mxntt::DeficitFactorization base = mxntt::deficit_factorization(c);
        mxntt::DeficitFactorization moved = mxntt::deficit_factorization(p);
        char line[160];
        std::cout << "\nGPU price sensitivity (" << perturb_pct << "%)\n";
        std::snprintf(line, sizeof line,
                      "  headline deficit vs v5p: %10.2f -> %10.2f (x%.4f)\n",
                      base.headline_v5p, moved.headline_v5p,
                      moved.headline_v5p / base.headline_v5p);
        std::cout << line;
        std::snprintf(line, sizeof line,
                      "  headline deficit vs v4:  %10.2f -> %10.2f (x%.4f)\n",
                      base.headline_v4, moved.headline_v4,
                      moved.headline_v4 / base.headline_v4);
        std::cout << line;
        em.artifact("cost_report_perturbed.json", mxntt::cost_report_json(p));
    }
    em.finish();
    return kExitOk;
}

int run_selftest(const std::string& out) {
    Emitter em("selftest", out);
    mxntt::AcceptanceReport rep = mxntt::run_acceptance(&std::cout);
    json criteria = json::array();
    for (const mxntt::CriterionResult& r : rep.criteria) {
        criteria.push_back({{"id", r.id},
                            {"name", r.name},
                            {"passed", r.passed},
                            {"detail", r.detail}});
    }
    em.artifact("selftest.json",
                json{{"all_passed", rep.all_passed}, {"criteria", criteria}}.dump(2) +
                    "\n");
    em.finish();
    return rep.all_passed ? kExitOk : kExitDomain;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Limb-decomposed matrix-form NTT simulator and analysis toolkit"};
    app.require_subcommand(1);

    NttArgs ntt_args;
    auto* ntt = app.add_subcommand(
        "ntt", "Evaluate a polynomial through the staged pipeline and oracles");
    ntt->add_option("--field", ntt_args.field)
        ->check(CLI::IsMember({"f17", "dilithium", "bn254"}));
    ntt->add_option("--degree", ntt_args.degree)->required();
    ntt->add_option("--limbs", ntt_args.limbs)->check(CLI::Range(1, 8));
    ntt->add_option("--accumulator", ntt_args.accumulator)
        ->check(CLI::IsMember({"fp32", "int32", "exact"}));
    ntt->add_option("--staging", ntt_args.staging)
        ->check(CLI::IsMember({"on", "off"}));
    auto* ntt_seed = ntt->add_option("--seed", ntt_args.seed);
    ntt->add_option("input", ntt_args.input, "coefficient JSON file");
    ntt->add_option("--out", ntt_args.out, "artifact directory");

    std::string bench_out;
    auto* bench = app.add_subcommand("bench-accumulator",
                                     "Print the exactness probe grid");
    bench->add_option("--out", bench_out, "artifact directory");

    ReplayArgs replay_args;
    auto* rep = app.add_subcommand("schedule-replay",
                                   "Generate and replay an arrival trace");
    rep->add_option("--spec", replay_args.spec_path)->required();
    auto* rep_seed = rep->add_option("--seed", replay_args.seed);
    rep->add_option("--sample-fraction", replay_args.sample_fraction)
        ->check(CLI::Range(0.0, 1.0));
    rep->add_option("--sample-seed", replay_args.sample_seed);
    rep->add_option("--cores", replay_args.cores)->check(CLI::Range(1, 64));
    rep->add_option("--flush-timeout", replay_args.flush_timeout,
                    "flush partial batches older than this many seconds")
        ->check(CLI::PositiveNumber);
    rep->add_flag("--emit-trace", replay_args.emit_trace);
    rep->add_option("--out", replay_args.out, "artifact directory");

    std::string validate_path, validate_out;
    auto* val = app.add_subcommand("validate-hlo",
                                   "Check an IR module against the separation rules");
    val->add_option("module", validate_path)->required();
    val->add_option("--out", validate_out, "artifact directory");

    double perturb_pct = 0.0;
    std::string cost_out;
    auto* cost = app.add_subcommand("cost-report", "Print the derived cost tables");
    auto* perturb = cost->add_option("--perturb-price", perturb_pct,
                                     "scale the GPU price by this percentage");
    cost->add_option("--out", cost_out, "artifact directory");

    std::string selftest_out;
    auto* self = app.add_subcommand("selftest", "Run the acceptance battery");
    self->add_option("--out", selftest_out, "artifact directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    ntt_args.seed_given = ntt_seed->count() > 0;
    replay_args.seed_given = rep_seed->count() > 0;

    try {
        if (ntt->parsed()) return run_ntt(ntt_args);
        if (bench->parsed()) return run_bench_accumulator(bench_out);
        if (rep->parsed()) return run_schedule_replay(replay_args);
        if (val->parsed()) return run_validate_hlo(validate_path, validate_out);
        if (cost->parsed())
            return run_cost_report(perturb_pct, perturb->count() > 0, cost_out);
        if (self->parsed()) return run_selftest(selftest_out);
    } catch (const mxntt::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const mxntt::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    }
    return kExitUsage;
}
