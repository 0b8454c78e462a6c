// Microbenchmarks for the host-side reference kernels. These time the
// simulator's own arithmetic on the build machine; they say nothing about
// accelerator throughput, which the cost model treats as published constants.
#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "mxntt/accumulator.hpp"
#include "mxntt/erns.hpp"
#include "mxntt/field.hpp"
#include "mxntt/hlo.hpp"
#include "mxntt/mxu.hpp"
#include "mxntt/scheduler.hpp"
#include "mxntt/tracegen.hpp"

namespace {

void bm_ntt_reference(benchmark::State& state) {
    const mxntt::PrimeField& field = mxntt::field_by_name("dilithium");
    const auto d = static_cast<std::size_t>(state.range(0));
    mxntt::Polynomial poly = mxntt::random_polynomial(field, d, 7);
    mxntt::BigInt omega = mxntt::find_root_of_unity(field, d);
    for (auto _ : state) {
        std::vector<mxntt::BigInt> out =
            mxntt::ntt_reference(field, poly.coeffs, omega);
        benchmark::DoNotOptimize(out);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_ntt_reference)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void bm_staged_channel_ntt(benchmark::State& state) {
    const auto d = static_cast<std::size_t>(state.range(0));
    const mxntt::ClassParams& params =
        mxntt::class_params(mxntt::WorkloadClass::BN254);
    const std::uint64_t m = params.channel_moduli.front();
    std::vector<std::uint64_t> row(d);
    std::uint64_t x = 88172645463325252ull;
    for (auto& v : row) {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        v = x % m;
    }
    mxntt::ResiduePowerTable W =
        mxntt::channel_power_table(*params.field, d, m);
    mxntt::MxuConfig cfg;
    cfg.C = params.limbs;
    for (auto _ : state) {
        mxntt::StagedResult out = mxntt::staged_matrix_ntt(
            row, W, m, cfg, static_cast<std::size_t>(params.staging_width), true);
        benchmark::DoNotOptimize(out);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_staged_channel_ntt)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void bm_residue_full_mul(benchmark::State& state) {
    const mxntt::ResidueSystem& sys = mxntt::ResidueSystem::bn254();
    const mxntt::PrimeField& field = mxntt::field_by_name("bn254");
    mxntt::Polynomial a = mxntt::random_polynomial(field, 64, 11);
    mxntt::Polynomial b = mxntt::random_polynomial(field, 64, 12);
    std::vector<mxntt::ResidueVec> ra, rb;
    for (const mxntt::BigInt& v : a.coeffs) ra.push_back(sys.to_residues(v));
    for (const mxntt::BigInt& v : b.coeffs) rb.push_back(sys.to_residues(v));
    for (auto _ : state) {
        mxntt::FullMulResult r = mxntt::bn254_full_mul(sys, ra, rb);
        benchmark::DoNotOptimize(r);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ra.size()));
}
BENCHMARK(bm_residue_full_mul)->Unit(benchmark::kMicrosecond);

void bm_accumulate_probe(benchmark::State& state) {
    const mxntt::AccumulatorModel model = mxntt::AccumulatorModel::fp32_mantissa();
    const auto target = state.range(0);
    for (auto _ : state) {
        mxntt::ProbeResult r = mxntt::accumulate_probe(target, model);
        benchmark::DoNotOptimize(r);
    }
    state.SetItemsProcessed(state.iterations() * target);
}
BENCHMARK(bm_accumulate_probe)->Arg(1 << 24)->Unit(benchmark::kMillisecond);

void bm_form_batches(benchmark::State& state) {
    mxntt::TraceSpec spec;
    spec.lambda = 4000.0;
    spec.duration = 0.25;
    spec.seed = 5;
    std::vector<mxntt::Request> trace = mxntt::generate_trace(spec);
    for (auto _ : state) {
        std::vector<mxntt::StackedBatch> batches = mxntt::form_batches(trace, {});
        benchmark::DoNotOptimize(batches);
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<std::int64_t>(trace.size()));
}
BENCHMARK(bm_form_batches);

void bm_module_validate(benchmark::State& state) {
    mxntt::StackedBatch batch;
    batch.cls = mxntt::WorkloadClass::BN254;
    batch.rows = 2;
    batch.padded_width = 256;
    batch.zone_tag = 0;
    for (int i = 0; i < 2; ++i) {
        mxntt::Request r;
        r.tenant_id = 9000 + i;
        r.cls = mxntt::WorkloadClass::BN254;
        r.degree = 256;
        r.coeff_seed = 900 + static_cast<std::uint64_t>(i);
        batch.members.push_back(r);
    }
    mxntt::SliceAssignment asg = mxntt::co_schedule({batch}, 8);
    mxntt::IrModule module = mxntt::build_module(
        asg, mxntt::schedule_reductions(256, mxntt::ReductionMode::Eager));
    for (auto _ : state) {
        mxntt::ValidationReport rep = mxntt::validate(module);
        benchmark::DoNotOptimize(rep);
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<std::int64_t>(module.nodes.size()));
}
BENCHMARK(bm_module_validate)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
