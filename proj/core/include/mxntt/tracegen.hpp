#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mxntt/scheduler.hpp"

namespace mxntt {

struct TraceSpec {
    double lambda = 4096.0; // aggregate arrivals per second
    double duration = 1.0;  // simulated seconds
    double bn254_share = 0.5;
    std::int64_t degree_min = 64;
    std::int64_t degree_max = 512;
    std::uint64_t seed = 0;
};

// Poisson arrivals with exponential inter-arrival gaps, class and degree drawn
// per spec. Byte-identical output for identical specs.
std::vector<Request> generate_trace(const TraceSpec& spec);

std::string trace_to_jsonl(const std::vector<Request>& trace);
std::vector<Request> trace_from_jsonl(const std::string& text); // throws ParseError

std::string trace_spec_to_json(const TraceSpec& spec);
TraceSpec trace_spec_from_json(const std::string& text); // throws ParseError

// Calibrated service model: polynomials per second at the calibration width,
// scaled by padded width (the VPU work scales with it), minus a flat
// co-residency penalty when the other class shares the part.
struct ServiceModel {
    double bn254_rate = 3663.0;
    std::int64_t bn254_cal_width = 256;
    double bn254_delta = 0.057;
    double dilithium_rate = 110435.0;
    std::int64_t dilithium_cal_width = 342;
    double dilithium_delta = 0.084;
};

struct ReplayConfig {
    BatchCaps caps{16, 16};
    int cores = 8;
    ServiceModel service;
    bool contention = true; // apply deltas when both classes are present
    bool sort_by_degree = false;
    double flush_timeout = std::numeric_limits<double>::infinity();
    // Fraction of batches whose arithmetic is spot-verified end to end.
    double sample_fraction = 0.0;
    std::uint64_t sample_seed = 1;
};

struct ClassReplay {
    WorkloadClass cls = WorkloadClass::BN254;
    std::int64_t requests = 0;
    std::int64_t batches = 0;
    double effective_arrival = 0.0; // requests / duration
    double mean_padded_width = 0.0;
    double utilization = 0.0; // arrival rate x mean modeled service time
    double modeled_throughput = 0.0;
    double isolated_throughput = 0.0;  // contention penalty off
    double interference_delta = 0.0;   // 1 - modeled/isolated
    double batch_fill = 0.0;
    double padding_waste = 0.0;
    double staging_overhead = 0.0;
    double mean_k_occupancy = 0.0;
    double mean_m_occupancy = 0.0;
};

struct ReplayReport {
    double duration = 0.0;
    std::vector<ClassReplay> classes; // classes present, enum order
    double queue_utilization = 0.0;   // bottleneck class
    bool saturated = false;           // some class exceeds capacity
    std::int64_t sampled_batches = 0;
    std::int64_t sampled_rows = 0;
    std::int64_t sample_mismatches = 0;
    double mean_k_occupancy = 0.0; // across classes
};

// Batches the trace in arrival order, prices each class with the calibrated
// service model, and spot-verifies a sampled subset of batches through the
// staged pipeline against a direct modular evaluation. Over-saturation is
// reported, never thrown.
ReplayReport replay(const std::vector<Request>& trace, double duration,
                    const ReplayConfig& cfg = {});

std::string report_to_json(const ReplayReport& report);
std::string report_table(const ReplayReport& report);

} // namespace mxntt
