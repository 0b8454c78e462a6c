#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <mutex>
#include <string>
#include <vector>

#include "mxntt/bigint.hpp"
#include "mxntt/field.hpp"
#include "mxntt/mxu.hpp"

namespace mxntt {

enum class WorkloadClass { Dilithium, BN254 };

const char* workload_class_name(WorkloadClass cls);
WorkloadClass workload_class_from_name(const std::string& name); // throws ParseError

// Per-class arithmetic shape: limb count, exact staging width for the fp32
// window, and the residue channels a coefficient fans out to.
struct ClassParams {
    WorkloadClass cls;
    int limbs;
    std::int64_t staging_width; // d_max
    int channels;
    std::vector<std::uint64_t> channel_moduli;
    const PrimeField* field;
};

const ClassParams& class_params(WorkloadClass cls);

// ceil(d / staging_width) * staging_width
std::int64_t padded_degree(std::int64_t d, std::int64_t staging_width);

struct Request {
    std::int64_t tenant_id = 0;
    WorkloadClass cls = WorkloadClass::BN254;
    std::int64_t degree = 0;
    double arrival_time = 0.0;
    std::uint64_t coeff_seed = 0;
    std::vector<BigInt> coeffs; // empty: derived deterministically from coeff_seed
};

// Explicit coefficients when present (validated), otherwise a seeded draw.
std::vector<BigInt> materialize_coefficients(const Request& req);

struct StackedBatch {
    WorkloadClass cls = WorkloadClass::BN254;
    std::int64_t rows = 0;         // N_c
    std::int64_t padded_width = 0; // d̂_max, multiple of the class staging width
    int zone_tag = 0;              // workload-zone identifier
    std::vector<Request> members;  // row i holds members[i]
};

// Throws unless row count, padded width, and class homogeneity hold.
void validate_batch(const StackedBatch& batch);

// Zero-padded coefficient rows, N_c x padded_width.
std::vector<std::vector<BigInt>> materialize_rows(const StackedBatch& batch);

struct BatchCaps {
    int dilithium = 8;
    int bn254 = 8;
};

struct BatchOptions {
    BatchCaps caps;
    bool sort_by_degree = false; // best-fit-decreasing within class
    // A partial batch flushes when the next same-class arrival is further than
    // this from the batch's first arrival. Default: flush only at cap or end
    // of queue.
    double flush_timeout = std::numeric_limits<double>::infinity();
};

// Partitions by workload class, then groups greedily in arrival order into
// batches of at most the class cap. Deterministic; returned batches are
// ordered by first-member arrival.
std::vector<StackedBatch> form_batches(const std::vector<Request>& queue,
                                       const BatchOptions& opts = {});

// 1 - sum(d_i) / (N_c * padded_width): the zero fraction of the padded operand.
double padding_waste(const StackedBatch& batch);

// (ceil(d/d_max) - 1) / ceil(d/d_max): fraction of dispatch passes that are
// re-injection tail passes.
double staging_overhead(std::int64_t d, std::int64_t staging_width);

// sum(d_i) / (N_c * max_i d_i): active cells per row against the longest
// unpadded member.
double batch_fill(const StackedBatch& batch);

struct Occupancy {
    double k_occupancy = 0.0; // populated K slots / dispatched K slots
    double m_occupancy = 0.0; // N_c / 128
};

Occupancy occupancy(const StackedBatch& batch);

struct HbmInterval {
    std::uint64_t begin = 0;
    std::uint64_t end = 0; // half-open
};

struct CoreSlot {
    std::size_t batch_index = 0;
    std::size_t window = 0; // dispatch window; one batch per core per window
    HbmInterval zone;
};

struct SliceAssignment {
    int cores = 8;
    std::vector<StackedBatch> batches;
    std::vector<std::vector<CoreSlot>> per_core;
    std::size_t windows = 0;
    std::int64_t total_rows = 0; // N_s
};

// Assigns batches to cores one window at a time, in order; each batch gets a
// disjoint HBM interval sized rows * padded_width * channels * 4 bytes.
SliceAssignment co_schedule(std::vector<StackedBatch> batches, int cores = 8);

struct EvalOptions {
    AccumulatorModel accumulator = AccumulatorModel::fp32_mantissa();
    bool staging = true;
};

struct TenantResult {
    std::int64_t tenant_id = 0;
    WorkloadClass cls = WorkloadClass::BN254;
    std::int64_t degree = 0;
    std::int64_t padded_width = 0;
    std::vector<std::vector<std::uint64_t>> channel_rows; // channels x width
    std::size_t passes = 0;
    std::uint64_t flagged_cells = 0;
    std::uint64_t overflow_cells = 0;
};

// Evaluates every batch row through the staged pipeline, one call per residue
// channel. Results are joined core-major, then window, then row.
std::vector<TenantResult> batched_evaluate(const SliceAssignment& assignment,
                                           const EvalOptions& opts = {});

// The same polynomial evaluated alone at the given width; batched rows must
// match this bit for bit.
TenantResult evaluate_isolated(const Request& req, std::int64_t padded_width,
                               const EvalOptions& opts = {});

// Twiddle powers for an evaluation map of the given width: the root has the
// smallest power-of-two order covering the width, and the field-level powers
// are folded into the channel modulus.
ResiduePowerTable channel_power_table(const PrimeField& field, std::size_t width,
                                      std::uint64_t channel_modulus);

// Ingress point: concurrent producers, one scheduler consumer.
class IngressQueue {
public:
    void push(Request req);
    std::vector<Request> drain();
    std::size_t size() const;

private:
    mutable std::mutex mu_;
    std::deque<Request> items_;
};

} // namespace mxntt
