#include "mxntt/scheduler.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <tuple>

#include "mxntt/accumulator.hpp"
#include "mxntt/erns.hpp"
#include "mxntt/errors.hpp"

namespace mxntt {

const char* workload_class_name(WorkloadClass cls) {
    return cls == WorkloadClass::Dilithium ? "dilithium" : "bn254";
}

WorkloadClass workload_class_from_name(const std::string& name) {
    if (name == "dilithium") return WorkloadClass::Dilithium;
    if (name == "bn254") return WorkloadClass::BN254;
    throw ParseError("unknown workload class: " + name);
}

const ClassParams& class_params(WorkloadClass cls) {
    static const ClassParams dil = [] {
        ClassParams p;
        p.cls = WorkloadClass::Dilithium;
        p.limbs = 3;
        p.staging_width = accumulator_bound(3, 1ll << 24); // 171
        p.channels = 1;
        p.channel_moduli = {8380417ull};
        p.field = &dilithium_field();
        return p;
    }();
    static const ClassParams bn = [] {
        ClassParams p;
        p.cls = WorkloadClass::BN254;
        p.limbs = 4;
        p.staging_width = accumulator_bound(4, 1ll << 24); // 128
        p.channels = kErnsChannels;
        const auto& mods = ResidueSystem::bn254().moduli();
        p.channel_moduli.assign(mods.begin(), mods.end());
        p.field = &bn254_field();
        return p;
    }();
    return cls == WorkloadClass::Dilithium ? dil : bn;
}

std::int64_t padded_degree(std::int64_t d, std::int64_t staging_width) {
    if (d < 1 || staging_width < 1)
        throw DimensionError("degree and staging width must be positive");
    return (d + staging_width - 1) / staging_width * staging_width;
}

std::vector<BigInt> materialize_coefficients(const Request& req) {
    const ClassParams& params = class_params(req.cls);
    if (req.degree < 1) throw DimensionError("request degree must be positive");
    if (!req.coeffs.empty()) {
        if (static_cast<std::int64_t>(req.coeffs.size()) != req.degree)
            throw DimensionError("explicit coefficient count differs from degree");
        for (const BigInt& c : req.coeffs)
            if (c < 0 || c >= params.field->modulus)
                throw DomainError("explicit coefficient outside the class field");
        return req.coeffs;
    }
    return random_polynomial(*params.field, static_cast<std::size_t>(req.degree),
                             req.coeff_seed)
        .coeffs;
}

void validate_batch(const StackedBatch& batch) {
    if (batch.rows < 1 || batch.members.size() != static_cast<std::size_t>(batch.rows))
        throw DimensionError("batch row count disagrees with member list");
    const ClassParams& params = class_params(batch.cls);
    if (batch.padded_width < 1 || batch.padded_width % params.staging_width != 0)
        throw DimensionError("batch width is not a multiple of the staging width");
    std::int64_t widest = 0;
    for (const Request& m : batch.members) {
        if (m.cls != batch.cls)
            throw DomainError("batch mixes workload classes");
        if (m.degree < 1) throw DimensionError("member degree must be positive");
        widest = std::max(widest, padded_degree(m.degree, params.staging_width));
    }
    // Scheduler-formed batches sit exactly at the widest padded member;
    // isolated replays may widen a solo row to match a batch's dispatch width.
    if (widest > batch.padded_width)
        throw DimensionError("batch width narrower than the widest padded member");
}

std::vector<std::vector<BigInt>> materialize_rows(const StackedBatch& batch) {
    validate_batch(batch);
    std::vector<std::vector<BigInt>> rows;
    rows.reserve(batch.members.size());
    for (const Request& m : batch.members) {
        std::vector<BigInt> row = materialize_coefficients(m);
        row.resize(static_cast<std::size_t>(batch.padded_width), BigInt(0));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<StackedBatch> form_batches(const std::vector<Request>& queue,
                                       const BatchOptions& opts) {
    if (opts.caps.dilithium < 1 || opts.caps.bn254 < 1)
        throw DimensionError("batch caps must be positive");

    std::vector<StackedBatch> out;
    for (WorkloadClass cls : {WorkloadClass::Dilithium, WorkloadClass::BN254}) {
        std::vector<Request> mine;
        for (const Request& r : queue)
            if (r.cls == cls) mine.push_back(r);
        if (mine.empty()) continue;
        if (opts.sort_by_degree)
            std::stable_sort(mine.begin(), mine.end(),
                             [](const Request& a, const Request& b) {
                                 return a.degree > b.degree;
                             });
        const ClassParams& params = class_params(cls);
        const int cap = cls == WorkloadClass::Dilithium ? opts.caps.dilithium
                                                        : opts.caps.bn254;
        std::size_t i = 0;
        while (i < mine.size()) {
            StackedBatch b;
            b.cls = cls;
            const double first_arrival = mine[i].arrival_time;
            while (i < mine.size() &&
                   b.members.size() < static_cast<std::size_t>(cap) &&
                   (b.members.empty() ||
                    mine[i].arrival_time - first_arrival <= opts.flush_timeout)) {
                b.members.push_back(mine[i]);
                ++i;
            }
            b.rows = static_cast<std::int64_t>(b.members.size());
            std::int64_t widest = 0;
            for (const Request& m : b.members)
                widest = std::max(widest, padded_degree(m.degree, params.staging_width));
            b.padded_width = widest;
            out.push_back(std::move(b));
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const StackedBatch& a, const StackedBatch& b) {
                         return a.members.front().arrival_time <
                                b.members.front().arrival_time;
                     });
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i].zone_tag = static_cast<int>(i);
    return out;
}

double padding_waste(const StackedBatch& batch) {
    validate_batch(batch);
    double sum_d = 0;
    for (const Request& m : batch.members) sum_d += static_cast<double>(m.degree);
    return 1.0 - sum_d / (static_cast<double>(batch.rows) *
                          static_cast<double>(batch.padded_width));
}

double staging_overhead(std::int64_t d, std::int64_t staging_width) {
    if (d < 1 || staging_width < 1)
        throw DimensionError("degree and staging width must be positive");
    double passes = static_cast<double>((d + staging_width - 1) / staging_width);
    return (passes - 1.0) / passes;
}

double batch_fill(const StackedBatch& batch) {
    validate_batch(batch);
    double sum_d = 0, max_d = 0;
    for (const Request& m : batch.members) {
        sum_d += static_cast<double>(m.degree);
        max_d = std::max(max_d, static_cast<double>(m.degree));
    }
    return sum_d / (static_cast<double>(batch.rows) * max_d);
}

Occupancy occupancy(const StackedBatch& batch) {
    validate_batch(batch);
    std::int64_t max_d = 0;
    for (const Request& m : batch.members) max_d = std::max(max_d, m.degree);
    Occupancy o;
    // A K slot is populated while any stacked row still has unpadded data
    // there, so the longest member sets the populated span per dispatch.
    o.k_occupancy = static_cast<double>(max_d) / static_cast<double>(batch.padded_width);
    o.m_occupancy = static_cast<double>(batch.rows) / 128.0;
    return o;
}

SliceAssignment co_schedule(std::vector<StackedBatch> batches, int cores) {
    if (cores < 1) throw DimensionError("core count must be positive");
    SliceAssignment a;
    a.cores = cores;
    a.per_core.assign(static_cast<std::size_t>(cores), {});
    std::uint64_t cursor = 0;
    for (std::size_t i = 0; i < batches.size(); ++i) {
        validate_batch(batches[i]);
        const ClassParams& params = class_params(batches[i].cls);
        CoreSlot slot;
        slot.batch_index = i;
        slot.window = i / static_cast<std::size_t>(cores);
        std::uint64_t bytes = static_cast<std::uint64_t>(batches[i].rows) *
                              static_cast<std::uint64_t>(batches[i].padded_width) *
                              static_cast<std::uint64_t>(params.channels) * 4u;
        slot.zone = {cursor, cursor + bytes};
        cursor += bytes;
        a.per_core[i % static_cast<std::size_t>(cores)].push_back(slot);
        a.total_rows += batches[i].rows;
    }
    a.windows = batches.empty()
                    ? 0
                    : (batches.size() + static_cast<std::size_t>(cores) - 1) /
                          static_cast<std::size_t>(cores);
    a.batches = std::move(batches);
    return a;
}

ResiduePowerTable channel_power_table(const PrimeField& field, std::size_t width,
                                      std::uint64_t channel_modulus) {
    if (width < 1) throw DimensionError("width must be positive");
    static std::mutex mu;
    static std::map<std::tuple<std::string, std::size_t, std::uint64_t>,
                    ResiduePowerTable>
        cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(field.name, width, channel_modulus);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    std::size_t order = std::bit_ceil(width);
    BigInt omega = find_root_of_unity(field, order);
    ResiduePowerTable t;
    t.rows = width;
    t.cols = width;
    t.order = order;
    t.pow.reserve(order);
    BigInt cur = 1;
    for (std::size_t k = 0; k < order; ++k) {
        t.pow.push_back(static_cast<std::uint64_t>(cur % channel_modulus));
        cur = cur * omega % field.modulus;
    }
    cache.emplace(key, t);
    return t;
}

namespace {

void append_batch_results(const StackedBatch& batch, const EvalOptions& opts,
                          std::vector<TenantResult>& out) {
    const ClassParams& params = class_params(batch.cls);
    std::vector<std::vector<BigInt>> rows;
    try {
        rows = materialize_rows(batch);
    } catch (const DomainError& e) {
        throw DomainError(std::string("batch zone ") + std::to_string(batch.zone_tag) +
                          ": " + e.what());
    }

    MxuConfig cfg;
    cfg.C = params.limbs;
    cfg.accumulator = opts.accumulator;

    std::vector<BatchStagedResult> per_channel;
    per_channel.reserve(static_cast<std::size_t>(params.channels));
    for (int c = 0; c < params.channels; ++c) {
        std::uint64_t m = params.channel_moduli[static_cast<std::size_t>(c)];
        std::vector<std::vector<std::uint64_t>> res_rows;
        res_rows.reserve(rows.size());
        for (const auto& row : rows) {
            std::vector<std::uint64_t> rr;
            rr.reserve(row.size());
            for (const BigInt& v : row)
                rr.push_back(static_cast<std::uint64_t>(v % m));
            res_rows.push_back(std::move(rr));
        }
        ResiduePowerTable table = channel_power_table(
            *params.field, static_cast<std::size_t>(batch.padded_width), m);
        per_channel.push_back(staged_matrix_ntt_rows(
            res_rows, table, m, cfg,
            static_cast<std::size_t>(params.staging_width), opts.staging));
    }

    for (std::size_t i = 0; i < batch.members.size(); ++i) {
        TenantResult tr;
        tr.tenant_id = batch.members[i].tenant_id;
        tr.cls = batch.cls;
        tr.degree = batch.members[i].degree;
        tr.padded_width = batch.padded_width;
        tr.passes = per_channel.front().passes;
        for (int c = 0; c < params.channels; ++c) {
            const auto& ch = per_channel[static_cast<std::size_t>(c)];
            tr.channel_rows.push_back(ch.rows[i]);
            tr.flagged_cells += ch.row_flagged[i];
            tr.overflow_cells += ch.row_overflow[i];
        }
        out.push_back(std::move(tr));
    }
}

} // namespace

std::vector<TenantResult> batched_evaluate(const SliceAssignment& assignment,
                                           const EvalOptions& opts) {
    std::vector<TenantResult> out;
    for (const auto& core : assignment.per_core)
        for (const CoreSlot& slot : core)
            append_batch_results(assignment.batches[slot.batch_index], opts, out);
    return out;
}

TenantResult evaluate_isolated(const Request& req, std::int64_t padded_width,
                               const EvalOptions& opts) {
    StackedBatch solo;
    solo.cls = req.cls;
    solo.rows = 1;
    solo.padded_width = padded_width;
    solo.members = {req};
    const ClassParams& params = class_params(req.cls);
    if (padded_width < padded_degree(req.degree, params.staging_width))
        throw DimensionError("isolated width narrower than the padded degree");
    std::vector<TenantResult> out;
    append_batch_results(solo, opts, out);
    return std::move(out.front());
}

void IngressQueue::push(Request req) {
    std::lock_guard<std::mutex> lock(mu_);
    items_.push_back(std::move(req));
}

std::vector<Request> IngressQueue::drain() {
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<Request> out(items_.begin(), items_.end());
    items_.clear();
    return out;
}

std::size_t IngressQueue::size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return items_.size();
}

} // namespace mxntt
