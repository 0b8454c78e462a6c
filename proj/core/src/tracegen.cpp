#include "mxntt/tracegen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "mxntt/errors.hpp"

namespace mxntt {

namespace {

void check_spec(const TraceSpec& spec) {
    if (!(spec.lambda > 0.0)) throw DomainError("arrival rate must be positive");
    if (!(spec.duration > 0.0)) throw DomainError("trace duration must be positive");
    if (!(spec.bn254_share >= 0.0 && spec.bn254_share <= 1.0))
        throw DomainError("class mixture must be a probability");
    if (spec.degree_min < 1 || spec.degree_max < spec.degree_min)
        throw DomainError("degree range is empty");
}

} // namespace

std::vector<Request> generate_trace(const TraceSpec& spec) {
    check_spec(spec);
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_int_distribution<std::int64_t> deg(spec.degree_min, spec.degree_max);

    std::vector<Request> trace;
    double t = 0.0;
    std::int64_t tenant = 0;
    for (;;) {
        t += -std::log1p(-u01(rng)) / spec.lambda;
        if (t >= spec.duration) break;
        Request req;
        req.tenant_id = tenant++;
        req.cls = u01(rng) < spec.bn254_share ? WorkloadClass::BN254
                                              : WorkloadClass::Dilithium;
        req.degree = deg(rng);
        req.arrival_time = t;
        req.coeff_seed = rng();
        trace.push_back(std::move(req));
    }
    return trace;
}

std::string trace_to_jsonl(const std::vector<Request>& trace) {
    std::ostringstream os;
    for (const Request& req : trace) {
        nlohmann::json j;
        j["tenant"] = req.tenant_id;
        j["class"] = workload_class_name(req.cls);
        j["degree"] = req.degree;
        j["t"] = req.arrival_time;
        j["seed"] = req.coeff_seed;
        if (!req.coeffs.empty()) {
            nlohmann::json arr = nlohmann::json::array();
            for (const BigInt& c : req.coeffs) arr.push_back(c.str());
            j["coeffs"] = std::move(arr);
        }
        os << j.dump() << "\n";
    }
    return os.str();
}

std::vector<Request> trace_from_jsonl(const std::string& text) {
    std::vector<Request> trace;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
            Request req;
            req.tenant_id = j.at("tenant").get<std::int64_t>();
            req.cls = workload_class_from_name(j.at("class").get<std::string>());
            req.degree = j.at("degree").get<std::int64_t>();
            req.arrival_time = j.at("t").get<double>();
            req.coeff_seed = j.at("seed").get<std::uint64_t>();
            if (j.contains("coeffs"))
                for (const auto& c : j["coeffs"])
                    req.coeffs.emplace_back(c.get<std::string>());
            trace.push_back(std::move(req));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("trace line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return trace;
}

std::string trace_spec_to_json(const TraceSpec& spec) {
    nlohmann::json j;
    j["lambda"] = spec.lambda;
    j["duration"] = spec.duration;
    j["bn254_share"] = spec.bn254_share;
    j["degree_min"] = spec.degree_min;
    j["degree_max"] = spec.degree_max;
    j["seed"] = spec.seed;
    return j.dump(2);
}

TraceSpec trace_spec_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("trace spec malformed: ") + e.what());
    }
    TraceSpec spec;
    try {
        spec.lambda = j.value("lambda", spec.lambda);
        spec.duration = j.value("duration", spec.duration);
        spec.bn254_share = j.value("bn254_share", spec.bn254_share);
        spec.degree_min = j.value("degree_min", spec.degree_min);
        spec.degree_max = j.value("degree_max", spec.degree_max);
        spec.seed = j.value("seed", spec.seed);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("trace spec fields: ") + e.what());
    }
    return spec;
}

namespace {

struct ServiceParams {
    double rate;
    std::int64_t cal_width;
    double delta;
};

ServiceParams service_params(const ServiceModel& model, WorkloadClass cls) {
    if (cls == WorkloadClass::BN254)
        return {model.bn254_rate, model.bn254_cal_width, model.bn254_delta};
    return {model.dilithium_rate, model.dilithium_cal_width, model.dilithium_delta};
}

// Direct per-channel evaluation of one tenant row against the pipeline output.
bool row_matches(const Request& req, const TenantResult& res) {
    const ClassParams& params = class_params(req.cls);
    std::vector<BigInt> coeffs = materialize_coefficients(req);
    const std::size_t width = static_cast<std::size_t>(res.padded_width);
    for (int c = 0; c < params.channels; ++c) {
        const std::uint64_t m = params.channel_moduli[static_cast<std::size_t>(c)];
        ResiduePowerTable table = channel_power_table(*params.field, width, m);
        std::vector<std::uint64_t> x(width, 0);
        for (std::size_t i = 0; i < coeffs.size(); ++i)
            x[i] = static_cast<std::uint64_t>(coeffs[i] % m);
        const auto& row = res.channel_rows[static_cast<std::size_t>(c)];
        if (row.size() != width) return false;
        for (std::size_t u = 0; u < width; ++u) {
            std::uint64_t acc = 0;
            for (std::size_t t = 0; t < width; ++t)
                acc = static_cast<std::uint64_t>(
                    (acc + static_cast<unsigned __int128>(x[t]) * table.at(t, u)) % m);
            if (acc != row[u]) return false;
        }
    }
    return true;
}

} // namespace

ReplayReport replay(const std::vector<Request>& trace, double duration,
                    const ReplayConfig& cfg) {
    ReplayReport report;
    report.duration = duration;
    if (trace.empty()) return report;
    if (!(duration > 0.0)) throw DomainError("replay duration must be positive");

    BatchOptions opts;
    opts.caps = cfg.caps;
    opts.sort_by_degree = cfg.sort_by_degree;
    opts.flush_timeout = cfg.flush_timeout;
    std::vector<StackedBatch> batches = form_batches(trace, opts);

    struct Agg {
        std::int64_t requests = 0;
        std::int64_t batches = 0;
        std::int64_t active_cells = 0;   // sum of raw degrees
        std::int64_t padded_cells = 0;   // sum of rows x dispatch width
        std::int64_t fill_cells = 0;     // sum of rows x widest raw degree
        std::int64_t padded_degrees = 0; // per-request padded degree
        double k_sum = 0.0, m_sum = 0.0, stage_sum = 0.0;
    };
    std::map<WorkloadClass, Agg> aggs;
    for (const Request& req : trace) {
        const ClassParams& params = class_params(req.cls);
        Agg& a = aggs[req.cls];
        ++a.requests;
        a.padded_degrees += padded_degree(req.degree, params.staging_width);
    }
    double k_sum_all = 0.0;
    for (const StackedBatch& batch : batches) {
        const ClassParams& params = class_params(batch.cls);
        Agg& a = aggs[batch.cls];
        ++a.batches;
        std::int64_t widest = 0;
        for (const Request& member : batch.members) {
            a.active_cells += member.degree;
            widest = std::max(widest, member.degree);
        }
        a.padded_cells += batch.rows * batch.padded_width;
        a.fill_cells += batch.rows * widest;
        Occupancy occ = occupancy(batch);
        a.k_sum += occ.k_occupancy;
        a.m_sum += occ.m_occupancy;
        a.stage_sum += staging_overhead(batch.padded_width, params.staging_width);
        k_sum_all += occ.k_occupancy;
    }

    const bool mixed = aggs.size() > 1;
    for (const auto& [cls, a] : aggs) {
        ServiceParams sp = service_params(cfg.service, cls);
        const double delta = (mixed && cfg.contention) ? sp.delta : 0.0;
        ClassReplay row;
        row.cls = cls;
        row.requests = a.requests;
        row.batches = a.batches;
        row.effective_arrival = static_cast<double>(a.requests) / duration;
        row.mean_padded_width =
            static_cast<double>(a.padded_degrees) / static_cast<double>(a.requests);
        row.isolated_throughput =
            sp.rate * static_cast<double>(sp.cal_width) / row.mean_padded_width;
        row.modeled_throughput = row.isolated_throughput * (1.0 - delta);
        row.interference_delta = delta;
        row.utilization = row.effective_arrival / row.modeled_throughput;
        row.batch_fill =
            static_cast<double>(a.active_cells) / static_cast<double>(a.fill_cells);
        row.padding_waste =
            1.0 - static_cast<double>(a.active_cells) / static_cast<double>(a.padded_cells);
        row.staging_overhead = a.stage_sum / static_cast<double>(a.batches);
        row.mean_k_occupancy = a.k_sum / static_cast<double>(a.batches);
        row.mean_m_occupancy = a.m_sum / static_cast<double>(a.batches);
        report.classes.push_back(row);
        report.queue_utilization = std::max(report.queue_utilization, row.utilization);
    }
    report.saturated = report.queue_utilization > 1.0;
    report.mean_k_occupancy = k_sum_all / static_cast<double>(batches.size());

    if (cfg.sample_fraction > 0.0) {
        std::mt19937_64 rng(cfg.sample_seed);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        std::vector<StackedBatch> sampled;
        for (const StackedBatch& batch : batches)
            if (u01(rng) < cfg.sample_fraction) sampled.push_back(batch);
        if (sampled.empty()) sampled.push_back(batches.front());

        std::map<std::int64_t, const Request*> by_tenant;
        for (const StackedBatch& batch : sampled)
            for (const Request& member : batch.members)
                by_tenant[member.tenant_id] = &member;

        SliceAssignment assignment = co_schedule(sampled, cfg.cores);
        std::vector<TenantResult> results = batched_evaluate(assignment);
        report.sampled_batches = static_cast<std::int64_t>(sampled.size());
        for (const TenantResult& res : results) {
            ++report.sampled_rows;
            if (!row_matches(*by_tenant.at(res.tenant_id), res))
                ++report.sample_mismatches;
        }
    }
    return report;
}

namespace {

nlohmann::json class_row_json(const ClassReplay& row) {
    nlohmann::json j;
    j["class"] = workload_class_name(row.cls);
    j["requests"] = row.requests;
    j["batches"] = row.batches;
    j["effective_arrival_per_sec"] = row.effective_arrival;
    j["mean_padded_width"] = row.mean_padded_width;
    j["utilization"] = row.utilization;
    j["modeled_ops_per_sec"] = row.modeled_throughput;
    j["isolated_ops_per_sec"] = row.isolated_throughput;
    j["interference_delta"] = row.interference_delta;
    j["batch_fill"] = row.batch_fill;
    j["padding_waste"] = row.padding_waste;
    j["staging_overhead"] = row.staging_overhead;
    j["mean_k_occupancy"] = row.mean_k_occupancy;
    j["mean_m_occupancy"] = row.mean_m_occupancy;
    return j;
}

} // namespace

std::string report_to_json(const ReplayReport& report) {
    nlohmann::json j;
    j["duration_sec"] = report.duration;
    j["classes"] = nlohmann::json::array();
    for (const ClassReplay& row : report.classes)
        j["classes"].push_back(class_row_json(row));
    j["queue_utilization"] = report.queue_utilization;
    j["saturated"] = report.saturated;
    j["mean_k_occupancy"] = report.mean_k_occupancy;
    j["sampled_batches"] = report.sampled_batches;
    j["sampled_rows"] = report.sampled_rows;
    j["sample_mismatches"] = report.sample_mismatches;
    return j.dump(2);
}

std::string report_table(const ReplayReport& report) {
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof line, "%-10s %9s %9s %8s %10s %9s %9s %9s %7s %12s %12s\n",
                  "Class", "Requests", "Arrive/s", "Batches", "MeanWidth",
                  "BatchFill", "PadWaste", "StageOvh", "Util", "Ops/s(model)",
                  "Ops/s(isol)");
    os << line;
    for (const ClassReplay& row : report.classes) {
        std::snprintf(line, sizeof line,
                      "%-10s %9lld %9.1f %8lld %10.1f %8.1f%% %8.1f%% %8.1f%% %7.3f %12.1f %12.1f\n",
                      workload_class_name(row.cls),
                      static_cast<long long>(row.requests), row.effective_arrival,
                      static_cast<long long>(row.batches), row.mean_padded_width,
                      100.0 * row.batch_fill, 100.0 * row.padding_waste,
                      100.0 * row.staging_overhead, row.utilization,
                      row.modeled_throughput, row.isolated_throughput);
        os << line;
    }
    std::snprintf(line, sizeof line,
                  "queue utilization %.4f%s  mean k-occupancy %.2f%%\n",
                  report.queue_utilization, report.saturated ? " (saturated)" : "",
                  100.0 * report.mean_k_occupancy);
    os << line;
    if (report.sampled_batches > 0) {
        std::snprintf(line, sizeof line,
                      "spot checks: %lld batches, %lld rows, %lld mismatches\n",
                      static_cast<long long>(report.sampled_batches),
                      static_cast<long long>(report.sampled_rows),
                      static_cast<long long>(report.sample_mismatches));
        os << line;
    }
    return os.str();
}

} // namespace mxntt
