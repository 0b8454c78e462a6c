#include "mxntt/cost.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "mxntt/errors.hpp"

namespace mxntt {

Penalties derived_penalties(const CalibrationConstants& c) {
    Penalties p;
    p.pi = (1.0 / c.v4_bn254) / c.t_gemm;
    p.pi_cf = c.t_vpu / c.t_gemm;
    p.arrival_penalty = p.pi / p.pi_cf;
    return p;
}

double p_algo(std::int64_t d) {
    if (d < 2 || (d & (d - 1)) != 0)
        throw DomainError("algorithmic penalty needs a power-of-two degree >= 2");
    int log2d = 0;
    for (std::int64_t x = d; x > 1; x >>= 1) ++log2d;
    return static_cast<double>(log2d) / static_cast<double>(d);
}

double u_eff(std::int64_t d, double s_mxu) {
    return s_mxu * p_algo(d);
}

double single_tenant_projection(const CalibrationConstants& c) {
    return 1.0 / (c.t_vpu / c.kappa + c.t_gemm_butterfly);
}

std::vector<CostRow> cost_table(const CalibrationConstants& c) {
    auto row = [](std::string hw, std::string wl, int chips, double price,
                  double ops) {
        return CostRow{std::move(hw), std::move(wl), chips, price, ops,
                       ops / (chips * price)};
    };
    return {
        row("A100 (cuZK, PCIe-inc.)", "bn254", c.a100_chips, c.a100_price,
            c.cuzk_bn254),
        row("TPU v4-8", "bn254", c.v4_chips, c.v4_price, c.v4_bn254),
        row("TPU v5e-8", "bn254", c.v5e_chips, c.v5e_price, c.v5e_bn254),
        row("TPU v5p-8 (controlled)", "bn254", c.v5p_chips, c.v5p_price,
            c.v5p_bn254),
        row("TPU v5p-8 (native int32)", "bn254", c.v5p_chips, c.v5p_price,
            c.v5p_bn254_int32),
        row("A100 (cuDilithium proj.)", "dilithium", c.a100_chips, c.a100_price,
            c.cudilithium_projection),
        row("TPU v4-8", "dilithium", c.v4_chips, c.v4_price, c.v4_dilithium),
        row("TPU v5e-8", "dilithium", c.v5e_chips, c.v5e_price, c.v5e_dilithium),
        row("TPU v5p-8", "dilithium", c.v5p_chips, c.v5p_price, c.v5p_dilithium),
    };
}

DeficitFactorization deficit_factorization(const CalibrationConstants& c) {
    const double gpu_bn = c.cuzk_bn254 / (c.a100_chips * c.a100_price);
    const double gpu_dil = c.cudilithium_projection / (c.a100_chips * c.a100_price);
    const double v4_bn = c.v4_bn254 / (c.v4_chips * c.v4_price);
    const double v5p_bn = c.v5p_bn254 / (c.v5p_chips * c.v5p_price);
    const double v5p_int32 = c.v5p_bn254_int32 / (c.v5p_chips * c.v5p_price);
    const double v4_dil = c.v4_dilithium / (c.v4_chips * c.v4_price);
    const double v5p_dil = c.v5p_dilithium / (c.v5p_chips * c.v5p_price);

    DeficitFactorization f;
    f.headline_v5p = gpu_bn / v5p_bn;
    f.headline_v4 = gpu_bn / v4_bn;
    f.spatial_factor = single_tenant_projection(c) / c.v4_bn254;
    f.arithmetic_v5p = f.headline_v5p / f.spatial_factor;
    f.arithmetic_v4 = f.headline_v4 / f.spatial_factor;
    f.int32_deficit = gpu_bn / v5p_int32;
    f.staging_tax_v5p = c.v5p_bn254_int32 / c.v5p_bn254;
    f.dilithium_deficit_v5p = gpu_dil / v5p_dil;
    f.dilithium_deficit_v4 = gpu_dil / v4_dil;
    f.dilithium_baseline = c.cudilithium_verifications * c.ntts_per_verification;
    f.f_band_low = f.dilithium_baseline / c.f_high;
    f.f_band_high = f.dilithium_baseline / c.f_low;
    return f;
}

std::vector<AblationRow> ablation_table(const CalibrationConstants& c) {
    // The batched BN254 row is anchored against the warm-cache baseline; the
    // warm-cache row itself is shown relative to sequential-fused.
    return {
        {"Sequential-Fused (batch=1)", "bn254", c.bn254_sequential, 1.0},
        {"Warm-Cache Time-Sliced", "bn254", c.bn254_warm_cache,
         c.bn254_warm_cache / c.bn254_sequential},
        {"Batched, full", "bn254", c.v4_bn254, c.v4_bn254 / c.bn254_warm_cache},
        {"Sequential-Fused (batch=32)", "dilithium", c.dilithium_sequential_b32,
         1.0},
        {"Batched, full", "dilithium", c.v4_dilithium,
         c.v4_dilithium / c.dilithium_sequential_b32},
    };
}

VpuAnomaly vpu_anomaly(const CalibrationConstants& c) {
    VpuAnomaly a;
    a.v4_per_chip = c.v4_bn254 / c.v4_chips;
    a.v5e_per_chip = c.v5e_bn254 / c.v5e_chips;
    a.per_chip_regression = a.v4_per_chip / a.v5e_per_chip;
    auto ns_per_instr = [&](double fraction, double rate) {
        return fraction * (1.0 / rate) / c.vpu_instructions_per_poly * 1e9;
    };
    a.v4_ns_per_instruction = ns_per_instr(c.vpu_fraction_v4, c.v4_bn254);
    a.v5e_ns_per_instruction = ns_per_instr(c.vpu_fraction_v5e, c.v5e_bn254);
    a.v5p_ns_per_instruction = ns_per_instr(c.vpu_fraction_v5p, c.v5p_bn254);
    a.per_instruction_regression = a.v5e_ns_per_instruction / a.v4_ns_per_instruction;
    a.core_density_ratio =
        static_cast<double>(c.v4_cores_per_chip) / c.v5e_cores_per_chip;
    a.v4_ops_per_dollar = c.v4_bn254 / (c.v4_chips * c.v4_price);
    a.v5e_ops_per_dollar = c.v5e_bn254 / (c.v5e_chips * c.v5e_price);
    return a;
}

std::vector<CrossoverPoint> crossover_scan(const CalibrationConstants& c,
                                           std::int64_t d_min, std::int64_t d_max,
                                           bool kernel_only_gpu) {
    if (d_min < 2 || (d_min & (d_min - 1)) != 0 || d_max < d_min)
        throw DomainError("crossover scan needs a power-of-two degree range");
    const double cal_d = 256.0;
    const double gpu_rate = kernel_only_gpu ? c.sppark_bn254 : c.cuzk_bn254;
    std::vector<CrossoverPoint> points;
    for (std::int64_t d = d_min; d <= d_max; d *= 2) {
        CrossoverPoint p;
        p.degree = d;
        const double dd = static_cast<double>(d);
        p.tpu_ops = c.v4_bn254 * (cal_d / dd) * (cal_d / dd);
        p.gpu_ops = gpu_rate * (cal_d * std::log2(cal_d)) / (dd * std::log2(dd));
        p.advantage = p.gpu_ops / p.tpu_ops;
        points.push_back(p);
    }
    return points;
}

CalibrationConstants perturb_gpu_price(const CalibrationConstants& c, double pct) {
    CalibrationConstants out = c;
    out.a100_price = c.a100_price * (1.0 + pct / 100.0);
    if (!(out.a100_price > 0.0)) throw DomainError("perturbed price must stay positive");
    return out;
}

namespace {

// Published reference tables print three significant figures.
std::string sig3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

} // namespace

std::string cost_report_text(const CalibrationConstants& c) {
    std::ostringstream os;
    char line[256];
    os << "Cost-normalized throughput (modeled from published measurements)\n";
    std::snprintf(line, sizeof line, "%-28s %-10s %5s %9s %14s %14s\n", "Hardware",
                  "Workload", "Chips", "$/chip-hr", "Ops/sec", "Ops per $/hr");
    os << line;
    for (const CostRow& r : cost_table(c)) {
        std::snprintf(line, sizeof line, "%-28s %-10s %5d %9.2f %14s %14s\n",
                      r.hardware.c_str(), r.workload.c_str(), r.chips, r.chip_price,
                      sig3(r.ops_per_sec).c_str(), sig3(r.ops_per_dollar_hr).c_str());
        os << line;
    }

    Penalties p = derived_penalties(c);
    os << "\nPenalties\n";
    std::snprintf(line, sizeof line,
                  "  pi %.4g  pi_cf %.4g  arrival penalty %.4g  kappa %.4g\n", p.pi,
                  p.pi_cf, p.arrival_penalty, c.kappa);
    os << line;
    std::snprintf(line, sizeof line,
                  "  P_algo(256) %.6g  U_eff %.4g%%  single-tenant projection %.6g ops/sec\n",
                  p_algo(256), 100.0 * u_eff(256, c.s_mxu),
                  single_tenant_projection(c));
    os << line;

    DeficitFactorization f = deficit_factorization(c);
    os << "\nDeficit factorization\n";
    std::snprintf(line, sizeof line,
                  "  headline [%s, %s]  spatial %.4g  arithmetic [%s, %s]\n",
                  sig3(f.headline_v5p).c_str(), sig3(f.headline_v4).c_str(),
                  f.spatial_factor, sig3(f.arithmetic_v5p).c_str(),
                  sig3(f.arithmetic_v4).c_str());
    os << line;
    std::snprintf(line, sizeof line,
                  "  native int32 %s  staging tax %.4g  dilithium [%s, %s]\n",
                  sig3(f.int32_deficit).c_str(), f.staging_tax_v5p,
                  sig3(f.dilithium_deficit_v5p).c_str(),
                  sig3(f.dilithium_deficit_v4).c_str());
    os << line;
    std::snprintf(line, sizeof line,
                  "  dilithium baseline %s ops/sec, NTT-share band [%s, %s]\n",
                  sig3(f.dilithium_baseline).c_str(), sig3(f.f_band_low).c_str(),
                  sig3(f.f_band_high).c_str());
    os << line;

    os << "\nComponent ablation (anchored speedups)\n";
    for (const AblationRow& r : ablation_table(c)) {
        std::snprintf(line, sizeof line, "  %-30s %-10s %12s ops/sec  %6.3gx\n",
                      r.configuration.c_str(), r.workload.c_str(),
                      sig3(r.ops_per_sec).c_str(), r.speedup);
        os << line;
    }

    VpuAnomaly a = vpu_anomaly(c);
    os << "\nVPU generation anomaly\n";
    std::snprintf(line, sizeof line,
                  "  per-chip %0.4g vs %0.4g ops/sec (%.3gx regression)\n",
                  a.v5e_per_chip, a.v4_per_chip, a.per_chip_regression);
    os << line;
    std::snprintf(line, sizeof line,
                  "  per-instruction %.4g ns vs %.4g ns (%.3gx), core density %.2gx\n",
                  a.v5e_ns_per_instruction, a.v4_ns_per_instruction,
                  a.per_instruction_regression, a.core_density_ratio);
    os << line;
    std::snprintf(line, sizeof line, "  cost parity %.4g vs %.4g ops per $/hr\n",
                  a.v5e_ops_per_dollar, a.v4_ops_per_dollar);
    os << line;

    os << "\nDegree scaling (modeled; advantage = GPU model / TPU model)\n";
    for (const CrossoverPoint& pt : crossover_scan(c)) {
        std::snprintf(line, sizeof line, "  d=%-6lld tpu %12.4g  gpu %12.4g  advantage %10.4g\n",
                      static_cast<long long>(pt.degree), pt.tpu_ops, pt.gpu_ops,
                      pt.advantage);
        os << line;
    }
    return os.str();
}

std::string cost_report_json(const CalibrationConstants& c) {
    nlohmann::json j;
    j["cost_table"] = nlohmann::json::array();
    for (const CostRow& r : cost_table(c))
        j["cost_table"].push_back({{"hardware", r.hardware},
                                   {"workload", r.workload},
                                   {"chips", r.chips},
                                   {"chip_price", r.chip_price},
                                   {"ops_per_sec", r.ops_per_sec},
                                   {"ops_per_dollar_hr", r.ops_per_dollar_hr}});
    Penalties p = derived_penalties(c);
    j["penalties"] = {{"pi", p.pi},
                      {"pi_cf", p.pi_cf},
                      {"arrival_penalty", p.arrival_penalty},
                      {"kappa", c.kappa}};
    j["p_algo_256"] = p_algo(256);
    j["u_eff_256"] = u_eff(256, c.s_mxu);
    j["single_tenant_projection"] = single_tenant_projection(c);
    DeficitFactorization f = deficit_factorization(c);
    j["deficits"] = {{"headline_v5p", f.headline_v5p},
                     {"headline_v4", f.headline_v4},
                     {"spatial_factor", f.spatial_factor},
                     {"arithmetic_v5p", f.arithmetic_v5p},
                     {"arithmetic_v4", f.arithmetic_v4},
                     {"int32_deficit", f.int32_deficit},
                     {"staging_tax_v5p", f.staging_tax_v5p},
                     {"dilithium_deficit_v5p", f.dilithium_deficit_v5p},
                     {"dilithium_deficit_v4", f.dilithium_deficit_v4},
                     {"dilithium_baseline", f.dilithium_baseline},
                     {"f_band", {f.f_band_low, f.f_band_high}}};
    j["ablation"] = nlohmann::json::array();
    for (const AblationRow& r : ablation_table(c))
        j["ablation"].push_back({{"configuration", r.configuration},
                                 {"workload", r.workload},
                                 {"ops_per_sec", r.ops_per_sec},
                                 {"speedup", r.speedup}});
    VpuAnomaly a = vpu_anomaly(c);
    j["vpu_anomaly"] = {{"v4_per_chip", a.v4_per_chip},
                        {"v5e_per_chip", a.v5e_per_chip},
                        {"per_chip_regression", a.per_chip_regression},
                        {"v4_ns_per_instruction", a.v4_ns_per_instruction},
                        {"v5e_ns_per_instruction", a.v5e_ns_per_instruction},
                        {"v5p_ns_per_instruction", a.v5p_ns_per_instruction},
                        {"per_instruction_regression", a.per_instruction_regression},
                        {"core_density_ratio", a.core_density_ratio},
                        {"v4_ops_per_dollar", a.v4_ops_per_dollar},
                        {"v5e_ops_per_dollar", a.v5e_ops_per_dollar}};
    j["crossover"] = nlohmann::json::array();
    for (const CrossoverPoint& pt : crossover_scan(c))
        j["crossover"].push_back({{"degree", pt.degree},
                                  {"tpu_ops", pt.tpu_ops},
                                  {"gpu_ops", pt.gpu_ops},
                                  {"advantage", pt.advantage}});
    return j.dump(2);
}

} // namespace mxntt
