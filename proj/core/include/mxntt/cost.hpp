#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mxntt {

// Measured calibration record. Every throughput here is a published
// measurement or stated projection; this module only forms ratios and
// closed-form projections on top of them, it never invents a throughput.
struct CalibrationConstants {
    // Micro-timings, seconds per polynomial at the d=256 calibration point.
    double t_gemm = 15.9e-6;          // pointwise GEMM phase in isolation
    double t_vpu = 227.3e-6;          // contention-free VPU-only reduction
    double t_gemm_butterfly = 2e-6;   // per-stage GEMM amortized over 8 stages
    double kappa = 4.5;               // lazy-reduction amortization, 1764/392

    // Measured slice throughputs, ops/sec.
    double v4_bn254 = 3663.0;
    double v5e_bn254 = 2704.0;
    double v5p_bn254 = 5931.0;
    double v5p_bn254_int32 = 7014.0;  // native-accumulator sensitivity run
    double v4_dilithium = 110435.0;
    double v5e_dilithium = 85231.0;
    double v5p_dilithium = 164822.0;

    // GPU baselines, ops/sec.
    double cuzk_bn254 = 7.2e6;                // PCIe-inclusive
    double cudilithium_projection = 18.3e6;   // 13 NTTs per verification
    double sppark_bn254 = 18.4e6;             // kernel-only, crossover scan
    double cudilithium_verifications = 1.409e6;
    double ntts_per_verification = 13.0;
    double f_low = 0.4;  // NTT share of GPU verification wall-clock
    double f_high = 0.8;

    // On-demand prices per chip-hour and slice chip counts.
    double a100_price = 3.67;
    int a100_chips = 1;
    double v4_price = 3.22;
    int v4_chips = 4;
    double v5e_price = 1.20;
    int v5e_chips = 8;
    double v5p_price = 4.20;
    int v5p_chips = 4;

    // Occupancy and temporal decomposition.
    double s_mxu = 0.92;
    double vpu_fraction_v4 = 0.98314;
    double vpu_fraction_v5e = 0.99285;
    double vpu_fraction_v5p = 0.98815;
    // Per-polynomial VPU instruction retire count implied by the published
    // per-instruction latencies and temporal fractions.
    double vpu_instructions_per_poly = 2112.0;
    int v4_cores_per_chip = 2;
    int v5e_cores_per_chip = 1;

    // Ablation anchors, ops/sec.
    double bn254_sequential = 128.0;
    double bn254_warm_cache = 126.0;
    double dilithium_sequential_b32 = 3400.0;
};

struct Penalties {
    double pi = 0.0;             // end-to-end time / GEMM time
    double pi_cf = 0.0;          // contention-free floor
    double arrival_penalty = 0.0;
};

Penalties derived_penalties(const CalibrationConstants& c);

// (log2 d) / d. Requires d a power of two >= 2.
double p_algo(std::int64_t d);
double u_eff(std::int64_t d, double s_mxu);

// 1 / (t_vpu/kappa + t_gemm_butterfly): slice ops/sec when lazy reduction is
// admissible (single tenant, no isolation).
double single_tenant_projection(const CalibrationConstants& c);

struct CostRow {
    std::string hardware;
    std::string workload;
    int chips = 0;
    double chip_price = 0.0;
    double ops_per_sec = 0.0;
    double ops_per_dollar_hr = 0.0;
};

std::vector<CostRow> cost_table(const CalibrationConstants& c);

struct DeficitFactorization {
    double headline_v5p = 0.0; // GPU ops/$ over TPU ops/$
    double headline_v4 = 0.0;
    double spatial_factor = 0.0;   // single-tenant projection / measured v4
    double arithmetic_v5p = 0.0;   // headline / spatial
    double arithmetic_v4 = 0.0;
    double int32_deficit = 0.0;    // native-accumulator sensitivity
    double staging_tax_v5p = 0.0;  // int32 / controlled throughput
    double dilithium_deficit_v5p = 0.0;
    double dilithium_deficit_v4 = 0.0;
    double dilithium_baseline = 0.0; // verifications x NTTs per verification
    double f_band_low = 0.0;         // baseline / f_high
    double f_band_high = 0.0;        // baseline / f_low
};

DeficitFactorization deficit_factorization(const CalibrationConstants& c);

struct AblationRow {
    std::string configuration;
    std::string workload;
    double ops_per_sec = 0.0;
    double speedup = 0.0; // against that workload's anchored baseline
};

std::vector<AblationRow> ablation_table(const CalibrationConstants& c);

struct VpuAnomaly {
    double v4_per_chip = 0.0;
    double v5e_per_chip = 0.0;
    double per_chip_regression = 0.0;
    double v4_ns_per_instruction = 0.0;
    double v5e_ns_per_instruction = 0.0;
    double v5p_ns_per_instruction = 0.0;
    double per_instruction_regression = 0.0; // v5e over v4
    double core_density_ratio = 0.0;         // v4 cores/chip over v5e
    double v4_ops_per_dollar = 0.0;          // the cost-parity pair
    double v5e_ops_per_dollar = 0.0;
};

VpuAnomaly vpu_anomaly(const CalibrationConstants& c);

struct CrossoverPoint {
    std::int64_t degree = 0;
    double tpu_ops = 0.0; // quadratic decay from the d=256 calibration
    double gpu_ops = 0.0; // d log d decay from the GPU baseline
    double advantage = 0.0;
};

// Power-of-two degrees in [d_min, d_max]. The GPU curve defaults to the
// PCIe-inclusive baseline; the kernel-only one is available for the wider
// scan.
std::vector<CrossoverPoint> crossover_scan(const CalibrationConstants& c,
                                           std::int64_t d_min = 256,
                                           std::int64_t d_max = 16384,
                                           bool kernel_only_gpu = false);

// Scales the GPU instance price by pct percent; deficits shift
// proportionally.
CalibrationConstants perturb_gpu_price(const CalibrationConstants& c, double pct);

std::string cost_report_text(const CalibrationConstants& c);
std::string cost_report_json(const CalibrationConstants& c);

} // namespace mxntt
