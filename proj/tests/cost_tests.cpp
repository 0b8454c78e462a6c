#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "mxntt/cost.hpp"
#include "mxntt/errors.hpp"

using namespace mxntt;

namespace {

double rel_err(double got, double want) {
    return std::abs(got - want) / std::abs(want);
}

} // namespace

TEST_CASE("cost table reproduces the published ops-per-dollar grid") {
    CalibrationConstants c;
    std::vector<CostRow> table = cost_table(c);
    REQUIRE(table.size() == 9);

    struct Ref {
        const char* hw_substr;
        const char* wl;
        double value;
    };
    // Published ops-per-dollar-hour references, in table order.
    const Ref refs[] = {
        {"A100", "bn254", 1.96e6},  {"v4", "bn254", 284.0},
        {"v5e", "bn254", 282.0},    {"v5p", "bn254", 353.0},
        {"int32", "bn254", 418.0},  {"A100", "dilithium", 4.99e6},
        {"v4", "dilithium", 8574.0}, {"v5e", "dilithium", 8878.0},
        {"v5p", "dilithium", 9811.0},
    };
    for (std::size_t i = 0; i < 9; ++i) {
        const CostRow& got = table[i];
        const Ref& r = refs[i];
        INFO("row ", i, ": ", got.hardware, "/", got.workload);
        CHECK(got.hardware.find(r.hw_substr) != std::string::npos);
        CHECK(got.workload == r.wl);
        CHECK(rel_err(got.ops_per_dollar_hr, r.value) < 0.01);
        // Each cell is throughput divided by the slice's hourly price.
        CHECK(got.ops_per_dollar_hr ==
              doctest::Approx(got.ops_per_sec / (got.chips * got.chip_price)));
    }
}

TEST_CASE("temporal penalties") {
    CalibrationConstants c;
    Penalties p = derived_penalties(c);
    CHECK(p.pi == doctest::Approx(17.172).epsilon(0.003));
    CHECK(p.pi_cf == doctest::Approx(14.296).epsilon(0.003));
    CHECK(p.arrival_penalty == doctest::Approx(1.2012).epsilon(0.05));
    CHECK(p.pi / p.pi_cf == doctest::Approx(p.arrival_penalty));
}

TEST_CASE("algorithmic peak fraction") {
    CHECK(p_algo(256) == 0.03125);
    CHECK(p_algo(1024) == 10.0 / 1024.0);
    CHECK(u_eff(256, 0.92) == doctest::Approx(0.02875).epsilon(1e-12));
    CHECK_THROWS_AS(p_algo(100), DomainError);
    CHECK_THROWS_AS(p_algo(1), DomainError);
}

TEST_CASE("single-tenant projection") {
    CalibrationConstants c;
    double proj = single_tenant_projection(c);
    CHECK(proj == doctest::Approx(19043.586).epsilon(1e-6));
    CHECK(proj > 18900.0);
    CHECK(proj < 19200.0);
    // 1 / (t_vpu / kappa + t_gemm_butterfly), from the header's contract.
    CHECK(proj == doctest::Approx(1.0 / (c.t_vpu / c.kappa + c.t_gemm_butterfly)));
}

TEST_CASE("deficit factorization") {
    CalibrationConstants c;
    DeficitFactorization d = deficit_factorization(c);
    CHECK(rel_err(d.headline_v5p, 5558.0) < 0.005);
    CHECK(rel_err(d.headline_v4, 6908.0) < 0.005);
    // Factorized forms: spatial x arithmetic.
    CHECK(d.spatial_factor == doctest::Approx(5.19).epsilon(0.01));
    CHECK(rel_err(d.arithmetic_v5p * d.spatial_factor, d.headline_v5p) < 1e-9);
    CHECK(rel_err(d.arithmetic_v4 * d.spatial_factor, d.headline_v4) < 1e-9);
    CHECK(d.arithmetic_v5p == doctest::Approx(1071.0).epsilon(0.005));
    CHECK(d.arithmetic_v4 == doctest::Approx(1331.0).epsilon(0.005));
    CHECK(rel_err(d.int32_deficit, 4693.0) < 0.005);
    CHECK(d.staging_tax_v5p == doctest::Approx(7014.0 / 5931.0).epsilon(1e-9));
    CHECK(rel_err(d.dilithium_deficit_v5p, 508.0) < 0.01);
    CHECK(rel_err(d.dilithium_deficit_v4, 582.0) < 0.01);
    CHECK(rel_err(d.dilithium_baseline, 18.3e6) < 0.01);
    CHECK(d.dilithium_baseline == doctest::Approx(1.409e6 * 13.0));
    CHECK(rel_err(d.f_band_low, 22.8e6) < 0.01);
    CHECK(rel_err(d.f_band_high, 45.7e6) < 0.01);
    CHECK(d.f_band_low == doctest::Approx(d.dilithium_baseline / 0.8));
    CHECK(d.f_band_high == doctest::Approx(d.dilithium_baseline / 0.4));
}

TEST_CASE("ablation ladder anchors") {
    CalibrationConstants c;
    std::vector<AblationRow> rows = ablation_table(c);
    REQUIRE(rows.size() >= 5);
    // BN254 ladder: sequential baseline, warm-cache, full pipeline.
    std::vector<const AblationRow*> bn;
    std::vector<const AblationRow*> dil;
    for (const AblationRow& r : rows) {
        if (r.workload == "bn254") bn.push_back(&r);
        if (r.workload == "dilithium") dil.push_back(&r);
    }
    REQUIRE(bn.size() == 3);
    REQUIRE(dil.size() == 2);
    CHECK(bn[0]->speedup == doctest::Approx(1.0));
    CHECK(bn[1]->speedup == doctest::Approx(126.0 / 128.0));
    CHECK(bn[2]->speedup == doctest::Approx(3663.0 / 126.0));
    CHECK(bn[2]->speedup == doctest::Approx(29.07).epsilon(0.01));
    CHECK(dil[0]->speedup == doctest::Approx(1.0));
    CHECK(dil[1]->speedup == doctest::Approx(110435.0 / 3400.0));
    CHECK(dil[1]->speedup == doctest::Approx(32.48).epsilon(0.01));
}

TEST_CASE("vector-unit regression decomposition") {
    CalibrationConstants c;
    VpuAnomaly v = vpu_anomaly(c);
    CHECK(v.v4_per_chip == doctest::Approx(915.75));
    CHECK(v.v5e_per_chip == doctest::Approx(338.0).epsilon(0.001));
    CHECK(v.per_chip_regression == doctest::Approx(2.709).epsilon(0.001));
    CHECK(v.v4_ns_per_instruction == doctest::Approx(127.11).epsilon(0.001));
    CHECK(v.v5e_ns_per_instruction == doctest::Approx(173.85).epsilon(0.001));
    CHECK(v.per_instruction_regression == doctest::Approx(1.368).epsilon(0.001));
    CHECK(v.core_density_ratio == doctest::Approx(2.0));
    // Residency math: chip regression = instruction regression x core density
    // (to first order), and the per-dollar pair lands at cost parity.
    CHECK(v.per_chip_regression ==
          doctest::Approx(v.per_instruction_regression * v.core_density_ratio)
              .epsilon(0.02));
    CHECK(v.v4_ops_per_dollar == doctest::Approx(284.0).epsilon(0.01));
    CHECK(v.v5e_ops_per_dollar == doctest::Approx(282.0).epsilon(0.01));
    CHECK(rel_err(v.v4_ops_per_dollar, v.v5e_ops_per_dollar) < 0.01);
}

TEST_CASE("degree scaling keeps the model-vs-model gap open") {
    CalibrationConstants c;
    std::vector<CrossoverPoint> scan = crossover_scan(c);
    REQUIRE(scan.size() == 7);
    CHECK(scan.front().degree == 256);
    CHECK(scan.back().degree == 16384);
    CHECK(scan.front().advantage == doctest::Approx(7.2e6 / 3663.0));
    for (std::size_t i = 0; i < scan.size(); ++i) {
        CHECK(scan[i].advantage ==
              doctest::Approx(scan[i].gpu_ops / scan[i].tpu_ops));
        CHECK(scan[i].advantage > 1.0);
        if (i > 0) CHECK(scan[i].advantage > scan[i - 1].advantage);
    }

    std::vector<CrossoverPoint> kernel = crossover_scan(c, 256, 16384, true);
    REQUIRE(kernel.size() == 7);
    CHECK(kernel.front().advantage == doctest::Approx(18.4e6 / 3663.0));
    CHECK(kernel.front().advantage > scan.front().advantage);

    CHECK_THROWS_AS(crossover_scan(c, 100, 200), DomainError);
}

TEST_CASE("price perturbation moves deficits proportionally") {
    CalibrationConstants base;
    DeficitFactorization d0 = deficit_factorization(base);
    CalibrationConstants up = perturb_gpu_price(base, 10.0);
    DeficitFactorization d1 = deficit_factorization(up);
    CHECK(d1.headline_v5p == doctest::Approx(d0.headline_v5p / 1.1));
    CHECK(d1.headline_v4 == doctest::Approx(d0.headline_v4 / 1.1));
    CHECK(d1.dilithium_deficit_v5p ==
          doctest::Approx(d0.dilithium_deficit_v5p / 1.1));

    CalibrationConstants down = perturb_gpu_price(base, -50.0);
    DeficitFactorization d2 = deficit_factorization(down);
    CHECK(d2.headline_v5p == doctest::Approx(d0.headline_v5p * 2.0));
}

TEST_CASE("cost reports render both formats") {
    CalibrationConstants c;
    std::string text = cost_report_text(c);
    CHECK(text.find("Ops per $/hr") != std::string::npos);
    CHECK(text.find("bn254") != std::string::npos);
    CHECK(text.find("Deficit factorization") != std::string::npos);

    nlohmann::json j = nlohmann::json::parse(cost_report_json(c));
    CHECK(j.contains("cost_table"));
    CHECK(j.contains("penalties"));
    CHECK(j.contains("deficits"));
    CHECK(j.contains("crossover"));
    CHECK(j["cost_table"].size() == 9);
    // Reports are pure functions of the constants.
    CHECK(cost_report_json(c) == cost_report_json(c));
}
