#include <doctest.h>

#include <bit>
#include <cstdint>
#include <vector>

#include "mxntt/field.hpp"
#include "mxntt/mxu.hpp"
#include "mxntt/scheduler.hpp"

using namespace mxntt;

namespace {

// One coefficient, all limbs 255, against all twiddle digits -128: the
// worst-case single product in every weight class.
std::pair<LimbOperand, SignedTwiddleOperand> single_coefficient_worst() {
    LimbOperand left;
    left.rows = 1;
    left.d = 1;
    left.C = 4;
    left.data.assign(4, 255);
    SignedTwiddleOperand right;
    right.d_in = 1;
    right.d_out = 1;
    right.C = 4;
    right.digits.assign(right.k_rows() * right.n_cols(), 0);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            right.digits[static_cast<std::size_t>(i) * right.n_cols() +
                         static_cast<std::size_t>(i + j)] = -128;
    return {left, right};
}

// The adversarial pair from the saturation analysis: everything -128 except
// the final coefficient's top digit, which is -127 to force an odd partial.
std::pair<LimbOperand, SignedTwiddleOperand> odd_tail_worst(std::size_t d) {
    LimbOperand left;
    left.rows = 1;
    left.d = d;
    left.C = 4;
    left.data.assign(d * 4, 255);
    SignedTwiddleOperand right;
    right.d_in = d;
    right.d_out = 1;
    right.C = 4;
    right.digits.assign(right.k_rows() * right.n_cols(), 0);
    for (std::size_t t = 0; t < d; ++t)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                right.digits[(t * 4 + static_cast<std::size_t>(i)) * right.n_cols() +
                             static_cast<std::size_t>(i + j)] =
                    (t + 1 == d && j == 3) ? -127 : -128;
    return {left, right};
}

} // namespace

TEST_CASE("weight classes collect the right limb products") {
    auto [left, right] = single_coefficient_worst();
    MxuConfig cfg;
    cfg.accumulator = AccumulatorModel::exact_oracle();
    MatmulResult r = mxu_matmul(left, right, cfg);
    REQUIRE(r.rows == 1);
    REQUIRE(r.cols == 7);
    const int multiplicity[] = {1, 2, 3, 4, 3, 2, 1};
    for (int k = 0; k < 7; ++k) {
        CAPTURE(k);
        CHECK(r.exact[static_cast<std::size_t>(k)] == multiplicity[k] * -32640);
        CHECK(r.model[static_cast<std::size_t>(k)] == multiplicity[k] * -32640);
    }
    CHECK(r.report.flagged_cells == 0);
}

TEST_CASE("operand shape mismatches throw") {
    auto [left, right] = single_coefficient_worst();
    right.C = 3;
    right.digits.resize(right.k_rows() * right.n_cols());
    CHECK_THROWS_AS(mxu_matmul(left, right, MxuConfig{}), DimensionError);
}

TEST_CASE("odd-tail construction flags under fp32 but not int32") {
    auto [left, right] = odd_tail_worst(129);
    MxuConfig fp32;
    CHECK(mxu_matmul(left, right, fp32).report.flagged_cells >= 1);

    MxuConfig i32;
    i32.accumulator = AccumulatorModel::int32();
    MatmulReport rep = mxu_matmul(left, right, i32).report;
    CHECK(rep.flagged_cells == 0);
    CHECK(rep.overflow_cells == 0);
}

TEST_CASE("int32 model reports overflow past its window") {
    // 16449 worst-case products exceed 2^31 - 1 in the widest class.
    auto [left, right] = odd_tail_worst(16449);
    MxuConfig i32;
    i32.accumulator = AccumulatorModel::int32();
    MatmulReport rep = mxu_matmul(left, right, i32).report;
    CHECK(rep.overflow_cells >= 1);
}

TEST_CASE("packed pipeline equals the field-level matrix oracle") {
    const PrimeField& f = dilithium_field();
    const std::uint64_t q = 8380417;
    BigInt w = find_root_of_unity(f, 8);
    TwiddleMatrix tw(f, w, 8);
    DenseResidueMatrix W;
    W.rows = W.cols = 8;
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j)
            W.v.push_back(static_cast<std::uint64_t>(tw.entry(i, j)));

    Polynomial p = random_polynomial(f, 8, 11);
    std::vector<std::uint64_t> x;
    for (const BigInt& c : p.coeffs) x.push_back(static_cast<std::uint64_t>(c));

    auto [left, right] = pack_operands({x}, W, q, 3);
    MxuConfig cfg;
    cfg.C = 3;
    cfg.accumulator = AccumulatorModel::exact_oracle();
    MatmulResult r = mxu_matmul(left, right, cfg);
    std::vector<std::uint64_t> got = recombine_weight_classes(r, 3, q);

    std::vector<BigInt> want = matrix_ntt_oracle(f, p.coeffs, tw);
    REQUIRE(got.size() == 8);
    for (std::size_t u = 0; u < 8; ++u)
        CHECK(got[u] == static_cast<std::uint64_t>(want[u]));
}

TEST_CASE("power tables fold field powers into the channel") {
    const PrimeField& f = bn254_field();
    const std::uint64_t m = 4294967291ull;
    ResiduePowerTable table = channel_power_table(f, 256, m);
    CHECK(table.order == 256);
    BigInt omega = find_root_of_unity(f, 256);
    CHECK(table.at(1, 1) == static_cast<std::uint64_t>(omega % m));
    CHECK(table.at(0, 17) == 1);
    CHECK(table.at(16, 16) ==
          static_cast<std::uint64_t>(mod_pow(omega, 256, f.modulus) % m));

    ResiduePowerTable padded = channel_power_table(f, 342, m);
    CHECK(padded.order == 512);
}

TEST_CASE("staged evaluation equals one exact pass") {
    const PrimeField& f = dilithium_field();
    const std::uint64_t q = 8380417;
    const std::size_t width = 342;
    Polynomial p = random_polynomial(f, width, 21);
    std::vector<std::uint64_t> x;
    for (const BigInt& c : p.coeffs) x.push_back(static_cast<std::uint64_t>(c));
    ResiduePowerTable table = channel_power_table(f, width, q);

    MxuConfig fp32;
    fp32.C = 3;
    StagedResult staged = staged_matrix_ntt(x, table, q, fp32, 171, true);
    CHECK(staged.passes == 2);
    CHECK(staged.flagged_cells == 0);
    CHECK(staged.overflow_cells == 0);

    MxuConfig exact;
    exact.C = 3;
    exact.accumulator = AccumulatorModel::exact_oracle();
    StagedResult one_pass = staged_matrix_ntt(x, table, q, exact, width, false);
    CHECK(one_pass.passes == 1);
    CHECK(staged.residues == one_pass.residues);

    for (std::size_t u = 0; u < width; ++u) {
        unsigned __int128 acc = 0;
        for (std::size_t t = 0; t < width; ++t)
            acc += static_cast<unsigned __int128>(x[t]) * table.at(t, u);
        CHECK(staged.residues[u] == static_cast<std::uint64_t>(acc % q));
    }
}

TEST_CASE("staging requires the exact chunk size for windowed models") {
    const PrimeField& f = dilithium_field();
    std::vector<std::uint64_t> x(342, 1);
    ResiduePowerTable table = channel_power_table(f, 342, 8380417);
    MxuConfig fp32;
    fp32.C = 3;
    CHECK_THROWS_AS(staged_matrix_ntt(x, table, 8380417, fp32, 100, true),
                    DomainError);
}

TEST_CASE("batched rows equal per-row staged runs") {
    const PrimeField& f = bn254_field();
    const std::uint64_t m = 4294967279ull;
    const std::size_t width = 128;
    std::vector<std::vector<std::uint64_t>> rows;
    for (std::uint64_t s = 0; s < 3; ++s) {
        Polynomial p = random_polynomial(f, width, 31 + s);
        std::vector<std::uint64_t> x;
        for (const BigInt& c : p.coeffs) x.push_back(static_cast<std::uint64_t>(c % m));
        rows.push_back(std::move(x));
    }
    ResiduePowerTable table = channel_power_table(f, width, m);
    MxuConfig cfg;
    BatchStagedResult batch = staged_matrix_ntt_rows(rows, table, m, cfg, 128, true);
    REQUIRE(batch.rows.size() == 3);
    CHECK(batch.passes == 1);
    for (std::size_t i = 0; i < 3; ++i) {
        StagedResult solo = staged_matrix_ntt(rows[i], table, m, cfg, 128, true);
        CHECK(batch.rows[i] == solo.residues);
    }
}
