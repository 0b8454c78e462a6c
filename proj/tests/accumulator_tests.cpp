#include <doctest.h>

#include <random>

#include "mxntt/accumulator.hpp"
#include "mxntt/errors.hpp"

using namespace mxntt;

TEST_CASE("model windows") {
    AccumulatorModel fp32 = AccumulatorModel::fp32_mantissa();
    AccumulatorModel i32 = AccumulatorModel::int32();
    AccumulatorModel exact = AccumulatorModel::exact_oracle();
    CHECK(fp32.has_window);
    CHECK(fp32.exact_window == (std::int64_t{1} << 24));
    CHECK(i32.has_window);
    CHECK(i32.exact_window == 2147483647);
    CHECK_FALSE(exact.has_window);
}

TEST_CASE("staging bounds at the calibration points") {
    CHECK(accumulator_bound(4, std::int64_t{1} << 24) == 128);
    CHECK(accumulator_bound(3, std::int64_t{1} << 24) == 171);
    CHECK(accumulator_bound(4, 2147483647) == 16448);
    CHECK_THROWS_AS(accumulator_bound(0, 1 << 24), DomainError);
    // A ceiling below one worst-case product cannot host a single add.
    CHECK(accumulator_bound(4, 1000) == 0);
}

TEST_CASE("bound grows with the ceiling and shrinks with limb count") {
    CHECK(accumulator_bound(4, std::int64_t{1} << 25) >
          accumulator_bound(4, std::int64_t{1} << 24));
    CHECK(accumulator_bound(3, std::int64_t{1} << 24) >
          accumulator_bound(4, std::int64_t{1} << 24));
}

TEST_CASE("probe grid") {
    AccumulatorModel fp32 = AccumulatorModel::fp32_mantissa();
    AccumulatorModel i32 = AccumulatorModel::int32();
    AccumulatorModel exact = AccumulatorModel::exact_oracle();

    const std::int64_t exact_fp32[] = {std::int64_t{1} << 23,
                                       (std::int64_t{1} << 24) - 1,
                                       std::int64_t{1} << 24};
    const std::int64_t inexact_fp32[] = {(std::int64_t{1} << 24) + 1,
                                         (std::int64_t{1} << 25) - 1,
                                         std::int64_t{1} << 28,
                                         std::int64_t{1} << 30};
    for (std::int64_t t : exact_fp32) {
        CAPTURE(t);
        CHECK(accumulate_probe(t, fp32).exact);
        CHECK(accumulate_probe(t, fp32).final_value == t);
    }
    for (std::int64_t t : inexact_fp32) {
        CAPTURE(t);
        CHECK_FALSE(accumulate_probe(t, fp32).exact);
        CHECK(accumulate_probe(t, i32).exact);
        CHECK(accumulate_probe(t, exact).exact);
    }
}

TEST_CASE("fp32 count-to-target stalls at the window edge") {
    ProbeResult r = accumulate_probe((std::int64_t{1} << 24) + 1,
                                     AccumulatorModel::fp32_mantissa());
    CHECK_FALSE(r.exact);
    CHECK(r.final_value == (std::int64_t{1} << 24));
}

TEST_CASE("random targets inside the windows probe exact") {
    std::mt19937_64 rng(4);
    AccumulatorModel fp32 = AccumulatorModel::fp32_mantissa();
    AccumulatorModel i32 = AccumulatorModel::int32();
    for (int i = 0; i < 50; ++i) {
        std::int64_t t = 1 + static_cast<std::int64_t>(rng() % (1u << 24));
        CAPTURE(t);
        CHECK(accumulate_probe(t, fp32).exact == (t <= (1 << 24)));
        CHECK(accumulate_probe(t, i32).exact);
    }
}
