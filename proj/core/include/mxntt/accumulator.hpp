#pragma once

#include <cstdint>

namespace mxntt {

enum class AccumulatorKind {
    Fp32Mantissa, // fp32 running sum, IEEE round-to-nearest-even after every MAC
    Int32,        // exact while |sum| <= 2^31 - 1; overflow is reported, not wrapped
    ExactOracle,  // unbounded integer accumulation
};

struct AccumulatorModel {
    AccumulatorKind kind = AccumulatorKind::ExactOracle;
    bool has_window = false;
    std::int64_t exact_window = 0; // largest magnitude guaranteed exact

    static AccumulatorModel fp32_mantissa();
    static AccumulatorModel int32();
    static AccumulatorModel exact_oracle();
};

struct ProbeResult {
    bool exact = false;
    std::int64_t final_value = 0; // accumulated value under the model
};

// Accumulates `target` unit products under the model and reports whether the
// running sum reproduces the integer target exactly.
ProbeResult accumulate_probe(std::int64_t target, const AccumulatorModel& model);

// Largest degree d such that d * C * 32640 <= ceiling, where 32640 = 255*128 is
// the largest magnitude an unsigned-by-balanced limb product can take.
std::int64_t accumulator_bound(int C, std::int64_t ceiling);

inline constexpr std::int64_t kMaxLimbProduct = 255 * 128; // 32,640

} // namespace mxntt
