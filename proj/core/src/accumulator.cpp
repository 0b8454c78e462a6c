#include "mxntt/accumulator.hpp"

#include "mxntt/errors.hpp"

namespace mxntt {

AccumulatorModel AccumulatorModel::fp32_mantissa() {
    return {AccumulatorKind::Fp32Mantissa, true, std::int64_t{1} << 24};
}

AccumulatorModel AccumulatorModel::int32() {
    return {AccumulatorKind::Int32, true, (std::int64_t{1} << 31) - 1};
}

AccumulatorModel AccumulatorModel::exact_oracle() {
    return {AccumulatorKind::ExactOracle, false, 0};
}

ProbeResult accumulate_probe(std::int64_t target, const AccumulatorModel& model) {
    if (target < 0) throw DomainError("accumulate_probe: negative target");
    switch (model.kind) {
        case AccumulatorKind::Fp32Mantissa: {
            float acc = 0.0f;
            for (std::int64_t i = 0; i < target; ++i) {
                float next = acc + 1.0f;
                if (next == acc) {
                    // Absorbed: every further unit add is lost too.
                    return {false, static_cast<std::int64_t>(acc)};
                }
                acc = next;
            }
            auto v = static_cast<std::int64_t>(acc);
            return {v == target, v};
        }
        case AccumulatorKind::Int32: {
            // Unit accumulation is exact up to the ceiling by construction.
            if (target <= model.exact_window) return {true, target};
            return {false, target}; // value retained; overflow reported
        }
        case AccumulatorKind::ExactOracle:
            return {true, target};
    }
    throw DomainError("accumulate_probe: unknown accumulator kind");
}

std::int64_t accumulator_bound(int C, std::int64_t ceiling) {
    if (C < 1) throw DomainError("accumulator_bound: C must be >= 1");
    if (ceiling < kMaxLimbProduct) return 0;
    return ceiling / (C * kMaxLimbProduct);
}

} // namespace mxntt
