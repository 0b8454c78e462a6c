#include "mxntt/limbs.hpp"

#include <string>

namespace mxntt {

namespace {

void check_c(int C) {
    if (C < 1 || C > 7)
        throw DomainError("limb count C out of supported range [1,7]: " + std::to_string(C));
}

} // namespace

std::vector<std::uint8_t> decompose_limbs(std::uint64_t residue, int C) {
    check_c(C);
    if (C < 8 && (residue >> (8 * C)) != 0)
        throw DomainError("decompose_limbs: residue needs more than " +
                          std::to_string(C) + " limbs");
    std::vector<std::uint8_t> limbs(static_cast<std::size_t>(C));
    for (int i = 0; i < C; ++i)
        limbs[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(residue >> (8 * i));
    return limbs;
}

std::uint64_t recombine_limbs(const std::vector<std::uint8_t>& limbs) {
    std::uint64_t v = 0;
    for (std::size_t i = limbs.size(); i-- > 0;)
        v = (v << 8) | limbs[i];
    return v;
}

std::uint64_t balanced_max(int C) {
    check_c(C);
    std::uint64_t v = 0;
    for (int i = 0; i < C; ++i) v += 127ull << (8 * i);
    return v;
}

std::int64_t balanced_min(int C) {
    check_c(C);
    std::int64_t v = 0;
    for (int i = 0; i < C; ++i) v -= 128ll << (8 * i);
    return v;
}

std::vector<std::int8_t> recode_balanced_signed(std::int64_t value, int C) {
    check_c(C);
    std::vector<std::int8_t> digits(static_cast<std::size_t>(C));
    std::int64_t x = value;
    for (int i = 0; i < C; ++i) {
        int r = static_cast<int>(((x % 256) + 256) % 256);
        int d;
        if (r < 128) d = r;
        else if (r > 128) d = r - 256;
        else d = -128; // tie: prefer the negative digit, carry up
        digits[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(d);
        x = (x - d) >> 8; // exact: x - d is a multiple of 256
    }
    if (x != 0)
        throw RecodeOverflowError("recode_balanced: value " + std::to_string(value) +
                                  " not representable in " + std::to_string(C) +
                                  " balanced digits");
    return digits;
}

std::vector<std::int8_t> recode_balanced(std::uint64_t value, int C) {
    if (value > balanced_max(C))
        throw RecodeOverflowError("recode_balanced: value " + std::to_string(value) +
                                  " exceeds balanced max for C=" + std::to_string(C) +
                                  "; caller must pre-reduce");
    return recode_balanced_signed(static_cast<std::int64_t>(value), C);
}

std::vector<std::int8_t> signed_twiddle_digits(std::uint64_t residue,
                                               std::uint64_t modulus, int C) {
    if (modulus == 0 || residue >= modulus)
        throw DomainError("signed_twiddle_digits: residue not reduced");
    if (residue <= balanced_max(C))
        return recode_balanced_signed(static_cast<std::int64_t>(residue), C);
    // Congruent negative representative; in range whenever modulus - 1 -
    // balanced_max(C) <= -balanced_min(C), which holds for every shipped modulus.
    std::int64_t rep = static_cast<std::int64_t>(residue) - static_cast<std::int64_t>(modulus);
    if (rep < balanced_min(C))
        throw RecodeOverflowError("signed_twiddle_digits: no congruent representative fits");
    return recode_balanced_signed(rep, C);
}

std::int64_t recombine_signed(const std::vector<std::int8_t>& digits) {
    std::int64_t v = 0;
    for (std::size_t i = digits.size(); i-- > 0;)
        v = (v << 8) + digits[i];
    return v;
}

} // namespace mxntt
