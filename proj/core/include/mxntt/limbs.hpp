#pragma once

#include <cstdint>
#include <vector>

#include "mxntt/errors.hpp"

namespace mxntt {

// Little-endian unsigned base-256 digits. Requires residue < 256^C.
std::vector<std::uint8_t> decompose_limbs(std::uint64_t residue, int C);

std::uint64_t recombine_limbs(const std::vector<std::uint8_t>& limbs);

// Largest value representable with C balanced digits in [-128, 127]:
// sum of 127 * 256^i.
std::uint64_t balanced_max(int C);

// Smallest (most negative) value representable: -128 * sum of 256^i.
std::int64_t balanced_min(int C);

// Balanced signed base-256 recoding, digits in [-128, 127], ties at the
// half-radix resolving toward the negative digit (carry up). Exact:
// sum digit_i * 256^i == value. Throws RecodeOverflowError when the value
// needs more than C digits; callers must pre-reduce.
std::vector<std::int8_t> recode_balanced(std::uint64_t value, int C);

// Same recoding over a signed input; used internally for congruent
// representatives of residues that exceed balanced_max(C).
std::vector<std::int8_t> recode_balanced_signed(std::int64_t value, int C);

// Digits of a representative congruent to residue mod modulus: the canonical
// residue when it fits, otherwise residue - modulus (always fits for
// modulus <= 2^32 at C=4, and for the shipped 23-bit modulus at C=3).
std::vector<std::int8_t> signed_twiddle_digits(std::uint64_t residue,
                                               std::uint64_t modulus, int C);

std::int64_t recombine_signed(const std::vector<std::int8_t>& digits);

} // namespace mxntt
