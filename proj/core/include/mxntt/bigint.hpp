#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include "mxntt/errors.hpp"

namespace mxntt {

using BigInt = boost::multiprecision::cpp_int;

inline BigInt positive_mod(const BigInt& a, const BigInt& m) {
    BigInt r = a % m;
    if (r < 0) r += m;
    return r;
}

inline BigInt mod_pow(BigInt base, BigInt exp, const BigInt& m) {
    if (m <= 0) throw DomainError("mod_pow: modulus must be positive");
    if (exp < 0) throw DomainError("mod_pow: negative exponent");
    base = positive_mod(base, m);
    BigInt acc = 1;
    while (exp > 0) {
        if (boost::multiprecision::bit_test(exp, 0)) acc = acc * base % m;
        base = base * base % m;
        exp >>= 1;
    }
    return acc;
}

// Extended Euclid. Throws if gcd(a, m) != 1.
inline BigInt mod_inverse(const BigInt& a, const BigInt& m) {
    BigInt r0 = m, r1 = positive_mod(a, m);
    BigInt t0 = 0, t1 = 1;
    while (r1 != 0) {
        BigInt q = r0 / r1;
        BigInt r2 = r0 - q * r1;
        BigInt t2 = t0 - q * t1;
        r0 = r1; r1 = r2;
        t0 = t1; t1 = t2;
    }
    if (r0 != 1) throw DomainError("mod_inverse: operand not invertible");
    return positive_mod(t0, m);
}

} // namespace mxntt
