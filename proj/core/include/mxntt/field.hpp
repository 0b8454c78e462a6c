#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mxntt/bigint.hpp"

namespace mxntt {

// Prime field F_q with a multiplicative generator and known two-adicity of q-1.
struct PrimeField {
    BigInt modulus;
    BigInt generator;
    unsigned two_adicity = 0;
    std::string name;
};

// Validates primality (Miller-Rabin), two-adicity, and the generator's order on
// the 2-part of q-1. Full generator-order verification is done for the shipped
// fields, whose q-1 factorizations are known.
PrimeField make_field(const BigInt& modulus, const BigInt& generator,
                      unsigned two_adicity, const std::string& name);

// Shipped fields.
const PrimeField& f17();              // q = 17, test field
const PrimeField& dilithium_field();  // q = 8,380,417, two-adicity 13
const PrimeField& bn254_field();      // 254-bit scalar field, two-adicity 28

// Lookup by CLI name: "f17" | "dilithium" | "bn254".
const PrimeField& field_by_name(const std::string& name);

struct Polynomial {
    PrimeField field;
    std::vector<BigInt> coeffs; // canonical representatives in [0, q)
};

Polynomial make_polynomial(const PrimeField& field, std::vector<BigInt> coeffs);
Polynomial random_polynomial(const PrimeField& field, std::size_t d, std::uint64_t seed);

// omega of multiplicative order exactly d (d a power of two dividing
// 2^two_adicity), derived deterministically as generator^((q-1)/d).
BigInt find_root_of_unity(const PrimeField& field, std::size_t d);

// Vandermonde twiddle table: entry(i, j) = omega^(i*j). Backed by a power table
// of omega's order, so large d never materializes d*d entries.
class TwiddleMatrix {
public:
    TwiddleMatrix(const PrimeField& field, const BigInt& omega, std::size_t d);

    const BigInt& entry(std::size_t i, std::size_t j) const;
    std::size_t dim() const { return d_; }
    std::size_t order() const { return order_; }
    const BigInt& omega() const { return omega_; }
    const std::vector<BigInt>& power_table() const { return pow_; }

private:
    BigInt omega_;
    std::size_t d_ = 0;
    std::size_t order_ = 0;
    std::vector<BigInt> pow_; // omega^0 .. omega^(order-1)
};

// O(d log d) radix-2 decimation-in-time transform. Requires d a power of two
// and omega of order exactly d.
std::vector<BigInt> ntt_reference(const PrimeField& field,
                                  const std::vector<BigInt>& coeffs,
                                  const BigInt& omega);

// Inverse of ntt_reference (scales by d^-1, evaluates at omega^-1).
std::vector<BigInt> inverse_ntt_reference(const PrimeField& field,
                                          const std::vector<BigInt>& evals,
                                          const BigInt& omega);

// O(d^2) dense vector-matrix product y_u = sum_t p_t * W[t][u] mod q.
// The independent check against ntt_reference; also defined for Vandermonde
// tables whose order exceeds their dimension (padded-width evaluation maps).
std::vector<BigInt> matrix_ntt_oracle(const PrimeField& field,
                                      const std::vector<BigInt>& coeffs,
                                      const TwiddleMatrix& W);

// Full modular product via 32-bit schoolbook limbs with explicit carries,
// reduced mod q at the end. Independent route against built-in bigint multiply.
BigInt field_mul_full(const PrimeField& field, const BigInt& a, const BigInt& b);

} // namespace mxntt
