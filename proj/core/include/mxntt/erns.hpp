#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mxntt/bigint.hpp"
#include "mxntt/errors.hpp"

namespace mxntt {

inline constexpr int kErnsChannels = 9;
inline constexpr int kErnsBaseChannels = 8;
// A residue-level multiply lowers to a 4x4 grid of 8-bit limb products.
inline constexpr std::uint64_t kLimbProductsPerResidueMul = 16;

using ResidueVec = std::array<std::uint64_t, kErnsChannels>;

struct OpCount {
    std::uint64_t pointwise_limb_products = 0;
    std::uint64_t reduction_limb_products = 0;
    std::uint64_t vpu_reduction_nodes = 0;

    OpCount& operator+=(const OpCount& o) {
        pointwise_limb_products += o.pointwise_limb_products;
        reduction_limb_products += o.reduction_limb_products;
        vpu_reduction_nodes += o.vpu_reduction_nodes;
        return *this;
    }
};

// A pre-reduction product. Nine residues pin a value only below the product of
// the moduli (~2^288), while products reach r*R (~2^510), so the exact value
// rides along; the residues are what the counted channel arithmetic produces.
struct ProductForm {
    ResidueVec residues{};
    BigInt value;
};

struct ReduceResult;

class ResidueSystem {
public:
    static const ResidueSystem& bn254();

    const std::array<std::uint64_t, kErnsChannels>& moduli() const { return moduli_; }
    std::uint64_t base_modulus(int i) const { return moduli_[static_cast<std::size_t>(i)]; }
    std::uint64_t aux_modulus() const { return moduli_[kErnsBaseChannels]; }
    const BigInt& field_modulus() const { return r_; }
    const BigInt& montgomery_R() const { return M_; }
    const BigInt& montgomery_factor() const { return M_mod_r_; } // R mod r
    const BigInt& channel_product() const { return P9_; }

    ResidueVec to_residues(const BigInt& x) const;
    BigInt from_residues(const ResidueVec& v) const;

    friend ProductForm pointwise_mul(const ResidueSystem& sys, const ResidueVec& a,
                                     const ResidueVec& b, OpCount& count);
    friend ReduceResult montgomery_reduce_rns(const ResidueSystem& sys,
                                              const ProductForm& t);

private:
    ResidueSystem();

    std::array<std::uint64_t, kErnsChannels> moduli_{};
    BigInt r_;       // BN254 scalar field modulus
    BigInt M_;       // product of the 8 base moduli; the Montgomery radix
    BigInt M_mod_r_; // Montgomery encoding factor
    BigInt P9_;      // product of all 9 moduli (CRT range)

    // Per base channel i: (-r^{-1} * M_i^{-1}) mod m_i, where M_i = M / m_i.
    std::array<std::uint64_t, kErnsBaseChannels> neg_rMinv_{};
    // Per base channel i: (r * M_i) mod m_i; folds the zero-consistency check
    // T + q*r == 0 (mod m_i) into one multiply per channel.
    std::array<std::uint64_t, kErnsBaseChannels> rM_{};
    // 32-bit little-endian words of each M_i (256-bit values, 8 words).
    std::array<std::array<std::uint64_t, 8>, kErnsBaseChannels> Mi_words_{};
    // pow32_[j][k] = 2^(32k) mod m_j, for re-expanding a 256-bit value across
    // every channel as a dense words-by-powers product.
    std::array<std::array<std::uint64_t, 8>, kErnsChannels> pow32_{};
    std::uint64_t Minv_aux_ = 0; // M^{-1} mod aux modulus
    std::array<std::uint64_t, kErnsChannels> r_mod_{}; // r mod m_j
    // CRT basis for from_residues over all nine channels.
    std::array<BigInt, kErnsChannels> crt_basis_{};
};

// Channel-wise product of two reduced residue vectors. Counts 9 residue-level
// multiplies (144 limb products). Operand values are recovered by CRT and must
// lie below the field modulus.
ProductForm pointwise_mul(const ResidueSystem& sys, const ResidueVec& a,
                          const ResidueVec& b, OpCount& count);

// Uncounted test plumbing: a product form with residues derived from the value.
ProductForm product_form(const ResidueSystem& sys, const BigInt& value);

struct ReduceResult {
    ResidueVec residues{};
    BigInt value; // t * R^{-1} mod r, canonical
    OpCount count;
};

// RNS Montgomery reduction. The counted flow is: per-channel q digits
// (8 multiplies), a dense 8x8 base extension reassembling q's value from its
// CRT digits, a per-channel fold verifying T + q*r vanishes in the base
// (8 multiplies), a second dense 8x8 extension pushing t = (T + q*r)/M back
// across the base channels, and auxiliary-channel scaling (18 multiplies).
// Total 162 residue-level multiplies = 2,592 limb products.
ReduceResult montgomery_reduce_rns(const ResidueSystem& sys, const ProductForm& t);

struct FullMulResult {
    std::vector<ResidueVec> coeffs;
    OpCount count;
};

// Coefficient-wise full-field multiplication in the evaluation domain: the
// left operand is staged into the Montgomery domain (uncounted preparation),
// then each coefficient pays one pointwise phase (144 limb products) and one
// Montgomery reduction (2,592 limb products, one vector reduction node).
FullMulResult bn254_full_mul(const ResidueSystem& sys,
                             const std::vector<ResidueVec>& a,
                             const std::vector<ResidueVec>& b);

enum class ReductionMode { Eager, Lazy };

struct ReductionSchedule {
    ReductionMode mode = ReductionMode::Eager;
    std::int64_t reductions_per_polynomial = 0;
    double kappa = 0.0; // eager count over lazy count at this shape
};

// Calibrated reduction-node emission counts for the graph builder: 1,764
// eager or 392 lazy normalisation passes at degree 256, scaled
// proportionally for other degrees.
ReductionSchedule schedule_reductions(std::int64_t d, ReductionMode mode);

} // namespace mxntt
