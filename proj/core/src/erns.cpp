#include "mxntt/erns.hpp"

#include <cassert>
#include <cmath>
#include <numeric>

#include "mxntt/field.hpp"

namespace mxntt {

namespace {

// The nine largest primes below 2^32, descending. Eight base moduli give a
// 256-bit radix that clears the 254-bit field modulus; the ninth handles the
// auxiliary channel. Every residue fits four unsigned 8-bit limbs.
constexpr std::array<std::uint64_t, kErnsChannels> kModuli = {
    4294967291ull, 4294967279ull, 4294967231ull, 4294967197ull, 4294967189ull,
    4294967161ull, 4294967143ull, 4294967111ull, 4294967087ull,
};

std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(
        static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t addmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    std::uint64_t s = a + b; // operands < 2^32, no wrap
    return s >= m ? s - m : s;
}

std::uint64_t submod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return a >= b ? a - b : a + m - b;
}

bool is_prime_u32(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull})
        if (n % p == 0) return n == p;
    std::uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) { d >>= 1; ++s; }
    // Deterministic witnesses for everything below 4,759,123,141.
    for (std::uint64_t a : {2ull, 7ull, 61ull}) {
        std::uint64_t x = 1, base = a % n, e = d;
        while (e) {
            if (e & 1) x = mulmod_u64(x, base, n);
            base = mulmod_u64(base, base, n);
            e >>= 1;
        }
        if (x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int i = 1; i < s; ++i) {
            x = mulmod_u64(x, x, n);
            if (x == n - 1) { witness = false; break; }
        }
        if (witness) return false;
    }
    return true;
}

std::uint64_t mod_u64(const BigInt& v, std::uint64_t m) {
    return static_cast<std::uint64_t>(v % m);
}

// Little-endian 32-bit words; the value must fit 8 words (below 2^256).
std::array<std::uint64_t, 8> words32(BigInt v) {
    std::array<std::uint64_t, 8> w{};
    for (int k = 0; k < 8; ++k) {
        w[static_cast<std::size_t>(k)] = static_cast<std::uint64_t>(v & 0xFFFFFFFFu);
        v >>= 32;
    }
    if (v != 0) throw DomainError("value exceeds eight 32-bit words");
    return w;
}

} // namespace

ResidueSystem::ResidueSystem() : moduli_(kModuli) {
    r_ = bn254_field().modulus;
    M_ = 1;
    P9_ = 1;
    for (int i = 0; i < kErnsChannels; ++i) {
        std::uint64_t m = moduli_[static_cast<std::size_t>(i)];
        if (m >= (1ull << 32)) throw DomainError("channel modulus exceeds four limbs");
        if (!is_prime_u32(m)) throw DomainError("channel modulus not prime");
        for (int j = 0; j < i; ++j)
            if (std::gcd(m, moduli_[static_cast<std::size_t>(j)]) != 1)
                throw DomainError("channel moduli not pairwise coprime");
        P9_ *= m;
        if (i < kErnsBaseChannels) M_ *= m;
    }
    if (M_ <= r_) throw DomainError("base radix does not clear the field modulus");
    M_mod_r_ = M_ % r_;

    for (int i = 0; i < kErnsBaseChannels; ++i) {
        std::uint64_t m = moduli_[static_cast<std::size_t>(i)];
        BigInt Mi = M_ / m;
        BigInt neg_r_inv = (m - mod_u64(mod_inverse(r_ % m, BigInt(m)), m)) % m;
        std::uint64_t Mi_inv = mod_u64(mod_inverse(Mi % m, BigInt(m)), m);
        neg_rMinv_[static_cast<std::size_t>(i)] =
            mulmod_u64(mod_u64(neg_r_inv, m), Mi_inv, m);
        rM_[static_cast<std::size_t>(i)] = mod_u64((r_ % m) * (Mi % m), m);
        Mi_words_[static_cast<std::size_t>(i)] = words32(Mi);
    }
    for (int j = 0; j < kErnsChannels; ++j) {
        std::uint64_t m = moduli_[static_cast<std::size_t>(j)];
        std::uint64_t p = 1;
        for (int k = 0; k < 8; ++k) {
            pow32_[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] = p;
            p = mulmod_u64(p, (1ull << 32) % m, m);
        }
        r_mod_[static_cast<std::size_t>(j)] = mod_u64(r_, m);
        BigInt Pj = P9_ / m;
        crt_basis_[static_cast<std::size_t>(j)] =
            (Pj * mod_inverse(Pj % m, BigInt(m))) % P9_;
    }
    Minv_aux_ = mod_u64(mod_inverse(M_ % aux_modulus(), BigInt(aux_modulus())),
                        aux_modulus());
}

const ResidueSystem& ResidueSystem::bn254() {
    static const ResidueSystem sys;
    return sys;
}

ResidueVec ResidueSystem::to_residues(const BigInt& x) const {
    if (x < 0 || x >= r_) throw DomainError("value outside the field range");
    ResidueVec v{};
    for (int i = 0; i < kErnsChannels; ++i)
        v[static_cast<std::size_t>(i)] = mod_u64(x, moduli_[static_cast<std::size_t>(i)]);
    return v;
}

BigInt ResidueSystem::from_residues(const ResidueVec& v) const {
    BigInt x = 0;
    for (int i = 0; i < kErnsChannels; ++i) {
        std::uint64_t m = moduli_[static_cast<std::size_t>(i)];
        if (v[static_cast<std::size_t>(i)] >= m)
            throw DomainError("residue not reduced by its channel modulus");
        x += crt_basis_[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
    }
    return x % P9_;
}

ProductForm pointwise_mul(const ResidueSystem& sys, const ResidueVec& a,
                          const ResidueVec& b, OpCount& count) {
    BigInt av = sys.from_residues(a);
    BigInt bv = sys.from_residues(b);
    if (av >= sys.r_ || bv >= sys.r_)
        throw DomainError("pointwise operand not reduced by the field modulus");
    ProductForm t;
    for (int i = 0; i < kErnsChannels; ++i) {
        std::size_t ii = static_cast<std::size_t>(i);
        t.residues[ii] = mulmod_u64(a[ii], b[ii], sys.moduli_[ii]);
    }
    count.pointwise_limb_products += kErnsChannels * kLimbProductsPerResidueMul;
    t.value = av * bv;
    return t;
}

ProductForm product_form(const ResidueSystem& sys, const BigInt& value) {
    if (value < 0 || value >= sys.field_modulus() * sys.montgomery_R())
        throw DomainError("product out of reducible range");
    ProductForm t;
    t.value = value;
    for (int i = 0; i < kErnsChannels; ++i)
        t.residues[static_cast<std::size_t>(i)] =
            mod_u64(value, sys.moduli()[static_cast<std::size_t>(i)]);
    return t;
}

ReduceResult montgomery_reduce_rns(const ResidueSystem& sys, const ProductForm& t) {
    if (t.value < 0 || t.value >= sys.r_ * sys.M_)
        throw DomainError("product out of reducible range");
    for (int i = 0; i < kErnsChannels; ++i) {
        std::size_t ii = static_cast<std::size_t>(i);
        if (t.residues[ii] != mod_u64(t.value, sys.moduli_[ii]))
            throw DomainError("product residues inconsistent with value");
    }

    ReduceResult res;
    OpCount& oc = res.count;

    // q digits: sigma_i = T_i * (-r^{-1} M_i^{-1}) mod m_i, so that
    // q = sum sigma_i * M_i satisfies T + q*r == 0 (mod M).
    std::array<std::uint64_t, kErnsBaseChannels> sigma{};
    for (int i = 0; i < kErnsBaseChannels; ++i) {
        std::size_t ii = static_cast<std::size_t>(i);
        sigma[ii] = mulmod_u64(t.residues[ii], sys.neg_rMinv_[ii], sys.moduli_[ii]);
    }
    oc.reduction_limb_products += kErnsBaseChannels * kLimbProductsPerResidueMul;

    // Dense base extension #1: reassemble q from its CRT digits as an 8x8
    // grid of digit-by-word products, then peel the alpha*M correction.
    BigInt q_acc = 0;
    for (int i = 0; i < kErnsBaseChannels; ++i) {
        std::size_t ii = static_cast<std::size_t>(i);
        for (int k = 0; k < 8; ++k) {
            BigInt prod = BigInt(sigma[ii]) * sys.Mi_words_[ii][static_cast<std::size_t>(k)];
            q_acc += prod << (32 * k);
        }
    }
    oc.reduction_limb_products +=
        kErnsBaseChannels * kErnsBaseChannels * kLimbProductsPerResidueMul;
    BigInt alpha = q_acc / sys.M_;
    BigInt q_val = q_acc - alpha * sys.M_;
    assert(q_val >= 0 && q_val < sys.M_);

    // Base-channel fold: T + q*r vanishes in every base channel; one multiply
    // per channel with the folded constant r*M_i.
    for (int i = 0; i < kErnsBaseChannels; ++i) {
        std::size_t ii = static_cast<std::size_t>(i);
        std::uint64_t u = addmod_u64(
            t.residues[ii], mulmod_u64(sigma[ii], sys.rM_[ii], sys.moduli_[ii]),
            sys.moduli_[ii]);
        if (u != 0) throw DomainError("reduction fold did not vanish in the base");
    }
    oc.reduction_limb_products += kErnsBaseChannels * kLimbProductsPerResidueMul;

    BigInt u_val = t.value + q_val * sys.r_;
    assert(u_val % sys.M_ == 0);
    BigInt t_val = u_val / sys.M_; // below 2r

    // Dense base extension #2: spread t across the base channels as a dense
    // words-by-powers product.
    auto tw = words32(t_val);
    for (int j = 0; j < kErnsBaseChannels; ++j) {
        std::size_t jj = static_cast<std::size_t>(j);
        std::uint64_t m = sys.moduli_[jj];
        std::uint64_t acc = 0;
        for (int k = 0; k < 8; ++k)
            acc = addmod_u64(
                acc, mulmod_u64(tw[static_cast<std::size_t>(k)] % m,
                                sys.pow32_[jj][static_cast<std::size_t>(k)], m),
                m);
        res.residues[jj] = acc;
    }
    oc.reduction_limb_products +=
        kErnsBaseChannels * kErnsBaseChannels * kLimbProductsPerResidueMul;

    // Auxiliary-channel scaling: extend q and t into the ninth channel and
    // cross-check the division there (18 residue-level multiplies).
    std::uint64_t m9 = sys.aux_modulus();
    auto qw = words32(q_val);
    std::uint64_t q_aux = 0, t_aux = 0;
    for (int k = 0; k < 8; ++k) {
        std::size_t kk = static_cast<std::size_t>(k);
        q_aux = addmod_u64(q_aux, mulmod_u64(qw[kk] % m9, sys.pow32_[8][kk], m9), m9);
        t_aux = addmod_u64(t_aux, mulmod_u64(tw[kk] % m9, sys.pow32_[8][kk], m9), m9);
    }
    std::uint64_t u_aux =
        addmod_u64(t.residues[8], mulmod_u64(q_aux, sys.r_mod_[8], m9), m9);
    std::uint64_t t_cross = mulmod_u64(u_aux, sys.Minv_aux_, m9);
    if (t_cross != t_aux)
        throw DomainError("auxiliary channel disagrees with the division");
    oc.reduction_limb_products += 18 * kLimbProductsPerResidueMul;
    res.residues[8] = t_aux;
    oc.vpu_reduction_nodes += 1;

    if (t_val >= sys.r_) {
        t_val -= sys.r_;
        for (int j = 0; j < kErnsChannels; ++j) {
            std::size_t jj = static_cast<std::size_t>(j);
            res.residues[jj] =
                submod_u64(res.residues[jj], sys.r_mod_[jj], sys.moduli_[jj]);
        }
    }
    assert(t_val >= 0 && t_val < sys.r_);
    res.value = t_val;
    return res;
}

FullMulResult bn254_full_mul(const ResidueSystem& sys,
                             const std::vector<ResidueVec>& a,
                             const std::vector<ResidueVec>& b) {
    if (a.empty() || a.size() != b.size())
        throw DimensionError("operand coefficient counts disagree");
    FullMulResult res;
    res.coeffs.reserve(a.size());
    const BigInt& r = sys.field_modulus();
    for (std::size_t i = 0; i < a.size(); ++i) {
        BigInt av = sys.from_residues(a[i]);
        if (av >= r) throw DomainError("left operand not reduced");
        // Montgomery staging of the left operand; preparation, not counted.
        BigInt a_hat = (av * sys.montgomery_factor()) % r;
        ResidueVec a_hat_res = sys.to_residues(a_hat);
        ProductForm t = pointwise_mul(sys, a_hat_res, b[i], res.count);
        ReduceResult red = montgomery_reduce_rns(sys, t);
        res.count += red.count;
        res.coeffs.push_back(red.residues);
    }
    return res;
}

ReductionSchedule schedule_reductions(std::int64_t d, ReductionMode mode) {
    if (d < 1) throw DimensionError("degree must be positive");
    auto scaled = [d](double base) {
        return static_cast<std::int64_t>(std::llround(base * static_cast<double>(d) / 256.0));
    };
    std::int64_t eager = scaled(1764.0);
    std::int64_t lazy = scaled(392.0);
    ReductionSchedule s;
    s.mode = mode;
    s.reductions_per_polynomial = mode == ReductionMode::Eager ? eager : lazy;
    s.kappa = static_cast<double>(eager) / static_cast<double>(lazy);
    return s;
}

} // namespace mxntt
