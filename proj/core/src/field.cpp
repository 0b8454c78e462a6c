#include "mxntt/field.hpp"

#include <boost/multiprecision/miller_rabin.hpp>

#include <random>

namespace mxntt {

namespace {

bool is_power_of_two(std::size_t x) { return x != 0 && (x & (x - 1)) == 0; }

// Verifies ord(x) == d for d a power of two: x^d == 1 and x^(d/2) != 1.
bool has_exact_pow2_order(const BigInt& x, std::size_t d, const BigInt& q) {
    if (mod_pow(x, d, q) != 1) return false;
    if (d > 1 && mod_pow(x, d / 2, q) == 1) return false;
    return true;
}

} // namespace

PrimeField make_field(const BigInt& modulus, const BigInt& generator,
                      unsigned two_adicity, const std::string& name) {
    if (modulus < 2) throw DomainError("make_field: modulus must be >= 2");
    std::mt19937_64 rng(0x6d786e7474ULL); // fixed witness stream
    if (modulus != 2 && !boost::multiprecision::miller_rabin_test(modulus, 32, rng))
        throw DomainError("make_field: modulus is not prime: " + modulus.str());

    BigInt qm1 = modulus - 1;
    for (unsigned i = 0; i < two_adicity; ++i) {
        if (boost::multiprecision::bit_test(qm1, 0))
            throw DomainError("make_field: two-adicity overstated for " + name);
        qm1 >>= 1;
    }
    if (!boost::multiprecision::bit_test(qm1, 0))
        throw DomainError("make_field: two-adicity understated for " + name);

    BigInt g = positive_mod(generator, modulus);
    if (g == 0) throw DomainError("make_field: generator is zero");
    // The 2-part of the generator's order must be full, otherwise derived
    // roots of unity would have lower order than requested.
    BigInt half = (modulus - 1) >> 1;
    if (two_adicity > 0 && mod_pow(g, half, modulus) == 1)
        throw DomainError("make_field: generator has deficient 2-part order");

    return PrimeField{modulus, g, two_adicity, name};
}

namespace {

PrimeField build_f17() {
    // Generator 6: smallest primitive root whose derived 4th root is 4.
    PrimeField f = make_field(17, 6, 4, "f17");
    for (const BigInt& p : {BigInt(2)}) // 17-1 = 2^4
        if (mod_pow(f.generator, (f.modulus - 1) / p, f.modulus) == 1)
            throw DomainError("f17 generator not primitive");
    return f;
}

PrimeField build_dilithium() {
    PrimeField f = make_field(8380417, 10, 13, "dilithium");
    // q-1 = 2^13 * 3 * 11 * 31
    for (const BigInt& p : {BigInt(2), BigInt(3), BigInt(11), BigInt(31)})
        if (mod_pow(f.generator, (f.modulus - 1) / p, f.modulus) == 1)
            throw DomainError("dilithium generator not primitive");
    return f;
}

PrimeField build_bn254() {
    const BigInt r(
        "21888242871839275222246405745257275088548364400416034343698204186575808495617");
    PrimeField f = make_field(r, 5, 28, "bn254");
    // r-1 = 2^28 * 3^2 * 13 * 29 * 983 * 11003 * 237073 * 405928799
    //       * 1670836401704629 * 13818364434197438864469338081
    const char* odd_factors[] = {
        "3", "13", "29", "983", "11003", "237073", "405928799",
        "1670836401704629", "13818364434197438864469338081"};
    if (mod_pow(f.generator, (r - 1) / 2, r) == 1)
        throw DomainError("bn254 generator not primitive");
    for (const char* p : odd_factors)
        if (mod_pow(f.generator, (r - 1) / BigInt(p), r) == 1)
            throw DomainError("bn254 generator not primitive");
    return f;
}

} // namespace

const PrimeField& f17() {
    static const PrimeField f = build_f17();
    return f;
}

const PrimeField& dilithium_field() {
    static const PrimeField f = build_dilithium();
    return f;
}

const PrimeField& bn254_field() {
    static const PrimeField f = build_bn254();
    return f;
}

const PrimeField& field_by_name(const std::string& name) {
    if (name == "f17") return f17();
    if (name == "dilithium") return dilithium_field();
    if (name == "bn254") return bn254_field();
    throw DomainError("unknown field: " + name);
}

Polynomial make_polynomial(const PrimeField& field, std::vector<BigInt> coeffs) {
    for (auto& c : coeffs) c = positive_mod(c, field.modulus);
    return Polynomial{field, std::move(coeffs)};
}

Polynomial random_polynomial(const PrimeField& field, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const unsigned words =
        static_cast<unsigned>((boost::multiprecision::msb(field.modulus) / 64) + 1);
    std::vector<BigInt> coeffs(d);
    for (auto& c : coeffs) {
        BigInt v = 0;
        for (unsigned w = 0; w < words; ++w) v = (v << 64) | BigInt(rng());
        c = positive_mod(v, field.modulus);
    }
    return Polynomial{field, std::move(coeffs)};
}

BigInt find_root_of_unity(const PrimeField& field, std::size_t d) {
    if (!is_power_of_two(d))
        throw DomainError("find_root_of_unity: d must be a power of two");
    if ((d >> field.two_adicity) > 1)
        throw DomainError("find_root_of_unity: d exceeds 2^two_adicity of " + field.name);
    BigInt omega = mod_pow(field.generator, (field.modulus - 1) / d, field.modulus);
    if (!has_exact_pow2_order(omega, d, field.modulus))
        throw DomainError("find_root_of_unity: derived root has wrong order");
    return omega;
}

TwiddleMatrix::TwiddleMatrix(const PrimeField& field, const BigInt& omega, std::size_t d)
    : omega_(positive_mod(omega, field.modulus)), d_(d) {
    if (d == 0) throw DimensionError("TwiddleMatrix: empty dimension");
    // Determine the multiplicative order; it must be a power of two >= d so
    // that evaluation points omega^0..omega^(d-1) are distinct.
    BigInt x = omega_;
    std::size_t ord = 1;
    while (x != 1) {
        x = x * x % field.modulus;
        ord <<= 1;
        if (ord > (std::size_t{1} << 30))
            throw DomainError("TwiddleMatrix: omega order is not a small power of two");
    }
    if (ord < d)
        throw DomainError("TwiddleMatrix: omega order below matrix dimension");
    order_ = ord;
    pow_.resize(order_);
    pow_[0] = 1;
    for (std::size_t k = 1; k < order_; ++k)
        pow_[k] = pow_[k - 1] * omega_ % field.modulus;
}

const BigInt& TwiddleMatrix::entry(std::size_t i, std::size_t j) const {
    return pow_[(i * j) % order_];
}

std::vector<BigInt> ntt_reference(const PrimeField& field,
                                  const std::vector<BigInt>& coeffs,
                                  const BigInt& omega) {
    const std::size_t d = coeffs.size();
    if (!is_power_of_two(d))
        throw DimensionError("ntt_reference: length must be a power of two");
    if (!has_exact_pow2_order(positive_mod(omega, field.modulus), d, field.modulus))
        throw DomainError("ntt_reference: omega order mismatch");

    std::vector<BigInt> a = coeffs;
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < d; ++i) {
        std::size_t bit = d >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= d; len <<= 1) {
        BigInt wlen = mod_pow(omega, d / len, field.modulus);
        for (std::size_t i = 0; i < d; i += len) {
            BigInt w = 1;
            for (std::size_t k = 0; k < len / 2; ++k) {
                BigInt u = a[i + k];
                BigInt v = a[i + k + len / 2] * w % field.modulus;
                a[i + k] = (u + v) % field.modulus;
                a[i + k + len / 2] = positive_mod(u - v, field.modulus);
                w = w * wlen % field.modulus;
            }
        }
    }
    return a;
}

std::vector<BigInt> inverse_ntt_reference(const PrimeField& field,
                                          const std::vector<BigInt>& evals,
                                          const BigInt& omega) {
    const std::size_t d = evals.size();
    BigInt omega_inv = mod_inverse(omega, field.modulus);
    std::vector<BigInt> a = ntt_reference(field, evals, omega_inv);
    BigInt d_inv = mod_inverse(BigInt(static_cast<std::uint64_t>(d)), field.modulus);
    for (auto& x : a) x = x * d_inv % field.modulus;
    return a;
}

std::vector<BigInt> matrix_ntt_oracle(const PrimeField& field,
                                      const std::vector<BigInt>& coeffs,
                                      const TwiddleMatrix& W) {
    const std::size_t d = coeffs.size();
    if (d != W.dim())
        throw DimensionError("matrix_ntt_oracle: coefficient count != matrix dimension");

    // Word-sized moduli take an exact u64/u128 path; the math is identical.
    if (field.modulus < (BigInt(1) << 32)) {
        const std::uint64_t m = field.modulus.convert_to<std::uint64_t>();
        const std::size_t order = W.order();
        std::vector<std::uint64_t> pow(order), p(d);
        for (std::size_t k = 0; k < order; ++k)
            pow[k] = W.power_table()[k].convert_to<std::uint64_t>();
        for (std::size_t t = 0; t < d; ++t)
            p[t] = coeffs[t].convert_to<std::uint64_t>();
        std::vector<BigInt> out(d);
        for (std::size_t u = 0; u < d; ++u) {
            unsigned __int128 acc = 0;
            std::size_t idx = 0;
            for (std::size_t t = 0; t < d; ++t) {
                acc += static_cast<unsigned __int128>(p[t]) * pow[idx];
                idx += u;
                if (idx >= order) idx -= order;
                if (acc >> 120) acc %= m; // headroom guard, never hit below d ~ 2^56
            }
            out[u] = BigInt(static_cast<std::uint64_t>(acc % m));
        }
        return out;
    }

    std::vector<BigInt> out(d);
    for (std::size_t u = 0; u < d; ++u) {
        BigInt acc = 0;
        for (std::size_t t = 0; t < d; ++t)
            acc += coeffs[t] * W.entry(t, u);
        out[u] = positive_mod(acc, field.modulus);
    }
    return out;
}

BigInt field_mul_full(const PrimeField& field, const BigInt& a, const BigInt& b) {
    BigInt ra = positive_mod(a, field.modulus);
    BigInt rb = positive_mod(b, field.modulus);

    // 32-bit limb schoolbook with explicit carry propagation.
    auto to_limbs = [](const BigInt& x) {
        std::vector<std::uint64_t> limbs;
        BigInt t = x;
        while (t > 0) {
            limbs.push_back(static_cast<std::uint64_t>(t & 0xffffffffu));
            t >>= 32;
        }
        if (limbs.empty()) limbs.push_back(0);
        return limbs;
    };
    std::vector<std::uint64_t> la = to_limbs(ra), lb = to_limbs(rb);
    std::vector<std::uint64_t> prod(la.size() + lb.size(), 0);
    for (std::size_t i = 0; i < la.size(); ++i) {
        std::uint64_t carry = 0;
        for (std::size_t j = 0; j < lb.size(); ++j) {
            std::uint64_t cur = prod[i + j] + la[i] * lb[j] % 0x100000000ull + carry;
            std::uint64_t hi = la[i] * lb[j] >> 32;
            prod[i + j] = cur & 0xffffffffu;
            carry = hi + (cur >> 32);
        }
        std::size_t k = i + lb.size();
        while (carry) {
            std::uint64_t cur = prod[k] + (carry & 0xffffffffu);
            prod[k] = cur & 0xffffffffu;
            carry = (carry >> 32) + (cur >> 32);
            ++k;
        }
    }
    BigInt full = 0;
    for (std::size_t i = prod.size(); i-- > 0;)
        full = (full << 32) | BigInt(prod[i]);
    return full % field.modulus;
}

} // namespace mxntt
