#include <doctest.h>

#include <random>

#include "mxntt/limbs.hpp"

using namespace mxntt;

TEST_CASE("unsigned decomposition at the frozen point") {
    CHECK(decompose_limbs(8380416, 3) ==
          std::vector<std::uint8_t>{0x00, 0xE0, 0x7F});
    CHECK(recombine_limbs({0x00, 0xE0, 0x7F}) == 8380416);
    CHECK_THROWS_AS(decompose_limbs(70000, 2), DomainError);
}

TEST_CASE("unsigned round-trip") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 1000; ++i) {
        std::uint64_t v = rng() & 0xFFFFFFFFull;
        CHECK(recombine_limbs(decompose_limbs(v, 4)) == v);
    }
}

TEST_CASE("balanced digit range endpoints") {
    CHECK(balanced_max(3) == 8355711);
    CHECK(balanced_max(4) == 2139062143);
    CHECK(balanced_min(3) == -8421504);
    CHECK(balanced_min(4) == -2155905152);
}

TEST_CASE("balanced recoding basics") {
    CHECK(recode_balanced(255, 2) == std::vector<std::int8_t>{-1, 1});
    CHECK(recombine_signed({-1, 1}) == 255);
    CHECK(recode_balanced(8355711, 3) == std::vector<std::int8_t>{127, 127, 127});
    CHECK_THROWS_AS(recode_balanced(255, 1), RecodeOverflowError);
    CHECK_THROWS_AS(recode_balanced(8355712, 3), RecodeOverflowError);
}

TEST_CASE("half-radix ties carry upward") {
    CHECK(recode_balanced(128, 2) == std::vector<std::int8_t>{-128, 1});
    CHECK(recombine_signed({-128, 1}) == 128);
}

TEST_CASE("signed recoding") {
    CHECK(recode_balanced_signed(-1, 3) == std::vector<std::int8_t>{-1, 0, 0});
    CHECK(recode_balanced_signed(-8421504, 3) ==
          std::vector<std::int8_t>{-128, -128, -128});
    CHECK_THROWS_AS(recode_balanced_signed(-8421505, 3), RecodeOverflowError);
}

TEST_CASE("balanced recoding is exact over its range") {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 2000; ++i) {
        std::uint64_t v = rng() % (balanced_max(4) + 1);
        std::vector<std::int8_t> digits = recode_balanced(v, 4);
        CHECK(digits.size() == 4);
        CHECK(recombine_signed(digits) == static_cast<std::int64_t>(v));
    }
}

TEST_CASE("twiddle digits pick a congruent representative") {
    // Canonical residues that fit stay canonical.
    CHECK(recombine_signed(signed_twiddle_digits(5, 8380417, 3)) == 5);
    // q - 1 is recoded through the negative representative.
    CHECK(signed_twiddle_digits(8380416, 8380417, 3) ==
          std::vector<std::int8_t>{-1, 0, 0});
    CHECK(signed_twiddle_digits(8355712, 8380417, 3) ==
          std::vector<std::int8_t>{127, -97, 0});
    CHECK(recombine_signed(signed_twiddle_digits(8355712, 8380417, 3)) == -24705);
    CHECK(signed_twiddle_digits(4294967290ull, 4294967291ull, 4) ==
          std::vector<std::int8_t>{-1, 0, 0, 0});
}

TEST_CASE("twiddle digits stay congruent across random residues") {
    std::mt19937_64 rng(3);
    const std::uint64_t moduli[] = {8380417ull, 4294967291ull};
    const int limbs[] = {3, 4};
    for (int fi = 0; fi < 2; ++fi) {
        for (int i = 0; i < 1000; ++i) {
            std::uint64_t residue = rng() % moduli[fi];
            std::int64_t rep =
                recombine_signed(signed_twiddle_digits(residue, moduli[fi], limbs[fi]));
            std::int64_t m = static_cast<std::int64_t>(moduli[fi]);
            CHECK(((rep % m) + m) % m == static_cast<std::int64_t>(residue));
        }
    }
}
