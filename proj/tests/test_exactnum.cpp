// Copyright 2026 The ivphard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "ivphard/dyadic.hpp"
#include "ivphard/enclosure.hpp"
#include "ivphard/real_name.hpp"
#include "ivphard/transcendental.hpp"

using namespace ivphard;

namespace {

Dyadic d(const char* s) { return parse_dyadic(s); }

// Hex expansions of the constants, truncated to 64 fractional bits.
const char* kPiHex = "3243F6A8885A308D3";
const char* kLn2Hex = "B17217F7D1CF79AB";
const char* kEHex = "2B7E151628AED2A6A";

Dyadic from_hex(const char* hex, std::int64_t frac_bits) {
    mpz_class v(hex, 16);
    return Dyadic(v, -frac_bits);
}

}  // namespace

TEST(dyadic, canonical_form) {
    Dyadic x(mpz_class(12), 3);
    EXPECT_EQ(x.mantissa(), 3);
    EXPECT_EQ(x.exponent(), 5);
    Dyadic z(mpz_class(0), 17);
    EXPECT_EQ(z.exponent(), 0);
    EXPECT_TRUE(z.is_zero());
}

TEST(dyadic, arithmetic_examples) {
    EXPECT_EQ(d("1/2") + d("1/4"), d("3/4"));
    Dyadic p = Dyadic(mpz_class(3), -5) * Dyadic(mpz_class(5), -3);
    EXPECT_EQ(p.mantissa(), 15);
    EXPECT_EQ(p.exponent(), -8);
    EXPECT_GT(Dyadic(1), Dyadic(mpz_class(1023), -10));
    EXPECT_EQ(d("3/4") - d("1/4"), d("1/2"));
}

TEST(dyadic, rounding) {
    EXPECT_EQ(d("5/8").round_to(1, Rounding::floor), d("1/2"));
    EXPECT_EQ(d("5/8").round_to(1, Rounding::ceil), Dyadic(1));
    EXPECT_EQ(d("5/8").round_to(2, Rounding::nearest), d("3/4"));
    EXPECT_EQ(d("-5/8").round_to(1, Rounding::floor), Dyadic(-1));
    EXPECT_EQ(d("3/8").round_to(3, Rounding::floor), d("3/8"));
    EXPECT_EQ(d("7/2").floor_int(), 3);
    EXPECT_EQ(d("-7/2").floor_int(), -4);
    EXPECT_EQ(d("-7/2").ceil_int(), -3);
}

TEST(dyadic, parse_and_print) {
    EXPECT_EQ(d("3*2^-4"), d("3/16"));
    EXPECT_EQ(d("0.375"), d("3/8"));
    EXPECT_EQ(d("-12"), Dyadic(-12));
    EXPECT_THROW(d("1/3"), std::invalid_argument);
    EXPECT_THROW(d("0.1"), std::invalid_argument);
    EXPECT_THROW(d("abc"), std::invalid_argument);
    EXPECT_EQ(d("-5/8").to_string(), "-5*2^-3");
    EXPECT_EQ(d("-5/8").to_binary(), "-0.101");
    EXPECT_EQ(parse_dyadic(d("123*2^-77").to_string()), d("123*2^-77"));
}

TEST(dyadic, bits_and_logs) {
    EXPECT_EQ(Dyadic(5).top_bit(), 2);
    EXPECT_EQ(Dyadic(4).ceil_log2(), 2);
    EXPECT_EQ(Dyadic(5).ceil_log2(), 3);
    EXPECT_EQ(d("3/8").bit(-2), 1);
    EXPECT_EQ(d("3/8").bit(-3), 1);
    EXPECT_EQ(d("3/8").bit(-1), 0);
}

TEST(dyadic, reassociation_is_exact) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 1000; ++i) {
        auto pick = [&] {
            return Dyadic(mpz_class(static_cast<long>(rng() >> 20)) - (1L << 43),
                          static_cast<std::int64_t>(rng() % 200) - 100);
        };
        Dyadic a = pick(), b = pick(), c = pick();
        ASSERT_EQ((a + b) + c, a + (b + c));
        ASSERT_EQ((a * b) * c, a * (b * c));
        ASSERT_EQ(a * (b + c), a * b + a * c);
    }
}

TEST(enclosure, arithmetic_is_sound) {
    Enclosure a(d("1"), d("1/8"));
    Enclosure b(d("-2"), d("1/4"));
    Enclosure p = a * b;
    for (const char* x : {"7/8", "1", "9/8"})
        for (const char* y : {"-9/4", "-2", "-7/4"}) EXPECT_TRUE(p.contains(d(x) * d(y)));
    EXPECT_TRUE((a + b).contains(d("9/8") + d("-7/4")));
    EXPECT_TRUE((a - b).contains(d("7/8") - d("-7/4")));
}

TEST(transcendental, constants_match_hex_expansions) {
    EXPECT_LE((pi(62).mid() - from_hex(kPiHex, 64)).abs(), d("1*2^-61"));
    EXPECT_LE((ln2(62).mid() - from_hex(kLn2Hex, 64)).abs(), d("1*2^-61"));
    EXPECT_LE((exp(Dyadic(1), 62).mid() - from_hex(kEHex, 64)).abs(), d("1*2^-61"));
    Enclosure big = pi(5000);
    EXPECT_TRUE(big.meets(5000));
    EXPECT_TRUE(pi(100).contains(big));
}

TEST(transcendental, sin_cos_examples) {
    EXPECT_TRUE(sin_pi(Dyadic(0), 30).is_exact());
    EXPECT_EQ(sin_pi(d("1/2"), 30).mid(), Dyadic(1));
    EXPECT_TRUE(sin_pi(d("1/2"), 30).is_exact());
    EXPECT_EQ(cos_pi(Dyadic(1), 30).mid(), Dyadic(-1));
    EXPECT_TRUE(cos_pi(d("1/2"), 30).is_exact());
    // pi/6 is not dyadic; use sin(pi x) at the nearest dyadic and widen by pi |x - 1/6|.
    mpz_class num = (mpz_class(1) << 40) / 6;
    Dyadic near(num, -40);
    Enclosure s = sin_pi(near, 20);
    EXPECT_TRUE(s.meets(20));
    Enclosure widened(s.mid(), s.rad() + d("1*2^-37"));
    EXPECT_TRUE(widened.contains(d("1/2")));
    // sin^2 + cos^2 = 1 and sin(pi/4)^2 = 1/2.
    Enclosure q = sin_pi(d("1/4"), 80);
    EXPECT_TRUE((q * q).contains(d("1/2")));
    Enclosure c = cos_pi(d("3/16"), 80), sn = sin_pi(d("3/16"), 80);
    EXPECT_TRUE((c * c + sn * sn).contains(Dyadic(1)));
}

TEST(transcendental, agrees_with_libm) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 300; ++i) {
        Dyadic t(mpz_class(static_cast<long>(rng() >> 12)), -52);  // [0, 4096)
        Dyadic u = t.shifted(-12);
        double dt = u.to_double();
        EXPECT_NEAR(sin_pi(u, 50).mid().to_double(), std::sin(M_PI * dt), 1e-14);
        EXPECT_NEAR(cos_pi(u, 50).mid().to_double(), std::cos(M_PI * dt), 1e-14);
        Dyadic x = u.shifted(-10) - Dyadic(2);
        EXPECT_NEAR(exp(x, 60).mid().to_double(), std::exp(x.to_double()), 1e-15);
        EXPECT_NEAR(pow2(u.shifted(-8), 60).mid().to_double(), std::exp2(u.shifted(-8).to_double()), 1e-14);
    }
    EXPECT_EQ(pow2(Dyadic(7), 10).mid(), Dyadic(128));
    EXPECT_TRUE(pow2(Dyadic(-3), 10).is_exact());
    EXPECT_NEAR(exp(Dyadic(9), 40).mid().to_double(), std::exp(9.0), 1e-8);
}

TEST(transcendental, refinement_is_nested) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 1000; ++i) {
        Dyadic t(mpz_class(static_cast<long>(rng() >> 11)), -53);
        std::int64_t m = 8 + static_cast<std::int64_t>(rng() % 60);
        auto nested = [&](auto f) {
            Enclosure lo = f(m), hi = f(m + 40);
            return lo.meets(m) && hi.meets(m + 40) && lo.contains(hi);
        };
        ASSERT_TRUE(nested([&](std::int64_t p) { return sin_pi(t, p); })) << t.to_string();
        ASSERT_TRUE(nested([&](std::int64_t p) { return cos_pi(t, p); })) << t.to_string();
        ASSERT_TRUE(nested([&](std::int64_t p) { return exp(t, p); })) << t.to_string();
        ASSERT_TRUE(nested([&](std::int64_t p) { return pow2(t.shifted(3), p); })) << t.to_string();
    }
}

TEST(real_name, contract) {
    RealName third_name = make_name([](std::int64_t m) {
        mpz_class v = (mpz_class(1) << (m + 2)) / 3;
        return Enclosure(Dyadic(v, -(m + 2)), Dyadic::pow2(-(m + 2)));
    });
    Dyadic q2 = third_name.query(2);
    EXPECT_TRUE(q2 == d("1/4") || q2 == d("2/4"));
    for (std::int64_t m = 1; m < 30; ++m) EXPECT_EQ(make_name(d("1/2")).query(m), d("1/2"));
    RealName s = make_name([](std::int64_t m) { return sin_pi(d("1/4"), m); });
    for (std::int64_t m = 0; m < 200; m += 7) {
        Dyadic q = s.query(m);
        EXPECT_TRUE(q.shifted(m).is_integer());
        Enclosure truth = sin_pi(d("1/4"), m + 20);
        EXPECT_LE((q - truth.mid()).abs() - truth.rad(), Dyadic::pow2(-m));
    }
    RealName sixth = make_name([](std::int64_t m) { return sin_pi(Dyadic((mpz_class(1) << (m + 8)) / 6, -(m + 8)), m + 1); });
    Dyadic q10 = sixth.query(10);
    EXPECT_TRUE(q10 == d("512/1024") || q10 == d("513/1024") || q10 == d("511/1024"));
}

TEST(real_name, random_contract) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 1000; ++i) {
        Dyadic x(mpz_class(static_cast<long>(rng() >> 4)) - (1L << 59), -(static_cast<std::int64_t>(rng() % 80)));
        std::int64_t m = static_cast<std::int64_t>(rng() % 100);
        Dyadic q = make_name(x).query(m);
        ASSERT_TRUE(q.shifted(m).is_integer());
        ASSERT_LE((q - x).abs(), Dyadic::pow2(-m));
    }
    EXPECT_EQ(RealName::encode_name(d("-5/4"), 2), "1101");
    EXPECT_EQ(RealName::decode_name("1101", 2), d("-5/4"));
}
