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

#ifndef IVPHARD_TRANSCENDENTAL_HPP
#define IVPHARD_TRANSCENDENTAL_HPP

// Certified pi, ln 2, sin(pi t), cos(pi t), exp and 2^x on dyadic arguments.
//
// Everything is computed in fixed point: an integer v at scale 2^-p together with an error
// count e such that |v 2^-p - x| <= e 2^-p. Each series below states its per-term error and
// its tail bound; the enclosures returned are sound by construction.

#include <cstdint>
#include <stdexcept>

#include "ivphard/dyadic.hpp"
#include "ivphard/enclosure.hpp"

namespace ivphard {

namespace detail {

struct Fixed {
    mpz_class value;
    mpz_class err;  // in units of 2^-bits
    std::int64_t bits;

    Enclosure to_enclosure() const { return Enclosure(Dyadic(value, -bits), Dyadic(err, -bits)); }
};

inline mpz_class shr_floor(const mpz_class& v, std::int64_t k) {
    mpz_class r;
    mpz_fdiv_q_2exp(r.get_mpz_t(), v.get_mpz_t(), static_cast<mp_bitcnt_t>(k));
    return r;
}
inline mpz_class shl(const mpz_class& v, std::int64_t k) {
    mpz_class r;
    mpz_mul_2exp(r.get_mpz_t(), v.get_mpz_t(), static_cast<mp_bitcnt_t>(k));
    return r;
}

// atan(1/x) = sum (-1)^k / ((2k+1) x^(2k+1)). The running power carries < 2 units of error,
// each term < 3; once the power truncates to zero the remaining alternating tail is < 2.
inline Fixed atan_inverse(unsigned long x, std::int64_t bits) {
    mpz_class power = shl(mpz_class(1), bits) / x;
    const mpz_class x2 = mpz_class(x) * x;
    mpz_class sum = 0;
    long terms = 0;
    for (unsigned long k = 0; power != 0; ++k, ++terms) {
        mpz_class term = power / (2 * k + 1);
        if (k % 2 == 0) sum += term; else sum -= term;
        power /= x2;
    }
    return {sum, mpz_class(3 * terms + 2), bits};
}

inline Fixed compute_pi(std::int64_t bits) {
    const std::int64_t work = bits + 16;
    Fixed a = atan_inverse(5, work);
    Fixed b = atan_inverse(239, work);
    mpz_class v = 16 * a.value - 4 * b.value;
    mpz_class e = 16 * a.err + 4 * b.err;
    return {shr_floor(v, 16), shr_floor(e, 16) + 2, bits};
}

// ln 2 = sum_{k>=1} 1 / (k 2^k); each term floor(2^(p-k)/k) is off by < 1 and the tail past
// k = p is < 1.
inline Fixed compute_ln2(std::int64_t bits) {
    mpz_class sum = 0;
    for (std::int64_t k = 1; k <= bits; ++k) sum += shl(mpz_class(1), bits - k) / k;
    return {sum, mpz_class(bits + 1), bits};
}

constexpr std::int64_t kCachedBits = 4096;

inline const Fixed& cached_pi() {
    static const Fixed value = compute_pi(kCachedBits + 64);
    return value;
}
inline const Fixed& cached_ln2() {
    static const Fixed value = compute_ln2(kCachedBits + 64);
    return value;
}

inline Fixed truncate(const Fixed& f, std::int64_t bits) {
    std::int64_t drop = f.bits - bits;
    return {shr_floor(f.value, drop), shr_floor(f.err, drop) + 2, bits};
}

inline Fixed pi_fixed(std::int64_t bits) {
    if (bits <= kCachedBits) return truncate(cached_pi(), bits);
    return compute_pi(bits);
}
inline Fixed ln2_fixed(std::int64_t bits) {
    if (bits <= kCachedBits) return truncate(cached_ln2(), bits);
    return compute_ln2(bits);
}

// Fixed-point value of r * c where c is a Fixed constant and r an exact dyadic with |r| <= 1.
inline Fixed scale_fixed(const Dyadic& r, const Fixed& c) {
    mpz_class prod = r.mantissa() * c.value;
    mpz_class v = r.exponent() >= 0 ? shl(prod, r.exponent()) : shr_floor(prod, -r.exponent());
    mpz_class err = c.err + 1;  // |r| <= 1 scales the constant's error down; floor adds < 1
    return {v, err, c.bits};
}

// sin(x) for the exact fixed-point x = xv 2^-p, |x| <= 1.6. The term recurrence contracts
// (x^2 / ((2k+2)(2k+3)) < 0.42), so every term is within 4 units; the alternating tail after
// the first zero term is within 6.
inline Fixed sin_series(const mpz_class& xv, std::int64_t bits) {
    mpz_class ax = ::abs(xv);
    mpz_class sq = shr_floor(ax * ax, bits);
    mpz_class term = ax;
    mpz_class sum = 0;
    long terms = 0;
    for (unsigned long k = 0; term != 0; ++k, ++terms) {
        if (k % 2 == 0) sum += term; else sum -= term;
        term = shr_floor(term * sq, bits) / ((2 * k + 2) * (2 * k + 3));
    }
    if (sgn(xv) < 0) sum = -sum;
    return {sum, mpz_class(6 * (terms + 1) + 6), bits};
}

// exp(x) for the exact fixed-point x = xv 2^-p, |x| <= 1. Terms are within 4 units; the tail
// after the first zero term is within 8.
inline Fixed exp_series(const mpz_class& xv, std::int64_t bits) {
    mpz_class ax = ::abs(xv);
    bool negative = sgn(xv) < 0;
    mpz_class term = shl(mpz_class(1), bits);
    mpz_class sum = 0;
    long terms = 0;
    for (unsigned long k = 0; term != 0; ++k, ++terms) {
        if (negative && k % 2 == 1) sum -= term; else sum += term;
        term = shr_floor(term * ax, bits) / (k + 1);
    }
    return {sum, mpz_class(4 * (terms + 1) + 8), bits};
}

// Runs `attempt(working_bits)` with growing guard bits until it meets precision m.
template <class F>
Enclosure refine(std::int64_t m, F&& attempt) {
    std::int64_t guard = 16;
    for (int round = 0; round < 16; ++round, guard *= 2) {
        Enclosure e = attempt(std::max<std::int64_t>(m, 0) + guard);
        if (e.meets(m)) return e;
    }
    throw std::runtime_error("refine: precision target not reached");
}

}  // namespace detail

/// pi to within 2^-m.
inline Enclosure pi(std::int64_t m) {
    return detail::refine(m, [](std::int64_t p) { return detail::pi_fixed(p).to_enclosure(); });
}

/// ln 2 to within 2^-m.
inline Enclosure ln2(std::int64_t m) {
    return detail::refine(m, [](std::int64_t p) { return detail::ln2_fixed(p).to_enclosure(); });
}

/// sin(pi t) to within 2^-m. Exact whenever t is a multiple of 1/2.
inline Enclosure sin_pi(const Dyadic& t, std::int64_t m) {
    // Reduce to r in [0, 1/2] with sin(pi t) = sign * sin(pi r).
    Dyadic r = t - Dyadic::from_int((t.shifted(-1)).floor_int()).shifted(1);
    int sign = 1;
    if (r >= Dyadic(1)) {
        r -= Dyadic(1);
        sign = -1;
    }
    if (r > Dyadic::ratio(1, 1)) r = Dyadic(1) - r;
    if (r.is_zero()) return Enclosure(Dyadic(0));
    if (r == Dyadic::ratio(1, 1)) return Enclosure(Dyadic(sign));
    Enclosure e = detail::refine(m, [&](std::int64_t p) {
        detail::Fixed x = detail::scale_fixed(r, detail::pi_fixed(p));
        detail::Fixed s = detail::sin_series(x.value, p);
        s.err += x.err;  // |sin'| <= 1
        return s.to_enclosure();
    });
    return sign > 0 ? e : -e;
}

/// cos(pi t) to within 2^-m. Exact whenever t is a multiple of 1/2.
inline Enclosure cos_pi(const Dyadic& t, std::int64_t m) { return sin_pi(t + Dyadic::ratio(1, 1), m); }

/// e^x to within 2^-m.
inline Enclosure exp(const Dyadic& x, std::int64_t m) {
    if (x.is_zero()) return Enclosure(Dyadic(1));
    if (x.abs() <= Dyadic(1)) {
        return detail::refine(m, [&](std::int64_t p) {
            mpz_class xv = x.shifted(p).floor_int();
            detail::Fixed e = detail::exp_series(xv, p);
            e.err += 3;  // floor of the argument moves it by < 2^-p, and |exp'| < 3 on [-1, 1]
            return e.to_enclosure();
        });
    }
    // e^x = (e^(x / 2^s))^(2^s); squaring amplifies the relative error by about 2^s.
    std::int64_t s = x.abs().ceil_log2();
    Dyadic reduced = x.shifted(-s);
    std::int64_t magnitude = 2 * (x.abs().floor_int().get_si() + 1);
    return detail::refine(m, [&](std::int64_t p) {
        Enclosure e = exp(reduced, p + s + magnitude);
        for (std::int64_t i = 0; i < s; ++i) e = e * e;
        return e;
    });
}

/// 2^x to within 2^-m. Exact when x is an integer.
inline Enclosure pow2(const Dyadic& x, std::int64_t m) {
    mpz_class whole = x.floor_int();
    if (!whole.fits_slong_p()) throw std::overflow_error("pow2: exponent out of range");
    std::int64_t n = whole.get_si();
    Dyadic frac = x - Dyadic(whole, 0);
    if (frac.is_zero()) return Enclosure(Dyadic::pow2(n));
    // 2^frac = exp(frac ln 2) with frac ln 2 in (0, ln 2).
    Enclosure e = detail::refine(m + n, [&](std::int64_t p) {
        detail::Fixed arg = detail::scale_fixed(frac, detail::ln2_fixed(p));
        detail::Fixed v = detail::exp_series(arg.value, p);
        v.err += 3 * arg.err;
        return v.to_enclosure();
    });
    return e.shifted(n);
}

}  // namespace ivphard

#endif  // IVPHARD_TRANSCENDENTAL_HPP
