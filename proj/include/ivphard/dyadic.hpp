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

#ifndef IVPHARD_DYADIC_HPP
#define IVPHARD_DYADIC_HPP

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ivphard {

/// Rounding direction for `Dyadic::round_to`.
enum class Rounding { floor, ceil, nearest };

/// Exact binary rational mantissa * 2^exponent.
///
/// Always kept canonical: the mantissa is odd, or zero with exponent 0.
/// Addition, subtraction, multiplication and comparison never round.
class Dyadic {
  public:
    Dyadic() = default;
    Dyadic(long v) : mant_(v) { canonicalize(); }  // NOLINT(google-explicit-constructor)
    Dyadic(int v) : mant_(v) { canonicalize(); }   // NOLINT(google-explicit-constructor)
    Dyadic(mpz_class mant, std::int64_t exp) : mant_(std::move(mant)), exp_(exp) { canonicalize(); }

    static Dyadic from_int(const mpz_class& v) { return Dyadic(v, 0); }
    /// 2^k.
    static Dyadic pow2(std::int64_t k) { return Dyadic(mpz_class(1), k); }
    /// num / 2^k.
    static Dyadic ratio(long num, std::int64_t k) { return Dyadic(mpz_class(num), -k); }

    const mpz_class& mantissa() const { return mant_; }
    std::int64_t exponent() const { return exp_; }

    bool is_zero() const { return sgn(mant_) == 0; }
    int sign() const { return sgn(mant_); }
    bool is_integer() const { return is_zero() || exp_ >= 0; }

    Dyadic operator-() const { return Dyadic(-mant_, exp_, Raw{}); }
    Dyadic abs() const { return Dyadic(::abs(mant_), exp_, Raw{}); }

    friend Dyadic operator+(const Dyadic& a, const Dyadic& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        if (a.exp_ == b.exp_) return Dyadic(a.mant_ + b.mant_, a.exp_);
        const Dyadic& lo = a.exp_ < b.exp_ ? a : b;
        const Dyadic& hi = a.exp_ < b.exp_ ? b : a;
        mpz_class shifted;
        mpz_mul_2exp(shifted.get_mpz_t(), hi.mant_.get_mpz_t(), shift_amount(hi.exp_ - lo.exp_));
        return Dyadic(shifted + lo.mant_, lo.exp_);
    }
    friend Dyadic operator-(const Dyadic& a, const Dyadic& b) { return a + (-b); }
    friend Dyadic operator*(const Dyadic& a, const Dyadic& b) {
        if (a.is_zero() || b.is_zero()) return {};
        return Dyadic(a.mant_ * b.mant_, a.exp_ + b.exp_, Raw{});
    }
    Dyadic& operator+=(const Dyadic& o) { return *this = *this + o; }
    Dyadic& operator-=(const Dyadic& o) { return *this = *this - o; }
    Dyadic& operator*=(const Dyadic& o) { return *this = *this * o; }

    /// Multiplication by 2^k (exact).
    Dyadic shifted(std::int64_t k) const {
        if (is_zero()) return {};
        return Dyadic(mant_, exp_ + k, Raw{});
    }

    friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
        int sa = a.sign();
        int sb = b.sign();
        if (sa != sb) return sa <=> sb;
        if (sa == 0) return std::strong_ordering::equal;
        // Same sign: compare magnitudes by bit position first, then exactly.
        std::int64_t ta = a.top_bit();
        std::int64_t tb = b.top_bit();
        if (ta != tb) return sa > 0 ? ta <=> tb : tb <=> ta;
        int c = 0;
        if (a.exp_ == b.exp_) {
            c = cmp(a.mant_, b.mant_);
        } else if (a.exp_ > b.exp_) {
            mpz_class s;
            mpz_mul_2exp(s.get_mpz_t(), a.mant_.get_mpz_t(), shift_amount(a.exp_ - b.exp_));
            c = cmp(s, b.mant_);
        } else {
            mpz_class s;
            mpz_mul_2exp(s.get_mpz_t(), b.mant_.get_mpz_t(), shift_amount(b.exp_ - a.exp_));
            c = cmp(a.mant_, s);
        }
        return c <=> 0;
    }
    friend bool operator==(const Dyadic& a, const Dyadic& b) { return a.exp_ == b.exp_ && a.mant_ == b.mant_; }

    /// floor(x) as an integer.
    mpz_class floor_int() const {
        mpz_class r;
        if (exp_ >= 0) {
            mpz_mul_2exp(r.get_mpz_t(), mant_.get_mpz_t(), shift_amount(exp_));
        } else {
            mpz_fdiv_q_2exp(r.get_mpz_t(), mant_.get_mpz_t(), shift_amount(-exp_));
        }
        return r;
    }
    mpz_class ceil_int() const {
        mpz_class r;
        if (exp_ >= 0) {
            mpz_mul_2exp(r.get_mpz_t(), mant_.get_mpz_t(), shift_amount(exp_));
        } else {
            mpz_cdiv_q_2exp(r.get_mpz_t(), mant_.get_mpz_t(), shift_amount(-exp_));
        }
        return r;
    }

    /// A multiple of 2^-m next to x: floor(2^m x)/2^m, ceil(2^m x)/2^m, or the nearest one
    /// (ties toward +infinity).
    Dyadic round_to(std::int64_t m, Rounding mode) const {
        if (is_zero() || exp_ >= -m) return *this;
        Dyadic scaled = shifted(m);
        mpz_class k;
        switch (mode) {
            case Rounding::floor: k = scaled.floor_int(); break;
            case Rounding::ceil: k = scaled.ceil_int(); break;
            case Rounding::nearest: k = (scaled + Dyadic::ratio(1, 1)).floor_int(); break;
        }
        return Dyadic(k, -m);
    }

    /// Position of the leading bit: 2^top_bit <= |x| < 2^(top_bit+1). Undefined for zero.
    std::int64_t top_bit() const {
        return exp_ + static_cast<std::int64_t>(mpz_sizeinbase(mant_.get_mpz_t(), 2)) - 1;
    }
    /// Smallest e with |x| <= 2^e. Undefined for zero.
    std::int64_t ceil_log2() const {
        std::int64_t t = top_bit();
        return (mant_ == 1 || mant_ == -1) ? t : t + 1;
    }

    /// Digit of weight 2^k in the binary expansion of |x|.
    int bit(std::int64_t k) const {
        Dyadic s = abs().shifted(-k);
        mpz_class f = s.floor_int();
        return mpz_tstbit(f.get_mpz_t(), 0);
    }

    double to_double() const {
        if (is_zero()) return 0.0;
        long e = 0;
        double d = mpz_get_d_2exp(&e, mant_.get_mpz_t());
        return std::ldexp(d, static_cast<int>(std::clamp<std::int64_t>(e + exp_, -100000, 100000)));
    }

    /// "mantissa*2^exponent" with a decimal mantissa.
    std::string to_string() const { return mant_.get_str(10) + "*2^" + std::to_string(exp_); }

    /// Exact positional binary notation, e.g. "-101.011".
    std::string to_binary() const {
        if (is_zero()) return "0";
        std::string digits = mpz_class(::abs(mant_)).get_str(2);
        std::string out = sign() < 0 ? "-" : "";
        if (exp_ >= 0) return out + digits + std::string(static_cast<std::size_t>(exp_), '0');
        auto frac = static_cast<std::size_t>(-exp_);
        if (digits.size() <= frac) digits = std::string(frac - digits.size() + 1, '0') + digits;
        return out + digits.substr(0, digits.size() - frac) + "." + digits.substr(digits.size() - frac);
    }

  private:
    struct Raw {};
    Dyadic(mpz_class mant, std::int64_t exp, Raw) : mant_(std::move(mant)), exp_(exp) {}

    static mp_bitcnt_t shift_amount(std::int64_t k) {
        if (k < 0 || k > (std::int64_t{1} << 40)) throw std::overflow_error("Dyadic: exponent shift out of range");
        return static_cast<mp_bitcnt_t>(k);
    }

    void canonicalize() {
        if (sgn(mant_) == 0) {
            exp_ = 0;
            return;
        }
        mp_bitcnt_t tz = mpz_scan1(mant_.get_mpz_t(), 0);
        if (tz > 0) {
            mpz_fdiv_q_2exp(mant_.get_mpz_t(), mant_.get_mpz_t(), tz);
            exp_ += static_cast<std::int64_t>(tz);
        }
    }

    mpz_class mant_{0};
    std::int64_t exp_ = 0;
};

inline Dyadic min(const Dyadic& a, const Dyadic& b) { return b < a ? b : a; }
inline Dyadic max(const Dyadic& a, const Dyadic& b) { return a < b ? b : a; }

/// Parses "p", "p/q" (q a power of two), "m*2^e", or a finite decimal such as "0.375"
/// that happens to be dyadic. Throws std::invalid_argument otherwise.
inline Dyadic parse_dyadic(std::string_view text) {
    auto bad = [&] { return std::invalid_argument("not a dyadic rational: '" + std::string(text) + "'"); };
    auto parse_int = [&](std::string_view s) {
        mpz_class v;
        std::string str(s);
        if (!str.empty() && str[0] == '+') str.erase(0, 1);
        if (str.empty() || v.set_str(str, 10) != 0) throw bad();
        return v;
    };
    if (auto star = text.find("*2^"); star != std::string_view::npos) {
        mpz_class m = parse_int(text.substr(0, star));
        mpz_class e = parse_int(text.substr(star + 3));
        if (!e.fits_slong_p()) throw bad();
        return Dyadic(m, e.get_si());
    }
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        mpz_class p = parse_int(text.substr(0, slash));
        mpz_class q = parse_int(text.substr(slash + 1));
        if (q <= 0 || mpz_popcount(q.get_mpz_t()) != 1) throw bad();
        return Dyadic(p, -static_cast<std::int64_t>(mpz_scan1(q.get_mpz_t(), 0)));
    }
    if (auto dot = text.find('.'); dot != std::string_view::npos) {
        std::string digits = std::string(text.substr(0, dot)) + std::string(text.substr(dot + 1));
        auto frac = static_cast<unsigned long>(text.size() - dot - 1);
        mpz_class num = parse_int(digits);
        mpz_class ten_pow;
        mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, frac);
        // num / 10^frac = num / (2^frac 5^frac): dyadic iff 5^frac divides num.
        mpz_class five_pow;
        mpz_ui_pow_ui(five_pow.get_mpz_t(), 5, frac);
        if (!mpz_divisible_p(num.get_mpz_t(), five_pow.get_mpz_t())) throw bad();
        mpz_class q = num / five_pow;
        return Dyadic(q, -static_cast<std::int64_t>(frac));
    }
    return Dyadic(parse_int(text), 0);
}

}  // namespace ivphard

#endif  // IVPHARD_DYADIC_HPP
