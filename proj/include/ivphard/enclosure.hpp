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

#ifndef IVPHARD_ENCLOSURE_HPP
#define IVPHARD_ENCLOSURE_HPP

#include <cstdint>
#include <limits>
#include <string>

#include "ivphard/dyadic.hpp"

namespace ivphard {

/// A certified approximation: the true value lies in [mid - rad, mid + rad].
///
/// `err_exp()` is the exponent of the published guarantee |x - mid| <= 2^err_exp. An exact
/// enclosure (rad == 0) reports `kExact`.
class Enclosure {
  public:
    static constexpr std::int64_t kExact = std::numeric_limits<std::int64_t>::min();

    Enclosure() = default;
    Enclosure(Dyadic exact) : mid_(std::move(exact)) {}  // NOLINT(google-explicit-constructor)
    Enclosure(Dyadic mid, Dyadic rad) : mid_(std::move(mid)), rad_(std::move(rad)) {
        if (rad_.sign() < 0) rad_ = -rad_;
        tidy();
    }
    static Enclosure with_err_exp(Dyadic mid, std::int64_t err_exp) {
        if (err_exp == kExact) return Enclosure(std::move(mid));
        return Enclosure(std::move(mid), Dyadic::pow2(err_exp));
    }

    const Dyadic& mid() const { return mid_; }
    const Dyadic& rad() const { return rad_; }
    Dyadic lo() const { return mid_ - rad_; }
    Dyadic hi() const { return mid_ + rad_; }
    bool is_exact() const { return rad_.is_zero(); }
    std::int64_t err_exp() const { return rad_.is_zero() ? kExact : rad_.ceil_log2(); }
    /// The guarantee |x - mid| <= 2^-m holds.
    bool meets(std::int64_t m) const { return rad_.is_zero() || rad_.ceil_log2() <= -m; }

    bool contains(const Dyadic& x) const { return lo() <= x && x <= hi(); }
    bool contains(const Enclosure& inner) const { return lo() <= inner.lo() && inner.hi() <= hi(); }
    bool overlaps(const Enclosure& o) const { return lo() <= o.hi() && o.lo() <= hi(); }
    /// Upper bound on |x|.
    Dyadic mag() const { return mid_.abs() + rad_; }

    Enclosure operator-() const { return Enclosure(-mid_, rad_, Raw{}); }
    friend Enclosure operator+(const Enclosure& a, const Enclosure& b) {
        return Enclosure(a.mid_ + b.mid_, a.rad_ + b.rad_);
    }
    friend Enclosure operator-(const Enclosure& a, const Enclosure& b) {
        return Enclosure(a.mid_ - b.mid_, a.rad_ + b.rad_);
    }
    friend Enclosure operator*(const Enclosure& a, const Enclosure& b) {
        Dyadic rad = a.mid_.abs() * b.rad_ + b.mid_.abs() * a.rad_ + a.rad_ * b.rad_;
        return Enclosure(a.mid_ * b.mid_, rad);
    }
    Enclosure shifted(std::int64_t k) const { return Enclosure(mid_.shifted(k), rad_.shifted(k), Raw{}); }

    /// "mid ± 2^err_exp" (or just mid when exact).
    std::string to_string() const {
        if (is_exact()) return mid_.to_string();
        return mid_.to_string() + " ± 2^" + std::to_string(err_exp());
    }

  private:
    struct Raw {};
    Enclosure(Dyadic mid, Dyadic rad, Raw) : mid_(std::move(mid)), rad_(std::move(rad)) {}

    // Keeps mantissas bounded: the midpoint is rounded to a grid 2^-kGuard below the radius and
    // the rounding is absorbed into the radius, which itself is rounded up to a few bits.
    static constexpr std::int64_t kGuard = 12;
    void tidy() {
        if (rad_.is_zero()) return;
        std::int64_t e = rad_.ceil_log2();
        std::int64_t grid = kGuard - e;  // round to multiples of 2^-(grid)
        Dyadic rounded = mid_.round_to(grid, Rounding::nearest);
        Dyadic slack = (mid_ - rounded).abs();
        mid_ = std::move(rounded);
        rad_ = (rad_ + slack).round_to(grid, Rounding::ceil);
    }

    Dyadic mid_;
    Dyadic rad_;
};

}  // namespace ivphard

#endif  // IVPHARD_ENCLOSURE_HPP
