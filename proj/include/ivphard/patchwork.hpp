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

#ifndef IVPHARD_PATCHWORK_HPP
#define IVPHARD_PATCHWORK_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ivphard/blocks.hpp"
#include "ivphard/dyadic.hpp"
#include "ivphard/enclosure.hpp"
#include "ivphard/qbf.hpp"
#include "ivphard/report.hpp"
#include "ivphard/transcendental.hpp"

namespace ivphard {

class InsufficientPrecision : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class Segment { left_block, right_block, left_amp, right_amp, tail, end };

inline const char* segment_name(Segment s) {
    switch (s) {
        case Segment::left_block: return "left-block";
        case Segment::right_block: return "right-block";
        case Segment::left_amp: return "left-amp";
        case Segment::right_amp: return "right-amp";
        case Segment::tail: return "tail";
        case Segment::end: return "end";
    }
    return "?";
}

/// Affine chart T = origin + sign * t * 2^-width for local t in [0, 1].
struct Chart {
    Dyadic origin;
    int sign = 1;
    std::int64_t width = 0;

    Dyadic global(const Dyadic& t) const {
        Dyadic step = t.shifted(-width);
        return sign > 0 ? origin + step : origin - step;
    }
    Dyadic local(const Dyadic& T) const {
        Dyadic d = (T - origin).shifted(width);
        return sign > 0 ? d : -d;
    }
};

/// Where a global time falls: the index (u, w or k), the segment kind, and the local chart.
struct Location {
    std::string index;
    std::int64_t level = 0;  // |u|, |w| or k
    Segment segment = Segment::tail;
    Dyadic t;
    Chart chart;
    const Block* block = nullptr;
    bool materialized = false;
};

/// Normalization of h on one segment: phi(t) = (h(chart(t)) - offset) 2^amp, the local
/// quantity whose residual is checked, and the sub-interval of t on which phi is smooth.
struct LocalFrame {
    std::int64_t amp = 0;
    Dyadic offset;
    Dyadic smooth_lo, smooth_hi;
    // tau(delta_exp, m) in units of phi
    std::function<Dyadic(std::int64_t, std::int64_t)> tau;
    std::int64_t precision = 80;  // a precision for phi that resolves all of its digits
    std::int64_t y_scale = 0;     // in units of phi, g varies on scale 2^-y_scale near the trajectory
    std::int64_t delta_exp = 20;  // residual step 2^-delta_exp in t
    std::int64_t residual_m = 80;
};

/// A global pair (g, h) on [0, 1] built from blocks.
class Assembly {
  public:
    virtual ~Assembly() = default;

    virtual std::string variant() const = 0;
    virtual Location locate(const Dyadic& T) const = 0;
    /// h at local coordinate t of the segment `loc` (which fixes the formula used).
    virtual Enclosure eval_h_local(const Location& loc, const Dyadic& t, std::int64_t m) const = 0;
    virtual Enclosure eval_g_local(const Location& loc, const Dyadic& t, const Dyadic& Y, std::int64_t m) const = 0;
    virtual Enclosure h_at_one(std::int64_t m) const = 0;
    virtual LocalFrame frame(const Location& loc) const = 0;
    /// Lipschitz constant of g in Y at the given location.
    virtual Dyadic slope_bound(const Location& loc) const = 0;
    /// Modulus exponent s(k): |T1 - T0| < 2^{-s(k)-k} forces |h(T1) - h(T0)| < 2^-k.
    virtual std::int64_t modulus_exp(std::int64_t k) const = 0;
    /// Interval boundaries inside the materialized region.
    virtual std::vector<Dyadic> seam_points() const = 0;
    /// Segments worth sampling (those carrying nonzero blocks or amplifiers).
    virtual std::vector<Location> featured() const = 0;
    /// Smallest width of any materialized segment, as an exponent.
    virtual std::int64_t finest_width() const = 0;

    Enclosure eval_h(const Dyadic& T, std::int64_t m) const {
        check_T(T);
        if (T == Dyadic(1)) return h_at_one(m);
        Location loc = locate(T);
        return eval_h_local(loc, loc.t, m);
    }

    Enclosure eval_g(const Dyadic& T, const Dyadic& Y, std::int64_t m) const {
        check_T(T);
        if (T == Dyadic(1)) return Enclosure(Dyadic(0));
        Location loc = locate(T);
        return eval_g_local(loc, loc.t, Y, m);
    }

    /// The segment whose closure contains T from the left, with t expressed in that chart.
    Location locate_left(const Dyadic& T) const {
        check_T(T);
        if (T.is_zero()) throw DomainError("locate_left: no segment left of 0");
        Location loc = locate(T - Dyadic::pow2(-(finest_width() + 8)));
        loc.t = loc.chart.local(T);
        return loc;
    }

  protected:
    static void check_T(const Dyadic& T) {
        if (T < Dyadic(0) || T > Dyadic(1)) throw DomainError("global time outside [0,1]: " + T.to_string());
    }

    /// Level k with T in [1 - 2^-k, 1 - 2^-(k+1)).
    static std::int64_t level_of(const Dyadic& T) { return -(Dyadic(1) - T).ceil_log2(); }

    static Dyadic clamp_unit(const Dyadic& y) { return max(Dyadic(-1), min(Dyadic(1), y)); }
};

inline Dyadic clamp_unit01(const Dyadic& T) { return max(Dyadic(0), min(Dyadic(1), T)); }

namespace detail {

inline std::string bits_of(const mpz_class& v, std::int64_t len) {
    std::string s = len > 0 ? mpz_class(v).get_str(2) : "";
    if (static_cast<std::int64_t>(s.size()) < len) s = std::string(static_cast<std::size_t>(len) - s.size(), '0') + s;
    return s;
}

/// Lazily built blocks keyed by string, safe to share between threads.
class BlockCache {
  public:
    const Block& get(const std::string& key, const std::function<Block()>& make) const {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = blocks_.find(key);
        if (it == blocks_.end()) it = blocks_.emplace(key, std::make_unique<Block>(make())).first;
        return *it->second;
    }

  private:
    mutable std::mutex mu_;
    mutable std::map<std::string, std::unique_ptr<Block>> blocks_;
};

inline Dyadic block_tau(const Block& b, std::int64_t delta_exp, std::int64_t m) {
    return Dyadic::pow2(3 * b.qexp() - 2 * delta_exp) + Dyadic::pow2(-m + 1 + delta_exp) + Dyadic::pow2(-m);
}

inline LocalFrame block_frame(const Block& b, const Dyadic& t, std::int64_t amp, const Dyadic& offset) {
    LocalFrame f;
    f.amp = amp;
    f.offset = offset;
    if (b.is_zero_block()) {
        f.smooth_lo = Dyadic(0);
        f.smooth_hi = Dyadic(1);
        f.tau = [](std::int64_t de, std::int64_t m) { return Dyadic::pow2(-m + 1 + de); };
        return f;
    }
    GridDecomposition d = b.decompose_t(t);
    f.smooth_lo = Dyadic(mpz_class(d.T), -b.qexp());
    f.smooth_hi = Dyadic(mpz_class(d.T + 1), -b.qexp());
    const Block* bp = &b;
    f.tau = [bp](std::int64_t de, std::int64_t m) { return block_tau(*bp, de, m); };
    f.precision = detail::block_precision(b);
    f.delta_exp = b.qexp() + 14;
    f.y_scale = static_cast<std::int64_t>(d.j) * b.b_exp();
    return f;
}

}  // namespace detail

/// Main construction: block u sits on [l-_u, l+_u] with c_u = 1 - 2^-|u| + (2 u + 1)/Lambda_u,
/// Lambda_u = 2^{2|u|+2}, Gamma_u = 1; h(c_u) = L(u) 2^-(lambda + gamma + rho).
class MainAssembly : public Assembly {
  public:
    static constexpr int kEnumeratedLength = 16;

    /// Intervals with |u| <= max_len are materialized; the codes of length at most 16 plus
    /// `extra` are the ones listed for sampling, seams and decoding.
    explicit MainAssembly(int max_len = 16, const std::vector<std::string>& extra = {}) : max_len_(max_len) {
        if (max_len < 0 || max_len > 64) throw std::invalid_argument("MainAssembly: max_len out of range");
        for (int len = 1; len <= std::min(max_len, kEnumeratedLength); ++len)
            for (std::uint64_t v = 0; v < (std::uint64_t{1} << len); ++v) {
                std::string u = detail::bits_of(mpz_class(static_cast<unsigned long>(v)), len);
                if (decode_formula(u)) codes_.push_back(u);
            }
        for (const auto& u : extra) {
            if (static_cast<int>(u.size()) > max_len) throw std::invalid_argument("MainAssembly: code longer than max_len");
            if (!decode_formula(u)) throw std::invalid_argument("MainAssembly: not a formula code: " + u);
            if (static_cast<int>(u.size()) > kEnumeratedLength) codes_.push_back(u);
        }
    }

    std::string variant() const override { return "main"; }
    int max_len() const { return max_len_; }
    const std::vector<std::string>& valid_codes() const { return codes_; }

    static int lambda(std::int64_t k) { return static_cast<int>(2 * k + 2); }
    static int gamma(std::int64_t) { return 0; }

    static Dyadic center(const std::string& u) {
        std::int64_t k = static_cast<std::int64_t>(u.size());
        mpz_class ubar = u.empty() ? mpz_class(0) : mpz_class(u, 2);
        return Dyadic(1) - Dyadic::pow2(-k) + Dyadic(2 * ubar + 1, -lambda(k));
    }
    static Dyadic left_end(const std::string& u) { return center(u) - Dyadic::pow2(-lambda(static_cast<std::int64_t>(u.size()))); }
    static Dyadic right_end(const std::string& u) { return center(u) + Dyadic::pow2(-lambda(static_cast<std::int64_t>(u.size()))); }

    const Block& block(const std::string& u) const {
        return cache_.get(u, [&] {
            Block b = Block::from_code(u, lambda(static_cast<std::int64_t>(u.size())));
            // gamma = 0 requires sup |g_u| <= 2^{-|u|}
            if (b.g_sup_bound() > Dyadic::pow2(gamma(0) - static_cast<std::int64_t>(u.size())))
                throw std::logic_error("MainAssembly: configured gamma too small for block " + u);
            return b;
        });
    }

    Location locate(const Dyadic& T) const override {
        check_T(T);
        Location loc;
        if (T == Dyadic(1)) {
            loc.segment = Segment::end;
            loc.t = Dyadic(0);
            loc.chart = {Dyadic(1), 1, 0};
            return loc;
        }
        std::int64_t k = level_of(T);
        loc.level = k;
        Dyadic offset = (T - (Dyadic(1) - Dyadic::pow2(-k))).shifted(2 * k + 1);
        mpz_class ubar = offset.floor_int();
        Dyadic s = offset - Dyadic(ubar, 0);
        loc.materialized = k <= max_len_;
        if (!loc.materialized) {
            loc.segment = Segment::tail;
            loc.t = s;
            loc.chart = {Dyadic(1) - Dyadic::pow2(-k) + Dyadic(ubar, -(2 * k + 1)), 1, 2 * k + 1};
            return loc;
        }
        loc.index = detail::bits_of(ubar, k);
        Dyadic l = Dyadic(1) - Dyadic::pow2(-k) + Dyadic(ubar, -(2 * k + 1));
        if (s <= Dyadic::ratio(1, 1)) {
            loc.segment = Segment::left_block;
            loc.t = s.shifted(1);
            loc.chart = {l, 1, lambda(k)};
        } else {
            loc.segment = Segment::right_block;
            loc.t = (Dyadic(1) - s).shifted(1);
            loc.chart = {l + Dyadic::pow2(-(2 * k + 1)), -1, lambda(k)};
        }
        loc.block = &block(loc.index);
        return loc;
    }

    Enclosure eval_h_local(const Location& loc, const Dyadic& t, std::int64_t m) const override {
        if (loc.segment == Segment::end) return Enclosure(Dyadic(0));
        if (!loc.materialized) return Enclosure(Dyadic(0), Dyadic::pow2(-2 * loc.level - 2));
        std::int64_t scale = lambda(loc.level) + gamma(loc.level);
        return loc.block->eval_h(t, m - scale).shifted(-scale);
    }

    Enclosure eval_g_local(const Location& loc, const Dyadic& t, const Dyadic& Y, std::int64_t m) const override {
        if (loc.segment == Segment::end) return Enclosure(Dyadic(0));
        if (!loc.materialized) return Enclosure(Dyadic(0), Dyadic::pow2(-2 * loc.level - 6));
        std::int64_t scale = lambda(loc.level) + gamma(loc.level);
        Dyadic yhat = clamp_unit(Y.shifted(scale));
        Enclosure g = loc.block->eval_g(t, yhat, m + gamma(loc.level)).shifted(-gamma(loc.level));
        return loc.chart.sign > 0 ? g : -g;
    }

    Enclosure h_at_one(std::int64_t) const override { return Enclosure(Dyadic(0)); }

    LocalFrame frame(const Location& loc) const override {
        return detail::block_frame(*loc.block, loc.t, lambda(loc.level) + gamma(loc.level), Dyadic(0));
    }

    Dyadic slope_bound(const Location&) const override { return Dyadic(1); }
    std::int64_t modulus_exp(std::int64_t) const override { return 0; }
    std::int64_t finest_width() const override { return lambda(max_len_ + 1); }

    std::vector<Dyadic> seam_points() const override {
        std::vector<Dyadic> out;
        for (int k = 0; k <= max_len_; ++k) out.push_back(Dyadic(1) - Dyadic::pow2(-k));
        out.push_back(Dyadic(1) - Dyadic::pow2(-(max_len_ + 1)));
        for (const auto& u : codes_) {
            out.push_back(left_end(u));
            out.push_back(center(u));
            out.push_back(right_end(u));
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        out.erase(std::remove_if(out.begin(), out.end(), [](const Dyadic& x) { return x.is_zero(); }), out.end());
        return out;
    }

    std::vector<Location> featured() const override {
        std::vector<Location> out;
        for (const auto& u : codes_) {
            out.push_back(locate(left_end(u)));
            out.push_back(locate(center(u) + Dyadic::pow2(-lambda(static_cast<std::int64_t>(u.size())) - 1)));
        }
        return out;
    }

  private:
    int max_len_;
    std::vector<std::string> codes_;
    detail::BlockCache cache_;
};

/// Stacked construction: block k (the formula instance(k)) on [l_k, l_{k+1}], l_k = 1 - 2^-k,
/// with outputs piling up so that h(1) = sum_k L_k 2^-(2k + gamma + rhobar(k) + rho(k)).
class TallyAssembly : public Assembly {
  public:
    using Instance = std::function<Formula(int)>;

    TallyAssembly(Instance instance, int depth) : instance_(std::move(instance)), depth_(depth) {
        if (depth < 0 || depth > 40) throw std::invalid_argument("TallyAssembly: depth out of range");
        rho_bar_.push_back(0);
        offsets_.push_back(Dyadic(0));
        for (int k = 0; k < depth; ++k) {
            blocks_.push_back(Block::make(instance_(k), lambda(k)));
            const Block& b = blocks_.back();
            rho_bar_.push_back(rho_bar_.back() + b.rho());
            offsets_.push_back(offsets_.back() + b.h_at_one().shifted(-(2 * k + gamma(k) + rho_bar_[k])));
        }
    }

    /// Instances from a bit list: bit 1 selects a true two-variable formula, bit 0 a false one.
    static TallyAssembly from_bits(const std::vector<int>& bits) {
        static const Formula yes = parse_formula("(E x2 (A x1 (or x1 x2)))");
        static const Formula no = parse_formula("(A x2 (E x1 (and x1 x2)))");
        std::vector<int> copy = bits;
        return TallyAssembly([copy](int k) { return copy.at(static_cast<std::size_t>(k)) ? yes : no; },
                             static_cast<int>(bits.size()));
    }

    std::string variant() const override { return "tally"; }
    int depth() const { return depth_; }
    static int lambda(std::int64_t k) { return static_cast<int>(k + 1); }
    static int gamma(std::int64_t) { return 0; }
    std::int64_t rho(int k) const { return blocks_.at(static_cast<std::size_t>(k)).rho(); }
    std::int64_t rho_bar(int k) const { return rho_bar_.at(static_cast<std::size_t>(k)); }
    const Block& block(int k) const { return blocks_.at(static_cast<std::size_t>(k)); }
    /// Sum of the outputs of blocks below k.
    const Dyadic& offset(int k) const { return offsets_.at(static_cast<std::size_t>(k)); }
    /// Position of the bit L(0^k) in h(1).
    std::int64_t bit_position(int k) const { return 2 * k + gamma(k) + rho_bar(k) + rho(k); }
    /// Sum over k >= depth of 2^-(2k + rhobar(k) + rho(k)), using rho(k) >= lambda(k) + 7.
    Dyadic tail_bound() const { return Dyadic::pow2(1 - (2 * depth_ + rho_bar_.back() + lambda(depth_) + 7)); }

    Location locate(const Dyadic& T) const override {
        check_T(T);
        Location loc;
        if (T == Dyadic(1)) {
            loc.segment = Segment::end;
            loc.t = Dyadic(0);
            loc.chart = {Dyadic(1), 1, 0};
            return loc;
        }
        std::int64_t k = level_of(T);
        loc.level = k;
        loc.index = std::to_string(k);
        loc.chart = {Dyadic(1) - Dyadic::pow2(-k), 1, k + 1};
        loc.t = loc.chart.local(T);
        loc.materialized = k < depth_;
        loc.segment = loc.materialized ? Segment::left_block : Segment::tail;
        if (loc.materialized) loc.block = &blocks_[static_cast<std::size_t>(k)];
        return loc;
    }

    Enclosure eval_h_local(const Location& loc, const Dyadic& t, std::int64_t m) const override {
        if (loc.segment == Segment::end) return h_at_one(m);
        if (!loc.materialized) return Enclosure(offsets_.back(), tail_bound());
        int k = static_cast<int>(loc.level);
        std::int64_t scale = 2 * k + gamma(k) + rho_bar(k);
        return loc.block->eval_h(t, m - scale).shifted(-scale) + Enclosure(offset(k));
    }

    Enclosure eval_g_local(const Location& loc, const Dyadic& t, const Dyadic& Y, std::int64_t m) const override {
        if (loc.segment == Segment::end) return Enclosure(Dyadic(0));
        if (!loc.materialized) return Enclosure(Dyadic(0), Dyadic::pow2(-(2 * depth_ + 4 + rho_bar_.back())));
        int k = static_cast<int>(loc.level);
        // Y 2^{2k+gamma+rhobar} = 2j + (-1)^j y with y in [-1, 1]
        Dyadic z = Y.shifted(2 * k + gamma(k) + rho_bar(k));
        mpz_class j = (z.shifted(-1) + Dyadic::ratio(1, 1)).floor_int();
        Dyadic r = z - Dyadic(j, 1);
        Dyadic y = mpz_class(j % 2) != 0 ? -r : r;
        std::int64_t scale = k - 1 + gamma(k) + rho_bar(k);
        return loc.block->eval_g(t, clamp_unit(y), m + scale).shifted(-scale);
    }

    /// Partial series of h(1) with its certified tail.
    Enclosure h_at_one(std::int64_t) const override { return Enclosure(offsets_.back(), tail_bound()); }

    LocalFrame frame(const Location& loc) const override {
        int k = static_cast<int>(loc.level);
        return detail::block_frame(*loc.block, loc.t, 2 * k + gamma(k) + rho_bar(k), offset(k));
    }

    Dyadic slope_bound(const Location&) const override { return Dyadic(1); }
    std::int64_t modulus_exp(std::int64_t) const override { return 1; }
    std::int64_t finest_width() const override { return depth_ + 2; }

    std::vector<Dyadic> seam_points() const override {
        std::vector<Dyadic> out;
        for (int k = 1; k <= depth_; ++k) out.push_back(Dyadic(1) - Dyadic::pow2(-k));
        return out;
    }

    std::vector<Location> featured() const override {
        std::vector<Location> out;
        for (int k = 0; k < depth_; ++k) out.push_back(locate(Dyadic(1) - Dyadic::pow2(-k)));
        return out;
    }

  private:
    Instance instance_;
    int depth_;
    std::vector<Block> blocks_;
    std::vector<std::int64_t> rho_bar_;
    std::vector<Dyadic> offsets_;
};

/// Construction with amplifiers: word w owns [l-_w, l+_w] = c_w -+ 2/Lambda_w, split into block,
/// amplifier, amplifier, block; h(c_w) = h_{u_w}(1) / Lambda_w.
class ExpAssembly : public Assembly {
  public:
    explicit ExpAssembly(int max_len = 4) : max_len_(max_len) {
        if (max_len < 0 || max_len > 8) throw std::invalid_argument("ExpAssembly: max_len out of range");
        std::size_t need = (std::size_t{1} << (max_len + 1)) - 1;
        for (int len = 1; formulas_.size() < need; ++len) {
            if (len > 40) throw std::logic_error("ExpAssembly: ran out of formulas");
            for (std::uint64_t v = 0; v < (std::uint64_t{1} << len) && formulas_.size() < need; ++v) {
                std::string code = detail::bits_of(mpz_class(static_cast<unsigned long>(v)), len);
                if (auto f = decode_formula(code); f && f->n <= 2) formulas_.push_back(code);
            }
        }
        for (std::int64_t k = 0; k <= max_len; ++k) {
            Dyadic lhs = (Enclosure(Dyadic::ratio(3, 1)) * ln2(40) * Enclosure(Dyadic(gamma(k)))).hi();
            if (lhs > Dyadic::pow2(gamma(k) - k)) throw std::logic_error("ExpAssembly: gamma violates (1.5 ln 2) gamma(k) <= 2^{gamma(k)-k}");
            Dyadic amp = (Enclosure(Dyadic::ratio(3, 1)) * ln2(40) * Enclosure(Dyadic(gamma_w(k)))).hi();
            if (amp > Dyadic::pow2(s(k))) throw std::logic_error("ExpAssembly: s(k) too small for the amplifier");
        }
    }

    std::string variant() const override { return "exp"; }
    int max_len() const { return max_len_; }

    static std::int64_t gamma(std::int64_t k) { return 2 * k + 4; }
    /// gamma(2^|w|), the exponent of Gamma_w.
    static std::int64_t gamma_w(std::int64_t len) { return gamma(std::int64_t{1} << len); }
    static std::int64_t lambda_w(std::int64_t len) { return 2 * len + 3; }
    static std::int64_t s(std::int64_t k) { return k + 3; }
    static std::int64_t r(std::int64_t k) { return 2 * k + 3 + s(k); }

    /// Code of u_w: the formulas with at most two variables in order of code length, then
    /// lexicographically; w picks entry 2^|w| - 1 + w.
    const std::string& formula_code(const std::string& w) const {
        mpz_class wbar = w.empty() ? mpz_class(0) : mpz_class(w, 2);
        std::size_t r = (std::size_t{1} << w.size()) - 1 + wbar.get_ui();
        if (r >= formulas_.size()) throw InsufficientPrecision("ExpAssembly: word beyond materialized length");
        return formulas_[r];
    }

    static Dyadic center(const std::string& w) {
        std::int64_t k = static_cast<std::int64_t>(w.size());
        mpz_class wbar = w.empty() ? mpz_class(0) : mpz_class(w, 2);
        return Dyadic(1) - Dyadic::pow2(-k) + Dyadic(4 * wbar + 2, -lambda_w(k));
    }

    const Block& block(const std::string& w) const {
        return cache_.get(w, [&] {
            Block b = Block::from_code(formula_code(w), 0);
            std::int64_t ulen = static_cast<std::int64_t>(formula_code(w).size());
            if (b.g_sup_bound() > Dyadic::pow2(gamma(ulen) - ulen))
                throw std::logic_error("ExpAssembly: gamma below the block sup norm for " + w);
            return b;
        });
    }

    Location locate(const Dyadic& T) const override {
        check_T(T);
        Location loc;
        if (T == Dyadic(1)) {
            loc.segment = Segment::end;
            loc.t = Dyadic(0);
            loc.chart = {Dyadic(1), 1, 0};
            return loc;
        }
        std::int64_t k = level_of(T);
        loc.level = k;
        Dyadic offset = (T - (Dyadic(1) - Dyadic::pow2(-k))).shifted(2 * k + 1);
        mpz_class wbar = offset.floor_int();
        Dyadic s4 = (offset - Dyadic(wbar, 0)).shifted(2);  // in [0, 4)
        Dyadic lminus = Dyadic(1) - Dyadic::pow2(-k) + Dyadic(wbar, -(2 * k + 1));
        std::int64_t width = lambda_w(k);
        loc.materialized = k <= max_len_;
        if (!loc.materialized) {
            loc.segment = Segment::tail;
            loc.t = s4;
            loc.chart = {lminus, 1, width};
            return loc;
        }
        loc.index = detail::bits_of(wbar, k);
        auto at = [&](int q) { return lminus + Dyadic(mpz_class(q), -width); };
        if (s4 <= Dyadic(1)) {
            loc.segment = Segment::left_block;
            loc.chart = {at(0), 1, width};
        } else if (s4 <= Dyadic(2)) {
            loc.segment = Segment::left_amp;
            loc.chart = {at(1), 1, width};
        } else if (s4 < Dyadic(3)) {
            loc.segment = Segment::right_amp;
            loc.chart = {at(3), -1, width};
        } else {
            loc.segment = Segment::right_block;
            loc.chart = {at(4), -1, width};
        }
        loc.t = loc.chart.local(T);
        loc.block = &block(loc.index);
        return loc;
    }

    static bool is_amp(Segment s) { return s == Segment::left_amp || s == Segment::right_amp; }

    Enclosure eval_h_local(const Location& loc, const Dyadic& t, std::int64_t m) const override {
        if (loc.segment == Segment::end) return Enclosure(Dyadic(0));
        if (!loc.materialized) return Enclosure(Dyadic(0), Dyadic::pow2(-lambda_w(loc.level)));
        std::int64_t scale = lambda_w(loc.level) + gamma_w(loc.level);
        if (!is_amp(loc.segment)) return loc.block->eval_h(t, m - scale).shifted(-scale);
        // Gamma^{t^2 (3 - 2t)} h_u(1) / (Lambda Gamma)
        Dyadic out = loc.block->h_at_one().shifted(-scale);
        if (out.is_zero()) return Enclosure(Dyadic(0));
        Dyadic expo = Dyadic(gamma_w(loc.level)) * t * t * (Dyadic(3) - t.shifted(1));
        std::int64_t mag = out.ceil_log2() + gamma_w(loc.level) + 1;
        return Enclosure(out) * pow2(expo, m + std::max<std::int64_t>(mag, 0));
    }

    Enclosure eval_g_local(const Location& loc, const Dyadic& t, const Dyadic& Y, std::int64_t m) const override {
        if (loc.segment == Segment::end) return Enclosure(Dyadic(0));
        if (!loc.materialized) {
            Dyadic amp = Y.abs() * Dyadic(3 * gamma_w(std::min<std::int64_t>(loc.level, 40)), lambda_w(loc.level) - 1);
            return Enclosure(Dyadic(0), Dyadic::pow2(-4) + amp);
        }
        if (!is_amp(loc.segment)) {
            std::int64_t scale = lambda_w(loc.level) + gamma_w(loc.level);
            Dyadic yhat = clamp_unit(Y.shifted(scale));
            Enclosure g = loc.block->eval_g(t, yhat, m + gamma_w(loc.level)).shifted(-gamma_w(loc.level));
            return loc.chart.sign > 0 ? g : -g;
        }
        // +- 6 t (1 - t) Y Lambda gamma ln 2
        Dyadic c = Dyadic(6) * t * (Dyadic(1) - t) * Y * Dyadic(gamma_w(loc.level)) * Dyadic::pow2(lambda_w(loc.level));
        if (c.is_zero()) return Enclosure(Dyadic(0));
        Enclosure g = Enclosure(c) * ln2(m + std::max<std::int64_t>(c.ceil_log2() + 2, 0));
        return loc.chart.sign > 0 ? g : -g;
    }

    Enclosure h_at_one(std::int64_t) const override { return Enclosure(Dyadic(0)); }

    LocalFrame frame(const Location& loc) const override {
        std::int64_t scale = lambda_w(loc.level) + gamma_w(loc.level);
        if (!is_amp(loc.segment)) return detail::block_frame(*loc.block, loc.t, scale, Dyadic(0));
        LocalFrame f;
        f.smooth_lo = Dyadic(0);
        f.smooth_hi = Dyadic(1);
        f.offset = Dyadic(0);
        const Block& b = *loc.block;
        std::int64_t g = gamma_w(loc.level);
        if (b.h_at_one().is_zero()) {
            f.amp = 0;
            f.tau = [](std::int64_t de, std::int64_t m) { return Dyadic::pow2(-m + 1 + de); };
            return f;
        }
        // phi = Gamma^{t^2 (3 - 2t)} in [1, Gamma]; its third derivative is below (2 gamma + 3)^3 Gamma
        f.amp = scale + b.rho();
        f.tau = [g](std::int64_t de, std::int64_t m) {
            Dyadic c(2 * g + 3);
            return c * c * c * Dyadic::pow2(g - 2 * de) + Dyadic::pow2(-m + 1 + de);
        };
        f.precision = g + 60;
        f.delta_exp = 30 + g / 2;
        f.residual_m = g + 60;
        return f;
    }

    Dyadic slope_bound(const Location& loc) const override {
        if (!is_amp(loc.segment)) return Dyadic::pow2(lambda_w(loc.level));
        return (Enclosure(Dyadic::ratio(3, 1)) * ln2(40) * Enclosure(Dyadic(gamma_w(loc.level)))).hi().shifted(lambda_w(loc.level));
    }

    std::int64_t modulus_exp(std::int64_t k) const override { return s(k); }
    std::int64_t finest_width() const override { return lambda_w(max_len_ + 1); }

    std::vector<Dyadic> seam_points() const override {
        std::vector<Dyadic> out;
        for (int k = 1; k <= max_len_ + 1; ++k) out.push_back(Dyadic(1) - Dyadic::pow2(-k));
        for (int k = 0; k <= max_len_; ++k)
            for (std::uint64_t v = 0; v < (std::uint64_t{1} << k); ++v) {
                Dyadic c = center(detail::bits_of(mpz_class(static_cast<unsigned long>(v)), k));
                for (int q = -2; q <= 2; ++q) out.push_back(c + Dyadic(mpz_class(q), -lambda_w(k)));
            }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        out.erase(std::remove_if(out.begin(), out.end(), [](const Dyadic& x) { return x.is_zero(); }), out.end());
        return out;
    }

    std::vector<Location> featured() const override {
        std::vector<Location> out;
        for (int k = 0; k <= max_len_; ++k)
            for (std::uint64_t v = 0; v < (std::uint64_t{1} << k); ++v) {
                Dyadic c = center(detail::bits_of(mpz_class(static_cast<unsigned long>(v)), k));
                for (int q : {-2, -1, 0, 1}) out.push_back(locate(c + Dyadic(mpz_class(2 * q + 1), -lambda_w(k) - 1)));
            }
        return out;
    }

  private:
    int max_len_;
    std::vector<std::string> formulas_;
    detail::BlockCache cache_;
};


// ---------------------------------------------------------------------------------------
// global checks

namespace detail {

inline std::string at(const Dyadic& T) { return "T=" + T.to_string(); }

/// A sampled global time: half the time inside a featured segment, otherwise uniform.
inline Dyadic sample_time(const Assembly& a, const std::vector<Location>& featured, std::mt19937_64& rng) {
    if (!featured.empty() && (rng() & 3) != 0) {
        const Location& loc = featured[rng() % featured.size()];
        return loc.chart.global(random_unit(rng));
    }
    (void)a;
    return random_unit(rng);
}

inline Dyadic signed_unit(std::mt19937_64& rng) { return random_unit(rng).shifted(1) - Dyadic(1); }

/// phi(x) in the frame of loc, from h at precision m (in units of phi).
inline Enclosure phi(const Assembly& a, const Location& loc, const LocalFrame& f, const Dyadic& x, std::int64_t m) {
    return (a.eval_h_local(loc, x, m + f.amp + 2) - Enclosure(f.offset)).shifted(f.amp);
}

}  // namespace detail

/// Both charts meeting at every seam point give bit-identical h, and g agrees there.
inline Report check_seams(const Assembly& a, std::size_t max_points = 4096, std::uint64_t seed = 1) {
    Report r;
    std::vector<Dyadic> pts = a.seam_points();
    if (pts.size() > max_points) {
        std::mt19937_64 rng(seed);
        std::shuffle(pts.begin() + 1, pts.end(), rng);
        pts.resize(max_points);
    }
    for (const Dyadic& T : pts) {
        Location L = a.locate_left(T);
        Location R = a.locate(T);
        if (!L.materialized || !R.materialized) continue;
        std::int64_t m = std::max(a.frame(L).precision + a.frame(L).amp, a.frame(R).precision + a.frame(R).amp);
        Enclosure hl = a.eval_h_local(L, L.t, m);
        Enclosure hr = a.eval_h_local(R, R.t, m);
        bool exact = hl.is_exact() && hr.is_exact() && hl.mid() == hr.mid();
        r.add("seam_h", exact, detail::at(T) + "," + segment_name(L.segment) + "|" + segment_name(R.segment), "exact",
              (hl.mid() - hr.mid()).abs().to_string());
        for (const Dyadic& dy : {Dyadic(0), Dyadic::pow2(-m / 2), -Dyadic::pow2(-m / 3)}) {
            Dyadic Y = hl.mid() + dy;
            Enclosure gl = a.eval_g_local(L, L.t, Y, m);
            Enclosure gr = a.eval_g_local(R, R.t, Y, m);
            Dyadic diff = (gl.mid() - gr.mid()).abs();
            Dyadic tol = gl.rad() + gr.rad();
            r.add("seam_g", diff <= tol, detail::at(T) + ",Y=" + Y.to_string(), tol.to_string(), diff.to_string());
        }
    }
    return r;
}

/// Central-difference residual of h' = g(T, h) in the local frame of each sampled segment.
inline Report check_global_residual(const Assembly& a, int samples, std::uint64_t seed = 1,
                                    std::int64_t m_override = 0) {
    Report r;
    {
        // h'(1) = 0 = g(1, h(1)), with a one-sided difference reaching into the tail
        const std::int64_t de = 40;
        Enclosure h1 = a.eval_h(Dyadic(1), 2 * de);
        Enclosure h0 = a.eval_h(Dyadic(1) - Dyadic::pow2(-de), 2 * de);
        Dyadic slope = ((h1.mid() - h0.mid()).abs() + h1.rad() + h0.rad()).shifted(de);
        Enclosure g = a.eval_g(Dyadic(1), h1.mid(), 2 * de);
        Dyadic tau = Dyadic::pow2(-20);
        r.add("global_residual_end", g.is_exact() && g.mid().is_zero() && slope <= tau, "T=1", tau.to_string(),
              slope.to_string());
    }
    std::mt19937_64 rng(seed);
    std::vector<Location> featured = a.featured();
    int done = 0;
    for (int attempt = 0; done < samples && attempt < 50 * samples + 100; ++attempt) {
        Dyadic T = detail::sample_time(a, featured, rng);
        Location loc = a.locate(T);
        if (!loc.materialized) continue;
        ++done;
        LocalFrame f = a.frame(loc);
        std::int64_t m = m_override > 0 ? m_override : f.residual_m;
        std::int64_t de = f.delta_exp;
        Dyadic d = Dyadic::pow2(-de);
        const Dyadic& t = loc.t;
        if (f.smooth_hi - f.smooth_lo < d.shifted(2)) throw std::logic_error("check_global_residual: cell narrower than the stencil");
        auto ph = [&](const Dyadic& x) { return detail::phi(a, loc, f, x, m); };
        Enclosure deriv;
        if (t - d >= f.smooth_lo && t + d <= f.smooth_hi)
            deriv = (ph(t + d) - ph(t - d)).shifted(de - 1);
        else if (t + d.shifted(1) <= f.smooth_hi)
            deriv = (Enclosure(Dyadic(-3)) * ph(t) + Enclosure(Dyadic(4)) * ph(t + d) - ph(t + d.shifted(1))).shifted(de - 1);
        else
            deriv = (Enclosure(Dyadic(3)) * ph(t) - Enclosure(Dyadic(4)) * ph(t - d) + ph(t - d.shifted(1))).shifted(de - 1);
        Enclosure h = a.eval_h_local(loc, t, m + f.amp + 2);
        // dphi/dt = 2^amp sign 2^-width g
        std::int64_t k = f.amp - loc.chart.width;
        Enclosure g = a.eval_g_local(loc, t, h.mid(), m + k + 2).shifted(k);
        if (loc.chart.sign < 0) g = -g;
        Dyadic tau = f.tau(de, m);
        Dyadic observed = (deriv.mid() - g.mid()).abs() + deriv.rad() + g.rad();
        r.add("global_residual", observed <= tau, detail::at(T) + "," + segment_name(loc.segment) + ",index=" + loc.index,
              tau.to_string(), observed.to_string(), observed.to_double() / tau.to_double());
    }
    return r;
}

/// |g(T, Y0) - g(T, Y1)| <= Z(T) |Y0 - Y1| + 4 2^-m near the trajectory, with Z(T) the
/// assembly's slope bound; when `bound` is given, also over T < 1 - 2^-level and against it.
inline Report check_global_lipschitz(const Assembly& a, int samples, std::uint64_t seed = 1,
                                     std::optional<std::pair<std::int64_t, Dyadic>> region = std::nullopt) {
    Report r;
    std::mt19937_64 rng(seed);
    std::vector<Location> featured = a.featured();
    const std::string name = region ? "lipschitz_local" : "lipschitz_global";
    Dyadic T_hi = region ? Dyadic(1) - Dyadic::pow2(-region->first) : Dyadic(1);
    if (region) {
        std::vector<Location> kept;
        for (const auto& loc : featured)
            if (loc.chart.global(Dyadic(0)) < T_hi && loc.chart.global(Dyadic(1)) < T_hi) kept.push_back(loc);
        featured = kept;
        for (const auto& loc : featured) {
            Dyadic z = a.slope_bound(loc);
            r.add(name + "_analytic", z <= region->second, "index=" + loc.index + "," + segment_name(loc.segment),
                  region->second.to_string(), z.to_string());
        }
    }
    int done = 0;
    for (int attempt = 0; done < samples && attempt < 50 * samples + 100; ++attempt) {
        Dyadic T = detail::sample_time(a, featured, rng);
        if (T >= T_hi) continue;
        Location loc = a.locate(T);
        if (!loc.materialized) continue;
        ++done;
        LocalFrame f = a.frame(loc);
        std::int64_t scale = f.amp + f.y_scale;
        std::int64_t m = scale + 90;
        Dyadic h = a.eval_h_local(loc, loc.t, m).mid();
        Dyadic Y0 = h + detail::signed_unit(rng).shifted(-(scale + static_cast<std::int64_t>(rng() % 9)));
        Dyadic Y1 = Y0 + detail::signed_unit(rng).shifted(-(scale + static_cast<std::int64_t>(rng() % 21)));
        Enclosure g0 = a.eval_g_local(loc, loc.t, Y0, m);
        Enclosure g1 = a.eval_g_local(loc, loc.t, Y1, m);
        Dyadic z = region ? region->second : a.slope_bound(loc);
        Dyadic bound = z * (Y1 - Y0).abs() + Dyadic::pow2(2 - m);
        Dyadic diff = (g0.mid() - g1.mid()).abs();
        r.add(name, diff <= bound, detail::at(T) + ",Y0=" + Y0.to_string(), bound.to_string(), diff.to_string(),
              bound.is_zero() ? 0 : diff.to_double() / bound.to_double());
    }
    return r;
}

/// |T1 - T0| < 2^{-s(k)-k} implies |h(T1) - h(T0)| < 2^-k, on random, seam-adjacent and
/// tail-region pairs.
inline Report check_modulus(const Assembly& a, std::int64_t k_max, int pairs_per_k, std::uint64_t seed = 1) {
    Report r;
    std::mt19937_64 rng(seed);
    std::vector<Location> featured = a.featured();
    std::vector<Dyadic> seams = a.seam_points();
    for (std::int64_t k = 0; k <= k_max; ++k) {
        std::int64_t sep = a.modulus_exp(k) + k;
        for (int i = 0; i < pairs_per_k; ++i) {
            Dyadic T0;
            switch (i % 4) {
                case 0: T0 = detail::random_unit(rng); break;
                case 1: T0 = detail::sample_time(a, featured, rng); break;
                case 2:
                    T0 = seams.empty() ? Dyadic(0) : seams[rng() % seams.size()] - detail::random_unit(rng).shifted(-sep);
                    break;
                default:  // both points near 1, beyond the materialized region
                    T0 = Dyadic(1) - detail::random_unit(rng).shifted(-(k + 2 + static_cast<std::int64_t>(rng() % 40)));
            }
            T0 = clamp_unit01(T0);
            Dyadic T1 = min(Dyadic(1), T0 + detail::random_unit(rng).shifted(-sep));
            if (T1 - T0 >= Dyadic::pow2(-sep)) T1 = T0;
            Enclosure h0 = a.eval_h(T0, k + 12);
            Enclosure h1 = a.eval_h(T1, k + 12);
            Dyadic diff = (h0.mid() - h1.mid()).abs() + h0.rad() + h1.rad();
            Dyadic bound = Dyadic::pow2(-k);
            r.add("modulus", diff < bound, "k=" + std::to_string(k) + "," + detail::at(T0) + ",T1=" + T1.to_string(),
                  bound.to_string(), diff.to_string(), diff.to_double() / bound.to_double());
        }
    }
    return r;
}

/// Exact outputs at the interval centers: h(c_u) = L(u) 2^-(lambda + gamma + rho).
inline Report check_decode_identity(const MainAssembly& a, int max_len) {
    Report r;
    for (const auto& u : a.valid_codes()) {
        if (static_cast<int>(u.size()) > max_len) continue;
        const Block& b = a.block(u);
        std::int64_t k = static_cast<std::int64_t>(u.size());
        Dyadic want = b.h_at_one().shifted(-(MainAssembly::lambda(k) + MainAssembly::gamma(k)));
        Enclosure got = a.eval_h(MainAssembly::center(u), b.rho() + MainAssembly::lambda(k) + 8);
        r.add("decode_identity", got.is_exact() && got.mid() == want, "u=" + u, want.to_string(), got.to_string());
    }
    return r;
}

/// h(c_w) = h_{u_w}(1) / Lambda_w exactly for all words up to the given length.
inline Report check_decode_identity(const ExpAssembly& a, int max_len) {
    Report r;
    for (int len = 0; len <= std::min(max_len, a.max_len()); ++len)
        for (std::uint64_t v = 0; v < (std::uint64_t{1} << len); ++v) {
            std::string w = detail::bits_of(mpz_class(static_cast<unsigned long>(v)), len);
            Dyadic want = a.block(w).h_at_one().shifted(-ExpAssembly::lambda_w(len));
            Enclosure got = a.eval_h(ExpAssembly::center(w), a.block(w).rho() + 60);
            r.add("decode_identity", got.is_exact() && got.mid() == want, "w=" + w, want.to_string(), got.to_string());
        }
    return r;
}

/// Seams, residual, Lipschitz and modulus suites together.
inline Report verify_assembly(const Assembly& a, int samples, std::uint64_t seed = 1) {
    Report r;
    r.merge(check_seams(a, 4096, seed));
    r.merge(check_global_residual(a, samples, seed));
    r.merge(check_global_lipschitz(a, samples, seed));
    r.merge(check_modulus(a, 3, samples / 4 + 4, seed));
    return r;
}

}  // namespace ivphard

#endif  // IVPHARD_PATCHWORK_HPP
