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

#ifndef IVPHARD_TABLEAU_HPP
#define IVPHARD_TABLEAU_HPP

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ivphard/qbf.hpp"
#include "ivphard/report.hpp"

namespace ivphard {

class RecurrenceViolation : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The discrete system: G(i, T, Y) in {-1, 0, 1} for i in [P], T in [2^Q], Y in [4], and
/// H(i, T) for i in [P + 1], T in [2^Q + 1] with H(i, 0) = H(0, T) = 0 and
/// H(i + 1, T + 1) = H(i + 1, T) + G(i, T, H(i, T)).
class Tableau {
  public:
    Tableau(int n, int p, int qexp) : n_(n), p_(p), qexp_(qexp), base_qexp_(qexp) {
        if (qexp < 0 || qexp > 26) throw std::invalid_argument("Tableau: time exponent out of range");
        g_.assign(static_cast<std::size_t>(p) * columns() * 4, 0);
        h_.assign(static_cast<std::size_t>(p + 1) * (columns() + 1), 0);
    }

    int n() const { return n_; }
    int rows() const { return p_; }
    int qexp() const { return qexp_; }
    int base_qexp() const { return base_qexp_; }
    bool mirrored() const { return mirrored_; }
    std::int64_t columns() const { return std::int64_t{1} << qexp_; }

    int g(int i, std::int64_t t, int y) const {
        if (i < 0 || i >= p_ || t < 0 || t >= columns() || y < 0 || y > 3) return 0;
        return g_[gi(i, t, y)];
    }
    int h(int i, std::int64_t t) const {
        if (i < 0 || i > p_ || t < 0 || t > columns()) throw std::out_of_range("Tableau::h: index out of range");
        return h_[hi(i, t)];
    }
    /// The increment applied to row i + 1 between columns t and t + 1.
    int increment(int i, std::int64_t t) const {
        int y = h(i, t);
        return (y < 0 || y > 3) ? 0 : g(i, t, y);
    }

    void set_g(int i, std::int64_t t, int y, int v) { g_.at(gi(i, t, y)) = static_cast<std::int8_t>(v); }
    void set_h(int i, std::int64_t t, int v) { h_.at(hi(i, t)) = static_cast<std::int8_t>(v); }

    /// Row whose G is not identically zero at t, or none.
    std::optional<int> active_or_none(std::int64_t t) const {
        for (int i = 0; i < p_; ++i)
            for (int y = 0; y < 4; ++y)
                if (g(i, t, y) != 0) return i;
        return std::nullopt;
    }
    int active(std::int64_t t) const { return active_or_none(t).value_or(default_row_); }
    int default_row() const { return default_row_; }
    void set_default_row(int r) {
        if (r < 0 || r >= p_) throw std::out_of_range("Tableau: default row out of range");
        default_row_ = r;
    }

    /// Refills H from G by the recurrence.
    void recompute_h() {
        for (int i = 0; i <= p_; ++i) set_h(i, 0, 0);
        for (std::int64_t t = 0; t <= columns(); ++t) set_h(0, t, 0);
        for (std::int64_t t = 0; t < columns(); ++t)
            for (int i = 0; i < p_; ++i) set_h(i + 1, t + 1, h(i + 1, t) + increment(i, t));
    }

    Tableau doubled_frame() const {
        Tableau out(n_, p_, qexp_ + 1);
        out.base_qexp_ = base_qexp_;
        out.default_row_ = default_row_;
        out.mirrored_ = true;
        for (int i = 0; i < p_; ++i)
            for (std::int64_t t = 0; t < columns(); ++t)
                for (int y = 0; y < 4; ++y) out.set_g(i, t, y, g(i, t, y));
        return out;
    }

  private:
    std::size_t gi(int i, std::int64_t t, int y) const {
        return (static_cast<std::size_t>(i) * static_cast<std::size_t>(columns()) + static_cast<std::size_t>(t)) * 4 +
               static_cast<std::size_t>(y);
    }
    std::size_t hi(int i, std::int64_t t) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(columns() + 1) + static_cast<std::size_t>(t);
    }

    int n_, p_, qexp_, base_qexp_;
    bool mirrored_ = false;
    int default_row_ = 0;
    std::vector<std::int8_t> g_;
    std::vector<std::int8_t> h_;
};

inline int time_bit(std::int64_t t, int k) { return static_cast<int>((t >> k) & 1); }

/// Row i such that t is an odd multiple of 2^{2i} with i <= n, or none.
inline std::optional<int> active_row(std::int64_t t, int n) {
    if (t < 1) return std::nullopt;
    int v = std::countr_zero(static_cast<std::uint64_t>(t));
    if (v % 2 != 0 || v / 2 > n) return std::nullopt;
    return v / 2;
}

/// The QBF increment: (-1)^{T_{2i+2}} times psi_0(T_1 xor T_2, T_3 xor T_4, ...) for i = 0 and
/// Q_i(Y) for i > 0, when T is an odd multiple of 2^{2i} below 2^{2n+1}; zero otherwise.
inline int g_step(const Formula& f, int i, std::int64_t t, int y) {
    if (i < 0 || i > f.n || t < 1 || t >= (std::int64_t{1} << (2 * f.n + 1))) return 0;
    auto row = active_row(t, f.n);
    if (!row || *row != i) return 0;
    int sign = time_bit(t, 2 * i + 2) ? -1 : 1;
    if (i == 0) {
        std::uint64_t assignment = 0;
        for (int k = 1; k <= f.n; ++k)
            if (time_bit(t, 2 * k - 1) ^ time_bit(t, 2 * k)) assignment |= std::uint64_t{1} << (k - 1);
        return sign * eval_matrix(f, assignment);
    }
    return sign * eval_quantifier(f.q(i), y);
}

constexpr int kMaxTableauVariables = 10;

inline Tableau build_base(const Formula& f) {
    if (f.n < 1) throw std::invalid_argument("build_base: formula needs at least one variable");
    if (f.n > kMaxTableauVariables) throw std::invalid_argument("build_base: too many variables for a dense tableau");
    Tableau t(f.n, f.n + 1, 2 * f.n + 1);
    for (int i = 0; i < t.rows(); ++i)
        for (std::int64_t s = 1; s < t.columns(); s += 1)
            for (int y = 0; y < 4; ++y) t.set_g(i, s, y, g_step(f, i, s, y));
    t.recompute_h();
    return t;
}

/// Doubles the time frame, mirroring G with a sign change (row P - 1 gets zeros) so that the
/// second half undoes the first, and checks the resulting mirror identities of H.
inline Tableau symmetrize(const Tableau& base) {
    Tableau out = base.doubled_frame();
    const std::int64_t half = base.columns();
    const std::int64_t full = out.columns();
    const int p = base.rows();
    for (int i = 0; i < p; ++i)
        for (std::int64_t t = 0; t < half; ++t)
            for (int y = 0; y < 4; ++y) out.set_g(i, full - 1 - t, y, i == p - 1 ? 0 : -base.g(i, t, y));
    out.recompute_h();
    for (int i = 0; i <= p; ++i)
        for (std::int64_t t = 0; t <= half; ++t) {
            int want = i == p ? base.h(p, half) : base.h(i, t);
            if (out.h(i, full - t) != want || out.h(i, t) != base.h(i, t)) {
                std::ostringstream msg;
                msg << "symmetrize: mirror identity fails at i=" << i << ", T=" << full - t;
                throw RecurrenceViolation(msg.str());
            }
        }
    return out;
}

inline Tableau build_tableau(const Formula& f) { return symmetrize(build_base(f)); }

namespace detail {
inline std::string cell(int i, std::int64_t t) { return "i=" + std::to_string(i) + ",T=" + std::to_string(t); }
inline std::string cell(int i, std::int64_t t, int y) { return cell(i, t) + ",Y=" + std::to_string(y); }
}  // namespace detail

/// Structural checks of a tableau against its formula.
inline Report verify_tableau(const Tableau& t, const Formula& f) {
    using detail::cell;
    Report r;
    const int p = t.rows();
    const std::int64_t cols = t.columns();

    bool init = true;
    std::string init_at;
    for (int i = 0; i <= p && init; ++i)
        if (t.h(i, 0) != 0) init = false, init_at = cell(i, 0);
    for (std::int64_t s = 0; s <= cols && init; ++s)
        if (t.h(0, s) != 0) init = false, init_at = cell(0, s);
    r.add("init", init, init_at, "0", init ? "0" : "nonzero");

    bool rec = true, range = true;
    std::string rec_at, range_at, rec_obs, range_obs;
    for (std::int64_t s = 0; s < cols && rec; ++s)
        for (int i = 0; i < p && rec; ++i) {
            int want = t.h(i + 1, s) + t.increment(i, s);
            if (t.h(i + 1, s + 1) != want)
                rec = false, rec_at = cell(i + 1, s + 1), rec_obs = std::to_string(t.h(i + 1, s + 1)) + " vs " + std::to_string(want);
        }
    for (int i = 0; i <= p && range; ++i)
        for (std::int64_t s = 0; s <= cols && range; ++s)
            if (t.h(i, s) < 0 || t.h(i, s) > 2) range = false, range_at = cell(i, s), range_obs = std::to_string(t.h(i, s));
    r.add("recurrence", rec, rec_at, "H(i+1,T+1)=H(i+1,T)+G(i,T,H(i,T))", rec_obs);
    r.add("range", range, range_at, "{0,1,2}", range_obs);

    bool flip = true;
    std::string flip_at;
    const std::int64_t base_cols = std::int64_t{1} << t.base_qexp();
    for (int i = 0; i < p && flip; ++i)
        for (std::int64_t s = 0; s < base_cols && flip; ++s) {
            int v = t.increment(i, s);
            if (v == 0) continue;
            std::int64_t partner = s ^ (std::int64_t{3} << (2 * i + 1));
            if (partner >= base_cols) continue;
            if (t.increment(i, partner) != -v) flip = false, flip_at = cell(i, s);
        }
    r.add("sign_flip", flip, flip_at, "G(i,S',H(i,S'))=-G(i,S,H(i,S))", flip ? "" : "no sign reversal");

    bool one = true;
    std::string one_at;
    for (std::int64_t s = 0; s < cols && one; ++s) {
        int count = 0;
        for (int i = 0; i < p; ++i)
            for (int y = 0; y < 4; ++y)
                if (t.g(i, s, y) != 0) {
                    ++count;
                    break;
                }
        auto act = t.active_or_none(s);
        if (count > 1 || (count == 1 && t.active(s) != *act)) one = false, one_at = "T=" + std::to_string(s);
    }
    r.add("one_active_row", one, one_at, "<=1", one ? "<=1" : ">1");

    int want = qbf_value(f);
    int got = t.h(p, cols);
    r.add("final_value", got == want, cell(p, cols), std::to_string(want), std::to_string(got));

    bool zero_col = true;
    std::string zero_at;
    for (int i = 0; i < p && zero_col; ++i)
        if (t.h(i, cols) != 0) zero_col = false, zero_at = cell(i, cols);
    r.add("final_column", zero_col, zero_at, "0", zero_col ? "0" : "nonzero");

    if (t.mirrored()) {
        bool mirror = true;
        std::string mirror_at;
        const std::int64_t half = cols / 2;
        for (int i = 0; i < p && mirror; ++i)
            for (std::int64_t s = 0; s < half && mirror; ++s)
                for (int y = 0; y < 4 && mirror; ++y) {
                    int expect = i == p - 1 ? 0 : -t.g(i, s, y);
                    if (t.g(i, cols - 1 - s, y) != expect) mirror = false, mirror_at = cell(i, cols - 1 - s, y);
                }
        for (int i = 0; i <= p && mirror; ++i)
            for (std::int64_t s = 0; s <= half && mirror; ++s) {
                int expect = i == p ? t.h(p, half) : t.h(i, s);
                if (t.h(i, cols - s) != expect) mirror = false, mirror_at = cell(i, cols - s);
            }
        r.add("mirror", mirror, mirror_at, "G(i,2^Q-1-T,Y)=-G(i,T,Y)", mirror ? "" : "mismatch");
    }
    return r;
}

/// Rows of increments and cells: the signed number above H(i + 1, T) is G(i, T - 1, H(i, T - 1)).
inline std::string render_table(const Tableau& t, std::int64_t max_columns = 1024) {
    if (t.columns() > max_columns)
        throw std::length_error("render_table: " + std::to_string(t.columns()) + " columns exceed the limit of " +
                                std::to_string(max_columns) + "; use csv output");
    const std::int64_t cols = t.columns();
    std::ostringstream out;
    out << "T  ";
    for (std::int64_t s = 0; s <= cols; ++s) out << (s < 10 ? "  " : s < 100 ? " " : "") << s << ' ';
    out << '\n';
    for (int i = 0; i <= t.rows(); ++i) {
        if (i > 0) {
            out << "   ";
            for (std::int64_t s = 0; s <= cols; ++s) {
                int inc = s == 0 ? 0 : t.increment(i - 1, s - 1);
                out << (inc > 0 ? " +1" : inc < 0 ? " -1" : "   ") << ' ';
            }
            out << '\n';
        }
        out << i << "  ";
        for (std::int64_t s = 0; s <= cols; ++s) out << "  " << t.h(i, s) << ' ';
        out << '\n';
    }
    return out.str();
}

/// CSV rows "i,T,H,increment" where increment is the signed step into H(i, T + 1).
inline std::string tableau_csv(const Tableau& t) {
    std::ostringstream out;
    out << "i,T,H,increment\n";
    for (int i = 0; i <= t.rows(); ++i)
        for (std::int64_t s = 0; s <= t.columns(); ++s) {
            int inc = (i == 0 || s == t.columns()) ? 0 : t.increment(i - 1, s);
            out << i << ',' << s << ',' << t.h(i, s) << ',' << inc << '\n';
        }
    return out.str();
}

}  // namespace ivphard

#endif  // IVPHARD_TABLEAU_HPP
