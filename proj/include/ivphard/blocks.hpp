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

#ifndef IVPHARD_BLOCKS_HPP
#define IVPHARD_BLOCKS_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

#include "ivphard/dyadic.hpp"
#include "ivphard/enclosure.hpp"
#include "ivphard/qbf.hpp"
#include "ivphard/report.hpp"
#include "ivphard/tableau.hpp"
#include "ivphard/transcendental.hpp"

namespace ivphard {

class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// t = (T + theta) 2^-Q and y = (Y + eta) B^-j with j the active row at T.
struct GridDecomposition {
    std::int64_t T = 0;
    Dyadic theta;
    mpz_class Y;
    Dyadic eta;
    int j = 0;
};

/// The pair (g_u, h_u) built from the symmetrized tableau of u, with h_u' = g_u(t, h_u),
/// h_u(0) = 0 and h_u(1) = L(u) 2^-rho. Strings that are not formulas give the zero block.
class Block {
  public:
    static Block make(const Formula& f, int lambda) {
        if (lambda < 0) throw std::invalid_argument("Block: lambda must be nonnegative");
        Block b;
        b.formula_ = f;
        b.lambda_ = lambda;
        b.tableau_ = build_tableau(f);
        b.p_ = b.tableau_->rows();
        b.q_ = b.tableau_->qexp();
        b.b_exp_ = lambda + b.q_ + 5;
        b.rho_ = static_cast<std::int64_t>(b.p_) * b.b_exp_;
        b.value_ = qbf_value(f);
        return b;
    }

    static Block zero(int lambda) {
        Block b;
        b.lambda_ = lambda;
        return b;
    }

    /// Block for the binary code u, or the zero block if u is not a code.
    static Block from_code(const std::string& u, int lambda) {
        auto f = decode_formula(u);
        return f ? make(*f, lambda) : zero(lambda);
    }

    bool is_zero_block() const { return !tableau_.has_value(); }
    const std::optional<Formula>& formula() const { return formula_; }
    const Tableau& tableau() const {
        if (!tableau_) throw std::logic_error("Block: zero block has no tableau");
        return *tableau_;
    }
    int lambda() const { return lambda_; }
    int rows() const { return p_; }
    int qexp() const { return q_; }
    std::int64_t b_exp() const { return b_exp_; }
    Dyadic b() const { return Dyadic::pow2(b_exp_); }
    std::int64_t rho() const { return rho_; }
    int language_value() const { return value_; }

    /// h_u(1) = L(u) 2^-rho.
    Dyadic h_at_one() const { return value_ ? Dyadic::pow2(-rho_) : Dyadic(0); }

    /// sup |g_u| <= 2^{Q+1} / B.
    Dyadic g_sup_bound() const { return is_zero_block() ? Dyadic(0) : Dyadic::pow2(q_ + 1 - b_exp_); }

    /// Replaces the digit base exponent; only for exercising the consistency checks.
    Block with_b_exp(std::int64_t e) const {
        Block c = *this;
        c.b_exp_ = e;
        return c;
    }

    GridDecomposition decompose(const Dyadic& t, const Dyadic& y) const {
        GridDecomposition d = decompose_t(t);
        Dyadic scaled = y.shifted(static_cast<std::int64_t>(d.j) * b_exp_);
        d.Y = (scaled + Dyadic::ratio(1, 2)).floor_int();
        d.eta = scaled - Dyadic(d.Y, 0);
        return d;
    }

    GridDecomposition decompose_t(const Dyadic& t) const {
        check_t(t);
        GridDecomposition d;
        mpz_class whole = t.shifted(q_).floor_int();
        std::int64_t cols = std::int64_t{1} << q_;
        d.T = whole.get_si();
        if (d.T >= cols) d.T = cols - 1;
        d.theta = t.shifted(q_) - Dyadic(d.T);
        d.j = is_zero_block() ? 0 : tableau_->active(d.T);
        return d;
    }

    /// Column T encoded as sum_i H(i, T) B^-i.
    Dyadic exact_h_grid(std::int64_t T) const {
        if (is_zero_block()) return Dyadic(0);
        if (T < 0 || T > tableau_->columns()) throw DomainError("exact_h_grid: column out of range");
        Dyadic sum(0);
        for (int i = 0; i <= p_; ++i)
            if (int v = tableau_->h(i, T)) sum += Dyadic(mpz_class(v), -static_cast<std::int64_t>(i) * b_exp_);
        return sum;
    }

    Enclosure eval_g(const Dyadic& t, const Dyadic& y, std::int64_t m) const {
        check_y(y);
        if (is_zero_block()) {
            check_t(t);
            return Enclosure(Dyadic(0));
        }
        GridDecomposition d = decompose(t, y);
        if (d.eta <= Dyadic::ratio(1, 2)) return first_branch(d, d.Y, m);
        return second_branch(d, m);
    }

    /// Interpolation (3 - 4 eta)/2 g(t, Y B^-j) + (4 eta - 1)/2 g(t, (Y + 1) B^-j).
    Enclosure second_branch(const GridDecomposition& d, std::int64_t m) const {
        Dyadic w0 = (Dyadic(3) - d.eta.shifted(2)).shifted(-1);
        Dyadic w1 = (d.eta.shifted(2) - Dyadic(1)).shifted(-1);
        Enclosure g0 = first_branch(d, d.Y, m + 1);
        Enclosure g1 = first_branch(d, d.Y + 1, m + 1);
        return Enclosure(w0) * g0 + Enclosure(w1) * g1;
    }

    /// The first branch with 4 eta <= 1 replaced by an explicit cell index Y.
    Enclosure first_branch(const GridDecomposition& d, const mpz_class& Y, std::int64_t m) const {
        if (is_zero_block()) return Enclosure(Dyadic(0));
        mpz_class ymod = Y % 4;
        if (ymod < 0) ymod += 4;
        int gv = tableau_->g(d.j, d.T, static_cast<int>(ymod.get_si()));
        if (gv == 0 || d.theta.is_zero()) return Enclosure(Dyadic(0));
        // 2^Q pi sin(theta pi) / (2 B^{j+1}) * G
        Dyadic c(mpz_class(gv), q_ - 1 - static_cast<std::int64_t>(d.j + 1) * b_exp_);
        std::int64_t scale = c.ceil_log2() + 3;
        return detail::refine(m, [&](std::int64_t p) {
            std::int64_t need = p + std::max<std::int64_t>(scale, 0);
            return Enclosure(c) * pi(need) * sin_pi(d.theta, need);
        });
    }

    Enclosure eval_h(const Dyadic& t, std::int64_t m) const {
        if (is_zero_block()) {
            check_t(t);
            return Enclosure(Dyadic(0));
        }
        GridDecomposition d = decompose_t(t);
        return eval_h_at(d.T, d.theta, m);
    }

    /// h at t = (T + theta) 2^-Q for an explicit cell T and theta in [0, 1].
    Enclosure eval_h_at(std::int64_t T, const Dyadic& theta, std::int64_t m) const {
        if (is_zero_block()) return Enclosure(Dyadic(0));
        Dyadic grid = exact_h_grid(T);
        if (T == tableau_->columns() || theta.is_zero()) return Enclosure(grid);
        int j = tableau_->active(T);
        int gv = tableau_->increment(j, T);
        if (gv == 0) return Enclosure(grid);
        // (1 - cos(theta pi)) / 2 * G / B^{j+1}
        Dyadic c(mpz_class(gv), -1 - static_cast<std::int64_t>(j + 1) * b_exp_);
        std::int64_t scale = c.ceil_log2() + 2;
        return detail::refine(m, [&](std::int64_t p) {
            std::int64_t need = p + std::max<std::int64_t>(scale, 0);
            return Enclosure(grid) + Enclosure(c) * (Enclosure(Dyadic(1)) - cos_pi(theta, need));
        });
    }

  private:
    static void check_t(const Dyadic& t) {
        if (t < Dyadic(0) || t > Dyadic(1)) throw DomainError("block argument t outside [0,1]: " + t.to_string());
    }
    static void check_y(const Dyadic& y) {
        if (y < Dyadic(-1) || y > Dyadic(1)) throw DomainError("block argument y outside [-1,1]: " + y.to_string());
    }

    std::optional<Formula> formula_;
    std::optional<Tableau> tableau_;
    int lambda_ = 0;
    int p_ = 0;
    int q_ = 0;
    std::int64_t b_exp_ = 0;
    std::int64_t rho_ = 0;
    int value_ = 0;
};

inline Block make_block(const Formula& f, int lambda) { return Block::make(f, lambda); }

namespace detail {

inline Dyadic random_unit(std::mt19937_64& rng, int bits = 53) {
    return Dyadic(mpz_class(static_cast<unsigned long>(rng() >> (64 - bits))), -bits);
}

/// A working precision fine enough to resolve every digit of the block.
inline std::int64_t block_precision(const Block& b) { return b.rho() + b.b_exp() + 40; }

}  // namespace detail

/// Lipschitz bound in y: the analytic budget 2^{Q+3}/B <= 2^-lambda with B = 2^{lambda+Q+5},
/// and an empirical slope test on sampled (t, y0, y1) at precision m (default: all digits).
inline Report check_lipschitz(const Block& b, int samples, std::uint64_t seed = 1, std::int64_t m_eval = 0) {
    Report r;
    if (b.is_zero_block()) {
        r.add("lipschitz_analytic", true, "zero block", "0", "0");
        r.add("lipschitz_empirical", true, "zero block", "0", "0");
        return r;
    }
    std::int64_t lhs = b.qexp() + 3 - b.b_exp();
    bool budget = lhs <= -b.lambda();
    bool base = b.b_exp() == b.lambda() + b.qexp() + 5;
    r.add("lipschitz_analytic", budget && base, "B=2^" + std::to_string(b.b_exp()),
          "2^{Q+3}/B <= 2^-" + std::to_string(b.lambda()) + ", B = 2^{lambda+Q+5}",
          "2^" + std::to_string(lhs) + (base ? "" : ", B != 2^{lambda+Q+5}"));
    std::mt19937_64 rng(seed);
    const std::int64_t m = m_eval > 0 ? m_eval : detail::block_precision(b);
    const Dyadic slack = Dyadic::pow2(-m).shifted(2);
    const Dyadic slope = Dyadic::pow2(-b.lambda());
    for (int s = 0; s < samples; ++s) {
        Dyadic t = detail::random_unit(rng);
        GridDecomposition d = b.decompose_t(t);
        // y0 near the column encoding so that the interpolation cells around the trajectory are hit
        Dyadic cell = Dyadic::pow2(-static_cast<std::int64_t>(d.j) * b.b_exp());
        std::int64_t cols = b.tableau().columns();
        Dyadic y0 = b.exact_h_grid(std::min<std::int64_t>(d.T, cols)) + (detail::random_unit(rng) - Dyadic::ratio(1, 1)) * cell.shifted(2);
        Dyadic y1 = y0 + (detail::random_unit(rng) - Dyadic::ratio(1, 1)) * cell.shifted(1 + static_cast<int>(rng() % 3));
        if (s % 5 == 4) y1 = detail::random_unit(rng).shifted(1) - Dyadic(1);
        y0 = max(Dyadic(-1), min(Dyadic(1), y0));
        y1 = max(Dyadic(-1), min(Dyadic(1), y1));
        Enclosure g0 = b.eval_g(t, y0, m), g1 = b.eval_g(t, y1, m);
        Dyadic diff = (g0.mid() - g1.mid()).abs() + g0.rad() + g1.rad();
        Dyadic bound = slope * (y0 - y1).abs() + slack;
        r.add("lipschitz_empirical", diff <= bound, "t=" + t.to_string() + ",y0=" + y0.to_string(), bound.to_string(),
              diff.to_string(), bound.is_zero() ? 0 : diff.to_double() / bound.to_double());
    }
    return r;
}

/// |(h(t+d) - h(t-d)) / 2d - g(t, h(t))| <= 2^{3Q} d^2 + 2^{-m+1} / d, falling back to the
/// one-sided second-order difference when the stencil would cross a grid line of h''.
inline Report check_ode_residual(const Block& b, const Dyadic& t, std::int64_t delta_exp, std::int64_t m) {
    Report r;
    const std::string point = "t=" + t.to_string() + ",delta=2^-" + std::to_string(delta_exp);
    if (b.is_zero_block()) {
        r.add("ode_residual", true, point, "0", "0");
        return r;
    }
    Dyadic delta = Dyadic::pow2(-delta_exp);
    Dyadic tau = Dyadic::pow2(3 * b.qexp() - 2 * delta_exp) + Dyadic::pow2(-m + 1 + delta_exp) + Dyadic::pow2(-m);
    GridDecomposition d = b.decompose_t(t);
    Dyadic cell_lo(mpz_class(d.T), -b.qexp());
    Dyadic cell_hi(mpz_class(d.T + 1), -b.qexp());
    auto h = [&](const Dyadic& x) { return b.eval_h(x, m + 2); };
    Enclosure deriv;
    if (t - delta >= cell_lo && t + delta <= cell_hi) {
        deriv = (h(t + delta) - h(t - delta)).shifted(delta_exp - 1);
    } else if (t + delta.shifted(1) <= cell_hi) {
        deriv = (Enclosure(Dyadic(-3)) * h(t) + Enclosure(Dyadic(4)) * h(t + delta) - h(t + delta.shifted(1))).shifted(delta_exp - 1);
    } else if (t - delta.shifted(1) >= cell_lo) {
        deriv = (Enclosure(Dyadic(3)) * h(t) - Enclosure(Dyadic(4)) * h(t - delta) + h(t - delta.shifted(1))).shifted(delta_exp - 1);
    } else {
        throw std::invalid_argument("check_ode_residual: step wider than a grid cell");
    }
    Enclosure y = h(t);
    Enclosure g = b.eval_g(t, y.mid(), m + 2);
    Dyadic observed = (deriv.mid() - g.mid()).abs() + deriv.rad() + g.rad();
    r.add("ode_residual", observed <= tau, point, tau.to_string(), observed.to_string(),
          observed.to_double() / tau.to_double());
    return r;
}

/// Digit encoding, range, magnitude, seam continuity and branch agreement on sampled points.
inline Report check_block(const Block& b, int samples, std::uint64_t seed = 1) {
    Report r;
    if (b.is_zero_block()) {
        r.add("zero_block", true, "not a formula", "0", "0");
        return r;
    }
    const Tableau& tab = b.tableau();
    const std::int64_t cols = tab.columns();
    const std::int64_t m = detail::block_precision(b);
    for (std::int64_t T = 0; T <= cols; ++T) {
        Dyadic grid = b.exact_h_grid(T);
        r.add("range", grid >= Dyadic(0) && grid <= Dyadic(1), "T=" + std::to_string(T), "[0,1]", grid.to_string());
        if (T < cols) {
            if (auto row = tab.active_or_none(T)) {
                Dyadic t(mpz_class(T), -b.qexp());
                GridDecomposition d = b.decompose(t, grid);
                mpz_class ymod = d.Y % 4;
                r.add("digit_encoding", ymod == tab.h(*row, T) && d.j == *row, "T=" + std::to_string(T),
                      std::to_string(tab.h(*row, T)), ymod.get_str());
            }
            Enclosure closing = b.eval_h_at(T, Dyadic(1), m);
            Enclosure opening = b.eval_h_at(T + 1, Dyadic(0), m);
            r.add("seam", closing.is_exact() && opening.is_exact() && closing.mid() == opening.mid(),
                  "T=" + std::to_string(T + 1), opening.to_string(), closing.to_string());
        }
    }
    r.add("h_at_zero", b.eval_h(Dyadic(0), m).mid() == Dyadic(0) && b.eval_h(Dyadic(0), m).is_exact(), "t=0", "0",
          b.eval_h(Dyadic(0), m).to_string());
    Enclosure at_one = b.eval_h(Dyadic(1), m);
    r.add("h_at_one", at_one.is_exact() && at_one.mid() == b.h_at_one(), "t=1", b.h_at_one().to_string(),
          at_one.to_string());
    Dyadic sup = b.g_sup_bound();
    r.add("magnitude_budget", sup <= Dyadic::pow2(-b.lambda() - 4), "analytic", "2^{-lambda-4}", sup.to_string());
    std::mt19937_64 rng(seed);
    for (int s = 0; s < samples; ++s) {
        Dyadic t = detail::random_unit(rng);
        Dyadic y = detail::random_unit(rng).shifted(1) - Dyadic(1);
        Enclosure g = b.eval_g(t, y, m);
        r.add("magnitude", g.mag() <= sup, "t=" + t.to_string(), sup.to_string(), g.mag().to_string(),
              g.mag().to_double() / sup.to_double());
        Enclosure h = b.eval_h(t, m);
        r.add("range", h.mag() <= Dyadic(1), "t=" + t.to_string(), "1", h.mag().to_string());
        GridDecomposition d = b.decompose_t(t);
        Dyadic cell = Dyadic::pow2(-static_cast<std::int64_t>(d.j) * b.b_exp());
        Dyadic quarter = (Dyadic(b.exact_h_grid(d.T).shifted(static_cast<std::int64_t>(d.j) * b.b_exp()).floor_int(), 0) +
                          Dyadic::ratio(1, 2)) * cell;
        if (quarter.abs() <= Dyadic(1)) {
            GridDecomposition dq = b.decompose(t, quarter);
            Enclosure first = b.first_branch(dq, dq.Y, m);
            Enclosure second = b.second_branch(dq, m);
            bool agree = dq.eta == Dyadic::ratio(1, 2) && first.overlaps(second) &&
                         (first.mid() - second.mid()).abs() <= Dyadic::pow2(-m + 1);
            r.add("branch_agreement", agree, "t=" + t.to_string(), first.to_string(), second.to_string());
        }
    }
    return r;
}

}  // namespace ivphard

#endif  // IVPHARD_BLOCKS_HPP
