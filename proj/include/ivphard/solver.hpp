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

#ifndef IVPHARD_SOLVER_HPP
#define IVPHARD_SOLVER_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ivphard/dyadic.hpp"
#include "ivphard/enclosure.hpp"
#include "ivphard/patchwork.hpp"
#include "ivphard/qbf.hpp"
#include "ivphard/real_name.hpp"
#include "ivphard/transcendental.hpp"

namespace ivphard {

/// The certified error of a run exceeds what was asked for.
class BudgetExceeded : public std::runtime_error {
  public:
    BudgetExceeded(const std::string& what, int suggested_q, std::int64_t suggested_m)
        : std::runtime_error(what), q_(suggested_q), m_(suggested_m) {}
    int suggested_q() const { return q_; }
    std::int64_t suggested_m() const { return m_; }

  private:
    int q_;
    std::int64_t m_;
};

using GOracle = std::function<Enclosure(const Dyadic& t, const Dyadic& y, std::int64_t m)>;

struct SolveConfig {
    int step_exp = 20;             // q: delta = 2^-q
    std::int64_t oracle_prec = 60; // m
    Dyadic start_t;
    Dyadic start_y;
    Dyadic target;
    Dyadic lipschitz = Dyadic(1);  // Z
    Dyadic m2 = Dyadic(1);         // bound on |dg/dt| + Z sup |g|
    std::optional<Dyadic> budget;  // required bound on the global error
    bool certify = true;           // throw when the bound misses the budget
    std::uint64_t max_steps = std::uint64_t{1} << 32;
};

struct SolveResult {
    Dyadic value;
    Dyadic error_bound;
    std::uint64_t steps = 0;
    int step_exp = 0;
    std::int64_t oracle_prec = 0;
    bool certified = false;

    Enclosure enclosure() const { return Enclosure(value, error_bound); }
};

/// E(q, m, Z) = (e^{ZL} - 1)/Z (delta M2 / 2 + 2^-m) over an interval of length L, bounded
/// above by L e^{ZL} (delta M2 / 2 + 2^-m).
inline Dyadic euler_error_bound(const Dyadic& length, const Dyadic& Z, const Dyadic& m2, int q, std::int64_t m) {
    if (length.is_zero()) return Dyadic(0);
    Dyadic growth = exp(Z * length, 32).hi();
    return length * growth * (m2.shifted(-q - 1) + Dyadic::pow2(-m));
}

namespace detail {

inline std::pair<int, std::int64_t> suggest(const SolveConfig& cfg, const Dyadic& length) {
    std::int64_t m = cfg.oracle_prec;
    for (int q = cfg.step_exp; q < cfg.step_exp + 400; ++q) {
        if (euler_error_bound(length, cfg.lipschitz, cfg.m2, q, m) <= *cfg.budget) return {q, m};
        if (euler_error_bound(length, cfg.lipschitz, Dyadic(0), 0, m) > cfg.budget->shifted(-1)) ++m;
    }
    return {cfg.step_exp + 400, m};
}

}  // namespace detail

/// Explicit Euler y_{k+1} = y_k + delta mid(g(t_k, y_k, m)) from start to target.
inline SolveResult euler_solve(const GOracle& g, const SolveConfig& cfg) {
    if (cfg.target < cfg.start_t) throw std::invalid_argument("euler_solve: target before start");
    Dyadic length = cfg.target - cfg.start_t;
    Dyadic n_steps = length.shifted(cfg.step_exp);
    if (!n_steps.is_integer()) throw std::invalid_argument("euler_solve: interval is not a multiple of the step");
    SolveResult res;
    res.step_exp = cfg.step_exp;
    res.oracle_prec = cfg.oracle_prec;
    res.error_bound = euler_error_bound(length, cfg.lipschitz, cfg.m2, cfg.step_exp, cfg.oracle_prec);
    res.certified = !cfg.budget || res.error_bound <= *cfg.budget;
    if (cfg.certify && !res.certified) {
        auto [q, m] = detail::suggest(cfg, length);
        throw BudgetExceeded("error-budget-exceeded: bound " + res.error_bound.to_string() + " > budget " +
                                 cfg.budget->to_string() + "; need q >= " + std::to_string(q) + ", m >= " + std::to_string(m),
                             q, m);
    }
    mpz_class count = n_steps.floor_int();
    if (count > mpz_class(static_cast<unsigned long>(cfg.max_steps)))
        throw BudgetExceeded("error-budget-exceeded: " + count.get_str() + " steps over the step limit", cfg.step_exp,
                             cfg.oracle_prec);
    res.steps = count.get_ui();
    const Dyadic delta = Dyadic::pow2(-cfg.step_exp);
    Dyadic t = cfg.start_t;
    Dyadic y = cfg.start_y;
    for (std::uint64_t k = 0; k < res.steps; ++k) {
        y += g(t, y, cfg.oracle_prec).mid().shifted(-cfg.step_exp);
        t += delta;
    }
    res.value = y;
    return res;
}

/// The functions R, S, T that turn membership of u into one query to a name of h(c_u).
struct ReductionTriple {
    /// Bit from the answer string at precision |T(u)|, thresholded at 2^-(n+1).
    static int R(const std::string& u, const std::string& answer) {
        std::int64_t n = static_cast<std::int64_t>(T(u).size());
        return RealName::decode_name(answer, n) >= Dyadic::pow2(-(n + 1)) ? 1 : 0;
    }

    /// Name string of floor(2^n c_u).
    static std::string S(const std::string& u, std::int64_t n) {
        return RealName::encode_name(MainAssembly::center(u).round_to(n, Rounding::floor), n);
    }

    /// Padding 0^{lambda + gamma + rho} for the precision requested of h(c_u).
    static std::string T(const std::string& u) { return std::string(static_cast<std::size_t>(precision(u)), '0'); }

    /// lambda + gamma + rho from the code alone: rho = (n+1)(lambda + 2n + 7).
    static std::int64_t precision(const std::string& u) {
        std::int64_t k = static_cast<std::int64_t>(u.size());
        std::int64_t lam = MainAssembly::lambda(k);
        auto f = decode_formula(u);
        if (!f) return lam + MainAssembly::gamma(k);
        std::int64_t n = f->n;
        return lam + MainAssembly::gamma(k) + (n + 1) * (lam + 2 * n + 2 + 5);
    }
};

struct DecodeCertificate {
    int bit = 0;
    std::string answer;
    std::int64_t precision = 0;  // n = lambda + gamma + rho
    Dyadic threshold;            // 2^-(n+1)
    SolveResult run;
};

/// Configures an Euler run over [l-_u, c_u] for the main assembly: Z = 1, M2 = 2^{Q-1}, and
/// by default 4 steps per tableau column, m = n + 16.
inline SolveConfig main_solve_config(const std::string& u, std::optional<int> q = std::nullopt,
                                     std::optional<std::int64_t> m = std::nullopt) {
    std::int64_t k = static_cast<std::int64_t>(u.size());
    std::int64_t lam = MainAssembly::lambda(k);
    auto f = decode_formula(u);
    std::int64_t Q = f ? 2 * f->n + 2 : 0;
    std::int64_t n = ReductionTriple::precision(u);
    Dyadic c = RealName::decode_name(ReductionTriple::S(u, lam), lam);
    SolveConfig cfg;
    cfg.step_exp = q ? *q : static_cast<int>(lam + Q + 2);
    cfg.oracle_prec = m ? *m : n + 16;
    cfg.start_t = c - Dyadic::pow2(-lam);
    cfg.start_y = Dyadic(0);
    cfg.target = c;
    cfg.lipschitz = Dyadic(1);
    cfg.m2 = Dyadic::pow2(Q - 1);
    cfg.budget = Dyadic::pow2(-(n + 1));
    return cfg;
}

/// L(u) from oracle access to g: integrate from (l-_u, 0) to c_u and read the digit at
/// precision lambda + gamma + rho.
inline DecodeCertificate decode_membership(const std::string& u, const GOracle& g, const SolveConfig& cfg) {
    DecodeCertificate cert;
    cert.precision = static_cast<std::int64_t>(ReductionTriple::T(u).size());
    cert.threshold = Dyadic::pow2(-(cert.precision + 1));
    cert.run = euler_solve(g, cfg);
    cert.answer = RealName::encode_name(cert.run.value.round_to(cert.precision, Rounding::nearest), cert.precision);
    cert.bit = ReductionTriple::R(u, cert.answer);
    return cert;
}

inline GOracle oracle_of(const Assembly& a) {
    return [&a](const Dyadic& t, const Dyadic& y, std::int64_t m) { return a.eval_g(t, y, m); };
}

/// Bit L(0^k) read from h(1), from the exact partial series or by integrating block k alone.
inline int decode_tally(const TallyAssembly& a, int k, bool integrate = false, std::optional<int> q = std::nullopt) {
    if (k < 0 || k >= a.depth())
        throw InsufficientPrecision("decode_tally: bit " + std::to_string(k) + " lies beyond the materialized depth " +
                                    std::to_string(a.depth()));
    std::int64_t pos = a.bit_position(k);
    if (!integrate) {
        Enclosure h1 = a.h_at_one(pos + 2);
        if (h1.rad() >= Dyadic::pow2(-pos - 1)) throw InsufficientPrecision("decode_tally: tail too wide");
        mpz_class digit = h1.mid().shifted(pos).floor_int();
        return mpz_class(digit % 2) != 0 ? 1 : 0;
    }
    SolveConfig cfg;
    std::int64_t width = TallyAssembly::lambda(k);
    cfg.step_exp = q ? *q : static_cast<int>(width + a.block(k).qexp() + 2);
    cfg.oracle_prec = pos + 16;
    cfg.start_t = Dyadic(1) - Dyadic::pow2(-k);
    cfg.start_y = a.offset(k);
    cfg.target = Dyadic(1) - Dyadic::pow2(-(k + 1));
    cfg.certify = false;
    SolveResult run = euler_solve(oracle_of(a), cfg);
    mpz_class digit = (run.value - a.offset(k)).round_to(pos, Rounding::nearest).shifted(pos).floor_int();
    return digit == 1 ? 1 : 0;
}

/// Endpoint errors |y_N - h(c_u)| of uncertified runs over [l-_u, c_u] for successive q.
inline std::vector<Dyadic> convergence_errors(const MainAssembly& a, const std::string& u, int q0, int halvings,
                                              std::int64_t m) {
    Dyadic exact = a.eval_h(MainAssembly::center(u), m).mid();
    std::vector<Dyadic> errs;
    for (int i = 0; i <= halvings; ++i) {
        SolveConfig cfg = main_solve_config(u, q0 + i, m);
        cfg.certify = false;
        errs.push_back((euler_solve(oracle_of(a), cfg).value - exact).abs());
    }
    return errs;
}

}  // namespace ivphard

#endif  // IVPHARD_SOLVER_HPP
