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
#include "ivphard/blocks.hpp"
#include "ivphard/corpus.hpp"

using namespace ivphard;

namespace {

const Formula& example() {
    static const Formula f = parse_formula("(E x2 (A x1 (or x1 x2)))");
    return f;
}

const Block& example_block() {
    static const Block b = make_block(example(), 0);
    return b;
}

Dyadic d(const char* s) { return parse_dyadic(s); }

}  // namespace

TEST(blocks, parameters) {
    const Block& b = example_block();
    EXPECT_EQ(b.rows(), 3);
    EXPECT_EQ(b.qexp(), 6);
    EXPECT_EQ(b.b(), Dyadic::pow2(11));
    EXPECT_EQ(b.rho(), 33);
    Block c = make_block(example(), 6);
    EXPECT_EQ(c.b(), Dyadic::pow2(17));
    EXPECT_EQ(c.rho(), 51);
    Block taut = make_block(parse_formula("(E x1 x1)"), 0);
    EXPECT_EQ(taut.rows(), 2);
    EXPECT_EQ(taut.qexp(), 4);
}

TEST(blocks, decompose) {
    const Block& b = example_block();
    GridDecomposition z = b.decompose(Dyadic(0), Dyadic(0));
    EXPECT_EQ(z.T, 0);
    EXPECT_TRUE(z.theta.is_zero());
    EXPECT_EQ(z.Y, 0);
    EXPECT_TRUE(z.eta.is_zero());
    GridDecomposition h = b.decompose_t(Dyadic(mpz_class(3), -7));
    EXPECT_EQ(h.T, 1);
    EXPECT_EQ(h.theta, d("1/2"));
    Dyadic t4(mpz_class(4), -6);  // active row 1
    GridDecomposition y = b.decompose(t4, d("7/8") * Dyadic::pow2(-11));
    EXPECT_EQ(y.j, 1);
    EXPECT_EQ(y.Y, 1);
    EXPECT_EQ(y.eta, d("-1/8"));
    GridDecomposition top = b.decompose_t(Dyadic(1));
    EXPECT_EQ(top.T, 63);
    EXPECT_EQ(top.theta, Dyadic(1));
    EXPECT_THROW(b.decompose_t(d("9/8")), DomainError);
    EXPECT_THROW(b.eval_g(d("1/2"), d("3/2"), 10), DomainError);
}

TEST(blocks, g_examples) {
    const Block& b = example_block();
    EXPECT_TRUE(b.eval_g(Dyadic(0), d("1/2"), 40).mid().is_zero());
    EXPECT_TRUE(b.eval_g(Dyadic(1), d("-1/2"), 40).mid().is_zero());
    Dyadic t(mpz_class(7), -7);  // (3 + 1/2) 2^-6
    Enclosure g = b.eval_g(t, b.exact_h_grid(3), 80);
    EXPECT_TRUE(g.meets(80));
    Enclosure want = pi(90).shifted(-6);
    EXPECT_TRUE(g.overlaps(want));
    EXPECT_LE((g.mid() - want.mid()).abs(), Dyadic::pow2(-79));
    // eta = 1/2 gives the average of the values at Y and Y + 1.
    Dyadic t12(mpz_class(25), -7);  // T = 12, theta = 1/2, active row 1
    Dyadic y_half = d("3/2") * Dyadic::pow2(-11);
    Enclosure avg = b.eval_g(t12, y_half, 80);
    GridDecomposition dd = b.decompose(t12, y_half);
    EXPECT_EQ(dd.eta, d("1/2"));
    Enclosure a0 = b.first_branch(dd, 1, 90), a1 = b.first_branch(dd, 2, 90);
    EXPECT_TRUE(avg.overlaps((a0 + a1).shifted(-1)));
    EXPECT_FALSE(a1.mid().is_zero());
}

TEST(blocks, h_examples) {
    const Block& b = example_block();
    EXPECT_TRUE(b.eval_h(Dyadic(0), 50).is_exact());
    EXPECT_TRUE(b.eval_h(Dyadic(0), 50).mid().is_zero());
    EXPECT_EQ(b.eval_h(Dyadic(1), 50).mid(), Dyadic::pow2(-33));
    EXPECT_TRUE(b.eval_h(Dyadic(1), 50).is_exact());
    EXPECT_EQ(b.eval_h(Dyadic(mpz_class(4), -6), 50).mid(), Dyadic::pow2(-11));
    EXPECT_EQ(b.exact_h_grid(16), Dyadic::pow2(-22));
    EXPECT_EQ(b.exact_h_grid(0), Dyadic(0));
    EXPECT_EQ(b.exact_h_grid(64), Dyadic::pow2(-33));
    EXPECT_EQ(b.exact_h_grid(12), Dyadic::pow2(-10));
    Block f = make_block(parse_formula("(A x1 x1)"), 3);
    EXPECT_EQ(f.eval_h(Dyadic(1), 50).mid(), Dyadic(0));
}

TEST(blocks, h_integrates_g) {
    // Simpson's rule in doubles on one active cell, against the certified endpoint values.
    const Block& b = example_block();
    for (int T : {3, 9, 12, 16, 20}) {
        double lo = T / 64.0, hi = (T + 1) / 64.0;
        const int n = 64;
        double sum = 0;
        for (int k = 0; k <= n; ++k) {
            Dyadic s = Dyadic(mpz_class(T * n + k), -6) * Dyadic::ratio(1, 6);
            double w = (k == 0 || k == n) ? 1 : (k % 2 ? 4 : 2);
            Enclosure y = b.eval_h(s, 80);
            sum += w * b.eval_g(s, y.mid(), 80).mid().to_double();
        }
        double integral = sum * (hi - lo) / (3 * n);
        double rise = (b.exact_h_grid(T + 1) - b.exact_h_grid(T)).to_double();
        EXPECT_NEAR(integral, rise, 1e-9 * std::max(1.0, std::fabs(rise)) + 1e-14) << T;
    }
}

TEST(blocks, lipschitz) {
    Report r = check_lipschitz(example_block(), 10000, 3);
    EXPECT_TRUE(r.passed("lipschitz_analytic"));
    EXPECT_TRUE(r.passed("lipschitz_empirical"));
    EXPECT_GE(r.find("lipschitz_empirical")->samples, 7000u);
    Report bad = check_lipschitz(example_block().with_b_exp(example_block().b_exp() - 1), 10, 3);
    EXPECT_FALSE(bad.passed("lipschitz_analytic"));
}

TEST(blocks, residual) {
    const Block& b = example_block();
    Report r = check_ode_residual(b, Dyadic(mpz_class(7), -7), 20, 60);
    EXPECT_TRUE(r.passed()) << r.records()[0].observed << " vs " << r.records()[0].bound;
    EXPECT_TRUE(check_ode_residual(b, Dyadic(mpz_class(3), -6), 20, 60).passed());  // grid point
    EXPECT_TRUE(check_ode_residual(b, Dyadic(mpz_class(13), -8), 20, 60).passed());  // G = 0 cell
    EXPECT_TRUE(check_ode_residual(b, Dyadic(1), 20, 60).passed());
    EXPECT_TRUE(check_ode_residual(b, Dyadic(0), 20, 60).passed());
    std::mt19937_64 rng(9);
    for (int k = 0; k < 200; ++k) {
        Dyadic t = detail::random_unit(rng, 30);
        Report rr = check_ode_residual(b, t, 18, 70);
        ASSERT_TRUE(rr.passed()) << t.to_string() << " " << rr.records()[0].observed;
    }
}

TEST(blocks, structural_properties) {
    Report r = check_block(example_block(), 300, 5);
    for (const auto& rec : r.records()) EXPECT_TRUE(rec.pass) << rec.check << " at " << rec.point << ": " << rec.observed;
    for (const char* name : {"range", "digit_encoding", "seam", "magnitude", "branch_agreement", "h_at_one"})
        EXPECT_NE(r.find(name), nullptr) << name;
    std::mt19937_64 rng(13);
    for (int k = 0; k < 10; ++k) {
        Block b = make_block(random_formula(rng, 1 + k % 3, 3), k % 4);
        Report rb = check_block(b, 30, k);
        for (const auto& rec : rb.records()) ASSERT_TRUE(rec.pass) << rec.check << " at " << rec.point;
    }
}

TEST(blocks, zero_block_for_non_codes) {
    Block z = Block::from_code("0101", 2);
    EXPECT_TRUE(z.is_zero_block());
    EXPECT_TRUE(z.eval_g(d("1/2"), d("1/2"), 10).mid().is_zero());
    EXPECT_TRUE(z.eval_h(Dyadic(1), 10).mid().is_zero());
    EXPECT_EQ(z.h_at_one(), Dyadic(0));
    Block v = Block::from_code(encode_formula(example()), 2);
    EXPECT_FALSE(v.is_zero_block());
    EXPECT_EQ(v.language_value(), 1);
}
