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

#include <gtest/gtest.h>

#include "ivphard/corpus.hpp"
#include "ivphard/solver.hpp"

namespace {

using namespace ivphard;

const char* kExampleCode = "111001110000010";

SolveConfig unit_config(int q) {
    SolveConfig cfg;
    cfg.step_exp = q;
    cfg.oracle_prec = 40;
    cfg.start_t = Dyadic(0);
    cfg.start_y = Dyadic(0);
    cfg.target = Dyadic(1);
    return cfg;
}

TEST(solver, zero_field) {
    SolveConfig cfg = unit_config(6);
    cfg.start_y = Dyadic::ratio(3, 3);
    SolveResult r = euler_solve([](const Dyadic&, const Dyadic&, std::int64_t) { return Enclosure(Dyadic(0)); }, cfg);
    EXPECT_EQ(r.value, Dyadic::ratio(3, 3));
    EXPECT_EQ(r.steps, 64u);
    EXPECT_TRUE(r.enclosure().contains(Dyadic::ratio(3, 3)));
    // M2 = 1 is still charged; with M2 = 0 only the oracle slack remains
    cfg.m2 = Dyadic(0);
    Dyadic e = euler_solve([](const Dyadic&, const Dyadic&, std::int64_t) { return Enclosure(Dyadic(0)); }, cfg).error_bound;
    EXPECT_GT(e, Dyadic::pow2(-40));
    EXPECT_LT(e, Dyadic::pow2(-38));
}

TEST(solver, constant_field) {
    SolveResult r = euler_solve([](const Dyadic&, const Dyadic&, std::int64_t) { return Enclosure(Dyadic(1)); }, unit_config(10));
    EXPECT_EQ(r.value, Dyadic(1));
    EXPECT_TRUE(r.enclosure().contains(Dyadic(1)));
}

TEST(solver, linear_field_first_order) {
    // y' = t, y(1) = 1/2; Euler gives (1 - 2^-q)/2
    auto g = [](const Dyadic& t, const Dyadic&, std::int64_t) { return Enclosure(t); };
    for (int q : {4, 8}) {
        SolveResult r = euler_solve(g, unit_config(q));
        EXPECT_EQ(r.value, Dyadic::ratio(1, 1) - Dyadic::pow2(-q - 1));
        EXPECT_TRUE(r.enclosure().contains(Dyadic::ratio(1, 1)));
    }
}

TEST(solver, bad_interval) {
    SolveConfig cfg = unit_config(3);
    cfg.target = Dyadic::ratio(1, 4);
    EXPECT_THROW(euler_solve([](const Dyadic&, const Dyadic&, std::int64_t) { return Enclosure(Dyadic(0)); }, cfg),
                 std::invalid_argument);
}

TEST(solver, budget_suggestion) {
    auto g = [](const Dyadic& t, const Dyadic&, std::int64_t) { return Enclosure(t); };
    SolveConfig cfg = unit_config(4);
    cfg.budget = Dyadic::pow2(-12);
    try {
        euler_solve(g, cfg);
        FAIL() << "expected BudgetExceeded";
    } catch (const BudgetExceeded& e) {
        EXPECT_GT(e.suggested_q(), 4);
        cfg.step_exp = e.suggested_q();
        cfg.oracle_prec = e.suggested_m();
        SolveResult r = euler_solve(g, cfg);
        EXPECT_TRUE(r.certified);
        EXPECT_LE((r.value - Dyadic::ratio(1, 1)).abs(), Dyadic::pow2(-12));
    }
}

TEST(solver, reduction_triple) {
    EXPECT_EQ(ReductionTriple::S("", 2), "01");
    EXPECT_EQ(ReductionTriple::S("", 4), "0100");
    EXPECT_EQ(ReductionTriple::S("1", 4), "01011");
    EXPECT_EQ(ReductionTriple::S("1", 2), "010");
    EXPECT_EQ(ReductionTriple::T(kExampleCode).size(), 161u);
    EXPECT_EQ(ReductionTriple::R(kExampleCode, "01"), 1);
    EXPECT_EQ(ReductionTriple::R(kExampleCode, "00"), 0);
    EXPECT_EQ(ReductionTriple::R(kExampleCode, "11"), 0);
}

TEST(solver, decode_example) {
    MainAssembly a(16);
    SolveConfig cfg = main_solve_config(kExampleCode);
    EXPECT_THROW(decode_membership(kExampleCode, oracle_of(a), cfg), BudgetExceeded);
    cfg.certify = false;
    DecodeCertificate c = decode_membership(kExampleCode, oracle_of(a), cfg);
    EXPECT_EQ(c.bit, 1);
    EXPECT_EQ(c.answer, "01");
    EXPECT_FALSE(c.run.certified);
    EXPECT_TRUE(c.run.enclosure().contains(Dyadic::pow2(-161)));
    EXPECT_EQ(c.run.steps, 256u);
}

TEST(solver, decode_false) {
    MainAssembly a(16);
    std::string u = encode_formula(parse_formula("(A x1 x1)"));
    SolveConfig cfg = main_solve_config(u);
    cfg.certify = false;
    EXPECT_EQ(decode_membership(u, oracle_of(a), cfg).bit, 0);
}

TEST(solver, decode_corpus) {
    std::vector<std::string> codes;
    for (int n = 1; n <= 2; ++n)
        for (const auto& f : representative_corpus(n)) codes.push_back(encode_formula(f));
    MainAssembly a(48, codes);
    for (int n = 1; n <= 2; ++n)
        for (const auto& f : representative_corpus(n)) {
            std::string u = encode_formula(f);
            SolveConfig cfg = main_solve_config(u);
            cfg.certify = false;
            EXPECT_EQ(decode_membership(u, oracle_of(a), cfg).bit, qbf_value(f)) << f.to_string();
        }
}

TEST(solver, error_halves_with_step) {
    MainAssembly a(16);
    std::vector<Dyadic> e = convergence_errors(a, kExampleCode, 40, 3, 220);
    for (std::size_t i = 1; i < e.size(); ++i) EXPECT_LE(e[i].shifted(1), e[i - 1]);
}

TEST(solver, tally) {
    TallyAssembly a = TallyAssembly::from_bits({1, 0, 1, 0});
    for (int k = 0; k < 4; ++k) {
        EXPECT_EQ(decode_tally(a, k), k % 2 == 0 ? 1 : 0);
        EXPECT_EQ(decode_tally(a, k, true), k % 2 == 0 ? 1 : 0);
    }
    EXPECT_THROW(decode_tally(a, 4), InsufficientPrecision);
    TallyAssembly single = TallyAssembly::from_bits({1, 0, 0});
    EXPECT_EQ(decode_tally(single, 0), 1);
    EXPECT_EQ(single.h_at_one(0).mid(), Dyadic::pow2(-36));
}

}  // namespace
