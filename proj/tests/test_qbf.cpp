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

#include <random>

#include "gtest/gtest.h"
#include "ivphard/corpus.hpp"
#include "ivphard/qbf.hpp"

using namespace ivphard;

namespace {

const char* kExample = "(E x2 (A x1 (or x1 x2)))";

// Textbook game-tree semantics, outermost quantifier first.
bool game_value(const Formula& f, int level, std::uint64_t assignment) {
    if (level == 0) return eval_expr(*f.matrix, assignment);
    std::uint64_t bit = std::uint64_t{1} << (level - 1);
    bool lo = game_value(f, level - 1, assignment & ~bit);
    bool hi = game_value(f, level - 1, assignment | bit);
    return f.q(level) == Quantifier::forall ? (lo && hi) : (lo || hi);
}

}  // namespace

TEST(qbf, quantifier_table) {
    EXPECT_EQ(eval_quantifier(Quantifier::forall, 2), 1);
    EXPECT_EQ(eval_quantifier(Quantifier::exists, 0), 0);
    EXPECT_EQ(eval_quantifier(Quantifier::forall, 1), 0);
    EXPECT_EQ(eval_quantifier(Quantifier::forall, 0), 0);
    EXPECT_EQ(eval_quantifier(Quantifier::exists, 1), 1);
    EXPECT_EQ(eval_quantifier(Quantifier::exists, 2), 1);
    EXPECT_EQ(eval_quantifier(Quantifier::exists, 3), 0);
    EXPECT_EQ(eval_quantifier(Quantifier::forall, 3), 0);
    EXPECT_THROW(eval_quantifier(Quantifier::forall, 4), std::invalid_argument);
}

TEST(qbf, parse_example) {
    Formula f = parse_formula(kExample);
    EXPECT_EQ(f.n, 2);
    EXPECT_EQ(f.q(2), Quantifier::exists);
    EXPECT_EQ(f.q(1), Quantifier::forall);
    EXPECT_EQ(f.matrix->kind, Node::Kind::disj);
    EXPECT_EQ(f.to_string(), kExample);
    Formula g = parse_formula("(A x1 x1)");
    EXPECT_EQ(g.n, 1);
    EXPECT_EQ(g.q(1), Quantifier::forall);
    EXPECT_EQ(g.matrix->kind, Node::Kind::var);
    EXPECT_EQ(parse_formula("  ( E x1\n(not (and x1 1)) )").to_string(), "(E x1 (not (and x1 1)))");
}

TEST(qbf, parse_errors) {
    EXPECT_THROW(parse_formula("(E x1 (A x1 x1))"), ParseError);
    EXPECT_THROW(parse_formula("(A x1 x2)"), ParseError);
    EXPECT_THROW(parse_formula("(A x1 (or x1 (E x2 x2)))"), ParseError);
    EXPECT_THROW(parse_formula("(A x1 (or x1)"), ParseError);
    EXPECT_THROW(parse_formula("(A x1 (xor x1 x1))"), ParseError);
    EXPECT_THROW(parse_formula("(A x1 x1) x1"), ParseError);
    EXPECT_THROW(parse_formula("(A x2 (E x1 x1)"), ParseError);
    EXPECT_THROW(parse_formula("(A x1 (E x2 x1))"), ParseError);
    try {
        parse_formula("(A x1 (and x1 x7))");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.position(), 14u);
    }
}

TEST(qbf, matrix_and_subformulas) {
    Formula f = parse_formula(kExample);
    EXPECT_EQ(eval_matrix(f, 0b01), 1);  // (x1, x2) = (1, 0)
    EXPECT_EQ(eval_matrix(f, 0b00), 0);
    EXPECT_EQ(eval_subformula(f, 1, 0b00), 0);  // forall x1. x1 or 0
    EXPECT_EQ(eval_subformula(f, 1, 0b10), 1);
    EXPECT_EQ(eval_subformula(f, 2, 0), 1);
    EXPECT_EQ(qbf_value(f), 1);
    EXPECT_EQ(qbf_value(parse_formula("(A x1 x1)")), 0);
    EXPECT_EQ(qbf_value(parse_formula("(E x1 x1)")), 1);
    Formula t = parse_formula("(A x2 (A x1 1))");
    for (std::uint64_t a = 0; a < 4; ++a) EXPECT_EQ(eval_matrix(t, a), 1);
}

TEST(qbf, agrees_with_game_tree) {
    for (int n = 1; n <= 2; ++n) for_each_formula(n, 2, [&](const Formula& f) {
        ASSERT_EQ(qbf_value(f) == 1, game_value(f, f.n, 0)) << f.to_string();
    });
    std::mt19937_64 rng(17);
    for (int k = 0; k < 400; ++k) {
        Formula f = random_formula(rng, 1 + k % 4, 4);
        ASSERT_EQ(qbf_value(f) == 1, game_value(f, f.n, 0)) << f.to_string();
    }
}

TEST(qbf, quantifier_step) {
    std::mt19937_64 rng(23);
    for (int k = 0; k < 200; ++k) {
        Formula f = random_formula(rng, 1 + k % 4, 3);
        for (int i = 0; i < f.n; ++i)
            for (std::uint64_t suffix = 0; suffix < (1U << f.n); suffix += (1U << (i + 1))) {
                int c = eval_subformula(f, i, suffix) + eval_subformula(f, i, suffix | (1U << i));
                ASSERT_EQ(eval_quantifier(f.q(i + 1), c), eval_subformula(f, i + 1, suffix));
            }
    }
}

TEST(qbf, binary_code_round_trip) {
    Formula f = parse_formula(kExample);
    std::string code = encode_formula(f);
    EXPECT_EQ(code, "111001110000010");
    auto back = decode_formula(code);
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(back->to_string(), kExample);
    EXPECT_FALSE(decode_formula("").has_value());
    EXPECT_FALSE(decode_formula("0000").has_value());
    EXPECT_FALSE(decode_formula(code + "0").has_value());
    EXPECT_FALSE(decode_formula("1000010").has_value());  // x2 with n = 1
    std::mt19937_64 rng(29);
    for (int k = 0; k < 300; ++k) {
        Formula g = random_formula(rng, 1 + k % 4, 3);
        auto d = decode_formula(encode_formula(g));
        ASSERT_TRUE(d.has_value());
        ASSERT_EQ(d->to_string(), g.to_string());
    }
}

TEST(corpus, sizes) {
    EXPECT_EQ(enumerate_matrices(1, 3).size(), 2776u);
    EXPECT_EQ(enumerate_matrices(2, 2).size(), 302u);
    EXPECT_EQ(representative_corpus(1).size(), 8u);
    EXPECT_EQ(representative_corpus(2).size(), 64u);
}
