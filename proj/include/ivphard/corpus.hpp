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

#ifndef IVPHARD_CORPUS_HPP
#define IVPHARD_CORPUS_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include "ivphard/qbf.hpp"

namespace ivphard {

/// Every expression tree of depth at most `depth` over x_1..x_n built from and, or, not.
inline std::vector<Expr> enumerate_matrices(int n, int depth) {
    std::vector<Expr> layer;
    for (int k = 1; k <= n; ++k) layer.push_back(Node::var(k));
    for (int d = 1; d <= depth; ++d) {
        std::vector<Expr> next;
        next.reserve(n + layer.size() + 2 * layer.size() * layer.size());
        for (int k = 1; k <= n; ++k) next.push_back(Node::var(k));
        for (const auto& a : layer) next.push_back(Node::negate(a));
        for (const auto& a : layer)
            for (const auto& b : layer) next.push_back(Node::conj(a, b));
        for (const auto& a : layer)
            for (const auto& b : layer) next.push_back(Node::disj(a, b));
        layer = std::move(next);
    }
    return layer;
}

/// All 2^n prefixes; bit i-1 of the index selects exists for Q_i.
inline std::vector<std::vector<Quantifier>> all_prefixes(int n) {
    std::vector<std::vector<Quantifier>> out;
    for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
        std::vector<Quantifier> q;
        for (int i = 0; i < n; ++i) q.push_back((mask >> i) & 1U ? Quantifier::exists : Quantifier::forall);
        out.push_back(q);
    }
    return out;
}

inline std::uint32_t truth_table(const Node& e, int n) {
    std::uint32_t table = 0;
    for (std::uint32_t a = 0; a < (1U << n); ++a)
        if (eval_expr(e, a)) table |= 1U << a;
    return table;
}

/// Calls `visit` on every formula with n variables whose matrix has depth at most `depth`.
inline void for_each_formula(int n, int depth, const std::function<void(const Formula&)>& visit) {
    auto matrices = enumerate_matrices(n, depth);
    for (const auto& prefix : all_prefixes(n))
        for (const auto& m : matrices) visit(Formula{n, prefix, m});
}

/// One formula per (prefix, truth table): the first matrix of depth <= 3 realizing each table.
inline std::vector<Formula> representative_corpus(int n) {
    std::map<std::uint32_t, Expr> pick;
    for (const auto& m : enumerate_matrices(n, 3)) pick.try_emplace(truth_table(*m, n), m);
    std::vector<Formula> out;
    for (const auto& prefix : all_prefixes(n))
        for (const auto& [table, m] : pick) out.push_back(Formula{n, prefix, m});
    return out;
}

inline Expr random_matrix(std::mt19937_64& rng, int n, int depth) {
    std::uniform_int_distribution<int> pick(0, depth == 0 ? 1 : 4);
    switch (pick(rng)) {
        case 0: return Node::var(std::uniform_int_distribution<int>(1, n)(rng));
        case 1:
            if (depth == 0 || rng() % 4 != 0) return Node::var(std::uniform_int_distribution<int>(1, n)(rng));
            return Node::constant(rng() % 2 == 0);
        case 2: return Node::negate(random_matrix(rng, n, depth - 1));
        case 3: return Node::conj(random_matrix(rng, n, depth - 1), random_matrix(rng, n, depth - 1));
        default: return Node::disj(random_matrix(rng, n, depth - 1), random_matrix(rng, n, depth - 1));
    }
}

inline Formula random_formula(std::mt19937_64& rng, int n, int depth) {
    Formula f;
    f.n = n;
    for (int i = 0; i < n; ++i) f.quantifiers.push_back(rng() % 2 ? Quantifier::exists : Quantifier::forall);
    f.matrix = random_matrix(rng, n, depth);
    return f;
}

}  // namespace ivphard

#endif  // IVPHARD_CORPUS_HPP
