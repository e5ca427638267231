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

#ifndef IVPHARD_QBF_HPP
#define IVPHARD_QBF_HPP

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ivphard {

enum class Quantifier { forall, exists };

/// Value of a quantifier applied to the number c of satisfying branches; c == 3 maps to 0.
inline int eval_quantifier(Quantifier q, int c) {
    if (c < 0 || c > 3) throw std::invalid_argument("eval_quantifier: count outside [4]");
    if (q == Quantifier::forall) return c == 2 ? 1 : 0;
    return (c == 1 || c == 2) ? 1 : 0;
}

struct Node;
using Expr = std::shared_ptr<const Node>;

struct Node {
    enum class Kind { var, constant, negate, conj, disj };
    Kind kind;
    int index = 0;  // variable number for var, truth value for constant
    Expr left, right;

    static Expr var(int k) { return std::make_shared<const Node>(Node{Kind::var, k, nullptr, nullptr}); }
    static Expr constant(bool b) { return std::make_shared<const Node>(Node{Kind::constant, b ? 1 : 0, nullptr, nullptr}); }
    static Expr negate(Expr a) { return std::make_shared<const Node>(Node{Kind::negate, 0, std::move(a), nullptr}); }
    static Expr conj(Expr a, Expr b) { return std::make_shared<const Node>(Node{Kind::conj, 0, std::move(a), std::move(b)}); }
    static Expr disj(Expr a, Expr b) { return std::make_shared<const Node>(Node{Kind::disj, 0, std::move(a), std::move(b)}); }
};

/// Bit k-1 of `assignment` is the value of x_k.
inline bool eval_expr(const Node& e, std::uint64_t assignment) {
    switch (e.kind) {
        case Node::Kind::var: return (assignment >> (e.index - 1)) & 1U;
        case Node::Kind::constant: return e.index != 0;
        case Node::Kind::negate: return !eval_expr(*e.left, assignment);
        case Node::Kind::conj: return eval_expr(*e.left, assignment) && eval_expr(*e.right, assignment);
        case Node::Kind::disj: return eval_expr(*e.left, assignment) || eval_expr(*e.right, assignment);
    }
    return false;
}

inline int expr_depth(const Node& e) {
    switch (e.kind) {
        case Node::Kind::var:
        case Node::Kind::constant: return 0;
        case Node::Kind::negate: return 1 + expr_depth(*e.left);
        default: return 1 + std::max(expr_depth(*e.left), expr_depth(*e.right));
    }
}

inline std::string expr_to_string(const Node& e) {
    switch (e.kind) {
        case Node::Kind::var: return "x" + std::to_string(e.index);
        case Node::Kind::constant: return e.index ? "1" : "0";
        case Node::Kind::negate: return "(not " + expr_to_string(*e.left) + ")";
        case Node::Kind::conj: return "(and " + expr_to_string(*e.left) + " " + expr_to_string(*e.right) + ")";
        case Node::Kind::disj: return "(or " + expr_to_string(*e.left) + " " + expr_to_string(*e.right) + ")";
    }
    return "";
}

/// Prenex formula Q_n x_n ... Q_1 x_1 . matrix.
struct Formula {
    int n = 0;
    std::vector<Quantifier> quantifiers;  // quantifiers[i-1] = Q_i
    Expr matrix;

    Quantifier q(int i) const { return quantifiers.at(static_cast<std::size_t>(i - 1)); }

    std::string to_string() const {
        std::string out;
        for (int i = n; i >= 1; --i) out += std::string("(") + (q(i) == Quantifier::forall ? "A" : "E") + " x" + std::to_string(i) + " ";
        out += expr_to_string(*matrix);
        out += std::string(static_cast<std::size_t>(n), ')');
        return out;
    }
};

class ParseError : public std::invalid_argument {
  public:
    ParseError(const std::string& what, std::size_t position)
        : std::invalid_argument(what + " at position " + std::to_string(position)), position_(position) {}
    std::size_t position() const { return position_; }

  private:
    std::size_t position_;
};

namespace detail {

class FormulaParser {
  public:
    explicit FormulaParser(std::string_view text) : text_(text) {}

    Formula parse() {
        Formula f;
        std::vector<std::pair<int, std::size_t>> binders;
        std::vector<Quantifier> outer_first;
        skip_space();
        while (peek_binder()) {
            expect('(');
            std::string q = atom();
            std::size_t var_at = pos_;
            int k = variable(atom(), var_at);
            for (const auto& binder : binders)
                if (binder.first == k) throw ParseError("duplicate binding of x" + std::to_string(k), var_at);
            binders.emplace_back(k, var_at);
            outer_first.push_back(q == "A" ? Quantifier::forall : Quantifier::exists);
            skip_space();
        }
        f.n = static_cast<int>(binders.size());
        for (std::size_t idx = 0; idx < binders.size(); ++idx) {
            int want = f.n - static_cast<int>(idx);
            if (binders[idx].first != want)
                throw ParseError("binders must bind x" + std::to_string(f.n) + " down to x1 in order; found x" +
                                     std::to_string(binders[idx].first),
                                 binders[idx].second);
        }
        f.quantifiers.assign(outer_first.rbegin(), outer_first.rend());
        f.matrix = matrix(f.n);
        for (std::size_t idx = 0; idx < binders.size(); ++idx) expect(')');
        skip_space();
        if (pos_ != text_.size()) throw ParseError("trailing input", pos_);
        return f;
    }

  private:
    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    void expect(char c) {
        skip_space();
        if (pos_ >= text_.size() || text_[pos_] != c) throw ParseError(std::string("expected '") + c + "'", pos_);
        ++pos_;
    }

    std::string atom() {
        skip_space();
        std::size_t start = pos_;
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != '(' &&
               text_[pos_] != ')')
            ++pos_;
        if (start == pos_) throw ParseError("expected a symbol", start);
        return std::string(text_.substr(start, pos_ - start));
    }

    bool peek_binder() {
        std::size_t save = pos_;
        skip_space();
        bool result = false;
        if (pos_ < text_.size() && text_[pos_] == '(') {
            ++pos_;
            skip_space();
            std::size_t start = pos_;
            while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            std::string_view word = text_.substr(start, pos_ - start);
            result = (word == "A" || word == "E");
        }
        pos_ = save;
        return result;
    }

    static int variable(const std::string& s, std::size_t at) {
        if (s.size() < 2 || s[0] != 'x') throw ParseError("expected a variable x<k>, got '" + s + "'", at);
        int k = 0;
        for (std::size_t i = 1; i < s.size(); ++i) {
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) throw ParseError("bad variable '" + s + "'", at);
            k = k * 10 + (s[i] - '0');
            if (k > 63) throw ParseError("variable index too large '" + s + "'", at);
        }
        if (k < 1) throw ParseError("variable index must be positive", at);
        return k;
    }

    Expr matrix(int n) {
        skip_space();
        std::size_t at = pos_;
        if (pos_ < text_.size() && text_[pos_] == '(') {
            if (peek_binder()) throw ParseError("quantifier inside the matrix (formula not prenex)", at);
            ++pos_;
            std::string op = atom();
            Expr result;
            if (op == "not") {
                result = Node::negate(matrix(n));
            } else if (op == "and" || op == "or") {
                Expr a = matrix(n);
                Expr b = matrix(n);
                result = op == "and" ? Node::conj(a, b) : Node::disj(a, b);
            } else {
                throw ParseError("unknown operator '" + op + "'", at + 1);
            }
            expect(')');
            return result;
        }
        std::string s = atom();
        if (s == "0" || s == "1") return Node::constant(s == "1");
        int k = variable(s, at);
        if (k > n) throw ParseError("unbound variable x" + std::to_string(k), at);
        return Node::var(k);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses the s-expression form, e.g. "(E x2 (A x1 (or x1 x2)))".
inline Formula parse_formula(std::string_view text) { return detail::FormulaParser(text).parse(); }

/// Bit k-1 of `assignment` is b_k.
inline int eval_matrix(const Formula& f, std::uint64_t assignment) { return eval_expr(*f.matrix, assignment) ? 1 : 0; }

/// psi_i(b_{i+1}, ..., b_n); `suffix` holds b_k at bit k-1 and its low i bits are ignored.
inline int eval_subformula(const Formula& f, int i, std::uint64_t suffix) {
    if (i < 0 || i > f.n) throw std::out_of_range("eval_subformula: level outside 0..n");
    if (i == 0) return eval_matrix(f, suffix);
    std::uint64_t clear = suffix & ~(std::uint64_t{1} << (i - 1));
    int count = eval_subformula(f, i - 1, clear) + eval_subformula(f, i - 1, clear | (std::uint64_t{1} << (i - 1)));
    return eval_quantifier(f.q(i), count);
}

inline int qbf_value(const Formula& f) { return eval_subformula(f, f.n, 0); }

// Binary code of a formula. The prefix lists quantifiers outermost first as "1" followed by 0
// for A or 1 for E, terminated by "0". The matrix is written in prefix form: x_k as "00" then
// k-1 ones then "0"; a constant b as "01b"; not as "10"; and as "110"; or as "111".

inline void encode_expr(const Node& e, std::string& out) {
    switch (e.kind) {
        case Node::Kind::var:
            out += "00";
            out += std::string(static_cast<std::size_t>(e.index - 1), '1');
            out += '0';
            break;
        case Node::Kind::constant: out += e.index ? "011" : "010"; break;
        case Node::Kind::negate:
            out += "10";
            encode_expr(*e.left, out);
            break;
        case Node::Kind::conj:
        case Node::Kind::disj:
            out += e.kind == Node::Kind::conj ? "110" : "111";
            encode_expr(*e.left, out);
            encode_expr(*e.right, out);
            break;
    }
}

inline std::string encode_formula(const Formula& f) {
    std::string out;
    for (int i = f.n; i >= 1; --i) out += f.q(i) == Quantifier::forall ? "10" : "11";
    out += '0';
    encode_expr(*f.matrix, out);
    return out;
}

namespace detail {

inline std::optional<Expr> decode_expr(std::string_view s, std::size_t& pos, int n, int depth) {
    if (depth > 64 || pos + 2 > s.size()) return std::nullopt;
    std::string_view tag = s.substr(pos, 2);
    pos += 2;
    if (tag == "00") {
        int k = 1;
        while (pos < s.size() && s[pos] == '1') ++k, ++pos;
        if (pos >= s.size()) return std::nullopt;
        ++pos;
        if (k > n) return std::nullopt;
        return Node::var(k);
    }
    if (tag == "01") {
        if (pos >= s.size()) return std::nullopt;
        return Node::constant(s[pos++] == '1');
    }
    if (tag == "10") {
        auto a = decode_expr(s, pos, n, depth + 1);
        if (!a) return std::nullopt;
        return Node::negate(*a);
    }
    if (pos >= s.size()) return std::nullopt;
    bool is_or = s[pos++] == '1';
    auto a = decode_expr(s, pos, n, depth + 1);
    if (!a) return std::nullopt;
    auto b = decode_expr(s, pos, n, depth + 1);
    if (!b) return std::nullopt;
    return is_or ? Node::disj(*a, *b) : Node::conj(*a, *b);
}

}  // namespace detail

/// Inverse of encode_formula; nullopt for strings that are not codes of a formula with n >= 1.
inline std::optional<Formula> decode_formula(std::string_view s) {
    for (char c : s)
        if (c != '0' && c != '1') return std::nullopt;
    std::size_t pos = 0;
    std::vector<Quantifier> outer_first;
    while (pos < s.size() && s[pos] == '1') {
        if (pos + 1 >= s.size()) return std::nullopt;
        outer_first.push_back(s[pos + 1] == '0' ? Quantifier::forall : Quantifier::exists);
        pos += 2;
    }
    if (pos >= s.size() || outer_first.empty() || outer_first.size() > 63) return std::nullopt;
    ++pos;
    Formula f;
    f.n = static_cast<int>(outer_first.size());
    f.quantifiers.assign(outer_first.rbegin(), outer_first.rend());
    auto m = detail::decode_expr(s, pos, f.n, 0);
    if (!m || pos != s.size()) return std::nullopt;
    f.matrix = *m;
    return f;
}

}  // namespace ivphard

#endif  // IVPHARD_QBF_HPP
