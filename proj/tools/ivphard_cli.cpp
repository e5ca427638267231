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

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ivphard/blocks.hpp"
#include "ivphard/corpus.hpp"
#include "ivphard/patchwork.hpp"
#include "ivphard/qbf.hpp"
#include "ivphard/solver.hpp"
#include "ivphard/tableau.hpp"

namespace {

using namespace ivphard;
using nlohmann::json;

constexpr const char* kExample = "(E x2 (A x1 (or x1 x2)))";

std::int64_t default_prec() {
    if (const char* env = std::getenv("IVPHARD_PREC")) {
        try {
            return std::stoll(env);
        } catch (const std::exception&) {
            throw std::invalid_argument(std::string("IVPHARD_PREC is not an integer: ") + env);
        }
    }
    return 64;
}

struct Options {
    std::string formula;
    std::string file;
    std::optional<int> lambda;
    std::string t = "0";
    std::string y = "0";
    std::int64_t prec = 0;
    std::string format = "table";
    bool base = false;
    std::string variant = "main";
    int max_len = -1;
    std::string bits = "1011";
    std::string checks = "tableau,block,seams,lipschitz,residual,modulus,decode-identity";
    int k = 3;
    int samples = 200;
    std::uint64_t seed = 1;
    std::string mutate;
    std::optional<int> step_exp;
    std::optional<std::int64_t> oracle_prec;
    bool uncertified = false;
};

Formula load_formula(const Options& o) {
    std::string text = o.formula;
    if (!o.file.empty()) {
        std::ifstream in(o.file);
        if (!in) throw std::runtime_error("cannot read formula file " + o.file);
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    if (text.empty()) text = kExample;
    return parse_formula(text);
}

std::int64_t prec(const Options& o) { return o.prec > 0 ? o.prec : default_prec(); }

std::string show(const Enclosure& e) { return e.to_string(); }

void emit(const Report& r) {
    for (const auto& rec : r.records())
        std::cout << json{{"check", rec.check}, {"point", rec.point}, {"bound", rec.bound}, {"observed", rec.observed},
                          {"pass", rec.pass}}
                         .dump()
                  << '\n';
}

std::unique_ptr<Assembly> make_assembly(const Options& o, std::vector<std::string> extra = {}) {
    if (o.variant == "main") {
        int len = o.max_len >= 0 ? o.max_len : 16;
        for (const auto& u : extra) len = std::max(len, static_cast<int>(u.size()));
        return std::make_unique<MainAssembly>(len, extra);
    }
    if (o.variant == "tally") {
        std::vector<int> bits;
        for (char c : o.bits) {
            if (c != '0' && c != '1') throw std::invalid_argument("--bits must be a 0/1 string");
            bits.push_back(c - '0');
        }
        return std::make_unique<TallyAssembly>(TallyAssembly::from_bits(bits));
    }
    if (o.variant == "exp") return std::make_unique<ExpAssembly>(o.max_len >= 0 ? o.max_len : 4);
    throw std::invalid_argument("unknown variant " + o.variant);
}

int cmd_tableau(const Options& o) {
    Formula f = load_formula(o);
    Tableau t = o.base ? build_base(f) : build_tableau(f);
    Report r = verify_tableau(t, f);
    if (o.format == "csv")
        std::cout << tableau_csv(t);
    else if (o.format == "json")
        emit(r);
    else
        std::cout << render_table(t);
    return r.passed() ? 0 : 1;
}

Block block_for(const Options& o, const Formula& f) {
    int lambda = o.lambda ? *o.lambda : 2 * static_cast<int>(encode_formula(f).size()) + 2;
    return Block::make(f, lambda);
}

int cmd_eval_g(const Options& o) {
    Block b = block_for(o, load_formula(o));
    std::cout << show(b.eval_g(parse_dyadic(o.t), parse_dyadic(o.y), prec(o))) << '\n';
    return 0;
}

int cmd_eval_h(const Options& o) {
    Block b = block_for(o, load_formula(o));
    std::cout << show(b.eval_h(parse_dyadic(o.t), prec(o))) << '\n';
    return 0;
}

int cmd_assemble(const Options& o) {
    auto a = make_assembly(o);
    json out{{"variant", a->variant()}};
    if (auto* m = dynamic_cast<MainAssembly*>(a.get())) {
        out["max_len"] = m->max_len();
        out["codes"] = m->valid_codes().size();
        json sample = json::array();
        for (std::size_t i = 0; i < std::min<std::size_t>(8, m->valid_codes().size()); ++i) {
            const auto& u = m->valid_codes()[i];
            sample.push_back({{"u", u}, {"formula", decode_formula(u)->to_string()},
                              {"l-", MainAssembly::left_end(u).to_string()}, {"c", MainAssembly::center(u).to_string()},
                              {"l+", MainAssembly::right_end(u).to_string()}});
        }
        out["intervals"] = sample;
    } else if (auto* t = dynamic_cast<TallyAssembly*>(a.get())) {
        json blocks = json::array();
        for (int k = 0; k < t->depth(); ++k)
            blocks.push_back({{"k", k}, {"rho", t->rho(k)}, {"rho_bar", t->rho_bar(k)}, {"bit_position", t->bit_position(k)}});
        out["blocks"] = blocks;
        out["h(1)"] = show(t->h_at_one(0));
    } else if (auto* e = dynamic_cast<ExpAssembly*>(a.get())) {
        out["max_len"] = e->max_len();
        json words = json::array();
        for (int len = 0; len <= std::min(e->max_len(), 2); ++len)
            for (int v = 0; v < (1 << len); ++v) {
                std::string w = detail::bits_of(mpz_class(v), len);
                words.push_back({{"w", w}, {"u", e->formula_code(w)}, {"c", ExpAssembly::center(w).to_string()},
                                 {"gamma", ExpAssembly::gamma_w(len)}});
            }
        out["words"] = words;
    }
    std::cout << out.dump() << '\n';
    return 0;
}

int cmd_eval_global(const Options& o) {
    auto a = make_assembly(o);
    Dyadic T = parse_dyadic(o.t);
    Location loc = a->locate(T);
    json out{{"variant", a->variant()},
             {"T", T.to_string()},
             {"segment", segment_name(loc.segment)},
             {"index", loc.index},
             {"t", loc.t.to_string()},
             {"h", show(a->eval_h(T, prec(o)))},
             {"g", show(a->eval_g(T, parse_dyadic(o.y), prec(o)))}};
    std::cout << out.dump() << '\n';
    return 0;
}

bool wants(const Options& o, const std::string& name) { return ("," + o.checks + ",").find("," + name + ",") != std::string::npos; }

int cmd_verify(const Options& o) {
    std::cout << json{{"seed", o.seed}, {"checks", o.checks}, {"mutate", o.mutate}}.dump() << '\n';
    if (!o.mutate.empty() && o.mutate != "h-cell" && o.mutate != "halve-b" && o.mutate != "drop-mirror")
        throw std::invalid_argument("unknown mutation " + o.mutate);
    Formula f = load_formula(o);
    Report r;
    if (wants(o, "tableau")) {
        Tableau t = build_tableau(f);
        if (o.mutate == "h-cell") t.set_h(std::min(2, t.rows()), t.columns() / 3, t.h(std::min(2, t.rows()), t.columns() / 3) + 1);
        if (o.mutate == "drop-mirror") {
            t = build_base(f).doubled_frame();
            t.recompute_h();
        }
        r.merge(verify_tableau(t, f));
    }
    if (wants(o, "block")) {
        Block b = block_for(o, f);
        if (o.mutate == "halve-b") b = b.with_b_exp(b.b_exp() - 1);
        r.merge(check_block(b, o.samples, o.seed));
        r.merge(check_lipschitz(b, o.samples, o.seed));
    }
    auto a = make_assembly(o, o.variant == "main" ? std::vector<std::string>{encode_formula(f)} : std::vector<std::string>{});
    if (wants(o, "seams")) r.merge(check_seams(*a, 4096, o.seed));
    if (wants(o, "residual")) r.merge(check_global_residual(*a, o.samples, o.seed));
    if (wants(o, "lipschitz")) {
        if (dynamic_cast<ExpAssembly*>(a.get()))
            r.merge(check_global_lipschitz(*a, o.samples, o.seed,
                                           std::make_pair<std::int64_t, Dyadic>(o.k, Dyadic::pow2(ExpAssembly::r(o.k)))));
        else
            r.merge(check_global_lipschitz(*a, o.samples, o.seed));
    }
    if (wants(o, "modulus")) r.merge(check_modulus(*a, o.k, o.samples, o.seed));
    if (wants(o, "decode-identity")) {
        if (auto* m = dynamic_cast<MainAssembly*>(a.get())) r.merge(check_decode_identity(*m, 12));
        if (auto* e = dynamic_cast<ExpAssembly*>(a.get())) r.merge(check_decode_identity(*e, e->max_len()));
    }
    emit(r);
    return r.passed() ? 0 : 1;
}

json certificate(const SolveResult& s) {
    return {{"value", s.value.to_string()},
            {"enclosure", show(s.enclosure())},
            {"error_bound", s.error_bound.to_string()},
            {"q", s.step_exp},
            {"m", s.oracle_prec},
            {"steps", s.steps},
            {"certified", s.certified}};
}

int cmd_solve(const Options& o) {
    if (o.variant != "main") throw std::invalid_argument("solve supports --variant main; use decode for tally bits");
    Formula f = load_formula(o);
    std::string u = encode_formula(f);
    MainAssembly a(std::max(16, static_cast<int>(u.size())), {u});
    SolveConfig cfg = main_solve_config(u, o.step_exp, o.oracle_prec);
    cfg.certify = !o.uncertified;
    SolveResult s = euler_solve(oracle_of(a), cfg);
    json out = certificate(s);
    out["exact"] = a.eval_h(MainAssembly::center(u), cfg.oracle_prec).to_string();
    Dyadic err = (s.value - a.eval_h(MainAssembly::center(u), cfg.oracle_prec).mid()).abs();
    emit([&] {
        Report r;
        r.add("solve_enclosure", Dyadic(err) <= s.error_bound, "u=" + u, s.error_bound.to_string(), err.to_string());
        return r;
    }());
    std::cout << out.dump() << '\n';
    return 0;
}

int cmd_decode(const Options& o) {
    if (o.variant == "tally") {
        auto a = make_assembly(o);
        auto* t = dynamic_cast<TallyAssembly*>(a.get());
        std::cout << decode_tally(*t, o.k) << '\n';
        return 0;
    }
    Formula f = load_formula(o);
    std::string u = encode_formula(f);
    MainAssembly a(std::max(16, static_cast<int>(u.size())), {u});
    SolveConfig cfg = main_solve_config(u, o.step_exp, o.oracle_prec);
    cfg.certify = !o.uncertified;
    DecodeCertificate c = decode_membership(u, oracle_of(a), cfg);
    std::cout << c.bit << '\n';
    json cert = certificate(c.run);
    cert["threshold"] = c.threshold.to_string();
    cert["answer"] = c.answer;
    cert["precision"] = c.precision;
    std::cout << cert.dump() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ivphard: tableaux, blocks and assembled initial value problems from QBF"};
    app.require_subcommand(1);
    Options o;
    auto formula_opts = [&](CLI::App* c) {
        c->add_option("--formula", o.formula, "formula as an s-expression");
        c->add_option("--file", o.file, "file holding the formula");
    };
    auto* tab = app.add_subcommand("tableau", "build, verify and print the tableau");
    formula_opts(tab);
    tab->add_option("--format", o.format)->check(CLI::IsMember({"table", "csv", "json"}));
    tab->add_flag("--base", o.base, "stop before the mirror extension");

    auto* eg = app.add_subcommand("eval-g", "evaluate g_u(t, y)");
    auto* eh = app.add_subcommand("eval-h", "evaluate h_u(t)");
    for (auto* c : {eg, eh}) {
        formula_opts(c);
        c->add_option("--lambda", o.lambda);
        c->add_option("--t", o.t);
        c->add_option("--prec", o.prec);
    }
    eg->add_option("--y", o.y);

    auto* asm_ = app.add_subcommand("assemble", "describe an assembly");
    auto* eglob = app.add_subcommand("eval-global", "evaluate the assembled g and h");
    auto* ver = app.add_subcommand("verify", "run check suites and report JSON lines");
    ver->alias("verify-global");
    auto* sol = app.add_subcommand("solve", "Euler run over [l-_u, c_u]");
    auto* dec = app.add_subcommand("decode", "decide membership from the oracle for g");
    for (auto* c : {asm_, eglob, ver, sol, dec}) {
        c->add_option("--variant", o.variant)->check(CLI::IsMember({"main", "tally", "exp"}));
        c->add_option("--max-len", o.max_len);
        c->add_option("--bits", o.bits, "tally bits, e.g. 1011");
    }
    eglob->add_option("--t", o.t);
    eglob->add_option("--y", o.y);
    eglob->add_option("--prec", o.prec);
    formula_opts(ver);
    ver->add_option("--checks", o.checks);
    ver->add_option("--k", o.k);
    ver->add_option("--samples", o.samples);
    ver->add_option("--seed", o.seed);
    ver->add_option("--lambda", o.lambda);
    ver->add_option("--mutate", o.mutate, "h-cell, halve-b or drop-mirror");
    for (auto* c : {sol, dec}) {
        formula_opts(c);
        c->add_option("--step-exp", o.step_exp);
        c->add_option("--oracle-prec", o.oracle_prec);
        c->add_flag("--uncertified", o.uncertified, "report the error bound instead of enforcing it");
    }
    dec->add_option("--k", o.k, "tally bit index");

    CLI11_PARSE(app, argc, argv);
    try {
        if (tab->parsed()) return cmd_tableau(o);
        if (eg->parsed()) return cmd_eval_g(o);
        if (eh->parsed()) return cmd_eval_h(o);
        if (asm_->parsed()) return cmd_assemble(o);
        if (eglob->parsed()) return cmd_eval_global(o);
        if (ver->parsed()) return cmd_verify(o);
        if (sol->parsed()) return cmd_solve(o);
        if (dec->parsed()) return cmd_decode(o);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const BudgetExceeded& e) {
        std::cerr << e.what() << '\n';
        std::cerr << json{{"error", "error-budget-exceeded"}, {"suggested_q", e.suggested_q()}, {"suggested_m", e.suggested_m()}}.dump()
                  << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
