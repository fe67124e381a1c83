#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "doctest.h"
#include "gen.hpp"
#include "needle/modelcheck.hpp"
#include "needle/transforms.hpp"

using namespace needle;

namespace {

std::string slurp(const std::string& name) {
    std::ifstream in(std::string(NEEDLE_CORPUS) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// calls fn for every interpretation of the given new symbols on top of m
bool any_expansion(const FiniteStructure& m, const Vocabulary& v, const std::vector<std::string>& syms,
                   const std::function<bool(const FiniteStructure&)>& fn) {
    std::function<bool(size_t, FiniteStructure&)> go = [&](size_t i, FiniteStructure& cur) -> bool {
        if (i == syms.size()) return fn(cur);
        const auto& s = syms[i];
        if (v.constants.count(s)) {
            for (auto& e : m.domain.at(v.constants.at(s))) {
                cur.constants[s] = e;
                if (go(i + 1, cur)) return true;
            }
            return false;
        }
        const auto& sig = v.functions.at(s);
        auto keys = gen::tuples(m, sig.args);
        const auto& range = m.domain.at(sig.range);
        std::vector<size_t> pick(keys.size(), 0);
        while (true) {
            for (size_t k = 0; k < keys.size(); ++k) cur.functions[s][keys[k]] = range[pick[k]];
            if (go(i + 1, cur)) return true;
            size_t k = 0;
            while (k < keys.size() && ++pick[k] == range.size()) pick[k++] = 0;
            if (k == keys.size()) return false;
        }
    };
    FiniteStructure cur = m;
    return go(0, cur);
}

double expansion_count(const FiniteStructure& m, const Vocabulary& v, const std::vector<std::string>& syms) {
    double n = 1;
    for (auto& s : syms) {
        if (v.constants.count(s)) {
            n *= m.domain.at(v.constants.at(s)).size();
            continue;
        }
        auto& sig = v.functions.at(s);
        n *= std::pow(double(m.domain.at(sig.range).size()), double(gen::tuples(m, sig.args).size()));
    }
    return n;
}

}  // namespace

TEST_CASE("NNF shape, idempotence and equivalence") {
    std::mt19937 rng(1);
    for (int i = 0; i < 300; ++i) {
        auto v = gen::vocabulary(i % 2 == 1);
        gen::FormulaGen fg{rng, v};
        auto f = fg.closed(gen::uniform(rng, 1, 10));
        auto n = to_nnf(f);
        CHECK(is_nnf(n));
        CHECK(to_nnf(n) == n);
        auto m = gen::structure(rng, v);
        CHECK(eval_finite(m, n) == eval_finite(m, f));
        auto e = eliminate_iff(f);
        CHECK(eval_finite(m, e) == eval_finite(m, f));
    }
}

TEST_CASE("miniscoping preserves truth") {
    std::mt19937 rng(2);
    for (int i = 0; i < 300; ++i) {
        auto v = gen::vocabulary(i % 2 == 0);
        gen::FormulaGen fg{rng, v};
        auto n = to_nnf(fg.closed(gen::uniform(rng, 2, 12)));
        auto ms = miniscope(n);
        CHECK(is_nnf(ms));
        auto m = gen::structure(rng, v);
        CHECK(eval_finite(m, ms) == eval_finite(m, n));
    }
}

TEST_CASE("pushing quantifiers inward") {
    auto p = parse_problem("(declare-sort A 0)(declare-fun P (A) Bool)(declare-fun Q (A) Bool)(declare-const c A)"
                           "(assert (forall ((x A)) (and (P x) (Q c))))");
    auto ms = miniscope(to_nnf(p.assertion));
    REQUIRE(ms.kind == Formula::Kind::And);
    CHECK(ms.kids[0].kind == Formula::Kind::Forall);
    CHECK(ms.kids[1].kind == Formula::Kind::Rel);
}

TEST_CASE("Skolemization is equisatisfiable on every small structure") {
    std::mt19937 rng(3);
    int checked = 0;
    for (int i = 0; i < 400 && checked < 150; ++i) {
        auto v = gen::vocabulary(false);
        gen::FormulaGen fg{rng, v};
        auto n = to_nnf(fg.closed(gen::uniform(rng, 2, 9)));
        auto sk = skolemize(n, v);
        auto m = gen::structure(rng, v, 2);
        if (expansion_count(m, sk.vocab, sk.new_symbols) > 5000) continue;
        ++checked;
        CHECK(bound_vars(sk.formula).size() <= bound_vars(n).size());
        for (auto& s : sk.new_symbols) CHECK(s.rfind("sk!", 0) == 0);
        bool orig = eval_finite(m, n);
        bool expanded = any_expansion(m, sk.vocab, sk.new_symbols,
                                      [&](const FiniteStructure& e) { return eval_finite(e, sk.formula); });
        CHECK(orig == expanded);
    }
    CHECK(checked >= 100);
}

TEST_CASE("Skolem functions take only the universals they use") {
    auto p = parse_problem("(declare-sort A 0)(declare-fun R (A A) Bool)(declare-fun P (A) Bool)"
                           "(assert (forall ((x A) (z A)) (and (P z) (exists ((y A)) (R x y)))))");
    auto sk = skolemize(to_nnf(p.assertion), p.vocab);
    REQUIRE(sk.new_symbols.size() == 1);
    CHECK(sk.vocab.functions.at(sk.new_symbols[0]).args.size() == 1);
    auto q = parse_problem("(declare-sort A 0)(declare-fun P (A) Bool)(assert (exists ((y A)) (P y)))");
    auto sq = skolemize(to_nnf(q.assertion), q.vocab);
    REQUIRE(sq.new_symbols.size() == 1);
    CHECK(sq.vocab.constants.count(sq.new_symbols[0]));
    // not in NNF
    CHECK_THROWS(skolemize(Formula::negate(q.assertion), q.vocab));
}

TEST_CASE("quantifier alternation graph") {
    auto p = parse_problem(slurp("osc-violation-3.smt2"));
    auto g = qa_graph(p.assertion, p.vocab);
    CHECK(g.has_edge("sinf", "s"));
    auto e = parse_problem("(declare-sort A 0)(declare-sort B 0)(declare-fun f (A) B)(declare-fun R (A B) Bool)"
                           "(assert (forall ((x B)) (exists ((y A)) (R y x))))");
    auto ge = qa_graph(e.assertion, e.vocab);
    CHECK(ge.has_edge("A", "B"));
    CHECK(ge.has_edge("B", "A"));
    CHECK(ge.cyclic_sorts() == std::set<std::string>{"A", "B"});
    CHECK(ge.cycle_edges().size() == 2);
    CHECK_FALSE(ge.has_self_loop("A"));
}

TEST_CASE("ground terms") {
    auto p = parse_problem(slurp("decidability.smt2"));
    auto g = syntactic_ground_terms(p.assertion, "s");
    CHECK(g.size() == 2);
    // c, f(c), f(f(c)), ... never ends
    CHECK_THROWS(herbrand_terms(p.vocab, "s", "", 50));
    auto q = parse_problem("(declare-sort A 0)(declare-sort B 0)(declare-const a A)(declare-const b B)"
                           "(declare-fun f (A) B)(declare-fun g (B) B)(assert true)");
    CHECK(herbrand_terms(q.vocab, "A", "B").size() == 1);
    CHECK_THROWS(herbrand_terms(q.vocab, "B", "A", 50));
    auto r = parse_problem("(declare-sort A 0)(declare-sort B 0)(declare-const a A)(declare-const a2 A)"
                           "(declare-fun f (A A) B)(assert true)");
    CHECK(herbrand_terms(r.vocab, "B", "").size() == 4);
}

TEST_CASE("order axiom recognition") {
    auto ax = order_axioms("lt", "s");
    REQUIRE(ax.size() == 3);
    CHECK(match_order_axiom(ax[0], "lt") == OrderAxiom::AntiReflexive);
    CHECK(match_order_axiom(ax[1], "lt") == OrderAxiom::Transitive);
    CHECK(match_order_axiom(ax[2], "lt") == OrderAxiom::Linear);
    CHECK_FALSE(match_order_axiom(ax[0], "other"));
    auto renamed = order_axioms("lt", "s", "zz");
    for (int i = 0; i < 3; ++i) CHECK(match_order_axiom(renamed[i], "lt") == match_order_axiom(ax[i], "lt"));
    auto p = parse_problem("(declare-sort s 0)(declare-fun lt (s s) Bool)"
                           "(assert (forall ((a s) (b s)) (or (= b a) (lt b a) (lt a b))))");
    CHECK(match_order_axiom(p.assertion, "lt") == OrderAxiom::Linear);
}

TEST_CASE("conjuncts flatten") {
    auto a = Formula::top();
    auto f = Formula::conj({Formula::conj({a, a}), a});
    CHECK(conjuncts(f).size() == 3);
    CHECK(conjuncts(a).size() == 1);
}
