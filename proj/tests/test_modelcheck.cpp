#include <fstream>
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

Truth check_fixture(const std::string& prob, const std::string& st, const TransOptions& opt = {}) {
    auto p = parse_problem(slurp(prob));
    auto s = structure_from_json(slurp(st));
    return model_check(s, p.assertion, SolverConfig{}, {}, opt).truth;
}

}  // namespace

TEST_CASE("fixtures satisfy their formulas") {
    CHECK(check_fixture("echo.smt2", "echo-structure.json") == Truth::True);
    CHECK(check_fixture("ring-leader.smt2", "ring-leader-structure.json") == Truth::True);
    CHECK(check_fixture("sorted-list-max.smt2", "sorted-list-max-structure.json") == Truth::True);
    CHECK(check_fixture("list-segment.smt2", "list-segment-structure.json") == Truth::True);
    CHECK(check_fixture("presburger-A5.smt2", "presburger-A5-structure.json") == Truth::True);
}

TEST_CASE("regular simplification gives the same verdicts") {
    TransOptions o;
    o.regular_simplification = true;
    CHECK(check_fixture("echo.smt2", "echo-structure.json", o) == Truth::True);
    CHECK(check_fixture("sorted-list-max.smt2", "sorted-list-max-structure.json", o) == Truth::True);
}

TEST_CASE("the induction instance refutes the echo structure") {
    CHECK(check_fixture("echo-induction.smt2", "echo-structure.json") == Truth::False);
    CHECK(check_fixture("presburger-A6.smt2", "presburger-A5-structure.json") == Truth::False);
}

TEST_CASE("perturbed fixtures fail") {
    auto p = parse_problem(slurp("echo.smt2"));
    auto s = structure_from_json(slurp("echo-structure.json"));
    s.relations["lt"][{"beta", "beta"}] = parse_lia_formula("(> x1 x2)");
    CHECK(model_check(s, p.assertion, SolverConfig{}).truth == Truth::False);
    auto r = structure_from_json(slurp("ring-leader-structure.json"));
    auto rp = parse_problem(slurp("ring-leader.smt2"));
    r.relations["sent"][{"alpha"}] = parse_lia_formula("(> x1 0)");
    CHECK(model_check(r, rp.assertion, SolverConfig{}).truth == Truth::False);
}

TEST_CASE("symbolic evaluation of terms") {
    auto s = structure_from_json(slurp("echo-structure.json"));
    auto sym = symbolize({{"T", Element{"beta", -4}}});
    CHECK(sym.symbolic.at("T").node == "beta");
    CHECK(sym.residual.at(lia_var("T")) == -4);
    auto img = sym_eval(s, sym.symbolic, Term::app("prev", "round", {Term::var("T", "round")}));
    CHECK(img.node == "beta");
    CHECK(eval(img.term, sym.residual) == -5);
}

TEST_CASE("free variables take explicit elements") {
    auto s = structure_from_json(slurp("echo-structure.json"));
    auto p = parse_problem(slurp("echo.smt2"));
    auto T = Term::var("T", "round");
    auto f = Formula::rel("lt", {Term::app("prev", "round", {T}), T});
    CHECK(model_check(s, f, SolverConfig{}, {{"T", {"beta", -1}}}).truth == Truth::True);
    CHECK(model_check(s, f, SolverConfig{}, {{"T", {"alpha", 0}}}).truth == Truth::False);
    CHECK_THROWS(model_check(s, f, SolverConfig{}));
}

TEST_CASE("agreement with finite evaluation on random inputs") {
    std::mt19937 rng(17);
    SolverConfig cfg;
    for (int i = 0; i < 120; ++i) {
        auto v = gen::vocabulary(i % 3 == 0);
        auto m = gen::structure(rng, v);
        gen::FormulaGen fg{rng, v};
        auto f = fg.closed(gen::uniform(rng, 1, 10));
        auto s = symbolic_from_finite(m, v);
        TransOptions o;
        o.regular_simplification = i % 2 == 1;
        auto r = model_check(s, f, cfg, {}, o);
        REQUIRE(r.truth != Truth::Undetermined);
        CHECK((r.truth == Truth::True) == eval_finite(m, f));
    }
}

TEST_CASE("summary nodes behave like their explications") {
    // one summary node {0..3}, successor taken mod 4, against the explicit 4-element structure
    auto s = structure_from_json(R"J({
      "sorts": ["A"],
      "nodes": [{"id": "z", "sort": "A", "kind": "summary", "bound": "(and (>= x 0) (<= x 3))"}],
      "constants": {"c": {"node": "z", "index": 1}},
      "functions": {"f": [{"args": ["z"], "node": "z", "term": "(- (+ x1 1) (* 4 (div (+ x1 1) 4)))"}]},
      "relations": {"P": [{"args": ["z"], "formula": "(= x1 (* 2 (div x1 2)))"}],
                    "Q": [{"args": ["z", "z"], "formula": "(< x1 x2)"}]}
    })J");
    FiniteStructure m;
    m.domain["A"] = {"e0", "e1", "e2", "e3"};
    m.constants["c"] = "e1";
    for (int i = 0; i < 4; ++i) {
        m.functions["f"][{"e" + std::to_string(i)}] = "e" + std::to_string((i + 1) % 4);
        if (i % 2 == 0) m.relations["P"].insert({"e" + std::to_string(i)});
        for (int j = i + 1; j < 4; ++j) m.relations["Q"].insert({"e" + std::to_string(i), "e" + std::to_string(j)});
    }
    auto v = gen::vocabulary(false);
    std::mt19937 rng(23);
    for (int i = 0; i < 60; ++i) {
        gen::FormulaGen fg{rng, v};
        auto f = fg.closed(gen::uniform(rng, 1, 8));
        auto r = model_check(s, f, SolverConfig{});
        REQUIRE(r.truth != Truth::Undetermined);
        CHECK((r.truth == Truth::True) == eval_finite(m, f));
    }
}
