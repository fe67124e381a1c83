#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "gen.hpp"
#include "needle/fol.hpp"
#include "needle/structure.hpp"

using namespace needle;

namespace {

std::string slurp(const std::string& name) {
    std::ifstream in(std::string(NEEDLE_CORPUS) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool has_issue(const ValidationReport& r, const std::string& cond) {
    for (auto& i : r.issues)
        if (i.condition == cond) return true;
    return false;
}

}  // namespace

TEST_CASE("echo fixture loads and validates") {
    auto p = parse_problem(slurp("echo.smt2"));
    auto s = structure_from_json(slurp("echo-structure.json"));
    CHECK(s.nodes.size() == 4);
    CHECK(s.node("beta").kind == NodeKind::Summary);
    CHECK(is_regular_bound(s.bound("alpha")));
    CHECK(s.nodes_of("value") == std::vector<std::string>{"v0", "v1"});
    CHECK(s.relation("echo", {"alpha", "v0"}).kind == LiaFormula::Kind::False);
    CHECK(s.function("prev", {"beta"}).node == "beta");
    auto r = validate(s, p.vocab, SolverConfig{});
    CHECK_MESSAGE(r.ok(), r.summary());
}

TEST_CASE("every shipped fixture validates") {
    for (auto [prob, st] : {std::pair{"ring-leader.smt2", "ring-leader-structure.json"},
                            {"sorted-list-max.smt2", "sorted-list-max-structure.json"},
                            {"list-segment.smt2", "list-segment-structure.json"},
                            {"presburger-A5.smt2", "presburger-A5-structure.json"}}) {
        CAPTURE(st);
        auto p = parse_problem(slurp(prob));
        auto s = structure_from_json(slurp(st));
        auto r = validate(s, p.vocab, SolverConfig{});
        CHECK_MESSAGE(r.ok(), r.summary());
    }
}

TEST_CASE("validation catches broken structures") {
    auto p = parse_problem(slurp("echo.smt2"));
    auto base = structure_from_json(slurp("echo-structure.json"));
    SolverConfig cfg;

    auto s = base;
    s.functions["prev"][{"beta"}].term = parse_lia_term("(+ x1 1)");
    CHECK(has_issue(validate(s, p.vocab, cfg), "function-entailment"));

    s = base;
    s.functions["prev"].erase({"beta"});
    CHECK(has_issue(validate(s, p.vocab, cfg), "function-total"));

    s = base;
    s.functions["prev"][{"beta"}].node = "v0";
    CHECK(has_issue(validate(s, p.vocab, cfg), "function-range"));

    s = base;
    s.bounds["beta"] = parse_lia_formula("(and (> x 0) (< x 0))");
    CHECK(has_issue(validate(s, p.vocab, cfg), "bound"));

    s = base;
    s.constants["start"] = {"beta", 3};
    CHECK(has_issue(validate(s, p.vocab, cfg), "constant"));

    s = base;
    s.constants.erase("start");
    CHECK(has_issue(validate(s, p.vocab, cfg), "constant"));

    s = base;
    s.relations["echo"][{"beta", "v1"}] = parse_lia_formula("(< x1 x3)");
    CHECK(has_issue(validate(s, p.vocab, cfg), "relation"));
}

TEST_CASE("JSON round-trip") {
    for (auto name : {"echo-structure.json", "ring-leader-structure.json", "sorted-list-max-structure.json",
                      "presburger-A5-structure.json"}) {
        auto s = structure_from_json(slurp(name));
        CHECK(structure_from_json(to_json(s)) == s);
        CHECK(structure_from_json(to_json(s, -1)) == s);
    }
    std::mt19937 rng(9);
    for (int i = 0; i < 100; ++i) {
        auto v = gen::vocabulary(i % 2 == 0);
        auto m = gen::structure(rng, v);
        auto s = symbolic_from_finite(m, v);
        if (gen::coin(rng)) {
            s.nodes.push_back({"z", "A", NodeKind::Summary});
            s.bounds["z"] = parse_lia_formula("(>= x 2)");
            s.relations["P"][{"z"}] = parse_lia_formula("(= (mod x1 2) 0)");
        }
        CHECK(structure_from_json(to_json(s)) == s);
    }
    CHECK_THROWS(structure_from_json("{"));
    CHECK_THROWS(structure_from_json(R"J({"sorts": ["a"], "nodes": [{"id": "n", "sort": "b", "kind": "regular"}]})J"));
}

TEST_CASE("finite structures convert both ways") {
    std::mt19937 rng(4);
    for (int i = 0; i < 50; ++i) {
        auto v = gen::vocabulary(true);
        auto m = gen::structure(rng, v);
        auto s = symbolic_from_finite(m, v);
        CHECK(validate(s, v, SolverConfig{}).ok());
        auto back = explicate_finite(s);
        CHECK(back.domain == m.domain);
        CHECK(back.constants == m.constants);
        CHECK(back.functions == m.functions);
        for (auto& [r, set] : m.relations) CHECK(back.relations[r] == set);
    }
    auto s = structure_from_json(slurp("echo-structure.json"));
    CHECK_THROWS(explicate_finite(s));
}

TEST_CASE("ground terms and explication windows") {
    auto s = structure_from_json(slurp("ring-leader-structure.json"));
    auto w = explication_window(s, s.nodes[0].id, -3, 3);
    CHECK(w.size() == 4);  // x >= 0
    CHECK(w.front().index == 0);
    auto e = structure_from_json(slurp("echo-structure.json"));
    auto start = eval_ground_term(e, Term::constant("start", "round"));
    CHECK(start == Element{"alpha", 0});
    auto pp = eval_ground_term(e, Term::app("prev", "round", {Term::constant("start", "round")}));
    CHECK(pp == Element{"alpha", 0});
    CHECK(explication_window(e, "beta", -2, 5).size() == 3);
}

TEST_CASE("renderings mention every node") {
    auto s = structure_from_json(slurp("echo-structure.json"));
    auto dot = to_dot(s);
    auto txt = to_text(s);
    CHECK(dot.find("digraph") != std::string::npos);
    for (auto& n : s.nodes) {
        CHECK(dot.find(n.id) != std::string::npos);
        CHECK(txt.find(n.id) != std::string::npos);
    }
}

TEST_CASE("node tuples are lexicographic") {
    auto s = structure_from_json(slurp("echo-structure.json"));
    auto t = node_tuples(s, {"round", "value"});
    REQUIRE(t.size() == 4);
    CHECK(t[0] == NodeTuple{"alpha", "v0"});
    CHECK(t[3] == NodeTuple{"beta", "v1"});
}
