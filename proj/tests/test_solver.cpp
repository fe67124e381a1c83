#include <random>

#include "doctest.h"
#include "needle/solver.hpp"

using namespace needle;

TEST_CASE("get-value responses") {
    auto m = parse_values("((x 3) (|y!lia| (- 7)) (g true) (h false))");
    CHECK(std::get<Int>(m.at("x")) == 3);
    CHECK(std::get<Int>(m.at("y!lia")) == -7);
    CHECK(std::get<bool>(m.at("g")));
    CHECK_FALSE(std::get<bool>(m.at("h")));
}

TEST_CASE("sat with model, unsat, quantified") {
    SolverConfig cfg;
    auto r = check_formula(cfg, parse_lia_formula("(and (> x 3) (< x 5) b)"), {"x", "b"});
    REQUIRE(r.sat());
    CHECK(std::get<Int>(r.model.at("x")) == 4);
    CHECK(std::get<bool>(r.model.at("b")));
    CHECK(check_formula(cfg, parse_lia_formula("(and (> x 3) (< x 4))")).unsat());
    CHECK(check_formula(cfg, parse_lia_formula("(forall ((y Int)) (exists ((z Int)) (< y z)))")).sat());
    CHECK(check_formula(cfg, parse_lia_formula("(exists ((y Int)) (forall ((z Int)) (<= z y)))")).unsat());
    auto neg = check_formula(cfg, parse_lia_formula("(= (+ x 10) 0)"), {"x"});
    REQUIRE(neg.sat());
    CHECK(std::get<Int>(neg.model.at("x")) == -10);
}

TEST_CASE("seed and counters") {
    SolverConfig cfg;
    cfg.seed = 3;
    auto before = solver_stats();
    CHECK(check_formula(cfg, parse_lia_formula("(> x 0)")).sat());
    auto after = solver_stats();
    CHECK(after.calls == before.calls + 1);
    CHECK(after.sat == before.sat + 1);
}

TEST_CASE("launch failure") {
    SolverConfig cfg;
    cfg.executable = "/nonexistent/solver-binary";
    CHECK_THROWS_AS(check_formula(cfg, LiaFormula::top()), SolverLaunchError);
}

TEST_CASE("models satisfy their formulas") {
    // random conjunctions of comparisons over a small box
    std::mt19937 rng(5);
    std::uniform_int_distribution<Int> c(-5, 5);
    SolverConfig cfg;
    int sat = 0, unsat = 0;
    for (int i = 0; i < 40; ++i) {
        std::vector<LiaFormula> parts;
        for (const char* v : {"x", "y"}) {
            parts.push_back(lia_ge(LiaTerm::var(v), LiaTerm::lit(-3)));
            parts.push_back(lia_le(LiaTerm::var(v), LiaTerm::lit(3)));
        }
        for (int k = 0; k < 3; ++k)
            parts.push_back(LiaFormula::compare(
                Cmp(rng() % 5), LiaTerm::add(LiaTerm::mul(c(rng), LiaTerm::var("x")), LiaTerm::mul(c(rng), LiaTerm::var("y"))),
                LiaTerm::lit(c(rng))));
        auto f = LiaFormula::conj(parts);
        auto r = check_formula(cfg, f, {"x", "y"});
        bool brute = false;
        for (Int x = -3; x <= 3; ++x)
            for (Int y = -3; y <= 3; ++y)
                if (eval(f, {{"x", x}, {"y", y}})) brute = true;
        REQUIRE(!r.undetermined());
        CHECK(r.sat() == brute);
        if (r.sat()) {
            ++sat;
            IntEnv env{{"x", std::get<Int>(r.model.at("x"))}, {"y", std::get<Int>(r.model.at("y"))}};
            CHECK(eval(f, env));
        } else {
            ++unsat;
        }
    }
    CHECK(sat > 0);
    CHECK(unsat > 0);
}
