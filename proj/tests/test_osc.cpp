#include <fstream>
#include <functional>
#include <sstream>

#include "doctest.h"
#include "needle/modelcheck.hpp"
#include "needle/osc.hpp"

using namespace needle;

namespace {

std::string slurp(const std::string& name) {
    std::ifstream in(std::string(NEEDLE_CORPUS) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

OscReport classify(const std::string& name) { return check_membership(parse_problem(slurp(name))); }

bool cites(const OscReport& r, int condition) {
    for (auto& v : r.violations)
        if (v.condition == condition) return true;
    return false;
}

// number of weak orderings of n labelled items, by listing every rank function
long brute_weak_orderings(int n) {
    long count = 0;
    std::vector<int> rank(n, 0);
    std::function<void(int)> go = [&](int i) {
        if (i == n) {
            // ranks must be onto 0..k-1
            int k = 0;
            for (int r : rank) k = std::max(k, r + 1);
            std::vector<bool> used(k, false);
            for (int r : rank) used[r] = true;
            for (bool u : used)
                if (!u) return;
            ++count;
            return;
        }
        for (int r = 0; r < n; ++r) {
            rank[i] = r;
            go(i + 1);
        }
    };
    go(0);
    return n == 0 ? 1 : count;
}

}  // namespace

TEST_CASE("members and non-members") {
    auto echo = classify("echo.smt2");
    CHECK(echo.member);
    CHECK(echo.sort == "round");
    CHECK(echo.order_relation == "lt");
    CHECK(echo.order_axioms_present);
    CHECK(classify("sorted-list-max.smt2").member);
    CHECK(classify("decidability.smt2").member);
    CHECK(classify("osc-unsat.smt2").member);
    CHECK_FALSE(classify("list-segment.smt2").member);
    CHECK_FALSE(classify("sorted-list.smt2").member);
    CHECK_FALSE(classify("presburger.smt2").member);
}

TEST_CASE("each violation example cites its condition") {
    auto v2 = classify("osc-violation-2.smt2");
    auto v3 = classify("osc-violation-3.smt2");
    auto v4 = classify("osc-violation-4.smt2");
    auto v5 = classify("osc-violation-5.smt2");
    CHECK_FALSE(v2.member);
    CHECK(cites(v2, 2));
    CHECK(cites(v3, 3));
    CHECK(cites(v4, 4));
    CHECK(cites(v5, 5));
    CHECK(v3.violations.size() == 1);
    CHECK(v4.violations.size() == 1);
    CHECK(v5.violations.size() == 1);
    for (auto& v : v2.violations) CHECK(v.loc.line > 0);
}

TEST_CASE("missing order axioms violate condition 1") {
    auto p = parse_problem("(set-info :needle-order lt)(set-info :needle-infinite-sort s)(declare-sort s 0)"
                           "(declare-const c s)(declare-fun lt (s s) Bool)(assert (lt c c))");
    auto r = check_membership(p);
    CHECK_FALSE(r.member);
    CHECK(cites(r, 1));
}

TEST_CASE("report JSON") {
    auto j = to_json(classify("osc-violation-4.smt2"));
    CHECK(j.find("\"member\": false") != std::string::npos);
    CHECK(j.find("\"condition\": 4") != std::string::npos);
}

TEST_CASE("ordered Bell numbers match brute force") {
    for (int n = 0; n <= 6; ++n) {
        CAPTURE(n);
        CHECK(ordered_bell(n) == brute_weak_orderings(n));
    }
    CHECK(ordered_bell(10) == 102247563);
    CHECK(ordered_bell(20) > BigInt("2000000000000000000"));
}

TEST_CASE("bounds of the decidability example") {
    auto b = compute_bounds(parse_problem(slurp("decidability.smt2")));
    CHECK(b.sort == "s");
    CHECK(b.ground_terms.at("s") == 2);
    CHECK(b.ell == 1);
    CHECK(b.m == 1);
    CHECK(b.bell == 3);
    CHECK(b.summary_cap == 108);
    CHECK(b.k_lo == -1);
    CHECK(b.k_hi == 1);
    CHECK(to_json(b).find("108") != std::string::npos);
    CHECK_THROWS_AS(compute_bounds(parse_problem(slurp("list-segment.smt2"))), NotInFragment);
}

TEST_CASE("restricted template family") {
    auto p = parse_problem(slurp("decidability.smt2"));
    auto b = compute_bounds(p);
    auto sizes = osc_size_vectors(p, b, 3);
    REQUIRE(!sizes.empty());
    for (size_t i = 0; i + 1 < sizes.size(); ++i) CHECK(total_nodes(sizes[i]) <= total_nodes(sizes[i + 1]));
    auto t = osc_template(p, b, parse_size_vector("s=1/1", p.vocab));
    CHECK(t.bound_candidates.size() == 1);
    CHECK(t.bound_candidates[0].kind == LiaFormula::Kind::True);
    // 0 and x1 + k for k in [-1, 1]
    CHECK(t.function_candidates.at("f").size() == 4);
    CHECK(t.relation_candidates.at("lt").size() == 4);
    CHECK(t.relation_candidates.at("R").size() == 2);
    CHECK_FALSE(osc_caps_cover(p, b, 3));
}

TEST_CASE("decide: refutation by exhaustion") {
    auto p = parse_problem(slurp("osc-unsat.smt2"));
    auto r = decide(p, DecideCaps{});
    CHECK(r.kind == DecideResult::Kind::Unsat);
    CHECK(r.templates_tried == r.templates_total);
    CHECK(r.templates_total > 0);
}

TEST_CASE("decide: decidability example is satisfiable") {
    auto p = parse_problem(slurp("decidability.smt2"));
    auto r = decide(p, DecideCaps{});
    REQUIRE(r.kind == DecideResult::Kind::Sat);
    CHECK(model_check(*r.structure, p.assertion, SolverConfig{}).truth == Truth::True);
    CHECK(uses_osc_shapes(*r.structure, p, r.bounds));
}

TEST_CASE("decide: capped search reports exhaustion of resources") {
    auto p = parse_problem(slurp("decidability.smt2"));
    DecideCaps caps;
    caps.max_total_nodes = 1;
    auto r = decide(p, caps);
    CHECK(r.kind == DecideResult::Kind::ResourceExhausted);
    CHECK_FALSE(r.reason.empty());
    CHECK_THROWS_AS(decide(parse_problem(slurp("list-segment.smt2")), DecideCaps{}), NotInFragment);
}
