#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "gen.hpp"
#include "needle/finder.hpp"
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

// every finite structure of the given vocabulary with |A| = n, |B| = n
bool exists_finite_model(const Vocabulary& v, int n, const Formula& f) {
    FiniteStructure base;
    for (auto& s : v.sorts)
        for (int i = 0; i < n; ++i) base.domain[s].push_back((s == "A" ? "a" : "b") + std::to_string(i));
    // choice points: constants, function entries, relation entries
    struct Point {
        int kind;  // 0 constant, 1 function entry, 2 relation entry
        std::string sym;
        std::vector<std::string> args;
        std::vector<std::string> range;
    };
    std::vector<Point> pts;
    for (auto& [c, s] : v.constants) pts.push_back({0, c, {}, base.domain.at(s)});
    for (auto& [fn, sig] : v.functions)
        for (auto& t : gen::tuples(base, sig.args)) pts.push_back({1, fn, t, base.domain.at(sig.range)});
    for (auto& [r, sorts] : v.relations)
        for (auto& t : gen::tuples(base, sorts)) pts.push_back({2, r, t, {"0", "1"}});
    std::vector<size_t> pick(pts.size(), 0);
    while (true) {
        FiniteStructure m = base;
        for (auto& [r, s] : v.relations) m.relations[r];
        for (size_t i = 0; i < pts.size(); ++i) {
            auto& p = pts[i];
            if (p.kind == 0) m.constants[p.sym] = p.range[pick[i]];
            else if (p.kind == 1) m.functions[p.sym][p.args] = p.range[pick[i]];
            else if (pick[i] == 1) m.relations[p.sym].insert(p.args);
        }
        if (eval_finite(m, f)) return true;
        size_t k = 0;
        while (k < pts.size() && ++pick[k] == pts[k].range.size()) pick[k++] = 0;
        if (k == pts.size()) return false;
    }
}

}  // namespace

TEST_CASE("size vector syntax") {
    auto p = parse_problem(slurp("echo.smt2"));
    auto sv = parse_size_vector("round=1/1,value=2", p.vocab);
    CHECK(to_string(sv) == "round=1/1,value=2/0");
    CHECK(total_nodes(sv) == 4);
    CHECK(to_string(parse_size_vector("value=3", p.vocab)) == "round=1/0,value=3/0");
    CHECK_THROWS(parse_size_vector("nope=1", p.vocab));
    CHECK_THROWS(parse_size_vector("round=x", p.vocab));
}

TEST_CASE("size enumeration order") {
    auto p = parse_problem(slurp("echo.smt2"));
    auto all = size_vectors(p, 4);
    REQUIRE(!all.empty());
    // round has a self-loop, so splits with a summary node come first
    CHECK(to_string(all.front()) == "round=0/1,value=1/0");
    int last = 0;
    for (auto& s : all) {
        CHECK(total_nodes(s) >= last);
        last = total_nodes(s);
    }
    bool seen = false;
    for (auto& s : all) seen |= to_string(s) == "round=1/1,value=2/0";
    CHECK(seen);
    // value is not an infinite sort
    for (auto& s : all) CHECK(s[1].second.summary == 0);
}

TEST_CASE("heuristic template") {
    auto p = parse_problem(slurp("echo.smt2"));
    auto t = heuristic_template(p.vocab, parse_size_vector("round=1/1,value=2", p.vocab));
    CHECK(t.nodes.size() == 4);
    CHECK(t.bound_candidates.size() == 3);
    CHECK(t.function_candidates.at("prev").size() == 4);
    // unary relations only see x1
    for (auto& c : t.relation_candidates.at("echo")) CHECK(free_int_vars(c).count("x3") == 0);
    CHECK(t.relation_candidates.at("lt").size() > t.relation_candidates.at("echo").size() - 1);
    CHECK_THROWS(heuristic_template(p.vocab, parse_size_vector("round=1,value=1/1", p.vocab)));
    auto t2 = template_from_json(to_json(t), p.vocab);
    CHECK(t2.nodes.size() == t.nodes.size());
    CHECK(t2.function_candidates == t.function_candidates);
    CHECK(t2.relation_candidates == t.relation_candidates);
    CHECK(t2.bound_candidates == t.bound_candidates);
    // only summary arguments admit candidates mentioning x_i
    auto regular_args = t.function_candidates_for("prev", {t.nodes_of("round")[0]});
    CHECK(regular_args.size() == 1);
}

TEST_CASE("echo is found at the documented sizes") {
    auto p = parse_problem(slurp("echo.smt2"));
    auto t = heuristic_template(p.vocab, parse_size_vector("round=1/1,value=2", p.vocab));
    auto r = find(p.assertion, p.vocab, t);
    REQUIRE(r.kind == FinderOutcome::Kind::Found);
    CHECK(model_check(*r.structure, p.assertion, SolverConfig{}).truth == Truth::True);
    CHECK(validate(*r.structure, p.vocab, SolverConfig{}).ok());
    // too small: no finite CTI exists
    auto small = heuristic_template(p.vocab, parse_size_vector("round=2,value=2", p.vocab));
    CHECK(find(p.assertion, p.vocab, small).kind == FinderOutcome::Kind::NoneInFamily);
}

TEST_CASE("all-regular templates find exactly the finite models") {
    std::mt19937 rng(31);
    auto v = gen::vocabulary(false);
    int found = 0, none = 0;
    for (int i = 0; i < 100; ++i) {
        gen::FormulaGen fg{rng, v};
        auto f = fg.closed(gen::uniform(rng, 3, 12));
        for (int n : {1, 2}) {
            SizeVector sz{{"A", {n, 0}}};
            auto r = find(f, v, heuristic_template(v, sz));
            REQUIRE(r.kind != FinderOutcome::Kind::Undetermined);
            bool brute = exists_finite_model(v, n, f);
            CHECK((r.kind == FinderOutcome::Kind::Found) == brute);
            (brute ? found : none)++;
        }
    }
    CHECK(found > 5);
    CHECK(none > 5);
}

TEST_CASE("singleton-candidate family agrees with member-by-member checking") {
    auto v = gen::vocabulary(false);
    v.infinite_sorts = {"A"};
    Template t;
    t.sorts = {"A"};
    t.nodes = template_nodes({{"A", {1, 1}}});
    t.bound_candidates = {parse_lia_formula("(>= x 0)"), parse_lia_formula("(<= x 0)")};
    t.function_candidates["f"] = {LiaTerm::lit(0), parse_lia_term("(+ x1 1)")};
    t.relation_candidates["P"] = {LiaFormula::top(), LiaFormula::bot(), parse_lia_formula("(= x1 0)")};
    t.relation_candidates["Q"] = {LiaFormula::bot(), parse_lia_formula("(< x1 x2)")};
    FinderOptions opt;
    opt.symmetry_breaking = false;
    std::mt19937 rng(41);
    SolverConfig cfg;
    for (int i = 0; i < 6; ++i) {
        gen::FormulaGen fg{rng, v};
        auto f = fg.closed(gen::uniform(rng, 3, 9));
        auto enc = encode(f, v, t, opt);
        // walk every member of the family
        std::vector<size_t> pick(enc.slots.size(), 0);
        bool any = false;
        while (!any) {
            Model m;
            for (size_t s = 0; s < enc.slots.size(); ++s)
                for (size_t o = 0; o < enc.slots[s].options.size(); ++o)
                    if (!enc.slots[s].options[o].guard.empty()) m[enc.slots[s].options[o].guard] = o == pick[s];
            auto d = decode(enc, m);
            if (validate(d.structure, v, cfg).ok() && model_check(d.structure, f, cfg).truth == Truth::True) any = true;
            size_t k = 0;
            while (k < enc.slots.size() && ++pick[k] == enc.slots[k].options.size()) pick[k++] = 0;
            if (k == enc.slots.size()) break;
        }
        auto r = find(f, v, t, opt);
        REQUIRE(r.kind != FinderOutcome::Kind::Undetermined);
        CHECK((r.kind == FinderOutcome::Kind::Found) == any);
    }
}

TEST_CASE("symmetry breaking and order optimization keep outcomes") {
    std::mt19937 rng(53);
    auto v = gen::vocabulary(true);
    for (int i = 0; i < 15; ++i) {
        gen::FormulaGen fg{rng, v};
        auto f = fg.closed(gen::uniform(rng, 3, 12));
        SizeVector sz{{"A", {2, 0}}, {"B", {1, 0}}};
        auto t = heuristic_template(v, sz);
        FinderOptions off;
        off.symmetry_breaking = false;
        auto a = find(f, v, t);
        auto b = find(f, v, t, off);
        CHECK(a.kind == b.kind);
    }
    for (auto name : {"echo.smt2", "echo-induction.smt2"}) {
        auto p = parse_problem(slurp(name));
        auto t = heuristic_template(p.vocab, parse_size_vector("round=1/1,value=2", p.vocab));
        FinderOptions off;
        off.order_optimization = false;
        off.symmetry_breaking = false;
        auto a = find(p.assertion, p.vocab, t);
        auto b = find(p.assertion, p.vocab, t, off);
        CAPTURE(name);
        CHECK(a.kind == b.kind);
    }
}

TEST_CASE("encoding bookkeeping") {
    auto p = parse_problem(slurp("echo.smt2"));
    auto t = heuristic_template(p.vocab, parse_size_vector("round=1/1,value=2", p.vocab));
    auto e = encode(p.assertion, p.vocab, t);
    CHECK(e.order_relation == "lt");
    CHECK(e.slot_index.count("b!round_s0"));
    CHECK(e.slot_index.count("c!start"));
    for (auto& s : e.slots)
        if (s.options.size() > 1)
            for (auto& o : s.options) CHECK(o.guard.rfind("g!", 0) == 0);
    auto wanted = e.wanted();
    for (auto& b : e.bool_vars) CHECK(std::find(wanted.begin(), wanted.end(), b) != wanted.end());
    FinderOptions off;
    off.order_optimization = false;
    CHECK(encode(p.assertion, p.vocab, t, off).order_relation.empty());
    Model bogus;
    CHECK_THROWS_AS(decode(e, bogus), InternalConsistencyError);
}

TEST_CASE("enumeration with logs") {
    auto p = parse_problem(slurp("echo.smt2"));
    SearchCaps caps;
    caps.max_total_nodes = 4;
    auto r = enumerate_find(p, caps);
    REQUIRE(r.kind == SearchResult::Kind::Found);
    CHECK(model_check(*r.structure, p.assertion, SolverConfig{}).truth == Truth::True);
    REQUIRE(!r.log.empty());
    CHECK(r.log.back().outcome == "found");
    for (size_t i = 0; i + 1 < r.log.size(); ++i) CHECK(r.log[i].outcome == "none");
    CHECK(log_to_json(r.log).find("found") != std::string::npos);
}

TEST_CASE("no found outcome failed re-verification") {
    CHECK(finder_stats().reverify_failures == 0);
    CHECK(finder_stats().found > 0);
}
