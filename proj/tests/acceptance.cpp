// acceptance run: one line per criterion

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "gen.hpp"
#include "needle/finder.hpp"
#include "needle/modelcheck.hpp"
#include "needle/osc.hpp"

using namespace needle;
using Clock = std::chrono::steady_clock;
using std::chrono::seconds;

namespace {

// wall-clock limits, seconds
constexpr double kEchoFindLimit = 60;
constexpr double kInductionLimit = 600;
constexpr double kFixtureLimit = 30;
constexpr double kCorpusFindLimit = 120;
constexpr double kPresburgerLimit = 300;
constexpr double kPresburgerRefuteLimit = 600;
constexpr double kRandomCheckLimit = 900;
constexpr int kRandomCases = 1000;
constexpr int kMaxDomain = 3;
constexpr int kMaxQuantDepth = 3;
constexpr double kDecideUnsatLimit = 60;
constexpr double kDecideSatLimit = 120;

std::string slurp(const std::string& name) {
    std::ifstream in(std::string(NEEDLE_CORPUS) + "/" + name);
    if (!in) throw Error("missing corpus file " + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string secs(double s) {
    std::ostringstream o;
    o.precision(s < 10 ? 2 : 1);
    o << std::fixed << s << "s";
    return o.str();
}

bool verified(const SymbolicStructure& s, const Problem& p) {
    return validate(s, p.vocab, SolverConfig{}).ok() &&
           model_check(s, p.assertion, SolverConfig{}).truth == Truth::True;
}

SolverConfig with_timeout(double s) {
    SolverConfig c;
    c.timeout = std::chrono::milliseconds(long(s * 1000));
    return c;
}

struct Line {
    bool pass = false;
    std::string detail;
};

Line echo_find() {
    auto p = parse_problem(slurp("echo.smt2"));
    auto sizes = parse_size_vector("round=1/1,value=2", p.vocab);
    FinderOptions opt;
    opt.solver = with_timeout(kEchoFindLimit);
    auto t0 = Clock::now();
    auto r = find(p.assertion, p.vocab, heuristic_template(p.vocab, sizes), opt);
    double dt = since(t0);
    bool ok = r.kind == FinderOutcome::Kind::Found && verified(*r.structure, p) && dt <= kEchoFindLimit;
    return {ok, std::string("echo at ") + to_string(sizes) + ": " + to_string(r.kind) + " in " + secs(dt) +
                    " (limit " + secs(kEchoFindLimit) + ")"};
}

Line echo_induction() {
    auto p = parse_problem(slurp("echo-induction.smt2"));
    SearchCaps caps;
    caps.max_total_nodes = 6;
    caps.budget = std::chrono::milliseconds(long(kInductionLimit * 1000));
    // per-call limit is whatever remains of the budget
    FinderOptions fo;
    fo.solver.timeout = caps.budget;
    auto t0 = Clock::now();
    auto r = enumerate_find(p, caps, fo);
    double dt = since(t0);
    long found = 0;
    for (auto& e : r.log) found += e.outcome == "found";
    bool ok = r.kind == SearchResult::Kind::Exhausted && found == 0 && dt <= kInductionLimit;
    return {ok, std::string("cap 6: ") + to_string(r.kind) + " after " + std::to_string(r.log.size()) +
                    " size vectors in " + secs(dt) + " (limit " + secs(kInductionLimit) + ")"};
}

Line fixtures() {
    bool ok = true;
    std::string d;
    for (auto [prob, st] : {std::pair{"echo.smt2", "echo-structure.json"},
                            {"ring-leader.smt2", "ring-leader-structure.json"},
                            {"sorted-list-max.smt2", "sorted-list-max-structure.json"}}) {
        auto p = parse_problem(slurp(prob));
        auto s = structure_from_json(slurp(st));
        auto t0 = Clock::now();
        auto r = model_check(s, p.assertion, with_timeout(kFixtureLimit));
        double dt = since(t0);
        bool one = r.truth == Truth::True && dt <= kFixtureLimit;
        ok &= one;
        d += std::string(d.empty() ? "" : ", ") + st + " " + to_string(r.truth) + " " + secs(dt);
    }
    return {ok, d + " (limit " + secs(kFixtureLimit) + " each)"};
}

Line corpus_parity() {
    bool ok = true;
    std::string d;
    for (auto [prob, expect] : {std::pair{"ring-leader.smt2", "node=0/1"}, {"sorted-list-max.smt2", "node=1/1"},
                                {"list-segment.smt2", "node=1/1"}}) {
        auto p = parse_problem(slurp(prob));
        SearchCaps caps;
        caps.budget = std::chrono::milliseconds(long(kCorpusFindLimit * 1000));
        auto t0 = Clock::now();
        auto r = enumerate_find(p, caps);
        double dt = since(t0);
        bool one = r.kind == SearchResult::Kind::Found && verified(*r.structure, p) && dt <= kCorpusFindLimit;
        ok &= one;
        d += std::string(d.empty() ? "" : ", ") + prob + " " + to_string(r.kind);
        if (r.sizes) {
            auto got = to_string(*r.sizes);
            d += " at " + got + (got == to_string(parse_size_vector(expect, p.vocab)) ? "" : " (expected " + std::string(expect) + ")");
        }
        d += " " + secs(dt);
    }
    return {ok, d + " (limit " + secs(kCorpusFindLimit) + " each)"};
}

Line presburger() {
    std::map<std::string, std::vector<LiaTerm>> extra{
        {"plus", {parse_lia_term("(+ x1 x2)"), parse_lia_term("(+ (+ x1 x2) 1)")}}};
    auto p5 = parse_problem(slurp("presburger-A5.smt2"));
    auto sizes = parse_size_vector("nat=1/2", p5.vocab);
    FinderOptions opt;
    opt.solver = with_timeout(kPresburgerLimit);
    auto t0 = Clock::now();
    auto r5 = find(p5.assertion, p5.vocab, heuristic_template(p5.vocab, sizes, extra), opt);
    double d5 = since(t0);
    bool ok5 = r5.kind == FinderOutcome::Kind::Found && verified(*r5.structure, p5) && d5 <= kPresburgerLimit;
    if (ok5) {
        int summaries = 0;
        for (auto& n : r5.structure->nodes) summaries += n.kind == NodeKind::Summary;
        ok5 = summaries == 2;
    }
    auto p6 = parse_problem(slurp("presburger-A6.smt2"));
    opt.solver = with_timeout(kPresburgerRefuteLimit);
    t0 = Clock::now();
    auto r6 = find(p6.assertion, p6.vocab, heuristic_template(p6.vocab, sizes, extra), opt);
    double d6 = since(t0);
    bool ok6 = r6.kind == FinderOutcome::Kind::NoneInFamily && d6 <= kPresburgerRefuteLimit;
    return {ok5 && ok6, std::string("A1-A5 at ") + to_string(sizes) + ": " + to_string(r5.kind) + " " + secs(d5) +
                            " (limit " + secs(kPresburgerLimit) + "); with A6: " + to_string(r6.kind) + " " +
                            secs(d6) + (r6.reason.empty() ? "" : " [" + r6.reason + "]") + " (limit " +
                            secs(kPresburgerRefuteLimit) + ")"};
}

Line random_model_checking() {
    std::mt19937 rng(20240601);
    SolverConfig cfg;
    int agree = 0, undetermined = 0;
    auto t0 = Clock::now();
    for (int i = 0; i < kRandomCases; ++i) {
        auto v = gen::vocabulary(i % 2 == 0);
        auto m = gen::structure(rng, v, kMaxDomain);
        gen::FormulaGen fg{rng, v, kMaxQuantDepth};
        auto f = fg.closed(gen::uniform(rng, 1, 14));
        auto r = model_check(symbolic_from_finite(m, v), f, cfg);
        if (r.truth == Truth::Undetermined) ++undetermined;
        else if ((r.truth == Truth::True) == eval_finite(m, f)) ++agree;
    }
    double dt = since(t0);
    bool ok = agree == kRandomCases && dt <= kRandomCheckLimit;
    return {ok, std::to_string(agree) + "/" + std::to_string(kRandomCases) + " agree, " + std::to_string(undetermined) +
                    " undetermined, " + secs(dt) + " (limit " + secs(kRandomCheckLimit) + ")"};
}

Line soundness() {
    auto s = finder_stats();
    return {s.reverify_failures == 0, std::to_string(s.found) + " found outcomes, " +
                                                         std::to_string(s.reverify_failures) +
                                                         " failed re-verification"};
}

Line classification() {
    auto member = [](const char* f) { return check_membership(parse_problem(slurp(f))); };
    bool ok = true;
    std::string d;
    for (auto [f, want] : {std::pair{"echo.smt2", true}, {"sorted-list-max.smt2", true}, {"list-segment.smt2", false},
                           {"sorted-list.smt2", false}}) {
        bool got = member(f).member;
        ok &= got == want;
        d += std::string(f) + "=" + (got ? "member" : "non-member") + " ";
    }
    for (int c = 2; c <= 5; ++c) {
        auto name = "osc-violation-" + std::to_string(c) + ".smt2";
        auto r = member(name.c_str());
        std::set<int> cited;
        for (auto& v : r.violations) cited.insert(v.condition);
        bool one = !r.member && cited == std::set<int>{c};
        ok &= one;
        d += "violation-" + std::to_string(c) + "->{";
        for (int x : cited) d += std::to_string(x);
        d += "} ";
    }
    d.pop_back();
    return {ok, d};
}

long brute_weak_orderings(int n) {
    if (n == 0) return 1;
    long count = 0;
    std::vector<int> rank(n, 0);
    std::function<void(int)> go = [&](int i) {
        if (i == n) {
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
    return count;
}

Line bell_and_bounds() {
    bool ok = true;
    std::string d = "b(0..5) =";
    for (int n = 0; n <= 5; ++n) {
        long brute = brute_weak_orderings(n);
        ok &= ordered_bell(n) == brute;
        d += " " + ordered_bell(n).str();
    }
    auto b = compute_bounds(parse_problem(slurp("decidability.smt2")));
    long g = b.sort ? b.ground_terms.at(*b.sort) : -1;
    ok &= g == 2 && b.ell == 1 && b.m == 1 && b.summary_cap == 108 && b.k_lo == -1 && b.k_hi == 1;
    d += "; |G|=" + std::to_string(g) + " l=" + std::to_string(b.ell) + " m=" + std::to_string(b.m) +
         " cap=" + b.summary_cap.str() + " k=[" + std::to_string(b.k_lo) + "," + std::to_string(b.k_hi) + "]";
    return {ok, d};
}

Line decide_cases() {
    auto t0 = Clock::now();
    auto u = decide(parse_problem(slurp("osc-unsat.smt2")), DecideCaps{});
    double du = since(t0);
    auto pe = parse_problem(slurp("echo.smt2"));
    DecideCaps caps;
    caps.budget = std::chrono::milliseconds(long(kDecideSatLimit * 1000));
    t0 = Clock::now();
    auto e = decide(pe, caps);
    double de = since(t0);
    bool ok = u.kind == DecideResult::Kind::Unsat && du <= kDecideUnsatLimit && e.kind == DecideResult::Kind::Sat &&
              verified(*e.structure, pe) && de <= kDecideSatLimit;
    return {ok, std::string("c<c: ") + to_string(u.kind) + " " + secs(du) + " (limit " + secs(kDecideUnsatLimit) +
                    "); echo: " + to_string(e.kind) + " " + secs(de) + " (limit " + secs(kDecideSatLimit) + ")"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app("acceptance criteria");
    std::vector<int> only;
    app.add_option("--only", only, "run these criteria (7 always runs last)");
    CLI11_PARSE(app, argc, argv);

    std::vector<std::pair<int, std::function<Line()>>> all{
        {1, echo_find},       {2, echo_induction},      {3, fixtures},       {4, corpus_parity},
        {5, presburger},      {6, random_model_checking}, {8, classification}, {9, bell_and_bounds},
        {10, decide_cases},   {7, soundness},
    };
    int failed = 0;
    for (auto& [n, fn] : all) {
        if (!only.empty() && std::find(only.begin(), only.end(), n) == only.end() && n != 7) continue;
        Line l;
        try {
            l = fn();
        } catch (const std::exception& e) {
            l = {false, std::string("error: ") + e.what()};
        }
        failed += !l.pass;
        std::cout << "criterion " << n << ": " << (l.pass ? "PASS" : "FAIL") << "  " << l.detail << std::endl;
    }
    return failed ? 1 : 0;
}
