#include "needle/osc.hpp"

#include <algorithm>
#include <functional>

#include "json.hpp"
#include "needle/transforms.hpp"

namespace needle {

using json = nlohmann::json;

namespace {

struct Split {
    std::optional<std::string> sort, order;
    std::set<OrderAxiom> axioms;
    Formula psi;
};

Split split(const Problem& p) {
    Split s;
    const auto& v = p.vocab;
    s.order = v.order_relation;
    if (s.order) s.sort = v.relations.at(*s.order)[0];
    else if (!v.infinite_sorts.empty()) s.sort = *v.infinite_sorts.begin();
    std::vector<Formula> rest;
    for (auto& c : conjuncts(p.assertion)) {
        if (s.order)
            if (auto a = match_order_axiom(c, *s.order)) {
                s.axioms.insert(*a);
                continue;
            }
        rest.push_back(c);
    }
    s.psi = rest.empty() ? Formula::top() : rest.size() == 1 ? rest[0] : Formula::conj(rest);
    return s;
}

// NNF, miniscoped around Skolemization
struct Prepared {
    Formula nnf;  // miniscoped, before Skolemization
    SkolemResult sk;
};

Prepared prepare(const Formula& psi, const Vocabulary& v) {
    Prepared out;
    out.nnf = miniscope(to_nnf(eliminate_iff(psi)));
    out.sk = skolemize(out.nnf, v);
    out.sk.formula = miniscope(out.sk.formula);
    return out;
}

// vocabulary restricted to the symbols occurring in f
Vocabulary used_vocab(const Formula& f, const Vocabulary& v) {
    Vocabulary u;
    u.sorts = v.sorts;
    u.infinite_sorts = v.infinite_sorts;
    u.order_relation = v.order_relation;
    for (auto& s : symbols_used(f)) {
        if (auto it = v.constants.find(s); it != v.constants.end()) u.constants.insert(*it);
        if (auto it = v.functions.find(s); it != v.functions.end()) u.functions.insert(*it);
        if (auto it = v.relations.find(s); it != v.relations.end()) u.relations.insert(*it);
    }
    return u;
}

void quantified_names(const Formula& f, const std::string& sort, std::set<std::string>& out) {
    if (f.is_quantifier() && f.sort == sort) out.insert(f.name);
    for (auto& k : f.kids) quantified_names(k, sort, out);
}

// condition 2 under the scope reading
void scope_check(const Formula& f, const std::string& sort, const Vocabulary& v, std::vector<OscViolation>& out) {
    if (f.is_quantifier() && f.sort == sort) {
        std::vector<std::string> others;
        for (auto& [x, s] : free_vars(f.kids[0]))
            if (s == sort && x != f.name) others.push_back(x);
        if (!others.empty()) {
            std::string names;
            for (auto& o : others) names += (names.empty() ? "" : ", ") + o;
            out.push_back({2, f.loc,
                           "variable " + f.name + " of sort " + sort + " is bound while " + names +
                               " of the same sort is in scope"});
            return;
        }
    }
    for (auto& k : f.kids) scope_check(k, sort, v, out);
}

bool term_mentions(const Term& t, const std::string& sym) {
    if (t.kind != Term::Kind::Var && t.name == sym) return true;
    for (auto& a : t.args)
        if (term_mentions(a, sym)) return true;
    return false;
}

SourceLoc find_loc(const Formula& f, const std::string& sym) {
    if (f.kind == Formula::Kind::Rel && f.name == sym) return f.loc;
    for (auto& t : f.terms)
        if (term_mentions(t, sym)) return f.loc;
    for (auto& k : f.kids) {
        auto l = find_loc(k, sym);
        if (l.line) return l;
    }
    return f.loc;
}

void nesting_check(const Term& t, const std::string& sort, SourceLoc loc, std::vector<OscViolation>& out) {
    if (t.kind != Term::Kind::App) return;
    for (auto& a : t.args) {
        if (a.sort == sort && !a.is_ground() && a.kind != Term::Kind::Var) {
            out.push_back({5, loc, "non-ground term " + to_smtlib(a) + " of sort " + sort +
                                       " is an argument of " + t.name});
            return;
        }
        nesting_check(a, sort, loc, out);
    }
}

void nesting_check(const Formula& f, const std::string& sort, std::vector<OscViolation>& out) {
    for (auto& t : f.terms) nesting_check(t, sort, f.loc, out);
    for (auto& k : f.kids) nesting_check(k, sort, out);
}

long product_of_counts(const std::vector<std::string>& args, const std::string& sinf,
                       const std::map<std::string, long>& counts) {
    long p = 1;
    for (auto& a : args)
        if (a != sinf) p *= counts.count(a) ? counts.at(a) : 0;
    return p;
}

}  // namespace

OscReport check_membership(const Problem& p) {
    OscReport r;
    Split s = split(p);
    r.sort = s.sort;
    r.order_relation = s.order;
    const auto& v = p.vocab;

    // (1)
    if (s.order) {
        r.order_axioms_present = s.axioms.size() == 3;
        static const std::pair<OrderAxiom, const char*> names[] = {
            {OrderAxiom::AntiReflexive, "anti-reflexivity"},
            {OrderAxiom::Transitive, "transitivity"},
            {OrderAxiom::Linear, "linearity"}};
        for (auto& [a, n] : names)
            if (!s.axioms.count(a))
                r.violations.push_back({1, p.assertion.loc, std::string("order axiom missing for ") + *s.order + ": " + n});
    }

    Prepared prep = prepare(s.psi, v);
    Vocabulary used = used_vocab(s.psi, v);

    if (s.sort) {
        std::set<std::string> names;
        quantified_names(s.psi, *s.sort, names);
        r.literal_single_variable = names.size() <= 1;
        // (2)
        scope_check(prep.sk.formula, *s.sort, prep.sk.vocab, r.violations);
    } else {
        r.literal_single_variable = true;
    }

    // (3)
    QaGraph g = qa_graph(prep.nnf, used);
    auto describe = [](const QaEdge& e) {
        return e.origin == QaEdge::Origin::Function ? "function " + e.detail : e.detail;
    };
    std::set<std::string> reported;
    for (auto& e : g.cycle_edges()) {
        if (s.sort && e.from == *s.sort && e.to == *s.sort) continue;
        std::string key = e.from + ">" + e.to + ">" + e.detail;
        if (!reported.insert(key).second) continue;
        SourceLoc loc = e.origin == QaEdge::Origin::Function ? find_loc(s.psi, e.detail) : e.loc;
        r.violations.push_back({3, loc, "quantifier-alternation cycle through edge " + e.from + " -> " + e.to + " (" +
                                            describe(e) + ")"});
    }
    if (s.sort)
        for (auto& e : g.edges) {
            if (e.from != *s.sort || e.to == *s.sort) continue;
            std::string key = e.from + ">" + e.to + ">" + e.detail;
            if (!reported.insert(key).second) continue;
            SourceLoc loc = e.origin == QaEdge::Origin::Function ? find_loc(s.psi, e.detail) : e.loc;
            r.violations.push_back({3, loc, "edge " + e.from + " -> " + e.to + " (" + describe(e) + ") leaves " + *s.sort});
        }

    if (s.sort) {
        // (4)
        auto arity_check = [&](const std::string& sym, const std::vector<std::string>& args) {
            if (s.order && sym == *s.order) return;
            long n = std::count(args.begin(), args.end(), *s.sort);
            if (n > 1)
                r.violations.push_back({4, find_loc(s.psi, sym),
                                        sym + " takes " + std::to_string(n) + " arguments of sort " + *s.sort});
        };
        for (auto& [f, sig] : used.functions) arity_check(f, sig.args);
        for (auto& [rel, args] : used.relations) arity_check(rel, args);
        // (5)
        nesting_check(s.psi, *s.sort, r.violations);
    }
    std::stable_sort(r.violations.begin(), r.violations.end(),
                     [](const OscViolation& a, const OscViolation& b) { return a.condition < b.condition; });
    auto same = [](const OscViolation& a, const OscViolation& b) {
        return a.condition == b.condition && a.explanation == b.explanation && a.loc.line == b.loc.line &&
               a.loc.column == b.loc.column;
    };
    r.violations.erase(std::unique(r.violations.begin(), r.violations.end(), same), r.violations.end());
    r.member = r.violations.empty();
    return r;
}

std::string to_json(const OscReport& r) {
    json j;
    j["member"] = r.member;
    j["sort"] = r.sort ? json(*r.sort) : json(nullptr);
    j["order_relation"] = r.order_relation ? json(*r.order_relation) : json(nullptr);
    j["order_axioms_present"] = r.order_axioms_present;
    j["literal_single_variable"] = r.literal_single_variable;
    j["violations"] = json::array();
    for (auto& v : r.violations)
        j["violations"].push_back(
            {{"condition", v.condition}, {"line", v.loc.line}, {"column", v.loc.column}, {"explanation", v.explanation}});
    return j.dump(2) + "\n";
}

BigInt ordered_bell(unsigned n) {
    std::vector<BigInt> b(n + 1);
    b[0] = 1;
    for (unsigned i = 1; i <= n; ++i) {
        BigInt sum = 0, binom = 1;  // C(i, k)
        for (unsigned k = 1; k <= i; ++k) {
            binom = binom * (i - k + 1) / k;
            sum += binom * b[i - k];
        }
        b[i] = sum;
    }
    return b[n];
}

OscBounds compute_bounds(const Problem& p) {
    auto rep = check_membership(p);
    if (!rep.member) throw NotInFragment("formula is outside the fragment (condition " +
                                         std::to_string(rep.violations.front().condition) + ")");
    Split s = split(p);
    Prepared prep = prepare(s.psi, p.vocab);
    const Formula& f = prep.sk.formula;
    Vocabulary used = used_vocab(f, prep.sk.vocab);
    OscBounds b;
    b.sort = s.sort;
    std::string sinf = s.sort.value_or("");
    for (auto& so : used.sorts) {
        if (so == sinf) continue;
        b.ground_terms[so] = static_cast<long>(herbrand_terms(used, so, sinf).size());
    }
    if (s.sort) {
        std::set<Term> g = syntactic_ground_terms(f, sinf);
        std::map<std::string, std::set<Term>> other;
        for (auto& so : used.sorts)
            if (so != sinf) other[so] = herbrand_terms(used, so, sinf);
        // step-2 closure: functions into the infinite sort over ground terms of the other sorts
        for (auto& [fn, sig] : used.functions) {
            if (sig.range != sinf || std::count(sig.args.begin(), sig.args.end(), sinf)) continue;
            std::vector<std::vector<Term>> pools;
            for (auto& a : sig.args) pools.emplace_back(other[a].begin(), other[a].end());
            std::function<void(size_t, std::vector<Term>&)> rec = [&](size_t i, std::vector<Term>& acc) {
                if (i == pools.size()) {
                    g.insert(Term::app(fn, sinf, acc));
                    return;
                }
                for (auto& t : pools[i]) {
                    acc.push_back(t);
                    rec(i + 1, acc);
                    acc.pop_back();
                }
            };
            std::vector<Term> acc;
            rec(0, acc);
        }
        b.ground_terms[sinf] = static_cast<long>(g.size());
        for (auto& [fn, sig] : used.functions)
            if (sig.range == sinf && std::count(sig.args.begin(), sig.args.end(), sinf) == 1)
                b.ell += product_of_counts(sig.args, sinf, b.ground_terms);
        for (auto& [rel, args] : used.relations) {
            if (s.order && rel == *s.order) continue;
            if (std::count(args.begin(), args.end(), sinf) == 1) b.m += product_of_counts(args, sinf, b.ground_terms);
        }
        b.bell = ordered_bell(static_cast<unsigned>(b.ell + 1));
        BigInt two_pow = BigInt(1) << static_cast<unsigned>(b.m * (b.ell + 1));
        BigInt g1 = boost::multiprecision::pow(BigInt(b.ground_terms[sinf] + 1), static_cast<unsigned>(b.ell + 1));
        b.summary_cap = b.bell * two_pow * g1;
        b.k_lo = -b.ell;
        b.k_hi = b.ell;
    }
    for (auto& so : p.vocab.sorts) b.regular_cap[so] = b.ground_terms.count(so) ? b.ground_terms[so] : 0;
    return b;
}

std::string to_json(const OscBounds& b) {
    json j;
    j["sort"] = b.sort ? json(*b.sort) : json(nullptr);
    j["ground_terms"] = b.ground_terms;
    j["ell"] = b.ell;
    j["m"] = b.m;
    j["regular_cap"] = b.regular_cap;
    auto big = [](const BigInt& x) -> json {
        if (x <= BigInt(std::numeric_limits<long long>::max())) return static_cast<long long>(x);
        return x.str();
    };
    j["ordered_bell"] = big(b.bell);
    j["summary_cap"] = big(b.summary_cap);
    j["k_range"] = {b.k_lo, b.k_hi};
    return j.dump(2) + "\n";
}

// ---- restricted family

namespace {

int sort_cap(const OscBounds& b, const std::string& so) {
    long c = b.regular_cap.count(so) ? b.regular_cap.at(so) : 0;
    return static_cast<int>(std::max<long>(1, std::min<long>(c, 1 << 20)));
}

}  // namespace

Template osc_template(const Problem& p, const OscBounds& b, const SizeVector& sizes) {
    const auto& v = p.vocab;
    std::string sinf = b.sort.value_or("");
    Template t;
    t.sorts = v.sorts;
    t.nodes = template_nodes(sizes);
    t.bound_candidates = {LiaFormula::top()};
    for (auto& [f, sig] : v.functions) {
        std::vector<LiaTerm> cs{LiaTerm::lit(0)};
        if (sig.range == sinf)
            for (size_t i = 0; i < sig.args.size(); ++i) {
                if (sig.args[i] != sinf) continue;
                for (long k = b.k_lo; k <= b.k_hi; ++k) {
                    LiaTerm x = LiaTerm::var(arg_var(i + 1));
                    cs.push_back(k == 0 ? x : k > 0 ? LiaTerm::add(x, LiaTerm::lit(k)) : LiaTerm::sub(x, LiaTerm::lit(-k)));
                }
            }
        t.function_candidates[f] = cs;
    }
    for (auto& [r, args] : v.relations) {
        std::vector<LiaFormula> cs{LiaFormula::top(), LiaFormula::bot()};
        if (v.order_relation && r == *v.order_relation) {
            auto x1 = LiaTerm::var(arg_var(1)), x2 = LiaTerm::var(arg_var(2));
            cs.push_back(lia_lt(x1, x2));
            cs.push_back(lia_le(x1, x2));
        }
        t.relation_candidates[r] = cs;
    }
    t.summary_args_only = true;
    return t;
}

std::vector<SizeVector> osc_size_vectors(const Problem& p, const OscBounds& b, int max_total_nodes, size_t limit) {
    const auto& sorts = p.vocab.sorts;
    std::string sinf = b.sort.value_or("");
    struct Keyed {
        int total, spread;
        std::vector<int> lex;
        SizeVector sizes;
    };
    std::vector<std::vector<SortSize>> opts(sorts.size());
    for (size_t i = 0; i < sorts.size(); ++i) {
        int rc = sort_cap(b, sorts[i]);
        if (sorts[i] == sinf) {
            int reg = static_cast<int>(std::min<long>(b.regular_cap.at(sinf), max_total_nodes));
            BigInt sc = std::min(b.summary_cap, BigInt(max_total_nodes));
            int sum = static_cast<int>(sc);
            for (int r = 0; r <= reg; ++r)
                for (int u = 0; u <= sum; ++u)
                    if (r + u >= 1 && r + u <= max_total_nodes) opts[i].push_back({r, u});
        } else {
            for (int r = 1; r <= std::min(rc, max_total_nodes); ++r) opts[i].push_back({r, 0});
        }
    }
    std::vector<Keyed> all;
    std::vector<SortSize> cur(sorts.size());
    std::function<void(size_t, int)> rec = [&](size_t i, int used) {
        if (all.size() >= limit * 4 + 1024) return;
        if (i == sorts.size()) {
            Keyed k{used, 0, {}, {}};
            int mx = 0, mn = 1 << 30;
            for (size_t j = 0; j < sorts.size(); ++j) {
                int t = cur[j].regular + cur[j].summary;
                mx = std::max(mx, t);
                mn = std::min(mn, t);
                k.lex.push_back(cur[j].regular);
                k.lex.push_back(cur[j].summary);
                k.sizes.emplace_back(sorts[j], cur[j]);
            }
            k.spread = sorts.empty() ? 0 : mx - mn;
            all.push_back(std::move(k));
            return;
        }
        for (auto& o : opts[i]) {
            if (used + o.regular + o.summary > max_total_nodes) continue;
            cur[i] = o;
            rec(i + 1, used + o.regular + o.summary);
        }
    };
    rec(0, 0);
    std::sort(all.begin(), all.end(), [](const Keyed& a, const Keyed& b) {
        return std::tie(a.total, a.spread, a.lex) < std::tie(b.total, b.spread, b.lex);
    });
    std::vector<SizeVector> out;
    for (auto& k : all) {
        if (out.size() >= limit) break;
        out.push_back(std::move(k.sizes));
    }
    return out;
}

bool osc_caps_cover(const Problem& p, const OscBounds& b, int max_total_nodes) {
    BigInt total = 0;
    for (auto& so : p.vocab.sorts) {
        if (b.sort && so == *b.sort) total += BigInt(b.regular_cap.at(so)) + b.summary_cap;
        else total += sort_cap(b, so);
    }
    return total <= max_total_nodes;
}

bool uses_osc_shapes(const SymbolicStructure& s, const Problem& p, const OscBounds& b) {
    Template t = osc_template(p, b, {});
    std::string sinf = b.sort.value_or("");
    for (auto& n : s.nodes) {
        if (n.kind == NodeKind::Regular) continue;
        if (n.sort != sinf || !(s.bound(n.id) == LiaFormula::top())) return false;
    }
    for (auto& [f, tab] : s.functions)
        for (auto& [args, img] : tab) {
            auto& cs = t.function_candidates.at(f);
            if (std::find(cs.begin(), cs.end(), img.term) == cs.end()) return false;
        }
    auto x1 = LiaTerm::var(arg_var(1)), x2 = LiaTerm::var(arg_var(2));
    for (auto& [r, tab] : s.relations)
        for (auto& [args, phi] : tab) {
            auto cs = t.relation_candidates.at(r);
            if (p.vocab.order_relation && r == *p.vocab.order_relation) {
                // the derived orientation of a node pair
                cs.push_back(lia_gt(x1, x2));
                cs.push_back(lia_ge(x1, x2));
            }
            if (std::find(cs.begin(), cs.end(), phi) == cs.end()) return false;
        }
    return true;
}

const char* to_string(DecideResult::Kind k) {
    switch (k) {
    case DecideResult::Kind::Sat: return "sat";
    case DecideResult::Kind::Unsat: return "unsat";
    case DecideResult::Kind::ResourceExhausted: return "resource-exhausted";
    }
    return "?";
}

DecideResult decide(const Problem& p, const DecideCaps& caps, const FinderOptions& opt) {
    DecideResult res;
    res.bounds = compute_bounds(p);
    auto vectors = osc_size_vectors(p, res.bounds, caps.max_total_nodes);
    res.templates_total = static_cast<long>(vectors.size());
    auto t0 = std::chrono::steady_clock::now();
    bool undetermined = false;
    for (auto& sz : vectors) {
        if (caps.max_solver_calls > 0 && res.templates_tried >= caps.max_solver_calls) {
            res.reason = "solver call cap reached";
            return res;
        }
        auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);
        if (caps.budget.count() > 0 && elapsed >= caps.budget) {
            res.reason = "time budget exhausted";
            return res;
        }
        FinderOptions o = opt;
        if (caps.budget.count() > 0) o.solver.timeout = std::max(std::chrono::milliseconds(1), std::min(o.solver.timeout, caps.budget - elapsed));
        ++res.templates_tried;
        auto out = find(p.assertion, p.vocab, osc_template(p, res.bounds, sz), o);
        SearchLogEntry e{sz, "", out.reason, out.elapsed};
        if (out.kind == FinderOutcome::Kind::Found) {
            if (!uses_osc_shapes(*out.structure, p, res.bounds))
                throw InternalConsistencyError("decided structure leaves the restricted family");
            e.outcome = "found";
            res.log.push_back(e);
            res.kind = DecideResult::Kind::Sat;
            res.structure = std::move(out.structure);
            res.sizes = sz;
            return res;
        }
        e.outcome = out.kind == FinderOutcome::Kind::NoneInFamily ? "none" : "undetermined";
        if (out.kind == FinderOutcome::Kind::Undetermined) undetermined = true;
        res.log.push_back(std::move(e));
    }
    if (undetermined) {
        res.reason = "some templates were undetermined";
    } else if (!osc_caps_cover(p, res.bounds, caps.max_total_nodes)) {
        res.reason = "node cap " + std::to_string(caps.max_total_nodes) + " is below the computed bound";
    } else {
        res.kind = DecideResult::Kind::Unsat;
    }
    return res;
}

}  // namespace needle
