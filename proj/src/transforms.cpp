#include "needle/transforms.hpp"

#include <algorithm>
#include <functional>

namespace needle {

using K = Formula::Kind;

Formula eliminate_iff(const Formula& f) {
    Formula r = f;
    for (auto& k : r.kids) k = eliminate_iff(k);
    if (f.kind == K::Iff) {
        Formula a = Formula::implies(r.kids[0], r.kids[1]);
        Formula b = Formula::implies(r.kids[1], r.kids[0]);
        a.loc = b.loc = f.loc;
        Formula c = Formula::conj({a, b});
        c.loc = f.loc;
        return c;
    }
    return r;
}

namespace {

Formula with_loc(Formula f, SourceLoc l) {
    f.loc = l;
    return f;
}

Formula junction(K kind, std::vector<Formula> kids, SourceLoc loc) {
    std::vector<Formula> flat;
    for (auto& k : kids) {
        if (k.kind == kind) {
            for (auto& g : k.kids) flat.push_back(std::move(g));
        } else {
            flat.push_back(std::move(k));
        }
    }
    Formula r = kind == K::And ? Formula::conj(std::move(flat)) : Formula::disj(std::move(flat));
    r.loc = loc;
    return r;
}

Formula nnf(const Formula& f, bool neg) {
    switch (f.kind) {
    case K::True: return with_loc(neg ? Formula::bot() : Formula::top(), f.loc);
    case K::False: return with_loc(neg ? Formula::top() : Formula::bot(), f.loc);
    case K::Rel:
    case K::Eq: return neg ? with_loc(Formula::negate(f), f.loc) : f;
    case K::Not: return nnf(f.kids[0], !neg);
    case K::And:
    case K::Or: {
        std::vector<Formula> ks;
        for (auto& k : f.kids) ks.push_back(nnf(k, neg));
        K kind = (f.kind == K::And) != neg ? K::And : K::Or;
        return junction(kind, std::move(ks), f.loc);
    }
    case K::Implies:
        if (!neg) return junction(K::Or, {nnf(f.kids[0], true), nnf(f.kids[1], false)}, f.loc);
        return junction(K::And, {nnf(f.kids[0], false), nnf(f.kids[1], true)}, f.loc);
    case K::Iff: {
        const auto &a = f.kids[0], &b = f.kids[1];
        if (!neg)
            return junction(K::And,
                            {junction(K::Or, {nnf(a, true), nnf(b, false)}, f.loc),
                             junction(K::Or, {nnf(b, true), nnf(a, false)}, f.loc)},
                            f.loc);
        return junction(K::Or,
                        {junction(K::And, {nnf(a, false), nnf(b, true)}, f.loc),
                         junction(K::And, {nnf(b, false), nnf(a, true)}, f.loc)},
                        f.loc);
    }
    case K::Forall:
    case K::Exists: {
        Formula body = nnf(f.kids[0], neg);
        bool forall = (f.kind == K::Forall) != neg;
        return with_loc(forall ? Formula::forall(f.name, f.sort, body) : Formula::exists(f.name, f.sort, body), f.loc);
    }
    }
    return f;
}

}  // namespace

Formula to_nnf(const Formula& f) { return nnf(f, false); }

bool is_nnf(const Formula& f) {
    switch (f.kind) {
    case K::True:
    case K::False:
    case K::Rel:
    case K::Eq: return true;
    case K::Not: return f.kids[0].kind == K::Rel || f.kids[0].kind == K::Eq;
    case K::Implies:
    case K::Iff: return false;
    default:
        for (auto& k : f.kids)
            if (!is_nnf(k)) return false;
        return true;
    }
}

// ---- miniscoping

namespace {

bool mentions(const Formula& f, const std::string& v) { return free_vars(f).count(v) > 0; }

Formula push_quant(K q, const std::string& v, const std::string& sort, Formula body, SourceLoc loc) {
    if (!mentions(body, v)) return body;
    K distributes = q == K::Forall ? K::And : K::Or;
    K splits = q == K::Forall ? K::Or : K::And;
    auto wrap = [&](Formula b) {
        Formula r = q == K::Forall ? Formula::forall(v, sort, std::move(b)) : Formula::exists(v, sort, std::move(b));
        r.loc = loc;
        return r;
    };
    if (body.kind == distributes) {
        std::vector<Formula> ks;
        for (auto& k : body.kids) ks.push_back(push_quant(q, v, sort, k, loc));
        return junction(distributes, std::move(ks), body.loc);
    }
    if (body.kind == splits) {
        std::vector<Formula> with, without;
        for (auto& k : body.kids) (mentions(k, v) ? with : without).push_back(k);
        if (without.empty()) return wrap(std::move(body));
        Formula inner = with.size() == 1 ? with[0] : junction(splits, with, body.loc);
        without.push_back(push_quant(q, v, sort, std::move(inner), loc));
        return junction(splits, std::move(without), body.loc);
    }
    if (body.kind == q) {
        Formula r = body;
        r.kids[0] = push_quant(q, v, sort, body.kids[0], loc);
        return r;
    }
    return wrap(std::move(body));
}

}  // namespace

Formula miniscope(const Formula& f) {
    switch (f.kind) {
    case K::And:
    case K::Or: {
        std::vector<Formula> ks;
        for (auto& k : f.kids) ks.push_back(miniscope(k));
        return junction(f.kind, std::move(ks), f.loc);
    }
    case K::Forall:
    case K::Exists: return push_quant(f.kind, f.name, f.sort, miniscope(f.kids[0]), f.loc);
    default: return f;
    }
}

// ---- skolemization

namespace {

struct Skolemizer {
    Vocabulary vocab;
    std::vector<std::string> created;
    int counter = 0;

    std::string fresh() {
        for (;;) {
            std::string n = "sk!" + std::to_string(counter++);
            if (vocab.kind_of(n) == Vocabulary::SymbolKind::None) return n;
        }
    }

    Formula run(const Formula& f, std::vector<std::pair<std::string, std::string>>& scope,
                std::map<std::string, Term>& subst) {
        switch (f.kind) {
        case K::True:
        case K::False: return f;
        case K::Rel:
        case K::Eq: {
            Formula r = f;
            for (auto& t : r.terms) t = substitute(t, subst);
            return r;
        }
        case K::Not: {
            Formula r = f;
            r.kids[0] = run(f.kids[0], scope, subst);
            return r;
        }
        case K::And:
        case K::Or: {
            Formula r = f;
            for (auto& k : r.kids) k = run(k, scope, subst);
            return r;
        }
        case K::Forall: {
            scope.emplace_back(f.name, f.sort);
            auto saved = subst;
            subst.erase(f.name);
            Formula r = f;
            r.kids[0] = run(f.kids[0], scope, subst);
            subst = saved;
            scope.pop_back();
            return r;
        }
        case K::Exists: {
            auto body_free = free_vars(substitute(f.kids[0], subst));
            std::vector<Term> deps;
            std::vector<std::string> dep_sorts;
            for (auto& [v, s] : scope) {
                if (v == f.name || !body_free.count(v)) continue;
                deps.push_back(Term::var(v, s));
                dep_sorts.push_back(s);
            }
            std::string sym = fresh();
            created.push_back(sym);
            Term t;
            if (deps.empty()) {
                vocab.constants[sym] = f.sort;
                t = Term::constant(sym, f.sort);
            } else {
                vocab.functions[sym] = FunctionSig{dep_sorts, f.sort};
                t = Term::app(sym, f.sort, deps);
            }
            auto saved = subst;
            subst[f.name] = t;
            Formula r = run(f.kids[0], scope, subst);
            subst = saved;
            return r;
        }
        default: throw Error("skolemize expects a formula in negation normal form");
        }
    }
};

}  // namespace

SkolemResult skolemize(const Formula& nnf_in, const Vocabulary& v) {
    if (!is_nnf(nnf_in)) throw Error("skolemize expects a formula in negation normal form");
    Skolemizer sk{v, {}, 0};
    std::vector<std::pair<std::string, std::string>> scope;
    std::map<std::string, Term> subst;
    Formula out = sk.run(nnf_in, scope, subst);
    return {out, sk.vocab, sk.created};
}

// ---- quantifier alternation graph

bool QaGraph::has_edge(const std::string& a, const std::string& b) const {
    for (auto& e : edges)
        if (e.from == a && e.to == b) return true;
    return false;
}

bool QaGraph::has_self_loop(const std::string& s) const { return has_edge(s, s); }

namespace {

bool reaches(const QaGraph& g, const std::string& from, const std::string& to) {
    std::set<std::string> seen;
    std::vector<std::string> work{from};
    while (!work.empty()) {
        auto s = work.back();
        work.pop_back();
        for (auto& e : g.edges) {
            if (e.from != s) continue;
            if (e.to == to) return true;
            if (seen.insert(e.to).second) work.push_back(e.to);
        }
    }
    return false;
}

}  // namespace

std::set<std::string> QaGraph::cyclic_sorts() const {
    std::set<std::string> out;
    for (auto& s : sorts)
        if (reaches(*this, s, s)) out.insert(s);
    return out;
}

std::vector<QaEdge> QaGraph::cycle_edges() const {
    std::vector<QaEdge> out;
    for (auto& e : edges)
        if (e.from == e.to || reaches(*this, e.to, e.from)) out.push_back(e);
    return out;
}

namespace {

void quant_edges(const Formula& f, std::vector<std::pair<std::string, std::string>>& universals, QaGraph& g) {
    if (f.kind == K::Forall) {
        universals.emplace_back(f.name, f.sort);
        quant_edges(f.kids[0], universals, g);
        universals.pop_back();
        return;
    }
    if (f.kind == K::Exists) {
        for (auto& [v, s] : universals) {
            QaEdge e{s, f.sort, QaEdge::Origin::Quantifier, "forall " + v + " ... exists " + f.name, f.loc};
            g.edges.push_back(e);
        }
    }
    for (auto& k : f.kids) quant_edges(k, universals, g);
}

}  // namespace

QaGraph qa_graph(const Formula& f, const Vocabulary& v) {
    QaGraph g;
    g.sorts = v.sorts;
    for (auto& [name, sig] : v.functions)
        for (auto& a : sig.args) g.edges.push_back({a, sig.range, QaEdge::Origin::Function, name, {}});
    std::vector<std::pair<std::string, std::string>> universals;
    quant_edges(is_nnf(f) ? f : to_nnf(f), universals, g);
    return g;
}

// ---- ground terms

namespace {

void ground_in_term(const Term& t, const std::string& sort, std::set<Term>& out) {
    if (t.is_ground() && t.sort == sort) out.insert(t);
    for (auto& a : t.args) ground_in_term(a, sort, out);
}

}  // namespace

std::set<Term> syntactic_ground_terms(const Formula& f, const std::string& sort) {
    std::set<Term> out;
    for (auto& t : f.terms) ground_in_term(t, sort, out);
    for (auto& k : f.kids) {
        auto r = syntactic_ground_terms(k, sort);
        out.insert(r.begin(), r.end());
    }
    return out;
}

std::set<Term> herbrand_terms(const Vocabulary& v, const std::string& sort, const std::string& exclude, size_t cap) {
    std::map<std::string, std::set<Term>> terms;
    for (auto& [c, s] : v.constants)
        if (s != exclude) terms[s].insert(Term::constant(c, s));
    for (bool grew = true; grew;) {
        grew = false;
        for (auto& [f, sig] : v.functions) {
            if (sig.range == exclude) continue;
            if (std::find(sig.args.begin(), sig.args.end(), exclude) != sig.args.end()) continue;
            // cartesian product over current terms
            std::vector<std::vector<Term>> pools;
            bool empty = false;
            for (auto& a : sig.args) {
                pools.emplace_back(terms[a].begin(), terms[a].end());
                if (pools.back().empty()) empty = true;
            }
            if (empty) continue;
            std::vector<size_t> idx(pools.size(), 0);
            for (;;) {
                std::vector<Term> args;
                for (size_t i = 0; i < pools.size(); ++i) args.push_back(pools[i][idx[i]]);
                if (terms[sig.range].insert(Term::app(f, sig.range, args)).second) grew = true;
                size_t total = 0;
                for (auto& [s, ts] : terms) total += ts.size();
                if (total > cap) throw Error("Herbrand universe exceeds " + std::to_string(cap) + " terms");
                size_t i = 0;
                while (i < idx.size() && ++idx[i] == pools[i].size()) idx[i++] = 0;
                if (i == idx.size()) break;
            }
        }
    }
    return terms[sort];
}

// ---- order axioms

std::vector<Formula> order_axioms(const std::string& rel, const std::string& sort, const std::string& stem) {
    auto v = [&](int i) { return Term::var(stem + "!" + std::to_string(i), sort); };
    auto vn = [&](int i) { return stem + "!" + std::to_string(i); };
    auto R = [&](int a, int b) { return Formula::rel(rel, {v(a), v(b)}); };
    std::vector<Formula> out;
    out.push_back(Formula::forall(vn(1), sort, Formula::negate(R(1, 1))));
    out.push_back(Formula::forall({{vn(1), sort}, {vn(2), sort}, {vn(3), sort}},
                                  Formula::implies(Formula::conj({R(1, 2), R(2, 3)}), R(1, 3))));
    out.push_back(Formula::forall({{vn(1), sort}, {vn(2), sort}},
                                  Formula::disj({R(1, 2), R(2, 1), Formula::eq(v(1), v(2))})));
    return out;
}

namespace {

// literal as canonical string under a variable renaming
std::string literal_key(const Formula& lit, const std::map<std::string, std::string>& ren) {
    bool neg = lit.kind == K::Not;
    const Formula& a = neg ? lit.kids[0] : lit;
    auto name = [&](const Term& t) -> std::string {
        if (t.kind != Term::Kind::Var) return "?";
        auto it = ren.find(t.name);
        return it == ren.end() ? "?" : it->second;
    };
    std::string s = neg ? "-" : "+";
    if (a.kind == K::Eq) {
        auto x = name(a.terms[0]), y = name(a.terms[1]);
        if (y < x) std::swap(x, y);
        return s + "=" + x + y;
    }
    if (a.kind == K::Rel && a.terms.size() == 2) return s + "R" + name(a.terms[0]) + name(a.terms[1]);
    return s + "?";
}

}  // namespace

std::optional<OrderAxiom> match_order_axiom(const Formula& f, const std::string& rel) {
    std::vector<std::string> vars;
    std::string sort;
    const Formula* cur = &f;
    while (cur->kind == K::Forall) {
        if (!sort.empty() && cur->sort != sort) return std::nullopt;
        sort = cur->sort;
        vars.push_back(cur->name);
        cur = &cur->kids[0];
    }
    if (vars.empty() || vars.size() > 3) return std::nullopt;
    Formula body = to_nnf(*cur);
    std::vector<Formula> lits = body.kind == K::Or ? body.kids : std::vector<Formula>{body};
    for (auto& l : lits) {
        const Formula& a = l.kind == K::Not ? l.kids[0] : l;
        if (a.kind == K::Rel && a.name != rel) return std::nullopt;
        if (a.kind != K::Rel && a.kind != K::Eq) return std::nullopt;
    }
    const std::vector<std::pair<OrderAxiom, std::multiset<std::string>>> shapes = {
        {OrderAxiom::AntiReflexive, {"-Raa"}},
        {OrderAxiom::Transitive, {"-Rab", "-Rbc", "+Rac"}},
        {OrderAxiom::Linear, {"+Rab", "+Rba", "+=ab"}},
    };
    std::vector<int> perm(vars.size());
    for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    do {
        std::map<std::string, std::string> ren;
        for (size_t i = 0; i < vars.size(); ++i) ren[vars[i]] = std::string(1, static_cast<char>('a' + perm[i]));
        std::multiset<std::string> keys;
        for (auto& l : lits) keys.insert(literal_key(l, ren));
        for (auto& [ax, shape] : shapes)
            if (keys == shape) return ax;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::nullopt;
}

std::vector<Formula> conjuncts(const Formula& f) {
    if (f.kind != K::And) return {f};
    std::vector<Formula> out;
    for (auto& k : f.kids) {
        auto r = conjuncts(k);
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

std::set<std::string> default_infinite_sorts(const Formula& f, const Vocabulary& v) {
    return qa_graph(to_nnf(f), v).cyclic_sorts();
}

}  // namespace needle
