#include "needle/modelcheck.hpp"

#include "needle/transforms.hpp"

namespace needle {

std::string lia_var(const std::string& v) { return v + "!lia"; }

Symbolized symbolize(const ExplicitAssignment& a) {
    Symbolized out;
    for (auto& [v, e] : a) {
        out.symbolic[v] = {e.node, LiaTerm::var(lia_var(v))};
        out.residual[lia_var(v)] = e.index;
    }
    return out;
}

TermImage sym_eval(const SymbolicStructure& s, const SymbolicAssignment& v, const Term& t) {
    switch (t.kind) {
    case Term::Kind::Var: {
        auto it = v.find(t.name);
        if (it == v.end()) throw Error("variable " + t.name + " is not assigned");
        return it->second;
    }
    case Term::Kind::Const: {
        auto it = s.constants.find(t.name);
        if (it == s.constants.end()) throw Error("constant " + t.name + " is not interpreted");
        return {it->second.node, LiaTerm::lit(it->second.index)};
    }
    case Term::Kind::App: {
        NodeTuple nodes;
        TermSubst sub;
        for (size_t i = 0; i < t.args.size(); ++i) {
            auto img = sym_eval(s, v, t.args[i]);
            nodes.push_back(img.node);
            sub[arg_var(i + 1)] = img.term;
        }
        const auto& e = s.function(t.name, nodes);
        return {e.node, substitute(e.term, sub)};
    }
    }
    return {};
}

LiaFormula trans(const SymbolicStructure& s, const SymbolicAssignment& v, const Formula& f, const TransOptions& opt) {
    using K = Formula::Kind;
    switch (f.kind) {
    case K::True: return LiaFormula::top();
    case K::False: return LiaFormula::bot();
    case K::Rel: {
        NodeTuple nodes;
        TermSubst sub;
        for (size_t i = 0; i < f.terms.size(); ++i) {
            auto img = sym_eval(s, v, f.terms[i]);
            nodes.push_back(img.node);
            sub[arg_var(i + 1)] = img.term;
        }
        return substitute(s.relation(f.name, nodes), sub);
    }
    case K::Eq: {
        auto a = sym_eval(s, v, f.terms[0]), b = sym_eval(s, v, f.terms[1]);
        if (a.node != b.node) return LiaFormula::bot();
        return lia_eq(a.term, b.term);
    }
    case K::Not: return LiaFormula::negate(trans(s, v, f.kids[0], opt));
    case K::And:
    case K::Or: {
        std::vector<LiaFormula> ks;
        for (auto& k : f.kids) ks.push_back(trans(s, v, k, opt));
        return f.kind == K::And ? LiaFormula::conj(std::move(ks)) : LiaFormula::disj(std::move(ks));
    }
    case K::Implies: return LiaFormula::implies(trans(s, v, f.kids[0], opt), trans(s, v, f.kids[1], opt));
    case K::Iff: throw Error("trans: biconditionals must be eliminated first");
    case K::Forall:
    case K::Exists: {
        bool all = f.kind == K::Forall;
        std::string xl = lia_var(f.name);
        std::vector<LiaFormula> outer, inner;
        for (auto& n : s.nodes_of(f.sort)) {
            auto w = v;
            bool simple = opt.regular_simplification && s.node(n).kind == NodeKind::Regular;
            w[f.name] = {n, simple ? LiaTerm::lit(0) : LiaTerm::var(xl)};
            LiaFormula body = trans(s, w, f.kids[0], opt);
            if (simple) {
                outer.push_back(std::move(body));
                continue;
            }
            LiaFormula b = substitute(s.bound(n), {{"x", LiaTerm::var(xl)}});
            inner.push_back(all ? LiaFormula::implies(std::move(b), std::move(body))
                                : LiaFormula::conj({std::move(b), std::move(body)}));
        }
        if (!inner.empty()) {
            LiaFormula j = all ? LiaFormula::conj(std::move(inner)) : LiaFormula::disj(std::move(inner));
            outer.push_back(all ? LiaFormula::forall(xl, std::move(j)) : LiaFormula::exists(xl, std::move(j)));
        }
        if (outer.empty()) return all ? LiaFormula::top() : LiaFormula::bot();
        if (!opt.regular_simplification) return outer[0];
        return all ? LiaFormula::conj(std::move(outer)) : LiaFormula::disj(std::move(outer));
    }
    }
    return LiaFormula::bot();
}

const char* to_string(Truth t) {
    switch (t) {
    case Truth::True: return "true";
    case Truth::False: return "false";
    case Truth::Undetermined: return "undetermined";
    }
    return "?";
}

ModelCheckResult model_check(const SymbolicStructure& s, const Formula& f, const SolverConfig& cfg,
                             const ExplicitAssignment& a, const TransOptions& opt) {
    for (auto& [v, sort] : free_vars(f))
        if (!a.count(v)) throw Error("model_check: free variable " + v + " has no value");
    auto sym = symbolize(a);
    LiaFormula phi = trans(s, sym.symbolic, eliminate_iff(f), opt);
    std::vector<LiaFormula> parts{phi};
    for (auto& [x, z] : sym.residual)
        if (free_int_vars(phi).count(x)) parts.push_back(lia_eq(LiaTerm::var(x), LiaTerm::lit(z)));
    LiaFormula q = parts.size() == 1 ? phi : LiaFormula::conj(parts);
    ModelCheckResult out;
    out.script = emit_smtlib(q, {}, {}, cfg.logic);
    auto r = check(cfg, out.script);
    if (r.sat()) out.truth = Truth::True;
    else if (r.unsat()) out.truth = Truth::False;
    else {
        out.truth = Truth::Undetermined;
        out.reason = std::string(to_string(r.status)) + (r.reason.empty() ? "" : ": " + r.reason);
    }
    return out;
}

std::string eval_finite_term(const FiniteStructure& m, const Term& t, const std::map<std::string, std::string>& a) {
    switch (t.kind) {
    case Term::Kind::Var: {
        auto it = a.find(t.name);
        if (it == a.end()) throw Error("variable " + t.name + " is not assigned");
        return it->second;
    }
    case Term::Kind::Const: return m.constants.at(t.name);
    case Term::Kind::App: {
        std::vector<std::string> args;
        for (auto& x : t.args) args.push_back(eval_finite_term(m, x, a));
        return m.functions.at(t.name).at(args);
    }
    }
    return {};
}

bool eval_finite(const FiniteStructure& m, const Formula& f, const std::map<std::string, std::string>& a) {
    using K = Formula::Kind;
    switch (f.kind) {
    case K::True: return true;
    case K::False: return false;
    case K::Rel: {
        std::vector<std::string> args;
        for (auto& t : f.terms) args.push_back(eval_finite_term(m, t, a));
        auto it = m.relations.find(f.name);
        return it != m.relations.end() && it->second.count(args);
    }
    case K::Eq: return eval_finite_term(m, f.terms[0], a) == eval_finite_term(m, f.terms[1], a);
    case K::Not: return !eval_finite(m, f.kids[0], a);
    case K::And:
        for (auto& k : f.kids)
            if (!eval_finite(m, k, a)) return false;
        return true;
    case K::Or:
        for (auto& k : f.kids)
            if (eval_finite(m, k, a)) return true;
        return false;
    case K::Implies: return !eval_finite(m, f.kids[0], a) || eval_finite(m, f.kids[1], a);
    case K::Iff: return eval_finite(m, f.kids[0], a) == eval_finite(m, f.kids[1], a);
    case K::Forall:
    case K::Exists: {
        bool all = f.kind == K::Forall;
        auto it = m.domain.find(f.sort);
        if (it == m.domain.end()) return all;
        auto b = a;
        for (auto& e : it->second) {
            b[f.name] = e;
            if (eval_finite(m, f.kids[0], b) != all) return !all;
        }
        return all;
    }
    }
    return false;
}

}  // namespace needle
