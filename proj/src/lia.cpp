#include "needle/lia.hpp"

#include <algorithm>

namespace needle {

// ---- constructors

LiaTerm LiaTerm::lit(Int v) {
    LiaTerm t;
    t.kind = Kind::Lit;
    t.value = v;
    return t;
}

LiaTerm LiaTerm::var(std::string n) {
    LiaTerm t;
    t.kind = Kind::Var;
    t.name = std::move(n);
    return t;
}

LiaTerm LiaTerm::add(LiaTerm a, LiaTerm b) {
    LiaTerm t;
    t.kind = Kind::Add;
    t.args = {std::move(a), std::move(b)};
    return t;
}

LiaTerm LiaTerm::sub(LiaTerm a, LiaTerm b) {
    LiaTerm t;
    t.kind = Kind::Sub;
    t.args = {std::move(a), std::move(b)};
    return t;
}

LiaTerm LiaTerm::mul(Int k, LiaTerm x) {
    LiaTerm t;
    t.kind = Kind::Mul;
    t.value = k;
    t.args = {std::move(x)};
    return t;
}

LiaTerm LiaTerm::div(LiaTerm x, Int k) {
    if (k == 0) throw Error("division by literal zero");
    LiaTerm t;
    t.kind = Kind::Div;
    t.value = k;
    t.args = {std::move(x)};
    return t;
}

LiaTerm LiaTerm::ite(LiaFormula c, LiaTerm a, LiaTerm b) {
    LiaTerm t;
    t.kind = Kind::Ite;
    t.cond = std::make_shared<const LiaFormula>(std::move(c));
    t.args = {std::move(a), std::move(b)};
    return t;
}

bool LiaTerm::operator==(const LiaTerm& o) const {
    if (kind != o.kind || value != o.value || name != o.name || args != o.args) return false;
    if (!cond || !o.cond) return !cond && !o.cond;
    return *cond == *o.cond;
}

LiaFormula LiaFormula::top() { return LiaFormula{}; }

LiaFormula LiaFormula::bot() {
    LiaFormula f;
    f.kind = Kind::False;
    return f;
}

LiaFormula LiaFormula::compare(Cmp c, LiaTerm a, LiaTerm b) {
    LiaFormula f;
    f.kind = Kind::Compare;
    f.cmp = c;
    f.terms = {std::move(a), std::move(b)};
    return f;
}

LiaFormula LiaFormula::congruent(LiaTerm t, Int modulus, Int residue) {
    if (modulus == 0) throw Error("congruence modulo zero");
    LiaFormula f;
    f.kind = Kind::Congruent;
    f.terms = {std::move(t)};
    f.modulus = modulus;
    f.residue = euclid_mod(residue, modulus);
    return f;
}

LiaFormula LiaFormula::boolvar(std::string n) {
    LiaFormula f;
    f.kind = Kind::BoolVar;
    f.name = std::move(n);
    return f;
}

LiaFormula LiaFormula::negate(LiaFormula a) {
    LiaFormula f;
    f.kind = Kind::Not;
    f.kids = {std::move(a)};
    return f;
}

LiaFormula LiaFormula::conj(std::vector<LiaFormula> fs) {
    LiaFormula f;
    f.kind = Kind::And;
    f.kids = std::move(fs);
    return f;
}

LiaFormula LiaFormula::disj(std::vector<LiaFormula> fs) {
    LiaFormula f;
    f.kind = Kind::Or;
    f.kids = std::move(fs);
    return f;
}

LiaFormula LiaFormula::implies(LiaFormula a, LiaFormula b) {
    LiaFormula f;
    f.kind = Kind::Implies;
    f.kids = {std::move(a), std::move(b)};
    return f;
}

LiaFormula LiaFormula::forall(std::string v, LiaFormula body) {
    LiaFormula f;
    f.kind = Kind::Forall;
    f.name = std::move(v);
    f.kids = {std::move(body)};
    return f;
}

LiaFormula LiaFormula::exists(std::string v, LiaFormula body) {
    LiaFormula f;
    f.kind = Kind::Exists;
    f.name = std::move(v);
    f.kids = {std::move(body)};
    return f;
}

bool LiaFormula::operator==(const LiaFormula& o) const {
    return kind == o.kind && cmp == o.cmp && terms == o.terms && modulus == o.modulus &&
           residue == o.residue && name == o.name && kids == o.kids;
}

// ---- simplifying constructors

LiaFormula mk_not(LiaFormula f) {
    using K = LiaFormula::Kind;
    if (f.kind == K::True) return LiaFormula::bot();
    if (f.kind == K::False) return LiaFormula::top();
    if (f.kind == K::Not) return std::move(f.kids[0]);
    return LiaFormula::negate(std::move(f));
}

namespace {

LiaFormula mk_junction(std::vector<LiaFormula> fs, LiaFormula::Kind self, LiaFormula::Kind unit,
                       LiaFormula::Kind absorb) {
    std::vector<LiaFormula> out;
    for (auto& f : fs) {
        if (f.kind == unit) continue;
        if (f.kind == absorb) return f;
        if (f.kind == self) {
            for (auto& k : f.kids) out.push_back(std::move(k));
        } else {
            out.push_back(std::move(f));
        }
    }
    if (out.empty()) {
        LiaFormula u;
        u.kind = unit;
        return u;
    }
    if (out.size() == 1) return std::move(out[0]);
    LiaFormula r;
    r.kind = self;
    r.kids = std::move(out);
    return r;
}

}  // namespace

LiaFormula mk_and(std::vector<LiaFormula> fs) {
    using K = LiaFormula::Kind;
    return mk_junction(std::move(fs), K::And, K::True, K::False);
}

LiaFormula mk_or(std::vector<LiaFormula> fs) {
    using K = LiaFormula::Kind;
    return mk_junction(std::move(fs), K::Or, K::False, K::True);
}

LiaFormula mk_implies(LiaFormula a, LiaFormula b) {
    using K = LiaFormula::Kind;
    if (a.kind == K::True) return b;
    if (a.kind == K::False || b.kind == K::True) return LiaFormula::top();
    if (b.kind == K::False) return mk_not(std::move(a));
    return LiaFormula::implies(std::move(a), std::move(b));
}

LiaFormula mk_forall(const std::vector<std::string>& vs, LiaFormula body) {
    for (auto it = vs.rbegin(); it != vs.rend(); ++it) {
        if (!free_int_vars(body).count(*it)) continue;
        body = LiaFormula::forall(*it, std::move(body));
    }
    return body;
}

LiaFormula mk_exists(const std::vector<std::string>& vs, LiaFormula body) {
    for (auto it = vs.rbegin(); it != vs.rend(); ++it) {
        if (!free_int_vars(body).count(*it)) continue;
        body = LiaFormula::exists(*it, std::move(body));
    }
    return body;
}

LiaTerm mk_add(LiaTerm a, LiaTerm b) {
    using K = LiaTerm::Kind;
    if (a.kind == K::Lit && b.kind == K::Lit) return LiaTerm::lit(a.value + b.value);
    if (b.kind == K::Lit && b.value == 0) return a;
    if (a.kind == K::Lit && a.value == 0) return b;
    return LiaTerm::add(std::move(a), std::move(b));
}

// ---- free variables

namespace {

void collect(const LiaFormula& f, std::set<std::string>& ints, std::set<std::string>& bools,
             std::set<std::string>& bound);

void collect(const LiaTerm& t, std::set<std::string>& ints, std::set<std::string>& bools,
             std::set<std::string>& bound) {
    if (t.kind == LiaTerm::Kind::Var && !bound.count(t.name)) ints.insert(t.name);
    if (t.cond) collect(*t.cond, ints, bools, bound);
    for (auto& a : t.args) collect(a, ints, bools, bound);
}

void collect(const LiaFormula& f, std::set<std::string>& ints, std::set<std::string>& bools,
             std::set<std::string>& bound) {
    using K = LiaFormula::Kind;
    switch (f.kind) {
    case K::Compare:
    case K::Congruent:
        for (auto& t : f.terms) collect(t, ints, bools, bound);
        return;
    case K::BoolVar:
        bools.insert(f.name);
        return;
    case K::Forall:
    case K::Exists: {
        bool fresh = bound.insert(f.name).second;
        collect(f.kids[0], ints, bools, bound);
        if (fresh) bound.erase(f.name);
        return;
    }
    default:
        for (auto& k : f.kids) collect(k, ints, bools, bound);
    }
}

}  // namespace

std::set<std::string> free_vars(const LiaTerm& t) {
    std::set<std::string> s, b, bound;
    collect(t, s, b, bound);
    return s;
}

std::set<std::string> free_int_vars(const LiaFormula& f) {
    std::set<std::string> i, b, bound;
    collect(f, i, b, bound);
    return i;
}

std::set<std::string> free_bool_vars(const LiaFormula& f) {
    std::set<std::string> i, b, bound;
    collect(f, i, b, bound);
    return b;
}

bool is_quantifier_free(const LiaFormula& f) {
    if (f.kind == LiaFormula::Kind::Forall || f.kind == LiaFormula::Kind::Exists) return false;
    for (auto& k : f.kids)
        if (!is_quantifier_free(k)) return false;
    return true;
}

// ---- substitution

LiaTerm substitute(const LiaTerm& t, const TermSubst& m) {
    if (t.kind == LiaTerm::Kind::Var) {
        auto it = m.find(t.name);
        return it == m.end() ? t : it->second;
    }
    if (t.args.empty()) return t;
    LiaTerm r = t;
    for (auto& a : r.args) a = substitute(a, m);
    if (t.cond) r.cond = std::make_shared<const LiaFormula>(substitute(*t.cond, m));
    return r;
}

LiaFormula substitute(const LiaFormula& f, const TermSubst& m) {
    using K = LiaFormula::Kind;
    if (m.empty()) return f;
    switch (f.kind) {
    case K::True:
    case K::False:
    case K::BoolVar:
        return f;
    case K::Compare:
    case K::Congruent: {
        LiaFormula r = f;
        for (auto& t : r.terms) t = substitute(t, m);
        return r;
    }
    case K::Forall:
    case K::Exists: {
        TermSubst inner = m;
        inner.erase(f.name);
        std::set<std::string> incoming;
        auto body_free = free_int_vars(f.kids[0]);
        for (auto& [k, v] : inner) {
            if (!body_free.count(k)) continue;
            auto fv = free_vars(v);
            incoming.insert(fv.begin(), fv.end());
        }
        LiaFormula r = f;
        if (incoming.count(f.name)) {
            std::string fresh;
            for (int i = 1;; ++i) {
                fresh = f.name + "!" + std::to_string(i);
                if (!incoming.count(fresh) && !body_free.count(fresh)) break;
            }
            inner[f.name] = LiaTerm::var(fresh);
            r.name = fresh;
        }
        r.kids[0] = substitute(f.kids[0], inner);
        return r;
    }
    default: {
        LiaFormula r = f;
        for (auto& k : r.kids) k = substitute(k, m);
        return r;
    }
    }
}

// ---- evaluation

Int euclid_mod(Int a, Int k) {
    Int m = k < 0 ? -k : k;
    Int r = a % m;
    return r < 0 ? r + m : r;
}

Int floor_div(Int a, Int k) {
    // SMT-LIB: a = k*q + r with 0 <= r < |k|
    Int r = euclid_mod(a, k);
    return (a - r) / k;
}

Int eval(const LiaTerm& t, const IntEnv& env, const BoolEnv& benv) {
    using K = LiaTerm::Kind;
    switch (t.kind) {
    case K::Lit: return t.value;
    case K::Var: {
        auto it = env.find(t.name);
        if (it == env.end()) throw Error("unbound integer variable " + t.name);
        return it->second;
    }
    case K::Add: return eval(t.args[0], env, benv) + eval(t.args[1], env, benv);
    case K::Sub: return eval(t.args[0], env, benv) - eval(t.args[1], env, benv);
    case K::Mul: return t.value * eval(t.args[0], env, benv);
    case K::Div: return floor_div(eval(t.args[0], env, benv), t.value);
    case K::Ite: return eval(*t.cond, env, benv) ? eval(t.args[0], env, benv) : eval(t.args[1], env, benv);
    }
    return 0;
}

bool eval(const LiaFormula& f, const IntEnv& env, const BoolEnv& benv) {
    using K = LiaFormula::Kind;
    switch (f.kind) {
    case K::True: return true;
    case K::False: return false;
    case K::Compare: {
        Int a = eval(f.terms[0], env, benv), b = eval(f.terms[1], env, benv);
        switch (f.cmp) {
        case Cmp::Lt: return a < b;
        case Cmp::Le: return a <= b;
        case Cmp::Eq: return a == b;
        case Cmp::Ge: return a >= b;
        case Cmp::Gt: return a > b;
        }
        return false;
    }
    case K::Congruent: return euclid_mod(eval(f.terms[0], env, benv), f.modulus) == f.residue;
    case K::BoolVar: {
        auto it = benv.find(f.name);
        if (it == benv.end()) throw Error("unbound boolean variable " + f.name);
        return it->second;
    }
    case K::Not: return !eval(f.kids[0], env, benv);
    case K::And:
        for (auto& k : f.kids)
            if (!eval(k, env, benv)) return false;
        return true;
    case K::Or:
        for (auto& k : f.kids)
            if (eval(k, env, benv)) return true;
        return false;
    case K::Implies: return !eval(f.kids[0], env, benv) || eval(f.kids[1], env, benv);
    case K::Forall:
    case K::Exists: throw NeedsSolver("quantified LIA formula needs a solver");
    }
    return false;
}

// ---- printing

namespace {

std::string lit_str(Int v) { return v < 0 ? "(- " + std::to_string(-v) + ")" : std::to_string(v); }

const char* cmp_str(Cmp c) {
    switch (c) {
    case Cmp::Lt: return "<";
    case Cmp::Le: return "<=";
    case Cmp::Eq: return "=";
    case Cmp::Ge: return ">=";
    case Cmp::Gt: return ">";
    }
    return "=";
}

void print(const LiaFormula& f, std::string& o);

void print(const LiaTerm& t, std::string& o) {
    using K = LiaTerm::Kind;
    switch (t.kind) {
    case K::Ite:
        o += "(ite ";
        print(*t.cond, o);
        o += ' ';
        print(t.args[0], o);
        o += ' ';
        print(t.args[1], o);
        o += ')';
        return;
    case K::Lit: o += lit_str(t.value); return;
    case K::Var: o += quote_symbol(t.name); return;
    case K::Add:
    case K::Sub:
        o += t.kind == K::Add ? "(+ " : "(- ";
        print(t.args[0], o);
        o += ' ';
        print(t.args[1], o);
        o += ')';
        return;
    case K::Mul:
        o += "(* " + lit_str(t.value) + " ";
        print(t.args[0], o);
        o += ')';
        return;
    case K::Div:
        o += "(div ";
        print(t.args[0], o);
        o += " " + lit_str(t.value) + ")";
        return;
    }
}

void print(const LiaFormula& f, std::string& o) {
    using K = LiaFormula::Kind;
    switch (f.kind) {
    case K::True: o += "true"; return;
    case K::False: o += "false"; return;
    case K::Compare:
        o += '(';
        o += cmp_str(f.cmp);
        o += ' ';
        print(f.terms[0], o);
        o += ' ';
        print(f.terms[1], o);
        o += ')';
        return;
    case K::Congruent:
        o += "(= (mod ";
        print(f.terms[0], o);
        o += " " + lit_str(f.modulus) + ") " + lit_str(f.residue) + ")";
        return;
    case K::BoolVar: o += quote_symbol(f.name); return;
    case K::Not:
        o += "(not ";
        print(f.kids[0], o);
        o += ')';
        return;
    case K::And:
    case K::Or:
        if (f.kids.empty()) {
            o += f.kind == K::And ? "true" : "false";
            return;
        }
        o += f.kind == K::And ? "(and" : "(or";
        for (auto& k : f.kids) {
            o += ' ';
            print(k, o);
        }
        o += ')';
        return;
    case K::Implies:
        o += "(=> ";
        print(f.kids[0], o);
        o += ' ';
        print(f.kids[1], o);
        o += ')';
        return;
    case K::Forall:
    case K::Exists:
        o += f.kind == K::Forall ? "(forall ((" : "(exists ((";
        o += quote_symbol(f.name) + " Int)) ";
        print(f.kids[0], o);
        o += ')';
        return;
    }
}

int term_prec(const LiaTerm& t) {
    switch (t.kind) {
    case LiaTerm::Kind::Add:
    case LiaTerm::Kind::Sub: return 1;
    case LiaTerm::Kind::Mul:
    case LiaTerm::Kind::Div: return 2;
    default: return 3;
    }
}

std::string infix(const LiaFormula& f, bool top);

std::string infix(const LiaTerm& t) {
    using K = LiaTerm::Kind;
    auto wrap = [](const LiaTerm& s, int p) {
        std::string r = infix(s);
        return term_prec(s) < p ? "(" + r + ")" : r;
    };
    switch (t.kind) {
    case K::Lit: return std::to_string(t.value);
    case K::Var: return t.name;
    case K::Add: return wrap(t.args[0], 1) + " + " + wrap(t.args[1], 2);
    case K::Sub: return wrap(t.args[0], 1) + " - " + wrap(t.args[1], 2);
    case K::Mul: return std::to_string(t.value) + "*" + wrap(t.args[0], 3);
    case K::Div: return wrap(t.args[0], 3) + " div " + std::to_string(t.value);
    case K::Ite: return "(if " + infix(*t.cond, true) + " then " + infix(t.args[0]) + " else " + infix(t.args[1]) + ")";
    }
    return "";
}

std::string infix(const LiaFormula& f, bool top) {
    using K = LiaFormula::Kind;
    auto paren = [top](std::string s) { return top ? s : "(" + s + ")"; };
    switch (f.kind) {
    case K::True: return "true";
    case K::False: return "false";
    case K::Compare: return infix(f.terms[0]) + " " + (f.cmp == Cmp::Eq ? "=" : cmp_str(f.cmp)) + " " + infix(f.terms[1]);
    case K::Congruent:
        return infix(f.terms[0]) + " = " + std::to_string(f.residue) + " mod " + std::to_string(f.modulus);
    case K::BoolVar: return f.name;
    case K::Not: return "!" + infix(f.kids[0], false);
    case K::And:
    case K::Or: {
        if (f.kids.empty()) return f.kind == K::And ? "true" : "false";
        std::string s;
        for (size_t i = 0; i < f.kids.size(); ++i) {
            if (i) s += f.kind == K::And ? " & " : " | ";
            s += infix(f.kids[i], false);
        }
        return paren(s);
    }
    case K::Implies: return paren(infix(f.kids[0], false) + " -> " + infix(f.kids[1], false));
    case K::Forall: return paren("forall " + f.name + ". " + infix(f.kids[0], true));
    case K::Exists: return paren("exists " + f.name + ". " + infix(f.kids[0], true));
    }
    return "";
}

}  // namespace

std::string to_smtlib(const LiaTerm& t) {
    std::string o;
    print(t, o);
    return o;
}

std::string to_smtlib(const LiaFormula& f) {
    std::string o;
    print(f, o);
    return o;
}

std::string to_infix(const LiaTerm& t) { return infix(t); }
std::string to_infix(const LiaFormula& f) { return infix(f, true); }

// ---- parsing

namespace {

[[noreturn]] void bad(const SExpr& e, const std::string& what) {
    throw ParseError(what + ": " + e.str(), e.loc);
}

std::optional<Int> as_literal(const SExpr& e) {
    if (e.is_numeral()) return std::stoll(e.text);
    if (e.is_app("-") && e.items.size() == 2 && e.items[1].is_numeral()) return -std::stoll(e.items[1].text);
    return std::nullopt;
}

bool looks_like_term(const SExpr& e) {
    if (e.is_numeral()) return true;
    if (e.is_symbol()) return true;
    if (!e.is_list() || e.items.empty() || !e.items[0].is_symbol()) return false;
    const auto& h = e.items[0].text;
    return h == "+" || h == "-" || h == "*" || h == "div" || h == "mod" || h == "ite";
}

}  // namespace

LiaTerm lia_term_from_sexpr(const SExpr& e) {
    if (auto l = as_literal(e)) return LiaTerm::lit(*l);
    if (e.is_symbol()) return LiaTerm::var(e.text);
    if (!e.is_list() || e.items.size() < 2 || !e.items[0].is_symbol()) bad(e, "malformed LIA term");
    const auto& h = e.items[0].text;
    if (h == "ite") {
        if (e.items.size() != 4) bad(e, "ite takes three arguments");
        return LiaTerm::ite(lia_formula_from_sexpr(e.items[1]), lia_term_from_sexpr(e.items[2]),
                            lia_term_from_sexpr(e.items[3]));
    }
    std::vector<LiaTerm> args;
    for (size_t i = 1; i < e.items.size(); ++i) args.push_back(lia_term_from_sexpr(e.items[i]));
    if (h == "+") {
        LiaTerm r = args[0];
        for (size_t i = 1; i < args.size(); ++i) r = LiaTerm::add(r, args[i]);
        return r;
    }
    if (h == "-") {
        if (args.size() == 1) return LiaTerm::mul(-1, args[0]);
        LiaTerm r = args[0];
        for (size_t i = 1; i < args.size(); ++i) r = LiaTerm::sub(r, args[i]);
        return r;
    }
    if (h == "*") {
        if (args.size() != 2) bad(e, "multiplication takes two arguments");
        if (auto k = as_literal(e.items[1])) return LiaTerm::mul(*k, args[1]);
        if (auto k = as_literal(e.items[2])) return LiaTerm::mul(*k, args[0]);
        bad(e, "non-linear multiplication");
    }
    if (h == "div") {
        auto k = args.size() == 2 ? as_literal(e.items[2]) : std::nullopt;
        if (!k || *k == 0) bad(e, "division must be by a non-zero literal");
        return LiaTerm::div(args[0], *k);
    }
    bad(e, "unknown LIA term operator");
}

LiaFormula lia_formula_from_sexpr(const SExpr& e) {
    if (e.is_symbol("true")) return LiaFormula::top();
    if (e.is_symbol("false")) return LiaFormula::bot();
    if (e.is_symbol()) return LiaFormula::boolvar(e.text);
    if (!e.is_list() || e.items.empty() || !e.items[0].is_symbol()) bad(e, "malformed LIA formula");
    const auto& h = e.items[0].text;
    size_t n = e.items.size() - 1;
    auto kid = [&](size_t i) { return lia_formula_from_sexpr(e.items[i]); };
    if (h == "not") {
        if (n != 1) bad(e, "not takes one argument");
        return LiaFormula::negate(kid(1));
    }
    if (h == "and" || h == "or") {
        std::vector<LiaFormula> ks;
        for (size_t i = 1; i <= n; ++i) ks.push_back(kid(i));
        return h == "and" ? LiaFormula::conj(std::move(ks)) : LiaFormula::disj(std::move(ks));
    }
    if (h == "=>") {
        if (n < 2) bad(e, "=> takes at least two arguments");
        LiaFormula r = kid(n);
        for (size_t i = n - 1; i >= 1; --i) r = LiaFormula::implies(kid(i), std::move(r));
        return r;
    }
    if (h == "forall" || h == "exists") {
        if (n != 2 || !e.items[1].is_list()) bad(e, "malformed quantifier");
        std::vector<std::string> vs;
        for (auto& b : e.items[1].items) {
            if (!b.is_list() || b.items.size() != 2 || !b.items[0].is_symbol() || !b.items[1].is_symbol("Int"))
                bad(b, "quantified variables must be Int");
            vs.push_back(b.items[0].text);
        }
        LiaFormula body = kid(2);
        for (auto it = vs.rbegin(); it != vs.rend(); ++it)
            body = h == "forall" ? LiaFormula::forall(*it, std::move(body)) : LiaFormula::exists(*it, std::move(body));
        return body;
    }
    if (h == "=" && n == 2 && e.items[1].is_app("mod")) {
        const auto& m = e.items[1];
        auto k = m.items.size() == 3 ? as_literal(m.items[2]) : std::nullopt;
        auto r = as_literal(e.items[2]);
        if (!k || !r || *k == 0) bad(e, "congruence needs literal modulus and residue");
        return LiaFormula::congruent(lia_term_from_sexpr(m.items[1]), *k, *r);
    }
    Cmp c;
    if (h == "<") c = Cmp::Lt;
    else if (h == "<=") c = Cmp::Le;
    else if (h == "=") c = Cmp::Eq;
    else if (h == ">=") c = Cmp::Ge;
    else if (h == ">") c = Cmp::Gt;
    else if (h == "distinct") {
        if (n != 2) bad(e, "distinct takes two arguments");
        return LiaFormula::negate(lia_eq(lia_term_from_sexpr(e.items[1]), lia_term_from_sexpr(e.items[2])));
    } else
        bad(e, "unknown LIA operator");
    if (n < 2) bad(e, "comparison takes at least two arguments");
    for (size_t i = 1; i <= n; ++i)
        if (!looks_like_term(e.items[i])) bad(e.items[i], "expected integer term");
    if (n == 2)
        return LiaFormula::compare(c, lia_term_from_sexpr(e.items[1]), lia_term_from_sexpr(e.items[2]));
    std::vector<LiaFormula> chain;
    for (size_t i = 1; i < n; ++i)
        chain.push_back(LiaFormula::compare(c, lia_term_from_sexpr(e.items[i]), lia_term_from_sexpr(e.items[i + 1])));
    return LiaFormula::conj(std::move(chain));
}

LiaTerm parse_lia_term(std::string_view s) { return lia_term_from_sexpr(parse_sexpr(s)); }
LiaFormula parse_lia_formula(std::string_view s) { return lia_formula_from_sexpr(parse_sexpr(s)); }

std::string emit_smtlib(const LiaFormula& f, const std::set<std::string>& int_vars,
                        const std::set<std::string>& bool_vars, const std::string& logic) {
    std::set<std::string> ints = int_vars, bools = bool_vars;
    auto fi = free_int_vars(f), fb = free_bool_vars(f);
    ints.insert(fi.begin(), fi.end());
    bools.insert(fb.begin(), fb.end());
    std::string o = "(set-logic " + logic + ")\n";
    for (auto& v : bools) o += "(declare-const " + quote_symbol(v) + " Bool)\n";
    for (auto& v : ints) o += "(declare-const " + quote_symbol(v) + " Int)\n";
    o += "(assert " + to_smtlib(f) + ")\n";
    return o;
}

EmittedScript parse_script(std::string_view text) {
    EmittedScript s;
    for (auto& cmd : parse_sexprs(text)) {
        if (!cmd.is_list() || cmd.items.empty()) bad(cmd, "malformed command");
        if (cmd.is_app("set-logic") || cmd.is_app("set-option") || cmd.is_app("check-sat") ||
            cmd.is_app("get-value") || cmd.is_app("exit"))
            continue;
        if (cmd.is_app("declare-const") && cmd.items.size() == 3) {
            (cmd.items[2].is_symbol("Bool") ? s.bool_vars : s.int_vars).insert(cmd.items[1].text);
        } else if (cmd.is_app("declare-fun") && cmd.items.size() == 4 && cmd.items[2].is_list() &&
                   cmd.items[2].items.empty()) {
            (cmd.items[3].is_symbol("Bool") ? s.bool_vars : s.int_vars).insert(cmd.items[1].text);
        } else if (cmd.is_app("assert") && cmd.items.size() == 2) {
            s.assertions.push_back(lia_formula_from_sexpr(cmd.items[1]));
        } else {
            bad(cmd, "unsupported command");
        }
    }
    return s;
}

}  // namespace needle
