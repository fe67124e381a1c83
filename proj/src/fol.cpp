#include "needle/fol.hpp"

#include <algorithm>

#include "needle/transforms.hpp"

namespace needle {

// ---- vocabulary

Vocabulary::SymbolKind Vocabulary::kind_of(const std::string& s) const {
    if (constants.count(s)) return SymbolKind::Constant;
    if (functions.count(s)) return SymbolKind::Function;
    if (relations.count(s)) return SymbolKind::Relation;
    return SymbolKind::None;
}

bool Vocabulary::has_sort(const std::string& s) const { return sort_index(s) >= 0; }

int Vocabulary::sort_index(const std::string& s) const {
    auto it = std::find(sorts.begin(), sorts.end(), s);
    return it == sorts.end() ? -1 : static_cast<int>(it - sorts.begin());
}

void Vocabulary::check() const {
    std::set<std::string> seen;
    for (auto& s : sorts)
        if (!seen.insert(s).second) throw SortError("duplicate sort " + s);
    auto need = [&](const std::string& s, const std::string& who) {
        if (!has_sort(s)) throw SortError("symbol " + who + " uses undeclared sort " + s);
    };
    for (auto& [c, s] : constants) need(s, c);
    for (auto& [f, sig] : functions) {
        if (sig.args.empty()) throw SortError("function " + f + " has no arguments");
        for (auto& a : sig.args) need(a, f);
        need(sig.range, f);
    }
    for (auto& [r, args] : relations)
        for (auto& a : args) need(a, r);
    std::set<std::string> names;
    for (auto& [c, s] : constants) names.insert(c);
    for (auto& [f, s] : functions)
        if (!names.insert(f).second) throw SortError("symbol " + f + " declared twice");
    for (auto& [r, s] : relations)
        if (!names.insert(r).second) throw SortError("symbol " + r + " declared twice");
    if (order_relation) {
        auto it = relations.find(*order_relation);
        if (it == relations.end()) throw SortError("order relation " + *order_relation + " is not a relation");
        if (it->second.size() != 2 || it->second[0] != it->second[1])
            throw SortError("order relation " + *order_relation + " must be binary over one sort");
    }
    for (auto& s : infinite_sorts) need(s, "infinite-sort");
}

// ---- terms

Term Term::var(std::string n, std::string s) {
    Term t;
    t.kind = Kind::Var;
    t.name = std::move(n);
    t.sort = std::move(s);
    return t;
}

Term Term::constant(std::string n, std::string s) {
    Term t;
    t.kind = Kind::Const;
    t.name = std::move(n);
    t.sort = std::move(s);
    return t;
}

Term Term::app(std::string f, std::string range, std::vector<Term> args) {
    Term t;
    t.kind = Kind::App;
    t.name = std::move(f);
    t.sort = std::move(range);
    t.args = std::move(args);
    return t;
}

bool Term::operator==(const Term& o) const {
    return kind == o.kind && name == o.name && sort == o.sort && args == o.args;
}

namespace {

// three-way, visits each subterm once
int compare_terms(const Term& a, const Term& b) {
    if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
    if (int c = a.name.compare(b.name)) return c;
    if (int c = a.sort.compare(b.sort)) return c;
    for (size_t i = 0; i < a.args.size() && i < b.args.size(); ++i)
        if (int c = compare_terms(a.args[i], b.args[i])) return c;
    return a.args.size() < b.args.size() ? -1 : a.args.size() > b.args.size() ? 1 : 0;
}

}  // namespace

bool Term::operator<(const Term& o) const { return compare_terms(*this, o) < 0; }

bool Term::is_ground() const {
    if (kind == Kind::Var) return false;
    for (auto& a : args)
        if (!a.is_ground()) return false;
    return true;
}

// ---- formulas

Formula Formula::top() { return Formula{}; }

Formula Formula::bot() {
    Formula f;
    f.kind = Kind::False;
    return f;
}

Formula Formula::rel(std::string r, std::vector<Term> args) {
    Formula f;
    f.kind = Kind::Rel;
    f.name = std::move(r);
    f.terms = std::move(args);
    return f;
}

Formula Formula::eq(Term a, Term b) {
    Formula f;
    f.kind = Kind::Eq;
    f.terms = {std::move(a), std::move(b)};
    return f;
}

Formula Formula::negate(Formula a) {
    Formula f;
    f.kind = Kind::Not;
    f.loc = a.loc;
    f.kids = {std::move(a)};
    return f;
}

Formula Formula::conj(std::vector<Formula> fs) {
    Formula f;
    f.kind = Kind::And;
    f.kids = std::move(fs);
    return f;
}

Formula Formula::disj(std::vector<Formula> fs) {
    Formula f;
    f.kind = Kind::Or;
    f.kids = std::move(fs);
    return f;
}

Formula Formula::implies(Formula a, Formula b) {
    Formula f;
    f.kind = Kind::Implies;
    f.kids = {std::move(a), std::move(b)};
    return f;
}

Formula Formula::iff(Formula a, Formula b) {
    Formula f;
    f.kind = Kind::Iff;
    f.kids = {std::move(a), std::move(b)};
    return f;
}

Formula Formula::forall(std::string v, std::string sort, Formula body) {
    Formula f;
    f.kind = Kind::Forall;
    f.name = std::move(v);
    f.sort = std::move(sort);
    f.kids = {std::move(body)};
    return f;
}

Formula Formula::exists(std::string v, std::string sort, Formula body) {
    Formula f = forall(std::move(v), std::move(sort), std::move(body));
    f.kind = Kind::Exists;
    return f;
}

Formula Formula::forall(const std::vector<std::pair<std::string, std::string>>& vs, Formula body) {
    for (auto it = vs.rbegin(); it != vs.rend(); ++it) body = forall(it->first, it->second, std::move(body));
    return body;
}

Formula Formula::exists(const std::vector<std::pair<std::string, std::string>>& vs, Formula body) {
    for (auto it = vs.rbegin(); it != vs.rend(); ++it) body = exists(it->first, it->second, std::move(body));
    return body;
}

bool Formula::operator==(const Formula& o) const {
    return kind == o.kind && name == o.name && sort == o.sort && terms == o.terms && kids == o.kids;
}

// ---- variables

std::set<std::string> free_vars(const Term& t) {
    std::set<std::string> s;
    if (t.kind == Term::Kind::Var) s.insert(t.name);
    for (auto& a : t.args) {
        auto r = free_vars(a);
        s.insert(r.begin(), r.end());
    }
    return s;
}

namespace {

void term_vars(const Term& t, std::map<std::string, std::string>& out) {
    if (t.kind == Term::Kind::Var) out.emplace(t.name, t.sort);
    for (auto& a : t.args) term_vars(a, out);
}

void formula_vars(const Formula& f, std::map<std::string, std::string>& out, std::set<std::string>& bound) {
    if (f.is_quantifier()) {
        bool fresh = bound.insert(f.name).second;
        formula_vars(f.kids[0], out, bound);
        if (fresh) bound.erase(f.name);
        return;
    }
    std::map<std::string, std::string> tv;
    for (auto& t : f.terms) term_vars(t, tv);
    for (auto& [n, s] : tv)
        if (!bound.count(n)) out.emplace(n, s);
    for (auto& k : f.kids) formula_vars(k, out, bound);
}

void term_symbols(const Term& t, std::set<std::string>& out) {
    if (t.kind != Term::Kind::Var) out.insert(t.name);
    for (auto& a : t.args) term_symbols(a, out);
}

}  // namespace

std::map<std::string, std::string> free_vars(const Formula& f) {
    std::map<std::string, std::string> out;
    std::set<std::string> bound;
    formula_vars(f, out, bound);
    return out;
}

bool is_closed(const Formula& f) { return free_vars(f).empty(); }

std::vector<std::string> bound_vars(const Formula& f) {
    std::vector<std::string> out;
    if (f.is_quantifier()) out.push_back(f.name);
    for (auto& k : f.kids) {
        auto r = bound_vars(k);
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

std::set<std::string> symbols_used(const Formula& f) {
    std::set<std::string> out;
    if (f.kind == Formula::Kind::Rel) out.insert(f.name);
    for (auto& t : f.terms) term_symbols(t, out);
    for (auto& k : f.kids) {
        auto r = symbols_used(k);
        out.insert(r.begin(), r.end());
    }
    return out;
}

Term substitute(const Term& t, const std::map<std::string, Term>& m) {
    if (t.kind == Term::Kind::Var) {
        auto it = m.find(t.name);
        return it == m.end() ? t : it->second;
    }
    Term r = t;
    for (auto& a : r.args) a = substitute(a, m);
    return r;
}

Formula substitute(const Formula& f, const std::map<std::string, Term>& m) {
    if (m.empty()) return f;
    Formula r = f;
    if (f.is_quantifier() && m.count(f.name)) {
        auto inner = m;
        inner.erase(f.name);
        r.kids[0] = substitute(f.kids[0], inner);
        return r;
    }
    for (auto& t : r.terms) t = substitute(t, m);
    for (auto& k : r.kids) k = substitute(k, m);
    return r;
}

// ---- printing

std::string to_smtlib(const Term& t) {
    if (t.args.empty()) return quote_symbol(t.name);
    std::string s = "(" + quote_symbol(t.name);
    for (auto& a : t.args) s += " " + to_smtlib(a);
    return s + ")";
}

std::string to_smtlib(const Formula& f) {
    using K = Formula::Kind;
    auto many = [&](const char* op) {
        std::string s = std::string("(") + op;
        for (auto& k : f.kids) s += " " + to_smtlib(k);
        return s + ")";
    };
    switch (f.kind) {
    case K::True: return "true";
    case K::False: return "false";
    case K::Rel: {
        if (f.terms.empty()) return quote_symbol(f.name);
        std::string s = "(" + quote_symbol(f.name);
        for (auto& t : f.terms) s += " " + to_smtlib(t);
        return s + ")";
    }
    case K::Eq: return "(= " + to_smtlib(f.terms[0]) + " " + to_smtlib(f.terms[1]) + ")";
    case K::Not: return "(not " + to_smtlib(f.kids[0]) + ")";
    case K::And: return f.kids.empty() ? "true" : many("and");
    case K::Or: return f.kids.empty() ? "false" : many("or");
    case K::Implies: return many("=>");
    case K::Iff: return many("=");
    case K::Forall:
    case K::Exists:
        return std::string(f.kind == K::Forall ? "(forall ((" : "(exists ((") + quote_symbol(f.name) + " " +
               quote_symbol(f.sort) + ")) " + to_smtlib(f.kids[0]) + ")";
    }
    return "";
}

// ---- sort checking

namespace {

void check_term(const Term& t, const Vocabulary& v) {
    switch (t.kind) {
    case Term::Kind::Var:
        if (!v.has_sort(t.sort)) throw SortError("variable " + t.name + " has unknown sort " + t.sort);
        return;
    case Term::Kind::Const: {
        auto it = v.constants.find(t.name);
        if (it == v.constants.end()) throw SortError("unknown constant " + t.name);
        if (it->second != t.sort) throw SortError("constant " + t.name + " has sort " + it->second);
        return;
    }
    case Term::Kind::App: {
        auto it = v.functions.find(t.name);
        if (it == v.functions.end()) throw SortError("unknown function " + t.name);
        if (it->second.args.size() != t.args.size()) throw SortError("arity mismatch for " + t.name);
        if (it->second.range != t.sort) throw SortError("range mismatch for " + t.name);
        for (size_t i = 0; i < t.args.size(); ++i) {
            check_term(t.args[i], v);
            if (t.args[i].sort != it->second.args[i])
                throw SortError("argument " + std::to_string(i + 1) + " of " + t.name + " has sort " + t.args[i].sort);
        }
        return;
    }
    }
}

}  // namespace

void check_sorts(const Formula& f, const Vocabulary& v) {
    using K = Formula::Kind;
    switch (f.kind) {
    case K::Rel: {
        auto it = v.relations.find(f.name);
        if (it == v.relations.end()) throw SortError("unknown relation " + f.name);
        if (it->second.size() != f.terms.size()) throw SortError("arity mismatch for " + f.name);
        for (size_t i = 0; i < f.terms.size(); ++i) {
            check_term(f.terms[i], v);
            if (f.terms[i].sort != it->second[i]) throw SortError("argument sort mismatch for " + f.name);
        }
        break;
    }
    case K::Eq:
        check_term(f.terms[0], v);
        check_term(f.terms[1], v);
        if (f.terms[0].sort != f.terms[1].sort) throw SortError("equality between different sorts");
        break;
    case K::Forall:
    case K::Exists:
        if (!v.has_sort(f.sort)) throw SortError("quantifier over unknown sort " + f.sort);
        break;
    default:
        break;
    }
    for (auto& k : f.kids) check_sorts(k, v);
}

// ---- problem parser

namespace {

const std::set<std::string> kReserved = {"true", "false", "not", "and", "or", "=>", "=", "distinct",
                                         "forall", "exists", "Bool", "Int", "ite", "let", "!"};

SortError located_sort_error(const std::string& msg, SourceLoc loc) {
    return SortError(std::to_string(loc.line) + ":" + std::to_string(loc.column) + ": " + msg);
}

class ProblemParser {
public:
    Problem run(std::string_view text) {
        std::vector<Formula> asserts;
        auto cmds = parse_sexprs(text);
        for (auto& cmd : cmds) collect_symbols(cmd);
        for (auto& cmd : cmds) {
            if (!cmd.is_list() || cmd.items.empty() || !cmd.items[0].is_symbol())
                throw ParseError("expected a command", cmd.loc);
            const auto& h = cmd.items[0].text;
            if (h == "declare-sort") declare_sort(cmd);
            else if (h == "declare-const") declare_const(cmd);
            else if (h == "declare-fun") declare_fun(cmd);
            else if (h == "assert") {
                if (cmd.items.size() != 2) throw ParseError("assert takes one formula", cmd.loc);
                asserts.push_back(formula(cmd.items[1], {}));
            } else if (h == "set-info") set_info(cmd);
            else if (h == "set-logic" || h == "set-option" || h == "check-sat" || h == "exit" || h == "get-model" ||
                     h == "echo")
                continue;
            else
                throw ParseError("unsupported command '" + h + "'", cmd.loc);
        }
        if (asserts.empty()) throw ParseError("no assertion", {1, 1});
        Problem p;
        p.vocab = vocab_;
        p.assertion = asserts.size() == 1 ? asserts[0] : Formula::conj(asserts);
        if (order_) {
            auto it = vocab_.relations.find(*order_);
            if (it == vocab_.relations.end())
                throw ParseError("order relation '" + *order_ + "' is not a declared relation", order_loc_);
            if (it->second.size() != 2 || it->second[0] != it->second[1])
                throw ParseError("order relation '" + *order_ + "' must be binary over one sort", order_loc_);
            p.vocab.order_relation = order_;
        }
        for (auto& [s, loc] : infinite_)
            if (!vocab_.has_sort(s)) throw ParseError("unknown sort '" + s + "' in infinite-sort directive", loc);
        p.infinite_sorts_explicit = !infinite_.empty();
        for (auto& [s, loc] : infinite_) p.vocab.infinite_sorts.insert(s);
        if (auto_order_) {
            if (!order_) throw ParseError("auto-order requested without an order relation", order_loc_);
            add_order_axioms(p, *order_);
        }
        if (!p.infinite_sorts_explicit) p.vocab.infinite_sorts = default_infinite_sorts(p.assertion, p.vocab);
        p.vocab.check();
        return p;
    }

private:
    void fresh_symbol(const SExpr& e) {
        if (!e.is_symbol()) throw ParseError("expected a symbol", e.loc);
        const auto& n = e.text;
        if (kReserved.count(n)) throw ParseError("reserved word '" + n + "'", e.loc);
        if (n.find('!') != std::string::npos) throw ParseError("'!' is reserved in symbol '" + n + "'", e.loc);
        if (declared_.count(n)) throw ParseError("duplicate declaration of '" + n + "'", e.loc);
        declared_.insert(n);
    }

    std::string sort_ref(const SExpr& e) {
        if (!e.is_symbol()) throw ParseError("expected a sort", e.loc);
        if (e.text == "Bool") return "Bool";
        if (!vocab_.has_sort(e.text)) throw located_sort_error("unknown sort '" + e.text + "'", e.loc);
        return e.text;
    }

    void declare_sort(const SExpr& cmd) {
        if (cmd.items.size() < 2 || cmd.items.size() > 3) throw ParseError("malformed declare-sort", cmd.loc);
        if (cmd.items.size() == 3 && !(cmd.items[2].is_numeral() && cmd.items[2].text == "0"))
            throw ParseError("only arity-0 sorts are supported", cmd.items[2].loc);
        fresh_symbol(cmd.items[1]);
        vocab_.sorts.push_back(cmd.items[1].text);
    }

    void declare_const(const SExpr& cmd) {
        if (cmd.items.size() != 3) throw ParseError("malformed declare-const", cmd.loc);
        declare(cmd.items[1], {}, cmd.items[2]);
    }

    void declare_fun(const SExpr& cmd) {
        if (cmd.items.size() != 4 || !cmd.items[2].is_list()) throw ParseError("malformed declare-fun", cmd.loc);
        declare(cmd.items[1], cmd.items[2].items, cmd.items[3]);
    }

    void declare(const SExpr& name, const std::vector<SExpr>& args, const SExpr& range) {
        std::vector<std::string> as;
        for (auto& a : args) {
            auto s = sort_ref(a);
            if (s == "Bool") throw ParseError("Bool arguments are not supported", a.loc);
            as.push_back(s);
        }
        auto r = sort_ref(range);
        fresh_symbol(name);
        if (r == "Bool")
            vocab_.relations[name.text] = as;
        else if (as.empty())
            vocab_.constants[name.text] = r;
        else
            vocab_.functions[name.text] = FunctionSig{as, r};
    }

    void set_info(const SExpr& cmd) {
        if (cmd.items.size() != 3 || cmd.items[1].kind != SExpr::Kind::Keyword) return;
        const auto& k = cmd.items[1].text;
        const auto& v = cmd.items[2];
        if (k == ":needle-order") {
            if (!v.is_symbol()) throw ParseError("expected a relation symbol", v.loc);
            order_ = v.text;
            order_loc_ = v.loc;
        } else if (k == ":needle-infinite-sort") {
            if (!v.is_symbol()) throw ParseError("expected a sort", v.loc);
            infinite_.emplace_back(v.text, v.loc);
        } else if (k == ":needle-auto-order") {
            if (v.is_symbol("true")) auto_order_ = true;
            else if (v.is_symbol("false")) auto_order_ = false;
            else throw ParseError("expected true or false", v.loc);
            if (order_loc_.line == 0) order_loc_ = v.loc;
        }
    }

    void collect_symbols(const SExpr& e) {
        if (e.is_symbol()) seen_.insert(e.text);
        for (auto& i : e.items) collect_symbols(i);
    }

    // renamed apart from declarations, earlier binders and every symbol in the input
    std::string bind(const std::string& n) {
        std::string name = n;
        for (int k = 1; declared_.count(name) || bound_.count(name) || (name != n && seen_.count(name)); ++k)
            name = n + "!" + std::to_string(k);
        bound_.insert(name);
        return name;
    }

    Term term(const SExpr& e, const std::map<std::string, std::pair<std::string, std::string>>& env) {
        if (e.is_symbol()) {
            if (auto it = env.find(e.text); it != env.end()) return Term::var(it->second.first, it->second.second);
            if (auto it = vocab_.constants.find(e.text); it != vocab_.constants.end())
                return Term::constant(e.text, it->second);
            throw located_sort_error("unknown symbol '" + e.text + "'", e.loc);
        }
        if (!e.is_list() || e.items.size() < 2 || !e.items[0].is_symbol())
            throw ParseError("malformed term " + e.str(), e.loc);
        const auto& f = e.items[0].text;
        auto it = vocab_.functions.find(f);
        if (it == vocab_.functions.end()) throw ParseError("unknown function '" + f + "'", e.items[0].loc);
        const auto& sig = it->second;
        if (sig.args.size() + 1 != e.items.size()) throw ParseError("arity mismatch for '" + f + "'", e.loc);
        std::vector<Term> args;
        for (size_t i = 1; i < e.items.size(); ++i) {
            args.push_back(term(e.items[i], env));
            if (args.back().sort != sig.args[i - 1])
                throw located_sort_error("sort mismatch: argument " + std::to_string(i) + " of '" + f + "' expects " +
                                     sig.args[i - 1] + ", got " + args.back().sort,
                                 e.items[i].loc);
        }
        return Term::app(f, sig.range, std::move(args));
    }

    bool is_formula_expr(const SExpr& e, const std::map<std::string, std::pair<std::string, std::string>>& env) {
        if (e.is_symbol()) {
            if (e.text == "true" || e.text == "false") return true;
            if (env.count(e.text)) return false;
            return vocab_.relations.count(e.text) > 0;
        }
        if (!e.is_list() || e.items.empty() || !e.items[0].is_symbol()) return false;
        const auto& h = e.items[0].text;
        static const std::set<std::string> ops = {"not", "and", "or", "=>", "=", "distinct", "forall", "exists", "!"};
        return ops.count(h) || vocab_.relations.count(h);
    }

    Formula formula(const SExpr& e, const std::map<std::string, std::pair<std::string, std::string>>& env) {
        Formula r = formula_inner(e, env);
        if (r.loc.line == 0) r.loc = e.loc;
        return r;
    }

    Formula formula_inner(const SExpr& e, const std::map<std::string, std::pair<std::string, std::string>>& env) {
        if (e.is_symbol("true")) return Formula::top();
        if (e.is_symbol("false")) return Formula::bot();
        if (e.is_symbol()) {
            auto it = vocab_.relations.find(e.text);
            if (it == vocab_.relations.end()) throw located_sort_error("unknown symbol '" + e.text + "'", e.loc);
            if (!it->second.empty()) throw ParseError("arity mismatch for '" + e.text + "'", e.loc);
            Formula f = Formula::rel(e.text, {});
            f.loc = e.loc;
            return f;
        }
        if (!e.is_list() || e.items.empty() || !e.items[0].is_symbol())
            throw ParseError("malformed formula " + e.str(), e.loc);
        const auto& h = e.items[0].text;
        size_t n = e.items.size() - 1;
        auto kid = [&](size_t i) { return formula(e.items[i], env); };
        Formula out;
        if (h == "not") {
            if (n != 1) throw ParseError("not takes one argument", e.loc);
            out = Formula::negate(kid(1));
        } else if (h == "and" || h == "or") {
            std::vector<Formula> ks;
            for (size_t i = 1; i <= n; ++i) ks.push_back(kid(i));
            out = h == "and" ? Formula::conj(std::move(ks)) : Formula::disj(std::move(ks));
        } else if (h == "=>") {
            if (n < 2) throw ParseError("=> takes at least two arguments", e.loc);
            out = kid(n);
            for (size_t i = n - 1; i >= 1; --i) out = Formula::implies(kid(i), std::move(out));
        } else if (h == "=" || h == "distinct") {
            if (n < 2) throw ParseError(h + " takes at least two arguments", e.loc);
            if (h == "distinct" && n != 2) throw ParseError("distinct takes two arguments", e.loc);
            bool boolean = is_formula_expr(e.items[1], env);
            std::vector<Formula> chain;
            for (size_t i = 1; i < n; ++i) {
                Formula link;
                if (boolean) {
                    link = Formula::iff(kid(i), kid(i + 1));
                } else {
                    Term a = term(e.items[i], env), b = term(e.items[i + 1], env);
                    if (a.sort != b.sort)
                        throw located_sort_error("sort mismatch: equality between " + a.sort + " and " + b.sort, e.loc);
                    link = Formula::eq(std::move(a), std::move(b));
                }
                link.loc = e.loc;
                chain.push_back(std::move(link));
            }
            out = chain.size() == 1 ? chain[0] : Formula::conj(chain);
            if (h == "distinct") out = Formula::negate(out);
        } else if (h == "forall" || h == "exists") {
            if (n != 2 || !e.items[1].is_list() || e.items[1].items.empty())
                throw ParseError("malformed quantifier", e.loc);
            auto inner = env;
            std::vector<std::pair<std::string, std::string>> vs;
            for (auto& b : e.items[1].items) {
                if (!b.is_list() || b.items.size() != 2 || !b.items[0].is_symbol())
                    throw ParseError("malformed binder", b.loc);
                const auto& vn = b.items[0].text;
                if (kReserved.count(vn))
                    throw ParseError("reserved variable name '" + vn + "'", b.loc);
                auto s = sort_ref(b.items[1]);
                if (s == "Bool") throw ParseError("Bool variables are not supported", b.loc);
                auto fresh = bind(vn);
                inner[vn] = {fresh, s};
                vs.emplace_back(fresh, s);
            }
            Formula body = formula(e.items[2], inner);
            for (auto it = vs.rbegin(); it != vs.rend(); ++it) {
                body = h == "forall" ? Formula::forall(it->first, it->second, std::move(body))
                                     : Formula::exists(it->first, it->second, std::move(body));
                body.loc = e.loc;
            }
            return body;
        } else if (h == "!") {
            if (n < 1) throw ParseError("malformed annotation", e.loc);
            return kid(1);
        } else {
            auto it = vocab_.relations.find(h);
            if (it == vocab_.relations.end()) {
                if (vocab_.functions.count(h) || vocab_.constants.count(h))
                    throw located_sort_error("sort mismatch: '" + h + "' is not a relation", e.items[0].loc);
                throw located_sort_error("unknown symbol '" + h + "'", e.items[0].loc);
            }
            if (it->second.size() != n) throw ParseError("arity mismatch for '" + h + "'", e.loc);
            std::vector<Term> args;
            for (size_t i = 1; i <= n; ++i) {
                args.push_back(term(e.items[i], env));
                if (args.back().sort != it->second[i - 1])
                    throw located_sort_error("sort mismatch: argument " + std::to_string(i) + " of '" + h + "' expects " +
                                         it->second[i - 1] + ", got " + args.back().sort,
                                     e.items[i].loc);
            }
            out = Formula::rel(h, std::move(args));
        }
        out.loc = e.loc;
        return out;
    }

    Vocabulary vocab_;
    std::set<std::string> declared_;
    std::set<std::string> bound_;
    std::set<std::string> seen_;
    std::optional<std::string> order_;
    SourceLoc order_loc_;
    std::vector<std::pair<std::string, SourceLoc>> infinite_;
    bool auto_order_ = false;
};

}  // namespace

Problem parse_problem(std::string_view text) { return ProblemParser().run(text); }

void add_order_axioms(Problem& p, const std::string& rel) {
    auto it = p.vocab.relations.find(rel);
    if (it == p.vocab.relations.end() || it->second.size() != 2 || it->second[0] != it->second[1])
        throw SortError("order relation " + rel + " must be a binary relation over one sort");
    p.vocab.order_relation = rel;
    // pick a stem that no bound variable starts with
    std::set<std::string> names;
    for (auto& b : bound_vars(p.assertion)) names.insert(b);
    std::string stem = "o";
    auto clash = [&](const std::string& s) {
        for (auto& n : names)
            if (n.rfind(s + "!", 0) == 0) return true;
        return false;
    };
    for (int k = 0; clash(stem); ++k) stem = "o" + std::to_string(k);
    auto ax = order_axioms(rel, it->second[0], stem);
    std::vector<Formula> parts = ax;
    parts.push_back(p.assertion);
    p.assertion = Formula::conj(std::move(parts));
    p.auto_order = true;
}

}  // namespace needle
