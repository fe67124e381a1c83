#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "needle/sexpr.hpp"

namespace needle {

struct FunctionSig {
    std::vector<std::string> args;
    std::string range;
};

struct SortError : Error {
    using Error::Error;
};

struct Vocabulary {
    std::vector<std::string> sorts;  // declaration order
    std::map<std::string, std::string> constants;
    std::map<std::string, FunctionSig> functions;
    std::map<std::string, std::vector<std::string>> relations;
    std::optional<std::string> order_relation;
    std::set<std::string> infinite_sorts;

    enum class SymbolKind { None, Constant, Function, Relation };
    SymbolKind kind_of(const std::string& sym) const;
    bool has_sort(const std::string& s) const;
    int sort_index(const std::string& s) const;
    // throws SortError on a broken invariant
    void check() const;
};

struct Term {
    enum class Kind { Var, Const, App };
    Kind kind = Kind::Var;
    std::string name;
    std::string sort;  // variable sort / constant sort / function range
    std::vector<Term> args;

    static Term var(std::string n, std::string s);
    static Term constant(std::string n, std::string s);
    static Term app(std::string f, std::string range, std::vector<Term> args);
    bool operator==(const Term& o) const;
    bool operator<(const Term& o) const;
    bool is_ground() const;
};

struct Formula {
    enum class Kind { True, False, Rel, Eq, Not, And, Or, Implies, Iff, Forall, Exists };
    Kind kind = Kind::True;
    std::string name;  // relation symbol or bound variable
    std::string sort;  // bound variable sort
    std::vector<Term> terms;
    std::vector<Formula> kids;
    SourceLoc loc;

    static Formula top();
    static Formula bot();
    static Formula rel(std::string r, std::vector<Term> args);
    static Formula eq(Term a, Term b);
    static Formula negate(Formula f);
    static Formula conj(std::vector<Formula> fs);
    static Formula disj(std::vector<Formula> fs);
    static Formula implies(Formula a, Formula b);
    static Formula iff(Formula a, Formula b);
    static Formula forall(std::string v, std::string sort, Formula body);
    static Formula exists(std::string v, std::string sort, Formula body);
    static Formula forall(const std::vector<std::pair<std::string, std::string>>& vs, Formula body);
    static Formula exists(const std::vector<std::pair<std::string, std::string>>& vs, Formula body);

    bool is_quantifier() const { return kind == Kind::Forall || kind == Kind::Exists; }
    // structural, ignores source locations
    bool operator==(const Formula& o) const;
};

std::set<std::string> free_vars(const Term& t);
std::map<std::string, std::string> free_vars(const Formula& f);  // name -> sort
bool is_closed(const Formula& f);
// all bound variable names, in pre-order
std::vector<std::string> bound_vars(const Formula& f);
std::set<std::string> symbols_used(const Formula& f);

Term substitute(const Term& t, const std::map<std::string, Term>& m);
// bound variables are assumed distinct from the substituted terms' variables
Formula substitute(const Formula& f, const std::map<std::string, Term>& m);

std::string to_smtlib(const Term& t);
std::string to_smtlib(const Formula& f);

// sort-checks terms and formulas against the vocabulary
void check_sorts(const Formula& f, const Vocabulary& v);

struct Problem {
    Vocabulary vocab;
    Formula assertion;
    bool auto_order = false;          // A_prec conjoined automatically
    bool infinite_sorts_explicit = false;
};

// SMT-LIB2 subset with needle metadata; throws ParseError / SortError
Problem parse_problem(std::string_view text);
// designate the order relation and conjoin its axioms
void add_order_axioms(Problem& p, const std::string& rel);

}  // namespace needle
