#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "needle/sexpr.hpp"

namespace needle {

using Int = std::int64_t;

struct LiaFormula;

// Linear integer term. Mul/Div carry a literal factor in `value`.
// Ite is internal to the finder encoding (args: then, else).
struct LiaTerm {
    enum class Kind { Lit, Var, Add, Sub, Mul, Div, Ite };
    Kind kind = Kind::Lit;
    Int value = 0;
    std::string name;
    std::vector<LiaTerm> args;
    std::shared_ptr<const LiaFormula> cond;

    static LiaTerm lit(Int v);
    static LiaTerm var(std::string n);
    static LiaTerm add(LiaTerm a, LiaTerm b);
    static LiaTerm sub(LiaTerm a, LiaTerm b);
    static LiaTerm mul(Int k, LiaTerm t);
    static LiaTerm div(LiaTerm t, Int k);
    static LiaTerm ite(LiaFormula c, LiaTerm a, LiaTerm b);

    bool operator==(const LiaTerm& o) const;
};

enum class Cmp { Lt, Le, Eq, Ge, Gt };

struct LiaFormula {
    enum class Kind { True, False, Compare, Congruent, BoolVar, Not, And, Or, Implies, Forall, Exists };
    Kind kind = Kind::True;
    Cmp cmp = Cmp::Eq;
    std::vector<LiaTerm> terms;  // Compare: lhs, rhs; Congruent: t (t mod modulus == value)
    Int modulus = 0;
    Int residue = 0;
    std::string name;  // BoolVar name, quantified variable
    std::vector<LiaFormula> kids;

    static LiaFormula top();
    static LiaFormula bot();
    static LiaFormula compare(Cmp c, LiaTerm a, LiaTerm b);
    static LiaFormula congruent(LiaTerm t, Int modulus, Int residue);
    static LiaFormula boolvar(std::string n);
    // raw constructors keep the shape exactly as given
    static LiaFormula negate(LiaFormula f);
    static LiaFormula conj(std::vector<LiaFormula> fs);
    static LiaFormula disj(std::vector<LiaFormula> fs);
    static LiaFormula implies(LiaFormula a, LiaFormula b);
    static LiaFormula forall(std::string v, LiaFormula body);
    static LiaFormula exists(std::string v, LiaFormula body);

    bool operator==(const LiaFormula& o) const;
};

// shorthand
inline LiaFormula lia_lt(LiaTerm a, LiaTerm b) { return LiaFormula::compare(Cmp::Lt, std::move(a), std::move(b)); }
inline LiaFormula lia_le(LiaTerm a, LiaTerm b) { return LiaFormula::compare(Cmp::Le, std::move(a), std::move(b)); }
inline LiaFormula lia_eq(LiaTerm a, LiaTerm b) { return LiaFormula::compare(Cmp::Eq, std::move(a), std::move(b)); }
inline LiaFormula lia_ge(LiaTerm a, LiaTerm b) { return LiaFormula::compare(Cmp::Ge, std::move(a), std::move(b)); }
inline LiaFormula lia_gt(LiaTerm a, LiaTerm b) { return LiaFormula::compare(Cmp::Gt, std::move(a), std::move(b)); }

// simplifying constructors: drop true/false units, flatten nested and/or
LiaFormula mk_not(LiaFormula f);
LiaFormula mk_and(std::vector<LiaFormula> fs);
LiaFormula mk_or(std::vector<LiaFormula> fs);
LiaFormula mk_implies(LiaFormula a, LiaFormula b);
LiaFormula mk_forall(const std::vector<std::string>& vs, LiaFormula body);
LiaFormula mk_exists(const std::vector<std::string>& vs, LiaFormula body);
LiaTerm mk_add(LiaTerm a, LiaTerm b);  // folds literals, x + 0

std::set<std::string> free_vars(const LiaTerm& t);
std::set<std::string> free_int_vars(const LiaFormula& f);
std::set<std::string> free_bool_vars(const LiaFormula& f);
bool is_quantifier_free(const LiaFormula& f);

using TermSubst = std::map<std::string, LiaTerm>;
LiaTerm substitute(const LiaTerm& t, const TermSubst& m);
// capture-avoiding: bound variables clashing with substituted terms are renamed
LiaFormula substitute(const LiaFormula& f, const TermSubst& m);

struct NeedsSolver : Error {
    using Error::Error;
};

using IntEnv = std::map<std::string, Int>;
using BoolEnv = std::map<std::string, bool>;
Int floor_div(Int a, Int k);  // SMT-LIB div
Int euclid_mod(Int a, Int k);
Int eval(const LiaTerm& t, const IntEnv& env, const BoolEnv& benv = {});
// throws NeedsSolver on quantifiers, Error on unbound variables
bool eval(const LiaFormula& f, const IntEnv& env, const BoolEnv& benv = {});

std::string to_smtlib(const LiaTerm& t);
std::string to_smtlib(const LiaFormula& f);
std::string to_infix(const LiaTerm& t);
std::string to_infix(const LiaFormula& f);

LiaTerm lia_term_from_sexpr(const SExpr& e);
LiaFormula lia_formula_from_sexpr(const SExpr& e);
LiaTerm parse_lia_term(std::string_view s);
LiaFormula parse_lia_formula(std::string_view s);

// script with logic, declarations (sorted) and one assert; no check-sat
std::string emit_smtlib(const LiaFormula& f, const std::set<std::string>& int_vars,
                        const std::set<std::string>& bool_vars, const std::string& logic = "ALL");

struct EmittedScript {
    std::set<std::string> int_vars;
    std::set<std::string> bool_vars;
    std::vector<LiaFormula> assertions;
};
EmittedScript parse_script(std::string_view text);

}  // namespace needle
