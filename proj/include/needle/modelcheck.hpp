#pragma once

#include <map>
#include <string>

#include "needle/fol.hpp"
#include "needle/lia.hpp"
#include "needle/solver.hpp"
#include "needle/structure.hpp"

namespace needle {

// <n, s>: node plus LIA term over the residual variables
struct TermImage {
    std::string node;
    LiaTerm term;
};

using SymbolicAssignment = std::map<std::string, TermImage>;
using ExplicitAssignment = std::map<std::string, Element>;

// LIA variable standing for the index of FOL variable v
std::string lia_var(const std::string& v);

struct Symbolized {
    SymbolicAssignment symbolic;
    IntEnv residual;
};
Symbolized symbolize(const ExplicitAssignment& a);

TermImage sym_eval(const SymbolicStructure& s, const SymbolicAssignment& v, const Term& t);

struct TransOptions {
    // regular nodes bind the variable to <n, 0> instead of a quantified index
    bool regular_simplification = false;
};

// f must be free of <->; free variables of f must be bound by v
LiaFormula trans(const SymbolicStructure& s, const SymbolicAssignment& v, const Formula& f,
                 const TransOptions& opt = {});

enum class Truth { True, False, Undetermined };
const char* to_string(Truth t);

struct ModelCheckResult {
    Truth truth = Truth::Undetermined;
    std::string reason;
    std::string script;  // emitted query
};

ModelCheckResult model_check(const SymbolicStructure& s, const Formula& f, const SolverConfig& cfg,
                             const ExplicitAssignment& a = {}, const TransOptions& opt = {});

// Tarskian evaluation; assignment maps variables to element names
bool eval_finite(const FiniteStructure& m, const Formula& f, const std::map<std::string, std::string>& a = {});
std::string eval_finite_term(const FiniteStructure& m, const Term& t, const std::map<std::string, std::string>& a);

}  // namespace needle
