#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "needle/fol.hpp"

namespace needle {

// A <-> B  ==>  (A -> B) & (B -> A)
Formula eliminate_iff(const Formula& f);
// negation normal form: only True/False/Rel/Eq, their negations, And, Or, quantifiers
Formula to_nnf(const Formula& f);
bool is_nnf(const Formula& f);

// pushes quantifiers inward over a NNF formula (commuting same-kind quantifiers)
Formula miniscope(const Formula& f);

struct SkolemResult {
    Formula formula;
    Vocabulary vocab;
    std::vector<std::string> new_symbols;  // in creation order
};
// input in NNF; each existential becomes a fresh symbol |sk!n| over the enclosing
// universals that occur free in its body
SkolemResult skolemize(const Formula& nnf, const Vocabulary& v);

struct QaEdge {
    std::string from, to;
    enum class Origin { Function, Quantifier } origin;
    std::string detail;  // function symbol or "forall x ... exists y"
    SourceLoc loc;
};

struct QaGraph {
    std::vector<std::string> sorts;
    std::vector<QaEdge> edges;

    bool has_edge(const std::string& a, const std::string& b) const;
    bool has_self_loop(const std::string& s) const;
    // sorts lying on some cycle (self-loops included)
    std::set<std::string> cyclic_sorts() const;
    // edges lying on a cycle
    std::vector<QaEdge> cycle_edges() const;
};

// function-signature edges for symbols of `v` plus forall/exists edges of NNF(f)
QaGraph qa_graph(const Formula& f, const Vocabulary& v);

// ground terms of `sort` occurring in f
std::set<Term> syntactic_ground_terms(const Formula& f, const std::string& sort);
// all ground terms of a sort built from symbols of `v` whose sorts avoid `exclude`;
// throws Error once more than `cap` terms exist
std::set<Term> herbrand_terms(const Vocabulary& v, const std::string& sort, const std::string& exclude, size_t cap = 100000);

enum class OrderAxiom { AntiReflexive, Transitive, Linear };
// fresh variable names are derived from `stem`
std::vector<Formula> order_axioms(const std::string& rel, const std::string& sort, const std::string& stem = "o");
// recognizes the axiom shapes up to variable renaming and operand order
std::optional<OrderAxiom> match_order_axiom(const Formula& f, const std::string& rel);
// top-level conjuncts (flattened And)
std::vector<Formula> conjuncts(const Formula& f);

// default for Problem::vocab.infinite_sorts
std::set<std::string> default_infinite_sorts(const Formula& f, const Vocabulary& v);

}  // namespace needle
