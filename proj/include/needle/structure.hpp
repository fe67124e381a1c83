#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "needle/fol.hpp"
#include "needle/lia.hpp"
#include "needle/solver.hpp"

namespace needle {

enum class NodeKind { Regular, Summary };

struct Node {
    std::string id;
    std::string sort;
    NodeKind kind = NodeKind::Regular;
};

// an element <n, z> of the explication
struct Element {
    std::string node;
    Int index = 0;
    bool operator==(const Element& o) const { return node == o.node && index == o.index; }
    bool operator<(const Element& o) const { return node != o.node ? node < o.node : index < o.index; }
};

struct FunctionImage {
    std::string node;
    LiaTerm term;  // over x1..xk
};

using NodeTuple = std::vector<std::string>;

// Symbolic structure: nodes with LIA bounds over `x`, constants to explicit elements,
// function entries <n, s(x1..xk)>, relation entries as LIA formulas over x1..xk.
// Missing relation entries read as false.
struct SymbolicStructure {
    std::vector<std::string> sorts;
    std::vector<Node> nodes;
    std::map<std::string, LiaFormula> bounds;
    std::map<std::string, Element> constants;
    std::map<std::string, std::map<NodeTuple, FunctionImage>> functions;
    std::map<std::string, std::map<NodeTuple, LiaFormula>> relations;

    const Node& node(const std::string& id) const;
    bool has_node(const std::string& id) const;
    std::vector<std::string> nodes_of(const std::string& sort) const;
    const LiaFormula& bound(const std::string& id) const;
    LiaFormula relation(const std::string& sym, const NodeTuple& args) const;
    const FunctionImage& function(const std::string& sym, const NodeTuple& args) const;

    bool operator==(const SymbolicStructure& o) const;
};

// "x", "x1".."xk"
std::string bound_var();
std::string arg_var(size_t i);  // 1-based
LiaFormula regular_bound();      // x = 0
bool is_regular_bound(const LiaFormula& f);

// all argument node tuples for a signature, in lexicographic node order
std::vector<NodeTuple> node_tuples(const SymbolicStructure& s, const std::vector<std::string>& sorts);

struct ValidationIssue {
    std::string condition;  // e.g. "function-entailment"
    std::string entry;      // e.g. "prev(beta)"
    std::string message;
    bool undetermined = false;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
    bool undetermined() const;
    std::string summary() const;
};

ValidationReport validate(const SymbolicStructure& s, const Vocabulary& v, const SolverConfig& cfg);

// element denoted by a ground term
Element eval_ground_term(const SymbolicStructure& s, const Term& t);

std::vector<Element> explication_window(const SymbolicStructure& s, const std::string& node, Int lo, Int hi);

// ---- finite structures

struct FiniteStructure {
    std::map<std::string, std::vector<std::string>> domain;  // sort -> element names
    std::map<std::string, std::string> constants;
    std::map<std::string, std::map<std::vector<std::string>, std::string>> functions;
    std::map<std::string, std::set<std::vector<std::string>>> relations;
};

// requires every node regular
FiniteStructure explicate_finite(const SymbolicStructure& s);
// all-regular symbolic encoding of a finite structure (node id = element name)
SymbolicStructure symbolic_from_finite(const FiniteStructure& m, const Vocabulary& v);

// ---- serialization

std::string to_json(const SymbolicStructure& s, int indent = 2);
SymbolicStructure structure_from_json(const std::string& text);
std::string to_dot(const SymbolicStructure& s);
std::string to_text(const SymbolicStructure& s);

}  // namespace needle
