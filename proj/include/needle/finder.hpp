#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "needle/fol.hpp"
#include "needle/lia.hpp"
#include "needle/modelcheck.hpp"
#include "needle/solver.hpp"
#include "needle/structure.hpp"

namespace needle {

struct SortSize {
    int regular = 0;
    int summary = 0;
    bool operator==(const SortSize& o) const { return regular == o.regular && summary == o.summary; }
};
using SizeVector = std::vector<std::pair<std::string, SortSize>>;  // vocabulary sort order

std::string to_string(const SizeVector& v);  // "round=1/1,value=2/0"
// "round=1/1,value=2" (missing summary count means 0); sorts not mentioned default to 1/0
SizeVector parse_size_vector(const std::string& text, const Vocabulary& v);
int total_nodes(const SizeVector& v);

// Candidate family over a fixed node set. Template variables are any LIA variables
// other than x, x1, x2, ...; each gets one integer parameter per context.
struct Template {
    std::vector<std::string> sorts;
    std::vector<Node> nodes;
    std::vector<LiaFormula> bound_candidates;
    std::map<std::string, std::vector<LiaTerm>> function_candidates;
    std::map<std::string, std::vector<LiaFormula>> relation_candidates;
    // a candidate mentioning x_i is only admitted where argument node i is a summary node
    bool summary_args_only = true;

    std::vector<std::string> nodes_of(const std::string& sort) const;
    const Node& node(const std::string& id) const;
    int node_index(const std::string& id) const;
    std::vector<size_t> function_candidates_for(const std::string& f, const NodeTuple& args) const;
    std::vector<size_t> relation_candidates_for(const std::string& r, const NodeTuple& args) const;
};

std::vector<Node> template_nodes(const SizeVector& sizes);
// throws Error for unknown functions or terms over variables other than x1..x_arity
void check_extra_terms(const Vocabulary& v, const std::map<std::string, std::vector<LiaTerm>>& extra);
Template heuristic_template(const Vocabulary& v, const SizeVector& sizes,
                            const std::map<std::string, std::vector<LiaTerm>>& extra_fn_terms = {});
// {"sizes": "...", "bounds": [...], "functions": {f: [...]}, "relations": {R: [...]}}
Template template_from_json(const std::string& text, const Vocabulary& v);
std::string to_json(const Template& t);

bool is_structure_var(const std::string& name);  // x, x1, x2, ...

struct FinderOptions {
    bool symmetry_breaking = true;
    bool order_optimization = true;
    bool validate_result = true;
    size_t literal_product_limit = 64;  // above this an atom uses the compact encoding
    SolverConfig solver;
};

struct InternalConsistencyError : Error {
    using Error::Error;
};
struct ReverificationError : Error {
    using Error::Error;
};

// A choice point: one of `options` is selected by a Boolean guard (none needed for a single option).
struct Slot {
    enum class Kind { Bound, Constant, Function, Relation, Assignment } kind;
    std::string symbol;  // node id for bounds
    NodeTuple args;
    struct Option {
        std::string node;  // image node (function/constant)
        size_t candidate = 0;
        std::string guard;  // empty when the slot has one option
    };
    std::vector<Option> options;
    std::map<std::string, std::string> params;  // template var -> integer parameter
};

struct Encoding {
    LiaFormula finder;
    LiaFormula aux;
    Template tmpl;
    std::vector<Slot> slots;
    std::map<std::string, size_t> slot_index;  // key -> slots[]
    std::vector<std::map<std::string, std::string>> assignments;  // free variable -> node, per assignment slot option
    std::map<std::string, std::string> free_var_sorts;
    std::string order_relation;  // non-empty when the derived orientation is used
    std::vector<std::string> bool_vars, int_vars;

    LiaFormula query() const { return mk_and({finder, aux}); }
    std::vector<std::string> wanted() const;
};

Encoding encode(const Formula& f, const Vocabulary& v, const Template& t, const FinderOptions& opt = {});

struct Decoded {
    SymbolicStructure structure;
    ExplicitAssignment assignment;
};
Decoded decode(const Encoding& e, const Model& m);

struct FinderOutcome {
    enum class Kind { Found, NoneInFamily, Undetermined } kind = Kind::Undetermined;
    std::optional<SymbolicStructure> structure;
    ExplicitAssignment assignment;
    std::string reason;
    std::chrono::milliseconds elapsed{0};
};
const char* to_string(FinderOutcome::Kind k);

FinderOutcome find(const Formula& f, const Vocabulary& v, const Template& t, const FinderOptions& opt = {});

struct FinderStats {
    long found = 0;
    long reverify_failures = 0;
};
FinderStats finder_stats();

// ---- size enumeration

// every size vector up to max_total, in enumeration order
std::vector<SizeVector> size_vectors(const Problem& p, int max_total);

struct SearchCaps {
    int max_total_nodes = 6;
    std::chrono::milliseconds budget{0};  // 0: none
    int jobs = 1;
};

struct SearchLogEntry {
    SizeVector sizes;
    std::string outcome;  // found / none / undetermined / skipped
    std::string reason;
    std::chrono::milliseconds elapsed{0};
};

struct SearchResult {
    enum class Kind { Found, Exhausted, Undetermined } kind = Kind::Exhausted;
    std::optional<SymbolicStructure> structure;
    ExplicitAssignment assignment;
    std::optional<SizeVector> sizes;
    std::vector<SearchLogEntry> log;
};
const char* to_string(SearchResult::Kind k);
std::string log_to_json(const std::vector<SearchLogEntry>& log);

SearchResult enumerate_find(const Problem& p, const SearchCaps& caps, const FinderOptions& opt = {},
                            const std::map<std::string, std::vector<LiaTerm>>& extra_fn_terms = {});

}  // namespace needle
