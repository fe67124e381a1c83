#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "needle/finder.hpp"
#include "needle/fol.hpp"

namespace needle {

using BigInt = boost::multiprecision::cpp_int;

struct OscViolation {
    int condition = 0;  // 1..5
    SourceLoc loc;
    std::string explanation;
};

struct OscReport {
    bool member = false;
    std::optional<std::string> sort;            // designated infinite sort
    std::optional<std::string> order_relation;  // designated order
    bool order_axioms_present = false;
    bool literal_single_variable = false;  // one variable name of the infinite sort overall
    std::vector<OscViolation> violations;
};

OscReport check_membership(const Problem& p);
std::string to_json(const OscReport& r);

struct OscBounds {
    std::optional<std::string> sort;
    std::map<std::string, long> ground_terms;  // per sort, step-2 closure for the infinite sort
    long ell = 0;
    long m = 0;
    std::map<std::string, long> regular_cap;
    BigInt bell;  // b(ell + 1)
    BigInt summary_cap;
    long k_lo = 0, k_hi = 0;
};

struct NotInFragment : Error {
    using Error::Error;
};

// throws NotInFragment for non-members
OscBounds compute_bounds(const Problem& p);
std::string to_json(const OscBounds& b);

BigInt ordered_bell(unsigned n);

// one template of the restricted family at the given sizes
Template osc_template(const Problem& p, const OscBounds& b, const SizeVector& sizes);
// size vectors within the caps, smallest total first; stops after `limit` entries
std::vector<SizeVector> osc_size_vectors(const Problem& p, const OscBounds& b, int max_total_nodes,
                                         size_t limit = 1000000);
// whether every vector within the bounds has total at most max_total_nodes
bool osc_caps_cover(const Problem& p, const OscBounds& b, int max_total_nodes);

struct DecideCaps {
    int max_total_nodes = 8;
    long max_solver_calls = 0;             // 0: unlimited
    std::chrono::milliseconds budget{0};  // 0: unlimited
};

struct DecideResult {
    enum class Kind { Sat, Unsat, ResourceExhausted } kind = Kind::ResourceExhausted;
    std::optional<SymbolicStructure> structure;
    std::optional<SizeVector> sizes;
    OscBounds bounds;
    long templates_tried = 0;
    long templates_total = 0;  // within max_total_nodes
    std::string reason;
    std::vector<SearchLogEntry> log;
};
const char* to_string(DecideResult::Kind k);

// throws NotInFragment for non-members
DecideResult decide(const Problem& p, const DecideCaps& caps, const FinderOptions& opt = {});

// true when every ingredient of s is a shape of the restricted family
bool uses_osc_shapes(const SymbolicStructure& s, const Problem& p, const OscBounds& b);

}  // namespace needle
