#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "needle/lia.hpp"

namespace needle {

struct SolverConfig {
    std::string executable;         // empty: $NEEDLE_SOLVER, then "z3"
    std::vector<std::string> args;  // empty: derived from executable name
    std::chrono::milliseconds timeout{60000};
    std::string logic = "ALL";
    std::optional<unsigned> seed;  // sent as :random-seed

    static SolverConfig from_env();
    std::string resolved_executable() const;
    std::vector<std::string> resolved_args() const;
};

struct SolverLaunchError : Error {
    using Error::Error;
};
struct SolverOutputError : Error {
    using Error::Error;
};

using Value = std::variant<Int, bool>;
using Model = std::map<std::string, Value>;

struct SatResult {
    enum class Status { Sat, Unsat, Unknown, Timeout };
    Status status = Status::Unknown;
    Model model;
    std::string reason;  // unknown reason / stderr excerpt
    std::chrono::milliseconds elapsed{0};

    bool sat() const { return status == Status::Sat; }
    bool unsat() const { return status == Status::Unsat; }
    bool undetermined() const { return status == Status::Unknown || status == Status::Timeout; }
};

const char* to_string(SatResult::Status s);

// Runs one solver process on `script` (without check-sat), asks for the values of `wanted`.
SatResult check(const SolverConfig& cfg, const std::string& script, const std::vector<std::string>& wanted = {});
// convenience: emit + check
SatResult check_formula(const SolverConfig& cfg, const LiaFormula& f, const std::vector<std::string>& wanted = {});

// parses a get-value response: ((x 3) (|y!lia| (- 7)) (g true))
Model parse_values(const std::string& text);

// process-wide counters, for reporting
struct SolverStats {
    long calls = 0;
    long sat = 0, unsat = 0, unknown = 0, timeout = 0;
};
SolverStats solver_stats();

}  // namespace needle
