// needle: model-check, find and classify symbolic structures

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "needle/finder.hpp"
#include "needle/modelcheck.hpp"
#include "needle/osc.hpp"
#include "needle/structure.hpp"
#include "needle/transforms.hpp"

using namespace needle;
using json = nlohmann::json;

namespace {

enum Exit : int {
    kOk = 0,
    kNo = 1,
    kUndetermined = 2,
    kUsage = 64,
    kDataErr = 65,
    kNoInput = 66,
    kSoftware = 70,
    kUnavailable = 69,
};

struct UsageError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << text;
}

struct Common {
    std::string solver;
    long timeout_ms = 60000;
    std::string logic = "ALL";
    std::optional<unsigned> seed;
    std::string auto_order;
    std::string format = "json";
    std::string output;

    SolverConfig config() const {
        SolverConfig c;
        c.executable = solver;
        c.timeout = std::chrono::milliseconds(timeout_ms);
        c.logic = logic;
        c.seed = seed;
        return c;
    }
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--solver", c.solver, "SMT solver executable (default $NEEDLE_SOLVER, then z3)");
    cmd->add_option("--timeout-ms", c.timeout_ms, "per-query solver timeout")->check(CLI::PositiveNumber);
    cmd->add_option("--logic", c.logic, "logic named in emitted scripts");
    cmd->add_option("--seed", c.seed, "solver random seed");
    cmd->add_option("--auto-order", c.auto_order, "designate an order relation and add its axioms");
}

void add_output(CLI::App* cmd, Common& c) {
    cmd->add_option("--format", c.format, "structure output format")->check(CLI::IsMember({"json", "dot", "text"}));
    cmd->add_option("-o,--output", c.output, "write the structure here instead of stdout");
}

Problem load_problem(const std::string& path, const Common& c) {
    Problem p = parse_problem(slurp(path));
    if (!c.auto_order.empty() && !(p.auto_order && p.vocab.order_relation == c.auto_order)) {
        auto it = p.vocab.relations.find(c.auto_order);
        if (it == p.vocab.relations.end()) throw UsageError("--auto-order: unknown relation " + c.auto_order);
        if (it->second.size() != 2 || it->second[0] != it->second[1])
            throw UsageError("--auto-order: " + c.auto_order + " is not binary over one sort");
        add_order_axioms(p, c.auto_order);
        if (!p.infinite_sorts_explicit) p.vocab.infinite_sorts = default_infinite_sorts(p.assertion, p.vocab);
    }
    return p;
}

std::string render(const SymbolicStructure& s, const std::string& format) {
    if (format == "dot") return to_dot(s);
    if (format == "text") return to_text(s);
    return to_json(s);
}

ExplicitAssignment parse_assignments(const std::vector<std::string>& items) {
    ExplicitAssignment a;
    for (auto& it : items) {
        auto eq = it.find('=');
        if (eq == std::string::npos) throw UsageError("--assign expects var=node[:index], got " + it);
        std::string rhs = it.substr(eq + 1);
        Element e;
        auto colon = rhs.find(':');
        e.node = rhs.substr(0, colon);
        if (colon != std::string::npos) {
            try {
                e.index = std::stoll(rhs.substr(colon + 1));
            } catch (const std::exception&) {
                throw UsageError("bad index in --assign " + it);
            }
        }
        a[it.substr(0, eq)] = e;
    }
    return a;
}

std::map<std::string, std::vector<LiaTerm>> parse_extra_terms(const std::vector<std::string>& items) {
    std::map<std::string, std::vector<LiaTerm>> out;
    for (auto& it : items) {
        auto eq = it.find('=');
        if (eq == std::string::npos) throw UsageError("--extra-fn-term expects symbol=term, got " + it);
        out[it.substr(0, eq)].push_back(parse_lia_term(it.substr(eq + 1)));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"needle: symbolic structures for first-order formulas"};
    app.require_subcommand(1);

    Common c;
    std::string problem_path, structure_path, template_path, sizes, log_path;
    std::vector<std::string> assigns, extra_terms;
    bool regular_simplification = false, no_symmetry = false, no_order = false, no_validate = false;
    int max_total = 6, jobs = 1;
    long budget_ms = 0, max_calls = 0;

    auto* check_cmd = app.add_subcommand("check", "model-check a structure against a problem");
    check_cmd->add_option("problem", problem_path, "problem file (SMT-LIB)")->required();
    check_cmd->add_option("structure", structure_path, "structure file (JSON)")->required();
    check_cmd->add_option("--assign", assigns, "value for a free variable: var=node[:index]");
    check_cmd->add_flag("--regular-simplification", regular_simplification, "bind regular nodes to index 0 directly");
    add_common(check_cmd, c);

    auto* find_cmd = app.add_subcommand("find", "search for a satisfying structure");
    find_cmd->add_option("problem", problem_path, "problem file (SMT-LIB)")->required();
    find_cmd->add_option("--sizes", sizes, "one size vector, e.g. round=1/1,value=2");
    find_cmd->add_option("--template", template_path, "template file (JSON) instead of the heuristic family");
    find_cmd->add_option("--max-total-nodes", max_total, "largest total node count to enumerate")->check(CLI::PositiveNumber);
    find_cmd->add_option("--budget-ms", budget_ms, "wall-clock budget for the enumeration");
    find_cmd->add_option("--jobs", jobs, "size vectors solved concurrently")->check(CLI::PositiveNumber);
    find_cmd->add_option("--extra-fn-term", extra_terms, "extra function candidate: symbol=term");
    find_cmd->add_flag("--no-symmetry-breaking", no_symmetry);
    find_cmd->add_flag("--no-order-optimization", no_order);
    find_cmd->add_flag("--no-validate", no_validate, "skip the well-formedness check of the decoded structure");
    find_cmd->add_option("--log", log_path, "write the search log (JSON) here");
    add_common(find_cmd, c);
    add_output(find_cmd, c);

    auto* classify_cmd = app.add_subcommand("classify", "fragment membership report and bounds");
    classify_cmd->add_option("problem", problem_path, "problem file (SMT-LIB)")->required();
    add_common(classify_cmd, c);

    auto* decide_cmd = app.add_subcommand("decide", "bounded decision procedure for fragment members");
    decide_cmd->add_option("problem", problem_path, "problem file (SMT-LIB)")->required();
    decide_cmd->add_option("--max-total-nodes", max_total, "node cap for the enumerated templates")->check(CLI::PositiveNumber);
    decide_cmd->add_option("--max-solver-calls", max_calls, "cap on finder calls");
    decide_cmd->add_option("--budget-ms", budget_ms, "wall-clock budget");
    decide_cmd->add_flag("--no-symmetry-breaking", no_symmetry);
    decide_cmd->add_flag("--no-order-optimization", no_order);
    decide_cmd->add_option("--log", log_path, "write the search log (JSON) here");
    add_common(decide_cmd, c);
    add_output(decide_cmd, c);

    auto* validate_cmd = app.add_subcommand("validate", "well-formedness of a structure");
    validate_cmd->add_option("problem", problem_path, "problem file supplying the vocabulary")->required();
    validate_cmd->add_option("structure", structure_path, "structure file (JSON)")->required();
    add_common(validate_cmd, c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        Problem p = load_problem(problem_path, c);
        SolverConfig cfg = c.config();

        if (*check_cmd) {
            auto s = structure_from_json(slurp(structure_path));
            TransOptions topt;
            topt.regular_simplification = regular_simplification;
            auto rep = validate(s, p.vocab, cfg);
            if (!rep.ok() && !rep.undetermined()) {
                std::cerr << "structure is not well formed:\n" << rep.summary();
                return kNo;
            }
            auto r = model_check(s, p.assertion, cfg, parse_assignments(assigns), topt);
            std::cout << to_string(r.truth) << "\n";
            if (!r.reason.empty()) std::cerr << r.reason << "\n";
            if (rep.undetermined()) std::cerr << "note: well-formedness undetermined\n" << rep.summary();
            return r.truth == Truth::True ? kOk : r.truth == Truth::False ? kNo : kUndetermined;
        }

        if (*find_cmd) {
            FinderOptions fo;
            fo.symmetry_breaking = !no_symmetry;
            fo.order_optimization = !no_order;
            fo.validate_result = !no_validate;
            fo.solver = cfg;
            auto extra = parse_extra_terms(extra_terms);
            try {
                check_extra_terms(p.vocab, extra);
            } catch (const Error& e) {
                throw UsageError(e.what());
            }
            std::optional<SymbolicStructure> found;
            int code;
            if (!template_path.empty() || !sizes.empty()) {
                Template t;
                if (!template_path.empty()) {
                    if (!sizes.empty()) throw UsageError("--sizes and --template are exclusive");
                    t = template_from_json(slurp(template_path), p.vocab);
                } else {
                    try {
                        t = heuristic_template(p.vocab, parse_size_vector(sizes, p.vocab), extra);
                    } catch (const ParseError&) {
                        throw;
                    } catch (const Error& e) {
                        throw UsageError(e.what());
                    }
                }
                auto out = find(p.assertion, p.vocab, t, fo);
                std::cerr << to_string(out.kind) << " in " << out.elapsed.count() << " ms";
                if (!out.reason.empty()) std::cerr << " (" << out.reason << ")";
                std::cerr << "\n";
                if (!log_path.empty()) {
                    SearchLogEntry e{{}, out.kind == FinderOutcome::Kind::Found ? "found"
                                         : out.kind == FinderOutcome::Kind::NoneInFamily ? "none"
                                                                                        : "undetermined",
                                     out.reason, out.elapsed};
                    emit(log_to_json({e}), log_path);
                }
                found = out.structure;
                code = out.kind == FinderOutcome::Kind::Found ? kOk
                       : out.kind == FinderOutcome::Kind::NoneInFamily ? kNo
                                                                      : kUndetermined;
            } else {
                SearchCaps caps;
                caps.max_total_nodes = max_total;
                caps.budget = std::chrono::milliseconds(budget_ms);
                caps.jobs = jobs;
                auto res = enumerate_find(p, caps, fo, extra);
                for (auto& e : res.log) {
                    std::cerr << to_string(e.sizes) << ": " << e.outcome << " (" << e.elapsed.count() << " ms)";
                    if (!e.reason.empty()) std::cerr << " " << e.reason;
                    std::cerr << "\n";
                }
                std::cerr << to_string(res.kind) << "\n";
                if (!log_path.empty()) emit(log_to_json(res.log), log_path);
                found = res.structure;
                code = res.kind == SearchResult::Kind::Found ? kOk
                       : res.kind == SearchResult::Kind::Exhausted ? kNo
                                                                   : kUndetermined;
            }
            if (found) emit(render(*found, c.format), c.output);
            return code;
        }

        if (*classify_cmd) {
            auto rep = check_membership(p);
            json j = json::parse(to_json(rep));
            if (rep.member) j["bounds"] = json::parse(to_json(compute_bounds(p)));
            std::cout << j.dump(2) << "\n";
            return kOk;
        }

        if (*decide_cmd) {
            FinderOptions fo;
            fo.symmetry_breaking = !no_symmetry;
            fo.order_optimization = !no_order;
            fo.solver = cfg;
            DecideCaps caps;
            caps.max_total_nodes = max_total;
            caps.max_solver_calls = max_calls;
            caps.budget = std::chrono::milliseconds(budget_ms);
            auto res = decide(p, caps, fo);
            std::cerr << "templates tried " << res.templates_tried << " of " << res.templates_total
                      << " within the node cap; summary cap " << res.bounds.summary_cap.str() << "\n";
            if (!res.reason.empty()) std::cerr << res.reason << "\n";
            if (!log_path.empty()) emit(log_to_json(res.log), log_path);
            std::cout << to_string(res.kind) << "\n";
            if (res.structure) emit(render(*res.structure, c.format), c.output);
            return res.kind == DecideResult::Kind::Sat ? kOk : res.kind == DecideResult::Kind::Unsat ? kNo : kUndetermined;
        }

        if (*validate_cmd) {
            auto s = structure_from_json(slurp(structure_path));
            auto rep = validate(s, p.vocab, cfg);
            std::cout << rep.summary();
            return rep.ok() ? kOk : rep.undetermined() ? kUndetermined : kNo;
        }
    } catch (const UsageError& e) {
        std::cerr << "needle: " << e.what() << "\n";
        return kUsage;
    } catch (const IoError& e) {
        std::cerr << "needle: " << e.what() << "\n";
        return kNoInput;
    } catch (const SolverOutputError& e) {
        std::cerr << "needle: " << e.what() << "\n";
        return kUnavailable;
    } catch (const SolverLaunchError& e) {
        std::cerr << "needle: " << e.what() << "\n";
        return kUnavailable;
    } catch (const InternalConsistencyError& e) {
        std::cerr << "needle: internal error: " << e.what() << "\n";
        return kSoftware;
    } catch (const ReverificationError& e) {
        std::cerr << "needle: internal error: " << e.what() << "\n";
        return kSoftware;
    } catch (const Error& e) {
        std::cerr << "needle: " << e.what() << "\n";
        return kDataErr;
    }
    return kUsage;
}
