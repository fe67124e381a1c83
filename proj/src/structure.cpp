#include "needle/structure.hpp"

#include <algorithm>
#include "json.hpp"

namespace needle {

using json = nlohmann::json;

std::string bound_var() { return "x"; }
std::string arg_var(size_t i) { return "x" + std::to_string(i); }
LiaFormula regular_bound() { return lia_eq(LiaTerm::var("x"), LiaTerm::lit(0)); }

bool is_regular_bound(const LiaFormula& f) {
    if (f.kind != LiaFormula::Kind::Compare || f.cmp != Cmp::Eq) return false;
    auto is_x = [](const LiaTerm& t) { return t.kind == LiaTerm::Kind::Var && t.name == "x"; };
    auto is_0 = [](const LiaTerm& t) { return t.kind == LiaTerm::Kind::Lit && t.value == 0; };
    return (is_x(f.terms[0]) && is_0(f.terms[1])) || (is_0(f.terms[0]) && is_x(f.terms[1]));
}

// ---- accessors

const Node& SymbolicStructure::node(const std::string& id) const {
    for (auto& n : nodes)
        if (n.id == id) return n;
    throw Error("unknown node " + id);
}

bool SymbolicStructure::has_node(const std::string& id) const {
    return std::any_of(nodes.begin(), nodes.end(), [&](const Node& n) { return n.id == id; });
}

std::vector<std::string> SymbolicStructure::nodes_of(const std::string& sort) const {
    std::vector<std::string> out;
    for (auto& n : nodes)
        if (n.sort == sort) out.push_back(n.id);
    return out;
}

const LiaFormula& SymbolicStructure::bound(const std::string& id) const {
    auto it = bounds.find(id);
    if (it == bounds.end()) throw Error("node " + id + " has no bound");
    return it->second;
}

LiaFormula SymbolicStructure::relation(const std::string& sym, const NodeTuple& args) const {
    auto it = relations.find(sym);
    if (it == relations.end()) return LiaFormula::bot();
    auto jt = it->second.find(args);
    return jt == it->second.end() ? LiaFormula::bot() : jt->second;
}

const FunctionImage& SymbolicStructure::function(const std::string& sym, const NodeTuple& args) const {
    auto it = functions.find(sym);
    if (it != functions.end()) {
        auto jt = it->second.find(args);
        if (jt != it->second.end()) return jt->second;
    }
    std::string a;
    for (auto& n : args) a += (a.empty() ? "" : ",") + n;
    throw Error("no entry for " + sym + "(" + a + ")");
}

bool SymbolicStructure::operator==(const SymbolicStructure& o) const {
    if (sorts != o.sorts || nodes.size() != o.nodes.size() || bounds != o.bounds) return false;
    for (size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].id != o.nodes[i].id || nodes[i].sort != o.nodes[i].sort || nodes[i].kind != o.nodes[i].kind)
            return false;
    if (constants != o.constants || relations != o.relations || functions.size() != o.functions.size()) return false;
    for (auto& [f, tab] : functions) {
        auto it = o.functions.find(f);
        if (it == o.functions.end() || tab.size() != it->second.size()) return false;
        for (auto& [args, img] : tab) {
            auto jt = it->second.find(args);
            if (jt == it->second.end() || jt->second.node != img.node || !(jt->second.term == img.term)) return false;
        }
    }
    return true;
}

std::vector<NodeTuple> node_tuples(const SymbolicStructure& s, const std::vector<std::string>& sorts) {
    std::vector<NodeTuple> out{{}};
    for (auto& so : sorts) {
        std::vector<NodeTuple> next;
        auto ns = s.nodes_of(so);
        for (auto& t : out)
            for (auto& n : ns) {
                auto u = t;
                u.push_back(n);
                next.push_back(std::move(u));
            }
        out = std::move(next);
    }
    return out;
}

// ---- validation

bool ValidationReport::undetermined() const {
    return !issues.empty() && std::all_of(issues.begin(), issues.end(), [](auto& i) { return i.undetermined; });
}

std::string ValidationReport::summary() const {
    if (issues.empty()) return "valid";
    std::string s;
    for (auto& i : issues)
        s += (i.undetermined ? "[undetermined] " : "[violated] ") + i.condition + " " + i.entry + ": " + i.message + "\n";
    return s;
}

namespace {

std::string entry_name(const std::string& sym, const NodeTuple& args) {
    std::string s = sym + "(";
    for (size_t i = 0; i < args.size(); ++i) s += (i ? "," : "") + args[i];
    return s + ")";
}

bool vars_within(const std::set<std::string>& vs, size_t k, bool allow_x) {
    for (auto& v : vs) {
        if (allow_x && v == "x") continue;
        bool ok = false;
        for (size_t i = 1; i <= k; ++i)
            if (v == arg_var(i)) ok = true;
        if (!ok) return false;
    }
    return true;
}

struct Entailment {
    std::string entry;
    LiaFormula premise, conclusion;  // over x1..xk
};

// rename x1..xk apart for batching
LiaFormula tag_vars(const LiaFormula& f, size_t k, size_t tag) {
    TermSubst m;
    for (size_t i = 1; i <= k; ++i) m[arg_var(i)] = LiaTerm::var(arg_var(i) + "!" + std::to_string(tag));
    m["x"] = LiaTerm::var("x!" + std::to_string(tag));
    return substitute(f, m);
}

}  // namespace

ValidationReport validate(const SymbolicStructure& s, const Vocabulary& v, const SolverConfig& cfg) {
    ValidationReport rep;
    auto issue = [&](std::string cond, std::string entry, std::string msg, bool und = false) {
        rep.issues.push_back({std::move(cond), std::move(entry), std::move(msg), und});
    };

    std::set<std::string> ids;
    for (auto& n : s.nodes) {
        if (!ids.insert(n.id).second) issue("nodes", n.id, "duplicate node id");
        if (!v.has_sort(n.sort)) issue("nodes", n.id, "unknown sort " + n.sort);
    }
    for (auto& so : v.sorts)
        if (s.nodes_of(so).empty()) issue("domain", so, "sort has no node");

    // bounds
    std::vector<std::pair<std::string, LiaFormula>> summaries;
    for (auto& n : s.nodes) {
        auto it = s.bounds.find(n.id);
        if (it == s.bounds.end()) {
            issue("bound", n.id, "missing bound");
            continue;
        }
        const auto& b = it->second;
        if (n.kind == NodeKind::Regular) {
            if (!is_regular_bound(b)) issue("bound", n.id, "regular node bound must be x = 0");
            continue;
        }
        if (!is_quantifier_free(b) || !free_bool_vars(b).empty() || !vars_within(free_int_vars(b), 0, true)) {
            issue("bound", n.id, "bound must be quantifier-free over x");
            continue;
        }
        summaries.emplace_back(n.id, b);
    }
    if (!summaries.empty()) {
        std::vector<LiaFormula> all;
        for (size_t i = 0; i < summaries.size(); ++i) all.push_back(tag_vars(summaries[i].second, 0, i));
        auto r = check_formula(cfg, mk_and(all));
        if (!r.sat()) {
            for (auto& [id, b] : summaries) {
                auto ri = check_formula(cfg, b);
                if (ri.unsat()) issue("bound", id, "bound is unsatisfiable");
                else if (ri.undetermined()) issue("bound", id, std::string("satisfiability ") + to_string(ri.status), true);
            }
        }
    }

    // constants
    for (auto& [c, so] : v.constants) {
        auto it = s.constants.find(c);
        if (it == s.constants.end()) {
            issue("constant", c, "not interpreted");
            continue;
        }
        if (!s.has_node(it->second.node)) {
            issue("constant", c, "unknown node " + it->second.node);
            continue;
        }
        if (s.node(it->second.node).sort != so) issue("constant", c, "node has the wrong sort");
        else if (s.bounds.count(it->second.node) && is_quantifier_free(s.bound(it->second.node)) &&
                 !eval(s.bound(it->second.node), {{"x", it->second.index}}))
            issue("constant", c, "index " + std::to_string(it->second.index) + " violates the node bound");
    }
    for (auto& [c, e] : s.constants)
        if (!v.constants.count(c)) issue("constant", c, "not in the vocabulary");

    // functions
    std::vector<Entailment> ents;
    for (auto& [f, sig] : v.functions) {
        auto tab_it = s.functions.find(f);
        for (auto& args : node_tuples(s, sig.args)) {
            auto name = entry_name(f, args);
            if (tab_it == s.functions.end() || !tab_it->second.count(args)) {
                issue("function-total", name, "missing entry");
                continue;
            }
            const auto& img = tab_it->second.at(args);
            if (!s.has_node(img.node) || s.node(img.node).sort != sig.range) {
                issue("function-range", name, "image node " + img.node + " is not a node of sort " + sig.range);
                continue;
            }
            if (!vars_within(free_vars(img.term), args.size(), false)) {
                issue("function-term", name, "term uses variables other than x1..xk");
                continue;
            }
            std::vector<LiaFormula> pre;
            bool all_regular = true;
            for (size_t i = 0; i < args.size(); ++i) {
                if (!s.bounds.count(args[i])) continue;
                if (s.node(args[i]).kind == NodeKind::Summary) all_regular = false;
                pre.push_back(substitute(s.bound(args[i]), {{"x", LiaTerm::var(arg_var(i + 1))}}));
            }
            if (!s.bounds.count(img.node)) continue;
            LiaFormula concl = substitute(s.bound(img.node), {{"x", img.term}});
            if (all_regular) {
                IntEnv env;
                for (size_t i = 1; i <= args.size(); ++i) env[arg_var(i)] = 0;
                if (!eval(concl, env)) issue("function-entailment", name, "image leaves the bound of " + img.node);
                continue;
            }
            ents.push_back({name, mk_and(pre), concl});
        }
        if (tab_it != s.functions.end())
            for (auto& [args, img] : tab_it->second)
                if (args.size() != sig.args.size() || !std::all_of(args.begin(), args.end(), [&](auto& n) { return s.has_node(n); }))
                    issue("function-total", entry_name(f, args), "entry for an invalid argument tuple");
    }
    for (auto& [f, tab] : s.functions)
        if (!v.functions.count(f)) issue("function", f, "not in the vocabulary");
    if (!ents.empty()) {
        std::vector<LiaFormula> viol;
        size_t maxk = 8;
        for (size_t i = 0; i < ents.size(); ++i)
            viol.push_back(tag_vars(mk_and({ents[i].premise, mk_not(ents[i].conclusion)}), maxk, i));
        bool all_fine = false;
        try {
            all_fine = check_formula(cfg, mk_or(viol)).unsat();
        } catch (const SolverOutputError&) {
        }
        if (!all_fine) {
            for (auto& e : ents) {
                auto r = check_formula(cfg, mk_and({e.premise, mk_not(e.conclusion)}));
                if (r.sat()) issue("function-entailment", e.entry, "image leaves the bound of its node");
                else if (r.undetermined())
                    issue("function-entailment", e.entry, std::string("entailment ") + to_string(r.status), true);
            }
        }
    }

    // relations
    for (auto& [r, tab] : s.relations) {
        auto it = v.relations.find(r);
        if (it == v.relations.end()) {
            issue("relation", r, "not in the vocabulary");
            continue;
        }
        for (auto& [args, phi] : tab) {
            auto name = entry_name(r, args);
            bool ok = args.size() == it->second.size();
            for (size_t i = 0; ok && i < args.size(); ++i)
                ok = s.has_node(args[i]) && s.node(args[i]).sort == it->second[i];
            if (!ok) {
                issue("relation", name, "argument nodes do not match the signature");
                continue;
            }
            if (!is_quantifier_free(phi) || !free_bool_vars(phi).empty() ||
                !vars_within(free_int_vars(phi), args.size(), false))
                issue("relation", name, "formula must be quantifier-free over x1..xk");
        }
    }
    return rep;
}

// ---- evaluation

Element eval_ground_term(const SymbolicStructure& s, const Term& t) {
    switch (t.kind) {
    case Term::Kind::Var: throw Error("eval_ground_term: term has variable " + t.name);
    case Term::Kind::Const: {
        auto it = s.constants.find(t.name);
        if (it == s.constants.end()) throw Error("constant " + t.name + " is not interpreted");
        return it->second;
    }
    case Term::Kind::App: {
        NodeTuple nodes;
        IntEnv env;
        for (size_t i = 0; i < t.args.size(); ++i) {
            Element e = eval_ground_term(s, t.args[i]);
            nodes.push_back(e.node);
            env[arg_var(i + 1)] = e.index;
        }
        const auto& img = s.function(t.name, nodes);
        return {img.node, eval(img.term, env)};
    }
    }
    return {};
}

std::vector<Element> explication_window(const SymbolicStructure& s, const std::string& node, Int lo, Int hi) {
    std::vector<Element> out;
    const auto& b = s.bound(node);
    for (Int z = lo; z <= hi; ++z)
        if (eval(b, {{"x", z}})) out.push_back({node, z});
    return out;
}

FiniteStructure explicate_finite(const SymbolicStructure& s) {
    FiniteStructure m;
    for (auto& so : s.sorts) m.domain[so];
    for (auto& n : s.nodes) {
        if (n.kind != NodeKind::Regular) throw Error("explicate_finite: node " + n.id + " is a summary node");
        m.domain[n.sort].push_back(n.id);
    }
    for (auto& [c, e] : s.constants) m.constants[c] = e.node;
    for (auto& [f, tab] : s.functions)
        for (auto& [args, img] : tab) m.functions[f][args] = img.node;
    for (auto& [r, tab] : s.relations) {
        auto& set = m.relations[r];
        for (auto& [args, phi] : tab) {
            IntEnv env;
            for (size_t i = 1; i <= args.size(); ++i) env[arg_var(i)] = 0;
            if (eval(phi, env)) set.insert(args);
        }
    }
    return m;
}

SymbolicStructure symbolic_from_finite(const FiniteStructure& m, const Vocabulary& v) {
    SymbolicStructure s;
    s.sorts = v.sorts;
    for (auto& so : v.sorts) {
        auto it = m.domain.find(so);
        if (it == m.domain.end()) continue;
        for (auto& e : it->second) {
            s.nodes.push_back({e, so, NodeKind::Regular});
            s.bounds[e] = regular_bound();
        }
    }
    for (auto& [c, e] : m.constants) s.constants[c] = {e, 0};
    for (auto& [f, tab] : m.functions)
        for (auto& [args, img] : tab) s.functions[f][args] = {img, LiaTerm::lit(0)};
    for (auto& [r, set] : m.relations)
        for (auto& args : set) s.relations[r][args] = LiaFormula::top();
    return s;
}

// ---- serialization

std::string to_json(const SymbolicStructure& s, int indent) {
    json j;
    j["sorts"] = s.sorts;
    j["nodes"] = json::array();
    for (auto& n : s.nodes) {
        json jn{{"id", n.id}, {"sort", n.sort}, {"kind", n.kind == NodeKind::Regular ? "regular" : "summary"}};
        if (s.bounds.count(n.id)) jn["bound"] = to_smtlib(s.bounds.at(n.id));
        j["nodes"].push_back(jn);
    }
    j["constants"] = json::object();
    for (auto& [c, e] : s.constants) j["constants"][c] = {{"node", e.node}, {"index", e.index}};
    j["functions"] = json::object();
    for (auto& [f, tab] : s.functions) {
        json arr = json::array();
        for (auto& [args, img] : tab) arr.push_back({{"args", args}, {"node", img.node}, {"term", to_smtlib(img.term)}});
        j["functions"][f] = arr;
    }
    j["relations"] = json::object();
    for (auto& [r, tab] : s.relations) {
        json arr = json::array();
        for (auto& [args, phi] : tab) arr.push_back({{"args", args}, {"formula", to_smtlib(phi)}});
        j["relations"][r] = arr;
    }
    return j.dump(indent) + "\n";
}

SymbolicStructure structure_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(std::string("structure JSON: ") + e.what());
    }
    SymbolicStructure s;
    try {
        s.sorts = j.at("sorts").get<std::vector<std::string>>();
        for (auto& jn : j.at("nodes")) {
            Node n;
            n.id = jn.at("id").get<std::string>();
            n.sort = jn.at("sort").get<std::string>();
            auto kind = jn.at("kind").get<std::string>();
            if (kind == "regular") n.kind = NodeKind::Regular;
            else if (kind == "summary") n.kind = NodeKind::Summary;
            else throw Error("node " + n.id + ": kind must be regular or summary");
            if (jn.contains("bound")) s.bounds[n.id] = parse_lia_formula(jn["bound"].get<std::string>());
            else if (n.kind == NodeKind::Regular) s.bounds[n.id] = regular_bound();
            else throw Error("summary node " + n.id + " needs a bound");
            if (std::find(s.sorts.begin(), s.sorts.end(), n.sort) == s.sorts.end())
                throw Error("node " + n.id + ": undeclared sort " + n.sort);
            if (s.has_node(n.id)) throw Error("duplicate node id " + n.id);
            s.nodes.push_back(n);
        }
        if (j.contains("constants"))
            for (auto& [c, jc] : j["constants"].items())
                s.constants[c] = {jc.at("node").get<std::string>(), jc.value("index", Int{0})};
        if (j.contains("functions"))
            for (auto& [f, arr] : j["functions"].items())
                for (auto& je : arr)
                    s.functions[f][je.at("args").get<NodeTuple>()] = {je.at("node").get<std::string>(),
                                                                      parse_lia_term(je.at("term").get<std::string>())};
        if (j.contains("relations"))
            for (auto& [r, arr] : j["relations"].items())
                for (auto& je : arr)
                    s.relations[r][je.at("args").get<NodeTuple>()] = parse_lia_formula(je.at("formula").get<std::string>());
    } catch (const json::exception& e) {
        throw Error(std::string("structure JSON: ") + e.what());
    }
    return s;
}

namespace {

std::string dot_escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '"' || c == '\\') o += '\\';
        o += c;
    }
    return o;
}

}  // namespace

std::string to_dot(const SymbolicStructure& s) {
    std::string o = "digraph structure {\n  rankdir=LR;\n";
    std::map<std::string, std::vector<std::string>> unary;  // node -> unary relation labels
    for (auto& [r, tab] : s.relations)
        for (auto& [args, phi] : tab) {
            if (args.size() != 1 || phi.kind == LiaFormula::Kind::False) continue;
            unary[args[0]].push_back(phi.kind == LiaFormula::Kind::True ? r : r + ": " + to_infix(phi));
        }
    for (auto& n : s.nodes) {
        std::string label = n.id + " : " + n.sort;
        if (n.kind == NodeKind::Summary) label += "\\n" + dot_escape(to_infix(s.bound(n.id)));
        for (auto& u : unary[n.id]) label += "\\n" + dot_escape(u);
        o += "  \"" + dot_escape(n.id) + "\" [shape=" + (n.kind == NodeKind::Summary ? "doublecircle" : "circle") +
             ", label=\"" + label + "\"];\n";
    }
    for (auto& [c, e] : s.constants) {
        o += "  \"const:" + dot_escape(c) + "\" [shape=plaintext, label=\"" + dot_escape(c) + "\"];\n";
        o += "  \"const:" + dot_escape(c) + "\" -> \"" + dot_escape(e.node) + "\"";
        if (e.index != 0) o += " [label=\"" + std::to_string(e.index) + "\"]";
        o += ";\n";
    }
    int table = 0;
    for (auto& [f, tab] : s.functions)
        for (auto& [args, img] : tab) {
            std::string label = f + ": " + to_infix(img.term);
            if (args.size() == 1) {
                o += "  \"" + dot_escape(args[0]) + "\" -> \"" + dot_escape(img.node) + "\" [label=\"" +
                     dot_escape(label) + "\"];\n";
            } else {
                std::string t = "fn" + std::to_string(table++);
                std::string a;
                for (auto& n : args) a += (a.empty() ? "" : ", ") + n;
                o += "  \"" + t + "\" [shape=box, label=\"" + dot_escape(f + "(" + a + ")") + "\"];\n";
                o += "  \"" + t + "\" -> \"" + dot_escape(img.node) + "\" [label=\"" + dot_escape(label) + "\"];\n";
            }
        }
    for (auto& [r, tab] : s.relations)
        for (auto& [args, phi] : tab) {
            if (args.size() < 2 || phi.kind == LiaFormula::Kind::False) continue;
            std::string label = phi.kind == LiaFormula::Kind::True ? r : r + ": " + to_infix(phi);
            if (args.size() == 2) {
                o += "  \"" + dot_escape(args[0]) + "\" -> \"" + dot_escape(args[1]) + "\" [style=dashed, label=\"" +
                     dot_escape(label) + "\"];\n";
            } else {
                std::string t = "rel" + std::to_string(table++);
                std::string a;
                for (auto& n : args) a += (a.empty() ? "" : ", ") + n;
                o += "  \"" + t + "\" [shape=box, style=dashed, label=\"" + dot_escape(r + "(" + a + ")") + "\\n" +
                     dot_escape(label) + "\"];\n";
            }
        }
    return o + "}\n";
}

std::string to_text(const SymbolicStructure& s) {
    std::string o;
    for (auto& so : s.sorts) {
        o += "sort " + so + ":";
        for (auto& n : s.nodes) {
            if (n.sort != so) continue;
            o += " " + n.id;
            if (n.kind == NodeKind::Summary) o += " {" + to_infix(s.bound(n.id)) + "}";
        }
        o += "\n";
    }
    for (auto& [c, e] : s.constants) o += c + " = <" + e.node + ", " + std::to_string(e.index) + ">\n";
    for (auto& [f, tab] : s.functions)
        for (auto& [args, img] : tab) o += entry_name(f, args) + " = <" + img.node + ", " + to_infix(img.term) + ">\n";
    for (auto& [r, tab] : s.relations)
        for (auto& [args, phi] : tab) o += entry_name(r, args) + " : " + to_infix(phi) + "\n";
    return o;
}

}  // namespace needle
