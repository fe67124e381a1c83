#include "needle/finder.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "needle/transforms.hpp"

namespace needle {

using json = nlohmann::json;

// ---- size vectors

std::string to_string(const SizeVector& v) {
    std::string s;
    for (auto& [sort, sz] : v) {
        if (!s.empty()) s += ',';
        s += sort + "=" + std::to_string(sz.regular) + "/" + std::to_string(sz.summary);
    }
    return s;
}

SizeVector parse_size_vector(const std::string& text, const Vocabulary& v) {
    std::map<std::string, SortSize> given;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos) throw Error("size entry '" + item + "' must look like sort=reg/sum");
        std::string sort = item.substr(0, eq), val = item.substr(eq + 1);
        if (!v.has_sort(sort)) throw Error("unknown sort '" + sort + "' in sizes");
        SortSize sz;
        try {
            auto slash = val.find('/');
            sz.regular = std::stoi(val.substr(0, slash));
            if (slash != std::string::npos) sz.summary = std::stoi(val.substr(slash + 1));
        } catch (const std::exception&) {
            throw Error("malformed size '" + val + "'");
        }
        if (sz.regular < 0 || sz.summary < 0) throw Error("negative size for " + sort);
        given[sort] = sz;
    }
    SizeVector out;
    for (auto& s : v.sorts) out.emplace_back(s, given.count(s) ? given[s] : SortSize{1, 0});
    return out;
}

int total_nodes(const SizeVector& v) {
    int t = 0;
    for (auto& [s, sz] : v) t += sz.regular + sz.summary;
    return t;
}

// ---- templates

bool is_structure_var(const std::string& n) {
    if (n.empty() || n[0] != 'x') return false;
    for (size_t i = 1; i < n.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(n[i]))) return false;
    return true;
}

namespace {

// largest i with x_i in the variable set; 0 for none
size_t max_arg_index(const std::set<std::string>& vs) {
    size_t m = 0;
    for (auto& v : vs)
        if (v.size() > 1 && is_structure_var(v)) m = std::max(m, static_cast<size_t>(std::stoul(v.substr(1))));
    return m;
}

bool admissible(const std::set<std::string>& vs, const NodeTuple& args, const Template& t) {
    if (max_arg_index(vs) > args.size()) return false;
    if (!t.summary_args_only) return true;
    for (size_t i = 0; i < args.size(); ++i)
        if (vs.count(arg_var(i + 1)) && t.node(args[i]).kind != NodeKind::Summary) return false;
    return true;
}

std::set<std::string> template_vars(const std::set<std::string>& vs) {
    std::set<std::string> out;
    for (auto& v : vs)
        if (!is_structure_var(v)) out.insert(v);
    return out;
}

}  // namespace

std::vector<std::string> Template::nodes_of(const std::string& sort) const {
    std::vector<std::string> out;
    for (auto& n : nodes)
        if (n.sort == sort) out.push_back(n.id);
    return out;
}

const Node& Template::node(const std::string& id) const {
    for (auto& n : nodes)
        if (n.id == id) return n;
    throw Error("unknown template node " + id);
}

int Template::node_index(const std::string& id) const {
    for (size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].id == id) return static_cast<int>(i);
    return -1;
}

std::vector<size_t> Template::function_candidates_for(const std::string& f, const NodeTuple& args) const {
    std::vector<size_t> out;
    auto it = function_candidates.find(f);
    if (it == function_candidates.end()) return out;
    for (size_t i = 0; i < it->second.size(); ++i)
        if (admissible(free_vars(it->second[i]), args, *this)) out.push_back(i);
    return out;
}

std::vector<size_t> Template::relation_candidates_for(const std::string& r, const NodeTuple& args) const {
    std::vector<size_t> out;
    auto it = relation_candidates.find(r);
    if (it == relation_candidates.end()) return out;
    for (size_t i = 0; i < it->second.size(); ++i)
        if (admissible(free_int_vars(it->second[i]), args, *this)) out.push_back(i);
    return out;
}

std::vector<Node> template_nodes(const SizeVector& sizes) {
    std::vector<Node> out;
    for (auto& [sort, sz] : sizes) {
        for (int i = 0; i < sz.regular; ++i) out.push_back({sort + "_r" + std::to_string(i), sort, NodeKind::Regular});
        for (int i = 0; i < sz.summary; ++i) out.push_back({sort + "_s" + std::to_string(i), sort, NodeKind::Summary});
    }
    return out;
}

namespace {

LiaTerm X(size_t i) { return LiaTerm::var(arg_var(i)); }

std::vector<LiaFormula> heuristic_relations() {
    auto x1 = X(1), x2 = X(2), x3 = X(3);
    auto one = LiaTerm::lit(1);
    return {
        LiaFormula::top(),
        LiaFormula::bot(),
        lia_lt(x1, x2),
        lia_le(x1, x2),
        lia_ge(x1, x2),
        lia_gt(x1, x2),
        lia_eq(x1, LiaTerm::lit(0)),
        lia_eq(x1, x2),
        lia_eq(x1, LiaTerm::add(x2, one)),
        lia_eq(x1, LiaTerm::sub(x2, one)),
        LiaFormula::conj({lia_le(x1, x2), lia_lt(x2, x3)}),
        LiaFormula::conj({lia_le(x3, x2), lia_lt(x2, x1)}),
        LiaFormula::conj({lia_eq(x1, x2), lia_eq(x2, x3)}),
    };
}

}  // namespace

void check_extra_terms(const Vocabulary& v, const std::map<std::string, std::vector<LiaTerm>>& extra) {
    for (auto& [f, terms] : extra) {
        if (!v.functions.count(f)) throw Error("extra function term for unknown function " + f);
        size_t k = v.functions.at(f).args.size();
        for (auto& e : terms)
            for (auto& x : free_int_vars(lia_eq(e, e))) {
                bool ok = false;
                for (size_t i = 1; i <= k; ++i) ok |= x == arg_var(i);
                if (!ok) throw Error("extra term for " + f + " mentions " + x + "; only x1..x" + std::to_string(k) + " are allowed");
            }
    }
}

Template heuristic_template(const Vocabulary& v, const SizeVector& sizes,
                            const std::map<std::string, std::vector<LiaTerm>>& extra) {
    for (auto& [sort, sz] : sizes)
        if (sz.summary > 0 && !v.infinite_sorts.count(sort))
            throw Error("summary nodes requested for sort " + sort + ", which is not an infinite sort");
    Template t;
    t.sorts = v.sorts;
    t.nodes = template_nodes(sizes);
    auto x = LiaTerm::var("x"), d = LiaTerm::var("d");
    t.bound_candidates = {LiaFormula::top(), lia_ge(x, d), lia_le(x, d)};
    for (auto& [f, sig] : v.functions) {
        std::vector<LiaTerm> cs{LiaTerm::lit(0)};
        for (size_t i = 1; i <= sig.args.size(); ++i) {
            cs.push_back(X(i));
            cs.push_back(LiaTerm::add(X(i), LiaTerm::lit(1)));
            cs.push_back(LiaTerm::sub(X(i), LiaTerm::lit(1)));
        }
        if (auto it = extra.find(f); it != extra.end())
            for (auto& e : it->second)
                if (std::find(cs.begin(), cs.end(), e) == cs.end()) cs.push_back(e);
        t.function_candidates[f] = cs;
    }
    check_extra_terms(v, extra);
    auto rels = heuristic_relations();
    for (auto& [r, sig] : v.relations) {
        std::vector<LiaFormula> cs;
        for (auto& c : rels)
            if (max_arg_index(free_int_vars(c)) <= sig.size()) cs.push_back(c);
        t.relation_candidates[r] = cs;
    }
    return t;
}

Template template_from_json(const std::string& text, const Vocabulary& v) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(std::string("template JSON: ") + e.what());
    }
    try {
        SizeVector sizes = parse_size_vector(j.at("sizes").get<std::string>(), v);
        Template t = heuristic_template(v, sizes);
        if (j.contains("bounds")) {
            t.bound_candidates.clear();
            for (auto& b : j["bounds"]) t.bound_candidates.push_back(parse_lia_formula(b.get<std::string>()));
        }
        if (j.contains("functions"))
            for (auto& [f, arr] : j["functions"].items()) {
                if (!v.functions.count(f)) throw Error("template names unknown function " + f);
                auto& cs = t.function_candidates[f];
                cs.clear();
                for (auto& c : arr) cs.push_back(parse_lia_term(c.get<std::string>()));
            }
        if (j.contains("relations"))
            for (auto& [r, arr] : j["relations"].items()) {
                if (!v.relations.count(r)) throw Error("template names unknown relation " + r);
                auto& cs = t.relation_candidates[r];
                cs.clear();
                for (auto& c : arr) cs.push_back(parse_lia_formula(c.get<std::string>()));
            }
        t.summary_args_only = j.value("summary_args_only", true);
        return t;
    } catch (const json::exception& e) {
        throw Error(std::string("template JSON: ") + e.what());
    }
}

std::string to_json(const Template& t) {
    json j;
    SizeVector sizes;
    for (auto& n : t.nodes) {
        if (sizes.empty() || sizes.back().first != n.sort) sizes.emplace_back(n.sort, SortSize{});
        (n.kind == NodeKind::Regular ? sizes.back().second.regular : sizes.back().second.summary)++;
    }
    j["sizes"] = to_string(sizes);
    j["nodes"] = json::array();
    for (auto& n : t.nodes)
        j["nodes"].push_back({{"id", n.id}, {"sort", n.sort}, {"kind", n.kind == NodeKind::Regular ? "regular" : "summary"}});
    j["bounds"] = json::array();
    for (auto& b : t.bound_candidates) j["bounds"].push_back(to_smtlib(b));
    j["functions"] = json::object();
    for (auto& [f, cs] : t.function_candidates)
        for (auto& c : cs) j["functions"][f].push_back(to_smtlib(c));
    j["relations"] = json::object();
    for (auto& [r, cs] : t.relation_candidates)
        for (auto& c : cs) j["relations"][r].push_back(to_smtlib(c));
    j["summary_args_only"] = t.summary_args_only;
    return j.dump(2) + "\n";
}

// ---- encoding

std::vector<std::string> Encoding::wanted() const {
    std::vector<std::string> w = bool_vars;
    w.insert(w.end(), int_vars.begin(), int_vars.end());
    return w;
}

namespace {

std::string join(const NodeTuple& a) {
    std::string s;
    for (auto& n : a) s += "!" + n;
    return s;
}

// picks: slot index -> option index
using Picks = std::map<size_t, size_t>;

bool merge(Picks& into, const Picks& from) {
    for (auto& [s, o] : from) {
        auto [it, fresh] = into.emplace(s, o);
        if (!fresh && it->second != o) return false;
    }
    return true;
}

struct Choice {
    Picks picks;
    std::string node;
    LiaTerm term;
};

struct VarBinding {
    std::string node;
    LiaTerm term;
};

class Encoder {
public:
    Encoder(const Formula& f, const Vocabulary& v, const Template& t, const FinderOptions& opt)
        : f_(eliminate_iff(f)), v_(v), t_(t), opt_(opt) {
        e_.tmpl = t;
    }

    Encoding run() {
        decide_order_optimization();
        build_slots();
        auto fv = free_vars(f_);
        e_.free_var_sorts = fv;
        if (fv.empty()) {
            e_.finder = trans(f_, {});
        } else {
            // one option per node assignment of the free variables
            std::vector<std::map<std::string, std::string>> assigns{{}};
            for (auto& [x, sort] : fv) {
                std::vector<std::map<std::string, std::string>> next;
                for (auto& a : assigns)
                    for (auto& n : t_.nodes_of(sort)) {
                        auto b = a;
                        b[x] = n;
                        next.push_back(b);
                    }
                assigns = std::move(next);
            }
            Slot s;
            s.kind = Slot::Kind::Assignment;
            s.symbol = "assignment";
            for (size_t i = 0; i < assigns.size(); ++i) s.options.push_back({"", i, ""});
            size_t si = add_slot("v", std::move(s));
            e_.assignments = assigns;
            std::vector<LiaFormula> ds;
            for (size_t i = 0; i < assigns.size(); ++i) {
                std::map<std::string, VarBinding> env;
                std::vector<LiaFormula> part{guard(si, i)};
                for (auto& [x, n] : assigns[i]) {
                    if (t_.node(n).kind == NodeKind::Regular) {
                        env[x] = {n, LiaTerm::lit(0)};
                    } else {
                        env[x] = {n, LiaTerm::var(lia_var(x))};
                        part.push_back(bound_sel(n, LiaTerm::var(lia_var(x))));
                        if (std::find(e_.int_vars.begin(), e_.int_vars.end(), lia_var(x)) == e_.int_vars.end())
                            e_.int_vars.push_back(lia_var(x));
                    }
                }
                part.push_back(trans(f_, env));
                ds.push_back(mk_and(std::move(part)));
            }
            e_.finder = mk_or(std::move(ds));
        }
        e_.aux = aux();
        return std::move(e_);
    }

private:
    void decide_order_optimization() {
        if (!opt_.order_optimization || !v_.order_relation) return;
        std::set<OrderAxiom> seen;
        for (auto& c : conjuncts(f_))
            if (auto a = match_order_axiom(c, *v_.order_relation)) seen.insert(*a);
        if (seen.size() == 3) e_.order_relation = *v_.order_relation;
    }

    bool derived(const std::string& r, const NodeTuple& args) const {
        return !e_.order_relation.empty() && r == e_.order_relation &&
               t_.node_index(args[0]) > t_.node_index(args[1]);
    }

    size_t add_slot(const std::string& key, Slot s) {
        if (s.options.size() > 1)
            for (size_t i = 0; i < s.options.size(); ++i) {
                s.options[i].guard = "g!" + key + "!" + std::to_string(i);
                e_.bool_vars.push_back(s.options[i].guard);
            }
        size_t idx = e_.slots.size();
        e_.slot_index[key] = idx;
        e_.slots.push_back(std::move(s));
        return idx;
    }

    void add_params(Slot& s, const std::string& key, const std::set<std::string>& tvs) {
        for (auto& tv : tvs) {
            std::string p = "p!" + key + "!" + tv;
            s.params[tv] = p;
            e_.int_vars.push_back(p);
        }
    }

    void build_slots() {
        for (auto& n : t_.nodes) {
            if (n.kind != NodeKind::Summary) continue;
            Slot s;
            s.kind = Slot::Kind::Bound;
            s.symbol = n.id;
            std::set<std::string> tvs;
            for (size_t i = 0; i < t_.bound_candidates.size(); ++i) {
                s.options.push_back({n.id, i, ""});
                for (auto& tv : template_vars(free_int_vars(t_.bound_candidates[i]))) tvs.insert(tv);
            }
            std::string key = "b!" + n.id;
            add_params(s, key, tvs);
            add_slot(key, std::move(s));
        }
        // symmetry breaking: least constant of each sort sits on the first regular node
        std::map<std::string, std::string> fixed;
        if (opt_.symmetry_breaking)
            for (auto& [c, sort] : v_.constants) {
                bool taken = false;
                for (auto& [c2, n] : fixed)
                    if (v_.constants.at(c2) == sort) taken = true;
                auto regs = regular_nodes(sort);
                if (!taken && !regs.empty()) fixed[c] = regs[0];
            }
        for (auto& [c, sort] : v_.constants) {
            Slot s;
            s.kind = Slot::Kind::Constant;
            s.symbol = c;
            if (fixed.count(c)) {
                s.options.push_back({fixed[c], 0, ""});
            } else {
                for (auto& n : regular_nodes(sort)) s.options.push_back({n, 0, ""});
            }
            add_slot("c!" + c, std::move(s));
        }
        for (auto& [f, sig] : v_.functions) {
            std::vector<NodeTuple> tuples = tuples_of(sig.args);
            const auto& cands = t_.function_candidates.count(f) ? t_.function_candidates.at(f) : empty_terms_;
            for (auto& args : tuples) {
                Slot s;
                s.kind = Slot::Kind::Function;
                s.symbol = f;
                s.args = args;
                std::set<std::string> tvs;
                for (size_t ci : t_.function_candidates_for(f, args)) {
                    for (auto& tv : template_vars(free_vars(cands[ci]))) tvs.insert(tv);
                    for (auto& img : t_.nodes_of(sig.range)) s.options.push_back({img, ci, ""});
                }
                std::string key = "f!" + f + join(args);
                add_params(s, key, tvs);
                add_slot(key, std::move(s));
            }
        }
        for (auto& [r, sig] : v_.relations) {
            const auto& cands = t_.relation_candidates.count(r) ? t_.relation_candidates.at(r) : empty_formulas_;
            for (auto& args : tuples_of(sig)) {
                if (derived(r, args)) continue;
                Slot s;
                s.kind = Slot::Kind::Relation;
                s.symbol = r;
                s.args = args;
                std::set<std::string> tvs;
                for (size_t ci : t_.relation_candidates_for(r, args)) {
                    s.options.push_back({"", ci, ""});
                    for (auto& tv : template_vars(free_int_vars(cands[ci]))) tvs.insert(tv);
                }
                std::string key = "r!" + r + join(args);
                add_params(s, key, tvs);
                add_slot(key, std::move(s));
            }
        }
    }

    std::vector<std::string> regular_nodes(const std::string& sort) const {
        std::vector<std::string> out;
        for (auto& n : t_.nodes)
            if (n.sort == sort && n.kind == NodeKind::Regular) out.push_back(n.id);
        return out;
    }

    std::vector<NodeTuple> tuples_of(const std::vector<std::string>& sorts) const {
        std::vector<NodeTuple> out{{}};
        for (auto& so : sorts) {
            std::vector<NodeTuple> next;
            for (auto& tup : out)
                for (auto& n : t_.nodes_of(so)) {
                    auto u = tup;
                    u.push_back(n);
                    next.push_back(std::move(u));
                }
            out = std::move(next);
        }
        return out;
    }

    const Slot& slot(const std::string& key) const { return e_.slots[e_.slot_index.at(key)]; }

    LiaFormula guard(size_t slot, size_t option) const {
        const auto& g = e_.slots[slot].options[option].guard;
        return g.empty() ? LiaFormula::top() : LiaFormula::boolvar(g);
    }

    LiaFormula guards(const Picks& p) const {
        std::vector<LiaFormula> gs;
        for (auto& [s, o] : p) gs.push_back(guard(s, o));
        return mk_and(std::move(gs));
    }

    TermSubst param_subst(const Slot& s) const {
        TermSubst m;
        for (auto& [tv, p] : s.params) m[tv] = LiaTerm::var(p);
        return m;
    }

    // B(n)(t) as selected by the bound guards
    LiaFormula bound_sel(const std::string& n, const LiaTerm& t) const {
        if (t_.node(n).kind == NodeKind::Regular) return lia_eq(t, LiaTerm::lit(0));
        size_t si = e_.slot_index.at("b!" + n);
        const Slot& s = e_.slots[si];
        auto ps = param_subst(s);
        std::vector<LiaFormula> parts;
        for (size_t i = 0; i < s.options.size(); ++i) {
            auto psi = substitute(substitute(t_.bound_candidates[s.options[i].candidate], ps), {{"x", t}});
            parts.push_back(mk_implies(guard(si, i), psi));
        }
        if (parts.empty()) return LiaFormula::bot();
        return mk_and(std::move(parts));
    }

    std::vector<Choice> interp(const Term& t, const std::map<std::string, VarBinding>& env) {
        switch (t.kind) {
        case Term::Kind::Var: {
            auto& b = env.at(t.name);
            return {{{}, b.node, b.term}};
        }
        case Term::Kind::Const: {
            size_t si = e_.slot_index.at("c!" + t.name);
            std::vector<Choice> out;
            for (size_t i = 0; i < e_.slots[si].options.size(); ++i)
                out.push_back({{{si, i}}, e_.slots[si].options[i].node, LiaTerm::lit(0)});
            return out;
        }
        case Term::Kind::App: {
            std::vector<std::vector<Choice>> args;
            for (auto& a : t.args) args.push_back(interp(a, env));
            std::vector<Choice> out;
            const auto& cands = t_.function_candidates.at(t.name);
            for_each_combo(args, [&](const Picks& picks, const std::vector<const Choice*>& combo) {
                NodeTuple nodes;
                TermSubst sub;
                for (size_t i = 0; i < combo.size(); ++i) {
                    nodes.push_back(combo[i]->node);
                    sub[arg_var(i + 1)] = combo[i]->term;
                }
                std::string key = "f!" + t.name + join(nodes);
                size_t si = e_.slot_index.at(key);
                const Slot& s = e_.slots[si];
                auto ps = param_subst(s);
                for (auto& [tv, p] : ps) sub[tv] = p;
                for (size_t i = 0; i < s.options.size(); ++i) {
                    Picks p = picks;
                    if (!merge(p, {{si, i}})) continue;
                    out.push_back({std::move(p), s.options[i].node, substitute(cands[s.options[i].candidate], sub)});
                }
            });
            return out;
        }
        }
        return {};
    }

    template <class Fn>
    void for_each_combo(const std::vector<std::vector<Choice>>& lists, Fn fn) {
        std::vector<const Choice*> combo(lists.size());
        std::function<void(size_t, const Picks&)> rec = [&](size_t i, const Picks& acc) {
            if (i == lists.size()) {
                fn(acc, combo);
                return;
            }
            for (auto& c : lists[i]) {
                Picks p = acc;
                if (!merge(p, c.picks)) continue;
                combo[i] = &c;
                rec(i + 1, p);
            }
        };
        rec(0, {});
    }

    // relation entry R(nodes) applied to index terms, given its (single) slot pick
    void relation_parts(const std::string& r, const NodeTuple& nodes, const std::vector<LiaTerm>& idx,
                        const Picks& picks, const LiaFormula& pre, std::vector<LiaFormula>& out) {
        const auto& cands = t_.relation_candidates.at(r);
        bool swap = derived(r, nodes);
        NodeTuple key_nodes = swap ? NodeTuple{nodes[1], nodes[0]} : nodes;
        size_t si = e_.slot_index.at("r!" + r + join(key_nodes));
        const Slot& s = e_.slots[si];
        TermSubst sub = param_subst(s);
        if (swap) {
            sub[arg_var(1)] = idx[1];
            sub[arg_var(2)] = idx[0];
        } else {
            for (size_t i = 0; i < idx.size(); ++i) sub[arg_var(i + 1)] = idx[i];
        }
        for (size_t i = 0; i < s.options.size(); ++i) {
            Picks p = picks;
            if (!merge(p, {{si, i}})) continue;
            LiaFormula phi = substitute(cands[s.options[i].candidate], sub);
            if (swap) {
                // the other orientation: not the swapped entry, and not the same element
                phi = mk_not(phi);
                if (nodes[0] == nodes[1]) phi = mk_and({phi, mk_not(lia_eq(idx[0], idx[1]))});
            }
            out.push_back(mk_implies(mk_and({pre, guards(p)}), phi));
        }
        if (s.options.empty()) out.push_back(mk_not(mk_and({pre, guards(picks)})));
    }

    size_t product(const std::vector<std::vector<Choice>>& lists) const {
        size_t p = 1;
        for (auto& l : lists) {
            p *= std::max<size_t>(l.size(), 1);
            if (p > opt_.literal_product_limit) return p;
        }
        return p;
    }

    struct Grouped {
        LiaFormula sel;
        LiaTerm idx;
    };

    // per node: selection condition and ite-chained index
    std::map<std::string, Grouped> group(const std::vector<Choice>& cs) const {
        std::map<std::string, std::vector<const Choice*>> by;
        for (auto& c : cs) by[c.node].push_back(&c);
        std::map<std::string, Grouped> out;
        for (auto& [n, list] : by) {
            std::vector<LiaFormula> sel;
            for (auto* c : list) sel.push_back(guards(c->picks));
            LiaTerm idx = list.back()->term;
            for (size_t i = list.size() - 1; i-- > 0;) {
                if (list[i]->term == idx) continue;
                idx = LiaTerm::ite(guards(list[i]->picks), list[i]->term, idx);
            }
            out[n] = {mk_or(std::move(sel)), idx};
        }
        return out;
    }

    LiaFormula atom_rel(const Formula& f, const std::map<std::string, VarBinding>& env) {
        std::vector<std::vector<Choice>> args;
        for (auto& a : f.terms) args.push_back(interp(a, env));
        std::vector<LiaFormula> out;
        if (product(args) <= opt_.literal_product_limit) {
            for_each_combo(args, [&](const Picks& picks, const std::vector<const Choice*>& combo) {
                NodeTuple nodes;
                std::vector<LiaTerm> idx;
                for (auto* c : combo) {
                    nodes.push_back(c->node);
                    idx.push_back(c->term);
                }
                relation_parts(f.name, nodes, idx, picks, LiaFormula::top(), out);
            });
            return mk_and(std::move(out));
        }
        std::vector<std::map<std::string, Grouped>> groups;
        for (auto& a : args) groups.push_back(group(a));
        std::vector<std::pair<NodeTuple, std::vector<const Grouped*>>> tuples{{{}, {}}};
        for (auto& g : groups) {
            std::vector<std::pair<NodeTuple, std::vector<const Grouped*>>> next;
            for (auto& [tup, gs] : tuples)
                for (auto& [n, gr] : g) {
                    auto u = tup;
                    u.push_back(n);
                    auto w = gs;
                    w.push_back(&gr);
                    next.emplace_back(u, w);
                }
            tuples = std::move(next);
        }
        for (auto& [nodes, gs] : tuples) {
            std::vector<LiaFormula> pre;
            std::vector<LiaTerm> idx;
            for (auto* g : gs) {
                pre.push_back(g->sel);
                idx.push_back(g->idx);
            }
            relation_parts(f.name, nodes, idx, {}, mk_and(pre), out);
        }
        return mk_and(std::move(out));
    }

    LiaFormula atom_eq(const Formula& f, const std::map<std::string, VarBinding>& env) {
        std::vector<std::vector<Choice>> args{interp(f.terms[0], env), interp(f.terms[1], env)};
        if (product(args) <= opt_.literal_product_limit) {
            std::vector<LiaFormula> out;
            for_each_combo(args, [&](const Picks& picks, const std::vector<const Choice*>& c) {
                LiaFormula eq;
                if (c[0]->node != c[1]->node) eq = LiaFormula::bot();
                else if (t_.node(c[0]->node).kind == NodeKind::Regular) return;
                else eq = lia_eq(c[0]->term, c[1]->term);
                out.push_back(mk_implies(guards(picks), eq));
            });
            return mk_and(std::move(out));
        }
        auto g0 = group(args[0]), g1 = group(args[1]);
        std::vector<LiaFormula> out;
        for (auto& [n, a] : g0) {
            auto it = g1.find(n);
            if (it == g1.end()) continue;
            std::vector<LiaFormula> part{a.sel, it->second.sel};
            if (t_.node(n).kind == NodeKind::Summary) part.push_back(lia_eq(a.idx, it->second.idx));
            out.push_back(mk_and(std::move(part)));
        }
        return mk_or(std::move(out));
    }

    LiaFormula trans(const Formula& f, const std::map<std::string, VarBinding>& env) {
        using K = Formula::Kind;
        switch (f.kind) {
        case K::True: return LiaFormula::top();
        case K::False: return LiaFormula::bot();
        case K::Rel: return atom_rel(f, env);
        case K::Eq: return atom_eq(f, env);
        case K::Not: return mk_not(trans(f.kids[0], env));
        case K::And:
        case K::Or: {
            std::vector<LiaFormula> ks;
            for (auto& k : f.kids) ks.push_back(trans(k, env));
            return f.kind == K::And ? mk_and(std::move(ks)) : mk_or(std::move(ks));
        }
        case K::Implies: return mk_implies(trans(f.kids[0], env), trans(f.kids[1], env));
        case K::Iff: throw Error("encode: unexpected biconditional");
        case K::Forall:
        case K::Exists: {
            bool all = f.kind == K::Forall;
            std::string xl = lia_var(f.name);
            std::vector<LiaFormula> outer, inner;
            for (auto& n : t_.nodes_of(f.sort)) {
                auto w = env;
                if (t_.node(n).kind == NodeKind::Regular) {
                    w[f.name] = {n, LiaTerm::lit(0)};
                    outer.push_back(trans(f.kids[0], w));
                } else {
                    w[f.name] = {n, LiaTerm::var(xl)};
                    LiaFormula b = bound_sel(n, LiaTerm::var(xl));
                    LiaFormula body = trans(f.kids[0], w);
                    inner.push_back(all ? mk_implies(b, body) : mk_and({b, body}));
                }
            }
            if (!inner.empty()) {
                if (all) outer.push_back(mk_forall({xl}, mk_and(std::move(inner))));
                else outer.push_back(mk_exists({xl}, mk_or(std::move(inner))));
            }
            return all ? mk_and(std::move(outer)) : mk_or(std::move(outer));
        }
        }
        return LiaFormula::bot();
    }

    LiaFormula aux() {
        std::vector<LiaFormula> out;
        for (size_t si = 0; si < e_.slots.size(); ++si) {
            const Slot& s = e_.slots[si];
            if (s.options.empty()) {
                out.push_back(LiaFormula::bot());
                continue;
            }
            if (s.options.size() > 1) {
                std::vector<LiaFormula> any;
                for (size_t i = 0; i < s.options.size(); ++i) any.push_back(guard(si, i));
                out.push_back(mk_or(any));
                for (size_t i = 0; i < s.options.size(); ++i)
                    for (size_t j = i + 1; j < s.options.size(); ++j)
                        out.push_back(mk_not(mk_and({guard(si, i), guard(si, j)})));
            }
            if (s.kind != Slot::Kind::Function) continue;
            // guarded in-bounds condition for each function option
            const auto& cands = t_.function_candidates.at(s.symbol);
            auto ps = param_subst(s);
            for (size_t i = 0; i < s.options.size(); ++i) {
                TermSubst sub = ps;
                std::vector<std::string> qvars;
                std::vector<LiaFormula> pre;
                for (size_t a = 0; a < s.args.size(); ++a) {
                    if (t_.node(s.args[a]).kind == NodeKind::Regular) {
                        sub[arg_var(a + 1)] = LiaTerm::lit(0);
                    } else {
                        qvars.push_back(arg_var(a + 1));
                        pre.push_back(bound_sel(s.args[a], LiaTerm::var(arg_var(a + 1))));
                    }
                }
                LiaTerm img = substitute(cands[s.options[i].candidate], sub);
                if (auto qf = closure_qf(s, img, s.options[i].node)) {
                    out.push_back(mk_implies(guard(si, i), *qf));
                    continue;
                }
                LiaFormula ok = mk_forall(qvars, mk_implies(mk_and(pre), bound_sel(s.options[i].node, img)));
                out.push_back(mk_implies(guard(si, i), ok));
            }
        }
        return mk_and(std::move(out));
    }

    // linear form sum c_i * x_i + rest over the argument variables
    struct Lin {
        std::map<std::string, Int> coef;
        LiaTerm rest = LiaTerm::lit(0);
    };

    static std::optional<Lin> linear(const LiaTerm& t, const std::set<std::string>& xs) {
        bool touches = false;
        for (auto& v : free_vars(t))
            if (xs.count(v)) touches = true;
        if (!touches) return Lin{{}, t};
        switch (t.kind) {
        case LiaTerm::Kind::Var: return Lin{{{t.name, 1}}, LiaTerm::lit(0)};
        case LiaTerm::Kind::Add:
        case LiaTerm::Kind::Sub: {
            auto a = linear(t.args[0], xs), b = linear(t.args[1], xs);
            if (!a || !b) return std::nullopt;
            Int sg = t.kind == LiaTerm::Kind::Add ? 1 : -1;
            for (auto& [v, c] : b->coef) a->coef[v] += sg * c;
            a->rest = sg > 0 ? mk_add(a->rest, b->rest) : LiaTerm::sub(a->rest, b->rest);
            return a;
        }
        case LiaTerm::Kind::Mul: {
            auto a = linear(t.args[0], xs);
            if (!a) return std::nullopt;
            for (auto& [v, c] : a->coef) c *= t.value;
            a->rest = LiaTerm::mul(t.value, a->rest);
            return a;
        }
        default: return std::nullopt;
        }
    }

    struct Interval {
        std::optional<LiaTerm> lo, hi;
        bool empty = false;
    };

    // single-constraint bound on x; nullopt for other shapes
    static std::optional<Interval> interval(const LiaFormula& b) {
        if (b.kind == LiaFormula::Kind::True) return Interval{};
        if (b.kind == LiaFormula::Kind::False) return Interval{std::nullopt, std::nullopt, true};
        if (b.kind != LiaFormula::Kind::Compare) return std::nullopt;
        const LiaTerm& l = b.terms[0];
        const LiaTerm& r = b.terms[1];
        Cmp c = b.cmp;
        LiaTerm other;
        if (l.kind == LiaTerm::Kind::Var && l.name == "x" && !free_vars(r).count("x")) {
            other = r;
        } else if (r.kind == LiaTerm::Kind::Var && r.name == "x" && !free_vars(l).count("x")) {
            other = l;
            switch (c) {
            case Cmp::Lt: c = Cmp::Gt; break;
            case Cmp::Le: c = Cmp::Ge; break;
            case Cmp::Gt: c = Cmp::Lt; break;
            case Cmp::Ge: c = Cmp::Le; break;
            default: break;
            }
        } else {
            return std::nullopt;
        }
        Interval iv;
        switch (c) {
        case Cmp::Ge: iv.lo = other; break;
        case Cmp::Gt: iv.lo = mk_add(other, LiaTerm::lit(1)); break;
        case Cmp::Le: iv.hi = other; break;
        case Cmp::Lt: iv.hi = LiaTerm::sub(other, LiaTerm::lit(1)); break;
        case Cmp::Eq: iv.lo = other; iv.hi = other; break;
        }
        return iv;
    }

    // bound options of node n as (guard, interval); nullopt if some option is not interval-shaped
    std::optional<std::vector<std::pair<LiaFormula, Interval>>> intervals_of(const std::string& n) const {
        if (t_.node(n).kind == NodeKind::Regular)
            return std::vector<std::pair<LiaFormula, Interval>>{
                {LiaFormula::top(), Interval{LiaTerm::lit(0), LiaTerm::lit(0), false}}};
        size_t si = e_.slot_index.at("b!" + n);
        const Slot& s = e_.slots[si];
        auto ps = param_subst(s);
        std::vector<std::pair<LiaFormula, Interval>> out;
        for (size_t i = 0; i < s.options.size(); ++i) {
            auto iv = interval(substitute(t_.bound_candidates[s.options[i].candidate], ps));
            if (!iv) return std::nullopt;
            out.push_back({guard(si, i), *iv});
        }
        return out;
    }

    // quantifier-free form of: every argument tuple within its bounds maps into the bound of `target`
    std::optional<LiaFormula> closure_qf(const Slot& s, const LiaTerm& img, const std::string& target) const {
        std::vector<std::string> nodes;  // distinct summary argument nodes, then the target
        std::map<std::string, std::string> var_node;
        std::set<std::string> xs;
        for (size_t a = 0; a < s.args.size(); ++a) {
            if (t_.node(s.args[a]).kind == NodeKind::Regular) continue;
            var_node[arg_var(a + 1)] = s.args[a];
            xs.insert(arg_var(a + 1));
            if (std::find(nodes.begin(), nodes.end(), s.args[a]) == nodes.end()) nodes.push_back(s.args[a]);
        }
        if (std::find(nodes.begin(), nodes.end(), target) == nodes.end()) nodes.push_back(target);
        auto lin = linear(img, xs);
        if (!lin) return std::nullopt;
        std::vector<std::vector<std::pair<LiaFormula, Interval>>> opts;
        for (auto& n : nodes) {
            auto o = intervals_of(n);
            if (!o) return std::nullopt;
            opts.push_back(std::move(*o));
        }
        std::vector<LiaFormula> out;
        std::vector<size_t> pick(nodes.size(), 0);
        while (true) {
            std::map<std::string, const Interval*> box;
            std::vector<LiaFormula> gs;
            bool empty = false;
            for (size_t k = 0; k < nodes.size(); ++k) {
                box[nodes[k]] = &opts[k][pick[k]].second;
                gs.push_back(opts[k][pick[k]].first);
            }
            for (auto& [v, n] : var_node)
                if (box[n]->empty) empty = true;
            LiaFormula cond = LiaFormula::top();
            if (!empty) {
                const Interval& tgt = *box[target];
                // extreme value of img over the box, or nullopt when unbounded in that direction
                auto extreme = [&](bool lower) -> std::optional<LiaTerm> {
                    LiaTerm acc = lin->rest;
                    for (auto& [v, c] : lin->coef) {
                        if (c == 0) continue;
                        const Interval& iv = *box[var_node.at(v)];
                        const auto& e = (c > 0) == lower ? iv.lo : iv.hi;
                        if (!e) return std::nullopt;
                        acc = mk_add(acc, c == 1 ? *e : LiaTerm::mul(c, *e));
                    }
                    return acc;
                };
                std::vector<LiaFormula> cs;
                if (tgt.empty) cs.push_back(LiaFormula::bot());
                if (tgt.lo) {
                    auto m = extreme(true);
                    cs.push_back(m ? lia_ge(*m, *tgt.lo) : LiaFormula::bot());
                }
                if (tgt.hi) {
                    auto m = extreme(false);
                    cs.push_back(m ? lia_le(*m, *tgt.hi) : LiaFormula::bot());
                }
                cond = mk_and(std::move(cs));
            }
            if (cond.kind != LiaFormula::Kind::True) out.push_back(mk_implies(mk_and(std::move(gs)), cond));
            size_t k = 0;
            while (k < nodes.size() && ++pick[k] == opts[k].size()) pick[k++] = 0;
            if (k == nodes.size()) break;
        }
        return mk_and(std::move(out));
    }

    Formula f_;
    const Vocabulary& v_;
    const Template& t_;
    FinderOptions opt_;
    Encoding e_;
    std::vector<LiaTerm> empty_terms_;
    std::vector<LiaFormula> empty_formulas_;
};

}  // namespace

Encoding encode(const Formula& f, const Vocabulary& v, const Template& t, const FinderOptions& opt) {
    for (auto& s : v.sorts)
        if (t.nodes_of(s).empty()) throw Error("template has no node of sort " + s);
    return Encoder(f, v, t, opt).run();
}

// ---- decoding

namespace {

size_t picked(const Encoding& e, const Slot& s, const Model& m) {
    if (s.options.size() == 1) return 0;
    std::optional<size_t> found;
    for (size_t i = 0; i < s.options.size(); ++i) {
        auto it = m.find(s.options[i].guard);
        if (it == m.end()) throw InternalConsistencyError("model lacks guard " + s.options[i].guard);
        if (std::get<bool>(it->second)) {
            if (found) throw InternalConsistencyError("two guards selected for " + s.options[i].guard);
            found = i;
        }
    }
    if (!found) throw InternalConsistencyError("no guard selected for slot " + s.symbol);
    (void)e;
    return *found;
}

TermSubst param_values(const Slot& s, const Model& m) {
    TermSubst sub;
    for (auto& [tv, p] : s.params) {
        auto it = m.find(p);
        if (it == m.end()) throw InternalConsistencyError("model lacks parameter " + p);
        sub[tv] = LiaTerm::lit(std::get<Int>(it->second));
    }
    return sub;
}

LiaFormula negate_nicely(const LiaFormula& f) {
    if (f.kind == LiaFormula::Kind::Compare) {
        switch (f.cmp) {
        case Cmp::Lt: return lia_ge(f.terms[0], f.terms[1]);
        case Cmp::Le: return lia_gt(f.terms[0], f.terms[1]);
        case Cmp::Ge: return lia_lt(f.terms[0], f.terms[1]);
        case Cmp::Gt: return lia_le(f.terms[0], f.terms[1]);
        case Cmp::Eq: break;
        }
    }
    return mk_not(f);
}

// (op x2 x1) as (op' x1 x2)
LiaFormula x1_first(const LiaFormula& f) {
    auto x1 = LiaTerm::var(arg_var(1)), x2 = LiaTerm::var(arg_var(2));
    if (f.kind != LiaFormula::Kind::Compare || !(f.terms[0] == x2) || !(f.terms[1] == x1)) return f;
    switch (f.cmp) {
    case Cmp::Lt: return lia_gt(x1, x2);
    case Cmp::Le: return lia_ge(x1, x2);
    case Cmp::Ge: return lia_le(x1, x2);
    case Cmp::Gt: return lia_lt(x1, x2);
    case Cmp::Eq: return lia_eq(x1, x2);
    }
    return f;
}

}  // namespace

Decoded decode(const Encoding& e, const Model& m) {
    const Template& t = e.tmpl;
    Decoded d;
    SymbolicStructure& s = d.structure;
    s.sorts = t.sorts;
    s.nodes = t.nodes;
    for (auto& n : t.nodes)
        if (n.kind == NodeKind::Regular) s.bounds[n.id] = regular_bound();
    for (auto& slot : e.slots) {
        size_t i = picked(e, slot, m);
        const auto& opt = slot.options[i];
        switch (slot.kind) {
        case Slot::Kind::Bound:
            s.bounds[slot.symbol] = substitute(t.bound_candidates[opt.candidate], param_values(slot, m));
            break;
        case Slot::Kind::Constant: s.constants[slot.symbol] = {opt.node, 0}; break;
        case Slot::Kind::Function:
            s.functions[slot.symbol][slot.args] = {
                opt.node, substitute(t.function_candidates.at(slot.symbol)[opt.candidate], param_values(slot, m))};
            break;
        case Slot::Kind::Relation:
            s.relations[slot.symbol][slot.args] =
                substitute(t.relation_candidates.at(slot.symbol)[opt.candidate], param_values(slot, m));
            break;
        case Slot::Kind::Assignment:
            for (auto& [x, n] : e.assignments[opt.candidate]) {
                Int z = 0;
                if (t.node(n).kind == NodeKind::Summary) {
                    auto it = m.find(lia_var(x));
                    if (it == m.end()) throw InternalConsistencyError("model lacks " + lia_var(x));
                    z = std::get<Int>(it->second);
                }
                d.assignment[x] = {n, z};
            }
            break;
        }
    }
    if (!e.order_relation.empty()) {
        auto& tab = s.relations[e.order_relation];
        std::vector<std::pair<NodeTuple, LiaFormula>> add;
        for (auto& [args, phi] : tab) {
            if (args[0] == args[1]) continue;
            TermSubst swap{{arg_var(1), LiaTerm::var(arg_var(2))}, {arg_var(2), LiaTerm::var(arg_var(1))}};
            add.emplace_back(NodeTuple{args[1], args[0]}, x1_first(negate_nicely(substitute(phi, swap))));
        }
        for (auto& [args, phi] : add) tab[args] = phi;
    }
    return d;
}

// ---- find

namespace {
std::atomic<long> g_found{0}, g_reverify_fail{0};
}

FinderStats finder_stats() { return {g_found.load(), g_reverify_fail.load()}; }

const char* to_string(FinderOutcome::Kind k) {
    switch (k) {
    case FinderOutcome::Kind::Found: return "found";
    case FinderOutcome::Kind::NoneInFamily: return "none-in-family";
    case FinderOutcome::Kind::Undetermined: return "undetermined";
    }
    return "?";
}

FinderOutcome find(const Formula& f, const Vocabulary& v, const Template& t, const FinderOptions& opt) {
    auto t0 = std::chrono::steady_clock::now();
    auto done = [&](FinderOutcome o) {
        o.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);
        return o;
    };
    FinderOutcome out;
    Encoding e = encode(f, v, t, opt);
    std::set<std::string> ints(e.int_vars.begin(), e.int_vars.end()), bools(e.bool_vars.begin(), e.bool_vars.end());
    std::string script = emit_smtlib(e.query(), ints, bools, opt.solver.logic);
    auto r = check(opt.solver, script, e.wanted());
    if (r.unsat()) {
        out.kind = FinderOutcome::Kind::NoneInFamily;
        return done(out);
    }
    if (!r.sat()) {
        out.kind = FinderOutcome::Kind::Undetermined;
        out.reason = std::string(to_string(r.status)) + (r.reason.empty() ? "" : ": " + r.reason);
        return done(out);
    }
    Decoded d = decode(e, r.model);
    if (opt.validate_result) {
        auto rep = validate(d.structure, v, opt.solver);
        if (!rep.ok() && !rep.undetermined())
            throw InternalConsistencyError("decoded structure is not well formed:\n" + rep.summary());
    }
    auto mc = model_check(d.structure, f, opt.solver, d.assignment);
    if (mc.truth == Truth::False) {
        ++g_reverify_fail;
        throw ReverificationError("decoded structure does not satisfy the formula");
    }
    if (mc.truth == Truth::Undetermined) {
        out.kind = FinderOutcome::Kind::Undetermined;
        out.reason = "re-verification undetermined: " + mc.reason;
        return done(out);
    }
    ++g_found;
    out.kind = FinderOutcome::Kind::Found;
    out.structure = std::move(d.structure);
    out.assignment = std::move(d.assignment);
    return done(out);
}

// ---- enumeration

std::vector<SizeVector> size_vectors(const Problem& p, int max_total) {
    const auto& v = p.vocab;
    auto g = qa_graph(p.assertion, v);
    size_t k = v.sorts.size();
    struct Keyed {
        int total, spread, unpreferred;
        std::vector<int> lex;
        SizeVector sizes;
    };
    std::vector<Keyed> all;
    // per-sort options
    std::vector<std::vector<SortSize>> opts(k);
    for (size_t i = 0; i < k; ++i) {
        bool inf = v.infinite_sorts.count(v.sorts[i]) > 0;
        for (int tot = 1; tot <= max_total; ++tot) {
            if (!inf) {
                opts[i].push_back({tot, 0});
                continue;
            }
            for (int sum = 0; sum <= tot; ++sum) opts[i].push_back({tot - sum, sum});
        }
    }
    std::vector<SortSize> cur(k);
    std::function<void(size_t, int)> rec = [&](size_t i, int used) {
        if (i == k) {
            Keyed kd;
            kd.total = used;
            int mx = 0, mn = 1 << 30;
            kd.unpreferred = 0;
            for (size_t j = 0; j < k; ++j) {
                int t = cur[j].regular + cur[j].summary;
                mx = std::max(mx, t);
                mn = std::min(mn, t);
                if (v.infinite_sorts.count(v.sorts[j]) && g.has_self_loop(v.sorts[j]) && cur[j].summary == 0)
                    ++kd.unpreferred;
                kd.lex.push_back(cur[j].regular);
                kd.lex.push_back(cur[j].summary);
                kd.sizes.emplace_back(v.sorts[j], cur[j]);
            }
            kd.spread = k ? mx - mn : 0;
            all.push_back(std::move(kd));
            return;
        }
        for (auto& o : opts[i]) {
            if (used + o.regular + o.summary > max_total) continue;
            cur[i] = o;
            rec(i + 1, used + o.regular + o.summary);
        }
    };
    rec(0, 0);
    std::sort(all.begin(), all.end(), [](const Keyed& a, const Keyed& b) {
        return std::tie(a.total, a.spread, a.unpreferred, a.lex) < std::tie(b.total, b.spread, b.unpreferred, b.lex);
    });
    std::vector<SizeVector> out;
    for (auto& kd : all) out.push_back(std::move(kd.sizes));
    return out;
}

const char* to_string(SearchResult::Kind k) {
    switch (k) {
    case SearchResult::Kind::Found: return "found";
    case SearchResult::Kind::Exhausted: return "exhausted";
    case SearchResult::Kind::Undetermined: return "undetermined";
    }
    return "?";
}

std::string log_to_json(const std::vector<SearchLogEntry>& log) {
    json j = json::array();
    for (auto& e : log) {
        json je{{"sizes", to_string(e.sizes)}, {"outcome", e.outcome}, {"elapsed_ms", e.elapsed.count()}};
        if (!e.reason.empty()) je["reason"] = e.reason;
        j.push_back(je);
    }
    return j.dump(2) + "\n";
}

SearchResult enumerate_find(const Problem& p, const SearchCaps& caps, const FinderOptions& opt,
                            const std::map<std::string, std::vector<LiaTerm>>& extra) {
    auto vectors = size_vectors(p, caps.max_total_nodes);
    auto deadline = std::chrono::steady_clock::now() + caps.budget;
    SearchResult res;
    res.log.resize(vectors.size());
    std::vector<std::optional<FinderOutcome>> outcomes(vectors.size());
    std::atomic<size_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex mu;
    std::exception_ptr failure;

    auto worker = [&] {
        for (;;) {
            if (stop) return;
            size_t i = next++;
            if (i >= vectors.size()) return;
            res.log[i].sizes = vectors[i];
            if (caps.budget.count() > 0 && std::chrono::steady_clock::now() >= deadline) {
                res.log[i].outcome = "skipped";
                res.log[i].reason = "time budget exhausted";
                continue;
            }
            try {
                FinderOptions o = opt;
                if (caps.budget.count() > 0) {
                    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
                    o.solver.timeout = std::max(std::chrono::milliseconds(1), std::min(o.solver.timeout, left));
                }
                auto out = find(p.assertion, p.vocab, heuristic_template(p.vocab, vectors[i], extra), o);
                res.log[i].outcome = out.kind == FinderOutcome::Kind::Found          ? "found"
                                     : out.kind == FinderOutcome::Kind::NoneInFamily ? "none"
                                                                                     : "undetermined";
                res.log[i].reason = out.reason;
                res.log[i].elapsed = out.elapsed;
                if (out.kind == FinderOutcome::Kind::Found) stop = true;
                outcomes[i] = std::move(out);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!failure) failure = std::current_exception();
                stop = true;
                return;
            }
        }
    };
    int jobs = std::max(1, caps.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    bool undetermined = false;
    size_t last = 0;
    for (size_t i = 0; i < vectors.size(); ++i) {
        if (res.log[i].outcome.empty()) break;
        last = i + 1;
        if (outcomes[i] && outcomes[i]->kind == FinderOutcome::Kind::Found) {
            res.kind = SearchResult::Kind::Found;
            res.structure = outcomes[i]->structure;
            res.assignment = outcomes[i]->assignment;
            res.sizes = vectors[i];
            res.log.resize(i + 1);
            return res;
        }
        if (res.log[i].outcome == "undetermined" || res.log[i].outcome == "skipped") undetermined = true;
    }
    res.log.resize(last);
    res.kind = undetermined ? SearchResult::Kind::Undetermined : SearchResult::Kind::Exhausted;
    return res;
}

}  // namespace needle
