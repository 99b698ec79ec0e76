#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "grapheye/ast.hpp"
#include "grapheye/errors.hpp"

namespace grapheye {

enum class EdgeKind { Ast, Cfg, Ddg, Cdg };

inline const char* to_string(EdgeKind k) {
    switch (k) {
        case EdgeKind::Ast: return "AST";
        case EdgeKind::Cfg: return "CFG";
        case EdgeKind::Ddg: return "DDG";
        case EdgeKind::Cdg: return "CDG";
    }
    return "?";
}

struct CpgEdge {
    int src = -1;
    int dst = -1;
    EdgeKind kind = EdgeKind::Ast;
    std::optional<std::string> var;  // DDG edges only

    bool operator==(const CpgEdge&) const = default;
    auto operator<=>(const CpgEdge&) const = default;
};

struct PropertyGraph {
    FunctionAst ast;
    std::vector<CpgEdge> edges;
    int entry = -1;  // METHOD node
    int exit = -1;   // METHOD_RETURN node

    const std::vector<AstNode>& nodes() const { return ast.nodes; }
    int node_count() const { return int(ast.nodes.size()); }

    std::vector<CpgEdge> edges_of_kind(EdgeKind k) const {
        std::vector<CpgEdge> out;
        for (const auto& e : edges)
            if (e.kind == k) out.push_back(e);
        return out;
    }
};

/// One AST edge per parent->child pair, in child order.
inline std::vector<CpgEdge> build_ast_edges(const FunctionAst& fn) {
    std::vector<CpgEdge> out;
    for (const auto& n : fn.nodes)
        for (int c : n.children) out.push_back({n.id, c, EdgeKind::Ast, std::nullopt});
    return out;
}

namespace detail {

/// Statement-level CFG construction. Nodes are statements and predicates;
/// expression-internal nodes carry no CFG edges.
class CfgBuilder {
public:
    explicit CfgBuilder(const FunctionAst& fn, int exit_id) : fn_(fn), exit_(exit_id) {}

    std::vector<CpgEdge> build() {
        const AstNode& method = fn_.node(fn_.root);
        int body = -1;
        for (int c : method.children)
            if (fn_.node(c).label == NodeLabel::Block) { body = c; break; }

        std::vector<int> frontier = {fn_.root};
        if (body >= 0) frontier = process_block(body, frontier, nullptr);
        connect(frontier, exit_);

        for (const auto& [src, label] : pending_gotos_) {
            int target = -1;
            for (const auto& n : fn_.nodes)
                if (n.label == NodeLabel::JumpTarget && n.jump_label == label) {
                    target = n.id;
                    break;
                }
            if (target < 0)
                throw CfgError("goto references undefined label '" + label + "'");
            add_edge(src, target);
        }

        std::vector<CpgEdge> out;
        out.reserve(edges_.size());
        for (const auto& [s, d] : edges_) out.push_back({s, d, EdgeKind::Cfg, std::nullopt});
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    struct LoopCtx {
        int continue_target;
        std::vector<int>* breaks;
    };

    const FunctionAst& fn_;
    int exit_;
    std::set<std::pair<int, int>> edges_;
    std::vector<std::pair<int, std::string>> pending_gotos_;

    void add_edge(int s, int d) { edges_.insert({s, d}); }
    void connect(const std::vector<int>& frontier, int entry) {
        for (int f : frontier) add_edge(f, entry);
    }

    std::vector<int> process_block(int block_id, std::vector<int> frontier, LoopCtx* loop) {
        for (int c : fn_.node(block_id).children)
            frontier = process_stmt(c, std::move(frontier), loop);
        return frontier;
    }

    std::vector<int> process_stmt(int id, std::vector<int> frontier, LoopCtx* loop) {
        const AstNode& n = fn_.node(id);
        switch (n.label) {
            case NodeLabel::Block:
                return process_block(id, std::move(frontier), loop);
            case NodeLabel::Return:
                connect(frontier, id);
                add_edge(id, exit_);
                return {};
            case NodeLabel::JumpTarget:
                connect(frontier, id);
                return {id};
            case NodeLabel::ControlStructure:
                return process_control(id, std::move(frontier), loop);
            default:
                connect(frontier, id);
                return {id};
        }
    }

    std::vector<int> process_control(int id, std::vector<int> frontier, LoopCtx* loop) {
        const AstNode& n = fn_.node(id);
        switch (n.cs) {
            case CsKind::If: {
                connect(frontier, id);
                std::vector<int> out = process_stmt(n.cs_then, {id}, loop);
                if (n.cs_else >= 0) {
                    auto else_out = process_stmt(n.cs_else, {id}, loop);
                    out.insert(out.end(), else_out.begin(), else_out.end());
                } else {
                    out.push_back(id);
                }
                return out;
            }
            case CsKind::While: {
                connect(frontier, id);
                std::vector<int> breaks;
                LoopCtx ctx{id, &breaks};
                auto body_out = process_stmt(n.cs_then, {id}, &ctx);
                connect(body_out, id);  // back edge
                std::vector<int> out = {id};
                out.insert(out.end(), breaks.begin(), breaks.end());
                return out;
            }
            case CsKind::For: {
                // Desugared: init; while (cond) { body; update }
                for (int init : n.cs_init) frontier = process_stmt(init, std::move(frontier), loop);
                connect(frontier, id);
                std::vector<int> breaks;
                int continue_target = n.cs_update >= 0 ? n.cs_update : id;
                LoopCtx ctx{continue_target, &breaks};
                auto body_out = process_stmt(n.cs_then, {id}, &ctx);
                if (n.cs_update >= 0) {
                    connect(body_out, n.cs_update);
                    add_edge(n.cs_update, id);
                } else {
                    connect(body_out, id);
                }
                std::vector<int> out = {id};
                out.insert(out.end(), breaks.begin(), breaks.end());
                return out;
            }
            case CsKind::Switch:
                return process_switch(id, std::move(frontier), loop);
            case CsKind::Goto:
                connect(frontier, id);
                pending_gotos_.push_back({id, n.jump_label});
                return {};
            case CsKind::Break:
                connect(frontier, id);
                if (loop && loop->breaks) loop->breaks->push_back(id);
                return {};
            case CsKind::Continue:
                connect(frontier, id);
                if (loop) add_edge(id, loop->continue_target);
                return {};
            default:
                connect(frontier, id);
                return {id};
        }
    }

    std::vector<int> process_switch(int id, std::vector<int> frontier, LoopCtx* outer_loop) {
        const AstNode& n = fn_.node(id);
        connect(frontier, id);
        std::vector<int> breaks;
        bool has_default = false;
        std::vector<int> fallthrough;  // frontier within the switch body
        // break inside a switch leaves the switch; continue still targets the
        // enclosing loop.
        LoopCtx ctx{outer_loop ? outer_loop->continue_target : -1, &breaks};
        LoopCtx* body_ctx = &ctx;
        for (int c : fn_.node(n.cs_then).children) {
            const AstNode& child = fn_.node(c);
            if (child.label == NodeLabel::JumpTarget &&
                (child.cs == CsKind::Case || child.cs == CsKind::Default)) {
                add_edge(id, c);  // dispatch edge from the switch predicate
                connect(fallthrough, c);
                fallthrough = {c};
                if (child.cs == CsKind::Default) has_default = true;
                continue;
            }
            fallthrough = process_stmt(c, std::move(fallthrough), body_ctx);
        }
        std::vector<int> out = std::move(fallthrough);
        out.insert(out.end(), breaks.begin(), breaks.end());
        if (!has_default) out.push_back(id);
        return out;
    }
};

struct Definition {
    int node;          // defining CFG node (or PARAM node id)
    std::string var;
    bool strong;       // strong defs kill same-var definitions

    bool operator<(const Definition& o) const {
        return std::tie(node, var, strong) < std::tie(o.node, o.var, o.strong);
    }
};

/// Def/use extraction from an expression subtree. Writes through pointers,
/// indices, or fields are weak updates of the synthetic variable "*base".
class DefUseScanner {
public:
    explicit DefUseScanner(const FunctionAst& fn) : fn_(fn) {}

    std::vector<Definition> defs;
    std::set<std::string> uses;

    void scan_expr(int id) {
        const AstNode& n = fn_.node(id);
        switch (n.label) {
            case NodeLabel::Identifier:
                uses.insert(n.code);
                return;
            case NodeLabel::Call:
                scan_call(n);
                return;
            default:
                for (int c : n.children) scan_expr(c);
        }
    }

private:
    const FunctionAst& fn_;

    static bool is_assignment_symbol(const std::string& s) {
        return !s.empty() && s.back() == '=' && s != "==" && s != "!=" && s != "<=" &&
               s != ">=";
    }

    void scan_call(const AstNode& n) {
        if (is_assignment_symbol(n.op_symbol) && n.children.size() == 2) {
            scan_lvalue(n.children[0], /*compound=*/n.op_symbol != "=");
            scan_expr(n.children[1]);
            return;
        }
        if (n.op_symbol == "++" || n.op_symbol == "--" || n.op_symbol == "++pre" ||
            n.op_symbol == "--pre" || n.op_symbol == "--post") {
            if (!n.children.empty()) scan_lvalue(n.children[0], /*compound=*/true);
            return;
        }
        if (n.op == OperatorKind::Indirection || n.op == OperatorKind::IndirectIndexAccess ||
            n.op == OperatorKind::IndirectFieldAccess || n.op == OperatorKind::FieldAccess) {
            // reading through a pointer/index/field uses the base and the
            // points-to surrogate
            std::optional<std::string> base = base_identifier(n.id);
            if (base) uses.insert("*" + *base);
            for (int c : n.children) scan_expr(c);
            return;
        }
        for (int c : n.children) scan_expr(c);
    }

    void scan_lvalue(int id, bool compound) {
        const AstNode& n = fn_.node(id);
        if (n.label == NodeLabel::Identifier) {
            defs.push_back({-1, n.code, /*strong=*/true});
            if (compound) uses.insert(n.code);
            return;
        }
        std::optional<std::string> base = base_identifier(id);
        if (base) {
            defs.push_back({-1, "*" + *base, /*strong=*/false});
            if (compound) uses.insert("*" + *base);
        }
        // index/base expressions are reads
        scan_expr(id);
    }

    std::optional<std::string> base_identifier(int id) const {
        const AstNode& n = fn_.node(id);
        if (n.label == NodeLabel::Identifier) return n.code;
        if (n.label == NodeLabel::Call && !n.children.empty())
            return base_identifier(n.children[0]);
        return std::nullopt;
    }
};

inline std::vector<int> cfg_nodes_of(const FunctionAst& fn,
                                     const std::vector<CpgEdge>& cfg) {
    std::set<int> ids;
    for (const auto& e : cfg) {
        ids.insert(e.src);
        ids.insert(e.dst);
    }
    (void)fn;
    return {ids.begin(), ids.end()};
}

/// Per-statement def/use sets. For control structures only the condition
/// expression is scanned; bodies are separate statements.
inline void stmt_defs_uses(const FunctionAst& fn, int id,
                           std::vector<Definition>& defs, std::set<std::string>& uses) {
    const AstNode& n = fn.node(id);
    DefUseScanner scanner(fn);
    if (n.label == NodeLabel::ControlStructure) {
        if (n.cs_cond >= 0) scanner.scan_expr(n.cs_cond);
    } else if (n.label == NodeLabel::Return) {
        for (int c : n.children) scanner.scan_expr(c);
    } else if (n.label == NodeLabel::Method || n.label == NodeLabel::MethodReturn ||
               n.label == NodeLabel::Block || n.label == NodeLabel::Local ||
               n.label == NodeLabel::JumpTarget) {
        // no defs/uses at these nodes
    } else {
        scanner.scan_expr(id);
    }
    defs = std::move(scanner.defs);
    for (auto& d : defs) d.node = id;
    uses = std::move(scanner.uses);
}

}  // namespace detail

inline std::vector<CpgEdge> build_cfg(const FunctionAst& fn) {
    int exit_id = -1;
    for (const auto& n : fn.nodes)
        if (n.label == NodeLabel::MethodReturn) exit_id = n.id;
    if (exit_id < 0) throw CfgError("function has no METHOD_RETURN node");
    return detail::CfgBuilder(fn, exit_id).build();
}

/// Classic reaching definitions over the statement CFG: GEN/KILL to a fixed
/// point, then def sites are connected to reachable uses. PARAM nodes define
/// their parameter at function entry.
inline std::vector<CpgEdge> build_ddg(const FunctionAst& fn,
                                      const std::vector<CpgEdge>& cfg) {
    using detail::Definition;

    std::vector<int> stmts = detail::cfg_nodes_of(fn, cfg);
    std::unordered_map<int, std::vector<int>> preds;
    for (const auto& e : cfg) preds[e.dst].push_back(e.src);

    // Global definition table.
    std::vector<Definition> all_defs;
    std::unordered_map<int, std::vector<size_t>> gen;        // stmt -> def indices
    std::unordered_map<int, std::set<std::string>> uses_of;  // stmt -> used vars

    for (const auto& n : fn.nodes) {
        if (n.label == NodeLabel::Param && !n.code.empty()) {
            gen[fn.root].push_back(all_defs.size());
            all_defs.push_back({n.id, n.code, true});
        }
    }
    for (int s : stmts) {
        std::vector<Definition> defs;
        std::set<std::string> uses;
        detail::stmt_defs_uses(fn, s, defs, uses);
        for (auto& d : defs) {
            gen[s].push_back(all_defs.size());
            all_defs.push_back(d);
        }
        uses_of[s] = std::move(uses);
    }

    auto kills = [&](int stmt, size_t def_idx) {
        // def_idx is killed at stmt if stmt strongly defines the same variable
        // at a different site
        for (size_t g : gen[stmt]) {
            const auto& d = all_defs[g];
            if (d.strong && d.var == all_defs[def_idx].var && g != def_idx) return true;
        }
        return false;
    };

    std::unordered_map<int, std::set<size_t>> in, out;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int s : stmts) {
            std::set<size_t> new_in;
            for (int p : preds[s])
                for (size_t d : out[p]) new_in.insert(d);
            std::set<size_t> new_out;
            for (size_t g : gen[s]) new_out.insert(g);
            for (size_t d : new_in)
                if (!kills(s, d)) new_out.insert(d);
            if (new_in != in[s] || new_out != out[s]) {
                in[s] = std::move(new_in);
                out[s] = std::move(new_out);
                changed = true;
            }
        }
    }

    std::set<CpgEdge> edges;
    for (int s : stmts) {
        for (const std::string& v : uses_of[s]) {
            for (size_t d : in[s]) {
                if (all_defs[d].var == v)
                    edges.insert({all_defs[d].node, s, EdgeKind::Ddg, v});
            }
        }
    }
    return {edges.begin(), edges.end()};
}

/// Post-dominator sets over the statement CFG, by iterative intersection.
inline std::map<int, std::set<int>> post_dominators(const std::vector<int>& nodes,
                                                    const std::vector<CpgEdge>& cfg,
                                                    int exit_id) {
    std::unordered_map<int, std::vector<int>> succs;
    for (const auto& e : cfg) succs[e.src].push_back(e.dst);

    std::set<int> all(nodes.begin(), nodes.end());
    std::map<int, std::set<int>> pdom;
    for (int n : nodes) pdom[n] = n == exit_id ? std::set<int>{exit_id} : all;

    bool changed = true;
    while (changed) {
        changed = false;
        for (int n : nodes) {
            if (n == exit_id) continue;
            std::set<int> meet = all;
            bool first = true;
            for (int s : succs[n]) {
                if (first) {
                    meet = pdom[s];
                    first = false;
                } else {
                    std::set<int> tmp;
                    std::set_intersection(meet.begin(), meet.end(), pdom[s].begin(),
                                          pdom[s].end(), std::inserter(tmp, tmp.begin()));
                    meet = std::move(tmp);
                }
            }
            if (first) meet.clear();  // no successors
            meet.insert(n);
            if (meet != pdom[n]) {
                pdom[n] = std::move(meet);
                changed = true;
            }
        }
    }
    return pdom;
}

/// Control dependence: edge c->s iff s post-dominates some successor of c
/// but does not post-dominate c.
inline std::vector<CpgEdge> build_cdg(const FunctionAst& fn,
                                      const std::vector<CpgEdge>& cfg) {
    int exit_id = -1;
    for (const auto& n : fn.nodes)
        if (n.label == NodeLabel::MethodReturn) exit_id = n.id;

    std::vector<int> nodes = detail::cfg_nodes_of(fn, cfg);
    auto pdom = post_dominators(nodes, cfg, exit_id);

    std::unordered_map<int, std::vector<int>> succs;
    for (const auto& e : cfg) succs[e.src].push_back(e.dst);

    std::set<CpgEdge> edges;
    for (int c : nodes) {
        if (succs[c].size() < 2) continue;
        for (int s : nodes) {
            if (s == c) continue;
            if (pdom[c].count(s)) continue;  // s post-dominates c
            for (int t : succs[c]) {
                if (pdom[t].count(s)) {
                    edges.insert({c, s, EdgeKind::Cdg, std::nullopt});
                    break;
                }
            }
        }
    }
    return {edges.begin(), edges.end()};
}

/// The full property graph: AST, CFG, DDG, and CDG edges over one node set.
inline PropertyGraph build_cpg(FunctionAst fn) {
    PropertyGraph g;
    g.entry = fn.root;
    for (const auto& n : fn.nodes)
        if (n.label == NodeLabel::MethodReturn) g.exit = n.id;
    if (g.exit < 0) throw CfgError("function has no METHOD_RETURN node");

    auto ast = build_ast_edges(fn);
    auto cfg = build_cfg(fn);
    auto ddg = build_ddg(fn, cfg);
    auto cdg = build_cdg(fn, cfg);

    g.ast = std::move(fn);
    g.edges.reserve(ast.size() + cfg.size() + ddg.size() + cdg.size());
    for (auto* v : {&ast, &cfg, &ddg, &cdg})
        g.edges.insert(g.edges.end(), v->begin(), v->end());
    return g;
}

/// Graphviz export; edge styling follows the usual CPG legend (AST solid,
/// CFG dashed red, CDG dotted purple, DDG dash-dot green).
inline std::string to_dot(const PropertyGraph& g) {
    std::ostringstream os;
    os << "digraph cpg {\n  node [shape=box, fontname=\"monospace\"];\n";
    for (const auto& n : g.nodes()) {
        std::string label = std::string(to_string(n.label));
        if (!n.code.empty()) {
            std::string esc;
            for (char c : n.code) {
                if (c == '"' || c == '\\') esc += '\\';
                esc += c;
            }
            label += "\\n" + esc;
        }
        os << "  n" << n.id << " [label=\"" << label << "\"];\n";
    }
    std::vector<CpgEdge> sorted = g.edges;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& e : sorted) {
        os << "  n" << e.src << " -> n" << e.dst;
        switch (e.kind) {
            case EdgeKind::Ast: os << " [color=black, style=solid]"; break;
            case EdgeKind::Cfg: os << " [color=red, style=dashed]"; break;
            case EdgeKind::Cdg: os << " [color=purple, style=dotted]"; break;
            case EdgeKind::Ddg:
                os << " [color=green, style=\"dashed,dotted\"";
                if (e.var) os << ", label=\"" << *e.var << "\"";
                os << "]";
                break;
        }
        os << ";\n";
    }
    os << "}\n";
    return os.str();
}

}  // namespace grapheye
