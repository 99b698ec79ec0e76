#pragma once

#include <cstdlib>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "grapheye/ast.hpp"
#include "grapheye/errors.hpp"
#include "grapheye/lexer.hpp"

namespace grapheye {

namespace detail {

/// Parse-time tree node; flattened into FunctionAst (pre-order ids) at the end.
struct TreeNode {
    NodeLabel label = NodeLabel::Unknown;
    std::string code;
    std::optional<OperatorKind> op;
    std::string op_symbol;
    std::optional<std::string> callee;
    std::optional<LiteralValue> literal;
    std::optional<TypeAnnotation> type;
    CsKind cs = CsKind::None;
    std::string jump_label;
    std::vector<std::unique_ptr<TreeNode>> kids;
    // Role pointers into kids (CFG builder input).
    std::vector<TreeNode*> cs_init;
    TreeNode* cs_cond = nullptr;
    TreeNode* cs_update = nullptr;
    TreeNode* cs_then = nullptr;
    TreeNode* cs_else = nullptr;

    TreeNode* add(std::unique_ptr<TreeNode> k) {
        kids.push_back(std::move(k));
        return kids.back().get();
    }
};

inline std::unique_ptr<TreeNode> make_node(NodeLabel label, std::string code = "") {
    auto n = std::make_unique<TreeNode>();
    n->label = label;
    n->code = std::move(code);
    return n;
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    std::vector<FunctionAst> parse_unit() {
        std::vector<FunctionAst> out;
        while (!at_end()) {
            size_t save = pos_;
            if (looks_like_function_definition()) {
                pos_ = save;
                out.push_back(parse_function_definition());
            } else {
                pos_ = save;
                skip_top_level_item();
            }
        }
        return out;
    }

private:
    std::vector<Token> toks_;
    size_t pos_ = 0;
    std::set<std::string>* callees_ = nullptr;

    bool at_end() const { return pos_ >= toks_.size(); }
    const Token& cur() const {
        if (at_end()) {
            static const Token eof{Token::Kind::Punctuation, "<eof>", 0, 0};
            return toks_.empty() ? eof : toks_.back();
        }
        return toks_[pos_];
    }
    const Token& peek(size_t off = 1) const {
        static const Token eof{Token::Kind::Punctuation, "<eof>", 0, 0};
        return pos_ + off < toks_.size() ? toks_[pos_ + off] : eof;
    }
    Token take() {
        Token t = cur();
        if (!at_end()) ++pos_;
        return t;
    }
    [[noreturn]] void fail(const std::string& expected) const {
        const Token& t = cur();
        throw ParseError(t.line, t.col, expected, at_end() ? "end of input" : t.text);
    }
    void expect_punct(const char* p) {
        if (!cur().is_punct(p)) fail(std::string("'") + p + "'");
        ++pos_;
    }

    static bool is_basic_type_kw(const std::string& t) {
        return t == "char" || t == "int" || t == "short" || t == "float" ||
               t == "double" || t == "long" || t == "string" || t == "void" ||
               t == "struct" || t == "union";
    }
    static bool is_decl_start_kw(const std::string& t) {
        return is_basic_type_kw(t) || t == "signed" || t == "unsigned" ||
               t == "const" || t == "static" || t == "inline" || t == "volatile" ||
               t == "register" || t == "extern";
    }
    bool at_decl_start() const {
        return cur().kind == Token::Kind::Keyword && is_decl_start_kw(cur().text);
    }

    // ---- type parsing ---------------------------------------------------

    TypeAnnotation parse_type_specifiers() {
        TypeAnnotation ta;
        bool have_basic = false;
        bool saw_long_or_short = false;
        for (;;) {
            if (cur().kind != Token::Kind::Keyword) break;
            const std::string& t = cur().text;
            if (t == "const" || t == "volatile" || t == "static" || t == "inline" ||
                t == "register" || t == "extern") {
                ++pos_;
                continue;
            }
            if (t == "signed") { ta.add(TypeQualifier::Signed); ++pos_; continue; }
            if (t == "unsigned") { ta.add(TypeQualifier::Unsigned); ++pos_; continue; }
            if (!is_basic_type_kw(t)) break;
            ++pos_;
            if (t == "struct" || t == "union") {
                ta.basic = t == "struct" ? BasicType::Struct : BasicType::Union;
                if (cur().kind == Token::Kind::Identifier) ++pos_;  // tag name
                have_basic = true;
                continue;
            }
            if (t == "int") {
                if (!saw_long_or_short && !have_basic) ta.basic = BasicType::Int;
                have_basic = true;
                continue;
            }
            if (t == "char") ta.basic = BasicType::Char;
            else if (t == "short") { ta.basic = BasicType::Short; saw_long_or_short = true; }
            else if (t == "float") ta.basic = BasicType::Float;
            else if (t == "double") ta.basic = BasicType::Double;
            else if (t == "long") { ta.basic = BasicType::Long; saw_long_or_short = true; }
            else if (t == "string") ta.basic = BasicType::String;
            else if (t == "void") ta.basic = BasicType::Void;
            have_basic = true;
        }
        if (!have_basic && !ta.has(TypeQualifier::Signed) && !ta.has(TypeQualifier::Unsigned))
            fail("type specifier");
        return ta;
    }

    void parse_pointer_suffix(TypeAnnotation& ta) {
        while (cur().is_op("*")) {
            ta.add(TypeQualifier::Pointer);
            ++pos_;
            while (cur().is_kw("const") || cur().is_kw("volatile")) ++pos_;
        }
    }

    // ---- function recognition -------------------------------------------

    bool looks_like_function_definition() { return looks_like_function_definition_at(pos_); }

    bool looks_like_function_definition_at(size_t p) {
        size_t save = pos_;
        pos_ = p;
        bool ok = false;
        try {
            if (at_decl_start()) {
                TypeAnnotation ta = parse_type_specifiers();
                (void)ta;
                parse_pointer_suffix(ta);
                if (cur().kind == Token::Kind::Identifier) {
                    ++pos_;
                    if (cur().is_punct("(")) {
                        size_t depth = 0;
                        while (!at_end()) {
                            if (cur().is_punct("(")) ++depth;
                            else if (cur().is_punct(")")) {
                                --depth;
                                if (depth == 0) { ++pos_; break; }
                            }
                            ++pos_;
                        }
                        ok = cur().is_punct("{");
                    }
                }
            }
        } catch (const ParseError&) {
            ok = false;
        }
        pos_ = save;
        return ok;
    }

    void skip_top_level_item() {
        // Non-function top-level content: skip to ';' at depth 0, consuming
        // any balanced brace group on the way (struct defs, initializers).
        while (!at_end()) {
            if (cur().is_punct("{")) {
                skip_balanced("{", "}");
                if (cur().is_punct(";")) ++pos_;
                return;
            }
            if (cur().is_punct(";")) { ++pos_; return; }
            ++pos_;
        }
    }

    void skip_balanced(const char* open, const char* close) {
        size_t depth = 0;
        while (!at_end()) {
            if (cur().is_punct(open)) ++depth;
            else if (cur().is_punct(close)) {
                --depth;
                if (depth == 0) { ++pos_; return; }
            }
            ++pos_;
        }
        fail(std::string("'") + close + "'");
    }

    // ---- function definition --------------------------------------------

    FunctionAst parse_function_definition() {
        FunctionAst fn;
        callees_ = &fn.callees;

        TypeAnnotation ret_type = parse_type_specifiers();
        parse_pointer_suffix(ret_type);
        if (cur().kind != Token::Kind::Identifier) fail("function name");
        std::string name = take().text;
        fn.name = name;

        auto method = make_node(NodeLabel::Method, name);

        expect_punct("(");
        if (!cur().is_punct(")")) {
            if (cur().is_kw("void") && peek().is_punct(")")) {
                ++pos_;
            } else {
                for (;;) {
                    TypeAnnotation pt = parse_type_specifiers();
                    parse_pointer_suffix(pt);
                    std::string pname;
                    if (cur().kind == Token::Kind::Identifier) pname = take().text;
                    while (cur().is_punct("[")) {
                        pt.add(TypeQualifier::Array);
                        skip_balanced("[", "]");
                    }
                    auto param = make_node(NodeLabel::Param, pname);
                    param->type = pt;
                    method->add(std::move(param));
                    if (cur().is_punct(",")) { ++pos_; continue; }
                    break;
                }
            }
        }
        expect_punct(")");

        if (!cur().is_punct("{")) fail("function body");
        TreeNode* body = method->add(parse_block());

        auto ret = make_node(NodeLabel::MethodReturn, "RET");
        ret->type = ret_type;
        method->add(std::move(ret));
        (void)body;

        flatten(fn, *method);
        callees_ = nullptr;
        return fn;
    }

    // ---- statements -------------------------------------------------------

    std::unique_ptr<TreeNode> parse_block() {
        expect_punct("{");
        auto block = make_node(NodeLabel::Block);
        while (!cur().is_punct("}")) {
            if (at_end()) fail("'}'");
            parse_statement(*block);
        }
        ++pos_;  // consume '}'
        return block;
    }

    /// Parses one statement, appending its node(s) to parent.kids.
    /// A declaration with initializers appends a LOCAL plus an assignment
    /// CALL per declarator.
    void parse_statement(TreeNode& parent) {
        size_t start = pos_;
        try {
            parse_statement_inner(parent);
        } catch (const ParseError&) {
            // Degrade to an UNKNOWN node covering the rest of the statement.
            if (pos_ == start && (cur().is_punct("}") || at_end())) throw;
            pos_ = start;
            std::string code;
            size_t guard = 0;
            while (!at_end() && !cur().is_punct(";") && !cur().is_punct("}")) {
                if (cur().is_punct("{")) {
                    size_t b = pos_;
                    skip_balanced("{", "}");
                    for (size_t k = b; k < pos_; ++k) {
                        if (!code.empty()) code += ' ';
                        code += toks_[k].text;
                    }
                    break;
                }
                if (!code.empty()) code += ' ';
                code += take().text;
                if (++guard > toks_.size()) break;
            }
            if (cur().is_punct(";")) { code += " ;"; ++pos_; }
            if (pos_ == start) ++pos_;  // always make progress
            parent.add(make_node(NodeLabel::Unknown, code));
        }
    }

    void parse_statement_inner(TreeNode& parent) {
        if (cur().is_punct(";")) { ++pos_; return; }
        if (cur().is_punct("{")) { parent.add(parse_block()); return; }
        if (cur().is_kw("if")) { parse_if(parent); return; }
        if (cur().is_kw("while")) { parse_while(parent); return; }
        if (cur().is_kw("for")) { parse_for(parent); return; }
        if (cur().is_kw("switch")) { parse_switch(parent); return; }
        if (cur().is_kw("return")) { parse_return(parent); return; }
        if (cur().is_kw("goto")) { parse_goto(parent); return; }
        if (cur().is_kw("break")) {
            ++pos_;
            expect_punct(";");
            auto n = make_node(NodeLabel::ControlStructure, "break");
            n->cs = CsKind::Break;
            parent.add(std::move(n));
            return;
        }
        if (cur().is_kw("continue")) {
            ++pos_;
            expect_punct(";");
            auto n = make_node(NodeLabel::ControlStructure, "continue");
            n->cs = CsKind::Continue;
            parent.add(std::move(n));
            return;
        }
        if (cur().is_kw("case")) { parse_case(parent); return; }
        if (cur().is_kw("default")) {
            ++pos_;
            expect_punct(":");
            auto n = make_node(NodeLabel::JumpTarget, "default");
            n->cs = CsKind::Default;
            parent.add(std::move(n));
            return;
        }
        // goto label definition: identifier ':' (but not 'a::b')
        if (cur().kind == Token::Kind::Identifier && peek().is_punct(":")) {
            std::string lbl = take().text;
            ++pos_;  // ':'
            auto n = make_node(NodeLabel::JumpTarget, lbl);
            n->jump_label = lbl;
            parent.add(std::move(n));
            return;
        }
        if (at_decl_start()) { parse_declaration(parent); return; }
        // Unsupported statement keywords degrade via the UNKNOWN recovery path.
        if (cur().kind == Token::Kind::Keyword &&
            (cur().text == "do" || cur().text == "typedef" || cur().text == "enum"))
            fail("supported statement");
        // expression statement
        parent.add(parse_expression());
        expect_punct(";");
    }

    void parse_declaration(TreeNode& parent) {
        TypeAnnotation base = parse_type_specifiers();
        for (;;) {
            TypeAnnotation ta = base;
            parse_pointer_suffix(ta);
            if (cur().kind != Token::Kind::Identifier) fail("declarator name");
            std::string name = take().text;
            while (cur().is_punct("[")) {
                ta.add(TypeQualifier::Array);
                skip_balanced("[", "]");
            }
            auto local = make_node(NodeLabel::Local, name);
            local->type = ta;
            parent.add(std::move(local));

            if (cur().is_op("=")) {
                ++pos_;
                auto assign = make_node(NodeLabel::Call);
                assign->op = OperatorKind::Assignment;
                assign->op_symbol = "=";
                assign->add(make_node(NodeLabel::Identifier, name));
                auto init = cur().is_punct("{") ? parse_braced_initializer()
                                                : parse_assignment_expr();
                assign->code = name + " = " + init->code;
                assign->add(std::move(init));
                parent.add(std::move(assign));
            }
            if (cur().is_punct(",")) { ++pos_; continue; }
            break;
        }
        expect_punct(";");
    }

    std::unique_ptr<TreeNode> parse_braced_initializer() {
        size_t b = pos_;
        skip_balanced("{", "}");
        std::string code;
        for (size_t k = b; k < pos_; ++k) {
            if (!code.empty()) code += ' ';
            code += toks_[k].text;
        }
        return make_node(NodeLabel::Unknown, code);
    }

    std::unique_ptr<TreeNode> wrapped_body() {
        if (cur().is_punct("{")) return parse_block();
        auto block = make_node(NodeLabel::Block);
        parse_statement(*block);
        return block;
    }

    void parse_if(TreeNode& parent) {
        ++pos_;
        auto cs = make_node(NodeLabel::ControlStructure, "if");
        cs->cs = CsKind::If;
        expect_punct("(");
        cs->cs_cond = cs->add(parse_expression());
        expect_punct(")");
        cs->cs_then = cs->add(wrapped_body());
        if (cur().is_kw("else")) {
            ++pos_;
            if (cur().is_kw("if")) {
                auto wrap = make_node(NodeLabel::Block);
                parse_if(*wrap);
                cs->cs_else = cs->add(std::move(wrap));
            } else {
                cs->cs_else = cs->add(wrapped_body());
            }
        }
        parent.add(std::move(cs));
    }

    void parse_while(TreeNode& parent) {
        ++pos_;
        auto cs = make_node(NodeLabel::ControlStructure, "while");
        cs->cs = CsKind::While;
        expect_punct("(");
        cs->cs_cond = cs->add(parse_expression());
        expect_punct(")");
        cs->cs_then = cs->add(wrapped_body());
        parent.add(std::move(cs));
    }

    void parse_for(TreeNode& parent) {
        ++pos_;
        auto cs = make_node(NodeLabel::ControlStructure, "for");
        cs->cs = CsKind::For;
        expect_punct("(");
        if (!cur().is_punct(";")) {
            size_t before = cs->kids.size();
            if (at_decl_start()) {
                parse_declaration(*cs);  // consumes ';'
            } else {
                cs->add(parse_expression());
                expect_punct(";");
            }
            for (size_t k = before; k < cs->kids.size(); ++k)
                cs->cs_init.push_back(cs->kids[k].get());
        } else {
            ++pos_;
        }
        if (!cur().is_punct(";")) cs->cs_cond = cs->add(parse_expression());
        expect_punct(";");
        if (!cur().is_punct(")")) cs->cs_update = cs->add(parse_expression());
        expect_punct(")");
        cs->cs_then = cs->add(wrapped_body());
        parent.add(std::move(cs));
    }

    void parse_switch(TreeNode& parent) {
        ++pos_;
        auto cs = make_node(NodeLabel::ControlStructure, "switch");
        cs->cs = CsKind::Switch;
        expect_punct("(");
        cs->cs_cond = cs->add(parse_expression());
        expect_punct(")");
        if (!cur().is_punct("{")) fail("switch body");
        cs->cs_then = cs->add(parse_block());
        parent.add(std::move(cs));
    }

    void parse_case(TreeNode& parent) {
        ++pos_;
        auto n = make_node(NodeLabel::JumpTarget);
        n->cs = CsKind::Case;
        auto value = parse_expression();
        n->code = "case " + value->code;
        n->add(std::move(value));
        expect_punct(":");
        parent.add(std::move(n));
    }

    void parse_return(TreeNode& parent) {
        ++pos_;
        auto n = make_node(NodeLabel::Return, "return");
        if (!cur().is_punct(";")) {
            auto v = parse_expression();
            n->code = "return " + v->code;
            n->add(std::move(v));
        }
        expect_punct(";");
        parent.add(std::move(n));
    }

    void parse_goto(TreeNode& parent) {
        ++pos_;
        if (cur().kind != Token::Kind::Identifier) fail("label name");
        std::string lbl = take().text;
        expect_punct(";");
        auto n = make_node(NodeLabel::ControlStructure, "goto " + lbl);
        n->cs = CsKind::Goto;
        n->jump_label = lbl;
        parent.add(std::move(n));
    }

    // ---- expressions ------------------------------------------------------

    std::unique_ptr<TreeNode> make_op_call(std::optional<OperatorKind> kind,
                                           std::string symbol,
                                           std::unique_ptr<TreeNode> lhs,
                                           std::unique_ptr<TreeNode> rhs) {
        auto n = make_node(NodeLabel::Call);
        n->op = kind;
        n->code = lhs->code + " " + symbol + " " + rhs->code;
        n->op_symbol = std::move(symbol);
        n->add(std::move(lhs));
        n->add(std::move(rhs));
        return n;
    }

    std::unique_ptr<TreeNode> parse_expression() {
        auto lhs = parse_assignment_expr();
        // comma expressions fold left into unknown-operator calls
        while (cur().is_punct(",")) {
            ++pos_;
            lhs = make_op_call(std::nullopt, ",", std::move(lhs), parse_assignment_expr());
        }
        return lhs;
    }

    static std::optional<OperatorKind> binary_op_kind(const std::string& sym) {
        if (sym == "=") return OperatorKind::Assignment;
        if (sym == "||" || sym == "|") return OperatorKind::LogicalOr;
        if (sym == "&&") return OperatorKind::And;
        if (sym == "&") return OperatorKind::LogicalAnd;
        if (sym == "==") return OperatorKind::Equals;
        if (sym == "!=") return OperatorKind::NotEquals;
        if (sym == "<") return OperatorKind::LessThan;
        if (sym == ">") return OperatorKind::GreaterThan;
        if (sym == ">=") return OperatorKind::GreaterEqualsThan;
        if (sym == "+") return OperatorKind::Addition;
        if (sym == "-") return OperatorKind::Subtraction;
        if (sym == "*") return OperatorKind::Multiplication;
        if (sym == "/") return OperatorKind::Division;
        if (sym == "%") return OperatorKind::Modulo;
        return std::nullopt;  // <=, <<, >>, ^, compound assignments, ...
    }

    static int binary_precedence(const std::string& sym) {
        if (sym == "||") return 1;
        if (sym == "&&") return 2;
        if (sym == "|") return 3;
        if (sym == "^") return 4;
        if (sym == "&") return 5;
        if (sym == "==" || sym == "!=") return 6;
        if (sym == "<" || sym == ">" || sym == "<=" || sym == ">=") return 7;
        if (sym == "<<" || sym == ">>") return 8;
        if (sym == "+" || sym == "-") return 9;
        if (sym == "*" || sym == "/" || sym == "%") return 10;
        return 0;
    }

    static bool is_assignment_symbol(const std::string& s) {
        return s == "=" || s == "+=" || s == "-=" || s == "*=" || s == "/=" ||
               s == "%=" || s == "&=" || s == "|=" || s == "^=" || s == "<<=" ||
               s == ">>=";
    }

    std::unique_ptr<TreeNode> parse_assignment_expr() {
        auto lhs = parse_binary_expr(1);
        if (cur().kind == Token::Kind::Operator && is_assignment_symbol(cur().text)) {
            std::string sym = take().text;
            auto rhs = parse_assignment_expr();  // right associative
            return make_op_call(binary_op_kind(sym), sym, std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    std::unique_ptr<TreeNode> parse_binary_expr(int min_prec) {
        auto lhs = parse_unary_expr();
        for (;;) {
            if (cur().kind != Token::Kind::Operator) break;
            const std::string sym = cur().text;
            int prec = binary_precedence(sym);
            if (prec < min_prec || prec == 0) break;
            ++pos_;
            auto rhs = parse_binary_expr(prec + 1);
            lhs = make_op_call(binary_op_kind(sym), sym, std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    bool at_cast() const {
        if (!cur().is_punct("(")) return false;
        const Token& t = peek();
        return t.kind == Token::Kind::Keyword && is_decl_start_kw(t.text);
    }

    std::unique_ptr<TreeNode> parse_unary_expr() {
        if (cur().kind == Token::Kind::Operator) {
            const std::string sym = cur().text;
            std::optional<OperatorKind> kind;
            if (sym == "-") kind = OperatorKind::Minus;
            else if (sym == "*") kind = OperatorKind::Indirection;
            else if (sym == "&") kind = OperatorKind::AddressOf;
            else if (sym == "+" || sym == "!" || sym == "~" || sym == "++" || sym == "--")
                kind = std::nullopt;
            else
                goto not_prefix;
            {
                ++pos_;
                auto operand = parse_unary_expr();
                auto n = make_node(NodeLabel::Call, sym + operand->code);
                n->op = kind;
                n->op_symbol = sym == "++" || sym == "--" ? sym + "pre" : sym;
                n->add(std::move(operand));
                return n;
            }
        }
    not_prefix:
        if (cur().is_kw("sizeof")) {
            ++pos_;
            auto n = make_node(NodeLabel::Call, "sizeof");
            n->op = OperatorKind::SizeOf;
            n->op_symbol = "sizeof";
            if (cur().is_punct("(")) {
                ++pos_;
                if (at_decl_start()) {
                    TypeAnnotation ta = parse_type_specifiers();
                    parse_pointer_suffix(ta);
                    n->type = ta;
                    n->code = "sizeof(" + to_string(ta) + ")";
                } else {
                    auto e = parse_expression();
                    n->code = "sizeof(" + e->code + ")";
                    n->add(std::move(e));
                }
                expect_punct(")");
            } else {
                auto e = parse_unary_expr();
                n->code = "sizeof " + e->code;
                n->add(std::move(e));
            }
            return n;
        }
        if (cur().is_kw("new")) {
            ++pos_;
            auto n = make_node(NodeLabel::Call, "new");
            n->op = OperatorKind::New;
            n->op_symbol = "new";
            TypeAnnotation ta = parse_type_specifiers();
            parse_pointer_suffix(ta);
            if (cur().is_punct("[")) {
                ta.add(TypeQualifier::Array);
                ++pos_;
                if (!cur().is_punct("]")) n->add(parse_expression());
                expect_punct("]");
            } else if (cur().is_punct("(")) {
                ++pos_;
                while (!cur().is_punct(")")) {
                    n->add(parse_assignment_expr());
                    if (cur().is_punct(",")) ++pos_;
                }
                ++pos_;
            }
            n->type = ta;
            n->code = "new " + to_string(ta);
            return n;
        }
        if (cur().is_kw("delete")) {
            ++pos_;
            auto n = make_node(NodeLabel::Call, "delete");
            n->op = OperatorKind::Delete;
            n->op_symbol = "delete";
            if (cur().is_punct("[")) { ++pos_; expect_punct("]"); }
            else if (cur().is_punct("(")) {
                // "delete(p)" spelling
                ++pos_;
                auto e = parse_expression();
                n->code = "delete(" + e->code + ")";
                n->add(std::move(e));
                expect_punct(")");
                return n;
            }
            auto e = parse_unary_expr();
            n->code = "delete " + e->code;
            n->add(std::move(e));
            return n;
        }
        if (at_cast()) {
            size_t save = pos_;
            ++pos_;  // '('
            TypeAnnotation ta = parse_type_specifiers();
            parse_pointer_suffix(ta);
            if (cur().is_punct(")")) {
                ++pos_;
                auto operand = parse_unary_expr();
                auto n = make_node(NodeLabel::Call, "(" + to_string(ta) + ") " + operand->code);
                n->op = OperatorKind::Cast;
                n->op_symbol = "()cast";
                n->type = ta;
                n->add(std::move(operand));
                return n;
            }
            pos_ = save;  // not a cast after all
        }
        return parse_postfix_expr();
    }

    std::unique_ptr<TreeNode> parse_postfix_expr() {
        auto base = parse_primary_expr();
        for (;;) {
            if (cur().is_punct("(")) {
                ++pos_;
                auto call = make_node(NodeLabel::Call);
                std::string args;
                while (!cur().is_punct(")")) {
                    if (at_end()) fail("')'");
                    auto a = parse_assignment_expr();
                    if (!args.empty()) args += ", ";
                    args += a->code;
                    call->add(std::move(a));
                    if (cur().is_punct(",")) ++pos_;
                    else break;
                }
                expect_punct(")");
                if (base->label == NodeLabel::Identifier && base->kids.empty()) {
                    call->callee = base->code;
                    call->code = base->code + "(" + args + ")";
                    if (callees_) callees_->insert(base->code);
                } else {
                    call->op_symbol = "()";
                    call->code = base->code + "(" + args + ")";
                    call->kids.insert(call->kids.begin(), std::move(base));
                }
                base = std::move(call);
                continue;
            }
            if (cur().is_punct("[")) {
                ++pos_;
                auto idx = parse_expression();
                expect_punct("]");
                auto n = make_node(NodeLabel::Call, base->code + "[" + idx->code + "]");
                n->op = OperatorKind::IndirectIndexAccess;
                n->op_symbol = "[]";
                n->add(std::move(base));
                n->add(std::move(idx));
                base = std::move(n);
                continue;
            }
            if (cur().is_op(".") || cur().is_op("->")) {
                std::string sym = take().text;
                if (cur().kind != Token::Kind::Identifier) fail("member name");
                std::string member = take().text;
                auto n = make_node(NodeLabel::Call, base->code + sym + member);
                n->op = sym == "." ? OperatorKind::FieldAccess : OperatorKind::IndirectFieldAccess;
                n->op_symbol = sym;
                n->add(std::move(base));
                n->add(make_node(NodeLabel::FieldIdentifier, member));
                base = std::move(n);
                continue;
            }
            if (cur().is_op("++") || cur().is_op("--")) {
                std::string sym = take().text;
                auto n = make_node(NodeLabel::Call, base->code + sym);
                n->op = sym == "++" ? std::optional(OperatorKind::PostIncrement) : std::nullopt;
                n->op_symbol = sym == "++" ? sym : sym + "post";
                n->add(std::move(base));
                base = std::move(n);
                continue;
            }
            break;
        }
        return base;
    }

    std::unique_ptr<TreeNode> parse_primary_expr() {
        const Token& t = cur();
        switch (t.kind) {
            case Token::Kind::Identifier: {
                std::string name = take().text;
                if (cur().is_op("::")) {
                    std::string qualified = name;
                    while (cur().is_op("::")) {
                        ++pos_;
                        if (cur().kind != Token::Kind::Identifier) fail("qualified name");
                        qualified += "::" + take().text;
                    }
                    return make_node(NodeLabel::FieldIdentifier, qualified);
                }
                return make_node(NodeLabel::Identifier, name);
            }
            case Token::Kind::IntegerLiteral: {
                Token lit = take();
                auto n = make_node(NodeLabel::Literal, lit.text);
                n->literal = parse_int_literal(lit.text);
                return n;
            }
            case Token::Kind::FloatLiteral: {
                Token lit = take();
                auto n = make_node(NodeLabel::Literal, lit.text);
                n->literal = LiteralValue::make_float(std::strtof(lit.text.c_str(), nullptr));
                return n;
            }
            case Token::Kind::CharLiteral: {
                Token lit = take();
                auto n = make_node(NodeLabel::Literal, lit.text);
                n->literal = LiteralValue::make_char(char_code_point(lit.text));
                return n;
            }
            case Token::Kind::StringLiteral: {
                Token lit = take();
                auto n = make_node(NodeLabel::Literal, lit.text);
                n->literal = LiteralValue::make_string(string_byte_length(lit.text));
                return n;
            }
            default:
                if (t.is_punct("(")) {
                    ++pos_;
                    auto e = parse_expression();
                    expect_punct(")");
                    return e;
                }
                fail("expression");
        }
    }

    static LiteralValue parse_int_literal(const std::string& text) {
        size_t end = text.size();
        while (end > 0 && (text[end - 1] == 'u' || text[end - 1] == 'U' ||
                           text[end - 1] == 'l' || text[end - 1] == 'L'))
            --end;
        errno = 0;
        long long v = std::strtoll(text.substr(0, end).c_str(), nullptr, 0);
        if (errno == ERANGE || v < INT32_MIN || v > INT32_MAX)
            return LiteralValue::make_unknown();  // outside the 32-bit scheme
        return LiteralValue::make_int(int32_t(v));
    }

    static uint32_t char_code_point(const std::string& text) {
        // text includes the quotes
        if (text.size() < 3) return 0;
        std::string body = text.substr(1, text.size() - 2);
        if (body.empty()) return 0;
        if (body[0] != '\\') return uint32_t(static_cast<unsigned char>(body[0]));
        if (body.size() < 2) return uint32_t('\\');
        switch (body[1]) {
            case 'n': return '\n';
            case 't': return '\t';
            case 'r': return '\r';
            case '0': return '\0';
            case '\\': return '\\';
            case '\'': return '\'';
            case '"': return '"';
            case 'x': return uint32_t(std::strtoul(body.substr(2).c_str(), nullptr, 16));
            default: return uint32_t(static_cast<unsigned char>(body[1]));
        }
    }

    static uint32_t string_byte_length(const std::string& text) {
        // text includes the quotes; count bytes after unescaping
        uint32_t len = 0;
        for (size_t i = 1; i + 1 < text.size(); ++i) {
            if (text[i] == '\\' && i + 2 < text.size()) ++i;
            ++len;
        }
        return len;
    }

    // ---- flattening -------------------------------------------------------

    static void flatten(FunctionAst& fn, const TreeNode& root) {
        std::vector<const TreeNode*> order;
        preorder(root, order);
        std::unordered_map<const TreeNode*, int> id_of;
        id_of.reserve(order.size());
        for (size_t k = 0; k < order.size(); ++k) id_of[order[k]] = int(k);

        fn.nodes.resize(order.size());
        for (size_t k = 0; k < order.size(); ++k) {
            const TreeNode& t = *order[k];
            AstNode& n = fn.nodes[k];
            n.id = int(k);
            n.label = t.label;
            n.code = t.code;
            n.op = t.op;
            n.op_symbol = t.op_symbol;
            n.callee = t.callee;
            n.literal = t.literal;
            n.type = t.type;
            n.cs = t.cs;
            n.jump_label = t.jump_label;
            for (const auto& kid : t.kids) n.children.push_back(id_of.at(kid.get()));
            for (const TreeNode* p : t.cs_init) n.cs_init.push_back(id_of.at(p));
            if (t.cs_cond) n.cs_cond = id_of.at(t.cs_cond);
            if (t.cs_update) n.cs_update = id_of.at(t.cs_update);
            if (t.cs_then) n.cs_then = id_of.at(t.cs_then);
            if (t.cs_else) n.cs_else = id_of.at(t.cs_else);
        }
        fn.root = 0;
    }

    static void preorder(const TreeNode& n, std::vector<const TreeNode*>& out) {
        out.push_back(&n);
        for (const auto& kid : n.kids) preorder(*kid, out);
    }
};

}  // namespace detail

/// Parses a translation unit; one FunctionAst per function definition in
/// source order. Top-level non-function content is skipped.
inline std::vector<FunctionAst> parse_unit(const std::string& source) {
    detail::Parser p(tokenize(source));
    return p.parse_unit();
}

/// Parses a source containing exactly one function definition.
inline FunctionAst parse_function(const std::string& source) {
    auto fns = parse_unit(source);
    if (fns.size() != 1) {
        throw ParseError(1, 1, "exactly one function definition",
                         std::to_string(fns.size()) + " found");
    }
    return std::move(fns.front());
}

}  // namespace grapheye
