#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace grapheye {

/// The 13 node classes of the property-graph label vocabulary.
enum class NodeLabel {
    Identifier,
    Literal,
    Local,
    Block,
    MethodReturn,
    Method,
    ControlStructure,
    FieldIdentifier,
    Unknown,
    Return,
    Param,
    JumpTarget,
    Call,
};

inline constexpr int kNodeLabelCount = 13;

inline const char* to_string(NodeLabel l) {
    switch (l) {
        case NodeLabel::Identifier: return "IDENTIFIER";
        case NodeLabel::Literal: return "LITERAL";
        case NodeLabel::Local: return "LOCAL";
        case NodeLabel::Block: return "BLOCK";
        case NodeLabel::MethodReturn: return "METHOD_RETURN";
        case NodeLabel::Method: return "METHOD";
        case NodeLabel::ControlStructure: return "CONTROL_STRUCTURE";
        case NodeLabel::FieldIdentifier: return "FIELD_IDENTIFIER";
        case NodeLabel::Unknown: return "UNKNOWN";
        case NodeLabel::Return: return "RETURN";
        case NodeLabel::Param: return "PARAM";
        case NodeLabel::JumpTarget: return "JUMP_TARGET";
        case NodeLabel::Call: return "CALL";
    }
    return "?";
}

/// The 25 operator kinds, keyed on the meaning column of the operator
/// vocabulary. Operators outside this set are kept as raw symbols on the
/// node and encode to the unknown slot.
enum class OperatorKind {
    Assignment,
    IndirectIndexAccess,
    SizeOf,
    Multiplication,
    Cast,
    Subtraction,
    FieldAccess,
    LessThan,
    PostIncrement,
    AddressOf,
    Addition,
    Equals,
    Indirection,
    Minus,
    NotEquals,
    GreaterEqualsThan,
    IndirectFieldAccess,
    LogicalOr,
    Division,
    LogicalAnd,
    Delete,
    And,
    GreaterThan,
    Modulo,
    New,
};

inline constexpr int kOperatorKindCount = 25;

inline const char* to_string(OperatorKind k) {
    switch (k) {
        case OperatorKind::Assignment: return "assignment";
        case OperatorKind::IndirectIndexAccess: return "indirectIndexAccess";
        case OperatorKind::SizeOf: return "sizeOf";
        case OperatorKind::Multiplication: return "multiplication";
        case OperatorKind::Cast: return "cast";
        case OperatorKind::Subtraction: return "subtraction";
        case OperatorKind::FieldAccess: return "fieldAccess";
        case OperatorKind::LessThan: return "lessThan";
        case OperatorKind::PostIncrement: return "postIncrement";
        case OperatorKind::AddressOf: return "addressOf";
        case OperatorKind::Addition: return "addition";
        case OperatorKind::Equals: return "equals";
        case OperatorKind::Indirection: return "indirection";
        case OperatorKind::Minus: return "minus";
        case OperatorKind::NotEquals: return "notEquals";
        case OperatorKind::GreaterEqualsThan: return "greaterEqualsThan";
        case OperatorKind::IndirectFieldAccess: return "indirectFieldAccess";
        case OperatorKind::LogicalOr: return "logicalOr";
        case OperatorKind::Division: return "division";
        case OperatorKind::LogicalAnd: return "logicalAnd";
        case OperatorKind::Delete: return "delete";
        case OperatorKind::And: return "and";
        case OperatorKind::GreaterThan: return "greaterThan";
        case OperatorKind::Modulo: return "modulo";
        case OperatorKind::New: return "new";
    }
    return "?";
}

enum class BasicType {
    Char,
    Int,
    Short,
    Float,
    Double,
    Long,
    String,
    Void,
    Struct,
    Union,
};

inline constexpr int kBasicTypeCount = 10;

/// Complex type qualifiers; a TypeAnnotation carries any subset.
enum class TypeQualifier {
    Signed = 0,
    Unsigned = 1,
    Pointer = 2,
    Array = 3,
    Map = 4,
    Vector = 5,
};

inline constexpr int kTypeQualifierCount = 6;

struct TypeAnnotation {
    BasicType basic = BasicType::Int;
    uint8_t qualifiers = 0;  // bit i set <=> TypeQualifier(i) present

    void add(TypeQualifier q) { qualifiers |= uint8_t(1u << int(q)); }
    bool has(TypeQualifier q) const { return (qualifiers >> int(q)) & 1u; }

    bool operator==(const TypeAnnotation&) const = default;
};

inline std::string to_string(const TypeAnnotation& t) {
    std::string s;
    if (t.has(TypeQualifier::Signed)) s += "signed ";
    if (t.has(TypeQualifier::Unsigned)) s += "unsigned ";
    switch (t.basic) {
        case BasicType::Char: s += "char"; break;
        case BasicType::Int: s += "int"; break;
        case BasicType::Short: s += "short"; break;
        case BasicType::Float: s += "float"; break;
        case BasicType::Double: s += "double"; break;
        case BasicType::Long: s += "long"; break;
        case BasicType::String: s += "string"; break;
        case BasicType::Void: s += "void"; break;
        case BasicType::Struct: s += "struct"; break;
        case BasicType::Union: s += "union"; break;
    }
    if (t.has(TypeQualifier::Pointer)) s += " *";
    if (t.has(TypeQualifier::Array)) s += " []";
    if (t.has(TypeQualifier::Map)) s += " map";
    if (t.has(TypeQualifier::Vector)) s += " vector";
    return s;
}

/// Constant value attached to a LITERAL node. Unknown covers literals the
/// 32-bit scheme cannot represent (out-of-range integers, 64-bit values);
/// they encode to the all-zero pattern.
struct LiteralValue {
    enum class Kind { Int32, Float32, Char, String, Unknown };
    Kind kind = Kind::Unknown;
    int32_t int_value = 0;       // Int32
    float float_value = 0.0f;    // Float32
    uint32_t char_value = 0;     // Char: code point
    uint32_t string_length = 0;  // String: byte length

    static LiteralValue make_int(int32_t v) { return {Kind::Int32, v, 0, 0, 0}; }
    static LiteralValue make_float(float v) { return {Kind::Float32, 0, v, 0, 0}; }
    static LiteralValue make_char(uint32_t cp) { return {Kind::Char, 0, 0, cp, 0}; }
    static LiteralValue make_string(uint32_t len) { return {Kind::String, 0, 0, 0, len}; }
    static LiteralValue make_unknown() { return {}; }

    bool operator==(const LiteralValue&) const = default;
};

/// Internal discriminator for CONTROL_STRUCTURE and JUMP_TARGET nodes;
/// consumed by the CFG builder, not part of the exported node schema.
enum class CsKind {
    None,
    If,
    While,
    For,
    Switch,
    Goto,
    Break,
    Continue,
    Case,
    Default,
};

struct AstNode {
    int id = -1;
    NodeLabel label = NodeLabel::Unknown;
    std::string code;
    std::optional<OperatorKind> op;      // operator CALL nodes with a tabled operator
    std::string op_symbol;               // raw operator spelling (also set for untabled ops)
    std::optional<std::string> callee;   // named CALL nodes
    std::optional<LiteralValue> literal; // LITERAL nodes
    std::optional<TypeAnnotation> type;  // LOCAL/PARAM declarations, casts
    std::vector<int> children;           // ordered child ids

    // Control-structure bookkeeping for the CFG builder.
    CsKind cs = CsKind::None;
    std::string jump_label;          // Goto target / JUMP_TARGET label name
    std::vector<int> cs_init;        // for-init statement nodes
    int cs_cond = -1;                // condition expression node
    int cs_update = -1;              // for-update statement node
    int cs_then = -1;                // if-then / loop-body / switch-body
    int cs_else = -1;                // if-else

    bool is_operator_call() const { return label == NodeLabel::Call && !op_symbol.empty(); }
    bool is_named_call() const { return label == NodeLabel::Call && callee.has_value(); }
};

/// A parsed function: nodes stored flat, ids equal to vector indices and
/// assigned in pre-order. Node 0 is the METHOD root.
struct FunctionAst {
    std::string name;
    std::vector<AstNode> nodes;
    int root = 0;
    std::set<std::string> callees;  // named callees appearing in the body

    const AstNode& node(int id) const { return nodes[size_t(id)]; }
    int size() const { return int(nodes.size()); }
};

}  // namespace grapheye
