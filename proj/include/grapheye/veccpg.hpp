#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "grapheye/cpg.hpp"
#include "grapheye/errors.hpp"
#include "grapheye/linalg.hpp"

namespace grapheye {

// Feature row layout: [label 15][operator 27][function 41][literal 32][type 18].
inline constexpr int kLabelBlockWidth = 15;     // 13 labels + unknown + reserved
inline constexpr int kOperatorBlockWidth = 27;  // 25 operators + unknown + reserved
inline constexpr int kFunctionBlockWidth = 41;  // 39 names + unknown + reserved
inline constexpr int kLiteralBlockWidth = 32;
inline constexpr int kTypeBlockWidth = 18;      // 10+1 basic, 6+1 complex
inline constexpr int kFeatureWidth = kLabelBlockWidth + kOperatorBlockWidth +
                                     kFunctionBlockWidth + kLiteralBlockWidth +
                                     kTypeBlockWidth;  // 133

inline constexpr int kLabelBlockOffset = 0;
inline constexpr int kOperatorBlockOffset = kLabelBlockWidth;
inline constexpr int kFunctionBlockOffset = kOperatorBlockOffset + kOperatorBlockWidth;
inline constexpr int kLiteralBlockOffset = kFunctionBlockOffset + kFunctionBlockWidth;
inline constexpr int kTypeBlockOffset = kLiteralBlockOffset + kLiteralBlockWidth;

inline constexpr int kFunctionVocabularySize = 39;
inline constexpr int kFunctionUnknownSlot = 39;

/// Ordered API-function name table. Lookup of an unlisted name yields the
/// unknown slot; the final bit of the block is reserved.
class FunctionVocabulary {
public:
    FunctionVocabulary() = default;

    explicit FunctionVocabulary(std::vector<std::string> names) {
        if (names.size() > kFunctionVocabularySize)
            throw VocabError("vocabulary exceeds " +
                             std::to_string(kFunctionVocabularySize) + " names");
        names_ = std::move(names);
        for (size_t i = 0; i < names_.size(); ++i) {
            if (!index_.emplace(names_[i], int(i)).second)
                throw VocabError("duplicate vocabulary name: " + names_[i]);
        }
    }

    int slot(const std::string& name) const {
        auto it = index_.find(name);
        return it == index_.end() ? kFunctionUnknownSlot : it->second;
    }

    const std::vector<std::string>& names() const { return names_; }
    bool operator==(const FunctionVocabulary& o) const { return names_ == o.names_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, int> index_;
};

using FeatureBlock = std::vector<double>;

inline FeatureBlock encode_label(NodeLabel label) {
    FeatureBlock b(kLabelBlockWidth, 0.0);
    b[size_t(label)] = 1.0;
    return b;
}

/// Operator one-hot. `symbol` carries the raw spelling for operators outside
/// the 25-kind table; those set the unknown bit.
inline FeatureBlock encode_operator(std::optional<OperatorKind> op,
                                    const std::string& symbol = "") {
    FeatureBlock b(kOperatorBlockWidth, 0.0);
    if (op) {
        b[size_t(*op)] = 1.0;
    } else if (!symbol.empty()) {
        b[kOperatorKindCount] = 1.0;  // unknown operator
    }
    return b;
}

inline FeatureBlock encode_function(const std::optional<std::string>& callee,
                                    const FunctionVocabulary& vocab) {
    FeatureBlock b(kFunctionBlockWidth, 0.0);
    if (callee) b[size_t(vocab.slot(*callee))] = 1.0;
    return b;
}

namespace detail {

inline void write_bits_msb_first(FeatureBlock& b, uint32_t pattern) {
    for (int i = 0; i < 32; ++i) b[size_t(i)] = double((pattern >> (31 - i)) & 1u);
}

}  // namespace detail

/// 32-bit constant encoding, most-significant bit first: two's complement
/// for integers, IEEE-754 single precision for floats, code point for chars,
/// byte length for strings. Unknown literals stay all-zero.
inline FeatureBlock encode_literal(const std::optional<LiteralValue>& lit) {
    FeatureBlock b(kLiteralBlockWidth, 0.0);
    if (!lit) return b;
    switch (lit->kind) {
        case LiteralValue::Kind::Int32:
            detail::write_bits_msb_first(b, std::bit_cast<uint32_t>(lit->int_value));
            break;
        case LiteralValue::Kind::Float32:
            detail::write_bits_msb_first(b, std::bit_cast<uint32_t>(lit->float_value));
            break;
        case LiteralValue::Kind::Char:
            detail::write_bits_msb_first(b, lit->char_value);
            break;
        case LiteralValue::Kind::String:
            detail::write_bits_msb_first(b, lit->string_length);
            break;
        case LiteralValue::Kind::Unknown:
            break;
    }
    return b;
}

/// Basic type one-hot (10 + reserved) followed by the complex-qualifier
/// multi-hot (6 + reserved).
inline FeatureBlock encode_type(const std::optional<TypeAnnotation>& t) {
    FeatureBlock b(kTypeBlockWidth, 0.0);
    if (!t) return b;
    b[size_t(t->basic)] = 1.0;
    for (int q = 0; q < kTypeQualifierCount; ++q)
        if (t->has(TypeQualifier(q))) b[size_t(kBasicTypeCount + 1 + q)] = 1.0;
    return b;
}

inline FeatureBlock encode_node(const AstNode& n, const FunctionVocabulary& vocab) {
    FeatureBlock row;
    row.reserve(kFeatureWidth);
    auto append = [&row](const FeatureBlock& b) {
        row.insert(row.end(), b.begin(), b.end());
    };
    append(encode_label(n.label));
    append(encode_operator(n.label == NodeLabel::Call ? n.op : std::nullopt,
                           n.label == NodeLabel::Call ? n.op_symbol : std::string()));
    append(encode_function(n.label == NodeLabel::Call ? n.callee : std::nullopt, vocab));
    append(encode_literal(n.label == NodeLabel::Literal ? n.literal : std::nullopt));
    append(encode_type(n.type));
    return row;
}

/// |V| x 133 feature matrix; row i encodes node id i.
inline DenseMatrix build_feature_matrix(const PropertyGraph& g,
                                        const FunctionVocabulary& vocab) {
    DenseMatrix x(g.node_count(), kFeatureWidth);
    for (const auto& n : g.nodes()) {
        FeatureBlock row = encode_node(n, vocab);
        std::copy(row.begin(), row.end(), x.row(n.id));
    }
    return x;
}

/// Binary |V| x |V| adjacency over AST, CFG, and DDG edges; CDG is excluded.
/// Directed: an edge u->v sets entry (u,v) only.
inline DenseMatrix build_adjacency(const PropertyGraph& g) {
    DenseMatrix a(g.node_count(), g.node_count());
    for (const auto& e : g.edges) {
        if (e.kind == EdgeKind::Cdg) continue;
        a.at(e.src, e.dst) = 1.0;
    }
    return a;
}

/// The 39 most frequent callee names over the corpus, excluding names of
/// functions defined in the corpus itself; frequency ties break
/// lexicographically.
inline FunctionVocabulary build_vocab(const std::vector<const FunctionAst*>& corpus) {
    if (corpus.empty()) throw VocabError("empty corpus");
    std::set<std::string> defined;
    for (const auto* fn : corpus) defined.insert(fn->name);

    std::map<std::string, int> freq;
    for (const auto* fn : corpus) {
        for (const auto& n : fn->nodes)
            if (n.is_named_call() && !defined.count(*n.callee)) ++freq[*n.callee];
    }
    std::vector<std::pair<std::string, int>> ranked(freq.begin(), freq.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > kFunctionVocabularySize) ranked.resize(kFunctionVocabularySize);
    std::vector<std::string> names;
    names.reserve(ranked.size());
    for (auto& [name, count] : ranked) names.push_back(name);
    return FunctionVocabulary(std::move(names));
}

inline FunctionVocabulary build_vocab(const std::vector<FunctionAst>& corpus) {
    std::vector<const FunctionAst*> ptrs;
    ptrs.reserve(corpus.size());
    for (const auto& fn : corpus) ptrs.push_back(&fn);
    return build_vocab(ptrs);
}

}  // namespace grapheye
