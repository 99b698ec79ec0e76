// Vectorization: per-block one-hot invariants, literal bit patterns against
// arithmetic oracles, vocabulary construction rules, and adjacency structure.
#include <catch2/catch_amalgamated.hpp>

#include "grapheye/datakit.hpp"
#include "grapheye/parser.hpp"
#include "grapheye/veccpg.hpp"
#include "support/oracles.hpp"

using namespace grapheye;

namespace {

int popcount_range(const double* row, int offset, int width) {
    int n = 0;
    for (int i = 0; i < width; ++i)
        if (row[offset + i] != 0.0) ++n;
    return n;
}

std::vector<int> bits_in_range(const double* row, int offset, int width) {
    std::vector<int> out(static_cast<size_t>(width), 0);
    for (int i = 0; i < width; ++i) {
        REQUIRE((row[offset + i] == 0.0 || row[offset + i] == 1.0));
        out[size_t(i)] = row[offset + i] != 0.0 ? 1 : 0;
    }
    return out;
}

void check_row_invariants(const double* row, const AstNode& node) {
    // label: exactly one bit, reserved bit (14) clear
    CHECK(popcount_range(row, kLabelBlockOffset, kLabelBlockWidth) == 1);
    CHECK(row[kLabelBlockOffset + kLabelBlockWidth - 1] == 0.0);

    // operator: at most one bit, reserved bit clear
    CHECK(popcount_range(row, kOperatorBlockOffset, kOperatorBlockWidth) <= 1);
    CHECK(row[kOperatorBlockOffset + kOperatorBlockWidth - 1] == 0.0);

    // function: at most one bit, reserved bit clear
    CHECK(popcount_range(row, kFunctionBlockOffset, kFunctionBlockWidth) <= 1);
    CHECK(row[kFunctionBlockOffset + kFunctionBlockWidth - 1] == 0.0);

    // literal bits only on LITERAL nodes
    if (node.label != NodeLabel::Literal)
        CHECK(popcount_range(row, kLiteralBlockOffset, kLiteralBlockWidth) == 0);

    // type: reserved bits (10 and 17) clear
    CHECK(row[kTypeBlockOffset + 10] == 0.0);
    CHECK(row[kTypeBlockOffset + 17] == 0.0);
}

}  // namespace

TEST_CASE("feature width constant") {
    CHECK(kFeatureWidth == 133);
    CHECK(kLabelBlockWidth + kOperatorBlockWidth + kFunctionBlockWidth +
              kLiteralBlockWidth + kTypeBlockWidth ==
          kFeatureWidth);
}

TEST_CASE("integer literal bits match the two's-complement oracle") {
    for (long long v : {0LL, 1LL, 7LL, 100LL, -1LL, -100LL, 2147483647LL, -2147483648LL}) {
        AstNode n;
        n.label = NodeLabel::Literal;
        n.literal = LiteralValue::make_int(int32_t(v));
        auto row = encode_node(n, FunctionVocabulary());
        auto got = bits_in_range(row.data(), kLiteralBlockOffset, kLiteralBlockWidth);
        CHECK(got == oracle::int32_bits(v));
    }
}

TEST_CASE("float literal bits match the field-arithmetic oracle") {
    for (float v : {100.0f, 0.0f, 1.0f, -2.5f, 0.000001f, 3.14159f, -0.0f}) {
        AstNode n;
        n.label = NodeLabel::Literal;
        n.literal = LiteralValue::make_float(v);
        auto row = encode_node(n, FunctionVocabulary());
        auto got = bits_in_range(row.data(), kLiteralBlockOffset, kLiteralBlockWidth);
        CHECK(got == oracle::float32_bits(v));
    }
}

TEST_CASE("100.0 encodes to the documented single-precision pattern") {
    // 100.0f == 0x42C80000
    AstNode n;
    n.label = NodeLabel::Literal;
    n.literal = LiteralValue::make_float(100.0f);
    auto row = encode_node(n, FunctionVocabulary());
    auto bits = bits_in_range(row.data(), kLiteralBlockOffset, kLiteralBlockWidth);
    uint32_t word = 0;
    for (int i = 0; i < 32; ++i) word = (word << 1) | uint32_t(bits[size_t(i)]);
    CHECK(word == 0x42C80000u);
}

TEST_CASE("char and string literals encode their scalar value") {
    AstNode c;
    c.label = NodeLabel::Literal;
    c.literal = LiteralValue::make_char(10);
    auto row = encode_node(c, FunctionVocabulary());
    CHECK(bits_in_range(row.data(), kLiteralBlockOffset, 32) == oracle::int32_bits(10));

    AstNode s;
    s.label = NodeLabel::Literal;
    s.literal = LiteralValue::make_string(17);
    row = encode_node(s, FunctionVocabulary());
    CHECK(bits_in_range(row.data(), kLiteralBlockOffset, 32) == oracle::int32_bits(17));
}

TEST_CASE("unrepresentable literals encode to all zeros") {
    AstNode n;
    n.label = NodeLabel::Literal;
    n.literal = LiteralValue::make_unknown();
    auto row = encode_node(n, FunctionVocabulary());
    CHECK(popcount_range(row.data(), kLiteralBlockOffset, kLiteralBlockWidth) == 0);
}

TEST_CASE("type block: basic one-hot plus qualifier multi-hot") {
    AstNode n;
    n.label = NodeLabel::Local;
    TypeAnnotation t;
    t.basic = BasicType::Float;
    n.type = t;
    auto row = encode_node(n, FunctionVocabulary());
    CHECK(row[kTypeBlockOffset + 3] == 1.0);  // float slot
    CHECK(popcount_range(row.data(), kTypeBlockOffset, kTypeBlockWidth) == 1);

    TypeAnnotation cp;  // char *
    cp.basic = BasicType::Char;
    cp.add(TypeQualifier::Pointer);
    n.type = cp;
    row = encode_node(n, FunctionVocabulary());
    CHECK(row[kTypeBlockOffset + 0] == 1.0);   // char
    CHECK(row[kTypeBlockOffset + 13] == 1.0);  // pointer qualifier
    CHECK(popcount_range(row.data(), kTypeBlockOffset, kTypeBlockWidth) == 2);
}

TEST_CASE("operator block: tabled, untabled, and absent") {
    FunctionVocabulary empty;
    AstNode division;
    division.label = NodeLabel::Call;
    division.op = OperatorKind::Division;
    division.op_symbol = "/";
    auto row = encode_node(division, empty);
    CHECK(row[kOperatorBlockOffset + int(OperatorKind::Division)] == 1.0);

    AstNode shifted;  // << has no table slot: unknown bit
    shifted.label = NodeLabel::Call;
    shifted.op_symbol = "<<";
    row = encode_node(shifted, empty);
    CHECK(row[kOperatorBlockOffset + kOperatorKindCount] == 1.0);

    AstNode ident;  // not an operator at all: empty block
    ident.label = NodeLabel::Identifier;
    row = encode_node(ident, empty);
    CHECK(popcount_range(row.data(), kOperatorBlockOffset, kOperatorBlockWidth) == 0);
}

TEST_CASE("function block: known name, unknown name, non-call") {
    FunctionVocabulary vocab({"memcpy", "printIntLine"});
    AstNode call;
    call.label = NodeLabel::Call;
    call.callee = "printIntLine";
    auto row = encode_node(call, vocab);
    CHECK(row[kFunctionBlockOffset + 1] == 1.0);

    call.callee = "neverTabled";
    row = encode_node(call, vocab);
    CHECK(row[kFunctionBlockOffset + kFunctionUnknownSlot] == 1.0);

    AstNode lit;
    lit.label = NodeLabel::Literal;
    lit.literal = LiteralValue::make_int(1);
    row = encode_node(lit, vocab);
    CHECK(popcount_range(row.data(), kFunctionBlockOffset, kFunctionBlockWidth) == 0);
}

TEST_CASE("row invariants hold across a synthetic corpus") {
    auto corpus = synth_generate(SynthCwe::DivideZero, 25, 11);
    auto more = synth_generate(SynthCwe::NullDeref, 25, 12);
    corpus.insert(corpus.end(), more.begin(), more.end());
    FunctionVocabulary vocab({"printIntLine", "printLine", "fabs"});
    for (const auto& entry : corpus) {
        PropertyGraph g = build_cpg(parse_entry(entry));
        DenseMatrix x = build_feature_matrix(g, vocab);
        REQUIRE(x.cols == kFeatureWidth);
        REQUIRE(x.rows == g.node_count());
        for (int r = 0; r < x.rows; ++r)
            check_row_invariants(x.row(r), g.nodes()[size_t(r)]);
    }
}

TEST_CASE("adjacency is binary with a zero diagonal and no control deps") {
    auto g = build_cpg(parse_function(
        "void f(int c) { int x = 0; if (c) { x = 1; } int y = x; }\n"));
    DenseMatrix a = build_adjacency(g);
    REQUIRE(a.rows == g.node_count());
    REQUIRE(a.cols == g.node_count());
    std::set<std::pair<int, int>> expected;
    for (const auto& e : g.edges)
        if (e.kind != EdgeKind::Cdg && e.src != e.dst) expected.insert({e.src, e.dst});
    int ones = 0;
    for (int i = 0; i < a.rows; ++i) {
        CHECK(a.at(i, i) == 0.0);
        for (int j = 0; j < a.cols; ++j) {
            REQUIRE((a.at(i, j) == 0.0 || a.at(i, j) == 1.0));
            if (a.at(i, j) == 1.0) {
                CHECK(expected.count({i, j}) == 1);
                ++ones;
            }
        }
    }
    CHECK(ones == int(expected.size()));  // duplicates coalesce to one entry
    CHECK_FALSE(g.edges_of_kind(EdgeKind::Cdg).empty());  // ensured by the if
}

TEST_CASE("vocabulary ranks by frequency then lexicographic order") {
    // beta appears 3x, alpha 2x, zeta 2x -> beta, alpha, zeta
    auto fns = parse_unit(
        "void g1() { beta(); beta(); alpha(); zeta(); }\n"
        "void g2() { beta(); alpha(); zeta(); }\n");
    FunctionVocabulary v = build_vocab(fns);
    REQUIRE(v.names().size() == 3);
    CHECK(v.names()[0] == "beta");
    CHECK(v.names()[1] == "alpha");
    CHECK(v.names()[2] == "zeta");
}

TEST_CASE("vocabulary excludes names defined in the corpus") {
    auto fns = parse_unit(
        "void helper() { }\n"
        "void g() { helper(); external(); }\n");
    FunctionVocabulary v = build_vocab(fns);
    REQUIRE(v.names().size() == 1);
    CHECK(v.names()[0] == "external");
}

TEST_CASE("vocabulary is stable under corpus permutation") {
    auto corpus = synth_generate(SynthCwe::DivideZero, 20, 3);
    std::vector<FunctionAst> asts;
    for (const auto& e : corpus) asts.push_back(parse_entry(e));
    FunctionVocabulary v1 = build_vocab(asts);
    std::mt19937 rng(99);
    detail::seeded_shuffle(asts, rng);
    FunctionVocabulary v2 = build_vocab(asts);
    CHECK(v1 == v2);
}

TEST_CASE("vocabulary caps at 39 names and rejects duplicates") {
    std::vector<std::string> too_many;
    for (int i = 0; i < 40; ++i) too_many.push_back("fn" + std::to_string(i));
    CHECK_THROWS_AS(FunctionVocabulary(too_many), VocabError);
    CHECK_THROWS_AS(FunctionVocabulary({"dup", "dup"}), VocabError);
    CHECK_THROWS_AS(build_vocab(std::vector<FunctionAst>{}), VocabError);
}
