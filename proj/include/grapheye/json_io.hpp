#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "grapheye/cpg.hpp"
#include "grapheye/datakit.hpp"
#include "grapheye/gcgat.hpp"
#include "grapheye/veccpg.hpp"

namespace grapheye {

using json = nlohmann::ordered_json;

// ---- file helpers -----------------------------------------------------------

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    out << content;
}

inline json parse_json_file(const std::string& path) {
    return json::parse(read_file(path));
}

// ---- AST / CPG --------------------------------------------------------------

inline json literal_to_json(const LiteralValue& v) {
    switch (v.kind) {
        case LiteralValue::Kind::Int32: return {{"kind", "int32"}, {"value", v.int_value}};
        case LiteralValue::Kind::Float32:
            return {{"kind", "float32"}, {"value", double(v.float_value)}};
        case LiteralValue::Kind::Char: return {{"kind", "char"}, {"value", v.char_value}};
        case LiteralValue::Kind::String:
            return {{"kind", "string"}, {"value", v.string_length}};
        case LiteralValue::Kind::Unknown: return {{"kind", "unknown"}};
    }
    return {};
}

inline json node_to_json(const AstNode& n) {
    json j = {{"id", n.id}, {"label", to_string(n.label)}, {"code", n.code}};
    if (n.label == NodeLabel::Call && !n.op_symbol.empty())
        j["operator"] = n.op ? to_string(*n.op) : "unknown";
    if (n.callee) j["callee"] = *n.callee;
    if (n.literal) j["literal"] = literal_to_json(*n.literal);
    if (n.type) j["type"] = to_string(*n.type);
    return j;
}

inline json ast_to_json(const FunctionAst& fn) {
    json nodes = json::array();
    json edges = json::array();
    for (const auto& n : fn.nodes) {
        nodes.push_back(node_to_json(n));
        for (int c : n.children) edges.push_back(json::array({n.id, c}));
    }
    return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

inline json cpg_to_json(const PropertyGraph& g) {
    json nodes = json::array();
    for (const auto& n : g.nodes()) nodes.push_back(node_to_json(n));
    json edges = json::array();
    std::vector<CpgEdge> sorted = g.edges;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& e : sorted) {
        json je = {{"src", e.src}, {"dst", e.dst}, {"kind", to_string(e.kind)}};
        if (e.var) je["var"] = *e.var;
        edges.push_back(std::move(je));
    }
    return {{"nodes", std::move(nodes)},
            {"edges", std::move(edges)},
            {"entry", g.entry},
            {"exit", g.exit}};
}

// ---- vocabulary / matrices ----------------------------------------------------

inline json vocab_to_json(const FunctionVocabulary& v) { return {{"names", v.names()}}; }

inline FunctionVocabulary vocab_from_json(const json& j) {
    return FunctionVocabulary(j.at("names").get<std::vector<std::string>>());
}

inline json matrix_to_json(const DenseMatrix& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows; ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols; ++c) row.push_back(m.at(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline DenseMatrix matrix_from_json(const json& j, int cols_hint = -1) {
    int rows = int(j.size());
    int cols = rows > 0 ? int(j.at(0).size()) : std::max(cols_hint, 0);
    DenseMatrix m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m.at(r, c) = j.at(size_t(r)).at(size_t(c)).get<double>();
    return m;
}

inline json matrices_to_json(const DenseMatrix& x, const DenseMatrix& a) {
    return {{"x", matrix_to_json(x)}, {"a", matrix_to_json(a)}};
}

// ---- dataset manifest -----------------------------------------------------------

struct ManifestEntry {
    std::string file;
    std::string function;
    FunctionLabel label = FunctionLabel::Good;
    std::string cwe;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;

    long count(FunctionLabel l) const {
        long n = 0;
        for (const auto& e : entries)
            if (e.label == l) ++n;
        return n;
    }
};

inline const char* to_string(FunctionLabel l) {
    return l == FunctionLabel::Bad ? "bad" : "good";
}

inline json manifest_to_json(const DatasetManifest& m) {
    json entries = json::array();
    for (const auto& e : m.entries)
        entries.push_back({{"file", e.file},
                           {"function", e.function},
                           {"label", to_string(e.label)},
                           {"cwe", e.cwe}});
    return {{"entries", std::move(entries)},
            {"counts",
             {{"good", m.count(FunctionLabel::Good)}, {"bad", m.count(FunctionLabel::Bad)}}}};
}

inline DatasetManifest manifest_from_json(const json& j) {
    DatasetManifest m;
    for (const auto& je : j.at("entries")) {
        ManifestEntry e;
        e.file = je.at("file").get<std::string>();
        e.function = je.at("function").get<std::string>();
        std::string label = je.at("label").get<std::string>();
        if (label != "good" && label != "bad")
            throw DataError("manifest label must be good|bad, got: " + label);
        e.label = label == "bad" ? FunctionLabel::Bad : FunctionLabel::Good;
        e.cwe = je.value("cwe", std::string());
        m.entries.push_back(std::move(e));
    }
    return m;
}

/// Resolves manifest entries to in-memory labeled functions (reads each file).
inline std::vector<LabeledFunction> load_manifest_entries(const DatasetManifest& m,
                                                          const std::string& base_dir = "") {
    std::vector<LabeledFunction> out;
    out.reserve(m.entries.size());
    for (const auto& e : m.entries) {
        std::string path = e.file;
        if (!base_dir.empty() && !path.empty() && path.front() != '/')
            path = base_dir + "/" + path;
        out.push_back({e.function, read_file(path), e.label, e.cwe, DataOrigin::Sard});
    }
    return out;
}

// ---- model config / parameters ----------------------------------------------------

inline json config_to_json(const GcGatConfig& c) {
    return {{"input_dim", c.input_dim},
            {"hidden_dim", c.hidden_dim},
            {"pool_dim", c.pool_dim},
            {"gat_layers", c.gat_layers},
            {"heads", c.heads},
            {"leaky_slope", c.leaky_slope},
            {"dropout", c.dropout},
            {"mlp_dims", c.mlp_dims},
            {"weight_majority", c.weight_majority},
            {"weight_minority", c.weight_minority},
            {"learning_rate", c.learning_rate},
            {"epochs", c.epochs},
            {"seed", c.seed}};
}

inline GcGatConfig config_from_json(const json& j) {
    GcGatConfig c;
    static const std::set<std::string> known = {
        "input_dim", "hidden_dim", "pool_dim", "gat_layers", "heads",
        "leaky_slope", "dropout", "mlp_dims", "weight_majority",
        "weight_minority", "learning_rate", "epochs", "seed"};
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) throw DataError("unknown config key: " + key);
    c.input_dim = j.value("input_dim", c.input_dim);
    c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
    c.pool_dim = j.value("pool_dim", c.pool_dim);
    c.gat_layers = j.value("gat_layers", c.gat_layers);
    c.heads = j.value("heads", c.heads);
    c.leaky_slope = j.value("leaky_slope", c.leaky_slope);
    c.dropout = j.value("dropout", c.dropout);
    c.mlp_dims = j.value("mlp_dims", c.mlp_dims);
    c.weight_majority = j.value("weight_majority", c.weight_majority);
    c.weight_minority = j.value("weight_minority", c.weight_minority);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.epochs = j.value("epochs", c.epochs);
    c.seed = j.value("seed", c.seed);
    c.validate();
    return c;
}

inline json model_to_json(const GcGatModel& model) {
    json params = json::object();
    GcGatParams& p = const_cast<GcGatModel&>(model).params;
    for (auto view : param_views(p)) params[view.name] = *view.data;
    return {{"config", config_to_json(model.config)},
            {"vocab", vocab_to_json(model.vocab)},
            {"majority_class", model.majority_class},
            {"parameters", std::move(params)}};
}

inline GcGatModel model_from_json(const json& j) {
    GcGatModel model;
    model.config = config_from_json(j.at("config"));
    model.vocab = vocab_from_json(j.at("vocab"));
    model.majority_class = j.at("majority_class").get<int>();
    std::mt19937 rng(model.config.seed);
    model.params = init_params(model.config, rng);  // establishes shapes
    const json& params = j.at("parameters");
    for (auto view : param_views(model.params)) {
        auto data = params.at(view.name).get<std::vector<double>>();
        if (data.size() != view.data->size())
            throw DataError("parameter size mismatch for " + view.name);
        *view.data = std::move(data);
    }
    return model;
}

// ---- metrics report -----------------------------------------------------------------

inline json metrics_to_json(const ConfusionCounts& counts, const MetricsReport& m) {
    auto opt = [](const std::optional<double>& v) {
        return v ? json(*v) : json(nullptr);
    };
    return {{"counts", {{"tp", counts.tp}, {"fp", counts.fp}, {"tn", counts.tn}, {"fn", counts.fn}}},
            {"metrics",
             {{"fpr", opt(m.fpr)},
              {"fnr", opt(m.fnr)},
              {"tpr", opt(m.tpr)},
              {"precision", opt(m.precision)},
              {"f1", opt(m.f1)}}}};
}

inline std::string metrics_to_csv(const ConfusionCounts& counts, const MetricsReport& m) {
    auto cell = [](const std::optional<double>& v) {
        if (!v) return std::string("undefined");
        std::ostringstream os;
        os << *v;
        return os.str();
    };
    std::ostringstream os;
    os << "tp,fp,tn,fn,fpr,fnr,tpr,precision,f1\n"
       << counts.tp << ',' << counts.fp << ',' << counts.tn << ',' << counts.fn << ','
       << cell(m.fpr) << ',' << cell(m.fnr) << ',' << cell(m.tpr) << ','
       << cell(m.precision) << ',' << cell(m.f1) << '\n';
    return os.str();
}

}  // namespace grapheye
