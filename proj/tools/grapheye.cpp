// grapheye: one binary, staged subcommands with persisted JSON intermediates.
//
//   parse      source -> AST JSON
//   cpg        source -> property graph (JSON or DOT)
//   vectorize  source + vocabulary -> feature matrix + adjacency
//   dataset    label a directory of units, or generate a synthetic corpus
//   train      manifest + config -> model file
//   predict    model + source -> per-function verdict
//   eval       model + manifest -> confusion counts and metrics
//   pipeline   synth -> split -> train -> evaluate, all stages persisted
//
// Exit codes: 0 success, 1 domain error (parse/label/data), 2 usage error.
// GRAPHEYE_LOG=error|info|debug controls stderr verbosity.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "grapheye/grapheye.hpp"

namespace {

namespace fs = std::filesystem;
using grapheye::json;

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
    const char* raw = std::getenv("GRAPHEYE_LOG");
    if (!raw) return LogLevel::Error;
    std::string v(raw);
    if (v == "debug") return LogLevel::Debug;
    if (v == "info") return LogLevel::Info;
    return LogLevel::Error;
}

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::Info) std::cerr << "[info] " << msg << "\n";
}

void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::Debug) std::cerr << "[debug] " << msg << "\n";
}

grapheye::FunctionAst load_function(const std::string& path, const std::string& name) {
    auto fns = grapheye::parse_unit(grapheye::read_file(path));
    if (fns.empty()) throw grapheye::DataError("no function definitions in " + path);
    if (name.empty()) {
        if (fns.size() == 1) return std::move(fns.front());
        throw grapheye::DataError(path + " holds " + std::to_string(fns.size()) +
                                  " functions; select one with --fn");
    }
    for (auto& fn : fns)
        if (fn.name == name) return std::move(fn);
    throw grapheye::DataError("function '" + name + "' not found in " + path);
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty())
        std::cout << content;
    else
        grapheye::write_file(out_path, content);
}

grapheye::SynthCwe cwe_from_name(const std::string& name) {
    auto cwe = grapheye::parse_synth_cwe(name);
    if (!cwe)
        throw grapheye::DataError(
            "unknown cwe '" + name + "' (divide_zero|null_deref|stack_overflow)");
    return *cwe;
}

std::set<std::string> load_allowlist(const std::string& path) {
    if (path.empty()) return grapheye::default_allowlist();
    json j = grapheye::parse_json_file(path);
    const json& names = j.is_array() ? j : j.at("names");
    std::set<std::string> out;
    for (const auto& n : names) out.insert(n.get<std::string>());
    return out;
}

// ---- subcommand bodies ------------------------------------------------------

int run_parse(const std::string& file, const std::string& fn_name, bool as_json) {
    auto fns = grapheye::parse_unit(grapheye::read_file(file));
    if (fns.empty()) throw grapheye::DataError("no function definitions in " + file);
    std::vector<grapheye::FunctionAst> selected;
    if (fn_name.empty()) {
        selected = std::move(fns);
    } else {
        for (auto& fn : fns)
            if (fn.name == fn_name) selected.push_back(std::move(fn));
        if (selected.empty())
            throw grapheye::DataError("function '" + fn_name + "' not found in " + file);
    }
    if (as_json) {
        if (selected.size() == 1) {
            std::cout << grapheye::ast_to_json(selected.front()).dump(2) << "\n";
        } else {
            json arr = json::array();
            for (const auto& fn : selected) {
                json doc = grapheye::ast_to_json(fn);
                doc["name"] = fn.name;
                arr.push_back(std::move(doc));
            }
            std::cout << arr.dump(2) << "\n";
        }
    } else {
        for (const auto& fn : selected)
            std::cout << fn.name << ": " << fn.nodes.size() << " nodes\n";
    }
    return 0;
}

int run_cpg(const std::string& file, const std::string& fn_name,
            const std::string& dot_path, const std::string& json_path) {
    auto g = grapheye::build_cpg(load_function(file, fn_name));
    log_debug("cpg: " + std::to_string(g.node_count()) + " nodes, " +
              std::to_string(g.edges.size()) + " edges");
    if (!dot_path.empty()) {
        emit(dot_path, grapheye::to_dot(g));
        return 0;
    }
    std::string doc = grapheye::cpg_to_json(g).dump(2) + "\n";
    emit(json_path, doc);
    return 0;
}

int run_vectorize(const std::string& file, const std::string& fn_name,
                  const std::string& vocab_path, const std::string& out_path) {
    auto vocab = grapheye::vocab_from_json(grapheye::parse_json_file(vocab_path));
    auto g = grapheye::build_cpg(load_function(file, fn_name));
    auto x = grapheye::build_feature_matrix(g, vocab);
    auto a = grapheye::build_adjacency(g);
    emit(out_path, grapheye::matrices_to_json(x, a).dump() + "\n");
    return 0;
}

int run_dataset_label(const std::string& dir, const std::string& allowlist_path,
                      const std::string& cwe, const std::string& out_path) {
    auto allowlist = load_allowlist(allowlist_path);
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".c")
            files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw grapheye::DataError("no .c files under " + dir);

    grapheye::DatasetManifest manifest;
    for (const auto& path : files) {
        auto labeled =
            grapheye::label_functions({grapheye::read_file(path)}, cwe, allowlist);
        for (const auto& fn : labeled)
            manifest.entries.push_back({path, fn.name, fn.label, fn.cwe});
        log_debug(path + ": " + std::to_string(labeled.size()) + " labeled functions");
    }
    log_info("labeled " + std::to_string(manifest.entries.size()) + " functions from " +
             std::to_string(files.size()) + " files");
    emit(out_path, grapheye::manifest_to_json(manifest).dump(2) + "\n");
    return 0;
}

int run_dataset_synth(const std::string& cwe_name, int pairs, uint32_t seed,
                      const std::string& out_dir) {
    grapheye::SynthCwe cwe = cwe_from_name(cwe_name);
    auto corpus = grapheye::synth_generate(cwe, pairs, seed);
    fs::create_directories(out_dir);
    grapheye::DatasetManifest manifest;
    for (const auto& fn : corpus) {
        std::string rel = fn.name + ".c";
        grapheye::write_file(out_dir + "/" + rel, fn.source);
        manifest.entries.push_back({rel, fn.name, fn.label, fn.cwe});
    }
    grapheye::write_file(out_dir + "/manifest.json",
                         grapheye::manifest_to_json(manifest).dump(2) + "\n");
    log_info("wrote " + std::to_string(corpus.size()) + " functions to " + out_dir);
    return 0;
}

std::vector<grapheye::LabeledFunction> load_dataset(const std::string& manifest_path) {
    auto manifest = grapheye::manifest_from_json(grapheye::parse_json_file(manifest_path));
    std::string base = fs::path(manifest_path).parent_path().string();
    return grapheye::load_manifest_entries(manifest, base);
}

int run_train(const std::string& data_path, const std::string& config_path,
              const std::string& out_path, int seed_override) {
    grapheye::GcGatConfig cfg;
    if (!config_path.empty())
        cfg = grapheye::config_from_json(grapheye::parse_json_file(config_path));
    if (seed_override >= 0) cfg.seed = uint32_t(seed_override);

    auto entries = load_dataset(data_path);
    log_info("training on " + std::to_string(entries.size()) + " functions");
    std::vector<grapheye::FunctionAst> asts;
    asts.reserve(entries.size());
    for (const auto& e : entries) asts.push_back(grapheye::parse_entry(e));
    auto vocab = grapheye::build_vocab(asts);
    auto samples = grapheye::vectorize_corpus(entries, vocab);
    auto [model, history] = grapheye::train(samples, cfg, vocab);
    for (size_t i = 0; i < history.loss.size(); ++i)
        log_info("epoch " + std::to_string(i + 1) + " loss " +
                 std::to_string(history.loss[i]) + " train_f1 " +
                 std::to_string(history.train_f1[i]));
    grapheye::write_file(out_path, grapheye::model_to_json(model).dump() + "\n");
    return 0;
}

int run_predict(const std::string& model_path, const std::string& file,
                const std::string& fn_name) {
    auto model = grapheye::model_from_json(grapheye::parse_json_file(model_path));
    auto fn = load_function(file, fn_name);
    std::string resolved = fn.name;
    auto g = grapheye::build_cpg(std::move(fn));
    auto pred = grapheye::predict(model, g);
    json out = {{"file", file},
                {"function", resolved},
                {"verdict", pred.is_bad ? "bad" : "good"},
                {"prob_bad", pred.prob_bad}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

int run_eval(const std::string& model_path, const std::string& data_path,
             const std::string& report_path) {
    auto model = grapheye::model_from_json(grapheye::parse_json_file(model_path));
    auto entries = load_dataset(data_path);
    auto [counts, metrics] = grapheye::evaluate(model, entries);
    std::string doc = grapheye::metrics_to_json(counts, metrics).dump(2) + "\n";
    if (report_path.empty()) {
        std::cout << doc;
    } else {
        grapheye::write_file(report_path, doc);
        std::string csv_path = fs::path(report_path).replace_extension(".csv").string();
        grapheye::write_file(csv_path, grapheye::metrics_to_csv(counts, metrics));
        log_info("report written to " + report_path + " and " + csv_path);
    }
    return 0;
}

int run_pipeline(const std::string& cwe_name, int pairs, uint32_t seed,
                 const std::string& config_path, const std::string& out_dir) {
    grapheye::PipelineConfig cfg;
    cfg.cwe = cwe_from_name(cwe_name);
    cfg.pairs = pairs;
    cfg.seed = seed;
    cfg.out_dir = out_dir;
    if (!config_path.empty())
        cfg.model = grapheye::config_from_json(grapheye::parse_json_file(config_path));
    cfg.model.seed = seed;
    auto res = grapheye::pipeline_end_to_end(cfg);
    std::cout << "report: " << res.report_path << "\n";
    if (res.metrics.f1)
        std::cout << "test f1: " << *res.metrics.f1 << "\n";
    std::cout << "throughput: " << res.throughput_fns_per_sec << " functions/s\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"code property graph vulnerability classifier"};
    app.require_subcommand(1);

    // parse
    std::string p_file, p_fn;
    bool p_json = false;
    auto* parse_cmd = app.add_subcommand("parse", "parse a source file into ASTs");
    parse_cmd->add_option("file", p_file, "C source file")->required();
    parse_cmd->add_option("--fn", p_fn, "restrict to one function");
    parse_cmd->add_flag("--json", p_json, "emit AST JSON");

    // cpg
    std::string c_file, c_fn, c_dot, c_json;
    auto* cpg_cmd = app.add_subcommand("cpg", "build a code property graph");
    cpg_cmd->add_option("file", c_file, "C source file")->required();
    cpg_cmd->add_option("--fn", c_fn, "function name");
    auto* dot_opt = cpg_cmd->add_option("--dot", c_dot, "write DOT to this path");
    cpg_cmd->add_option("--json", c_json, "write JSON to this path")->excludes(dot_opt);

    // vectorize
    std::string v_file, v_fn, v_vocab, v_out;
    auto* vec_cmd = app.add_subcommand("vectorize", "feature matrix + adjacency");
    vec_cmd->add_option("file", v_file, "C source file")->required();
    vec_cmd->add_option("--fn", v_fn, "function name");
    vec_cmd->add_option("--vocab", v_vocab, "vocabulary JSON")->required();
    vec_cmd->add_option("--out", v_out, "output path (default stdout)");

    // dataset label | synth
    auto* ds_cmd = app.add_subcommand("dataset", "corpus labeling and generation");
    ds_cmd->require_subcommand(1);
    std::string dl_dir, dl_allow, dl_cwe, dl_out;
    auto* label_cmd = ds_cmd->add_subcommand("label", "label a directory of units");
    label_cmd->add_option("dir", dl_dir, "directory of .c files")->required();
    label_cmd->add_option("--allowlist", dl_allow, "support-call allowlist JSON");
    label_cmd->add_option("--cwe", dl_cwe, "CWE tag recorded on every entry");
    label_cmd->add_option("--out", dl_out, "manifest output path")->required();

    std::string sy_cwe = "divide_zero", sy_out;
    int sy_pairs = 200;
    uint32_t sy_seed = 7;
    auto* synth_cmd = ds_cmd->add_subcommand("synth", "generate a synthetic corpus");
    synth_cmd->add_option("--cwe", sy_cwe, "divide_zero|null_deref|stack_overflow");
    synth_cmd->add_option("--pairs", sy_pairs, "good/bad pairs to generate");
    synth_cmd->add_option("--seed", sy_seed, "generator seed");
    synth_cmd->add_option("--out", sy_out, "output directory")->required();

    // train
    std::string t_data, t_config, t_out;
    int t_seed = -1;
    auto* train_cmd = app.add_subcommand("train", "train a classifier");
    train_cmd->add_option("--data", t_data, "dataset manifest JSON")->required();
    train_cmd->add_option("--config", t_config, "hyperparameter JSON");
    train_cmd->add_option("--out", t_out, "model output path")->required();
    train_cmd->add_option("--seed", t_seed, "override the config seed");

    // predict
    std::string pr_model, pr_file, pr_fn;
    auto* pred_cmd = app.add_subcommand("predict", "classify one function");
    pred_cmd->add_option("--model", pr_model, "model JSON")->required();
    pred_cmd->add_option("file", pr_file, "C source file")->required();
    pred_cmd->add_option("--fn", pr_fn, "function name");

    // eval
    std::string e_model, e_data, e_report;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a model on a manifest");
    eval_cmd->add_option("--model", e_model, "model JSON")->required();
    eval_cmd->add_option("--data", e_data, "dataset manifest JSON")->required();
    eval_cmd->add_option("--report", e_report, "report output path (default stdout)");

    // pipeline
    std::string pl_cwe = "divide_zero", pl_config, pl_out = "grapheye-run";
    int pl_pairs = 200;
    uint32_t pl_seed = 7;
    auto* pipe_cmd = app.add_subcommand("pipeline", "synthetic end-to-end run");
    pipe_cmd->add_option("--cwe", pl_cwe, "divide_zero|null_deref|stack_overflow");
    pipe_cmd->add_option("--pairs", pl_pairs, "good/bad pairs to generate");
    pipe_cmd->add_option("--seed", pl_seed, "seed for every random stage");
    pipe_cmd->add_option("--config", pl_config, "hyperparameter JSON");
    pipe_cmd->add_option("--out", pl_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (parse_cmd->parsed()) return run_parse(p_file, p_fn, p_json);
        if (cpg_cmd->parsed()) return run_cpg(c_file, c_fn, c_dot, c_json);
        if (vec_cmd->parsed()) return run_vectorize(v_file, v_fn, v_vocab, v_out);
        if (label_cmd->parsed()) return run_dataset_label(dl_dir, dl_allow, dl_cwe, dl_out);
        if (synth_cmd->parsed()) return run_dataset_synth(sy_cwe, sy_pairs, sy_seed, sy_out);
        if (train_cmd->parsed()) return run_train(t_data, t_config, t_out, t_seed);
        if (pred_cmd->parsed()) return run_predict(pr_model, pr_file, pr_fn);
        if (eval_cmd->parsed()) return run_eval(e_model, e_data, e_report);
        if (pipe_cmd->parsed())
            return run_pipeline(pl_cwe, pl_pairs, pl_seed, pl_config, pl_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
