#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "grapheye/datakit.hpp"
#include "grapheye/json_io.hpp"

namespace grapheye {

struct PipelineConfig {
    SynthCwe cwe = SynthCwe::DivideZero;
    int pairs = 200;
    uint32_t seed = 7;
    double split_ratio = 0.8;
    GcGatConfig model;
    std::string out_dir = "grapheye-run";
};

struct PipelineResult {
    std::string report_path;
    ConfusionCounts counts;
    MetricsReport metrics;
    TrainHistory history;
    double throughput_fns_per_sec = 0.0;  // wall-clock; excluded from artifacts
};

/// synth -> split -> downsample -> vocab -> train -> evaluate, each stage
/// persisted under out_dir. Identical config and seed reproduce every
/// artifact byte for byte; the throughput measurement is wall-clock and is
/// reported on the side, never written into the deterministic artifacts.
inline PipelineResult pipeline_end_to_end(const PipelineConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    fs::create_directories(cfg.out_dir + "/corpus");

    // stage 1: synthetic corpus
    auto corpus = synth_generate(cfg.cwe, cfg.pairs, cfg.seed);
    DatasetManifest manifest;
    for (const auto& fn : corpus) {
        std::string rel = "corpus/" + fn.name + ".c";
        write_file(cfg.out_dir + "/" + rel, fn.source);
        manifest.entries.push_back({rel, fn.name, fn.label, fn.cwe});
    }
    write_file(cfg.out_dir + "/manifest.json", manifest_to_json(manifest).dump(2) + "\n");

    // stage 2: split, downsample the training side only
    auto [train_set, test_set] = split(corpus, cfg.split_ratio, cfg.seed);
    train_set = downsample(train_set, cfg.seed);

    // stage 3: vocabulary from the training corpus
    std::vector<FunctionAst> train_asts;
    train_asts.reserve(train_set.size());
    for (const auto& e : train_set) train_asts.push_back(parse_entry(e));
    FunctionVocabulary vocab = build_vocab(train_asts);
    write_file(cfg.out_dir + "/vocab.json", vocab_to_json(vocab).dump(2) + "\n");

    // stage 4: train
    auto samples = vectorize_corpus(train_set, vocab);
    auto [model, history] = train(samples, cfg.model, vocab);
    write_file(cfg.out_dir + "/model.json", model_to_json(model).dump() + "\n");

    // stage 5: evaluate on the held-out split
    auto [counts, metrics] = evaluate(model, test_set);
    std::string report_path = cfg.out_dir + "/report.json";
    write_file(report_path, metrics_to_json(counts, metrics).dump(2) + "\n");
    write_file(cfg.out_dir + "/report.csv", metrics_to_csv(counts, metrics));

    // throughput, measured at predict time
    std::vector<PropertyGraph> graphs;
    graphs.reserve(test_set.size());
    for (const auto& e : test_set) graphs.push_back(build_cpg(parse_entry(e)));
    auto t0 = std::chrono::steady_clock::now();
    for (const auto& g : graphs) (void)predict(model, g);
    auto t1 = std::chrono::steady_clock::now();
    double secs = std::chrono::duration<double>(t1 - t0).count();

    PipelineResult result;
    result.report_path = report_path;
    result.counts = counts;
    result.metrics = metrics;
    result.history = std::move(history);
    result.throughput_fns_per_sec = secs > 0.0 ? double(graphs.size()) / secs : 0.0;
    return result;
}

}  // namespace grapheye
