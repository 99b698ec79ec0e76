#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "grapheye/cpg.hpp"
#include "grapheye/errors.hpp"
#include "grapheye/gcgat.hpp"
#include "grapheye/parser.hpp"

namespace grapheye {

enum class FunctionLabel { Good, Bad };
enum class DataOrigin { Sard, Synthetic };

struct LabeledFunction {
    std::string name;
    std::string source;
    FunctionLabel label = FunctionLabel::Good;
    std::string cwe;
    DataOrigin origin = DataOrigin::Synthetic;
};

struct ConfusionCounts {
    long tp = 0, fp = 0, tn = 0, fn = 0;
    long total() const { return tp + fp + tn + fn; }
};

/// Ratios with empty denominators are reported as nullopt, not 0.
struct MetricsReport {
    std::optional<double> fpr, fnr, tpr, precision, f1;
};

inline double f1_score(double precision, double tpr) {
    return 2.0 * precision * tpr / (precision + tpr);
}

inline MetricsReport compute_metrics(const ConfusionCounts& c) {
    MetricsReport r;
    auto ratio = [](long num, long den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return double(num) / double(den);
    };
    r.fpr = ratio(c.fp, c.fp + c.tn);
    r.fnr = ratio(c.fn, c.tp + c.fn);
    r.tpr = ratio(c.tp, c.tp + c.fn);
    r.precision = ratio(c.tp, c.tp + c.fp);
    if (r.precision && r.tpr && (*r.precision + *r.tpr) > 0.0)
        r.f1 = f1_score(*r.precision, *r.tpr);
    return r;
}

// ---- root-function labeling --------------------------------------------------

/// True iff the function calls another function defined in its own
/// translation unit (and not excused by the support allowlist).
inline bool detect_user_defined_calls(const FunctionAst& fn,
                                      const std::set<std::string>& unit_functions,
                                      const std::set<std::string>& support_allowlist) {
    for (const auto& callee : fn.callees) {
        if (support_allowlist.count(callee)) continue;
        if (unit_functions.count(callee)) return true;
    }
    return false;
}

/// Juliet-style support functions treated as API calls for root filtering.
inline const std::set<std::string>& default_allowlist() {
    static const std::set<std::string> names = {
        "printIntLine", "printLine", "printFloatLine", "printLongLongLine",
        "printHexCharLine", "printUnsignedLine", "printDoubleLine", "fabs",
        "printf", "memcpy", "memset", "malloc", "free", "strlen", "strcpy",
        "strncpy", "rand", "abs", "exit", "fgets", "atoi",
    };
    return names;
}

namespace detail {

inline std::string to_lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    return out;
}

inline std::optional<FunctionLabel> label_from_name(const std::string& name) {
    std::string low = to_lower(name);
    bool has_bad = low.find("bad") != std::string::npos;
    bool has_good = low.find("good") != std::string::npos;
    if (has_bad && has_good)
        throw LabelError("function '" + name + "' matches both naming tokens");
    if (has_bad) return FunctionLabel::Bad;
    if (has_good) return FunctionLabel::Good;
    return std::nullopt;
}

}  // namespace detail

/// Parses each translation unit, keeps root candidates (no user-defined
/// calls), and labels them by the Juliet naming rule. Unmarked functions are
/// excluded.
inline std::vector<LabeledFunction> label_functions(
    const std::vector<std::string>& unit_sources, const std::string& cwe,
    const std::set<std::string>& allowlist = default_allowlist()) {
    std::vector<LabeledFunction> out;
    for (const auto& source : unit_sources) {
        auto fns = parse_unit(source);
        std::set<std::string> unit_names;
        for (const auto& fn : fns) unit_names.insert(fn.name);
        for (const auto& fn : fns) {
            if (detect_user_defined_calls(fn, unit_names, allowlist)) continue;
            auto label = detail::label_from_name(fn.name);
            if (!label) continue;
            // extract this function's own source slice is unnecessary; keep
            // the unit and let downstream parsing select by name
            out.push_back({fn.name, source, *label, cwe, DataOrigin::Sard});
        }
    }
    return out;
}

// ---- split and downsampling ---------------------------------------------------

/// Seeded uniform shuffle, prefix split at floor(ratio * n).
inline std::pair<std::vector<LabeledFunction>, std::vector<LabeledFunction>> split(
    std::vector<LabeledFunction> entries, double ratio, uint32_t seed) {
    if (entries.size() < 5) throw DataError("split requires at least 5 entries");
    std::mt19937 rng(seed);
    detail::seeded_shuffle(entries, rng);
    size_t cut = size_t(ratio * double(entries.size()));
    std::vector<LabeledFunction> train(entries.begin(), entries.begin() + long(cut));
    std::vector<LabeledFunction> test(entries.begin() + long(cut), entries.end());
    return {std::move(train), std::move(test)};
}

/// Randomly subsamples the majority class (without replacement) down to the
/// minority class count; original relative order of kept entries preserved.
inline std::vector<LabeledFunction> downsample(const std::vector<LabeledFunction>& entries,
                                               uint32_t seed) {
    std::vector<size_t> good_idx, bad_idx;
    for (size_t i = 0; i < entries.size(); ++i)
        (entries[i].label == FunctionLabel::Good ? good_idx : bad_idx).push_back(i);
    if (good_idx.empty() || bad_idx.empty())
        throw DataError("downsample requires both classes");

    auto& majority = good_idx.size() >= bad_idx.size() ? good_idx : bad_idx;
    size_t target = std::min(good_idx.size(), bad_idx.size());

    std::mt19937 rng(seed);
    detail::seeded_shuffle(majority, rng);
    majority.resize(target);

    std::set<size_t> keep(good_idx.begin(), good_idx.end());
    keep.insert(bad_idx.begin(), bad_idx.end());
    std::vector<LabeledFunction> out;
    out.reserve(keep.size());
    for (size_t i : keep) out.push_back(entries[i]);
    return out;
}

// ---- synthetic corpus ----------------------------------------------------------

enum class SynthCwe { DivideZero, NullDeref, StackOverflow };

inline const char* to_string(SynthCwe c) {
    switch (c) {
        case SynthCwe::DivideZero: return "divide_zero";
        case SynthCwe::NullDeref: return "null_deref";
        case SynthCwe::StackOverflow: return "stack_overflow";
    }
    return "?";
}

namespace detail {

struct SynthNames {
    std::string var, result, tmp;
    std::string filler;
    std::string literal;
};

inline SynthNames draw_names(std::mt19937& rng, int pair_index) {
    static const char* vars[] = {"data", "value", "input", "amount", "count", "size"};
    static const char* results[] = {"result", "output", "res", "quotient", "total"};
    SynthNames n;
    std::string suffix = std::to_string(pair_index);
    n.var = std::string(vars[rng() % 6]) + suffix;
    n.result = std::string(results[rng() % 5]) + suffix;
    n.tmp = "t" + suffix;

    int n_filler = int(rng() % 3);  // 0..2 benign statements
    std::ostringstream f;
    for (int k = 0; k < n_filler; ++k) {
        std::string t = n.tmp + "_" + std::to_string(k);
        f << "        int " << t << " = " << (rng() % 90 + 1) << ";\n"
          << "        " << t << " = " << t << " + " << (rng() % 9 + 1) << ";\n";
    }
    n.filler = f.str();

    std::ostringstream lit;
    lit << (rng() % 400 + 10) << ".0";
    n.literal = lit.str();
    return n;
}

inline std::string divide_zero_body(const SynthNames& n, bool guarded) {
    std::ostringstream os;
    os << "    float " << n.var << " = Data;\n";
    if (guarded) {
        os << "    if (fabs(" << n.var << ") > 0.000001)\n    {\n"
           << n.filler
           << "        int " << n.result << " = (int)(" << n.literal << " / " << n.var
           << ");\n"
           << "        printIntLine(" << n.result << ");\n    }\n"
           << "    else\n    {\n"
           << "        printLine(\"This would result in a divide by zero\");\n    }\n";
    } else {
        os << "    {\n"
           << n.filler
           << "        int " << n.result << " = (int)(" << n.literal << " / " << n.var
           << ");\n"
           << "        printIntLine(" << n.result << ");\n    }\n";
    }
    return os.str();
}

inline std::string null_deref_body(const SynthNames& n, bool guarded) {
    std::ostringstream os;
    os << "    int * " << n.var << " = Data;\n";
    if (guarded) {
        os << "    if (" << n.var << " != 0)\n    {\n"
           << n.filler
           << "        int " << n.result << " = *" << n.var << ";\n"
           << "        printIntLine(" << n.result << ");\n    }\n"
           << "    else\n    {\n"
           << "        printLine(\"null pointer\");\n    }\n";
    } else {
        os << "    {\n"
           << n.filler
           << "        int " << n.result << " = *" << n.var << ";\n"
           << "        printIntLine(" << n.result << ");\n    }\n";
    }
    return os.str();
}

inline std::string stack_overflow_body(const SynthNames& n, bool guarded, int buf_size) {
    std::ostringstream os;
    os << "    int buffer" << n.tmp << "[" << buf_size << "];\n"
       << "    int " << n.var << " = Data;\n";
    if (guarded) {
        os << "    if (" << n.var << " >= 0 && " << n.var << " < " << buf_size
           << ")\n    {\n"
           << n.filler
           << "        buffer" << n.tmp << "[" << n.var << "] = 1;\n"
           << "        printIntLine(buffer" << n.tmp << "[" << n.var << "]);\n    }\n"
           << "    else\n    {\n"
           << "        printLine(\"index out of range\");\n    }\n";
    } else {
        os << "    {\n"
           << n.filler
           << "        buffer" << n.tmp << "[" << n.var << "] = 1;\n"
           << "        printIntLine(buffer" << n.tmp << "[" << n.var << "]);\n    }\n";
    }
    return os.str();
}

}  // namespace detail

/// Seeded good/bad template pairs: the bad variant lacks the guard the good
/// variant carries. Every output parses and passes the root-function filter.
inline std::vector<LabeledFunction> synth_generate(SynthCwe cwe, int n_pairs,
                                                   uint32_t seed) {
    if (n_pairs < 1) throw DataError("synth_generate requires n_pairs >= 1");
    std::mt19937 rng(seed ^ uint32_t(cwe));
    std::vector<LabeledFunction> out;
    out.reserve(size_t(n_pairs) * 2);
    std::string cwe_tag = to_string(cwe);

    for (int i = 0; i < n_pairs; ++i) {
        detail::SynthNames names = detail::draw_names(rng, i);
        int buf_size = int(rng() % 64 + 4);
        for (bool guarded : {false, true}) {
            std::string fname =
                cwe_tag + "_" + std::to_string(i) + (guarded ? "_good" : "_bad");
            std::string param = cwe == SynthCwe::NullDeref ? "int * Data"
                                : cwe == SynthCwe::DivideZero ? "float Data"
                                                              : "int Data";
            std::string body;
            switch (cwe) {
                case SynthCwe::DivideZero:
                    body = detail::divide_zero_body(names, guarded);
                    break;
                case SynthCwe::NullDeref:
                    body = detail::null_deref_body(names, guarded);
                    break;
                case SynthCwe::StackOverflow:
                    body = detail::stack_overflow_body(names, guarded, buf_size);
                    break;
            }
            std::string source =
                "static void " + fname + "(" + param + ")\n{\n" + body + "}\n";
            out.push_back({fname, source,
                           guarded ? FunctionLabel::Good : FunctionLabel::Bad, cwe_tag,
                           DataOrigin::Synthetic});
        }
    }
    return out;
}

inline std::optional<SynthCwe> parse_synth_cwe(const std::string& s) {
    if (s == "divide_zero") return SynthCwe::DivideZero;
    if (s == "null_deref") return SynthCwe::NullDeref;
    if (s == "stack_overflow") return SynthCwe::StackOverflow;
    return std::nullopt;
}

// ---- evaluation -----------------------------------------------------------------

/// Parses the named function out of an entry's source.
inline FunctionAst parse_entry(const LabeledFunction& entry) {
    auto fns = parse_unit(entry.source);
    for (auto& fn : fns)
        if (fn.name == entry.name) return std::move(fn);
    throw DataError("function '" + entry.name + "' not found in its source");
}

/// Runs predict over each entry (bad = positive class) and tallies counts.
inline std::pair<ConfusionCounts, MetricsReport> evaluate(
    const GcGatModel& model, const std::vector<LabeledFunction>& entries) {
    ConfusionCounts counts;
    for (const auto& entry : entries) {
        Prediction pred;
        try {
            PropertyGraph g = build_cpg(parse_entry(entry));
            pred = predict(model, g);
        } catch (const std::exception& e) {
            throw DataError("evaluate failed on '" + entry.name + "': " + e.what());
        }
        bool actual_bad = entry.label == FunctionLabel::Bad;
        if (pred.is_bad && actual_bad) ++counts.tp;
        else if (pred.is_bad && !actual_bad) ++counts.fp;
        else if (!pred.is_bad && actual_bad) ++counts.fn;
        else ++counts.tn;
    }
    return {counts, compute_metrics(counts)};
}

/// Vectorizes labeled entries into training samples with a shared vocabulary.
inline std::vector<TrainSample> vectorize_corpus(
    const std::vector<LabeledFunction>& entries, const FunctionVocabulary& vocab) {
    std::vector<TrainSample> out;
    out.reserve(entries.size());
    for (const auto& entry : entries) {
        PropertyGraph g = build_cpg(parse_entry(entry));
        TrainSample s;
        s.x = build_feature_matrix(g, vocab);
        s.a = build_adjacency(g);
        s.label = entry.label == FunctionLabel::Bad ? 1 : 0;
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace grapheye
