#pragma once

/**
 * @file commands.hpp
 * @brief The toolchain's commands: train, recommend, evaluate, and reports.
 *
 * Each command takes a Config plus its inputs and writes human-readable
 * output to a stream. Errors surface as the library's exception types; the
 * CLI maps them to exit codes.
 */

#include "emrec/dataset.hpp"
#include "emrec/error.hpp"
#include "emrec/evaluation.hpp"
#include "emrec/features.hpp"
#include "emrec/fixtures.hpp"
#include "emrec/gbdt.hpp"
#include "emrec/name_provider.hpp"
#include "emrec/naming.hpp"
#include "emrec/recommender.hpp"
#include "emrec/remote_naming.hpp"
#include "emrec/serialization.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace emrec {

struct Config {
    std::string src_root{"."};
    int min_statements{kDefaultMinStatements};
    int k{5};
    double threshold{0.5};
    std::vector<double> tolerances = default_tolerances();
    std::uint64_t seed{0};
    std::string name_provider{"builtin"};  ///< builtin | fixed:<v> | remote:<url>
    bool fallback_to_builtin{false};
    int remote_timeout_ms{5000};
    std::string model_path{"model.json"};
    std::string name_model_path{"name_model.json"};
    int tune_trials{0};
    int folds{5};
    bool use_confidence{true};

    void validate() const {
        if (min_statements < 1) throw ContractError("min_statements must be positive");
        if (k < 1) throw ContractError("top must be at least 1");
        if (!(threshold >= 0.0 && threshold < 1.0)) throw ContractError("threshold must lie in [0,1)");
        for (double t : tolerances) {
            if (!(t >= 0.0 && t <= 1.0)) throw ContractError("tolerance must lie in [0,1]");
        }
        if (tolerances.empty()) throw ContractError("at least one tolerance is required");
        if (tune_trials < 0) throw ContractError("tune_trials must not be negative");
        if (folds < 2) throw ContractError("folds must be at least 2");
        if (remote_timeout_ms < 1) throw ContractError("remote timeout must be positive");
    }
};

/// Reads a JSON config. Keys mirror the Config fields; absent keys keep defaults.
inline Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
    Config c;
    try {
        c.src_root = j.value("src_root", c.src_root);
        c.min_statements = j.value("min_statements", c.min_statements);
        c.k = j.value("k", c.k);
        c.threshold = j.value("threshold", c.threshold);
        if (j.contains("tolerance")) c.tolerances = {j.at("tolerance").get<double>()};
        c.tolerances = j.value("tolerances", c.tolerances);
        c.seed = j.value("seed", c.seed);
        c.name_provider = j.value("name_provider", c.name_provider);
        c.fallback_to_builtin = j.value("fallback_to_builtin", c.fallback_to_builtin);
        c.remote_timeout_ms = j.value("remote_timeout_ms", c.remote_timeout_ms);
        c.model_path = j.value("model_path", c.model_path);
        c.name_model_path = j.value("name_model_path", c.name_model_path);
        c.tune_trials = j.value("tune_trials", c.tune_trials);
        c.folds = j.value("folds", c.folds);
        c.use_confidence = j.value("use_confidence", c.use_confidence);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
    return c;
}

// ---------------------------------------------------------------------------
// Helpers

/// Writes every file under a temporary name first, then renames them all,
/// so a failure leaves no partial outputs behind.
inline void write_files_atomically(const std::vector<std::pair<std::string, std::string>>& files) {
    namespace fs = std::filesystem;
    std::vector<std::string> temps;
    try {
        for (const auto& [path, content] : files) {
            const fs::path p(path);
            if (p.has_parent_path()) fs::create_directories(p.parent_path());
            const std::string tmp = path + ".tmp";
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw DataError("cannot write " + tmp);
            temps.push_back(tmp);
            out << content;
            out.close();
            if (!out) throw DataError("cannot write " + tmp);
        }
    } catch (...) {
        for (const auto& t : temps) fs::remove(t);
        throw;
    }
    for (std::size_t i = 0; i < files.size(); ++i) fs::rename(temps[i], files[i].first);
}

inline std::vector<NameCorpusEntry> name_corpus(SourceCache& sources) {
    std::vector<NameCorpusEntry> out;
    for (const auto& file : sources.java_files()) {
        for (const auto& m : sources.get(file).methods) out.push_back(corpus_entry(m));
    }
    return out;
}

/// Builds the configured provider. The name model backs `builtin` and the fallback.
inline std::shared_ptr<const NameProvider> make_provider(const Config& config, std::shared_ptr<const NameModel> name_model) {
    const std::string& spec = config.name_provider;
    auto builtin = [&]() -> std::shared_ptr<const NameProvider> {
        if (!name_model) throw ModelError("the builtin name provider needs a name model");
        return std::make_shared<BuiltinNameProvider>(name_model);
    };
    if (spec == "builtin") return builtin();
    if (spec.rfind("fixed:", 0) == 0) {
        double v = 0.0;
        try {
            std::size_t used = 0;
            v = std::stod(spec.substr(6), &used);
            if (used != spec.size() - 6) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw ContractError("bad fixed confidence in " + spec);
        }
        return std::make_shared<FixedNameProvider>(v);
    }
    if (spec.rfind("remote:", 0) == 0) {
        return std::make_shared<RemoteNameProvider>(spec.substr(7), std::chrono::milliseconds(config.remote_timeout_ms),
                                                    config.fallback_to_builtin ? builtin() : nullptr);
    }
    throw ContractError("unknown name provider " + spec + " (expected builtin, fixed:<v> or remote:<url>)");
}

struct LoadedModels {
    GbdtModel model;
    std::shared_ptr<const NameModel> name_model;
};

/// The classifier, and the name model when one exists at the configured path.
inline LoadedModels load_models(const Config& config, bool need_name_model) {
    LoadedModels out;
    if (!std::filesystem::exists(config.model_path)) throw ModelError("model file not found: " + config.model_path);
    out.model = gbdt_from_json(read_json_file(config.model_path));
    if (std::filesystem::exists(config.name_model_path)) {
        out.name_model = std::make_shared<const NameModel>(name_model_from_json(read_json_file(config.name_model_path)));
    } else if (need_name_model) {
        throw ModelError("name model file not found: " + config.name_model_path);
    }
    return out;
}

inline bool provider_needs_name_model(const Config& config) {
    return config.name_provider == "builtin" || config.fallback_to_builtin;
}

inline std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

// ---------------------------------------------------------------------------
// train

struct TrainReport {
    int positives{0};
    int negatives{0};
    Hyperparams hyperparams;
    bool tuned{false};
    std::optional<double> cv_score;
    std::vector<std::string> features;
    std::vector<std::string> warnings;
    std::string report_path;

    [[nodiscard]] nlohmann::json to_json() const {
        return {{"positives", positives},
                {"negatives", negatives},
                {"hyperparams", emrec::to_json(hyperparams)},
                {"tuned", tuned},
                {"cv_f_measure", cv_score ? nlohmann::json(*cv_score) : nlohmann::json(nullptr)},
                {"feature_count", features.size()},
                {"warnings", warnings}};
    }
};

inline std::string report_path_for(const std::string& model_path) { return model_path + ".report.json"; }

inline TrainReport cmd_train(const Config& config, const std::string& gold_path, std::ostream& out) {
    config.validate();
    const auto gold = read_gold(gold_path);
    if (gold.empty()) throw DataError(gold_path + ": no gold examples");
    SourceCache sources(config.src_root);

    auto name_model = std::make_shared<const NameModel>(train_name_model(name_corpus(sources)));
    const auto provider = make_provider(config, name_model);
    const TrainingSet set = build_training_set(gold, sources, *provider, config.seed, config.min_statements);

    TrainReport report;
    report.positives = set.positives;
    report.negatives = set.negatives;
    report.warnings = set.warnings;
    report.features = feature_names();
    if (!config.use_confidence) report.features.pop_back();
    if (set.negatives == 0) throw DataError("no negative examples could be generated");

    if (config.tune_trials > 0) {
        const auto tuned = tune(set.examples, SearchSpace{}, config.tune_trials,
                                std::min<int>(config.folds, static_cast<int>(set.examples.size())), config.seed,
                                report.features);
        report.hyperparams = tuned.best;
        report.tuned = true;
    }
    const int folds = std::min<int>(config.folds, std::min(set.positives, set.negatives));
    if (folds >= 2) {
        try {
            report.cv_score = cross_validate(set.examples, report.hyperparams, folds, config.seed, report.features);
        } catch (const DataError&) {
            report.cv_score.reset();
        }
    }
    const GbdtModel model = train(set.examples, report.hyperparams, config.seed, report.features);

    report.report_path = report_path_for(config.model_path);
    write_files_atomically({{config.model_path, to_json(model).dump(2) + "\n"},
                            {config.name_model_path, to_json(*name_model).dump(2) + "\n"},
                            {report.report_path, report.to_json().dump(2) + "\n"}});

    out << "positives: " << report.positives << "\n";
    out << "negatives: " << report.negatives << "\n";
    out << "features: " << report.features.size() << "\n";
    out << "hyperparams: " << to_json(report.hyperparams).dump() << (report.tuned ? " (tuned)" : " (default)") << "\n";
    out << "cv f-measure: " << (report.cv_score ? fmt("%.4f", *report.cv_score) : std::string("n/a")) << "\n";
    for (const auto& w : report.warnings) out << "warning: " << w << "\n";
    out << "wrote " << config.model_path << ", " << config.name_model_path << ", " << report.report_path << "\n";
    return report;
}

// ---------------------------------------------------------------------------
// recommend

inline std::string resolve_source_path(const Config& config, const std::string& file) {
    if (std::filesystem::exists(file)) return file;
    const auto joined = std::filesystem::path(config.src_root) / file;
    if (std::filesystem::exists(joined)) return joined.string();
    throw DataError("source file not found: " + file);
}

/// `name` or `name@line`.
inline const MethodModel& select_method(const SourceUnit& unit, const std::string& spec) {
    const auto at = spec.find('@');
    const std::string name = spec.substr(0, at);
    std::optional<int> line;
    if (at != std::string::npos) {
        try {
            line = std::stoi(spec.substr(at + 1));
        } catch (const std::exception&) {
            throw ContractError("bad method selector " + spec);
        }
    }
    std::vector<const MethodModel*> hits;
    for (const auto& m : unit.methods) {
        if (m.name == name && (!line || m.start_line == *line)) hits.push_back(&m);
    }
    if (hits.empty()) throw DataError("method " + spec + " not found in " + unit.path);
    if (hits.size() > 1) {
        std::string lines;
        for (const auto* m : hits) lines += " " + std::to_string(m->start_line);
        throw DataError("method " + name + " is ambiguous; use name@line (lines:" + lines + ")");
    }
    return *hits.front();
}

inline nlohmann::json to_json(const Recommendation& r, const std::string& file, const std::string& method) {
    return {{"rank", r.rank},
            {"file", file},
            {"method", method},
            {"start_line", r.fragment.start_line},
            {"end_line", r.fragment.end_line},
            {"probability", r.probability},
            {"predicted_name", r.predicted_name ? r.predicted_name->joined() : ""},
            {"confidence", r.confidence},
            {"fallback", r.fallback}};
}

inline std::vector<Recommendation> cmd_recommend(const Config& config, const std::string& file, const std::string& method,
                                                 std::ostream& out, bool json = false) {
    config.validate();
    const LoadedModels models = load_models(config, provider_needs_name_model(config));
    const auto provider = make_provider(config, models.name_model);
    const std::string path = resolve_source_path(config, file);
    std::ifstream in(path, std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    const SourceUnit unit = parse_source(text.str(), file);
    const MethodModel& m = select_method(unit, method);
    const auto recs = recommend(m, models.model, *provider, config.k, config.threshold, config.min_statements);

    if (json) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : recs) arr.push_back(to_json(r, file, m.name));
        out << arr.dump(2) << "\n";
        return recs;
    }
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-5s%-28s%-20s%-10s%-12s%-24s%s\n", "Rank", "File", "Method", "Lines", "Probability",
                  "Predicted name", "Confidence");
    out << buf;
    for (const auto& r : recs) {
        const std::string lines = std::to_string(r.fragment.start_line) + "-" + std::to_string(r.fragment.end_line);
        const std::string name = r.predicted_name ? r.predicted_name->joined() : "-";
        std::snprintf(buf, sizeof buf, "%-5d%-28s%-20s%-10s%-12.4f%-24s%.5f%s\n", r.rank, file.c_str(), m.name.c_str(),
                      lines.c_str(), r.probability, name.c_str(), r.confidence, r.fallback ? " (fallback)" : "");
        out << buf;
    }
    if (recs.empty()) out << "no candidate above threshold " << config.threshold << "\n";
    return recs;
}

// ---------------------------------------------------------------------------
// evaluate

inline EvalResult cmd_evaluate(const Config& config, const std::string& gold_path, std::ostream& out, bool json = false) {
    config.validate();
    const LoadedModels models = load_models(config, provider_needs_name_model(config));
    const auto provider = make_provider(config, models.name_model);
    const auto gold = read_gold(gold_path);
    SourceCache sources(config.src_root);
    EvalOptions options;
    options.k = config.k;
    options.threshold = config.threshold;
    options.min_statements = config.min_statements;
    options.tolerances = config.tolerances;
    auto result = evaluate(models.model, gold, sources, *provider, options);
    if (json) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& m : result.metrics) arr.push_back(to_json(m));
        out << nlohmann::json{{"metrics", arr}, {"warnings", result.warnings}}.dump(2) << "\n";
    } else {
        out << metrics_table(result.metrics);
        for (const auto& w : result.warnings) out << "warning: " << w << "\n";
    }
    return result;
}

// ---------------------------------------------------------------------------
// importance and confidence statistics

inline std::vector<std::pair<std::string, double>> cmd_importance(const Config& config, bool all, std::ostream& out) {
    const GbdtModel model = load_models(config, false).model;
    const auto rows = importance_report(model);
    out << importance_table(rows, all ? rows.size() : 10);
    return rows;
}

inline ConfidenceComparison cmd_confidence_stats(const Config& config, const std::string& gold_path, std::ostream& out) {
    config.validate();
    const LoadedModels models = load_models(config, provider_needs_name_model(config));
    const auto provider = make_provider(config, models.name_model);
    const auto gold = read_gold(gold_path);
    SourceCache sources(config.src_root);
    const TrainingSet set = build_training_set(gold, sources, *provider, config.seed, config.min_statements);
    const auto cmp = confidence_comparison(set.examples);
    out << confidence_table(cmp);
    return cmp;
}

inline FixtureCorpus cmd_gen_fixtures(const std::string& out_dir, std::uint64_t seed, const FixtureOptions& options,
                                      std::ostream& out) {
    const auto corpus = generate_fixtures(seed, options);
    write_fixtures(corpus, out_dir);
    out << "wrote " << corpus.files.size() << " source files, " << corpus.train.size() << " training and "
        << corpus.test.size() << " test gold entries to " << out_dir << "\n";
    return corpus;
}

} // namespace emrec
