// Command-line entry point.
//
// Exit codes: 0 success, 1 usage error, 2 data or parse error,
// 3 model or name-service error.

#include "emrec/commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

struct Flags {
    std::optional<std::string> config;
    std::optional<std::string> src_root;
    std::optional<std::string> dataset;
    std::optional<std::string> model;
    std::optional<std::string> name_model;
    std::optional<int> top;
    std::optional<double> threshold;
    std::optional<double> tolerance;
    std::optional<int> min_statements;
    std::optional<std::uint64_t> seed;
    std::optional<int> tune_trials;
    std::optional<int> folds;
    std::optional<std::string> name_provider;
    std::optional<int> timeout_ms;
    bool fallback{false};
    bool no_confidence{false};
    bool json{false};
    bool all{false};
    std::string file;
    std::string method;
    std::string out_dir{"fixtures-out"};
    int train_methods{60};
    int test_methods{40};
};

emrec::Config resolve(const Flags& f) {
    emrec::Config c = f.config ? emrec::load_config(*f.config) : emrec::Config{};
    if (f.src_root) c.src_root = *f.src_root;
    if (f.model) c.model_path = *f.model;
    if (f.name_model) c.name_model_path = *f.name_model;
    if (f.top) c.k = *f.top;
    if (f.threshold) c.threshold = *f.threshold;
    if (f.tolerance) c.tolerances = {*f.tolerance};
    if (f.min_statements) c.min_statements = *f.min_statements;
    if (f.seed) c.seed = *f.seed;
    if (f.tune_trials) c.tune_trials = *f.tune_trials;
    if (f.folds) c.folds = *f.folds;
    if (f.name_provider) c.name_provider = *f.name_provider;
    if (f.timeout_ms) c.remote_timeout_ms = *f.timeout_ms;
    if (f.fallback) c.fallback_to_builtin = true;
    if (f.no_confidence) c.use_confidence = false;
    return c;
}

std::string require_dataset(const Flags& f) {
    if (!f.dataset) throw emrec::ContractError("--dataset is required");
    return *f.dataset;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Extract Method refactoring recommender"};
    app.require_subcommand(1);
    app.fallthrough();
    Flags f;

    app.add_option("--config", f.config, "JSON config file; flags override it");
    app.add_option("--src-root", f.src_root, "Root directory of the Java sources");
    app.add_option("--dataset", f.dataset, "Gold dataset (JSON Lines)");
    app.add_option("--model", f.model, "Classifier model file");
    app.add_option("--name-model", f.name_model, "Built-in name model file");
    app.add_option("--top", f.top, "Recommendations per method");
    app.add_option("--threshold", f.threshold, "Minimum probability for a recommendation");
    app.add_option("--tolerance", f.tolerance, "Single tolerance ratio (default: 0, 0.01, 0.02, 0.03)");
    app.add_option("--min-statements", f.min_statements, "Minimum statements per candidate");
    app.add_option("--seed", f.seed, "Seed for every random choice");
    app.add_option("--tune-trials", f.tune_trials, "Random-search trials (0 keeps default hyperparameters)");
    app.add_option("--folds", f.folds, "Cross-validation folds");
    app.add_option("--name-provider", f.name_provider, "builtin | fixed:<value> | remote:<url>");
    app.add_option("--timeout-ms", f.timeout_ms, "Per-request timeout for the remote name service");
    app.add_flag("--fallback", f.fallback, "Fall back to the built-in name model when the service fails");

    auto* train = app.add_subcommand("train", "Train the classifier and the name model");
    train->add_flag("--no-confidence", f.no_confidence, "Leave out the name-confidence feature");

    auto* rec = app.add_subcommand("recommend", "Rank extraction candidates of one method");
    rec->add_option("file", f.file, "Java source file")->required();
    rec->add_option("method", f.method, "Method name, or name@line")->required();
    rec->add_flag("--json", f.json, "Print JSON instead of a table");

    auto* eval = app.add_subcommand("evaluate", "Precision, recall and F-measure against gold data");
    eval->add_flag("--json", f.json, "Print JSON instead of a table");

    auto* imp = app.add_subcommand("importance", "Feature importance of a trained model");
    imp->add_flag("--all", f.all, "Print every feature instead of the top 10");

    auto* stats = app.add_subcommand("confidence-stats", "Confidence statistics of positive and negative examples");

    auto* gen = app.add_subcommand("gen-fixtures", "Write the synthetic acceptance corpus");
    gen->add_option("--out", f.out_dir, "Output directory");
    gen->add_option("--train-methods", f.train_methods, "Long methods in the training split");
    gen->add_option("--test-methods", f.test_methods, "Long methods in the test split");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        const emrec::Config config = resolve(f);
        if (*train) {
            emrec::cmd_train(config, require_dataset(f), std::cout);
        } else if (*rec) {
            emrec::cmd_recommend(config, f.file, f.method, std::cout, f.json);
        } else if (*eval) {
            emrec::cmd_evaluate(config, require_dataset(f), std::cout, f.json);
        } else if (*imp) {
            emrec::cmd_importance(config, f.all, std::cout);
        } else if (*stats) {
            emrec::cmd_confidence_stats(config, require_dataset(f), std::cout);
        } else if (*gen) {
            emrec::FixtureOptions options;
            options.train_methods = f.train_methods;
            options.test_methods = f.test_methods;
            emrec::cmd_gen_fixtures(f.out_dir, config.seed, options, std::cout);
        }
    } catch (const emrec::ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const emrec::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const emrec::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const emrec::ModelError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return 3;
    } catch (const emrec::ProtocolError& e) {
        std::cerr << "name service error: " << e.what() << "\n";
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
