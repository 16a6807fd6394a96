#include "emrec/commands.hpp"
#include "stub_server.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>
#include <sys/wait.h>

using namespace emrec;
using emrec::testing::read_file;
using emrec::testing::StubServer;
using emrec::testing::TempDir;

namespace {

/// 6 long methods plus 6 single-candidate methods: 12 training gold entries.
FixtureOptions small_options() {
    FixtureOptions o;
    o.train_methods = 6;
    o.test_methods = 4;
    o.single_candidate_methods = 6;
    o.helpers_per_theme = 3;
    return o;
}

class Workspace {
public:
    Workspace() {
        std::ostringstream sink;
        corpus = cmd_gen_fixtures(dir.str("corpus"), 5, small_options(), sink);
        config.src_root = dir.str("corpus/src");
        config.model_path = dir.str("out/model.json");
        config.name_model_path = dir.str("out/name_model.json");
        config.seed = 5;
    }

    [[nodiscard]] std::string train_gold() const { return dir.str("corpus/train.jsonl"); }
    [[nodiscard]] std::string test_gold() const { return dir.str("corpus/test.jsonl"); }

    /// First long test method as (relative file, name).
    [[nodiscard]] std::pair<std::string, std::string> test_method() const {
        return {corpus.test.at(0).file, corpus.test.at(0).method_name};
    }

    TempDir dir;
    FixtureCorpus corpus;
    Config config;
};

struct Run {
    int code{-1};
    std::string out;
    std::string err;
};

Run run_cli(const TempDir& dir, const std::string& args) {
    const std::string out = dir.str("cli.out");
    const std::string err = dir.str("cli.err");
    const std::string command = std::string(EMREC_CLI_PATH) + " " + args + " >" + out + " 2>" + err;
    const int status = std::system(command.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(out);
    r.err = read_file(err);
    return r;
}

} // namespace

TEST(Commands, TrainReportsExampleCounts) {
    Workspace ws;
    ASSERT_EQ(ws.corpus.train.size(), 12u);
    std::ostringstream out;
    const auto report = cmd_train(ws.config, ws.train_gold(), out);
    EXPECT_EQ(report.positives, 12);
    EXPECT_EQ(report.negatives, 6);
    EXPECT_LT(report.negatives, report.positives);
    EXPECT_EQ(report.features.size(), 49u);
    EXPECT_FALSE(report.tuned);
    EXPECT_EQ(report.hyperparams, Hyperparams{});
    EXPECT_NE(out.str().find("positives: 12"), std::string::npos);

    const auto saved = nlohmann::json::parse(read_file(report.report_path));
    EXPECT_EQ(saved.at("positives"), 12);
    EXPECT_EQ(saved.at("feature_count"), 49);
    const auto model = gbdt_from_json(nlohmann::json::parse(read_file(ws.config.model_path)));
    EXPECT_EQ(model.feature_names.size(), 49u);
    EXPECT_NO_THROW(name_model_from_json(nlohmann::json::parse(read_file(ws.config.name_model_path))));
}

TEST(Commands, TrainWithoutConfidenceUsesFortyEightFeatures) {
    Workspace ws;
    ws.config.use_confidence = false;
    std::ostringstream out;
    const auto report = cmd_train(ws.config, ws.train_gold(), out);
    EXPECT_EQ(report.features.size(), 48u);
    const auto model = gbdt_from_json(nlohmann::json::parse(read_file(ws.config.model_path)));
    ASSERT_EQ(model.feature_names.size(), 48u);
    EXPECT_EQ(std::count(model.feature_names.begin(), model.feature_names.end(), std::string(kConfidenceFeature)), 0);
}

TEST(Commands, TrainingIsByteIdentical) {
    Workspace ws;
    ws.config.tune_trials = 2;
    std::ostringstream out;
    const auto report = cmd_train(ws.config, ws.train_gold(), out);
    EXPECT_TRUE(report.tuned);
    const std::string first = read_file(ws.config.model_path);
    const std::string first_names = read_file(ws.config.name_model_path);
    Config again = ws.config;
    again.model_path = ws.dir.str("out2/model.json");
    again.name_model_path = ws.dir.str("out2/name_model.json");
    (void)cmd_train(again, ws.train_gold(), out);
    EXPECT_EQ(read_file(again.model_path), first);
    EXPECT_EQ(read_file(again.name_model_path), first_names);
    EXPECT_EQ(read_file(report_path_for(again.model_path)), read_file(report.report_path));
}

TEST(Commands, RecommendHonoursTopAndFixedConfidence) {
    Workspace ws;
    std::ostringstream sink;
    (void)cmd_train(ws.config, ws.train_gold(), sink);
    const auto [file, method] = ws.test_method();
    Config c = ws.config;
    c.k = 1;
    c.threshold = 0.0;
    c.name_provider = "fixed:0.5";
    std::ostringstream out;
    const auto recs = cmd_recommend(c, file, method, out);
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].confidence, 0.5);
    EXPECT_NE(out.str().find("Rank"), std::string::npos);

    std::ostringstream json;
    (void)cmd_recommend(c, file, method, json, true);
    const auto arr = nlohmann::json::parse(json.str());
    ASSERT_EQ(arr.size(), 1u);
    EXPECT_EQ(arr[0].at("rank"), 1);
    EXPECT_EQ(arr[0].at("confidence"), 0.5);

    EXPECT_THROW(cmd_recommend(c, file, "noSuchMethod", out), DataError);
    EXPECT_THROW(cmd_recommend(c, "Missing.java", method, out), DataError);
}

TEST(Commands, EvaluateWithZeroToleranceShowsOneColumn) {
    Workspace ws;
    std::ostringstream sink;
    (void)cmd_train(ws.config, ws.train_gold(), sink);
    Config c = ws.config;
    c.tolerances = {0.0};
    std::ostringstream out;
    const auto result = cmd_evaluate(c, ws.test_gold(), out);
    ASSERT_EQ(result.metrics.size(), 1u);
    EXPECT_NE(out.str().find("None"), std::string::npos);
    EXPECT_EQ(out.str().find("1%"), std::string::npos);
    EXPECT_EQ(result.metrics[0].gold_count, static_cast<int>(ws.corpus.test.size()));
}

TEST(Commands, MissingModelIsAModelError) {
    Workspace ws;
    std::ostringstream out;
    EXPECT_THROW(cmd_recommend(ws.config, ws.test_method().first, ws.test_method().second, out), ModelError);
    EXPECT_THROW(cmd_importance(ws.config, false, out), ModelError);
}

TEST(Commands, ConfigFileAndValidation) {
    TempDir dir;
    dir.write("c.json", R"({"k": 3, "tolerance": 0.02, "name_provider": "fixed:0.3", "seed": 9})");
    const auto c = load_config(dir.str("c.json"));
    EXPECT_EQ(c.k, 3);
    EXPECT_EQ(c.tolerances, std::vector<double>{0.02});
    EXPECT_EQ(c.seed, 9u);
    dir.write("bad.json", R"({"k": "three"})");
    EXPECT_THROW(load_config(dir.str("bad.json")), DataError);
    EXPECT_THROW(load_config(dir.str("none.json")), DataError);

    Config v;
    v.threshold = 1.0;
    EXPECT_THROW(v.validate(), ContractError);
    v = Config{};
    v.folds = 1;
    EXPECT_THROW(v.validate(), ContractError);
    v = Config{};
    v.name_provider = "magic";
    EXPECT_THROW(make_provider(v, nullptr), ContractError);
    v.name_provider = "builtin";
    EXPECT_THROW(make_provider(v, nullptr), ModelError);
}

TEST(Commands, FailedWriteLeavesNoPartialOutputs) {
    TempDir dir;
    dir.write("blocker", "a file where a directory is needed");
    EXPECT_ANY_THROW(write_files_atomically({{dir.str("first.json"), "{}"}, {dir.str("blocker/second.json"), "{}"}}));
    EXPECT_FALSE(std::filesystem::exists(dir.str("first.json")));
    EXPECT_FALSE(std::filesystem::exists(dir.str("first.json.tmp")));

    write_files_atomically({{dir.str("a/x.json"), "1"}, {dir.str("b/y.json"), "2"}});
    EXPECT_EQ(read_file(dir.str("a/x.json")), "1");
    EXPECT_EQ(read_file(dir.str("b/y.json")), "2");
}

TEST(Cli, ExitCodes) {
    Workspace ws;
    const std::string common = "--src-root " + ws.config.src_root + " --model " + ws.config.model_path
        + " --name-model " + ws.config.name_model_path + " --seed 5";
    const auto [file, method] = ws.test_method();

    EXPECT_EQ(run_cli(ws.dir, "").code, 1);
    EXPECT_EQ(run_cli(ws.dir, "train --bogus").code, 1);
    EXPECT_EQ(run_cli(ws.dir, common + " train").code, 1);
    EXPECT_EQ(run_cli(ws.dir, common + " --top 0 recommend " + file + " " + method).code, 1);

    const auto missing_model = run_cli(ws.dir, common + " recommend " + file + " " + method);
    EXPECT_EQ(missing_model.code, 3);
    EXPECT_NE(missing_model.err.find("model"), std::string::npos);

    ws.dir.write("bad.jsonl", "{oops\n");
    EXPECT_EQ(run_cli(ws.dir, common + " --dataset " + ws.dir.str("bad.jsonl") + " train").code, 2);
    EXPECT_EQ(run_cli(ws.dir, "--src-root /nonexistent --model " + ws.config.model_path + " --dataset " + ws.train_gold()
                                  + " train").code,
              2);

    const auto trained = run_cli(ws.dir, common + " --dataset " + ws.train_gold() + " train");
    ASSERT_EQ(trained.code, 0) << trained.err;
    EXPECT_NE(trained.out.find("positives: 12"), std::string::npos);

    const auto rec = run_cli(ws.dir, common + " --top 1 --threshold 0 --name-provider fixed:0.5 recommend " + file + " "
                                         + method + " --json");
    ASSERT_EQ(rec.code, 0) << rec.err;
    EXPECT_EQ(nlohmann::json::parse(rec.out).size(), 1u);

    const auto eval = run_cli(ws.dir, common + " --tolerance 0 --dataset " + ws.test_gold() + " evaluate");
    ASSERT_EQ(eval.code, 0) << eval.err;
    EXPECT_NE(eval.out.find("None"), std::string::npos);
    EXPECT_EQ(eval.out.find("3%"), std::string::npos);

    const auto imp = run_cli(ws.dir, common + " importance");
    ASSERT_EQ(imp.code, 0) << imp.err;
    EXPECT_NE(imp.out.find("Rank"), std::string::npos);

    const auto stats = run_cli(ws.dir, common + " --dataset " + ws.train_gold() + " confidence-stats");
    ASSERT_EQ(stats.code, 0) << stats.err;
    EXPECT_NE(stats.out.find("Median"), std::string::npos);

    ws.dir.write(file + ".broken.java", "class {");
    EXPECT_EQ(run_cli(ws.dir, common + " recommend " + ws.dir.str(file + ".broken.java") + " x").code, 2);
}

TEST(Cli, RemoteProviderMatchesFixedAndFallsBack) {
    Workspace ws;
    std::ostringstream sink;
    (void)cmd_train(ws.config, ws.train_gold(), sink);
    const std::string common = "--src-root " + ws.config.src_root + " --model " + ws.config.model_path
        + " --name-model " + ws.config.name_model_path + " --threshold 0";
    const auto [file, method] = ws.test_method();
    const std::string target = " recommend " + file + " " + method;

    StubServer stub;
    const auto remote = run_cli(ws.dir, common + " --name-provider remote:" + stub.url() + target);
    const auto fixed = run_cli(ws.dir, common + " --name-provider fixed:0.42" + target);
    ASSERT_EQ(remote.code, 0) << remote.err;
    ASSERT_EQ(fixed.code, 0) << fixed.err;
    // Same ranking, lines, probabilities and confidences; only the name column differs.
    auto strip_names = [](const std::string& json_text) {
        auto arr = nlohmann::json::parse(json_text);
        for (auto& r : arr) r.erase("predicted_name");
        return arr;
    };
    const auto remote_json = run_cli(ws.dir, common + " --name-provider remote:" + stub.url() + target + " --json");
    const auto fixed_json = run_cli(ws.dir, common + " --name-provider fixed:0.42" + target + " --json");
    EXPECT_EQ(strip_names(remote_json.out), strip_names(fixed_json.out));
    EXPECT_FALSE(nlohmann::json::parse(remote_json.out).empty());

    stub.set({500, "{}", 0.42, 0});
    const auto failed = run_cli(ws.dir, common + " --name-provider remote:" + stub.url() + target);
    EXPECT_EQ(failed.code, 3);
    const auto fell_back = run_cli(ws.dir, common + " --fallback --name-provider remote:" + stub.url() + target);
    EXPECT_EQ(fell_back.code, 0) << fell_back.err;
    EXPECT_NE(fell_back.out.find("(fallback)"), std::string::npos);
}
