#include "emrec/java_parser.hpp"
#include "emrec/recommender.hpp"
#include "emrec/remote_naming.hpp"
#include "oracles.hpp"
#include "stub_server.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

using namespace emrec;
using namespace std::chrono_literals;

using emrec::testing::StubServer;

namespace {

SyntheticMethod sample_method() {
    SyntheticMethod m;
    m.source = "void __candidate__() {\n    log(1);\n}\n";
    return m;
}

} // namespace

TEST(RemoteNaming, EndpointParsing) {
    EXPECT_EQ(parse_endpoint("http://localhost:9000").path, "/v1/predict");
    EXPECT_EQ(parse_endpoint("http://localhost:9000/").base, "http://localhost:9000");
    EXPECT_EQ(parse_endpoint("http://h:1/custom/path").path, "/custom/path");
    EXPECT_THROW(parse_endpoint("https://h:1"), ContractError);
    EXPECT_THROW(parse_endpoint("localhost:9000"), ContractError);
}

TEST(RemoteNaming, ResponseValidation) {
    EXPECT_EQ(parse_prediction_response(R"({"predictions": []})").size(), 0u);
    const auto two = parse_prediction_response(
        R"({"predictions": [{"name": ["a"], "confidence": 0.9}, {"name": ["b", "c"], "confidence": 0.9}]})");
    ASSERT_EQ(two.size(), 2u);
    EXPECT_EQ(two[1].subtokens, (std::vector<std::string>{"b", "c"}));
    for (const char* bad : {"not json", "{}", R"({"predictions": {}})", R"({"predictions": [{"name": ["a"]}]})",
                            R"({"predictions": [{"name": [], "confidence": 0.5}]})",
                            R"({"predictions": [{"name": [1], "confidence": 0.5}]})",
                            R"({"predictions": [{"name": ["a"], "confidence": "high"}]})",
                            R"({"predictions": [{"name": ["a"], "confidence": 0}]})",
                            R"({"predictions": [{"name": ["a"], "confidence": 0.2}, {"name": ["b"], "confidence": 0.3}]})"}) {
        EXPECT_THROW(parse_prediction_response(bad), ProtocolError) << bad;
    }
}

TEST(RemoteNaming, EchoedConfidenceIsReturned) {
    StubServer stub;
    const auto preds = remote_predict(stub.url(), sample_method(), 2000ms);
    ASSERT_EQ(preds.size(), 1u);
    EXPECT_DOUBLE_EQ(preds[0].confidence, 0.42);
    EXPECT_EQ(preds[0].subtokens, (std::vector<std::string>{"echo", "name"}));
}

TEST(RemoteNaming, RequestCarriesSourceAndK) {
    StubServer stub;
    (void)remote_predict(stub.url(), sample_method(), 2000ms, 3);
    const auto requests = stub.requests();
    ASSERT_EQ(requests.size(), 1u);
    const auto body = nlohmann::json::parse(requests[0]);
    EXPECT_EQ(body.at("method_source"), sample_method().source);
    EXPECT_EQ(body.at("k"), 3);
    EXPECT_EQ(body.size(), 2u);
}

TEST(RemoteNaming, OutOfRangeConfidenceIsAProtocolError) {
    StubServer stub;
    stub.set({200, "", 1.7, 0});
    EXPECT_THROW(remote_predict(stub.url(), sample_method(), 2000ms), ProtocolError);
}

TEST(RemoteNaming, StatusCodes) {
    StubServer stub;
    stub.set({500, "{}", 0.42, 0});
    EXPECT_THROW(remote_predict(stub.url(), sample_method(), 2000ms), ProtocolError);
    stub.set({422, "{}", 0.42, 0});
    EXPECT_TRUE(remote_predict(stub.url(), sample_method(), 2000ms).empty());
    stub.set({404, "{}", 0.42, 0});
    EXPECT_THROW(remote_predict(stub.url(), sample_method(), 2000ms), ProtocolError);
}

TEST(RemoteNaming, RejectedSourceGivesZeroConfidence) {
    StubServer stub;
    stub.set({422, "{}", 0.42, 0});
    const RemoteNameProvider provider(stub.url(), 2000ms);
    const auto unit = parse_source(emrec::testing::kAccountSource);
    const auto& m = unit.methods[0];
    const auto c = candidate_name(provider, m, make_fragment(m, {}, 1, 2));
    EXPECT_EQ(c.confidence, 0.0);
    EXPECT_FALSE(c.top.has_value());
}

TEST(RemoteNaming, UnreachableWithoutFallbackSurfaces) {
    const RemoteNameProvider provider(emrec::testing::closed_port_url(), 500ms);
    EXPECT_THROW((void)provider.predict(sample_method(), 1), ProtocolError);
}

TEST(RemoteNaming, UnreachableWithFallbackIsFlagged) {
    const auto fallback = std::make_shared<const FixedNameProvider>(0.25);
    const RemoteNameProvider provider(emrec::testing::closed_port_url(), 500ms, fallback);
    const auto r = provider.predict(sample_method(), 1);
    EXPECT_TRUE(r.fallback);
    ASSERT_EQ(r.predictions.size(), 1u);
    EXPECT_EQ(r.predictions[0].confidence, 0.25);
}

TEST(RemoteNaming, ServerErrorFallsBackWhenEnabled) {
    StubServer stub;
    stub.set({500, "{}", 0.42, 0});
    const RemoteNameProvider strict(stub.url(), 2000ms);
    EXPECT_THROW((void)strict.predict(sample_method(), 1), ProtocolError);
    const RemoteNameProvider lenient(stub.url(), 2000ms, std::make_shared<const FixedNameProvider>(0.9));
    const auto r = lenient.predict(sample_method(), 1);
    EXPECT_TRUE(r.fallback);
    EXPECT_EQ(r.predictions.at(0).confidence, 0.9);
}

TEST(RemoteNaming, SlowServerTimesOut) {
    StubServer stub;
    stub.set({200, "", 0.42, 600});
    const auto start = std::chrono::steady_clock::now();
    EXPECT_THROW(remote_predict(stub.url(), sample_method(), 150ms), ProtocolError);
    EXPECT_LT(std::chrono::steady_clock::now() - start, 550ms);
}

TEST(RemoteNaming, RemoteEchoRanksLikeFixedProvider) {
    StubServer stub;
    const RemoteNameProvider remote(stub.url(), 2000ms);
    const FixedNameProvider fixed(0.42);
    const auto unit = parse_source(emrec::testing::kCandidateSource);
    const GbdtModel model = emrec::testing::confidence_stump();
    for (const auto& m : unit.methods) {
        const auto a = recommend(m, model, remote, 5, 0.5, 1);
        const auto b = recommend(m, model, fixed, 5, 0.5, 1);
        ASSERT_EQ(a.size(), b.size()) << m.name;
        for (std::size_t i = 0; i < a.size(); ++i) {
            EXPECT_EQ(a[i].fragment, b[i].fragment);
            EXPECT_EQ(a[i].probability, b[i].probability);
            EXPECT_EQ(a[i].confidence, 0.42);
        }
    }
    EXPECT_EQ(remote.describe(), "remote:" + stub.url());
}
