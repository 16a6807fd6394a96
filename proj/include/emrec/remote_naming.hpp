#pragma once

// Client side of the name-prediction wire protocol:
//   POST /v1/predict  {"method_source": "<text>", "k": <int>}
//   200 -> {"predictions": [{"name": ["<subtoken>", ...], "confidence": <float>}]}
//   422 -> source rejected by the service (no prediction)
//   anything else -> error

#include "emrec/error.hpp"
#include "emrec/name_provider.hpp"
#include "emrec/naming.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace emrec {

struct Endpoint {
    std::string base;  ///< scheme://host:port
    std::string path;
};

inline Endpoint parse_endpoint(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos || url.substr(0, scheme) != "http") {
        throw ContractError("endpoint must be an http:// URL: " + url);
    }
    const auto slash = url.find('/', scheme + 3);
    Endpoint e;
    e.base = url.substr(0, slash);
    e.path = slash == std::string::npos ? "" : url.substr(slash);
    if (e.path.empty() || e.path == "/") e.path = "/v1/predict";
    if (e.base.size() <= scheme + 3) throw ContractError("endpoint has no host: " + url);
    return e;
}

/// Validates a 200 response body against the protocol.
inline std::vector<NamePrediction> parse_prediction_response(const std::string& body) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(std::string("response is not JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("predictions") || !doc["predictions"].is_array()) {
        throw ProtocolError("response lacks a predictions array");
    }
    std::vector<NamePrediction> out;
    for (const auto& p : doc["predictions"]) {
        if (!p.is_object() || !p.contains("name") || !p.contains("confidence")) {
            throw ProtocolError("prediction lacks name or confidence");
        }
        const auto& name = p["name"];
        const auto& conf = p["confidence"];
        if (!name.is_array() || name.empty()) throw ProtocolError("prediction name must be a non-empty array");
        if (!conf.is_number()) throw ProtocolError("prediction confidence must be a number");
        NamePrediction pred;
        for (const auto& s : name) {
            if (!s.is_string()) throw ProtocolError("name subtokens must be strings");
            pred.subtokens.push_back(s.get<std::string>());
        }
        pred.confidence = conf.get<double>();
        if (!(pred.confidence > 0.0 && pred.confidence <= 1.0)) {
            throw ProtocolError("confidence " + std::to_string(pred.confidence) + " outside (0,1]");
        }
        if (!out.empty() && pred.confidence > out.back().confidence) {
            throw ProtocolError("predictions are not in descending confidence order");
        }
        out.push_back(std::move(pred));
    }
    return out;
}

/// One protocol round trip. Returns empty when the service rejects the source (422).
inline std::vector<NamePrediction> remote_predict(const std::string& endpoint, const SyntheticMethod& m,
                                                  std::chrono::milliseconds timeout, int k = 1) {
    const Endpoint e = parse_endpoint(endpoint);
    httplib::Client client(e.base);
    const auto secs = static_cast<time_t>(timeout.count() / 1000);
    const auto usecs = static_cast<time_t>((timeout.count() % 1000) * 1000);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    const nlohmann::json request = {{"method_source", m.source}, {"k", k}};
    auto res = client.Post(e.path, request.dump(), "application/json");
    if (!res) throw ProtocolError("name service unreachable at " + endpoint + ": " + httplib::to_string(res.error()));
    if (res->status == 422) return {};
    if (res->status != 200) throw ProtocolError("name service returned HTTP " + std::to_string(res->status));
    return parse_prediction_response(res->body);
}

class RemoteNameProvider final : public NameProvider {
public:
    RemoteNameProvider(std::string endpoint, std::chrono::milliseconds timeout,
                       std::shared_ptr<const NameProvider> fallback = nullptr)
        : endpoint_(std::move(endpoint)), timeout_(timeout), fallback_(std::move(fallback)) {
        parse_endpoint(endpoint_);
    }

    [[nodiscard]] NameResult predict(const SyntheticMethod& method, int k) const override {
        try {
            return NameResult{remote_predict(endpoint_, method, timeout_, k), false};
        } catch (const ProtocolError&) {
            if (!fallback_) throw;
            NameResult r = fallback_->predict(method, k);
            r.fallback = true;
            return r;
        }
    }

    [[nodiscard]] std::string describe() const override { return "remote:" + endpoint_; }

private:
    std::string endpoint_;
    std::chrono::milliseconds timeout_;
    std::shared_ptr<const NameProvider> fallback_;
};

} // namespace emrec
