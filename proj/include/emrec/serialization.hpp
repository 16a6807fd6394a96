#pragma once

// JSON/CSV forms of feature vectors and the built-in name model.

#include "emrec/error.hpp"
#include "emrec/features.hpp"
#include "emrec/naming.hpp"

#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace emrec {

inline std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline std::string feature_csv_header() {
    std::string out;
    for (const auto& n : feature_names()) {
        if (!out.empty()) out += ',';
        out += n;
    }
    return out;
}

inline std::string to_csv_row(const FeatureVector& v) {
    std::string out;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        if (i > 0) out += ',';
        out += format_double(v[i]);
    }
    return out;
}

inline FeatureVector feature_vector_from_csv(const std::string& header, const std::string& row) {
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        return out;
    };
    const auto names = split(header);
    const auto cells = split(row);
    if (names.size() != cells.size()) throw DataError("feature CSV row and header differ in width");
    NamedValues named;
    for (std::size_t i = 0; i < names.size(); ++i) {
        try {
            named.emplace_back(names[i], std::stod(cells[i]));
        } catch (const std::exception&) {
            throw DataError("non-numeric feature value for " + names[i]);
        }
    }
    FeatureVector v;
    if (named.size() != kFeatureCount) throw DataError("feature CSV must have " + std::to_string(kFeatureCount) + " columns");
    for (const auto& [n, x] : named) {
        if (!feature_index(n)) throw DataError("unknown feature " + n);
        v.set(n, x);
    }
    return v;
}

inline nlohmann::json to_json(const FeatureVector& v) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [n, x] : v.named()) j[n] = x;
    return j;
}

inline FeatureVector feature_vector_from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.size() != kFeatureCount) throw DataError("feature object must have 49 entries");
    FeatureVector v;
    for (const auto& n : feature_names()) {
        if (!j.contains(n) || !j[n].is_number()) throw DataError("missing feature " + n);
        v.set(n, j[n].get<double>());
    }
    return v;
}

inline nlohmann::json to_json(const NameModel& m) {
    return {{"format", "emrec-name-model"},
            {"version", NameModel::kVersion},
            {"lambda", m.lambda},
            {"max_len", m.max_len},
            {"vocab", m.vocab},
            {"subtoken_prior", m.subtoken_prior},
            {"cooccurrence", m.cooccurrence}};
}

inline NameModel name_model_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != "emrec-name-model") throw ModelError("not a name model");
        if (j.at("version").get<int>() != NameModel::kVersion) throw ModelError("unsupported name model version");
        NameModel m;
        m.lambda = j.at("lambda").get<double>();
        m.max_len = j.at("max_len").get<int>();
        m.vocab = j.at("vocab").get<std::set<std::string>>();
        m.subtoken_prior = j.at("subtoken_prior").get<std::map<std::string, long long>>();
        m.cooccurrence = j.at("cooccurrence").get<std::map<std::string, std::map<std::string, long long>>>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("malformed name model: ") + e.what());
    }
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelError("cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(path + ": " + e.what());
    }
}

} // namespace emrec
