#pragma once

#include "emrec/candidates.hpp"
#include "emrec/error.hpp"
#include "emrec/features.hpp"
#include "emrec/gbdt.hpp"
#include "emrec/java_model.hpp"
#include "emrec/name_provider.hpp"

#include <algorithm>
#include <optional>
#include <vector>

namespace emrec {

struct Recommendation {
    Fragment fragment;
    double probability{0.0};
    std::optional<NamePrediction> predicted_name;
    double confidence{0.0};
    bool fallback{false};
    int rank{0};
};

/// Candidate with its feature vector, as scored by the recommender.
struct ScoredCandidate {
    Fragment fragment;
    FeatureVector features;
    CandidateName name;
    double probability{0.0};
};

/// Every candidate of the method with features and probability, in enumeration order.
inline std::vector<ScoredCandidate> score_candidates(const MethodModel& method, const GbdtModel& model,
                                                     const NameProvider& provider,
                                                     int min_statements = kDefaultMinStatements) {
    std::vector<ScoredCandidate> out;
    for (auto& f : enumerate_candidates(method, min_statements)) {
        ScoredCandidate c;
        c.name = candidate_name(provider, method, f);
        c.features = compute_features(method, f, c.name.confidence);
        c.probability = predict_proba(model, c.features);
        c.fragment = std::move(f);
        out.push_back(std::move(c));
    }
    return out;
}

/// Top-k candidates with probability above the threshold, most probable first.
/// Equal probabilities keep enumeration order. Overlapping candidates are kept.
inline std::vector<Recommendation> recommend(const MethodModel& method, const GbdtModel& model,
                                             const NameProvider& provider, int k = 5, double threshold = 0.5,
                                             int min_statements = kDefaultMinStatements) {
    if (k < 1) throw ContractError("k must be at least 1");
    if (!(threshold >= 0.0 && threshold < 1.0)) throw ContractError("threshold must lie in [0,1)");
    auto scored = score_candidates(method, model, provider, min_statements);
    std::stable_sort(scored.begin(), scored.end(),
                     [](const ScoredCandidate& a, const ScoredCandidate& b) { return a.probability > b.probability; });
    std::vector<Recommendation> out;
    for (auto& c : scored) {
        if (static_cast<int>(out.size()) == k) break;
        if (!(c.probability > threshold)) break;
        Recommendation r;
        r.fragment = std::move(c.fragment);
        r.probability = c.probability;
        r.predicted_name = std::move(c.name.top);
        r.confidence = c.name.confidence;
        r.fallback = c.name.fallback;
        r.rank = static_cast<int>(out.size()) + 1;
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace emrec
