#pragma once

#include "emrec/candidates.hpp"
#include "emrec/error.hpp"
#include "emrec/java_model.hpp"
#include "emrec/naming.hpp"

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace emrec {

struct NameResult {
    std::vector<NamePrediction> predictions;  ///< descending confidence; may be empty
    bool fallback{false};                     ///< produced by the fallback provider
};

/// Source of method-name predictions for wrapped fragments.
class NameProvider {
public:
    virtual ~NameProvider() = default;
    [[nodiscard]] virtual NameResult predict(const SyntheticMethod& method, int k) const = 0;
    [[nodiscard]] virtual std::string describe() const = 0;
};

class BuiltinNameProvider final : public NameProvider {
public:
    explicit BuiltinNameProvider(std::shared_ptr<const NameModel> model) : model_(std::move(model)) {
        if (!model_) throw ContractError("builtin name provider needs a model");
    }

    [[nodiscard]] NameResult predict(const SyntheticMethod& method, int k) const override {
        return NameResult{predict_name(*model_, method, k), false};
    }

    [[nodiscard]] std::string describe() const override { return "builtin"; }

    [[nodiscard]] const NameModel& model() const { return *model_; }

private:
    std::shared_ptr<const NameModel> model_;
};

/// Every fragment gets the same confidence.
class FixedNameProvider final : public NameProvider {
public:
    explicit FixedNameProvider(double confidence) : confidence_(confidence) {
        if (!(confidence > 0.0 && confidence <= 1.0)) throw ContractError("fixed confidence must lie in (0,1]");
    }

    [[nodiscard]] NameResult predict(const SyntheticMethod&, int) const override {
        return NameResult{{NamePrediction{{std::string(kUnknownToken)}, confidence_}}, false};
    }

    [[nodiscard]] std::string describe() const override { return "fixed:" + std::to_string(confidence_); }

private:
    double confidence_;
};

/// Top-1 name and confidence of a candidate, as it enters the feature vector.
struct CandidateName {
    std::optional<NamePrediction> top;
    double confidence{0.0};
    bool fallback{false};
};

/// Wraps the fragment and asks the provider for its top-1 name. A fragment
/// that cannot be wrapped, or an empty prediction list, yields confidence 0.
/// Provider errors propagate.
inline CandidateName candidate_name(const NameProvider& provider, const MethodModel& method, const Fragment& fragment) {
    SyntheticMethod wrapped;
    try {
        wrapped = wrap_fragment(method, fragment);
    } catch (const ContractError&) {
        return {};
    }
    NameResult result = provider.predict(wrapped, 1);
    CandidateName out;
    out.fallback = result.fallback;
    if (!result.predictions.empty()) {
        out.top = std::move(result.predictions.front());
        out.confidence = out.top->confidence;
    }
    return out;
}

} // namespace emrec
