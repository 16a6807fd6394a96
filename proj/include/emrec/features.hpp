#pragma once

/**
 * @file features.hpp
 * @brief The 49 classifier features of a (method, fragment) pair.
 *
 * 28 structural features compare the fragment with the remaining code, 20
 * functional features measure how much the fragment concentrates the usage
 * of individual program elements, and the last feature is the confidence of
 * the name predicted for the fragment.
 */

#include "emrec/candidates.hpp"
#include "emrec/error.hpp"
#include "emrec/java_model.hpp"

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace emrec {

inline constexpr std::string_view kFeatureSchemaVersion = "emrec-features-1";

inline constexpr std::size_t kStructuralCount = 28;
inline constexpr std::size_t kFunctionalCount = 20;
inline constexpr std::size_t kFeatureCount = 49;

inline constexpr std::array<std::string_view, kStructuralCount> kStructuralNames = {
    "LOC_EXTRACTED_METHOD", "CON_LOC",
    "NUM_LOCAL",            "CON_LOCAL",
    "NUM_LITERAL",          "CON_LITERAL",
    "NUM_INVOCATION",       "CON_INVOCATION",
    "NUM_IF",               "CON_IF",
    "NUM_CONDITIONAL",      "CON_CONDITIONAL",
    "NUM_SWITCH",           "CON_SWITCH",
    "NUM_VAR_AC",           "CON_VAR_ACC",
    "NUM_TYPE_AC",          "CON_TYPE_ACC",
    "NUM_FIELD_AC",         "CON_FIELD_ACC",
    "NUM_ASSIGN",           "CON_ASSIGN",
    "NUM_TYPED_ELE",        "CON_TYPED_ELE",
    "NUM_PACKAGE",          "CON_PACKAGE",
    "CON_ASSERT",           "RATIO_LOC",
};

inline constexpr std::array<std::string_view, kFunctionalCount> kFunctionalNames = {
    "RATIO_VARIABLE_ACCESS",  "VARAC_COHESION",
    "RATIO_VARIABLE_ACCESS2", "VARAC_COHESION2",
    "RATIO_FIELD_ACCESS",     "FIELD_COHESION",
    "RATIO_FIELD_ACCESS2",    "FIELD_COHESION2",
    "RATIO_INVOCATION",       "INVOCATION_COHESION",
    "RATIO_TYPE_ACCESS",      "TYPEAC_COHESION",
    "RATIO_TYPE_ACCESS2",     "TYPEAC_COHESION2",
    "RATIO_TYPED_ELE",        "TYPEDELE_COHESION",
    "RATIO_PACKAGE",          "PACKAGE_COHESION",
    "RATIO_PACKAGE2",         "PACKAGE_COHESION2",
};

inline constexpr std::string_view kConfidenceFeature = "CODE2SEQ_CONFIDENCE";

/// The fixed, versioned feature order: Table-I rows, Table-II rows, confidence.
inline const std::vector<std::string>& feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (auto n : kStructuralNames) v.emplace_back(n);
        for (auto n : kFunctionalNames) v.emplace_back(n);
        v.emplace_back(kConfidenceFeature);
        return v;
    }();
    return names;
}

inline std::optional<std::size_t> feature_index(std::string_view name) {
    const auto& names = feature_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return i;
    }
    return std::nullopt;
}

using NamedValues = std::vector<std::pair<std::string, double>>;

class FeatureVector {
public:
    FeatureVector() { values_.fill(0.0); }

    [[nodiscard]] double operator[](std::size_t i) const { return values_.at(i); }
    double& operator[](std::size_t i) { return values_.at(i); }

    [[nodiscard]] double get(std::string_view name) const {
        const auto i = feature_index(name);
        if (!i) throw ContractError("unknown feature " + std::string(name));
        return values_[*i];
    }

    void set(std::string_view name, double value) {
        const auto i = feature_index(name);
        if (!i) throw ContractError("unknown feature " + std::string(name));
        values_[*i] = value;
    }

    [[nodiscard]] const std::array<double, kFeatureCount>& values() const noexcept { return values_; }

    [[nodiscard]] NamedValues named() const {
        NamedValues out;
        for (std::size_t i = 0; i < kFeatureCount; ++i) out.emplace_back(feature_names()[i], values_[i]);
        return out;
    }

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

private:
    std::array<double, kFeatureCount> values_{};
};

namespace detail {

struct StatementTotals {
    std::set<int> lines;
    int locals{0};
    int literals{0};
    int invocations{0};
    int ifs{0};
    int conditionals{0};
    int switches{0};
    int asserts{0};
    int assignments{0};
    std::array<std::set<std::string>, kElementKindCount> distinct;

    explicit StatementTotals(const std::vector<const Statement*>& statements) {
        for (const Statement* s : statements) {
            lines.insert(s->own_lines.begin(), s->own_lines.end());
            locals += static_cast<int>(s->declared.size());
            literals += s->literals;
            invocations += s->invocations;
            conditionals += s->conditionals;
            assignments += s->assignments;
            ifs += s->kind == StatementKind::If;
            switches += s->kind == StatementKind::Switch;
            asserts += s->kind == StatementKind::Assert;
            for (const auto& r : s->refs) distinct[static_cast<std::size_t>(r.kind)].insert(r.id);
        }
    }

    [[nodiscard]] double count(ElementKind k) const {
        return static_cast<double>(distinct[static_cast<std::size_t>(k)].size());
    }
};

} // namespace detail

/// Table-I metrics: NUM_* over the fragment, CON_* over the remaining code.
inline NamedValues structural_features(const MethodModel& method, const Fragment& fragment) {
    const detail::StatementTotals frag(fragment_statements(method, fragment));
    const detail::StatementTotals rest(remaining_statements(method, fragment));
    const double frag_loc = static_cast<double>(frag.lines.size());

    NamedValues out;
    out.reserve(kStructuralCount);
    auto pair = [&](std::string_view num, std::string_view con, double a, double b) {
        out.emplace_back(std::string(num), a);
        out.emplace_back(std::string(con), b);
    };
    pair("LOC_EXTRACTED_METHOD", "CON_LOC", frag_loc, static_cast<double>(rest.lines.size()));
    pair("NUM_LOCAL", "CON_LOCAL", frag.locals, rest.locals);
    pair("NUM_LITERAL", "CON_LITERAL", frag.literals, rest.literals);
    pair("NUM_INVOCATION", "CON_INVOCATION", frag.invocations, rest.invocations);
    pair("NUM_IF", "CON_IF", frag.ifs, rest.ifs);
    pair("NUM_CONDITIONAL", "CON_CONDITIONAL", frag.conditionals, rest.conditionals);
    pair("NUM_SWITCH", "CON_SWITCH", frag.switches, rest.switches);
    pair("NUM_VAR_AC", "CON_VAR_ACC", frag.count(ElementKind::LocalVariable), rest.count(ElementKind::LocalVariable));
    pair("NUM_TYPE_AC", "CON_TYPE_ACC", frag.count(ElementKind::Type), rest.count(ElementKind::Type));
    pair("NUM_FIELD_AC", "CON_FIELD_ACC", frag.count(ElementKind::Field), rest.count(ElementKind::Field));
    pair("NUM_ASSIGN", "CON_ASSIGN", frag.assignments, rest.assignments);
    pair("NUM_TYPED_ELE", "CON_TYPED_ELE", frag.count(ElementKind::TypedElement), rest.count(ElementKind::TypedElement));
    pair("NUM_PACKAGE", "CON_PACKAGE", frag.count(ElementKind::Package), rest.count(ElementKind::Package));
    out.emplace_back("CON_ASSERT", frag.asserts);
    out.emplace_back("RATIO_LOC", frag_loc / static_cast<double>(method.loc));
    return out;
}

/// Usage of one element, counted over reference occurrences.
struct ElementUsage {
    std::string id;
    int in_fragment{0};
    int in_method{0};
    std::set<int> fragment_lines;

    [[nodiscard]] double ratio() const {
        return in_method == 0 ? 0.0 : static_cast<double>(in_fragment) / static_cast<double>(in_method);
    }
};

/// Elements of one kind ranked by fragment-to-method usage ratio, then by
/// method usage (descending), then by id.
inline std::vector<ElementUsage> rank_elements(const MethodModel& method, const Fragment& fragment, ElementKind kind) {
    std::map<std::string, ElementUsage> usage;
    for (const Statement* s : method_statements(method)) {
        for (const auto& r : s->refs) {
            if (r.kind != kind) continue;
            auto& u = usage[r.id];
            u.id = r.id;
            ++u.in_method;
        }
    }
    for (const Statement* s : fragment_statements(method, fragment)) {
        for (const auto& r : s->refs) {
            if (r.kind != kind) continue;
            auto& u = usage[r.id];
            ++u.in_fragment;
            u.fragment_lines.insert(r.line);
        }
    }
    std::vector<ElementUsage> ranked;
    for (auto& [id, u] : usage) ranked.push_back(std::move(u));
    std::stable_sort(ranked.begin(), ranked.end(), [](const ElementUsage& a, const ElementUsage& b) {
        const double ra = a.ratio();
        const double rb = b.ratio();
        if (ra != rb) return ra > rb;
        if (a.in_method != b.in_method) return a.in_method > b.in_method;
        return a.id < b.id;
    });
    return ranked;
}

/// Table-II metrics. Absent ranks (kind unused, or a single element) are 0.
inline NamedValues functional_features(const MethodModel& method, const Fragment& fragment) {
    const double frag_loc = static_cast<double>(fragment.loc > 0 ? fragment.loc : 1);
    NamedValues out;
    out.reserve(kFunctionalCount);

    auto emit = [&](ElementKind kind, std::string_view ratio1, std::string_view cohesion1,
                    std::string_view ratio2, std::string_view cohesion2) {
        const auto ranked = rank_elements(method, fragment, kind);
        auto add_rank = [&](std::size_t rank, std::string_view ratio_name, std::string_view cohesion_name) {
            double ratio = 0.0;
            double cohesion = 0.0;
            if (rank < ranked.size()) {
                ratio = ranked[rank].ratio();
                cohesion = static_cast<double>(ranked[rank].fragment_lines.size()) / frag_loc;
            }
            out.emplace_back(std::string(ratio_name), ratio);
            out.emplace_back(std::string(cohesion_name), cohesion);
        };
        add_rank(0, ratio1, cohesion1);
        if (!ratio2.empty()) add_rank(1, ratio2, cohesion2);
    };

    emit(ElementKind::LocalVariable, "RATIO_VARIABLE_ACCESS", "VARAC_COHESION", "RATIO_VARIABLE_ACCESS2", "VARAC_COHESION2");
    emit(ElementKind::Field, "RATIO_FIELD_ACCESS", "FIELD_COHESION", "RATIO_FIELD_ACCESS2", "FIELD_COHESION2");
    emit(ElementKind::Method, "RATIO_INVOCATION", "INVOCATION_COHESION", "", "");
    emit(ElementKind::Type, "RATIO_TYPE_ACCESS", "TYPEAC_COHESION", "RATIO_TYPE_ACCESS2", "TYPEAC_COHESION2");
    emit(ElementKind::TypedElement, "RATIO_TYPED_ELE", "TYPEDELE_COHESION", "", "");
    emit(ElementKind::Package, "RATIO_PACKAGE", "PACKAGE_COHESION", "RATIO_PACKAGE2", "PACKAGE_COHESION2");
    return out;
}

/// Places the 48 metric values and the confidence into the fixed order.
/// Throws ContractError on a missing, unknown or duplicated name.
inline FeatureVector assemble_vector(const NamedValues& structural, const NamedValues& functional, double confidence) {
    if (!(confidence >= 0.0 && confidence <= 1.0)) throw ContractError("confidence outside [0,1]");
    FeatureVector v;
    std::array<bool, kFeatureCount> seen{};
    auto place = [&](const NamedValues& values) {
        for (const auto& [name, value] : values) {
            const auto i = feature_index(name);
            if (!i || name == kConfidenceFeature) throw ContractError("unexpected feature " + name);
            if (seen[*i]) throw ContractError("duplicate feature " + name);
            seen[*i] = true;
            v[*i] = value;
        }
    };
    place(structural);
    place(functional);
    const std::size_t conf = *feature_index(kConfidenceFeature);
    v[conf] = confidence;
    seen[conf] = true;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        if (!seen[i]) throw ContractError("missing feature " + feature_names()[i]);
    }
    return v;
}

inline FeatureVector compute_features(const MethodModel& method, const Fragment& fragment, double confidence) {
    return assemble_vector(structural_features(method, fragment), functional_features(method, fragment), confidence);
}

} // namespace emrec
