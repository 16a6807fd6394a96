#pragma once

/**
 * @file evaluation.hpp
 * @brief Tolerance-line matching, precision/recall/F-measure, and reports.
 */

#include "emrec/dataset.hpp"
#include "emrec/error.hpp"
#include "emrec/features.hpp"
#include "emrec/gbdt.hpp"
#include "emrec/recommender.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace emrec {

/// ceil(method_loc * tolerance). A 1e-9 slack keeps exact products such as
/// 100 * 0.01 from rounding up to the next line.
inline int tolerance_lines(int method_loc, double tolerance) {
    if (method_loc < 1) throw ContractError("method_loc must be positive");
    if (!(tolerance >= 0.0 && tolerance <= 1.0)) throw ContractError("tolerance must lie in [0,1]");
    return static_cast<int>(std::ceil(method_loc * tolerance - 1e-9));
}

struct LineSpan {
    int start_line{0};
    int end_line{0};
};

inline bool matches(const LineSpan& candidate, const LineSpan& gold, int t) {
    return std::abs(candidate.start_line - gold.start_line) <= t && std::abs(candidate.end_line - gold.end_line) <= t;
}

inline bool matches(const Fragment& candidate, const GoldExample& gold, int t) {
    return matches(LineSpan{candidate.start_line, candidate.end_line},
                   LineSpan{gold.fragment_start_line, gold.fragment_end_line}, t);
}

struct EvalMetrics {
    double precision{0.0};
    double recall{0.0};
    double f_measure{0.0};
    double tolerance{0.0};
    int recommended_count{0};
    int gold_count{0};
    int matched_gold_count{0};
    int correct_recommendation_count{0};
};

/// Recommendations (rank order) and gold spans of one method.
struct MethodOutcome {
    std::string key;
    int method_loc{1};
    std::vector<LineSpan> recommended;
    std::vector<LineSpan> gold;
};

/// Greedy one-to-one assignment in rank order: each recommendation takes the
/// first unmatched gold span it matches.
inline EvalMetrics score(const std::vector<MethodOutcome>& outcomes, double tolerance) {
    EvalMetrics m;
    m.tolerance = tolerance;
    for (const auto& o : outcomes) {
        const int t = tolerance_lines(o.method_loc, tolerance);
        std::vector<bool> taken(o.gold.size(), false);
        m.recommended_count += static_cast<int>(o.recommended.size());
        m.gold_count += static_cast<int>(o.gold.size());
        for (const auto& r : o.recommended) {
            for (std::size_t g = 0; g < o.gold.size(); ++g) {
                if (!taken[g] && matches(r, o.gold[g], t)) {
                    taken[g] = true;
                    ++m.correct_recommendation_count;
                    ++m.matched_gold_count;
                    break;
                }
            }
        }
    }
    m.precision = m.recommended_count == 0 ? 0.0 : static_cast<double>(m.correct_recommendation_count) / m.recommended_count;
    m.recall = m.gold_count == 0 ? 0.0 : static_cast<double>(m.matched_gold_count) / m.gold_count;
    m.f_measure = m.precision + m.recall == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

inline const std::vector<double>& default_tolerances() {
    static const std::vector<double> t{0.0, 0.01, 0.02, 0.03};
    return t;
}

struct EvalOptions {
    int k{5};
    double threshold{0.5};
    int min_statements{kDefaultMinStatements};
    std::vector<double> tolerances = default_tolerances();
};

struct EvalResult {
    std::vector<EvalMetrics> metrics;  ///< one per tolerance
    std::vector<MethodOutcome> outcomes;
    std::vector<std::string> warnings;
};

/// Recommends for every gold method (once per method) and scores at each tolerance.
inline EvalResult evaluate(const GbdtModel& model, const std::vector<GoldExample>& dataset, SourceCache& sources,
                           const NameProvider& provider, const EvalOptions& options = {}) {
    EvalResult result;
    std::map<std::tuple<std::string, std::string, int>, std::size_t> index;
    for (const auto& g : dataset) {
        const MethodModel& method = locate_method(sources.get(g.file), g);
        const Fragment f = gold_fragment(method, g);
        const auto report = check_extractable(method, f, options.min_statements);
        if (!report.extractable) {
            result.warnings.push_back(g.file + ":" + std::to_string(g.fragment_start_line) + "-"
                                      + std::to_string(g.fragment_end_line) + " is not a legal candidate");
        }
        const auto key = std::make_tuple(g.file, method.name, method.start_line);
        auto it = index.find(key);
        if (it == index.end()) {
            MethodOutcome o;
            o.key = g.file + "#" + method.id();
            o.method_loc = method.loc;
            for (const auto& r : recommend(method, model, provider, options.k, options.threshold, options.min_statements)) {
                o.recommended.push_back(LineSpan{r.fragment.start_line, r.fragment.end_line});
            }
            it = index.emplace(key, result.outcomes.size()).first;
            result.outcomes.push_back(std::move(o));
        }
        result.outcomes[it->second].gold.push_back(LineSpan{g.fragment_start_line, g.fragment_end_line});
    }
    for (double t : options.tolerances) result.metrics.push_back(score(result.outcomes, t));
    return result;
}

inline std::string tolerance_label(double t) {
    if (t == 0.0) return "None";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g%%", t * 100.0);
    return buf;
}

/// Metric rows by tolerance columns.
inline std::string metrics_table(const std::vector<EvalMetrics>& metrics) {
    std::ostringstream os;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-10s", "");
    os << buf;
    for (const auto& m : metrics) {
        std::snprintf(buf, sizeof buf, "%10s", tolerance_label(m.tolerance).c_str());
        os << buf;
    }
    os << '\n';
    const std::pair<const char*, double EvalMetrics::*> rows[] = {
        {"Precision", &EvalMetrics::precision}, {"Recall", &EvalMetrics::recall}, {"F-measure", &EvalMetrics::f_measure}};
    for (const auto& [label, field] : rows) {
        std::snprintf(buf, sizeof buf, "%-10s", label);
        os << buf;
        for (const auto& m : metrics) {
            std::snprintf(buf, sizeof buf, "%10.3f", m.*field);
            os << buf;
        }
        os << '\n';
    }
    return os.str();
}

inline nlohmann::json to_json(const EvalMetrics& m) {
    return {{"tolerance", m.tolerance},
            {"precision", m.precision},
            {"recall", m.recall},
            {"f_measure", m.f_measure},
            {"recommended_count", m.recommended_count},
            {"gold_count", m.gold_count},
            {"matched_gold_count", m.matched_gold_count},
            {"correct_recommendation_count", m.correct_recommendation_count}};
}

// ---------------------------------------------------------------------------
// Feature importance and confidence statistics

/// Features by descending importance; equal values keep the model's feature order.
inline std::vector<std::pair<std::string, double>> importance_report(const GbdtModel& model) {
    const auto imp = gini_importance(model);
    std::vector<std::pair<std::string, double>> rows;
    for (const auto& name : model.feature_names) rows.emplace_back(name, imp.at(name));
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return rows;
}

inline std::string importance_table(const std::vector<std::pair<std::string, double>>& rows, std::size_t limit) {
    std::ostringstream os;
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-6s%-24s%s\n", "Rank", "Feature", "Importance");
    os << buf;
    for (std::size_t i = 0; i < rows.size() && i < limit; ++i) {
        std::snprintf(buf, sizeof buf, "%-6zu%-24s%.5f\n", i + 1, rows[i].first.c_str(), rows[i].second);
        os << buf;
    }
    return os.str();
}

struct ConfidenceStats {
    double maximum{0.0};
    double minimum{0.0};
    double mean{0.0};
    double median{0.0};
    int count{0};
};

inline ConfidenceStats confidence_stats(std::vector<double> values) {
    if (values.empty()) throw DataError("no confidence values");
    std::sort(values.begin(), values.end());
    ConfidenceStats s;
    s.count = static_cast<int>(values.size());
    s.minimum = values.front();
    s.maximum = values.back();
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    const std::size_t mid = values.size() / 2;
    s.median = values.size() % 2 == 1 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
    return s;
}

struct ConfidenceComparison {
    ConfidenceStats positive;
    ConfidenceStats negative;
};

inline ConfidenceComparison confidence_comparison(const std::vector<LabeledExample>& examples) {
    std::vector<double> pos;
    std::vector<double> neg;
    for (const auto& e : examples) {
        (e.label == Label::Positive ? pos : neg).push_back(e.vector.get(kConfidenceFeature));
    }
    if (pos.empty() || neg.empty()) throw DataError("confidence comparison needs both positive and negative examples");
    return {confidence_stats(std::move(pos)), confidence_stats(std::move(neg))};
}

inline std::string confidence_table(const ConfidenceComparison& c) {
    std::ostringstream os;
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-10s%10s%10s%10s%10s\n", "", "Maximum", "Minimum", "Mean", "Median");
    os << buf;
    for (const auto& [label, s] : {std::pair{"Positive", c.positive}, std::pair{"Negative", c.negative}}) {
        std::snprintf(buf, sizeof buf, "%-10s%10.5f%10.5f%10.5f%10.5f\n", label, s.maximum, s.minimum, s.mean, s.median);
        os << buf;
    }
    return os.str();
}

} // namespace emrec
