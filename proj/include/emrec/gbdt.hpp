#pragma once

/**
 * @file gbdt.hpp
 * @brief Gradient-boosted regression trees for binary classification.
 *
 * Logistic loss. Each tree is fit to the residuals y - p by greedy
 * variance-reduction splits; leaves hold a Newton step (sum g / sum h) and
 * the ensemble adds learning_rate times the leaf value to the log-odds.
 */

#include "emrec/candidates.hpp"
#include "emrec/error.hpp"
#include "emrec/features.hpp"
#include "emrec/java_model.hpp"
#include "emrec/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace emrec {

enum class Label { Negative = 0, Positive = 1 };

inline const char* to_string(Label l) { return l == Label::Positive ? "positive" : "negative"; }

struct LabeledExample {
    FeatureVector vector;
    Label label{Label::Negative};
    std::string method_id;
    std::optional<Fragment> fragment;
};

struct Hyperparams {
    int n_trees{100};
    int max_depth{3};
    int min_samples_leaf{1};
    double learning_rate{0.1};
    double subsample{1.0};

    void validate() const {
        if (n_trees < 1) throw ContractError("n_trees must be at least 1");
        if (max_depth < 1) throw ContractError("max_depth must be at least 1");
        if (min_samples_leaf < 1) throw ContractError("min_samples_leaf must be at least 1");
        if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw ContractError("learning_rate must lie in (0,1]");
        if (!(subsample > 0.0 && subsample <= 1.0)) throw ContractError("subsample must lie in (0,1]");
    }

    friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

struct TreeNode {
    std::string feature;       ///< empty for a leaf
    std::size_t column{0};     ///< index of feature in the full vector
    double threshold{0.0};     ///< x <= threshold goes left
    int left{-1};
    int right{-1};
    double value{0.0};         ///< leaf value (unshrunk)
    double gain{0.0};          ///< impurity decrease of the split
    int samples{0};

    [[nodiscard]] bool is_leaf() const noexcept { return left < 0; }

    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  ///< nodes[0] is the root

    [[nodiscard]] double evaluate(const FeatureVector& v) const {
        int i = 0;
        while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
            const auto& n = nodes[static_cast<std::size_t>(i)];
            i = v[n.column] <= n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(i)].value;
    }

    [[nodiscard]] int depth() const {
        auto rec = [&](auto&& self, int i) -> int {
            const auto& n = nodes[static_cast<std::size_t>(i)];
            return n.is_leaf() ? 0 : 1 + std::max(self(self, n.left), self(self, n.right));
        };
        return nodes.empty() ? 0 : rec(rec, 0);
    }

    friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

struct GbdtModel {
    static constexpr int kVersion = 1;

    std::vector<RegressionTree> trees;
    double learning_rate{0.1};
    double base_score{0.0};
    std::vector<std::string> feature_names;
    std::uint64_t seed{0};
    Hyperparams hyperparams;

    friend bool operator==(const GbdtModel&, const GbdtModel&) = default;
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double predict_margin(const GbdtModel& model, const FeatureVector& v) {
    double sum = 0.0;
    for (const auto& t : model.trees) sum += t.evaluate(v);
    return model.base_score + model.learning_rate * sum;
}

/// Probability of the positive class, kept strictly inside (0,1).
inline double predict_proba(const GbdtModel& model, const FeatureVector& v) {
    const double p = sigmoid(predict_margin(model, v));
    return std::clamp(p, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

/// Same, from a name -> value map; every feature the model uses must be present.
inline double predict_proba(const GbdtModel& model, const std::map<std::string, double>& values) {
    FeatureVector v;
    for (const auto& name : model.feature_names) {
        const auto it = values.find(name);
        if (it == values.end()) throw ContractError("missing feature " + name);
        v.set(name, it->second);
    }
    return predict_proba(model, v);
}

namespace detail {

inline constexpr double kMinGain = 1e-12;

inline bool better_gain(double gain, double best) {
    return gain > best + 1e-10 * std::max(1.0, std::abs(best));
}

inline double split_threshold(double a, double b) {
    const double mid = a + (b - a) / 2.0;
    return mid < b ? mid : a;
}

class TreeBuilder {
public:
    TreeBuilder(const std::vector<std::vector<double>>& columns, const std::vector<std::vector<std::size_t>>& sorted,
                const std::vector<std::size_t>& full_columns, const std::vector<std::string>& names,
                const std::vector<double>& grad, const std::vector<double>& hess, const Hyperparams& hp)
        : columns_(columns), sorted_(sorted), full_columns_(full_columns), names_(names), grad_(grad), hess_(hess), hp_(hp) {}

    RegressionTree build(const std::vector<std::size_t>& rows) {
        owner_.assign(grad_.size(), -1);
        for (auto r : rows) owner_[r] = 0;
        tree_.nodes.assign(1, TreeNode{});
        grow(0, 0);
        return std::move(tree_);
    }

private:
    void grow(int node, int depth) {
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < owner_.size(); ++r) {
            if (owner_[r] == node) rows.push_back(r);
        }
        double sum_g = 0.0;
        double sum_h = 0.0;
        for (auto r : rows) {
            sum_g += grad_[r];
            sum_h += hess_[r];
        }
        const int n = static_cast<int>(rows.size());
        auto& self = tree_.nodes[static_cast<std::size_t>(node)];
        self.samples = n;
        self.value = sum_h < 1e-150 ? 0.0 : sum_g / sum_h;

        if (depth >= hp_.max_depth || n < 2 * hp_.min_samples_leaf) return;

        const double parent_score = sum_g * sum_g / n;
        double best_gain = 0.0;
        std::optional<std::pair<std::size_t, double>> best;
        for (std::size_t f = 0; f < columns_.size(); ++f) {
            const auto& col = columns_[f];
            double left_sum = 0.0;
            int left_n = 0;
            std::optional<std::size_t> prev;
            for (auto r : sorted_[f]) {
                if (owner_[r] != node) continue;
                if (prev && col[*prev] < col[r] && left_n >= hp_.min_samples_leaf && n - left_n >= hp_.min_samples_leaf) {
                    const double right_sum = sum_g - left_sum;
                    const double gain = left_sum * left_sum / left_n + right_sum * right_sum / (n - left_n) - parent_score;
                    if (gain > kMinGain && (!best || better_gain(gain, best_gain))) {
                        best_gain = gain;
                        best = std::make_pair(f, split_threshold(col[*prev], col[r]));
                    }
                }
                left_sum += grad_[r];
                ++left_n;
                prev = r;
            }
        }
        if (!best) return;

        const auto [f, threshold] = *best;
        const int left = static_cast<int>(tree_.nodes.size());
        const int right = left + 1;
        tree_.nodes.emplace_back();
        tree_.nodes.emplace_back();
        auto& split = tree_.nodes[static_cast<std::size_t>(node)];
        split.feature = names_[f];
        split.column = full_columns_[f];
        split.threshold = threshold;
        split.left = left;
        split.right = right;
        split.gain = best_gain;
        split.value = 0.0;
        for (auto r : rows) owner_[r] = columns_[f][r] <= threshold ? left : right;
        grow(left, depth + 1);
        grow(right, depth + 1);
    }

    const std::vector<std::vector<double>>& columns_;
    const std::vector<std::vector<std::size_t>>& sorted_;
    const std::vector<std::size_t>& full_columns_;
    const std::vector<std::string>& names_;
    const std::vector<double>& grad_;
    const std::vector<double>& hess_;
    const Hyperparams& hp_;
    std::vector<int> owner_;
    RegressionTree tree_;
};

inline void check_two_classes(const std::vector<LabeledExample>& examples) {
    const auto pos = std::count_if(examples.begin(), examples.end(), [](const auto& e) { return e.label == Label::Positive; });
    if (pos == 0 || pos == static_cast<std::ptrdiff_t>(examples.size())) {
        throw DataError("training data must contain both positive and negative examples");
    }
}

} // namespace detail

/// Fits the ensemble on the named feature subset (all 49 by default).
inline GbdtModel train(const std::vector<LabeledExample>& examples, const Hyperparams& hp, std::uint64_t seed,
                       const std::vector<std::string>& features = feature_names()) {
    hp.validate();
    detail::check_two_classes(examples);
    if (features.empty()) throw ContractError("at least one feature is required");

    std::vector<std::size_t> full_columns;
    for (const auto& name : features) {
        const auto i = feature_index(name);
        if (!i) throw ContractError("unknown feature " + name);
        if (std::find(full_columns.begin(), full_columns.end(), *i) != full_columns.end()) {
            throw ContractError("duplicate feature " + name);
        }
        full_columns.push_back(*i);
    }

    const std::size_t n = examples.size();
    std::vector<std::vector<double>> columns(features.size(), std::vector<double>(n));
    std::vector<double> y(n);
    for (std::size_t r = 0; r < n; ++r) {
        y[r] = examples[r].label == Label::Positive ? 1.0 : 0.0;
        for (std::size_t f = 0; f < features.size(); ++f) columns[f][r] = examples[r].vector[full_columns[f]];
    }
    std::vector<std::vector<std::size_t>> sorted(features.size());
    for (std::size_t f = 0; f < features.size(); ++f) {
        sorted[f].resize(n);
        std::iota(sorted[f].begin(), sorted[f].end(), std::size_t{0});
        std::stable_sort(sorted[f].begin(), sorted[f].end(),
                         [&](std::size_t a, std::size_t b) { return columns[f][a] < columns[f][b]; });
    }

    GbdtModel model;
    model.learning_rate = hp.learning_rate;
    model.feature_names = features;
    model.seed = seed;
    model.hyperparams = hp;
    const double rate = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    model.base_score = std::log(rate / (1.0 - rate));

    std::vector<double> margin(n, model.base_score);
    std::vector<double> grad(n);
    std::vector<double> hess(n);
    const auto sample_size = std::max<std::size_t>(1, static_cast<std::size_t>(hp.subsample * static_cast<double>(n)));

    for (int t = 0; t < hp.n_trees; ++t) {
        for (std::size_t r = 0; r < n; ++r) {
            const double p = sigmoid(margin[r]);
            grad[r] = y[r] - p;
            hess[r] = p * (1.0 - p);
        }
        std::vector<std::size_t> rows(n);
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        if (sample_size < n) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
            rng.shuffle(rows);
            rows.resize(sample_size);
            std::sort(rows.begin(), rows.end());
        }
        detail::TreeBuilder builder(columns, sorted, full_columns, features, grad, hess, hp);
        RegressionTree tree = builder.build(rows);
        for (std::size_t r = 0; r < n; ++r) margin[r] += hp.learning_rate * tree.evaluate(examples[r].vector);
        model.trees.push_back(std::move(tree));
    }
    return model;
}

/// Summed split gains per feature, normalized to 1. All zero when no tree splits.
inline std::map<std::string, double> gini_importance(const GbdtModel& model) {
    std::map<std::string, double> out;
    for (const auto& name : model.feature_names) out[name] = 0.0;
    double total = 0.0;
    for (const auto& tree : model.trees) {
        for (const auto& node : tree.nodes) {
            if (node.is_leaf()) continue;
            out[node.feature] += node.gain;
            total += node.gain;
        }
    }
    if (total > 0.0) {
        for (auto& [name, value] : out) value /= total;
    }
    return out;
}

/// Uniform draw from the method's candidates other than gold.
inline std::optional<Fragment> generate_negative(const MethodModel& method, const Fragment& gold, std::uint64_t seed,
                                                 int min_statements = kDefaultMinStatements) {
    std::vector<Fragment> pool;
    for (auto& f : enumerate_candidates(method, min_statements)) {
        if (!(f == gold)) pool.push_back(std::move(f));
    }
    if (pool.empty()) return std::nullopt;
    Rng rng(seed);
    return pool[static_cast<std::size_t>(rng.below(pool.size()))];
}

// ---------------------------------------------------------------------------
// Cross-validation and tuning

/// F-measure of the positive class; 0 when undefined.
inline double f_measure(int tp, int fp, int fn) {
    const double precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
    const double recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
    return precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

/// Stratified fold index per example: each label is shuffled and dealt
/// round-robin, positives first.
inline std::vector<int> stratified_folds(const std::vector<LabeledExample>& examples, int folds, std::uint64_t seed) {
    std::vector<int> out(examples.size(), 0);
    std::size_t position = 0;
    for (Label label : {Label::Positive, Label::Negative}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < examples.size(); ++i) {
            if (examples[i].label == label) idx.push_back(i);
        }
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(label)));
        rng.shuffle(idx);
        for (auto i : idx) out[i] = static_cast<int>(position++ % static_cast<std::size_t>(folds));
    }
    return out;
}

/// Mean held-out F-measure at threshold 0.5. Throws DataError when a
/// training split lacks a class.
inline double cross_validate(const std::vector<LabeledExample>& examples, const Hyperparams& hp, int folds,
                             std::uint64_t seed, const std::vector<std::string>& features = feature_names()) {
    hp.validate();
    if (folds < 2) throw ContractError("folds must be at least 2");
    if (static_cast<std::size_t>(folds) > examples.size()) throw ContractError("more folds than examples");
    detail::check_two_classes(examples);
    const auto assignment = stratified_folds(examples, folds, seed);
    double total = 0.0;
    for (int f = 0; f < folds; ++f) {
        std::vector<LabeledExample> train_set;
        std::vector<const LabeledExample*> held_out;
        for (std::size_t i = 0; i < examples.size(); ++i) {
            if (assignment[i] == f) {
                held_out.push_back(&examples[i]);
            } else {
                train_set.push_back(examples[i]);
            }
        }
        try {
            detail::check_two_classes(train_set);
        } catch (const DataError&) {
            throw DataError("training split of fold " + std::to_string(f) + " lacks a class");
        }
        const GbdtModel model = train(train_set, hp, derive_seed(seed, 1000 + static_cast<std::uint64_t>(f)), features);
        int tp = 0;
        int fp = 0;
        int fn = 0;
        for (const auto* e : held_out) {
            const bool predicted = predict_proba(model, e->vector) >= 0.5;
            const bool actual = e->label == Label::Positive;
            tp += predicted && actual;
            fp += predicted && !actual;
            fn += !predicted && actual;
        }
        total += f_measure(tp, fp, fn);
    }
    return total / folds;
}

struct SearchSpace {
    int min_trees{50}, max_trees{500};
    int min_depth{2}, max_depth{6};
    double min_learning_rate{0.01}, max_learning_rate{0.3};  ///< log-uniform
    int min_leaf{1}, max_leaf{10};
    double min_subsample{0.6}, max_subsample{1.0};

    [[nodiscard]] Hyperparams sample(Rng& rng) const {
        Hyperparams hp;
        hp.n_trees = static_cast<int>(rng.between(min_trees, max_trees));
        hp.max_depth = static_cast<int>(rng.between(min_depth, max_depth));
        hp.learning_rate = rng.log_uniform(min_learning_rate, max_learning_rate);
        hp.min_samples_leaf = static_cast<int>(rng.between(min_leaf, max_leaf));
        hp.subsample = rng.uniform(min_subsample, max_subsample);
        return hp;
    }
};

struct TuneResult {
    Hyperparams best;
    double score{0.0};
    std::vector<std::pair<Hyperparams, double>> trials;
};

/// Random search; the first trial with the highest CV score wins.
inline TuneResult tune(const std::vector<LabeledExample>& examples, const SearchSpace& space, int trials, int folds,
                       std::uint64_t seed, const std::vector<std::string>& features = feature_names()) {
    if (trials < 1) throw ContractError("trials must be at least 1");
    Rng rng(derive_seed(seed, 0x7475u));
    TuneResult result;
    for (int t = 0; t < trials; ++t) {
        const Hyperparams hp = space.sample(rng);
        const double score = cross_validate(examples, hp, folds, seed, features);
        result.trials.emplace_back(hp, score);
        if (t == 0 || score > result.score) {
            result.best = hp;
            result.score = score;
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Persistence

inline nlohmann::json to_json(const Hyperparams& hp) {
    return {{"n_trees", hp.n_trees},
            {"max_depth", hp.max_depth},
            {"min_samples_leaf", hp.min_samples_leaf},
            {"learning_rate", hp.learning_rate},
            {"subsample", hp.subsample}};
}

inline Hyperparams hyperparams_from_json(const nlohmann::json& j) {
    Hyperparams hp;
    hp.n_trees = j.at("n_trees").get<int>();
    hp.max_depth = j.at("max_depth").get<int>();
    hp.min_samples_leaf = j.at("min_samples_leaf").get<int>();
    hp.learning_rate = j.at("learning_rate").get<double>();
    hp.subsample = j.at("subsample").get<double>();
    return hp;
}

inline nlohmann::json to_json(const GbdtModel& model) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : model.trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& n : tree.nodes) {
            if (n.is_leaf()) {
                nodes.push_back({{"leaf", n.value}, {"samples", n.samples}});
            } else {
                nodes.push_back({{"feature", n.feature},
                                 {"threshold", n.threshold},
                                 {"left", n.left},
                                 {"right", n.right},
                                 {"gain", n.gain},
                                 {"samples", n.samples}});
            }
        }
        trees.push_back(std::move(nodes));
    }
    return {{"format", "emrec-gbdt"},
            {"version", GbdtModel::kVersion},
            {"feature_names", model.feature_names},
            {"hyperparams", to_json(model.hyperparams)},
            {"learning_rate", model.learning_rate},
            {"base_score", model.base_score},
            {"seed", model.seed},
            {"trees", std::move(trees)}};
}

/// Throws ModelError on a malformed or incompatible document.
inline GbdtModel gbdt_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != "emrec-gbdt") throw ModelError("not a classifier model");
        if (j.at("version").get<int>() != GbdtModel::kVersion) throw ModelError("unsupported classifier model version");
        GbdtModel model;
        model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        model.hyperparams = hyperparams_from_json(j.at("hyperparams"));
        model.learning_rate = j.at("learning_rate").get<double>();
        model.base_score = j.at("base_score").get<double>();
        model.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& name : model.feature_names) {
            if (!feature_index(name)) throw ModelError("model uses unknown feature " + name);
        }
        for (const auto& jt : j.at("trees")) {
            RegressionTree tree;
            for (const auto& jn : jt) {
                TreeNode n;
                n.samples = jn.at("samples").get<int>();
                if (jn.contains("leaf")) {
                    n.value = jn.at("leaf").get<double>();
                } else {
                    n.feature = jn.at("feature").get<std::string>();
                    if (std::find(model.feature_names.begin(), model.feature_names.end(), n.feature)
                        == model.feature_names.end()) {
                        throw ModelError("node splits on feature outside the model: " + n.feature);
                    }
                    n.column = *feature_index(n.feature);
                    n.threshold = jn.at("threshold").get<double>();
                    n.left = jn.at("left").get<int>();
                    n.right = jn.at("right").get<int>();
                    n.gain = jn.at("gain").get<double>();
                }
                tree.nodes.push_back(std::move(n));
            }
            const auto size = static_cast<int>(tree.nodes.size());
            if (size == 0) throw ModelError("empty tree");
            for (int i = 0; i < size; ++i) {
                const auto& n = tree.nodes[static_cast<std::size_t>(i)];
                if (!n.is_leaf() && (n.left <= i || n.right <= i || n.left >= size || n.right >= size)) {
                    throw ModelError("tree child index out of range");
                }
            }
            model.trees.push_back(std::move(tree));
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("malformed classifier model: ") + e.what());
    }
}

} // namespace emrec
