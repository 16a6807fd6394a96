#pragma once

/**
 * @file naming.hpp
 * @brief Fragment-to-method wrapping and method-name prediction.
 *
 * A candidate fragment is rendered as a stand-alone method (parameters are
 * the outside locals it reads; the return value is its unique live-out
 * local). The built-in name model is a smoothed mixture of body-token to
 * name-subtoken co-occurrence evidence and a subtoken prior, decoded
 * greedily; the product of the chosen step probabilities is the confidence.
 */

#include "emrec/candidates.hpp"
#include "emrec/error.hpp"
#include "emrec/java_model.hpp"
#include "emrec/lexer.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace emrec {

inline constexpr std::string_view kCandidateMethodName = "__candidate__";
inline constexpr std::string_view kEndToken = "<END>";
inline constexpr std::string_view kUnknownToken = "unknown";

struct SyntheticMethod {
    std::string source;
    std::vector<Parameter> parameters;
    std::optional<std::string> return_variable;  ///< local id
    std::string return_type;
    Fragment body_fragment;
};

struct NamePrediction {
    std::vector<std::string> subtokens;
    double confidence{0.0};

    [[nodiscard]] std::string joined() const {
        std::string out;
        for (std::size_t i = 0; i < subtokens.size(); ++i) {
            std::string s = subtokens[i];
            if (i > 0 && !s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
            out += s;
        }
        return out;
    }

    friend bool operator==(const NamePrediction&, const NamePrediction&) = default;
};

// ---------------------------------------------------------------------------
// Wrapping

/// Renders the fragment as `<ret> __candidate__(<params>) { ... }`.
/// Throws ContractError when the fragment cannot be extracted as a method.
inline SyntheticMethod wrap_fragment(const MethodModel& method, const Fragment& fragment) {
    const auto report = check_extractable(method, fragment, 1);
    for (const auto v : report.violations) {
        if (v != Violation::WholeMethod) {
            throw ContractError(std::string("fragment is not extractable: ") + to_string(v));
        }
    }

    const auto statements = fragment_statements(method, fragment);
    std::set<std::string> read_inside;
    std::set<std::string> written_inside;
    std::set<std::string> declared_inside;
    bool has_return = false;
    for (const Statement* s : statements) {
        for (const auto& r : s->refs) {
            if (r.kind != ElementKind::LocalVariable) continue;
            if (r.reads()) read_inside.insert(r.id);
            if (r.writes()) written_inside.insert(r.id);
        }
        declared_inside.insert(s->declared.begin(), s->declared.end());
        has_return = has_return || s->kind == StatementKind::Return;
    }

    SyntheticMethod out;
    out.body_fragment = fragment;
    const auto live = live_out_locals(method, fragment);
    if (!live.empty()) out.return_variable = live.front();

    std::vector<const LocalDecl*> locals_to_declare;
    for (const auto& l : method.locals) {
        if (declared_inside.contains(l.id)) continue;
        if (read_inside.contains(l.id)) {
            out.parameters.push_back(Parameter{l.name, l.type});
        } else if (written_inside.contains(l.id)) {
            locals_to_declare.push_back(&l);
        }
    }

    if (out.return_variable) {
        out.return_type = method.find_local(*out.return_variable)->type;
    } else if (has_return) {
        out.return_type = method.return_type;
    } else {
        out.return_type = "void";
    }

    std::string src = out.return_type + " " + std::string(kCandidateMethodName) + "(";
    for (std::size_t i = 0; i < out.parameters.size(); ++i) {
        if (i > 0) src += ", ";
        src += out.parameters[i].type + " " + out.parameters[i].name;
    }
    src += ") {\n";
    for (const LocalDecl* l : locals_to_declare) src += "    " + l->type + " " + l->name + ";\n";
    const auto span = fragment_span(method, fragment);
    src += "    " + method.slice(span.front().begin_offset, span.back().end_offset) + "\n";
    if (out.return_variable) src += "    return " + method.find_local(*out.return_variable)->name + ";\n";
    src += "}\n";
    out.source = std::move(src);
    return out;
}

// ---------------------------------------------------------------------------
// Subtokens

/// Splits an identifier on underscores, case changes and digit runs;
/// lowercases the parts and drops purely numeric ones.
inline std::vector<std::string> split_subtokens(std::string_view identifier) {
    std::vector<std::string> parts;
    std::string current;
    auto flush = [&] {
        if (!current.empty()
            && !std::all_of(current.begin(), current.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
            parts.push_back(current);
        }
        current.clear();
    };
    for (std::size_t i = 0; i < identifier.size(); ++i) {
        const char c = identifier[i];
        const auto uc = static_cast<unsigned char>(c);
        if (c == '_' || c == '$') {
            flush();
            continue;
        }
        if (!current.empty()) {
            const auto prev = static_cast<unsigned char>(identifier[i - 1]);
            const bool lower_to_upper = std::isupper(uc) && (std::islower(prev) || std::isdigit(prev));
            const bool acronym_end = std::isupper(uc) && std::isupper(prev) && i + 1 < identifier.size()
                && std::islower(static_cast<unsigned char>(identifier[i + 1]));
            const bool digit_edge = (std::isdigit(uc) != 0) != (std::isdigit(prev) != 0);
            if (lower_to_upper || acronym_end || digit_edge) flush();
        }
        current.push_back(static_cast<char>(std::tolower(uc)));
    }
    flush();
    return parts;
}

/// Subtokens of all identifiers after the first `{` of a method's source.
inline std::set<std::string> body_token_bag(std::string_view method_source) {
    std::set<std::string> bag;
    std::vector<Token> tokens;
    try {
        tokens = tokenize(method_source);
    } catch (const ParseError&) {
        return bag;
    }
    bool in_body = false;
    for (const auto& t : tokens) {
        if (!in_body) {
            in_body = t.is("{");
            continue;
        }
        if (t.kind != TokenKind::Identifier || t.text == kCandidateMethodName) continue;
        for (auto& s : split_subtokens(t.text)) bag.insert(std::move(s));
    }
    return bag;
}

// ---------------------------------------------------------------------------
// Built-in name model

struct NameModel {
    static constexpr int kVersion = 1;

    std::map<std::string, std::map<std::string, long long>> cooccurrence;  ///< body token -> name subtoken -> methods
    std::map<std::string, long long> subtoken_prior;                       ///< name subtoken -> occurrences
    std::set<std::string> vocab;                                           ///< name subtokens plus END
    double lambda{0.8};
    int max_len{5};

    [[nodiscard]] long long prior_total() const {
        long long total = 0;
        for (const auto& [s, c] : subtoken_prior) total += c;
        return total;
    }

    /// (C(s) + 1) / (sum of C + |vocab|)
    [[nodiscard]] double smoothed_prior(const std::string& subtoken, long long total) const {
        const auto it = subtoken_prior.find(subtoken);
        const double c = it == subtoken_prior.end() ? 0.0 : static_cast<double>(it->second);
        return (c + 1.0) / (static_cast<double>(total) + static_cast<double>(vocab.size()));
    }
    [[nodiscard]] double smoothed_prior(const std::string& subtoken) const {
        return smoothed_prior(subtoken, prior_total());
    }

    friend bool operator==(const NameModel&, const NameModel&) = default;
};

struct NameCorpusEntry {
    std::set<std::string> body_tokens;
    std::vector<std::string> name_subtokens;
};

inline NameModel train_name_model(const std::vector<NameCorpusEntry>& corpus, double lambda = 0.8, int max_len = 5) {
    if (corpus.empty()) throw ContractError("name model corpus is empty");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ContractError("lambda must lie in [0,1]");
    if (max_len < 1) throw ContractError("max_len must be at least 1");
    NameModel model;
    model.lambda = lambda;
    model.max_len = max_len;
    model.vocab.insert(std::string(kEndToken));
    for (const auto& entry : corpus) {
        std::vector<std::string> name = entry.name_subtokens;
        name.emplace_back(kEndToken);
        const std::set<std::string> distinct(name.begin(), name.end());
        for (const auto& s : name) {
            ++model.subtoken_prior[s];
            model.vocab.insert(s);
        }
        for (const auto& t : entry.body_tokens) {
            auto& row = model.cooccurrence[t];
            for (const auto& s : distinct) ++row[s];
        }
    }
    return model;
}

/// Bag and name subtokens of a parsed corpus method.
inline NameCorpusEntry corpus_entry(const MethodModel& method) {
    NameCorpusEntry e;
    e.body_tokens = body_token_bag(method.slice(method.body_offset, method.source_offset + method.source.size()));
    e.name_subtokens = split_subtokens(method.name);
    if (e.name_subtokens.empty()) e.name_subtokens.emplace_back(kUnknownToken);
    return e;
}

namespace detail {

/// P(s | bag) for every vocabulary subtoken.
inline std::map<std::string, double> step_distribution(const NameModel& model, const std::set<std::string>& bag) {
    std::map<std::string, double> evidence;
    double denominator = 0.0;
    for (const auto& t : bag) {
        const auto row = model.cooccurrence.find(t);
        if (row == model.cooccurrence.end()) continue;
        for (const auto& [s, c] : row->second) {
            evidence[s] += static_cast<double>(c);
            denominator += static_cast<double>(c);
        }
    }
    // Without any known body token the evidence term is undefined; the
    // distribution degenerates to the prior.
    const double lambda = denominator > 0.0 ? model.lambda : 0.0;
    const long long total = model.prior_total();
    std::map<std::string, double> p;
    for (const auto& s : model.vocab) {
        const double e = denominator > 0.0 ? evidence[s] / denominator : 0.0;
        p[s] = lambda * e + (1.0 - lambda) * model.smoothed_prior(s, total);
    }
    return p;
}

/// Ranks subtokens by probability, lexicographic on ties, END after every tie.
inline std::vector<std::pair<std::string, double>> ranked_choices(const std::map<std::string, double>& dist,
                                                                  const std::set<std::string>& excluded,
                                                                  bool allow_end) {
    std::vector<std::pair<std::string, double>> out;
    for (const auto& [s, p] : dist) {
        if (excluded.contains(s)) continue;
        if (!allow_end && s == kEndToken) continue;
        out.emplace_back(s, p);
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        const bool a_end = a.first == kEndToken;
        const bool b_end = b.first == kEndToken;
        if (a_end != b_end) return b_end;
        return a.first < b.first;
    });
    return out;
}

inline NamePrediction decode_from(const NameModel& model, const std::map<std::string, double>& dist,
                                  const std::pair<std::string, double>& first) {
    NamePrediction pred;
    pred.subtokens.push_back(first.first);
    pred.confidence = first.second;
    std::set<std::string> used{first.first};
    while (static_cast<int>(pred.subtokens.size()) < model.max_len) {
        const auto choices = ranked_choices(dist, used, true);
        if (choices.empty() || choices.front().second <= 0.0) break;
        const auto& [s, p] = choices.front();
        pred.confidence *= p;
        if (s == kEndToken) break;
        pred.subtokens.push_back(s);
        used.insert(s);
    }
    return pred;
}

} // namespace detail

/// Greedy name generation over a body token bag. The i-th prediction starts
/// from the i-th best first subtoken. Results are sorted by confidence.
inline std::vector<NamePrediction> predict_name_from_bag(const NameModel& model, const std::set<std::string>& bag, int k) {
    if (k < 1) throw ContractError("k must be at least 1");
    if (bag.empty()) {
        return {NamePrediction{{std::string(kUnknownToken)}, model.smoothed_prior(std::string(kEndToken))}};
    }
    const auto dist = detail::step_distribution(model, bag);
    const auto firsts = detail::ranked_choices(dist, {}, false);
    std::vector<NamePrediction> out;
    for (const auto& first : firsts) {
        if (static_cast<int>(out.size()) >= k) break;
        if (first.second <= 0.0) break;
        out.push_back(detail::decode_from(model, dist, first));
    }
    if (out.empty()) {
        out.push_back(NamePrediction{{std::string(kUnknownToken)}, model.smoothed_prior(std::string(kEndToken))});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const NamePrediction& a, const NamePrediction& b) { return a.confidence > b.confidence; });
    return out;
}

inline std::vector<NamePrediction> predict_name(const NameModel& model, const SyntheticMethod& m, int k = 1) {
    return predict_name_from_bag(model, body_token_bag(m.source), k);
}

} // namespace emrec
