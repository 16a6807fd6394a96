#pragma once

/**
 * @file dataset.hpp
 * @brief Gold refactoring data, source loading, and labeled-example construction.
 */

#include "emrec/candidates.hpp"
#include "emrec/error.hpp"
#include "emrec/features.hpp"
#include "emrec/gbdt.hpp"
#include "emrec/java_model.hpp"
#include "emrec/java_parser.hpp"
#include "emrec/name_provider.hpp"
#include "emrec/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace emrec {

/// One extracted fragment from the gold data. `line` is its JSONL line.
struct GoldExample {
    std::string file;
    std::string method_name;
    int method_start_line{0};
    int fragment_start_line{0};
    int fragment_end_line{0};
    int line{0};

    friend bool operator==(const GoldExample& a, const GoldExample& b) {
        return a.file == b.file && a.method_name == b.method_name && a.method_start_line == b.method_start_line
            && a.fragment_start_line == b.fragment_start_line && a.fragment_end_line == b.fragment_end_line;
    }
};

inline nlohmann::json to_json(const GoldExample& g) {
    return {{"file", g.file},
            {"method_name", g.method_name},
            {"method_start_line", g.method_start_line},
            {"fragment_start_line", g.fragment_start_line},
            {"fragment_end_line", g.fragment_end_line}};
}

/// Parses a JSON Lines gold dataset. Blank lines are skipped.
/// @throws DataError naming the offending line.
inline std::vector<GoldExample> parse_gold(std::istream& in, const std::string& origin = "<gold>") {
    std::vector<GoldExample> out;
    std::string text;
    int line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = origin + ":" + std::to_string(line);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(where + ": invalid JSON: " + e.what());
        }
        GoldExample g;
        g.line = line;
        try {
            g.file = j.at("file").get<std::string>();
            g.method_name = j.at("method_name").get<std::string>();
            g.method_start_line = j.at("method_start_line").get<int>();
            g.fragment_start_line = j.at("fragment_start_line").get<int>();
            g.fragment_end_line = j.at("fragment_end_line").get<int>();
        } catch (const nlohmann::json::exception& e) {
            throw DataError(where + ": " + e.what());
        }
        if (g.fragment_start_line > g.fragment_end_line || g.fragment_start_line < 1) {
            throw DataError(where + ": fragment lines out of order");
        }
        out.push_back(std::move(g));
    }
    return out;
}

inline std::vector<GoldExample> read_gold(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open gold dataset " + path);
    return parse_gold(in, path);
}

inline void write_gold(std::ostream& out, const std::vector<GoldExample>& gold) {
    for (const auto& g : gold) out << to_json(g).dump() << '\n';
}

/// Parsed sources under a root directory, loaded on demand.
class SourceCache {
public:
    explicit SourceCache(std::filesystem::path root) : root_(std::move(root)) {}

    const SourceUnit& get(const std::string& file) {
        auto it = units_.find(file);
        if (it != units_.end()) return *it->second;
        const auto path = root_ / file;
        std::ifstream in(path, std::ios::binary);
        if (!in) throw DataError("cannot read source " + path.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        try {
            auto unit = std::make_unique<SourceUnit>(parse_source(buf.str(), file));
            return *units_.emplace(file, std::move(unit)).first->second;
        } catch (const ParseError& e) {
            throw ParseError(file + ": " + std::string(e.what()).substr(0, std::string(e.what()).rfind(" at ")),
                             e.line(), e.column());
        }
    }

    /// Relative paths of every .java file under the root, sorted.
    [[nodiscard]] std::vector<std::string> java_files() const {
        std::vector<std::string> out;
        if (!std::filesystem::is_directory(root_)) throw DataError("source root is not a directory: " + root_.string());
        for (const auto& e : std::filesystem::recursive_directory_iterator(root_)) {
            if (e.is_regular_file() && e.path().extension() == ".java") {
                out.push_back(std::filesystem::relative(e.path(), root_).generic_string());
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    [[nodiscard]] const std::filesystem::path& root() const noexcept { return root_; }

private:
    std::filesystem::path root_;
    std::map<std::string, std::unique_ptr<SourceUnit>> units_;
};

/// The method a gold entry refers to: same name and start line, or else the
/// only same-named method whose span contains the given start line.
inline const MethodModel& locate_method(const SourceUnit& unit, const GoldExample& g) {
    const MethodModel* loose = nullptr;
    int loose_count = 0;
    for (const auto& m : unit.methods) {
        if (m.name != g.method_name) continue;
        if (m.start_line == g.method_start_line) return m;
        if (g.method_start_line >= m.start_line - 3 && g.method_start_line <= m.end_line) {
            loose = &m;
            ++loose_count;
        }
    }
    if (loose_count == 1) return *loose;
    throw DataError(g.file + ": method " + g.method_name + " at line " + std::to_string(g.method_start_line)
                    + " not found (gold line " + std::to_string(g.line) + ")");
}

/// The statement range a gold entry names.
/// @throws DataError when no statement sequence spans exactly those lines.
inline Fragment gold_fragment(const MethodModel& method, const GoldExample& g) {
    if (g.fragment_start_line < method.start_line || g.fragment_end_line > method.end_line) {
        throw DataError(g.file + ": gold span " + std::to_string(g.fragment_start_line) + "-"
                        + std::to_string(g.fragment_end_line) + " lies outside " + method.id() + " (gold line "
                        + std::to_string(g.line) + ")");
    }
    auto f = find_fragment_by_lines(method, g.fragment_start_line, g.fragment_end_line);
    if (!f) {
        throw DataError(g.file + ": gold span " + std::to_string(g.fragment_start_line) + "-"
                        + std::to_string(g.fragment_end_line) + " is not a statement sequence of " + method.id()
                        + " (gold line " + std::to_string(g.line) + ")");
    }
    return *f;
}

struct TrainingSet {
    std::vector<LabeledExample> examples;
    int positives{0};
    int negatives{0};
    std::vector<std::string> warnings;  ///< gold fragments that are not legal candidates
};

/// One positive per gold entry and, where the method has another candidate,
/// one sampled negative. The negative stream of entry i is derive_seed(seed, i).
inline TrainingSet build_training_set(const std::vector<GoldExample>& gold, SourceCache& sources,
                                      const NameProvider& provider, std::uint64_t seed,
                                      int min_statements = kDefaultMinStatements) {
    TrainingSet set;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        const auto& g = gold[i];
        const MethodModel& method = locate_method(sources.get(g.file), g);
        const Fragment positive = gold_fragment(method, g);
        const auto report = check_extractable(method, positive, min_statements);
        if (!report.extractable) {
            std::string why;
            for (auto v : report.violations) why += std::string(why.empty() ? "" : ",") + to_string(v);
            set.warnings.push_back(g.file + ":" + std::to_string(g.fragment_start_line) + "-"
                                   + std::to_string(g.fragment_end_line) + " is not a legal candidate (" + why + ")");
        }
        auto add = [&](const Fragment& f, Label label) {
            LabeledExample e;
            e.vector = compute_features(method, f, candidate_name(provider, method, f).confidence);
            e.label = label;
            e.method_id = g.file + "#" + method.id();
            e.fragment = f;
            set.examples.push_back(std::move(e));
        };
        add(positive, Label::Positive);
        ++set.positives;
        if (auto negative = generate_negative(method, positive, derive_seed(seed, i), min_statements)) {
            add(*negative, Label::Negative);
            ++set.negatives;
        }
    }
    return set;
}

} // namespace emrec
