#pragma once

/**
 * @file fixtures.hpp
 * @brief Synthetic Java corpus with gold extractions, for training and acceptance runs.
 *
 * Long methods are sequences of structurally interchangeable three-statement
 * groups. One group per method (the gold extraction) draws its identifiers
 * from a single theme; the other groups draw from a shared neutral pool.
 * Themed helper methods named after each theme teach the name model what
 * those identifiers mean. A few short methods have exactly one candidate.
 */

#include "emrec/dataset.hpp"
#include "emrec/error.hpp"
#include "emrec/rng.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace emrec {

struct FixtureOptions {
    int train_methods{60};
    int test_methods{40};
    int groups{10};             ///< three-statement groups per long method
    int helpers_per_theme{12};
    int single_candidate_methods{6};
    int methods_per_file{10};
};

struct FixtureCorpus {
    std::map<std::string, std::string> files;  ///< relative path -> Java text
    std::vector<GoldExample> train;
    std::vector<GoldExample> test;
};

namespace detail {

struct Theme {
    const char* verb;
    const char* noun;
    std::array<const char*, 6> words;
};

inline const std::vector<Theme>& fixture_themes() {
    static const std::vector<Theme> themes = {
        {"compute", "total", {"price", "tax", "amount", "discount", "subtotal", "fee"}},
        {"format", "label", {"text", "prefix", "suffix", "width", "padding", "caption"}},
        {"load", "config", {"setting", "option", "profile", "entry", "preset", "property"}},
        {"validate", "input", {"field", "length", "pattern", "range", "rule", "flag"}},
        {"update", "cache", {"key", "hit", "miss", "expiry", "bucket", "stamp"}},
        {"parse", "header", {"token", "chunk", "offset", "marker", "delimiter", "version"}},
        {"merge", "records", {"row", "column", "left", "right", "index", "pair"}},
        {"scale", "image", {"pixel", "height", "ratio", "zoom", "factor", "frame"}},
    };
    return themes;
}

inline const std::vector<const char*>& neutral_words() {
    static const std::vector<const char*> words = {"tmp", "val", "acc", "buf", "cur", "aux", "node", "item",
                                                   "elem", "part", "cell", "unit", "mark", "span", "temp", "slot"};
    return words;
}

inline const std::vector<const char*>& long_method_words() {
    static const std::vector<const char*> words = {
        "run",    "process", "handle", "execute", "perform", "apply",  "batch",   "job",    "task",   "work",
        "stage",  "phase",   "pass",   "cycle",   "round",   "sweep",  "drive",   "routine", "step",  "flow",
        "spin",   "tick",    "pulse",  "loop",    "trial",   "turn",   "shift",   "wave",   "burst", "chain",
        "crank",  "churn",   "grind",  "sift",    "stir",    "roll",   "fold",    "wind",   "sway",  "hop"};
    return words;
}

inline std::string capitalize(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
    return v[static_cast<std::size_t>(rng.below(v.size()))];
}

/// Accumulates one Java file and tracks line numbers (1-based).
class JavaWriter {
public:
    void line(const std::string& text) { lines_.push_back(text); }
    [[nodiscard]] int next_line() const { return static_cast<int>(lines_.size()) + 1; }
    [[nodiscard]] std::string text() const {
        std::string out;
        for (const auto& l : lines_) out += l + "\n";
        return out;
    }

private:
    std::vector<std::string> lines_;
};

/// A local name of two subtokens from the word pool, unique within `used`.
inline std::string local_name(Rng& rng, const std::vector<const char*>& pool, std::set<std::string>& used) {
    for (int attempt = 0;; ++attempt) {
        const std::string a = pick(rng, pool);
        std::string b = pick(rng, pool);
        if (a == b) continue;
        std::string name = a + capitalize(b);
        if (attempt > 20) name += std::to_string(attempt);
        if (used.insert(name).second) return name;
    }
}

/// Per-method names of the two parameters and the accumulator.
struct MethodVars {
    std::string x;
    std::string y;
    std::string acc;
};

inline const std::vector<const char*>& variable_words() {
    static const std::vector<const char*> words = {
        "alpha", "beta",  "gamma", "delta",  "omega",  "sigma",  "kappa",  "theta", "north",  "south",
        "east",  "west",  "amber", "coral",  "ivory",  "jade",   "onyx",   "pearl", "ruby",   "topaz",
        "maple", "cedar", "birch", "aspen",  "hazel",  "laurel", "olive",  "willow", "comet", "nova",
        "orbit", "lunar", "solar", "nebula", "falcon", "heron",  "raven",  "robin", "wren",   "otter",
        "badger", "ferret", "marten", "lynx", "bison", "moose",  "quail",  "finch"};
    return words;
}

/// Three statements over two fresh locals; each folds into the accumulator.
inline std::array<std::string, 3> group_statements(int shape, const MethodVars& v, const std::string& a,
                                                   const std::string& b, int k) {
    const std::string ks = std::to_string(k);
    const std::string& x = v.x;
    const std::string& y = v.y;
    const std::string& r = v.acc;
    switch (shape % 4) {
    case 0: return {"int " + a + " = " + x + " * " + ks + ";", "int " + b + " = " + a + " + " + y + ";", r + " += " + b + " - " + a + ";"};
    case 1: return {"int " + a + " = " + y + " - " + ks + ";", "int " + b + " = " + a + " * " + x + " + " + a + ";", r + " = " + r + " + " + b + ";"};
    case 2: return {"int " + a + " = " + x + " + " + y + " * " + ks + ";", "int " + b + " = " + a + " % " + std::to_string(k + 1) + ";", r + " -= " + a + " - " + b + ";"};
    default: return {"int " + a + " = " + x + " - " + ks + ";", "int " + b + " = " + a + " > " + y + " ? " + a + " : " + y + ";", r + " += " + a + " * " + b + ";"};
    }
}

} // namespace detail

inline FixtureCorpus generate_fixtures(std::uint64_t seed, const FixtureOptions& options = {}) {
    if (options.groups < 2 || options.train_methods < 1 || options.test_methods < 1 || options.helpers_per_theme < 1
        || options.methods_per_file < 1 || options.single_candidate_methods < 0) {
        throw ContractError("invalid fixture options");
    }
    using namespace detail;
    Rng rng(derive_seed(seed, 0x66697874u));
    FixtureCorpus corpus;
    const auto& themes = fixture_themes();

    // Themed helpers: one file.
    {
        JavaWriter w;
        w.line("package fixtures;");
        w.line("");
        w.line("public class Helpers {");
        int serial = 0;
        for (const auto& theme : themes) {
            const std::vector<const char*> words(theme.words.begin(), theme.words.end());
            for (int h = 0; h < options.helpers_per_theme; ++h) {
                std::vector<std::string> names;
                while (names.size() < 4) {
                    std::string n = pick(rng, words);
                    if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
                }
                const int k = static_cast<int>(rng.between(2, 9));
                w.line("    int " + std::string(theme.verb) + capitalize(theme.noun) + std::to_string(++serial) + "(int "
                       + names[0] + ", int " + names[1] + ") {");
                w.line("        int " + names[2] + " = " + names[0] + " + " + names[1] + ";");
                w.line("        int " + names[3] + " = " + names[2] + " * " + std::to_string(k) + " + " + names[1] + ";");
                w.line("        return " + names[3] + " - " + names[0] + ";");
                w.line("    }");
                w.line("");
            }
        }
        w.line("}");
        corpus.files["fixtures/Helpers.java"] = w.text();
    }

    // Long methods.
    const int total = options.train_methods + options.test_methods;
    std::set<std::string> method_names;
    for (int file_index = 0; file_index * options.methods_per_file < total; ++file_index) {
        const std::string class_name = "Batch" + std::to_string(file_index);
        const std::string path = "fixtures/" + class_name + ".java";
        JavaWriter w;
        w.line("package fixtures;");
        w.line("");
        w.line("public class " + class_name + " {");
        for (int m = file_index * options.methods_per_file; m < std::min(total, (file_index + 1) * options.methods_per_file); ++m) {
            std::string name;
            do {
                const std::string a = pick(rng, long_method_words());
                const std::string b = pick(rng, long_method_words());
                if (a == b) continue;
                name = a + capitalize(b) + std::to_string(m);
            } while (name.empty() || !method_names.insert(name).second);

            const Theme& theme = pick(rng, themes);
            const std::vector<const char*> theme_words(theme.words.begin(), theme.words.end());
            const int gold_group = static_cast<int>(rng.below(static_cast<std::uint64_t>(options.groups)));
            MethodVars vars;
            vars.x = pick(rng, variable_words());
            do {
                vars.y = pick(rng, variable_words());
            } while (vars.y == vars.x);
            do {
                vars.acc = pick(rng, variable_words());
            } while (vars.acc == vars.x || vars.acc == vars.y);
            std::set<std::string> used{vars.x, vars.y, vars.acc};

            const int start = w.next_line();
            w.line("    int " + name + "(int " + vars.x + ", int " + vars.y + ") {");
            w.line("        int " + vars.acc + " = " + vars.x + ";");
            GoldExample gold;
            gold.file = path;
            gold.method_name = name;
            gold.method_start_line = start;
            for (int g = 0; g < options.groups; ++g) {
                const bool is_gold = g == gold_group;
                const auto& pool = is_gold ? theme_words : neutral_words();
                const std::string a = local_name(rng, pool, used);
                const std::string b = local_name(rng, pool, used);
                const int shape = static_cast<int>(rng.below(4));
                const int k = static_cast<int>(rng.between(2, 9));
                if (is_gold) gold.fragment_start_line = w.next_line();
                for (const auto& s : group_statements(shape, vars, a, b, k)) w.line("        " + s);
                if (is_gold) gold.fragment_end_line = w.next_line() - 1;
            }
            w.line("        return " + vars.acc + ";");
            w.line("    }");
            w.line("");
            (m < options.train_methods ? corpus.train : corpus.test).push_back(gold);
        }
        w.line("}");
        corpus.files[path] = w.text();
    }

    // Methods whose only candidate is the loop body.
    if (options.single_candidate_methods > 0) {
        const std::string path = "fixtures/Loops.java";
        JavaWriter w;
        w.line("package fixtures;");
        w.line("");
        w.line("public class Loops {");
        for (int m = 0; m < options.single_candidate_methods; ++m) {
            const std::string name = "accumulate" + std::to_string(m);
            GoldExample gold;
            gold.file = path;
            gold.method_name = name;
            gold.method_start_line = w.next_line();
            w.line("    int " + name + "(int[] data) {");
            w.line("        int acc = 0;");
            w.line("        for (int i = 0; i < data.length; i++) {");
            gold.fragment_start_line = w.next_line();
            w.line("            int v = data[i];");
            w.line("            v = v * " + std::to_string(m + 2) + ";");
            w.line("            acc += v;");
            gold.fragment_end_line = w.next_line() - 1;
            w.line("        }");
            w.line("        return acc;");
            w.line("    }");
            w.line("");
            corpus.train.push_back(gold);
        }
        w.line("}");
        corpus.files[path] = w.text();
    }
    return corpus;
}

/// Writes `<dir>/src/...`, `<dir>/train.jsonl` and `<dir>/test.jsonl`.
inline void write_fixtures(const FixtureCorpus& corpus, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    for (const auto& [rel, text] : corpus.files) {
        const fs::path p = dir / "src" / rel;
        fs::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary);
        if (!out) throw DataError("cannot write " + p.string());
        out << text;
    }
    auto write = [&](const char* name, const std::vector<GoldExample>& gold) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw DataError("cannot write " + (dir / name).string());
        write_gold(out, gold);
    };
    write("train.jsonl", corpus.train);
    write("test.jsonl", corpus.test);
}

} // namespace emrec
