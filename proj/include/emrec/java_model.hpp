#pragma once

/**
 * @file java_model.hpp
 * @brief Statement-level model of Java methods.
 *
 * A SourceUnit holds every method body of a file as a tree of blocks and
 * statements. Each statement carries the raw counts and element references
 * of its own tokens (the header of a compound statement, not the children),
 * so that any metric over a set of statements is a plain sum.
 */

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace emrec {

enum class StatementKind {
    Declaration,
    Expression,
    Assignment,
    If,
    Switch,
    For,
    While,
    Return,
    Break,
    Continue,
    Assert,
    Block,
    Throw,
    Try,
};

enum class ElementKind {
    LocalVariable,
    Field,
    Method,
    Type,
    TypedElement,
    Package,
};

inline constexpr std::size_t kElementKindCount = 6;

enum class Access {
    Read,
    Write,
    ReadWrite,  ///< compound assignment, increment, decrement
    Call,
};

/// One occurrence of a program element on a source line.
struct ElementRef {
    ElementKind kind{ElementKind::LocalVariable};
    std::string id;
    int line{0};
    Access access{Access::Read};

    [[nodiscard]] bool reads() const noexcept {
        return access == Access::Read || access == Access::ReadWrite;
    }
    [[nodiscard]] bool writes() const noexcept {
        return access == Access::Write || access == Access::ReadWrite;
    }
};

/// A local variable or parameter. `id` is unique within the method: the first
/// declaration of a name uses the bare name, later ones get a `#n` suffix.
struct LocalDecl {
    std::string id;
    std::string name;
    std::string type;  ///< type as written, e.g. `List<String>` or `int[]`
    int line{0};
    bool parameter{false};
};

struct Parameter {
    std::string name;
    std::string type;
};

struct Statement;

struct Block {
    std::vector<Statement> statements;
    int depth{0};
};

struct Statement {
    StatementKind kind{StatementKind::Expression};
    int start_line{0};
    int end_line{0};
    std::vector<Block> child_blocks;
    std::vector<ElementRef> refs;       ///< own tokens only
    int literals{0};
    int invocations{0};
    int conditionals{0};
    int assignments{0};
    std::vector<std::string> declared;  ///< local ids introduced by own tokens
    std::vector<int> own_lines;         ///< sorted lines holding own tokens
    std::size_t begin_offset{0};
    std::size_t end_offset{0};
};

struct MethodModel {
    std::string name;
    std::string class_name;
    std::string return_type;
    std::vector<Parameter> parameters;
    Block body;
    int start_line{0};
    int end_line{0};
    int loc{1};
    std::vector<LocalDecl> locals;  ///< parameters first, then source order
    std::string source;             ///< declaration text, signature through closing brace
    std::size_t source_offset{0};   ///< file offset of `source`
    std::size_t body_offset{0};     ///< file offset of the body's opening brace

    /// Source text between two file offsets within this method.
    [[nodiscard]] std::string slice(std::size_t begin, std::size_t end) const {
        if (begin < source_offset || end < begin) return {};
        return source.substr(begin - source_offset, end - begin);
    }

    [[nodiscard]] std::string id() const {
        return (class_name.empty() ? name : class_name + "." + name) + "@" + std::to_string(start_line);
    }

    [[nodiscard]] const LocalDecl* find_local(const std::string& local_id) const {
        for (const auto& l : locals) {
            if (l.id == local_id) return &l;
        }
        return nullptr;
    }
};

struct SourceUnit {
    std::string path;
    std::string text;
    std::string package_name;
    std::vector<std::string> imports;
    std::vector<MethodModel> methods;
    int line_count{0};
};

// ---------------------------------------------------------------------------
// Tree helpers

/// Index step from a block to one of its nested blocks.
struct BlockStep {
    std::size_t statement{0};
    std::size_t child{0};
    auto operator<=>(const BlockStep&) const = default;
};

using BlockPath = std::vector<BlockStep>;

inline const Block* resolve_block(const Block& root, const BlockPath& path) {
    const Block* block = &root;
    for (const auto& step : path) {
        if (step.statement >= block->statements.size()) return nullptr;
        const auto& stmt = block->statements[step.statement];
        if (step.child >= stmt.child_blocks.size()) return nullptr;
        block = &stmt.child_blocks[step.child];
    }
    return block;
}

template <typename Fn>
void for_each_statement(const Statement& stmt, Fn&& fn) {
    fn(stmt);
    for (const auto& child : stmt.child_blocks) {
        for (const auto& s : child.statements) for_each_statement(s, fn);
    }
}

template <typename Fn>
void for_each_statement(const Block& block, Fn&& fn) {
    for (const auto& s : block.statements) for_each_statement(s, fn);
}

inline std::size_t count_statements(const Block& block) {
    std::size_t n = 0;
    for_each_statement(block, [&](const Statement&) { ++n; });
    return n;
}

inline void collect_lines(const Statement& stmt, std::set<int>& out) {
    for_each_statement(stmt, [&](const Statement& s) { out.insert(s.own_lines.begin(), s.own_lines.end()); });
}

/// Lines holding any token of the statements, nested ones included.
inline int count_lines(const Block& block) {
    std::set<int> lines;
    for (const auto& s : block.statements) collect_lines(s, lines);
    return static_cast<int>(lines.size());
}

} // namespace emrec
