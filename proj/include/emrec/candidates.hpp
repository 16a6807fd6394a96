#pragma once

#include "emrec/error.hpp"
#include "emrec/java_model.hpp"

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace emrec {

/// A contiguous range of statements within one block of a method.
struct Fragment {
    std::string method_id;
    BlockPath block_path;
    std::size_t start_index{0};
    std::size_t end_index{0};  ///< inclusive
    int start_line{0};
    int end_line{0};
    int loc{0};

    [[nodiscard]] std::size_t size() const noexcept { return end_index - start_index + 1; }

    friend bool operator==(const Fragment& a, const Fragment& b) {
        return a.method_id == b.method_id && a.block_path == b.block_path
            && a.start_index == b.start_index && a.end_index == b.end_index;
    }

    /// Enumeration order: block path, then start, then end.
    friend bool operator<(const Fragment& a, const Fragment& b) {
        if (a.block_path != b.block_path) return a.block_path < b.block_path;
        if (a.start_index != b.start_index) return a.start_index < b.start_index;
        return a.end_index < b.end_index;
    }
};

enum class Violation {
    MultipleLiveOut,
    BrokenJump,
    InteriorReturn,
    BelowMinSize,
    WholeMethod,
};

inline const char* to_string(Violation v) {
    switch (v) {
    case Violation::MultipleLiveOut: return "multiple_live_out";
    case Violation::BrokenJump: return "broken_jump";
    case Violation::InteriorReturn: return "interior_return";
    case Violation::BelowMinSize: return "below_min_size";
    case Violation::WholeMethod: return "whole_method";
    }
    return "unknown";
}

struct ExtractabilityReport {
    bool extractable{true};
    std::vector<Violation> violations;

    [[nodiscard]] bool has(Violation v) const {
        return std::find(violations.begin(), violations.end(), v) != violations.end();
    }
};

inline constexpr int kDefaultMinStatements = 3;

/// Builds a fragment with its derived line span. Throws ContractError when the
/// path or indices do not address statements of the method.
inline Fragment make_fragment(const MethodModel& method, BlockPath path, std::size_t start, std::size_t end) {
    const Block* block = resolve_block(method.body, path);
    if (block == nullptr || start > end || end >= block->statements.size()) {
        throw ContractError("fragment indices out of range for " + method.id());
    }
    Fragment f;
    f.method_id = method.id();
    f.block_path = std::move(path);
    f.start_index = start;
    f.end_index = end;
    f.start_line = block->statements[start].start_line;
    f.end_line = block->statements[end].end_line;
    std::set<int> lines;
    for (std::size_t i = start; i <= end; ++i) collect_lines(block->statements[i], lines);
    f.loc = static_cast<int>(lines.size());
    return f;
}

/// The top-level statements of the fragment, within their owning block.
inline std::span<const Statement> fragment_span(const MethodModel& method, const Fragment& fragment) {
    const Block* block = resolve_block(method.body, fragment.block_path);
    if (block == nullptr || fragment.start_index > fragment.end_index
        || fragment.end_index >= block->statements.size()) {
        throw ContractError("fragment does not address statements of " + method.id());
    }
    return std::span<const Statement>(block->statements).subspan(fragment.start_index, fragment.size());
}

/// Every statement of the fragment, nested ones included, in source order.
inline std::vector<const Statement*> fragment_statements(const MethodModel& method, const Fragment& fragment) {
    std::vector<const Statement*> out;
    for (const auto& s : fragment_span(method, fragment)) {
        for_each_statement(s, [&](const Statement& x) { out.push_back(&x); });
    }
    return out;
}

/// Every statement of the method, nested ones included, in source order.
inline std::vector<const Statement*> method_statements(const MethodModel& method) {
    std::vector<const Statement*> out;
    for_each_statement(method.body, [&](const Statement& x) { out.push_back(&x); });
    return out;
}

/// Statements of the method outside the fragment. Ancestors of the
/// fragment's block stay in the remainder; the fragment's subtree does not.
inline std::vector<const Statement*> remaining_statements(const MethodModel& method, const Fragment& fragment) {
    const auto inside = fragment_statements(method, fragment);
    const std::set<const Statement*> excluded(inside.begin(), inside.end());
    std::vector<const Statement*> out;
    for_each_statement(method.body, [&](const Statement& x) {
        if (!excluded.contains(&x)) out.push_back(&x);
    });
    return out;
}

namespace detail {

inline bool is_loop(const Statement& s) {
    return s.kind == StatementKind::For || s.kind == StatementKind::While;
}

inline bool has_broken_jump(const Statement& s, bool in_loop, bool in_breakable) {
    if (s.kind == StatementKind::Break && !in_breakable) return true;
    if (s.kind == StatementKind::Continue && !in_loop) return true;
    const bool loop = in_loop || is_loop(s);
    const bool breakable = in_breakable || is_loop(s) || s.kind == StatementKind::Switch;
    for (const auto& child : s.child_blocks) {
        for (const auto& c : child.statements) {
            if (has_broken_jump(c, loop, breakable)) return true;
        }
    }
    return false;
}

/// Pre-order positions of statements, for "after" and "enclosing" queries.
struct StatementOrder {
    std::vector<const Statement*> order;
    std::vector<std::size_t> subtree_end;  ///< last pre-order index inside each subtree

    explicit StatementOrder(const MethodModel& method) {
        for (const auto& s : method.body.statements) visit(s);
    }

    [[nodiscard]] std::size_t index_of(const Statement* s) const {
        return static_cast<std::size_t>(std::find(order.begin(), order.end(), s) - order.begin());
    }

private:
    void visit(const Statement& s) {
        const std::size_t i = order.size();
        order.push_back(&s);
        subtree_end.push_back(i);
        for (const auto& child : s.child_blocks) {
            for (const auto& c : child.statements) visit(c);
        }
        subtree_end[i] = order.size() - 1;
    }
};

} // namespace detail

/// Locals written (or declared) inside the fragment and used after it:
/// by a later statement, or anywhere in a loop that encloses the fragment.
/// Locals declared inside the fragment count on any later use; others only
/// on a later read. Result follows declaration order.
inline std::vector<std::string> live_out_locals(const MethodModel& method, const Fragment& fragment) {
    const auto span = fragment_span(method, fragment);
    const detail::StatementOrder order(method);
    const std::size_t lo = order.index_of(&span.front());
    const std::size_t hi = order.subtree_end[order.index_of(&span.back())];

    std::set<std::string> written;
    std::set<std::string> declared_inside;
    for (std::size_t i = lo; i <= hi; ++i) {
        const Statement& s = *order.order[i];
        for (const auto& r : s.refs) {
            if (r.kind == ElementKind::LocalVariable && r.writes()) written.insert(r.id);
        }
        for (const auto& d : s.declared) {
            written.insert(d);
            declared_inside.insert(d);
        }
    }

    // Enclosing loops: ancestors of the fragment's block.
    std::vector<std::pair<std::size_t, std::size_t>> loop_ranges;
    const Block* block = &method.body;
    for (const auto& step : fragment.block_path) {
        const Statement& ancestor = block->statements[step.statement];
        if (detail::is_loop(ancestor)) {
            const std::size_t a = order.index_of(&ancestor);
            loop_ranges.emplace_back(a, order.subtree_end[a]);
        }
        block = &ancestor.child_blocks[step.child];
    }

    std::set<std::string> live;
    for (std::size_t i = 0; i < order.order.size(); ++i) {
        if (i >= lo && i <= hi) continue;
        bool relevant = i > hi;
        for (const auto& [a, b] : loop_ranges) relevant = relevant || (i >= a && i <= b);
        if (!relevant) continue;
        for (const auto& r : order.order[i]->refs) {
            if (r.kind != ElementKind::LocalVariable || !written.contains(r.id)) continue;
            if (r.reads() || declared_inside.contains(r.id)) live.insert(r.id);
        }
    }

    std::vector<std::string> out;
    for (const auto& l : method.locals) {
        if (live.contains(l.id)) out.push_back(l.id);
    }
    return out;
}

/// Checks the compilability proxy rules for extracting the fragment.
inline ExtractabilityReport check_extractable(const MethodModel& method, const Fragment& fragment, int min_statements) {
    if (min_statements < 1) throw ContractError("min_statements must be positive");
    const auto span = fragment_span(method, fragment);
    ExtractabilityReport report;

    if (live_out_locals(method, fragment).size() > 1) report.violations.push_back(Violation::MultipleLiveOut);

    bool broken = false;
    bool has_return = false;
    for (const auto& s : span) {
        broken = broken || detail::has_broken_jump(s, false, false);
        for_each_statement(s, [&](const Statement& x) { has_return = has_return || x.kind == StatementKind::Return; });
    }
    if (broken) report.violations.push_back(Violation::BrokenJump);

    const bool ends_body = fragment.block_path.empty() && fragment.end_index + 1 == method.body.statements.size();
    if (has_return && !ends_body) report.violations.push_back(Violation::InteriorReturn);

    if (fragment.size() < static_cast<std::size_t>(min_statements)) report.violations.push_back(Violation::BelowMinSize);

    if (fragment.block_path.empty() && fragment.start_index == 0 && ends_body) {
        report.violations.push_back(Violation::WholeMethod);
    }

    report.extractable = report.violations.empty();
    return report;
}

/// Block paths of the method in pre-order (body first).
inline std::vector<BlockPath> block_paths(const MethodModel& method) {
    std::vector<BlockPath> out;
    BlockPath current;
    auto visit = [&](auto&& self, const Block& block) -> void {
        out.push_back(current);
        for (std::size_t i = 0; i < block.statements.size(); ++i) {
            const auto& s = block.statements[i];
            for (std::size_t c = 0; c < s.child_blocks.size(); ++c) {
                current.push_back(BlockStep{i, c});
                self(self, s.child_blocks[c]);
                current.pop_back();
            }
        }
    };
    visit(visit, method.body);
    return out;
}

/// All extractable fragments, ordered by (block path, start, end).
inline std::vector<Fragment> enumerate_candidates(const MethodModel& method, int min_statements = kDefaultMinStatements) {
    if (min_statements < 1) throw ContractError("min_statements must be positive");
    std::vector<Fragment> out;
    for (const auto& path : block_paths(method)) {
        const Block* block = resolve_block(method.body, path);
        const std::size_t n = block->statements.size();
        for (std::size_t start = 0; start < n; ++start) {
            for (std::size_t end = start + static_cast<std::size_t>(min_statements) - 1; end < n; ++end) {
                Fragment f = make_fragment(method, path, start, end);
                if (check_extractable(method, f, min_statements).extractable) out.push_back(std::move(f));
            }
        }
    }
    return out;
}

/// Locates the fragment whose boundary statements span exactly the given lines.
inline std::optional<Fragment> find_fragment_by_lines(const MethodModel& method, int start_line, int end_line) {
    for (const auto& path : block_paths(method)) {
        const Block* block = resolve_block(method.body, path);
        const auto& stmts = block->statements;
        for (std::size_t s = 0; s < stmts.size(); ++s) {
            if (stmts[s].start_line != start_line) continue;
            for (std::size_t e = s; e < stmts.size(); ++e) {
                if (stmts[e].end_line == end_line) return make_fragment(method, path, s, e);
                if (stmts[e].end_line > end_line) break;
            }
        }
    }
    return std::nullopt;
}

} // namespace emrec
