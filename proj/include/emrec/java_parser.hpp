#pragma once

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
#include <unordered_set>
#include <utility>
#include <vector>

namespace emrec {

namespace detail {

inline const std::unordered_set<std::string_view>& java_lang_types() {
    static const std::unordered_set<std::string_view> names = {
        "String", "Object", "Integer", "Long", "Short", "Byte", "Double", "Float", "Boolean",
        "Character", "Number", "Math", "StrictMath", "System", "StringBuilder", "StringBuffer",
        "CharSequence", "Thread", "Runnable", "Iterable", "Comparable", "Class", "Void", "Enum",
        "Record", "Throwable", "Exception", "Error", "RuntimeException", "AssertionError",
        "IllegalArgumentException", "IllegalStateException", "NullPointerException",
        "IndexOutOfBoundsException", "ArrayIndexOutOfBoundsException", "ArithmeticException",
        "NumberFormatException", "UnsupportedOperationException", "ClassCastException",
        "InterruptedException", "CloneNotSupportedException", "AutoCloseable", "Cloneable",
        "Override", "Deprecated", "SuppressWarnings", "Process", "Runtime",
    };
    return names;
}

inline bool starts_upper(std::string_view s) {
    return !s.empty() && std::isupper(static_cast<unsigned char>(s.front()));
}

/// `Math`, `HashMap` but not constants such as `MAX_SIZE` or `RED`.
inline bool looks_like_type_name(std::string_view s) {
    return starts_upper(s)
        && std::any_of(s.begin(), s.end(), [](char c) { return std::islower(static_cast<unsigned char>(c)); });
}

} // namespace detail

/// Hand-written recursive-descent parser for the supported Java subset.
///
/// Supported: package/import headers, classes, interfaces and simple enums
/// (nested ones too), fields, methods and constructors, the statement kinds
/// of StatementKind, and expressions built from names, literals, calls,
/// object/array creation, casts, ternaries and assignments.
class JavaParser {
public:
    JavaParser(std::string_view text, std::string path) : toks_(tokenize(text)) {
        unit_.path = std::move(path);
        unit_.text = std::string(text);
        int lines = static_cast<int>(std::count(text.begin(), text.end(), '\n'));
        if (!text.empty() && text.back() != '\n') ++lines;
        unit_.line_count = lines;
    }

    SourceUnit parse() {
        if (cur().is("package")) {
            advance();
            unit_.package_name = parse_dotted_name();
            expect(";");
        }
        while (cur().is("import")) {
            advance();
            bool is_static = false;
            if (cur().is("static")) {
                advance();
                is_static = true;
            }
            std::string name = parse_dotted_name();
            if (cur().is(".")) {
                advance();
                expect("*");
                name += ".*";
            }
            expect(";");
            if (!is_static) {
                unit_.imports.push_back(name);
                if (!name.ends_with(".*")) {
                    imports_by_simple_[name.substr(name.rfind('.') + 1)] = name;
                }
            }
        }

        // Top-level members outside any class are accepted so that a bare
        // method (e.g. a wrapped fragment) parses into a one-method unit.
        classes_.push_back(ClassCtx{});
        std::vector<PendingMethod> loose;
        while (cur().kind != TokenKind::End) {
            if (cur().is(";")) {
                advance();
                continue;
            }
            skip_modifiers_and_annotations();
            if (cur().is("class") || cur().is("interface") || cur().is("enum")) {
                parse_type_declaration();
            } else {
                parse_member(loose);
            }
        }
        finish_methods(loose);
        classes_.pop_back();

        std::sort(unit_.methods.begin(), unit_.methods.end(),
                  [](const MethodModel& a, const MethodModel& b) { return a.start_line < b.start_line; });
        return std::move(unit_);
    }

private:
    struct ClassCtx {
        std::string name;
        std::set<std::string> fields;
    };

    struct PendingMethod {
        MethodModel model;
        std::size_t body_index{0};
    };

    struct ParsedType {
        std::string text;
        std::vector<std::pair<std::string, int>> names;  ///< every type name mentioned, with line
    };

    struct ExprResult {
        bool assignment{false};
        int lvalue_ref{-1};  ///< index into current refs when the expression is a plain name
    };

    struct State {
        std::size_t pos;
        int gt_split;
    };

    std::vector<Token> toks_;
    std::size_t pos_{0};
    int gt_split_{0};
    SourceUnit unit_;
    std::map<std::string, std::string> imports_by_simple_;
    std::vector<ClassCtx> classes_;

    // method-level state
    MethodModel* method_{nullptr};
    std::vector<std::map<std::string, std::string>> scopes_;
    std::map<std::string, int> name_counts_;
    std::vector<Statement*> stmt_stack_;

    // -- token access ------------------------------------------------------

    [[nodiscard]] const Token& cur() const { return toks_[pos_]; }
    [[nodiscard]] const Token& peek(std::size_t ahead = 1) const {
        return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
    }
    [[nodiscard]] State save() const { return {pos_, gt_split_}; }
    void restore(State s) {
        pos_ = s.pos;
        gt_split_ = s.gt_split;
    }

    [[noreturn]] void fail(const std::string& message) const {
        const Token& t = cur();
        const std::string near = t.kind == TokenKind::End ? "end of input" : "'" + t.text + "'";
        throw ParseError(message + " near " + near, t.line, t.column);
    }

    /// Lines of the statement's tokens outside its nested statements. Derived
    /// from offsets so that speculative lookahead leaves no trace.
    void settle_own_lines(Statement& s) const {
        s.own_lines.clear();
        auto it = std::lower_bound(toks_.begin(), toks_.end(), s.begin_offset,
                                   [](const Token& t, std::size_t off) { return t.offset < off; });
        for (; it != toks_.end() && it->kind != TokenKind::End && it->offset < s.end_offset; ++it) {
            bool nested = false;
            for (const auto& block : s.child_blocks) {
                for (const auto& c : block.statements) {
                    nested = nested || (it->offset >= c.begin_offset && it->offset < c.end_offset);
                }
            }
            if (!nested && (s.own_lines.empty() || s.own_lines.back() != it->line)) s.own_lines.push_back(it->line);
        }
        std::sort(s.own_lines.begin(), s.own_lines.end());
        s.own_lines.erase(std::unique(s.own_lines.begin(), s.own_lines.end()), s.own_lines.end());
    }

    void note_token(const Token& t) {
        if (stmt_stack_.empty()) return;
        for (Statement* open : stmt_stack_) {
            open->end_line = std::max(open->end_line, t.line);
            open->end_offset = std::max(open->end_offset, t.end_offset());
        }
    }

    const Token& advance() {
        if (cur().kind == TokenKind::End) fail("unexpected end of input");
        const Token& t = toks_[pos_];
        note_token(t);
        ++pos_;
        gt_split_ = 0;
        return t;
    }

    void expect(std::string_view text) {
        if (!cur().is(text)) fail("expected '" + std::string(text) + "'");
        advance();
    }

    bool accept(std::string_view text) {
        if (cur().is(text)) {
            advance();
            return true;
        }
        return false;
    }

    std::string expect_identifier() {
        if (cur().kind != TokenKind::Identifier) fail("expected identifier");
        return advance().text;
    }

    /// Consumes a single `>` out of `>`, `>>` or `>>>`.
    bool accept_closing_angle() {
        const Token& t = cur();
        if (t.kind != TokenKind::Operator) return false;
        const std::string_view text(t.text);
        if (text.size() < 1 || text.find_first_not_of('>') != std::string_view::npos) return false;
        if (static_cast<std::size_t>(gt_split_) + 1 >= text.size()) {
            advance();
        } else {
            ++gt_split_;
        }
        return true;
    }

    std::string parse_dotted_name() {
        std::string name = expect_identifier();
        while (cur().is(".") && peek().kind == TokenKind::Identifier) {
            advance();
            name += "." + advance().text;
        }
        return name;
    }

    void skip_annotation() {
        expect("@");
        parse_dotted_name();
        if (cur().is("(")) skip_balanced("(", ")");
    }

    void skip_modifiers_and_annotations() {
        static const std::unordered_set<std::string_view> modifiers = {
            "public", "private", "protected", "static", "final", "abstract", "native",
            "synchronized", "transient", "volatile", "strictfp", "default",
        };
        for (;;) {
            if (cur().is("@") && !peek().is("interface")) {
                skip_annotation();
            } else if (cur().kind == TokenKind::Keyword && modifiers.contains(cur().text)
                       && !(cur().text == "synchronized" && peek().is("("))) {
                advance();
            } else {
                return;
            }
        }
    }

    void skip_balanced(std::string_view open, std::string_view close) {
        int depth = 0;
        do {
            if (cur().kind == TokenKind::End) fail("unbalanced '" + std::string(open) + "'");
            if (cur().is(open)) ++depth;
            if (cur().is(close)) --depth;
            advance();
        } while (depth > 0);
    }

    void skip_angle_brackets() {
        int depth = 0;
        do {
            if (cur().kind == TokenKind::End) fail("unbalanced '<'");
            if (cur().is("<")) {
                ++depth;
                advance();
            } else if (accept_closing_angle()) {
                --depth;
            } else {
                advance();
            }
        } while (depth > 0);
    }

    // -- declarations ------------------------------------------------------

    void parse_type_declaration() {
        const bool is_enum = cur().is("enum");
        advance();
        ClassCtx ctx;
        const std::string simple = expect_identifier();
        ctx.name = classes_.back().name.empty() ? simple : classes_.back().name + "." + simple;
        if (cur().is("<")) skip_angle_brackets();
        while (!cur().is("{")) {
            if (cur().kind == TokenKind::End) fail("expected class body");
            if (cur().is("<")) {
                skip_angle_brackets();
            } else {
                advance();
            }
        }
        expect("{");
        classes_.push_back(std::move(ctx));
        if (is_enum) skip_enum_constants();

        std::vector<PendingMethod> pending;
        while (!cur().is("}")) {
            if (cur().kind == TokenKind::End) fail("unterminated class body");
            if (cur().is(";")) {
                advance();
                continue;
            }
            if (cur().is("{") || (cur().is("static") && peek().is("{"))) {
                accept("static");
                skip_balanced("{", "}");
                continue;
            }
            skip_modifiers_and_annotations();
            if (cur().is("class") || cur().is("interface") || cur().is("enum")) {
                parse_type_declaration();
            } else {
                parse_member(pending);
            }
        }
        expect("}");
        finish_methods(pending);
        classes_.pop_back();
    }

    void skip_enum_constants() {
        int depth = 0;
        while (cur().kind != TokenKind::End) {
            if (depth == 0 && cur().is(";")) {
                advance();
                return;
            }
            if (depth == 0 && cur().is("}")) return;
            if (cur().is("(") || cur().is("{")) ++depth;
            if (cur().is(")") || cur().is("}")) --depth;
            advance();
        }
    }

    void parse_member(std::vector<PendingMethod>& pending) {
        const int start_line = cur().line;
        const std::size_t start_offset = cur().offset;
        if (cur().is("<")) skip_angle_brackets();

        std::string return_type;
        std::string name;
        const ClassCtx& cls = classes_.back();
        const std::string simple_class = cls.name.substr(cls.name.rfind('.') + 1);
        if (cur().kind == TokenKind::Identifier && cur().text == simple_class && peek().is("(")) {
            name = advance().text;
            return_type = "void";
        } else {
            auto type = parse_type();
            if (!type) fail("expected member declaration");
            return_type = type->text;
            name = expect_identifier();
        }

        if (!cur().is("(")) {
            parse_field_declarators(name);
            return;
        }

        PendingMethod pm;
        pm.model.name = name;
        pm.model.class_name = classes_.back().name;
        pm.model.return_type = return_type;
        pm.model.start_line = start_line;
        expect("(");
        while (!cur().is(")")) {
            while (cur().is("final") || cur().is("@")) {
                if (cur().is("@")) {
                    skip_annotation();
                } else {
                    advance();
                }
            }
            auto type = parse_type();
            if (!type) fail("expected parameter type");
            std::string type_text = type->text;
            if (accept("...")) type_text += "[]";
            Parameter p;
            p.name = expect_identifier();
            while (cur().is("[") && peek().is("]")) {
                advance();
                advance();
                type_text += "[]";
            }
            p.type = type_text;
            pm.model.parameters.push_back(std::move(p));
            if (!accept(",")) break;
        }
        expect(")");
        while (cur().is("[") && peek().is("]")) {
            advance();
            advance();
        }
        if (accept("throws")) {
            parse_dotted_name();
            while (accept(",")) parse_dotted_name();
        }
        if (accept(";")) return;  // abstract or interface method
        if (!cur().is("{")) fail("expected method body");
        pm.body_index = pos_;
        pm.model.body_offset = cur().offset;
        pm.model.source_offset = start_offset;
        skip_balanced("{", "}");
        pm.model.end_line = toks_[pos_ - 1].line;
        pm.model.source = unit_.text.substr(start_offset, toks_[pos_ - 1].end_offset() - start_offset);
        pending.push_back(std::move(pm));
    }

    void parse_field_declarators(const std::string& first) {
        classes_.back().fields.insert(first);
        int depth = 0;
        while (cur().kind != TokenKind::End) {
            if (depth == 0 && cur().is(";")) {
                advance();
                return;
            }
            if (cur().is("(") || cur().is("{") || cur().is("[")) ++depth;
            if (cur().is(")") || cur().is("}") || cur().is("]")) --depth;
            if (depth == 0 && cur().is(",") && peek().kind == TokenKind::Identifier
                && (peek(2).is("=") || peek(2).is(",") || peek(2).is(";") || peek(2).is("["))) {
                advance();
                classes_.back().fields.insert(cur().text);
            }
            advance();
        }
        fail("unterminated field declaration");
    }

    void finish_methods(std::vector<PendingMethod>& pending) {
        const State resume = save();
        for (auto& pm : pending) {
            pos_ = pm.body_index;
            gt_split_ = 0;
            parse_method_body(pm.model);
            unit_.methods.push_back(std::move(pm.model));
        }
        restore(resume);
    }

    void parse_method_body(MethodModel& model) {
        method_ = &model;
        scopes_.clear();
        name_counts_.clear();
        scopes_.emplace_back();
        for (const auto& p : model.parameters) declare_local(p.name, p.type, model.start_line, true);

        expect("{");
        model.body.depth = 0;
        while (!cur().is("}")) {
            if (cur().kind == TokenKind::End) fail("unterminated method body");
            if (auto s = parse_statement(0)) model.body.statements.push_back(std::move(*s));
        }
        expect("}");
        model.loc = std::max(1, count_lines(model.body));
        scopes_.clear();
        method_ = nullptr;
    }

    // -- scopes and references ---------------------------------------------

    std::string declare_local(const std::string& name, const std::string& type, int line, bool parameter) {
        const int n = ++name_counts_[name];
        std::string id = n == 1 ? name : name + "#" + std::to_string(n);
        scopes_.back()[name] = id;
        method_->locals.push_back(LocalDecl{id, name, type, line, parameter});
        if (!parameter && !stmt_stack_.empty()) stmt_stack_.back()->declared.push_back(id);
        return id;
    }

    [[nodiscard]] std::optional<std::string> lookup_local(const std::string& name) const {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            if (auto f = it->find(name); f != it->end()) return f->second;
        }
        return std::nullopt;
    }

    [[nodiscard]] bool is_field(const std::string& name) const {
        for (auto it = classes_.rbegin(); it != classes_.rend(); ++it) {
            if (it->fields.contains(name)) return true;
        }
        return false;
    }

    int emit(ElementKind kind, const std::string& id, int line, Access access = Access::Read) {
        if (stmt_stack_.empty()) return -1;
        auto& refs = stmt_stack_.back()->refs;
        const int index = static_cast<int>(refs.size());
        refs.push_back(ElementRef{kind, id, line, access});
        if (kind == ElementKind::LocalVariable) {
            refs.push_back(ElementRef{ElementKind::TypedElement, "local:" + id, line, access});
        } else if (kind == ElementKind::Field) {
            refs.push_back(ElementRef{ElementKind::TypedElement, "field:" + id, line, access});
        }
        return index;
    }

    void set_access(int ref_index, Access access) {
        if (ref_index < 0 || stmt_stack_.empty()) return;
        auto& refs = stmt_stack_.back()->refs;
        refs[static_cast<std::size_t>(ref_index)].access = access;
        const auto kind = refs[static_cast<std::size_t>(ref_index)].kind;
        if (kind == ElementKind::LocalVariable || kind == ElementKind::Field) {
            refs[static_cast<std::size_t>(ref_index) + 1].access = access;
        }
    }

    /// Qualified name of a type as written; primitives stay bare.
    [[nodiscard]] std::string resolve_type(const std::string& written) const {
        if (is_primitive_type(written)) return written;
        const auto dot = written.find('.');
        if (dot != std::string::npos && !detail::starts_upper(written)) return written;
        const std::string head = written.substr(0, dot);
        const std::string tail = dot == std::string::npos ? "" : written.substr(dot);
        if (auto it = imports_by_simple_.find(head); it != imports_by_simple_.end()) return it->second + tail;
        if (detail::java_lang_types().contains(head)) return "java.lang." + written;
        return unit_.package_name.empty() ? written : unit_.package_name + "." + written;
    }

    [[nodiscard]] std::string package_of(const std::string& written) const {
        if (is_primitive_type(written)) return {};
        const std::string qualified = resolve_type(written);
        // Package = leading lowercase segments.
        std::string pkg;
        std::size_t start = 0;
        while (start < qualified.size()) {
            const auto dot = qualified.find('.', start);
            if (dot == std::string::npos) break;
            const std::string seg = qualified.substr(start, dot - start);
            if (detail::starts_upper(seg)) break;
            pkg += (pkg.empty() ? "" : ".") + seg;
            start = dot + 1;
        }
        return pkg;
    }

    void emit_type_name(const std::string& written, int line) {
        emit(ElementKind::Type, resolve_type(written), line);
        if (const std::string pkg = package_of(written); !pkg.empty()) emit(ElementKind::Package, pkg, line);
    }

    void emit_type(const ParsedType& type) {
        for (const auto& [name, line] : type.names) emit_type_name(name, line);
    }

    // -- types ---------------------------------------------------------------

    /// Parses a type at the current position without emitting references.
    /// Restores the position and returns nullopt when no type is present.
    std::optional<ParsedType> parse_type() {
        const State start = save();
        ParsedType out;
        if (!parse_type_into(out)) {
            restore(start);
            return std::nullopt;
        }
        return out;
    }

    bool parse_type_into(ParsedType& out) {
        const Token& t = cur();
        if (t.kind == TokenKind::Keyword && is_primitive_type(t.text)) {
            out.names.emplace_back(t.text, t.line);
            out.text += advance().text;
        } else if (t.kind == TokenKind::Identifier) {
            const int line = t.line;
            std::string name = advance().text;
            while (cur().is(".") && peek().kind == TokenKind::Identifier) {
                advance();
                name += "." + advance().text;
            }
            out.names.emplace_back(name, line);
            out.text += name;
            if (cur().is("<")) {
                advance();
                out.text += "<";
                if (!accept_closing_angle()) {
                    for (;;) {
                        if (cur().is("?")) {
                            advance();
                            out.text += "?";
                            if (cur().is("extends") || cur().is("super")) {
                                out.text += " " + advance().text + " ";
                                if (!parse_type_into(out)) return false;
                            }
                        } else if (!parse_type_into(out)) {
                            return false;
                        }
                        if (!accept(",")) break;
                        out.text += ",";
                    }
                    if (!accept_closing_angle()) return false;
                }
                out.text += ">";
            }
        } else {
            return false;
        }
        while (cur().is("[") && peek().is("]")) {
            advance();
            advance();
            out.text += "[]";
        }
        return true;
    }

    // -- statements ----------------------------------------------------------

    struct StatementScope {
        JavaParser& parser;
        Statement& stmt;
        StatementScope(JavaParser& p, Statement& s, StatementKind kind) : parser(p), stmt(s) {
            stmt.kind = kind;
            stmt.start_line = p.cur().line;
            stmt.end_line = p.cur().line;
            stmt.begin_offset = p.cur().offset;
            stmt.end_offset = p.cur().offset;
            p.stmt_stack_.push_back(&stmt);
        }
        ~StatementScope() {
            parser.stmt_stack_.pop_back();
            parser.settle_own_lines(stmt);
        }
        StatementScope(const StatementScope&) = delete;
        StatementScope& operator=(const StatementScope&) = delete;
    };

    struct LocalScope {
        JavaParser& parser;
        explicit LocalScope(JavaParser& p) : parser(p) { p.scopes_.emplace_back(); }
        ~LocalScope() { parser.scopes_.pop_back(); }
        LocalScope(const LocalScope&) = delete;
        LocalScope& operator=(const LocalScope&) = delete;
    };

    Block parse_block(int depth) {
        Block block;
        block.depth = depth;
        LocalScope scope(*this);
        expect("{");
        while (!cur().is("}")) {
            if (cur().kind == TokenKind::End) fail("unterminated block");
            if (auto s = parse_statement(depth)) block.statements.push_back(std::move(*s));
        }
        expect("}");
        return block;
    }

    /// Body of if/for/while/else: a braced block, or a single statement
    /// wrapped into a block of its own.
    Block parse_body(int depth) {
        if (cur().is("{")) return parse_block(depth);
        Block block;
        block.depth = depth;
        LocalScope scope(*this);
        if (auto s = parse_statement(depth)) block.statements.push_back(std::move(*s));
        return block;
    }

    bool looks_like_declaration() {
        const State start = save();
        while (cur().is("final")) advance();
        bool result = false;
        if (auto type = parse_type()) {
            result = cur().kind == TokenKind::Identifier
                && (peek().is("=") || peek().is(";") || peek().is(",") || peek().is("[") || peek().is(":"));
        }
        restore(start);
        return result;
    }

    std::optional<Statement> parse_statement(int depth) {
        if (cur().is(";")) {
            advance();
            return std::nullopt;
        }
        Statement stmt;
        const Token& t = cur();

        if (t.is("{")) {
            StatementScope s(*this, stmt, StatementKind::Block);
            stmt.child_blocks.push_back(parse_block(depth + 1));
        } else if (t.is("if")) {
            StatementScope s(*this, stmt, StatementKind::If);
            advance();
            expect("(");
            parse_expression();
            expect(")");
            stmt.child_blocks.push_back(parse_body(depth + 1));
            if (accept("else")) stmt.child_blocks.push_back(parse_body(depth + 1));
        } else if (t.is("for")) {
            StatementScope s(*this, stmt, StatementKind::For);
            parse_for(stmt, depth);
        } else if (t.is("while")) {
            StatementScope s(*this, stmt, StatementKind::While);
            advance();
            expect("(");
            parse_expression();
            expect(")");
            stmt.child_blocks.push_back(parse_body(depth + 1));
        } else if (t.is("do")) {
            StatementScope s(*this, stmt, StatementKind::While);
            advance();
            stmt.child_blocks.push_back(parse_body(depth + 1));
            expect("while");
            expect("(");
            parse_expression();
            expect(")");
            expect(";");
        } else if (t.is("switch")) {
            StatementScope s(*this, stmt, StatementKind::Switch);
            parse_switch(stmt, depth);
        } else if (t.is("try")) {
            StatementScope s(*this, stmt, StatementKind::Try);
            parse_try(stmt, depth);
        } else if (t.is("return")) {
            StatementScope s(*this, stmt, StatementKind::Return);
            advance();
            if (!cur().is(";")) parse_expression();
            expect(";");
        } else if (t.is("break") || t.is("continue")) {
            StatementScope s(*this, stmt, t.is("break") ? StatementKind::Break : StatementKind::Continue);
            advance();
            if (cur().kind == TokenKind::Identifier) fail("labeled jumps are not supported");
            expect(";");
        } else if (t.is("throw")) {
            StatementScope s(*this, stmt, StatementKind::Throw);
            advance();
            parse_expression();
            expect(";");
        } else if (t.is("assert")) {
            StatementScope s(*this, stmt, StatementKind::Assert);
            advance();
            parse_expression();
            if (accept(":")) parse_expression();
            expect(";");
        } else if (t.is("class") || t.is("interface") || t.is("enum") || t.is("synchronized")
                   || t.is("@") || t.is("else") || t.is("case") || t.is("default")) {
            fail("unsupported statement");
        } else if (t.kind == TokenKind::Identifier && peek().is(":")) {
            fail("labeled statements are not supported");
        } else if (looks_like_declaration()) {
            StatementScope s(*this, stmt, StatementKind::Declaration);
            parse_local_declaration();
            expect(";");
        } else {
            StatementScope s(*this, stmt, StatementKind::Expression);
            const ExprResult r = parse_expression();
            if (r.assignment) stmt.kind = StatementKind::Assignment;
            expect(";");
        }
        return stmt;
    }

    void parse_local_declaration() {
        while (accept("final")) {}
        auto type = parse_type();
        if (!type) fail("expected type");
        emit_type(*type);
        for (;;) {
            const Token& name_tok = cur();
            const int line = name_tok.line;
            const std::string name = expect_identifier();
            std::string type_text = type->text;
            while (cur().is("[") && peek().is("]")) {
                advance();
                advance();
                type_text += "[]";
            }
            bool initialized = false;
            if (accept("=")) {
                if (cur().is("{")) {
                    parse_array_initializer();
                } else {
                    parse_expression();
                }
                initialized = true;
            }
            const std::string id = declare_local(name, type_text, line, false);
            if (initialized) emit(ElementKind::LocalVariable, id, line, Access::Write);
            if (!accept(",")) break;
        }
    }

    void parse_array_initializer() {
        expect("{");
        while (!cur().is("}")) {
            if (cur().is("{")) {
                parse_array_initializer();
            } else {
                parse_expression();
            }
            if (!accept(",")) break;
        }
        expect("}");
    }

    void parse_for(Statement& stmt, int depth) {
        advance();
        expect("(");
        LocalScope scope(*this);

        // for-each
        {
            const State start = save();
            while (accept("final")) {}
            auto type = parse_type();
            if (type && cur().kind == TokenKind::Identifier && peek().is(":")) {
                emit_type(*type);
                const int line = cur().line;
                const std::string name = advance().text;
                advance();  // ':'
                parse_expression();
                const std::string id = declare_local(name, type->text, line, false);
                emit(ElementKind::LocalVariable, id, line, Access::Write);
                expect(")");
                stmt.child_blocks.push_back(parse_body(depth + 1));
                return;
            }
            restore(start);
        }

        if (!cur().is(";")) {
            if (looks_like_declaration()) {
                parse_local_declaration();
            } else {
                parse_expression();
                while (accept(",")) parse_expression();
            }
        }
        expect(";");
        if (!cur().is(";")) parse_expression();
        expect(";");
        if (!cur().is(")")) {
            parse_expression();
            while (accept(",")) parse_expression();
        }
        expect(")");
        stmt.child_blocks.push_back(parse_body(depth + 1));
    }

    void parse_switch(Statement& stmt, int depth) {
        advance();
        expect("(");
        parse_expression();
        expect(")");
        expect("{");
        LocalScope scope(*this);
        while (!cur().is("}")) {
            if (cur().kind == TokenKind::End) fail("unterminated switch");
            if (!cur().is("case") && !cur().is("default")) fail("expected case label");
            while (cur().is("case") || cur().is("default")) {
                if (accept("default")) {
                    if (cur().is("->")) fail("arrow case labels are not supported");
                    expect(":");
                } else {
                    advance();
                    parse_ternary();
                    while (accept(",")) parse_ternary();
                    if (cur().is("->")) fail("arrow case labels are not supported");
                    expect(":");
                }
            }
            Block group;
            group.depth = depth + 1;
            while (!cur().is("case") && !cur().is("default") && !cur().is("}")) {
                if (cur().kind == TokenKind::End) fail("unterminated switch");
                if (auto s = parse_statement(depth + 1)) group.statements.push_back(std::move(*s));
            }
            stmt.child_blocks.push_back(std::move(group));
        }
        expect("}");
    }

    void parse_try(Statement& stmt, int depth) {
        advance();
        LocalScope resources(*this);
        if (accept("(")) {
            while (!cur().is(")")) {
                parse_local_declaration();
                if (!accept(";")) break;
            }
            expect(")");
        }
        stmt.child_blocks.push_back(parse_block(depth + 1));
        bool handled = false;
        while (cur().is("catch")) {
            handled = true;
            advance();
            expect("(");
            LocalScope catch_scope(*this);
            while (accept("final")) {}
            auto type = parse_type();
            if (!type) fail("expected exception type");
            emit_type(*type);
            std::string type_text = type->text;
            while (accept("|")) {
                auto alt = parse_type();
                if (!alt) fail("expected exception type");
                emit_type(*alt);
                type_text += "|" + alt->text;
            }
            const int line = cur().line;
            const std::string name = expect_identifier();
            const std::string id = declare_local(name, type_text, line, false);
            emit(ElementKind::LocalVariable, id, line, Access::Write);
            expect(")");
            stmt.child_blocks.push_back(parse_block(depth + 1));
        }
        if (accept("finally")) {
            handled = true;
            stmt.child_blocks.push_back(parse_block(depth + 1));
        }
        if (!handled && stmt.declared.empty()) fail("try without catch or finally");
    }

    // -- expressions ---------------------------------------------------------

    static bool is_assignment_op(const Token& t) {
        static const std::unordered_set<std::string_view> ops = {
            "=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>=",
        };
        return t.kind == TokenKind::Operator && ops.contains(t.text);
    }

    Statement& current_statement() {
        if (stmt_stack_.empty()) fail("expression outside statement");
        return *stmt_stack_.back();
    }

    ExprResult parse_expression() {
        ExprResult lhs = parse_ternary();
        if (is_assignment_op(cur()) && gt_split_ == 0) {
            const bool compound = cur().text != "=";
            advance();
            set_access(lhs.lvalue_ref, compound ? Access::ReadWrite : Access::Write);
            ++current_statement().assignments;
            if (cur().is("{")) {
                parse_array_initializer();
            } else {
                parse_expression();
            }
            return ExprResult{true, -1};
        }
        return lhs;
    }

    ExprResult parse_ternary() {
        ExprResult cond = parse_binary(1);
        if (cur().is("?")) {
            advance();
            ++current_statement().conditionals;
            parse_expression();
            expect(":");
            parse_ternary();
            return ExprResult{};
        }
        return cond;
    }

    static int binary_precedence(const Token& t) {
        if (t.kind == TokenKind::Keyword) return t.text == "instanceof" ? 7 : 0;
        if (t.kind != TokenKind::Operator) return 0;
        const std::string& op = t.text;
        if (op == "||") return 1;
        if (op == "&&") return 2;
        if (op == "|") return 3;
        if (op == "^") return 4;
        if (op == "&") return 5;
        if (op == "==" || op == "!=") return 6;
        if (op == "<" || op == ">" || op == "<=" || op == ">=") return 7;
        if (op == "<<" || op == ">>" || op == ">>>") return 8;
        if (op == "+" || op == "-") return 9;
        if (op == "*" || op == "/" || op == "%") return 10;
        return 0;
    }

    ExprResult parse_binary(int min_prec) {
        ExprResult left = parse_unary();
        for (;;) {
            const int prec = gt_split_ == 0 ? binary_precedence(cur()) : 0;
            if (prec == 0 || prec < min_prec) return left;
            const bool type_test = cur().is("instanceof");
            advance();
            if (type_test) {
                accept("final");
                auto type = parse_type();
                if (!type) fail("expected type after instanceof");
                emit_type(*type);
                if (cur().kind == TokenKind::Identifier) fail("instanceof patterns are not supported");
            } else {
                parse_binary(prec + 1);
            }
            left = ExprResult{};
        }
    }

    bool starts_cast_operand() const {
        const Token& t = cur();
        if (t.kind == TokenKind::Identifier || t.is_literal()) return true;
        return t.is("(") || t.is("!") || t.is("~") || t.is("this") || t.is("new") || t.is("super");
    }

    ExprResult parse_unary() {
        const Token& t = cur();
        if (t.is("++") || t.is("--")) {
            advance();
            ExprResult operand = parse_unary();
            set_access(operand.lvalue_ref, Access::ReadWrite);
            return ExprResult{};
        }
        if (t.is("+") || t.is("-") || t.is("!") || t.is("~")) {
            advance();
            parse_unary();
            return ExprResult{};
        }
        if (t.is("(")) {
            const State start = save();
            advance();
            auto type = parse_type();
            if (type && cur().is(")")) {
                const bool primitive = type->names.size() == 1 && is_primitive_type(type->names.front().first)
                    && type->text.find('[') == std::string::npos;
                advance();
                if (primitive || starts_cast_operand()) {
                    emit_type(*type);
                    parse_unary();
                    return ExprResult{};
                }
            }
            restore(start);
        }
        return parse_postfix(parse_primary());
    }

    void parse_arguments() {
        expect("(");
        while (!cur().is(")")) {
            parse_expression();
            if (!accept(",")) break;
        }
        expect(")");
    }

    ExprResult parse_primary() {
        const Token& t = cur();
        if (t.is_literal()) {
            advance();
            ++current_statement().literals;
            return ExprResult{};
        }
        if (t.is("(")) {
            advance();
            ExprResult inner = parse_expression();
            expect(")");
            return ExprResult{false, inner.assignment ? -1 : inner.lvalue_ref};
        }
        if (t.is("this") || t.is("super")) {
            advance();
            if (cur().is("(")) {
                ++current_statement().invocations;
                parse_arguments();
                return ExprResult{};
            }
            if (!cur().is(".")) return ExprResult{};
            advance();
            const int line = cur().line;
            const std::string member = expect_identifier();
            if (cur().is("(")) {
                emit(ElementKind::Method, member, line, Access::Call);
                ++current_statement().invocations;
                parse_arguments();
                return ExprResult{};
            }
            return ExprResult{false, emit(ElementKind::Field, member, line)};
        }
        if (t.is("new")) {
            advance();
            ParsedType type;
            if (!parse_type_base(type)) fail("expected type after new");
            emit_type(type);
            if (cur().is("[")) {
                while (accept("[")) {
                    if (!cur().is("]")) parse_expression();
                    expect("]");
                }
                if (cur().is("{")) parse_array_initializer();
            } else {
                parse_arguments();
                if (cur().is("{")) fail("anonymous classes are not supported");
            }
            return ExprResult{};
        }
        if (t.kind == TokenKind::Keyword && is_primitive_type(t.text)) {
            // int.class, int[].class
            ParsedType type;
            parse_type_into(type);
            emit_type(type);
            expect(".");
            expect("class");
            return ExprResult{};
        }
        if (t.kind == TokenKind::Identifier) {
            const int line = t.line;
            const std::string name = advance().text;
            if (cur().is("->")) fail("lambdas are not supported");
            if (cur().is("(")) {
                emit(ElementKind::Method, name, line, Access::Call);
                ++current_statement().invocations;
                parse_arguments();
                return ExprResult{};
            }
            if (auto local = lookup_local(name)) return ExprResult{false, emit(ElementKind::LocalVariable, *local, line)};
            if (is_field(name)) return ExprResult{false, emit(ElementKind::Field, name, line)};
            if (detail::looks_like_type_name(name)) {
                // Type used as a qualifier: Math.max, Color.RED, Foo.class, Foo[].class
                if (cur().is("[") && peek().is("]")) {
                    while (cur().is("[") && peek().is("]")) {
                        advance();
                        advance();
                    }
                }
                emit_type_name(name, line);
                return ExprResult{};
            }
            return ExprResult{false, emit(ElementKind::Field, name, line)};
        }
        if (t.is("->") || t.is("::")) fail("lambdas and method references are not supported");
        fail("unexpected token in expression");
    }

    /// Type after `new`: name with optional type arguments (diamond allowed), no dims.
    bool parse_type_base(ParsedType& out) {
        const Token& t = cur();
        if (t.kind == TokenKind::Keyword && is_primitive_type(t.text)) {
            out.names.emplace_back(t.text, t.line);
            out.text = advance().text;
            return true;
        }
        if (t.kind != TokenKind::Identifier) return false;
        const int line = t.line;
        std::string name = advance().text;
        while (cur().is(".") && peek().kind == TokenKind::Identifier) {
            advance();
            name += "." + advance().text;
        }
        out.names.emplace_back(name, line);
        out.text = name;
        if (cur().is("<")) {
            advance();
            if (!accept_closing_angle()) {
                for (;;) {
                    if (cur().is("?")) {
                        advance();
                        if (cur().is("extends") || cur().is("super")) {
                            advance();
                            if (!parse_type_into(out)) return false;
                        }
                    } else if (!parse_type_into(out)) {
                        return false;
                    }
                    if (!accept(",")) break;
                }
                if (!accept_closing_angle()) fail("expected '>'");
            }
        }
        return true;
    }

    ExprResult parse_postfix(ExprResult base) {
        for (;;) {
            if (gt_split_ != 0) return base;
            if (cur().is(".")) {
                advance();
                if (accept("class")) {
                    base = ExprResult{};
                    continue;
                }
                if (cur().is("new")) fail("qualified instance creation is not supported");
                if (cur().is("<")) fail("explicit generic invocations are not supported");
                const int line = cur().line;
                const std::string member = expect_identifier();
                if (cur().is("(")) {
                    emit(ElementKind::Method, member, line, Access::Call);
                    ++current_statement().invocations;
                    parse_arguments();
                    base = ExprResult{};
                } else {
                    base = ExprResult{false, emit(ElementKind::Field, member, line)};
                }
            } else if (cur().is("[")) {
                advance();
                parse_expression();
                expect("]");
                base = ExprResult{};
            } else if (cur().is("++") || cur().is("--")) {
                advance();
                set_access(base.lvalue_ref, Access::ReadWrite);
                base = ExprResult{};
            } else if (cur().is("::")) {
                fail("method references are not supported");
            } else {
                return base;
            }
        }
    }
};

/// Parses Java source text into a statement-level model.
/// @throws ParseError on malformed or unsupported syntax.
inline SourceUnit parse_source(std::string_view text, std::string path = {}) {
    return JavaParser(text, std::move(path)).parse();
}

} // namespace emrec
