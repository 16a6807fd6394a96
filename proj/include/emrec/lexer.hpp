#pragma once

#include "emrec/error.hpp"

#include <array>
#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace emrec {

enum class TokenKind {
    Identifier,
    Keyword,
    IntLiteral,
    FloatLiteral,
    StringLiteral,
    CharLiteral,
    BoolLiteral,
    NullLiteral,
    Operator,
    End,
};

struct Token {
    TokenKind kind{TokenKind::End};
    std::string text;
    int line{0};
    int column{0};
    std::size_t offset{0};  ///< byte offset of the first character
    std::size_t length{0};

    [[nodiscard]] bool is_literal() const noexcept {
        return kind == TokenKind::IntLiteral || kind == TokenKind::FloatLiteral
            || kind == TokenKind::StringLiteral || kind == TokenKind::CharLiteral
            || kind == TokenKind::BoolLiteral || kind == TokenKind::NullLiteral;
    }
    [[nodiscard]] bool is(std::string_view s) const noexcept {
        return (kind == TokenKind::Operator || kind == TokenKind::Keyword) && text == s;
    }
    [[nodiscard]] std::size_t end_offset() const noexcept { return offset + length; }
};

inline bool is_java_keyword(std::string_view word) {
    static const std::unordered_set<std::string_view> keywords = {
        "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class",
        "const", "continue", "default", "do", "double", "else", "enum", "extends", "final",
        "finally", "float", "for", "goto", "if", "implements", "import", "instanceof", "int",
        "interface", "long", "native", "new", "package", "private", "protected", "public",
        "return", "short", "static", "strictfp", "super", "switch", "synchronized", "this",
        "throw", "throws", "transient", "try", "void", "volatile", "while",
    };
    return keywords.contains(word);
}

inline bool is_primitive_type(std::string_view word) {
    return word == "int" || word == "long" || word == "short" || word == "byte" || word == "char"
        || word == "boolean" || word == "float" || word == "double" || word == "void";
}

/// Splits Java source into tokens. Comments and whitespace are dropped.
class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    std::vector<Token> tokenize() {
        std::vector<Token> out;
        for (;;) {
            skip_trivia();
            if (pos_ >= text_.size()) {
                Token end;
                end.kind = TokenKind::End;
                end.line = line_;
                end.column = column_;
                end.offset = pos_;
                out.push_back(end);
                return out;
            }
            out.push_back(next_token());
        }
    }

private:
    std::string_view text_;
    std::size_t pos_{0};
    int line_{1};
    int column_{1};

    [[nodiscard]] char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
    }

    void bump() {
        if (text_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    void skip_trivia() {
        while (pos_ < text_.size()) {
            const char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f') {
                bump();
            } else if (c == '/' && peek(1) == '/') {
                while (pos_ < text_.size() && peek() != '\n') bump();
            } else if (c == '/' && peek(1) == '*') {
                const int line = line_;
                const int column = column_;
                bump();
                bump();
                while (pos_ < text_.size() && !(peek() == '*' && peek(1) == '/')) bump();
                if (pos_ >= text_.size()) throw ParseError("unterminated block comment", line, column);
                bump();
                bump();
            } else {
                return;
            }
        }
    }

    static bool ident_start(char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$'
            || static_cast<unsigned char>(c) >= 0x80;
    }
    static bool ident_part(char c) {
        return ident_start(c) || std::isdigit(static_cast<unsigned char>(c));
    }

    Token next_token() {
        Token tok;
        tok.line = line_;
        tok.column = column_;
        tok.offset = pos_;
        const char c = peek();

        if (ident_start(c)) {
            while (pos_ < text_.size() && ident_part(peek())) bump();
            tok.text = std::string(text_.substr(tok.offset, pos_ - tok.offset));
            if (tok.text == "true" || tok.text == "false") {
                tok.kind = TokenKind::BoolLiteral;
            } else if (tok.text == "null") {
                tok.kind = TokenKind::NullLiteral;
            } else if (is_java_keyword(tok.text)) {
                tok.kind = TokenKind::Keyword;
            } else {
                tok.kind = TokenKind::Identifier;
            }
        } else if (std::isdigit(static_cast<unsigned char>(c))
                   || (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
            lex_number(tok);
        } else if (c == '"') {
            lex_quoted(tok, '"');
            tok.kind = TokenKind::StringLiteral;
        } else if (c == '\'') {
            lex_quoted(tok, '\'');
            tok.kind = TokenKind::CharLiteral;
        } else {
            lex_operator(tok);
        }
        tok.length = pos_ - tok.offset;
        return tok;
    }

    void lex_number(Token& tok) {
        bool is_float = false;
        if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X' || peek(1) == 'b' || peek(1) == 'B')) {
            bump();
            bump();
            while (std::isxdigit(static_cast<unsigned char>(peek())) || peek() == '_') bump();
        } else {
            while (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '_') bump();
            if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
                is_float = true;
                bump();
                while (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '_') bump();
            } else if (peek() == '.' && !ident_start(peek(1))) {
                is_float = true;
                bump();
            }
            if (peek() == 'e' || peek() == 'E') {
                is_float = true;
                bump();
                if (peek() == '+' || peek() == '-') bump();
                while (std::isdigit(static_cast<unsigned char>(peek()))) bump();
            }
        }
        const char suffix = peek();
        if (suffix == 'f' || suffix == 'F' || suffix == 'd' || suffix == 'D') {
            is_float = true;
            bump();
        } else if (suffix == 'l' || suffix == 'L') {
            bump();
        }
        tok.kind = is_float ? TokenKind::FloatLiteral : TokenKind::IntLiteral;
        tok.text = std::string(text_.substr(tok.offset, pos_ - tok.offset));
    }

    void lex_quoted(Token& tok, char quote) {
        bump();
        while (pos_ < text_.size() && peek() != quote) {
            if (peek() == '\n') throw ParseError("unterminated literal", tok.line, tok.column);
            if (peek() == '\\') bump();
            if (pos_ < text_.size()) bump();
        }
        if (pos_ >= text_.size()) throw ParseError("unterminated literal", tok.line, tok.column);
        bump();
        tok.text = std::string(text_.substr(tok.offset, pos_ - tok.offset));
    }

    void lex_operator(Token& tok) {
        static constexpr std::array<std::string_view, 33> multi = {
            ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||",
            "==",   "!=",  "<=",  ">=",  "+=",  "-=", "*=", "/=", "%=", "&=", "|=",
            "^=",   "<<",  ">>",  "@",   "?",   ":",  ";",  ",",  ".",  "(",  ")",
        };
        const std::string_view rest = text_.substr(pos_);
        for (const auto op : multi) {
            if (rest.starts_with(op)) {
                for (std::size_t i = 0; i < op.size(); ++i) bump();
                tok.kind = TokenKind::Operator;
                tok.text = std::string(op);
                return;
            }
        }
        static constexpr std::string_view singles = "{}[]<>=+-*/%!~&|^";
        if (singles.find(peek()) == std::string_view::npos) {
            throw ParseError(std::string("unexpected character '") + peek() + "'", line_, column_);
        }
        tok.kind = TokenKind::Operator;
        tok.text = std::string(1, peek());
        bump();
    }
};

inline std::vector<Token> tokenize(std::string_view text) {
    return Lexer(text).tokenize();
}

} // namespace emrec
