#include "rpys/script.hpp"

#include <fmt/format.h>

#include <cerrno>
#include <charconv>
#include <cstdlib>

namespace rpys::script {

const Value* Command::find(std::string_view key) const {
    for (const auto& a : args)
        if (a.key == key) return &a.value;
    return nullptr;
}

std::string caret_excerpt(std::string_view source, std::size_t line, std::size_t column) {
    std::size_t start = 0;
    for (std::size_t l = 1; l < line; ++l) {
        auto nl = source.find('\n', start);
        if (nl == std::string_view::npos) return {};
        start = nl + 1;
    }
    auto end = source.find('\n', start);
    auto text = source.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    std::string caret(column > 0 ? column - 1 : 0, ' ');
    // keep tabs so the caret lines up in a terminal
    for (std::size_t i = 0; i < caret.size() && i < text.size(); ++i)
        if (text[i] == '\t') caret[i] = '\t';
    return fmt::format("{}\n{}^", text, caret);
}

ScriptError::ScriptError(std::string message, std::size_t line, std::size_t column,
                         std::string excerpt)
    : Error(fmt::format("line {}, column {}: {}\n{}", line, column, message, excerpt)),
      message_(std::move(message)),
      line_(line),
      column_(column),
      excerpt_(std::move(excerpt)) {}

namespace {

enum class Tok { ident, string, integer, real, lparen, rparen, lbracket, rbracket, comma, colon, semicolon, end };

struct Token {
    Tok kind;
    std::string text;  // identifier name or decoded string
    std::int64_t integer = 0;
    double real = 0.0;
    std::size_t line = 1, column = 1;
    std::size_t end_line = 1, end_column = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_space_and_comments();
        Token t;
        t.line = line_;
        t.column = col_;
        if (pos_ >= src_.size()) {
            t.kind = Tok::end;
            finish(t);
            return t;
        }
        char c = src_[pos_];
        auto single = [&](Tok k) {
            advance();
            t.kind = k;
            finish(t);
            return t;
        };
        switch (c) {
            case '(': return single(Tok::lparen);
            case ')': return single(Tok::rparen);
            case '[': return single(Tok::lbracket);
            case ']': return single(Tok::rbracket);
            case ',': return single(Tok::comma);
            case ':': return single(Tok::colon);
            case ';': return single(Tok::semicolon);
            case '"': return string_token(t);
            default: break;
        }
        if (is_ident_start(c)) {
            std::size_t start = pos_;
            while (pos_ < src_.size() && is_ident_char(src_[pos_])) advance();
            t.kind = Tok::ident;
            t.text = std::string(src_.substr(start, pos_ - start));
            finish(t);
            return t;
        }
        if (c == '-' || c == '+' || (c >= '0' && c <= '9')) return number_token(t);
        fail(fmt::format("unexpected character '{}'", c), line_, col_);
    }

    [[noreturn]] void fail(const std::string& msg, std::size_t line, std::size_t col) const {
        throw ScriptError(msg, line, col, caret_excerpt(src_, line, col));
    }

private:
    static bool is_ident_start(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
    }
    static bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void finish(Token& t) const {
        t.end_line = line_;
        t.end_column = col_;
    }

    void skip_space_and_comments() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else {
                break;
            }
        }
    }

    Token string_token(Token& t) {
        advance();  // opening quote
        std::string out;
        for (;;) {
            if (pos_ >= src_.size()) fail("unterminated string", t.line, t.column);
            char c = src_[pos_];
            if (c == '"') {
                advance();
                break;
            }
            if (c == '\n') fail("line break inside string", t.line, t.column);
            if (c == '\\') {
                std::size_t el = line_, ec = col_;
                advance();
                if (pos_ >= src_.size()) fail("unterminated string", t.line, t.column);
                char e = src_[pos_];
                switch (e) {
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case 'r': out += '\r'; break;
                    default: fail(fmt::format("unknown escape '\\{}'", e), el, ec);
                }
                advance();
                continue;
            }
            out += c;
            advance();
        }
        t.kind = Tok::string;
        t.text = std::move(out);
        finish(t);
        return t;
    }

    Token number_token(Token& t) {
        std::size_t start = pos_;
        if (src_[pos_] == '-' || src_[pos_] == '+') advance();
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9') {
                advance();
                ++n;
            }
            return n;
        };
        if (digits() == 0) fail("malformed number", t.line, t.column);
        bool real = false;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            real = true;
            advance();
            if (digits() == 0) fail("malformed number: digits expected after '.'", t.line, t.column);
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            real = true;
            advance();
            if (pos_ < src_.size() && (src_[pos_] == '-' || src_[pos_] == '+')) advance();
            if (digits() == 0) fail("malformed number: exponent digits expected", t.line, t.column);
        }
        if (pos_ < src_.size() && is_ident_char(src_[pos_]))
            fail("malformed number", t.line, t.column);
        std::string text(src_.substr(start, pos_ - start));
        if (real) {
            errno = 0;
            t.real = std::strtod(text.c_str(), nullptr);
            if (errno == ERANGE) fail("number out of range", t.line, t.column);
            t.kind = Tok::real;
        } else {
            const char* b = text.c_str() + (text[0] == '+' ? 1 : 0);
            auto [p, ec] = std::from_chars(b, text.c_str() + text.size(), t.integer);
            if (ec != std::errc{}) fail("integer out of range", t.line, t.column);
            t.kind = Tok::integer;
        }
        finish(t);
        return t;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

std::string_view describe(Tok k) {
    switch (k) {
        case Tok::ident: return "identifier";
        case Tok::string: return "string";
        case Tok::integer: return "integer";
        case Tok::real: return "number";
        case Tok::lparen: return "'('";
        case Tok::rparen: return "')'";
        case Tok::lbracket: return "'['";
        case Tok::rbracket: return "']'";
        case Tok::comma: return "','";
        case Tok::colon: return "':'";
        case Tok::semicolon: return "';'";
        case Tok::end: return "end of input";
    }
    return "token";
}

class Parser {
public:
    explicit Parser(std::string_view src) : lex_(src) { tok_ = lex_.next(); }

    ScriptProgram program() {
        ScriptProgram p;
        while (tok_.kind != Tok::end) {
            p.commands.push_back(command());
            if (tok_.kind == Tok::semicolon) bump();
        }
        return p;
    }

private:
    void bump() { tok_ = lex_.next(); }

    [[noreturn]] void unexpected(std::string_view wanted) const {
        lex_.fail(fmt::format("expected {}, found {}", wanted, describe(tok_.kind)), tok_.line,
                  tok_.column);
    }

    Token expect(Tok k) {
        if (tok_.kind != k) unexpected(describe(k));
        Token t = tok_;
        bump();
        return t;
    }

    Command command() {
        if (tok_.kind != Tok::ident) unexpected("command name");
        Command c;
        c.name = tok_.text;
        c.span.line = tok_.line;
        c.span.column = tok_.column;
        bump();
        expect(Tok::lparen);
        if (tok_.kind != Tok::rparen) {
            for (;;) {
                c.args.push_back(argument());
                const auto& added = c.args.back();
                for (std::size_t i = 0; i + 1 < c.args.size(); ++i)
                    if (c.args[i].key == added.key)
                        lex_.fail(fmt::format("duplicate argument '{}'", added.key),
                                  added.span.line, added.span.column);
                if (tok_.kind == Tok::comma) {
                    bump();
                    continue;
                }
                break;
            }
        }
        Token close = tok_;
        if (close.kind != Tok::rparen) unexpected("',' or ')'");
        bump();
        c.span.end_line = close.end_line;
        c.span.end_column = close.end_column;
        return c;
    }

    Argument argument() {
        if (tok_.kind != Tok::ident) unexpected("argument name");
        Argument a;
        a.key = tok_.text;
        a.span.line = tok_.line;
        a.span.column = tok_.column;
        bump();
        expect(Tok::colon);
        a.value = value();
        a.span.end_line = last_end_line_;
        a.span.end_column = last_end_column_;
        return a;
    }

    Value value() {
        Value v;
        switch (tok_.kind) {
            case Tok::string: v.data = tok_.text; break;
            case Tok::integer: v.data = tok_.integer; break;
            case Tok::real: v.data = tok_.real; break;
            case Tok::ident:
                if (tok_.text == "true")
                    v.data = true;
                else if (tok_.text == "false")
                    v.data = false;
                else
                    unexpected("value");
                break;
            case Tok::lbracket: {
                bump();
                List items;
                items.push_back(value());
                while (tok_.kind == Tok::comma) {
                    bump();
                    items.push_back(value());
                }
                if (tok_.kind != Tok::rbracket) unexpected("',' or ']'");
                v.data = std::move(items);
                break;
            }
            default: unexpected("value");
        }
        last_end_line_ = tok_.end_line;
        last_end_column_ = tok_.end_column;
        bump();
        return v;
    }

    Lexer lex_;
    Token tok_;
    std::size_t last_end_line_ = 0;
    std::size_t last_end_column_ = 0;
};

std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    out += '"';
    return out;
}

}  // namespace

ScriptProgram parse_script(std::string_view source) {
    Parser parser(source);
    ScriptProgram p = parser.program();
    p.source = std::string(source);
    return p;
}

std::string format_value(const Value& v) {
    struct Visitor {
        std::string operator()(const std::string& s) const { return quote(s); }
        std::string operator()(std::int64_t i) const { return std::to_string(i); }
        std::string operator()(double d) const {
            auto s = fmt::format("{}", d);
            if (s.find_first_of(".e") == std::string::npos) s += ".0";
            return s;
        }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
        std::string operator()(const List& l) const {
            std::string out = "[";
            for (std::size_t i = 0; i < l.size(); ++i) {
                if (i) out += ',';
                out += format_value(l[i]);
            }
            return out + "]";
        }
    };
    return std::visit(Visitor{}, v.data);
}

std::string format_script(const ScriptProgram& program) {
    std::string out;
    for (const auto& c : program.commands) {
        out += c.name;
        out += '(';
        for (std::size_t i = 0; i < c.args.size(); ++i) {
            if (i) out += ',';
            out += c.args[i].key;
            out += ':';
            out += format_value(c.args[i].value);
        }
        out += ")\n";
    }
    return out;
}

std::string_view type_name(const Value& v) {
    switch (v.data.index()) {
        case 0: return "text";
        case 1: return "integer";
        case 2: return "real";
        case 3: return "flag";
        default: return "list";
    }
}

}  // namespace rpys::script
