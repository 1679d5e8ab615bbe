#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rpys/error.hpp"

namespace rpys::script {

// Pipeline script language:
//
//   program  := (command ';'?)*
//   command  := IDENT '(' [arg (',' arg)*] ')'
//   arg      := IDENT ':' value
//   value    := STRING | NUMBER | 'true' | 'false' | '[' value (',' value)* ']'
//
// Strings are double-quoted with \" \\ \n \t \r escapes. Whitespace and
// line breaks are insignificant outside strings; '#' starts a comment that
// runs to the end of the line.

struct Value;
using List = std::vector<Value>;

struct Value {
    std::variant<std::string, std::int64_t, double, bool, List> data;

    bool operator==(const Value&) const = default;
};

struct SourceSpan {
    std::size_t line = 0;  // 1-based
    std::size_t column = 0;
    std::size_t end_line = 0;
    std::size_t end_column = 0;
};

struct Argument {
    std::string key;
    Value value;
    SourceSpan span;

    // Spans are positional metadata and do not take part in comparison.
    bool operator==(const Argument& o) const { return key == o.key && value == o.value; }
};

struct Command {
    std::string name;
    std::vector<Argument> args;
    SourceSpan span;

    const Value* find(std::string_view key) const;
    bool operator==(const Command& o) const { return name == o.name && args == o.args; }
};

struct ScriptProgram {
    std::vector<Command> commands;
    std::string source;

    // AST equality: compares commands only.
    bool operator==(const ScriptProgram& o) const { return commands == o.commands; }
};

class ScriptError : public Error {
public:
    ScriptError(std::string message, std::size_t line, std::size_t column, std::string excerpt);

    const std::string& message() const noexcept { return message_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    // The offending source line followed by a caret under the column.
    const std::string& excerpt() const noexcept { return excerpt_; }

private:
    std::string message_;
    std::size_t line_;
    std::size_t column_;
    std::string excerpt_;
};

// Source line `line` of `source` plus a caret line pointing at `column`.
std::string caret_excerpt(std::string_view source, std::size_t line, std::size_t column);

/// Throws ScriptError with the position of the first lexical or syntax error.
ScriptProgram parse_script(std::string_view source);

/// One command per line, no spaces: `name(key:value,key:value)`. Reals
/// always carry a decimal point or exponent so they read back as reals.
std::string format_script(const ScriptProgram& program);
std::string format_value(const Value& v);

std::string_view type_name(const Value& v);

}  // namespace rpys::script
