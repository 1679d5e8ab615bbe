#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace rpys::csv {

// Dialect shared by every export: comma separator, LF line ends, UTF-8,
// fields quoted only when they contain a comma, a double quote, CR or LF;
// embedded quotes are doubled.
std::string escape(std::string_view field);

void write_row(std::ostream& out, std::initializer_list<std::string_view> fields);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

// Parses text in the dialect above (also accepts CRLF). Throws
// FormatError on an unterminated quoted field.
std::vector<std::vector<std::string>> parse(std::string_view text);

}  // namespace rpys::csv
