#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace vessel4d::textio {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);
void append_double(std::string& out, double value);

/// Locale-independent strict parse; returns false on trailing garbage.
bool parse_double(std::string_view text, double& value);
bool parse_int64(std::string_view text, long long& value);

std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

/// Comma separated numbers, e.g. "1,2,3".
std::vector<double> parse_double_list(std::string_view text);

}  // namespace vessel4d::textio
