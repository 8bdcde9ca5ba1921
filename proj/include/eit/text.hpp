#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace eit {

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

double parse_double(std::string_view text);
int parse_int(std::string_view text);

/// Splits on `sep` and trims ASCII whitespace from every field.
std::vector<std::string> split_fields(std::string_view line, char sep);

std::string_view trim(std::string_view text);

}  // namespace eit
