#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cltb {

/// Shortest-unambiguous style: 17 significant digits, "nan"/"inf" spelled out.
std::string fmt17(double x);

std::vector<std::string_view> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);
double parse_double(std::string_view text);

}  // namespace cltb
