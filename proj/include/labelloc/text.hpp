#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace labelloc {

std::string trim(std::string_view s);
/// Lower-cases ASCII and collapses internal whitespace runs to one space.
std::string normalize_label(std::string_view s);
std::vector<std::string> split_any(std::string_view s, std::string_view delims);

}  // namespace labelloc
