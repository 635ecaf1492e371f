#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace aloe {

std::string trim(std::string_view s);

// Drops trailing "\n" / "\r\n" only; everything else is kept verbatim.
std::string strip_trailing_newlines(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string to_lower(std::string_view s);

bool starts_with_ci(std::string_view s, std::string_view prefix);

}  // namespace aloe
