#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace embedcast::csv {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Strict float parse of a whole cell; nullopt on anything else.
std::optional<double> parse_double(std::string_view cell);

/// Split one comma-separated line (no quoting); trailing '\r' is dropped.
std::vector<std::string> split_line(std::string_view line);

/// Join cells with commas.
std::string join(const std::vector<std::string>& cells);

/// Read all lines of a text file; throws DataError if it cannot be opened.
std::vector<std::string> read_lines(const std::string& path);

} // namespace embedcast::csv
