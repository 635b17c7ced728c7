#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rivercast {

std::string_view trim(std::string_view text);

/// Splits one CSV line on commas. Quoting is not supported; none of the
/// file formats this project reads or writes use it.
std::vector<std::string_view> split_csv_line(std::string_view line);

/// Parses the whole of `text` as a double; nullopt on trailing junk or empty input.
std::optional<double> parse_double(std::string_view text);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

std::string to_hex(std::uint64_t value);

}  // namespace rivercast
