#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace rivercast {

using Date = std::chrono::sys_days;

/// Strict ISO-8601 calendar date (YYYY-MM-DD). Returns nullopt for any other
/// layout or for impossible dates such as 2021-02-30.
std::optional<Date> parse_iso_date(std::string_view text);

std::string format_iso_date(Date date);

inline Date add_days(Date date, int days) { return date + std::chrono::days{days}; }

inline long days_between(Date from, Date to) { return (to - from).count(); }

}  // namespace rivercast
