#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace volest {

/// Local civil time at hour resolution.
struct Timestamp {
  std::chrono::sys_days day{};
  int hour = 0;  // 0..23

  /// Parses "YYYY-MM-DD HH:00" (minutes must be 00). Throws DataError.
  static Timestamp parse(std::string_view text);
  /// Parses "YYYY-MM-DD". Throws DataError.
  static std::chrono::sys_days parse_date(std::string_view text);

  std::string to_string() const;
  std::chrono::weekday weekday() const { return std::chrono::weekday{day}; }
  /// 0 = Monday ... 6 = Sunday.
  int day_index() const;
  Timestamp plus_hours(long hours) const;
  long hours_since_epoch() const;

  auto operator<=>(const Timestamp&) const = default;
};

std::string format_date(std::chrono::sys_days day);

}  // namespace volest
