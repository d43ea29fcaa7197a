#include "volest/timestamp.hpp"

#include <charconv>

#include <fmt/format.h>

#include "volest/error.hpp"

namespace volest {

namespace {

int parse_fixed(std::string_view text, std::size_t pos, std::size_t len, std::string_view whole) {
  int value = 0;
  const char* first = text.data() + pos;
  const char* last = first + len;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    throw DataError(fmt::format("invalid timestamp '{}'", whole));
  return value;
}

}  // namespace

std::chrono::sys_days Timestamp::parse_date(std::string_view text) {
  using namespace std::chrono;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-')
    throw DataError(fmt::format("invalid date '{}', expected YYYY-MM-DD", text));
  const year_month_day ymd{year{parse_fixed(text, 0, 4, text)},
                           month{static_cast<unsigned>(parse_fixed(text, 5, 2, text))},
                           std::chrono::day{static_cast<unsigned>(parse_fixed(text, 8, 2, text))}};
  if (!ymd.ok()) throw DataError(fmt::format("invalid calendar date '{}'", text));
  return sys_days{ymd};
}

Timestamp Timestamp::parse(std::string_view text) {
  if (text.size() != 16 || text[10] != ' ' || text[13] != ':' || text.substr(14) != "00")
    throw DataError(fmt::format("invalid timestamp '{}', expected 'YYYY-MM-DD HH:00'", text));
  Timestamp ts;
  ts.day = parse_date(text.substr(0, 10));
  ts.hour = parse_fixed(text, 11, 2, text);
  if (ts.hour < 0 || ts.hour > 23) throw DataError(fmt::format("invalid hour in '{}'", text));
  return ts;
}

std::string format_date(std::chrono::sys_days day) {
  const std::chrono::year_month_day ymd{day};
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
}

std::string Timestamp::to_string() const { return fmt::format("{} {:02d}:00", format_date(day), hour); }

int Timestamp::day_index() const {
  // iso_encoding: Monday = 1 ... Sunday = 7
  return static_cast<int>(weekday().iso_encoding()) - 1;
}

long Timestamp::hours_since_epoch() const {
  return static_cast<long>(day.time_since_epoch().count()) * 24 + hour;
}

Timestamp Timestamp::plus_hours(long hours) const {
  const long total = hours_since_epoch() + hours;
  long days = total / 24;
  long h = total % 24;
  if (h < 0) {
    h += 24;
    days -= 1;
  }
  return Timestamp{std::chrono::sys_days{std::chrono::days{days}}, static_cast<int>(h)};
}

}  // namespace volest
