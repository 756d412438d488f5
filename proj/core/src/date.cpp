#include "qsw/date.hpp"

#include <charconv>
#include <cstdio>

#include "qsw/error.hpp"

namespace qsw {

namespace {

bool parse_uint(std::string_view s, unsigned& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

Date::Date(int year, unsigned month, unsigned day) {
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok()) throw DataError("invalid calendar date");
  days_ = std::chrono::sys_days{ymd};
}

Date Date::parse(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw DataError("expected YYYY-MM-DD date, got '" + std::string(text) + "'");
  }
  unsigned y = 0, m = 0, d = 0;
  if (!parse_uint(text.substr(0, 4), y) || !parse_uint(text.substr(5, 2), m) ||
      !parse_uint(text.substr(8, 2), d)) {
    throw DataError("expected YYYY-MM-DD date, got '" + std::string(text) + "'");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{static_cast<int>(y)},
                                        std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw DataError("invalid calendar date '" + std::string(text) + "'");
  return Date{std::chrono::sys_days{ymd}};
}

int Date::year() const { return static_cast<int>(ymd().year()); }

unsigned Date::month() const { return static_cast<unsigned>(ymd().month()); }

bool Date::is_weekday() const {
  const auto wd = std::chrono::weekday{days_}.c_encoding();
  return wd != 0 && wd != 6;
}

std::string Date::str() const {
  const auto ymd = this->ymd();
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace qsw
