#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace qsw {

/// Calendar date backed by std::chrono::sys_days. Text form is ISO-8601 (YYYY-MM-DD).
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}
  Date(int year, unsigned month, unsigned day);

  /// Throws DataError on anything that is not a valid YYYY-MM-DD date.
  static Date parse(std::string_view text);

  std::chrono::sys_days days() const { return days_; }
  std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{days_}; }
  int year() const;
  unsigned month() const;
  bool is_weekday() const;

  Date plus_days(int n) const { return Date{days_ + std::chrono::days{n}}; }
  std::string str() const;

  friend constexpr auto operator<=>(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days days_{};
};

}  // namespace qsw
