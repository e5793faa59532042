#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <system_error>

namespace trifv {

/// Locale-independent decimal text with 17 significant digits.
inline std::string format_double(double v) {
  char buf[32];
  auto [end, ec] =
      std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, end);
}

/// Locale-independent parse; returns false unless the whole token is a
/// number.
inline bool parse_double(std::string_view s, double &out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

template <typename Int> bool parse_int(std::string_view s, Int &out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

} // namespace trifv
