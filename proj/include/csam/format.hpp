#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <system_error>

namespace csam {

// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

// Strict full-token parse; returns false on trailing garbage or empty input.
inline bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

inline bool parse_long(std::string_view text, long long& out) {
  if (text.empty()) return false;
  auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

}  // namespace csam
