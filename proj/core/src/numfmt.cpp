// SPDX-License-Identifier: Apache-2.0
#include "psgld/numfmt.hpp"

#include <array>
#include <charconv>

#include "psgld/errors.hpp"

namespace psgld {

std::string format_double(double v) {
  std::array<char, 32> buf;
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

double parse_double(std::string_view s, std::size_t line) {
  // from_chars does not accept a leading '+'.
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ParseError("invalid number '" + std::string(s) + "'", line);
  return v;
}

}  // namespace psgld
