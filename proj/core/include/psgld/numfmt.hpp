// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace psgld {

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double v);

/// Parses the whole of s as a double. Throws ParseError(what, line) on failure.
double parse_double(std::string_view s, std::size_t line = 0);

}  // namespace psgld
