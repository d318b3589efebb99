#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hypotopo {

/// Shortest round-trip-safe enough form for reports: %.12g, "inf" for +inf.
std::string format_number(double x);

/// Quotes the field when it holds a comma, quote or newline.
std::string csv_field(std::string_view s);

/// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace hypotopo
