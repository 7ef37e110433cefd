#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace packwise::text {

std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);
/// Splits on '\n'; a trailing newline does not produce an empty last line.
std::vector<std::string_view> lines(std::string_view content);

std::optional<std::int64_t> parse_int(std::string_view s);
std::optional<double> parse_real(std::string_view s);

/// Shortest representation that parses back to the same double.
std::string exact(double v);
/// Six significant digits, the format used by every report.
std::string sig6(double v);

}  // namespace packwise::text
