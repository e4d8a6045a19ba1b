#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lacclean::csv {

/// Splits on ',' without quoting support; the formats handled here never
/// carry quoted fields.
std::vector<std::string_view> split(std::string_view line);

/// getline that also strips a trailing '\r'.
bool read_line(std::istream& in, std::string& line);

/// Whole-field unsigned decimal parse; nullopt on any junk or overflow.
template <typename T>
std::optional<T> parse_uint(std::string_view field)
{
  if (field.empty()) return std::nullopt;
  T value{};
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

std::optional<double> parse_double(std::string_view field);

/// Shortest representation that round-trips.
std::string format_double(double v);

} // namespace lacclean::csv
