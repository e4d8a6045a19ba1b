#pragma once

#include <chrono>
#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lacclean/cell.hpp"

namespace lacclean {

using Timestamp = std::chrono::sys_seconds;

struct TraceEvent
{
  Timestamp timestamp;
  CellIdentity cell;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

enum class Strictness
{
  strict,
  lenient
};

struct TraceParseResult
{
  std::vector<TraceEvent> events;
  std::size_t skipped_rows = 0;  ///< malformed rows dropped in lenient mode
};

inline constexpr std::string_view kTraceHeader = "timestamp,mcc,mnc,lac,cell_id";

/// Reads a trace CSV. An input without any bytes yields no events; a
/// missing or wrong header is always a MalformedRow at line 1. Blank lines
/// are ignored. In strict mode the first bad data row throws MalformedRow.
TraceParseResult parse_trace(std::istream& in, Strictness strictness = Strictness::strict);

/// Distinct cells of the trace in canonical order.
CellSet extract_unique_cells(std::span<const TraceEvent> events);

void write_trace(std::ostream& out, std::span<const TraceEvent> events);

/// `YYYY-MM-DDThh:mm:ssZ`. Throws InvalidArgument.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);

} // namespace lacclean
