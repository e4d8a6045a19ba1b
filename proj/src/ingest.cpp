#include "lacclean/ingest.hpp"

#include <fmt/format.h>

#include "lacclean/csv.hpp"
#include "lacclean/errors.hpp"

namespace lacclean {

namespace {

std::optional<int> two_digits(std::string_view s, std::size_t pos)
{
  if (pos + 2 > s.size()) return std::nullopt;
  auto v = csv::parse_uint<unsigned>(s.substr(pos, 2));
  if (!v) return std::nullopt;
  return static_cast<int>(*v);
}

bool parse_operator_code(std::string_view field, std::optional<std::uint16_t>& out)
{
  if (field.empty()) {
    out.reset();
    return true;
  }
  auto v = csv::parse_uint<std::uint32_t>(field);
  if (!v || *v > kMaxOperatorCode) return false;
  out = static_cast<std::uint16_t>(*v);
  return true;
}

// Returns an error message, or empty on success.
std::string parse_event(std::string_view line, TraceEvent& event)
{
  const auto fields = csv::split(line);
  if (fields.size() != 5) return fmt::format("expected 5 fields, found {}", fields.size());
  try {
    event.timestamp = parse_timestamp(fields[0]);
  } catch (const InvalidArgument& e) {
    return e.what();
  }
  if (!parse_operator_code(fields[1], event.cell.mcc)) return "invalid mcc";
  if (!parse_operator_code(fields[2], event.cell.mnc)) return "invalid mnc";
  auto lac = csv::parse_uint<std::uint32_t>(fields[3]);
  if (!lac || *lac < kMinLac || *lac > kMaxLac) return "lac outside 1..65533";
  auto cell = csv::parse_uint<std::uint32_t>(fields[4]);
  if (!cell || *cell > kMaxCellId) return "cell_id out of range";
  event.cell.lac = *lac;
  event.cell.cell_id = *cell;
  return {};
}

} // namespace

Timestamp parse_timestamp(std::string_view s)
{
  using namespace std::chrono;
  if (s.size() != 20 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' || s[16] != ':' || s[19] != 'Z')
    throw InvalidArgument(fmt::format("timestamp '{}' is not YYYY-MM-DDThh:mm:ssZ", s));
  auto y = csv::parse_uint<unsigned>(s.substr(0, 4));
  auto mo = two_digits(s, 5);
  auto d = two_digits(s, 8);
  auto h = two_digits(s, 11);
  auto mi = two_digits(s, 14);
  auto se = two_digits(s, 17);
  if (!y || !mo || !d || !h || !mi || !se)
    throw InvalidArgument(fmt::format("timestamp '{}' has non-numeric fields", s));
  const year_month_day ymd{year{static_cast<int>(*y)}, month{static_cast<unsigned>(*mo)},
                           day{static_cast<unsigned>(*d)}};
  if (!ymd.ok() || *h > 23 || *mi > 59 || *se > 59)
    throw InvalidArgument(fmt::format("timestamp '{}' is not a valid instant", s));
  return sys_days{ymd} + hours{*h} + minutes{*mi} + seconds{*se};
}

std::string format_timestamp(Timestamp t)
{
  using namespace std::chrono;
  const auto days = floor<std::chrono::days>(t);
  const year_month_day ymd{days};
  const hh_mm_ss hms{t - days};
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                     hms.hours().count(), hms.minutes().count(), hms.seconds().count());
}

TraceParseResult parse_trace(std::istream& in, Strictness strictness)
{
  TraceParseResult result;
  std::string line;
  if (!csv::read_line(in, line)) return result;
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (line != kTraceHeader) throw MalformedRow(1, fmt::format("expected header '{}'", kTraceHeader));

  std::size_t line_no = 1;
  while (csv::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    TraceEvent event;
    if (auto err = parse_event(line, event); !err.empty()) {
      if (strictness == Strictness::strict) throw MalformedRow(line_no, err);
      ++result.skipped_rows;
      continue;
    }
    result.events.push_back(event);
  }
  return result;
}

CellSet extract_unique_cells(std::span<const TraceEvent> events)
{
  std::vector<CellIdentity> cells;
  cells.reserve(events.size());
  for (const auto& e : events) cells.push_back(e.cell);
  return CellSet(std::move(cells));
}

void write_trace(std::ostream& out, std::span<const TraceEvent> events)
{
  out << kTraceHeader << '\n';
  auto opt = [](const std::optional<std::uint16_t>& v) { return v ? std::to_string(*v) : std::string(); };
  for (const auto& e : events)
    out << format_timestamp(e.timestamp) << ',' << opt(e.cell.mcc) << ',' << opt(e.cell.mnc) << ','
        << e.cell.lac << ',' << e.cell.cell_id << '\n';
}

} // namespace lacclean
