#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lacclean/cell.hpp"
#include "lacclean/cluster.hpp"
#include "lacclean/ingest.hpp"

namespace lacclean {

struct RetentionTable
{
  std::size_t total_unique = 0;
  std::size_t resolved = 0;
  std::size_t retained = 0;
  double resolved_pct = 0;           ///< one decimal, half-up
  double retained_pct_of_total = 0;  ///< one decimal, half-up
  std::vector<std::string> notes;
};

/// Throws OrderingViolation unless retained <= resolved <= total. A quoted
/// retained share, if given, is checked against the counts and the outcome
/// added to the notes.
RetentionTable retention_stats(std::size_t total, std::size_t resolved, std::size_t retained,
                               std::optional<double> quoted_retained_pct = std::nullopt);

/// 100 * part / whole rounded half-up to one decimal, exact in integers.
double percent_one_decimal(std::size_t part, std::size_t whole);

std::string to_json(const RetentionTable& table);

struct CoverageBin
{
  std::size_t index = 0;
  std::size_t before = 0;
  std::size_t after = 0;

  friend bool operator==(const CoverageBin&, const CoverageBin&) = default;
};

struct CoverageSeries
{
  std::size_t window = 1;
  std::vector<CoverageBin> bins;
};

/// Per window of consecutive events: how many hit a resolved cell (before)
/// and how many hit a retained cell (after). The final window may be short.
CoverageSeries coverage_series(std::span<const TraceEvent> events, const CellSet& resolved,
                               const CellSet& retained, std::size_t window);

std::string to_json(const CoverageSeries& series);

enum class CellRole
{
  representative,
  outlier,
  insufficient
};

std::string_view to_string(CellRole role) noexcept;
CellRole parse_role(std::string_view name);

struct ReportRow
{
  CellIdentity cell;
  GeoPoint point;
  CellRole role = CellRole::representative;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

/// Rows by lac, then role (representative, outlier, insufficient), then identity.
std::vector<ReportRow> report_rows(const CleanResult& result);

/// Rebuilds a CleanResult from report rows. Areas holding insufficient rows
/// come back as insufficient_density.
CleanResult clean_result_from_rows(std::span<const ReportRow> rows);

inline constexpr std::string_view kReportCsvHeader = "mcc,mnc,lac,cell_id,lat,lon,role";

std::string export_csv(const CleanResult& result);
std::vector<ReportRow> parse_report_csv(std::istream& in);

std::string export_geojson(const CleanResult& result);

/// Structural problems of a GeoJSON point FeatureCollection; empty when valid.
std::vector<std::string> geojson_structure_errors(std::string_view document);

enum class ScatterLayer
{
  roles,     ///< representatives filled, outliers open, insufficient dashed
  all,       ///< every cell filled
  retained   ///< representatives only
};

/// Standalone SVG 1.1 scatter. One <circle> per drawn cell, colored by
/// lac mod 12.
std::string render_scatter(const CleanResult& result, ScatterLayer layer = ScatterLayer::roles);

} // namespace lacclean
