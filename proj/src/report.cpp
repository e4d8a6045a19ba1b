#include "lacclean/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lacclean/csv.hpp"
#include "lacclean/errors.hpp"

namespace lacclean {

using nlohmann::json;

double percent_one_decimal(std::size_t part, std::size_t whole)
{
  if (whole == 0) return 0.0;
  const auto p = static_cast<unsigned long long>(part);
  const auto w = static_cast<unsigned long long>(whole);
  const unsigned long long tenths = (2000ull * p + w) / (2ull * w);
  return static_cast<double>(tenths) / 10.0;
}

RetentionTable retention_stats(std::size_t total, std::size_t resolved, std::size_t retained,
                               std::optional<double> quoted_retained_pct)
{
  if (resolved > total || retained > resolved)
    throw OrderingViolation(
        fmt::format("expected retained <= resolved <= total, got {} / {} / {}", retained, resolved, total));
  RetentionTable t{total, resolved, retained, percent_one_decimal(resolved, total),
                   percent_one_decimal(retained, total), {}};
  if (total > 0) {
    t.notes.push_back(fmt::format("resolved_pct = 100*{}/{} = {:.4f}, rounded half-up to {:.1f}", resolved, total,
                                  100.0 * static_cast<double>(resolved) / static_cast<double>(total),
                                  t.resolved_pct));
    t.notes.push_back(fmt::format("retained_pct_of_total = 100*{}/{} = {:.4f}, rounded half-up to {:.1f}", retained,
                                  total, 100.0 * static_cast<double>(retained) / static_cast<double>(total),
                                  t.retained_pct_of_total));
  }
  if (resolved > 0)
    t.notes.push_back(fmt::format("denominator is total_unique; as a share of resolved cells the retained set is {:.1f}%",
                                  percent_one_decimal(retained, resolved)));
  if (quoted_retained_pct && total > 0) {
    const double exact = 100.0 * static_cast<double>(retained) / static_cast<double>(total);
    if (std::fabs(*quoted_retained_pct - exact) >= 0.5)
      t.notes.push_back(fmt::format("quoted retained share {}% disagrees with the counts ({}/{} = {:.1f}%); the "
                                    "computed value is reported",
                                    *quoted_retained_pct, retained, total, t.retained_pct_of_total));
    else
      t.notes.push_back(fmt::format("quoted retained share {}% agrees with the counts", *quoted_retained_pct));
  }
  return t;
}

std::string to_json(const RetentionTable& t)
{
  json j{{"total_unique", t.total_unique},
         {"resolved", t.resolved},
         {"retained", t.retained},
         {"resolved_pct", t.resolved_pct},
         {"retained_pct_of_total", t.retained_pct_of_total},
         {"notes", t.notes}};
  return j.dump(2) + "\n";
}

CoverageSeries coverage_series(std::span<const TraceEvent> events, const CellSet& resolved, const CellSet& retained,
                               std::size_t window)
{
  if (window < 1) throw InvalidArgument("coverage window must be at least 1");
  CoverageSeries series;
  series.window = window;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (i % window == 0) series.bins.push_back({i / window, 0, 0});
    auto& bin = series.bins.back();
    const auto& cell = events[i].cell;
    if (resolved.contains(cell)) ++bin.before;
    if (retained.contains(cell)) ++bin.after;
  }
  return series;
}

std::string to_json(const CoverageSeries& series)
{
  json bins = json::array();
  for (const auto& b : series.bins) bins.push_back({{"index", b.index}, {"before", b.before}, {"after", b.after}});
  json j{{"window", series.window}, {"bins", std::move(bins)}};
  return j.dump(1) + "\n";
}

std::string_view to_string(CellRole role) noexcept
{
  switch (role) {
  case CellRole::representative:
    return "representative";
  case CellRole::outlier:
    return "outlier";
  case CellRole::insufficient:
    return "insufficient";
  }
  return "unknown";
}

CellRole parse_role(std::string_view name)
{
  if (name == "representative") return CellRole::representative;
  if (name == "outlier") return CellRole::outlier;
  if (name == "insufficient") return CellRole::insufficient;
  throw InvalidArgument("unknown role '" + std::string(name) + "'");
}

std::vector<ReportRow> report_rows(const CleanResult& result)
{
  std::vector<ReportRow> rows;
  for (const auto& lac : result.lacs) {
    for (const auto& c : lac.representative) rows.push_back({c.cell, c.point, CellRole::representative});
    for (const auto& c : lac.outliers) rows.push_back({c.cell, c.point, CellRole::outlier});
    for (const auto& c : lac.insufficient) rows.push_back({c.cell, c.point, CellRole::insufficient});
  }
  return rows;
}

CleanResult clean_result_from_rows(std::span<const ReportRow> rows)
{
  std::map<std::uint32_t, LacCleanResult> by_lac;
  for (const auto& r : rows) {
    auto& l = by_lac[r.cell.lac];
    l.lac = r.cell.lac;
    const ResolvedCell cell{r.cell, r.point, MatchKind::exact};
    switch (r.role) {
    case CellRole::representative:
      l.representative.push_back(cell);
      break;
    case CellRole::outlier:
      l.outliers.push_back(cell);
      break;
    case CellRole::insufficient:
      l.insufficient.push_back(cell);
      break;
    }
  }
  CleanResult out;
  auto by_cell = [](const ResolvedCell& a, const ResolvedCell& b) { return a.cell < b.cell; };
  for (auto& [lac, l] : by_lac) {
    std::sort(l.representative.begin(), l.representative.end(), by_cell);
    std::sort(l.outliers.begin(), l.outliers.end(), by_cell);
    std::sort(l.insufficient.begin(), l.insufficient.end(), by_cell);
    l.status = l.representative.empty() && !l.insufficient.empty() ? LacStatus::insufficient_density : LacStatus::ok;
    auto& s = out.stats;
    ++s.lacs;
    ++(l.status == LacStatus::ok ? s.ok_lacs : s.insufficient_lacs);
    s.retained += l.representative.size();
    s.outliers += l.outliers.size();
    s.insufficient_cells += l.insufficient.size();
    s.input_cells += l.representative.size() + l.outliers.size() + l.insufficient.size();
    out.lacs.push_back(std::move(l));
  }
  return out;
}

namespace {

std::string opt_field(const std::optional<std::uint16_t>& v)
{
  return v ? std::to_string(*v) : std::string();
}

json opt_json(const std::optional<std::uint16_t>& v)
{
  return v ? json(*v) : json(nullptr);
}

} // namespace

std::string export_csv(const CleanResult& result)
{
  std::string out(kReportCsvHeader);
  out += '\n';
  for (const auto& r : report_rows(result)) {
    out += fmt::format("{},{},{},{},{},{},{}\n", opt_field(r.cell.mcc), opt_field(r.cell.mnc), r.cell.lac,
                       r.cell.cell_id, csv::format_double(r.point.lat), csv::format_double(r.point.lon),
                       to_string(r.role));
  }
  return out;
}

std::vector<ReportRow> parse_report_csv(std::istream& in)
{
  std::vector<ReportRow> rows;
  std::string line;
  if (!csv::read_line(in, line)) return rows;
  if (line != kReportCsvHeader) throw MalformedRow(1, fmt::format("expected header '{}'", kReportCsvHeader));
  std::size_t line_no = 1;
  while (csv::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 7) throw MalformedRow(line_no, fmt::format("expected 7 fields, found {}", f.size()));
    ReportRow row;
    auto code = [&](std::string_view s, std::optional<std::uint16_t>& out) {
      if (s.empty()) return;
      auto v = csv::parse_uint<std::uint32_t>(s);
      if (!v || *v > kMaxOperatorCode) throw MalformedRow(line_no, "invalid operator code");
      out = static_cast<std::uint16_t>(*v);
    };
    code(f[0], row.cell.mcc);
    code(f[1], row.cell.mnc);
    auto lac = csv::parse_uint<std::uint32_t>(f[2]);
    auto cid = csv::parse_uint<std::uint32_t>(f[3]);
    auto lat = csv::parse_double(f[4]);
    auto lon = csv::parse_double(f[5]);
    if (!lac || *lac < kMinLac || *lac > kMaxLac || !cid || *cid > kMaxCellId)
      throw MalformedRow(line_no, "invalid lac or cell_id");
    if (!lat || !lon || *lat < -90 || *lat > 90 || *lon < -180 || *lon > 180)
      throw MalformedRow(line_no, "invalid coordinate");
    row.cell.lac = *lac;
    row.cell.cell_id = *cid;
    row.point = make_geo_point(*lat, *lon);
    try {
      row.role = parse_role(f[6]);
    } catch (const InvalidArgument& e) {
      throw MalformedRow(line_no, e.what());
    }
    rows.push_back(row);
  }
  return rows;
}

std::string export_geojson(const CleanResult& result)
{
  json features = json::array();
  for (const auto& r : report_rows(result)) {
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Point"}, {"coordinates", {r.point.lon, r.point.lat}}}},
                        {"properties",
                         {{"mcc", opt_json(r.cell.mcc)},
                          {"mnc", opt_json(r.cell.mnc)},
                          {"lac", r.cell.lac},
                          {"cell_id", r.cell.cell_id},
                          {"role", to_string(r.role)}}}});
  }
  json doc{{"type", "FeatureCollection"}, {"features", std::move(features)}};
  return doc.dump() + "\n";
}

std::vector<std::string> geojson_structure_errors(std::string_view document)
{
  std::vector<std::string> errors;
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    errors.emplace_back(std::string("not JSON: ") + e.what());
    return errors;
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection") errors.emplace_back("root is not a FeatureCollection");
  if (!doc.is_object() || !doc.contains("features") || !doc["features"].is_array()) {
    errors.emplace_back("features is not an array");
    return errors;
  }
  std::size_t i = 0;
  for (const auto& f : doc["features"]) {
    const auto where = fmt::format("feature {}: ", i++);
    if (!f.is_object() || f.value("type", "") != "Feature") {
      errors.push_back(where + "type is not Feature");
      continue;
    }
    const auto g = f.find("geometry");
    if (g == f.end() || !g->is_object() || g->value("type", "") != "Point") {
      errors.push_back(where + "geometry is not a Point");
      continue;
    }
    const auto c = g->find("coordinates");
    if (c == g->end() || !c->is_array() || c->size() != 2 || !(*c)[0].is_number() || !(*c)[1].is_number()) {
      errors.push_back(where + "coordinates must be [lon, lat]");
      continue;
    }
    const double lon = (*c)[0].get<double>();
    const double lat = (*c)[1].get<double>();
    if (lon < -180 || lon > 180) errors.push_back(where + "longitude out of range");
    if (lat < -90 || lat > 90) errors.push_back(where + "latitude out of range");
    const auto p = f.find("properties");
    if (p == f.end() || !p->is_object()) {
      errors.push_back(where + "properties is not an object");
      continue;
    }
    for (const char* key : {"mcc", "mnc", "lac", "cell_id", "role"})
      if (!p->contains(key)) errors.push_back(where + "missing property " + key);
  }
  return errors;
}

namespace {

constexpr std::array<std::string_view, 12> kPalette = {"#a6cee3", "#1f78b4", "#b2df8a", "#33a02c",
                                                       "#fb9a99", "#e31a1c", "#fdbf6f", "#ff7f00",
                                                       "#cab2d6", "#6a3d9a", "#ffff99", "#b15928"};

constexpr double kWidth = 800;
constexpr double kHeight = 600;

struct Marker
{
  GeoPoint point;
  std::uint32_t lac;
  CellRole role;
};

} // namespace

std::string render_scatter(const CleanResult& result, ScatterLayer layer)
{
  std::vector<Marker> markers;
  for (const auto& r : report_rows(result)) {
    if (layer == ScatterLayer::retained && r.role != CellRole::representative) continue;
    markers.push_back({r.point, r.cell.lac, layer == ScatterLayer::all ? CellRole::representative : r.role});
  }
  // draw outliers last so they stay visible
  std::stable_sort(markers.begin(), markers.end(), [](const Marker& a, const Marker& b) {
    auto rank = [](CellRole r) { return r == CellRole::outlier ? 2 : r == CellRole::insufficient ? 1 : 0; };
    return rank(a.role) < rank(b.role);
  });

  double min_lat = 0, max_lat = 0, min_lon = 0, max_lon = 0;
  if (!markers.empty()) {
    min_lat = max_lat = markers.front().point.lat;
    min_lon = max_lon = markers.front().point.lon;
    for (const auto& m : markers) {
      min_lat = std::min(min_lat, m.point.lat);
      max_lat = std::max(max_lat, m.point.lat);
      min_lon = std::min(min_lon, m.point.lon);
      max_lon = std::max(max_lon, m.point.lon);
    }
  }
  const double kx = std::cos(deg_to_rad((min_lat + max_lat) / 2));
  double span_x = (max_lon - min_lon) * kx;
  double span_y = max_lat - min_lat;
  constexpr double kMinSpan = 1e-3;
  span_x = std::max(span_x, kMinSpan);
  span_y = std::max(span_y, kMinSpan);
  const double x0 = min_lon * kx - 0.05 * span_x;
  const double y1 = max_lat + 0.05 * span_y;
  const double scale = std::min(kWidth / (1.1 * span_x), kHeight / (1.1 * span_y));
  const double off_x = (kWidth - scale * 1.1 * span_x) / 2;
  const double off_y = (kHeight - scale * 1.1 * span_y) / 2;

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n",
      kWidth, kHeight);
  svg += fmt::format("<title>cells by location area ({} markers)</title>\n", markers.size());
  svg += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n", kWidth, kHeight);
  for (const auto& m : markers) {
    const double x = off_x + (m.point.lon * kx - x0) * scale;
    const double y = off_y + (y1 - m.point.lat) * scale;
    const auto color = kPalette[m.lac % kPalette.size()];
    switch (m.role) {
    case CellRole::representative:
      svg += fmt::format("<circle class=\"marker representative\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\" "
                         "stroke=\"{}\"/>\n",
                         x, y, color, color);
      break;
    case CellRole::outlier:
      svg += fmt::format("<circle class=\"marker outlier\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" fill=\"none\" "
                         "stroke=\"{}\" stroke-width=\"1.5\"/>\n",
                         x, y, color);
      break;
    case CellRole::insufficient:
      svg += fmt::format("<circle class=\"marker insufficient\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"none\" "
                         "stroke=\"{}\" stroke-dasharray=\"2,1\"/>\n",
                         x, y, color);
      break;
    }
  }
  svg += "</svg>\n";
  return svg;
}

} // namespace lacclean
