#include <doctest.h>

#include <nlohmann/json.hpp>
#include <sstream>

#include "fixtures.hpp"
#include "lacclean/errors.hpp"
#include "lacclean/report.hpp"

using namespace lacclean;

namespace {

std::size_t count_of(const std::string& text, const std::string& needle)
{
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

CleanResult separation_result()
{
  return clean_dataset(fixtures::resolve_world(fixtures::separation_world()), {});
}

} // namespace

TEST_CASE("percent_one_decimal")
{
  CHECK(percent_one_decimal(680, 1744) == 39.0);
  CHECK(percent_one_decimal(649, 1744) == 37.2);
  CHECK(percent_one_decimal(0, 100) == 0.0);
  CHECK(percent_one_decimal(0, 0) == 0.0);
  CHECK(percent_one_decimal(1, 8) == 12.5);
  CHECK(percent_one_decimal(1, 16) == 6.3);    // 6.25 rounds up
  CHECK(percent_one_decimal(1, 2000) == 0.1);  // 0.05 rounds up
  CHECK(percent_one_decimal(1, 2001) == 0.0);
  CHECK(percent_one_decimal(7, 7) == 100.0);
}

TEST_CASE("retention_stats")
{
  auto t = retention_stats(1744, 680, 680);
  CHECK(t.resolved_pct == 39.0);
  CHECK(t.retained_pct_of_total == 39.0);

  t = retention_stats(1744, 680, 649);
  CHECK(t.total_unique == 1744);
  CHECK(t.resolved == 680);
  CHECK(t.retained == 649);
  CHECK(t.retained_pct_of_total == 37.2);
  bool noted = false;
  for (const auto& n : t.notes) noted |= n.find("649/1744") != std::string::npos;
  CHECK(noted);

  const auto quoted = retention_stats(1744, 680, 649, 35.0);
  CHECK(quoted.retained_pct_of_total == 37.2);
  CHECK(quoted.notes.back().find("disagrees") != std::string::npos);
  CHECK(retention_stats(1744, 680, 649, 37.0).notes.back().find("agrees") != std::string::npos);
  CHECK(retention_stats(1744, 680, 649).notes.size() == 3);

  t = retention_stats(100, 0, 0);
  CHECK(t.resolved_pct == 0.0);
  CHECK(t.retained_pct_of_total == 0.0);

  CHECK_THROWS_AS(retention_stats(10, 11, 0), OrderingViolation);
  CHECK_THROWS_AS(retention_stats(10, 5, 6), OrderingViolation);

  const auto j = nlohmann::json::parse(to_json(retention_stats(1744, 680, 649)));
  CHECK(j["retained_pct_of_total"] == 37.2);
  CHECK(j["total_unique"] == 1744);
}

TEST_CASE("coverage_series")
{
  const CellIdentity a{310, 26, 1, 1};
  const CellIdentity b{310, 26, 1, 2};
  const auto t0 = TraceOptions{}.start;
  const std::vector<TraceEvent> events{
      {t0, a}, {t0 + std::chrono::seconds{60}, b}, {t0 + std::chrono::seconds{120}, a}, {t0 + std::chrono::seconds{180}, b}};
  const CellSet resolved({a, b});

  CHECK(coverage_series({}, resolved, resolved, 3).bins.empty());

  const auto s = coverage_series(events, resolved, CellSet({a}), 2);
  CHECK(s.bins == std::vector<CoverageBin>{{0, 2, 1}, {1, 2, 1}});

  const auto same = coverage_series(events, resolved, resolved, 3);
  REQUIRE(same.bins.size() == 2);
  CHECK(same.bins[1].before == 1);  // short final window
  for (const auto& bin : same.bins) CHECK(bin.after == bin.before);

  CHECK_THROWS_AS(coverage_series(events, resolved, resolved, 0), InvalidArgument);

  const auto j = nlohmann::json::parse(to_json(s));
  CHECK(j["window"] == 2);
  CHECK(j["bins"].size() == 2);
}

TEST_CASE("exports of the separation fixture")
{
  const auto r = separation_result();
  const auto geo = export_geojson(r);
  CHECK(geojson_structure_errors(geo).empty());
  const auto j = nlohmann::json::parse(geo);
  std::size_t reps = 0, outs = 0;
  for (const auto& f : j["features"]) {
    reps += f["properties"]["role"] == "representative";
    outs += f["properties"]["role"] == "outlier";
    const double lon = f["geometry"]["coordinates"][0];
    const double lat = f["geometry"]["coordinates"][1];
    CHECK(lon < -70.0);  // the default region lies west of -75 in longitude
    CHECK(lat > 25.0);
  }
  CHECK(reps == 280);
  CHECK(outs == 28);

  const auto csv = export_csv(r);
  std::istringstream in(csv);
  const auto rows = parse_report_csv(in);
  CHECK(rows.size() == 308);
  CHECK(rows == report_rows(r));
  CHECK(export_csv(clean_result_from_rows(rows)) == csv);

  const auto svg = render_scatter(r);
  CHECK(count_of(svg, "<circle") == 308);
  CHECK(count_of(svg, "fill=\"none\"") == 28);
  CHECK(svg == render_scatter(separation_result()));
  CHECK(count_of(render_scatter(r, ScatterLayer::retained), "<circle") == 280);
  CHECK(count_of(render_scatter(r, ScatterLayer::all), "<circle") == 308);
}

TEST_CASE("exports of partial identities and insufficient areas")
{
  std::vector<ResolvedCell> cells = fixtures::threshold_fixture(4);
  cells[0].cell.mcc.reset();
  cells[0].cell.mnc.reset();
  const auto r = clean_dataset(cells, {});
  REQUIRE(r.lacs.size() == 1);
  CHECK(r.lacs[0].status == LacStatus::insufficient_density);

  const auto geo = export_geojson(r);
  CHECK(geojson_structure_errors(geo).empty());
  CHECK(geo.find("\"mcc\":null") != std::string::npos);

  std::istringstream in(export_csv(r));
  const auto rows = parse_report_csv(in);
  CHECK(rows.size() == 6);
  for (const auto& row : rows) CHECK(row.role == CellRole::insufficient);
  const auto back = clean_result_from_rows(rows);
  CHECK(back.lacs[0].status == LacStatus::insufficient_density);
  CHECK(back.lacs[0].insufficient.size() == 6);

  CHECK(count_of(render_scatter(r), "stroke-dasharray") == 6);
}

TEST_CASE("empty result")
{
  const CleanResult empty;
  CHECK(geojson_structure_errors(export_geojson(empty)).empty());
  std::istringstream in(export_csv(empty));
  CHECK(parse_report_csv(in).empty());
  CHECK(count_of(render_scatter(empty), "<circle") == 0);
}

TEST_CASE("geojson_structure_errors catches bad documents")
{
  CHECK_FALSE(geojson_structure_errors("not json").empty());
  CHECK_FALSE(geojson_structure_errors(R"({"type":"Feature"})").empty());
  CHECK_FALSE(geojson_structure_errors(
                  R"({"type":"FeatureCollection","features":[{"type":"Feature","geometry":{"type":"Point","coordinates":[10]},"properties":{}}]})")
                  .empty());
  // latitude out of range means the pair is probably [lat, lon]
  CHECK_FALSE(geojson_structure_errors(
                  R"({"type":"FeatureCollection","features":[{"type":"Feature","geometry":{"type":"Point","coordinates":[10, 120]},"properties":{}}]})")
                  .empty());
  CHECK(geojson_structure_errors(
            R"({"type":"FeatureCollection","features":[{"type":"Feature","geometry":{"type":"Point","coordinates":[120, 10]},"properties":{"mcc":null,"mnc":null,"lac":1,"cell_id":1,"role":"outlier"}}]})")
            .empty());
}

TEST_CASE("report CSV parsing errors carry the line")
{
  std::istringstream bad(std::string(kReportCsvHeader) + "\n310,26,1,1,40,-75,representative\n310,26,1,2,40,-75,ghost\n");
  try {
    parse_report_csv(bad);
    FAIL("expected MalformedRow");
  } catch (const MalformedRow& e) {
    CHECK(e.line() == 3);
  }
}
