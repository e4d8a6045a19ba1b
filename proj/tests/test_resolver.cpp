#include <doctest.h>

#include <random>
#include <sstream>
#include <thread>

#include "lacclean/errors.hpp"
#include "lacclean/resolver.hpp"

using namespace lacclean;

namespace {

CellDatabase db_from(const std::string& body)
{
  std::istringstream in(std::string(kCellDbHeader) + "\n" + body);
  return load_cell_db(in);
}

const CellIdentity kFull{310, 26, 24127, 51};
const CellIdentity kBare{std::nullopt, std::nullopt, 24127, 51};

} // namespace

TEST_CASE("load_cell_db")
{
  SUBCASE("empty data section")
  {
    CHECK(db_from("").empty());
    std::istringstream nothing("");
    CHECK(load_cell_db(nothing).empty());
  }
  SUBCASE("freshest duplicate wins")
  {
    const auto db = db_from("310,26,24127,51,42.0,-71.0,1\n310,26,24127,51,43.0,-72.0,2\n310,26,24127,51,44.0,-73.0,1\n");
    REQUIRE(db.size() == 1);
    CHECK(db.find_exact(kFull)->point == GeoPoint{43.0, -72.0});
  }
  SUBCASE("equal freshness keeps the later row")
  {
    const auto db = db_from("310,26,24127,51,42.0,-71.0,\n310,26,24127,51,43.0,-72.0,0\n");
    CHECK(db.find_exact(kFull)->point == GeoPoint{43.0, -72.0});
  }
  SUBCASE("out of range coordinates")
  {
    CHECK_THROWS_AS(db_from("310,26,24127,51,91.0,-71.0,1\n"), MalformedRow);
    CHECK_THROWS_AS(db_from("310,26,24127,51,45.0,180.5,1\n"), MalformedRow);
    try {
      db_from("310,26,24127,51,1,1,1\n310,26,24127,51,nan,1,1\n");
      FAIL("expected MalformedRow");
    } catch (const MalformedRow& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("other malformed rows")
  {
    CHECK_THROWS_AS(db_from("310,26,0,51,1,1,1\n"), MalformedRow);
    CHECK_THROWS_AS(db_from("310,26,5,51,1,1\n"), MalformedRow);
    CHECK_THROWS_AS(db_from("310,26,5,51,1,1,new\n"), MalformedRow);
    std::istringstream bad_header("mcc,mnc,lac,cell,lat,lon\n");
    CHECK_THROWS_AS(load_cell_db(bad_header), MalformedRow);
  }
  SUBCASE("lon 180 is normalized")
  {
    const auto db = db_from("310,26,24127,51,10,180,1\n");
    CHECK(db.find_exact(kFull)->point.lon == -180.0);
  }
}

TEST_CASE("resolve_cell")
{
  const auto db = db_from("310,26,24127,51,42.36,-71.09,\n");
  SUBCASE("exact")
  {
    const auto r = resolve_cell(db, kFull, MatchPolicy::exact_only);
    REQUIRE(r.resolved);
    CHECK(r.resolved->point == GeoPoint{42.36, -71.09});
    CHECK(r.resolved->match_kind == MatchKind::exact);
  }
  SUBCASE("wildcard")
  {
    const auto r = resolve_cell(db, kBare, MatchPolicy::allow_wildcard);
    REQUIRE(r.resolved);
    CHECK(r.resolved->point == GeoPoint{42.36, -71.09});
    CHECK(r.resolved->match_kind == MatchKind::wildcard);
    CHECK(r.resolved->cell == kBare);
    CHECK_FALSE(r.ambiguous);
    CHECK_FALSE(resolve_cell(db, kBare, MatchPolicy::exact_only).resolved);
  }
  SUBCASE("miss")
  {
    CHECK_FALSE(resolve_cell(CellDatabase{}, CellIdentity{std::nullopt, std::nullopt, 65000, 1}).resolved);
    CHECK_FALSE(resolve_cell(db, CellIdentity{310, 27, 24127, 51}).resolved);  // full identities never wildcard
  }
  SUBCASE("partial wildcard respects the present field")
  {
    const auto db2 = db_from("310,26,24127,51,1,1,\n311,27,24127,51,2,2,\n");
    const auto r = resolve_cell(db2, CellIdentity{311, std::nullopt, 24127, 51});
    REQUIRE(r.resolved);
    CHECK(r.resolved->point == GeoPoint{2, 2});
    CHECK_FALSE(r.ambiguous);
  }
  SUBCASE("ambiguous wildcard takes the smallest operator and is flagged")
  {
    const auto db2 = db_from("311,27,24127,51,2,2,\n310,410,24127,51,3,3,\n310,26,24127,51,1,1,\n");
    const auto r = resolve_cell(db2, kBare);
    REQUIRE(r.resolved);
    CHECK(r.resolved->point == GeoPoint{1, 1});
    CHECK(r.ambiguous);
  }
  SUBCASE("a partial database row matches the same partial query exactly")
  {
    const auto db2 = db_from(",,24127,51,5,5,\n");
    const auto r = resolve_cell(db2, kBare, MatchPolicy::exact_only);
    REQUIRE(r.resolved);
    CHECK(r.resolved->match_kind == MatchKind::exact);
    CHECK_FALSE(resolve_cell(db2, kFull, MatchPolicy::allow_wildcard).resolved);
  }
}

TEST_CASE("resolve_all partitions and counts")
{
  CHECK(resolve_all(CellDatabase{}, CellSet{}).stats == ResolutionStats{});

  // 1744 cells of which 680 are known
  CellDatabase db;
  std::vector<CellIdentity> cells;
  for (std::uint32_t i = 0; i < 1744; ++i) {
    CellIdentity c{std::nullopt, std::nullopt, 100 + i / 100, i};
    cells.push_back(c);
    if (i % 1744 < 680) db.insert(CellIdentity{310, 26, c.lac, c.cell_id}, {40.0, -75.0});
  }
  const auto r = resolve_all(db, CellSet(cells));
  CHECK(r.stats.total == 1744);
  CHECK(r.stats.resolved == 680);
  CHECK(r.stats.unresolved == 1064);
  CHECK(r.stats.wildcard_ambiguous == 0);
  CHECK(std::is_sorted(r.resolved.begin(), r.resolved.end(),
                       [](const ResolvedCell& a, const ResolvedCell& b) { return a.cell < b.cell; }));
}

TEST_CASE("resolution properties on random databases")
{
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> small(0, 3);
  auto random_cell = [&](bool allow_partial) {
    CellIdentity c;
    if (!allow_partial || small(rng)) c.mcc = static_cast<std::uint16_t>(310 + small(rng) % 2);
    if (!allow_partial || small(rng)) c.mnc = static_cast<std::uint16_t>(small(rng));
    c.lac = 1 + static_cast<std::uint32_t>(small(rng));
    c.cell_id = static_cast<std::uint32_t>(small(rng) + small(rng));
    return c;
  };
  for (int trial = 0; trial < 100; ++trial) {
    CellDatabase db;
    std::vector<std::pair<CellIdentity, GeoPoint>> rows;
    for (int i = 0; i < 20; ++i) rows.emplace_back(random_cell(small(rng) == 0), GeoPoint{double(i), double(i)});
    std::vector<CellIdentity> q;
    for (int i = 0; i < 30; ++i) q.push_back(random_cell(true));
    const CellSet cells(q);

    std::size_t previous = 0;
    for (const auto& [c, p] : rows) {
      db.insert(c, p);
      const auto wild = resolve_all(db, cells, MatchPolicy::allow_wildcard);
      const auto exact = resolve_all(db, cells, MatchPolicy::exact_only);
      // partition
      CHECK(wild.resolved.size() + wild.unresolved.size() == cells.size());
      CHECK(wild.stats.resolved + wild.stats.unresolved == wild.stats.total);
      std::vector<CellIdentity> all;
      for (const auto& r : wild.resolved) all.push_back(r.cell);
      all.insert(all.end(), wild.unresolved.begin(), wild.unresolved.end());
      CHECK(CellSet(all) == cells);
      CHECK(CellSet(all).size() == all.size());
      // exact_only resolves a subset
      for (const auto& r : exact.resolved)
        CHECK(std::any_of(wild.resolved.begin(), wild.resolved.end(), [&](const auto& w) { return w.cell == r.cell; }));
      // monotone in database rows
      CHECK(wild.stats.resolved >= previous);
      previous = wild.stats.resolved;
      // wildcard only for partial queries
      for (const auto& r : wild.resolved)
        if (r.match_kind == MatchKind::wildcard) CHECK(r.cell.is_partial());
      // deterministic
      const auto again = resolve_all(db, cells, MatchPolicy::allow_wildcard);
      CHECK(again.stats == wild.stats);
      CHECK(again.resolved == wild.resolved);
    }
  }
}

TEST_CASE("OpenCellID import")
{
  std::istringstream in(
      "radio,mcc,net,area,cell,unit,lon,lat,range,samples,changeable,created,updated,averageSignal\n"
      "GSM,310,26,24127,51,,-71.09,42.36,1000,5,1,1200000000,1300000000,0\n"
      "GSM,310,26,24127,51,,-71.19,42.46,1000,5,1,1200000000,1200000001,0\n"
      "LTE,310,26,65535,123456789,,-71.09,42.36,1000,5,1,1200000000,1300000000,0\n");
  const auto imp = load_opencellid(in);
  CHECK(imp.skipped_rows == 1);
  REQUIRE(imp.db.size() == 1);
  CHECK(imp.db.find_exact(kFull)->point == GeoPoint{42.36, -71.09});

  std::ostringstream out;
  write_cell_db(out, imp.db);
  std::istringstream back(out.str());
  CHECK(load_cell_db(back).rows().size() == 1);
}

namespace {

class CountingClient final : public LookupClient
{
public:
  std::size_t calls = 0;
  std::size_t queried = 0;

  std::vector<std::optional<GeoPoint>> query_batch(std::span<const CellIdentity> cells) override
  {
    ++calls;
    queried += cells.size();
    std::vector<std::optional<GeoPoint>> out;
    for (const auto& c : cells)
      out.push_back(c.cell_id % 2 ? std::optional<GeoPoint>(GeoPoint{double(c.cell_id), 0}) : std::nullopt);
    return out;
  }
};

} // namespace

TEST_CASE("caching lookup client")
{
  CountingClient upstream;
  CachingLookupClient cache(upstream, 3);
  const std::vector<CellIdentity> batch{{310, 26, 1, 1}, {310, 26, 1, 2}, {310, 26, 1, 3}};
  const auto first = cache.query_batch(batch);
  CHECK(upstream.queried == 3);
  CHECK(first[0]->lat == 1.0);
  CHECK_FALSE(first[1]);
  const auto second = cache.query_batch(batch);
  CHECK(upstream.queried == 3);  // misses are cached too
  CHECK(second == first);
  CHECK(cache.hits() == 3);

  // capacity bound evicts the least recently used identity
  cache.query_batch(std::vector<CellIdentity>{{310, 26, 1, 5}});
  CHECK(cache.cached() == 3);
  cache.query_batch(std::vector<CellIdentity>{{310, 26, 1, 1}});
  CHECK(upstream.queried == 5);

  // concurrent callers see consistent answers
  std::vector<std::thread> threads;
  std::vector<std::vector<std::optional<GeoPoint>>> results(4);
  for (int t = 0; t < 4; ++t)
    threads.emplace_back([&, t] { results[t] = cache.query_batch(batch); });
  for (auto& th : threads) th.join();
  for (const auto& r : results) CHECK(r == first);
  CHECK(cache.cached() <= 3);

  const auto db = db_from("310,26,1,1,5,5,\n");
  DatabaseLookupClient local(db);
  const auto hits = local.query_batch(batch);
  CHECK(hits[0] == GeoPoint{5, 5});
  CHECK_FALSE(hits[1]);
}
