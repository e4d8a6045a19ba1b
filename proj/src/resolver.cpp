#include "lacclean/resolver.hpp"

#include <string>

#include <fmt/format.h>

#include "lacclean/csv.hpp"
#include "lacclean/errors.hpp"

namespace lacclean {

std::string_view to_string(MatchPolicy p) noexcept
{
  return p == MatchPolicy::exact_only ? "exact_only" : "allow_wildcard";
}

MatchPolicy parse_policy(std::string_view name)
{
  if (name == "exact_only" || name == "exact") return MatchPolicy::exact_only;
  if (name == "allow_wildcard" || name == "wildcard") return MatchPolicy::allow_wildcard;
  throw InvalidArgument("unknown match policy '" + std::string(name) + "'");
}

void CellDatabase::insert(const CellIdentity& cell, const GeoPoint& point, std::int64_t freshness)
{
  auto [it, inserted] = rows_.try_emplace(cell, Row{point, freshness});
  if (inserted) {
    by_lac_cell_[{cell.lac, cell.cell_id}].push_back(cell);
    return;
  }
  if (freshness >= it->second.freshness) it->second = Row{point, freshness};
}

const CellDatabase::Row* CellDatabase::find_exact(const CellIdentity& cell) const
{
  auto it = rows_.find(cell);
  return it == rows_.end() ? nullptr : &it->second;
}

std::vector<std::pair<CellIdentity, CellDatabase::Row>> CellDatabase::candidates(const CellIdentity& cell) const
{
  std::vector<std::pair<CellIdentity, Row>> out;
  auto it = by_lac_cell_.find({cell.lac, cell.cell_id});
  if (it == by_lac_cell_.end()) return out;
  for (const auto& key : it->second) {
    if (cell.mcc && key.mcc != cell.mcc) continue;
    if (cell.mnc && key.mnc != cell.mnc) continue;
    out.emplace_back(key, rows_.at(key));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

namespace {

bool parse_code(std::string_view field, std::optional<std::uint16_t>& out)
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

std::optional<std::int64_t> parse_freshness(std::string_view field)
{
  if (field.empty()) return 0;
  std::int64_t v{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size()) return std::nullopt;
  return v;
}

std::string header_of(std::istream& in)
{
  std::string line;
  if (!csv::read_line(in, line)) return {};
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  return line;
}

bool coordinates_in_range(double lat, double lon)
{
  return lat >= -90.0 && lat <= 90.0 && lon >= -180.0 && lon <= 180.0;
}

} // namespace

CellDatabase load_cell_db(std::istream& in)
{
  CellDatabase db;
  const auto header = header_of(in);
  if (header.empty() && in.eof()) return db;
  if (header != kCellDbHeader) throw MalformedRow(1, fmt::format("expected header '{}'", kCellDbHeader));

  std::string line;
  std::size_t line_no = 1;
  while (csv::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 7) throw MalformedRow(line_no, fmt::format("expected 7 fields, found {}", f.size()));
    CellIdentity cell;
    if (!parse_code(f[0], cell.mcc)) throw MalformedRow(line_no, "invalid mcc");
    if (!parse_code(f[1], cell.mnc)) throw MalformedRow(line_no, "invalid mnc");
    auto lac = csv::parse_uint<std::uint32_t>(f[2]);
    if (!lac || *lac < kMinLac || *lac > kMaxLac) throw MalformedRow(line_no, "lac outside 1..65533");
    auto cid = csv::parse_uint<std::uint32_t>(f[3]);
    if (!cid || *cid > kMaxCellId) throw MalformedRow(line_no, "cell_id out of range");
    cell.lac = *lac;
    cell.cell_id = *cid;
    auto lat = csv::parse_double(f[4]);
    auto lon = csv::parse_double(f[5]);
    if (!lat || !lon) throw MalformedRow(line_no, "invalid coordinate");
    if (!coordinates_in_range(*lat, *lon)) throw MalformedRow(line_no, "coordinate out of range");
    auto fresh = parse_freshness(f[6]);
    if (!fresh) throw MalformedRow(line_no, "invalid freshness");
    db.insert(cell, make_geo_point(*lat, *lon), *fresh);
  }
  return db;
}

OpenCellIdImport load_opencellid(std::istream& in)
{
  OpenCellIdImport out;
  const auto header = header_of(in);
  if (header.empty() && in.eof()) return out;
  const auto cols = csv::split(header);
  auto col = [&](std::string_view name) -> std::size_t {
    for (std::size_t i = 0; i < cols.size(); ++i)
      if (cols[i] == name) return i;
    throw MalformedRow(1, fmt::format("OpenCellID header lacks column '{}'", name));
  };
  const auto c_mcc = col("mcc"), c_net = col("net"), c_area = col("area"), c_cell = col("cell"),
             c_lon = col("lon"), c_lat = col("lat"), c_updated = col("updated");

  std::string line;
  std::size_t line_no = 1;
  while (csv::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != cols.size()) throw MalformedRow(line_no, "column count differs from header");
    CellIdentity cell;
    auto lac = csv::parse_uint<std::uint32_t>(f[c_area]);
    auto cid = csv::parse_uint<std::uint32_t>(f[c_cell]);
    auto lat = csv::parse_double(f[c_lat]);
    auto lon = csv::parse_double(f[c_lon]);
    if (!parse_code(f[c_mcc], cell.mcc) || !parse_code(f[c_net], cell.mnc) || !lac || !cid || !lat || !lon) {
      throw MalformedRow(line_no, "unparseable OpenCellID row");
    }
    if (*lac < kMinLac || *lac > kMaxLac || *cid > kMaxCellId || !coordinates_in_range(*lat, *lon)) {
      ++out.skipped_rows;
      continue;
    }
    cell.lac = *lac;
    cell.cell_id = *cid;
    auto fresh = parse_freshness(f[c_updated]);
    out.db.insert(cell, make_geo_point(*lat, *lon), fresh.value_or(0));
  }
  return out;
}

void write_cell_db(std::ostream& out, const CellDatabase& db)
{
  out << kCellDbHeader << '\n';
  auto opt = [](const std::optional<std::uint16_t>& v) { return v ? std::to_string(*v) : std::string(); };
  for (const auto& [cell, row] : db.rows())
    out << opt(cell.mcc) << ',' << opt(cell.mnc) << ',' << cell.lac << ',' << cell.cell_id << ','
        << csv::format_double(row.point.lat) << ',' << csv::format_double(row.point.lon) << ','
        << row.freshness << '\n';
}

Lookup resolve_cell(const CellDatabase& db, const CellIdentity& cell, MatchPolicy policy)
{
  if (const auto* row = db.find_exact(cell)) return {ResolvedCell{cell, row->point, MatchKind::exact}, false};
  if (policy == MatchPolicy::exact_only || !cell.is_partial()) return {};
  const auto found = db.candidates(cell);
  if (found.empty()) return {};
  return {ResolvedCell{cell, found.front().second.point, MatchKind::wildcard}, found.size() > 1};
}

Resolution resolve_all(const CellDatabase& db, const CellSet& cells, MatchPolicy policy)
{
  Resolution out;
  out.stats.total = cells.size();
  for (const auto& cell : cells) {
    auto lookup = resolve_cell(db, cell, policy);
    if (lookup.resolved) {
      out.resolved.push_back(*lookup.resolved);
      if (lookup.ambiguous) ++out.stats.wildcard_ambiguous;
    } else {
      out.unresolved.push_back(cell);
    }
  }
  out.stats.resolved = out.resolved.size();
  out.stats.unresolved = out.unresolved.size();
  return out;
}

std::vector<std::optional<GeoPoint>> DatabaseLookupClient::query_batch(std::span<const CellIdentity> cells)
{
  std::vector<std::optional<GeoPoint>> out;
  out.reserve(cells.size());
  for (const auto& c : cells) {
    const auto* row = db_.find_exact(c);
    out.push_back(row ? std::optional<GeoPoint>(row->point) : std::nullopt);
  }
  return out;
}

CachingLookupClient::CachingLookupClient(LookupClient& upstream, std::size_t capacity)
  : upstream_(upstream), capacity_(capacity)
{
  if (capacity_ == 0) throw InvalidArgument("cache capacity must be positive");
}

std::optional<std::optional<GeoPoint>> CachingLookupClient::get(const CellIdentity& cell)
{
  std::lock_guard lock(mutex_);
  auto it = index_.find(cell);
  if (it == index_.end()) {
    ++misses_;
    return std::nullopt;
  }
  ++hits_;
  lru_.splice(lru_.begin(), lru_, it->second);
  return it->second->second;
}

void CachingLookupClient::put(const CellIdentity& cell, const std::optional<GeoPoint>& value)
{
  std::lock_guard lock(mutex_);
  if (auto it = index_.find(cell); it != index_.end()) {
    it->second->second = value;
    lru_.splice(lru_.begin(), lru_, it->second);
    return;
  }
  lru_.emplace_front(cell, value);
  index_[cell] = lru_.begin();
  if (lru_.size() > capacity_) {
    index_.erase(lru_.back().first);
    lru_.pop_back();
  }
}

std::vector<std::optional<GeoPoint>> CachingLookupClient::query_batch(std::span<const CellIdentity> cells)
{
  std::vector<std::optional<GeoPoint>> out(cells.size());
  std::vector<CellIdentity> pending;
  std::vector<std::size_t> slots;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (auto hit = get(cells[i])) {
      out[i] = *hit;
    } else {
      pending.push_back(cells[i]);
      slots.push_back(i);
    }
  }
  if (pending.empty()) return out;
  const auto fetched = upstream_.query_batch(pending);
  if (fetched.size() != pending.size()) throw Error("lookup client returned a short batch");
  for (std::size_t k = 0; k < pending.size(); ++k) {
    out[slots[k]] = fetched[k];
    put(pending[k], fetched[k]);
  }
  return out;
}

std::size_t CachingLookupClient::cached() const
{
  std::lock_guard lock(mutex_);
  return lru_.size();
}

std::size_t CachingLookupClient::hits() const
{
  std::lock_guard lock(mutex_);
  return hits_;
}

std::size_t CachingLookupClient::misses() const
{
  std::lock_guard lock(mutex_);
  return misses_;
}

} // namespace lacclean
