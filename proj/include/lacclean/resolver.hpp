#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <list>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "lacclean/cell.hpp"
#include "lacclean/geo.hpp"

namespace lacclean {

enum class MatchKind
{
  exact,
  wildcard
};

enum class MatchPolicy
{
  exact_only,
  allow_wildcard
};

std::string_view to_string(MatchPolicy p) noexcept;
MatchPolicy parse_policy(std::string_view name);

struct ResolvedCell
{
  CellIdentity cell;  ///< the queried identity, possibly partial
  GeoPoint point;
  MatchKind match_kind = MatchKind::exact;

  friend bool operator==(const ResolvedCell&, const ResolvedCell&) = default;
};

struct ResolutionStats
{
  std::size_t total = 0;
  std::size_t resolved = 0;
  std::size_t unresolved = 0;
  std::size_t wildcard_ambiguous = 0;

  friend bool operator==(const ResolutionStats&, const ResolutionStats&) = default;
};

inline constexpr std::string_view kCellDbHeader = "mcc,mnc,lac,cell_id,lat,lon,freshness";

/// Cell-ID to coordinate table. Immutable once loaded; at most one row per
/// exact identity (highest freshness wins, ties go to the later row).
class CellDatabase
{
public:
  struct Row
  {
    GeoPoint point;
    std::int64_t freshness = 0;
  };

  CellDatabase() = default;

  /// Applies the conflict rule against any row already stored.
  void insert(const CellIdentity& cell, const GeoPoint& point, std::int64_t freshness = 0);

  const Row* find_exact(const CellIdentity& cell) const;

  /// Rows sharing lac and cell_id with `cell` whose fields agree with
  /// every field present in `cell`, in canonical order.
  std::vector<std::pair<CellIdentity, Row>> candidates(const CellIdentity& cell) const;

  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }
  const std::map<CellIdentity, Row>& rows() const noexcept { return rows_; }

private:
  std::map<CellIdentity, Row> rows_;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<CellIdentity>> by_lac_cell_;
};

/// Native cell-DB CSV. Throws MalformedRow (also for out-of-range
/// coordinates).
CellDatabase load_cell_db(std::istream& in);

struct OpenCellIdImport
{
  CellDatabase db;
  std::size_t skipped_rows = 0;
};

/// Adapter for OpenCellID exports
/// (`radio,mcc,net,area,cell,unit,lon,lat,range,samples,changeable,created,updated,averageSignal`).
/// `net` maps to mnc, `area` to lac, `updated` to freshness. Rows whose
/// codes fall outside the GSM ranges are skipped and counted.
OpenCellIdImport load_opencellid(std::istream& in);

void write_cell_db(std::ostream& out, const CellDatabase& db);

struct Lookup
{
  std::optional<ResolvedCell> resolved;
  bool ambiguous = false;  ///< several wildcard candidates, smallest taken
};

Lookup resolve_cell(const CellDatabase& db, const CellIdentity& cell,
                    MatchPolicy policy = MatchPolicy::allow_wildcard);

struct Resolution
{
  std::vector<ResolvedCell> resolved;
  std::vector<CellIdentity> unresolved;
  ResolutionStats stats;
};

/// Partitions `cells` into resolved and unresolved, both in CellSet order.
Resolution resolve_all(const CellDatabase& db, const CellSet& cells,
                       MatchPolicy policy = MatchPolicy::allow_wildcard);

/// Batch lookup against an external cell-ID service. Implementations map
/// each queried identity to a position or a miss, in query order.
class LookupClient
{
public:
  virtual ~LookupClient() = default;
  virtual std::vector<std::optional<GeoPoint>> query_batch(std::span<const CellIdentity> cells) = 0;
};

/// Serves exact-match lookups from a local database.
class DatabaseLookupClient final : public LookupClient
{
public:
  explicit DatabaseLookupClient(const CellDatabase& db) : db_(db) {}
  std::vector<std::optional<GeoPoint>> query_batch(std::span<const CellIdentity> cells) override;

private:
  const CellDatabase& db_;
};

/// Bounded LRU cache in front of another client, keyed by identity. Misses
/// are cached too. Thread-safe; concurrent callers may both forward the same
/// uncached identity.
class CachingLookupClient final : public LookupClient
{
public:
  CachingLookupClient(LookupClient& upstream, std::size_t capacity);

  std::vector<std::optional<GeoPoint>> query_batch(std::span<const CellIdentity> cells) override;

  std::size_t cached() const;
  std::size_t hits() const;
  std::size_t misses() const;

private:
  using Entry = std::pair<CellIdentity, std::optional<GeoPoint>>;

  std::optional<std::optional<GeoPoint>> get(const CellIdentity& cell);
  void put(const CellIdentity& cell, const std::optional<GeoPoint>& value);

  LookupClient& upstream_;
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::list<Entry> lru_;
  std::map<CellIdentity, std::list<Entry>::iterator> index_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

} // namespace lacclean
