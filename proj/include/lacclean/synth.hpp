#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string_view>
#include <utility>
#include <vector>

#include "lacclean/cell.hpp"
#include "lacclean/cluster.hpp"
#include "lacclean/geo.hpp"
#include "lacclean/ingest.hpp"
#include "lacclean/resolver.hpp"

namespace lacclean {

/// Recorded in world manifests; every generator draws from std::mt19937_64.
inline constexpr std::string_view kPrngId = "mt19937_64";

/// Clean cells of a location area never lie farther than this from its center.
inline constexpr double kMaxLacRadiusM = 35000.0;
inline constexpr double kMinLacSeparationM = 80000.0;
inline constexpr std::size_t kPlacementAttempts = 10000;

struct BoundingBox
{
  double min_lat = 30.0;
  double max_lat = 48.0;
  double min_lon = -120.0;
  double max_lon = -75.0;
};

struct TopologyConfig
{
  std::size_t lac_count = 14;
  std::size_t cells_per_lac = 22;
  double cell_radius_m = 500.0;
  BoundingBox region;
  std::uint16_t mcc = 310;
  std::uint16_t mnc = 26;
  std::uint32_t first_lac = 1001;
};

struct OutlierSpec
{
  double rate = 0.0;
  double displacement_min_m = 50000.0;
  double displacement_max_m = 60000.0;
};

enum class TruthLabel
{
  clean,
  outlier
};

struct SynthCell
{
  CellIdentity cell;
  GeoPoint true_point;
  GeoPoint stored_point;  ///< what the exported database reports
  TruthLabel label = TruthLabel::clean;
};

struct SynthLac
{
  std::uint32_t lac = 0;
  GeoPoint center;
  double cell_radius_m = 0;
  std::vector<SynthCell> cells;  ///< hexagonal spiral order
};

struct SyntheticWorld
{
  TopologyConfig config;
  std::uint64_t seed = 0;
  std::optional<std::pair<OutlierSpec, std::uint64_t>> injection;
  std::vector<SynthLac> lacs;

  std::size_t cell_count() const noexcept;
  std::size_t outlier_count() const noexcept;

  /// Matches on every field present in `cell`; nullptr when no cell or more
  /// than one cell matches.
  const SynthCell* find(const CellIdentity& cell) const;
};

/// East/north offsets in meters of the first `count` sites of a hexagonal
/// lattice: the center, then ring by ring, each ring clockwise from north.
std::vector<std::pair<double, double>> hex_spiral_offsets(std::size_t count, double spacing_m);

/// Number of rings needed to hold `count` sites.
std::size_t hex_ring_count(std::size_t count);

/// Neighbor spacing of the lattice for a given cell radius.
inline double hex_spacing(double cell_radius_m)
{
  return 1.7320508075688772 * cell_radius_m;
}

/// Throws InvalidArgument on bad config and RegionTooSmall when the area
/// centers cannot be separated within kPlacementAttempts draws.
SyntheticWorld generate_topology(const TopologyConfig& config, std::uint64_t seed);

/// Displaces floor(rate * size) randomly chosen cells per area by a random
/// distance in [displacement_min_m, displacement_max_m] at a random bearing.
SyntheticWorld inject_outliers(SyntheticWorld world, const OutlierSpec& spec, std::uint64_t seed);

struct TraceOptions
{
  Timestamp start = Timestamp{std::chrono::seconds{1093996800}};  // 2004-09-01T00:00:00Z
  std::chrono::seconds spacing{60};
  bool strip_operator = false;  ///< emit cells without mcc/mnc
};

/// The first min(event_count, cells) events visit every cell once; the rest
/// draw cells with weight 1/rank inside their area.
std::vector<TraceEvent> generate_trace(const SyntheticWorld& world, std::size_t event_count,
                                       std::uint64_t seed, const TraceOptions& options = {});

CellDatabase world_database(const SyntheticWorld& world);
void export_world_db(std::ostream& out, const SyntheticWorld& world);

void write_world_manifest(std::ostream& out, const SyntheticWorld& world);
/// Throws MalformedRow (line 0) on structural problems.
SyntheticWorld read_world_manifest(std::istream& in);

struct DetectionScore
{
  double precision = 1.0;
  double recall = 1.0;
  std::size_t flagged = 0;
  std::size_t true_outliers = 0;
  std::size_t true_positives = 0;
};

/// Flagged cells are the outlier bucket of `result`. Throws WorldMismatch
/// when the result names a cell the world does not contain.
DetectionScore score_detection(const CleanResult& result, const SyntheticWorld& world);

} // namespace lacclean
