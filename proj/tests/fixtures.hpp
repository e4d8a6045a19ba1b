#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "lacclean/cluster.hpp"
#include "lacclean/geo.hpp"
#include "lacclean/synth.hpp"

namespace fixtures {

inline lacclean::ResolvedCell cell(std::uint32_t lac, std::uint32_t cell_id, double lat, double lon)
{
  return {lacclean::CellIdentity{310, 26, lac, cell_id}, {lat, lon}, lacclean::MatchKind::exact};
}

/// Latitude reached `meters` north of `lat0` along a meridian.
inline double north_of(double lat0, double meters)
{
  return lat0 + lacclean::rad_to_deg(meters / lacclean::kEarthRadiusM<double>);
}

/// Points scattered uniformly in a small box around (lat0, lon0).
inline std::vector<lacclean::GeoPoint> random_points(std::mt19937_64& rng, std::size_t n, double lat0, double lon0,
                                                     double half_span_deg)
{
  std::uniform_real_distribution<double> u(-half_span_deg, half_span_deg);
  std::vector<lacclean::GeoPoint> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back({lat0 + u(rng), lacclean::normalize_lon(lon0 + u(rng))});
  return pts;
}

inline std::vector<lacclean::ResolvedCell> as_cells(const std::vector<lacclean::GeoPoint>& pts, std::uint32_t lac = 7)
{
  std::vector<lacclean::ResolvedCell> out;
  for (std::size_t i = 0; i < pts.size(); ++i) out.push_back(cell(lac, static_cast<std::uint32_t>(i + 1), pts[i].lat, pts[i].lon));
  return out;
}

/// 14 areas of 20 clean cells (spread under 2 km) plus 2 cells displaced
/// 50-60 km each.
inline lacclean::SyntheticWorld separation_world(std::uint64_t seed = 2024)
{
  lacclean::TopologyConfig cfg;
  cfg.lac_count = 14;
  cfg.cells_per_lac = 22;
  cfg.cell_radius_m = 150.0;
  auto world = lacclean::generate_topology(cfg, seed);
  return lacclean::inject_outliers(std::move(world), {0.1, 50000.0, 60000.0}, seed + 1);
}

inline std::vector<lacclean::ResolvedCell> resolve_world(const lacclean::SyntheticWorld& world)
{
  std::vector<lacclean::CellIdentity> ids;
  for (const auto& l : world.lacs)
    for (const auto& c : l.cells) ids.push_back(c.cell);
  return lacclean::resolve_all(lacclean::world_database(world), lacclean::CellSet(ids)).resolved;
}

/// One area: `dense` cells within ~300 m plus two far cells.
inline std::vector<lacclean::ResolvedCell> threshold_fixture(std::size_t dense)
{
  std::vector<lacclean::ResolvedCell> cells;
  for (std::size_t i = 0; i < dense; ++i)
    cells.push_back(cell(500, static_cast<std::uint32_t>(i + 1), north_of(40.0, 30.0 * static_cast<double>(i)), -75.0));
  cells.push_back(cell(500, 100, north_of(40.0, 60000.0), -75.0));
  cells.push_back(cell(500, 101, north_of(40.0, -70000.0), -75.0));
  return cells;
}

} // namespace fixtures
