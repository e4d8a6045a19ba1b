#include "lacclean/synth.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lacclean/errors.hpp"

namespace lacclean {

using nlohmann::json;

std::size_t SyntheticWorld::cell_count() const noexcept
{
  std::size_t n = 0;
  for (const auto& l : lacs) n += l.cells.size();
  return n;
}

std::size_t SyntheticWorld::outlier_count() const noexcept
{
  std::size_t n = 0;
  for (const auto& l : lacs)
    for (const auto& c : l.cells) n += c.label == TruthLabel::outlier ? 1 : 0;
  return n;
}

const SynthCell* SyntheticWorld::find(const CellIdentity& cell) const
{
  const SynthCell* match = nullptr;
  for (const auto& l : lacs) {
    if (l.lac != cell.lac) continue;
    for (const auto& c : l.cells) {
      if (c.cell.cell_id != cell.cell_id) continue;
      if (cell.mcc && c.cell.mcc != cell.mcc) continue;
      if (cell.mnc && c.cell.mnc != cell.mnc) continue;
      if (match) return nullptr;
      match = &c;
    }
  }
  return match;
}

std::size_t hex_ring_count(std::size_t count)
{
  std::size_t rings = 0;
  while (1 + 3 * rings * (rings + 1) < count) ++rings;
  return rings;
}

std::vector<std::pair<double, double>> hex_spiral_offsets(std::size_t count, double spacing_m)
{
  std::vector<std::pair<double, double>> out;
  if (count == 0) return out;
  out.reserve(count);
  out.emplace_back(0.0, 0.0);
  // unit steps at bearings 0, 60, ..., 300 degrees as (east, north)
  auto step = [](std::size_t m) {
    const double b = deg_to_rad(60.0 * static_cast<double>(m % 6));
    return std::pair{std::sin(b), std::cos(b)};
  };
  for (std::size_t ring = 1; out.size() < count; ++ring) {
    const auto k = static_cast<double>(ring);
    for (std::size_t side = 0; side < 6 && out.size() < count; ++side) {
      const auto [ce, cn] = step(side);
      const auto [de, dn] = step(side + 2);
      for (std::size_t t = 0; t < ring && out.size() < count; ++t) {
        const auto s = static_cast<double>(t);
        out.emplace_back(spacing_m * (k * ce + s * de), spacing_m * (k * cn + s * dn));
      }
    }
  }
  return out;
}

namespace {

void check_config(const TopologyConfig& c)
{
  if (c.lac_count < 1 || c.cells_per_lac < 1) throw InvalidArgument("lac and cell counts must be at least 1");
  if (!(c.cell_radius_m > 0) || !std::isfinite(c.cell_radius_m)) throw InvalidArgument("cell radius must be positive");
  const auto& r = c.region;
  if (!(r.min_lat < r.max_lat) || !(r.min_lon < r.max_lon) || r.min_lat < -90 || r.max_lat > 90 ||
      r.min_lon < -180 || r.max_lon > 180)
    throw InvalidArgument("invalid region bounding box");
  if (c.mcc > kMaxOperatorCode || c.mnc > kMaxOperatorCode) throw InvalidArgument("operator code out of range");
  if (c.first_lac < kMinLac || c.first_lac + c.lac_count - 1 > kMaxLac) throw InvalidArgument("lac codes out of range");
  if (c.cells_per_lac > kMaxCellId) throw InvalidArgument("too many cells per lac");
  const double extent = static_cast<double>(hex_ring_count(c.cells_per_lac)) * hex_spacing(c.cell_radius_m);
  if (extent > kMaxLacRadiusM)
    throw InvalidArgument(fmt::format("hexagonal layout reaches {:.0f} m from the area center (limit {:.0f} m)",
                                      extent, kMaxLacRadiusM));
}

} // namespace

SyntheticWorld generate_topology(const TopologyConfig& config, std::uint64_t seed)
{
  check_config(config);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> lat_dist(config.region.min_lat, config.region.max_lat);
  std::uniform_real_distribution<double> lon_dist(config.region.min_lon, config.region.max_lon);

  std::vector<GeoPoint> centers;
  std::size_t attempts = 0;
  while (centers.size() < config.lac_count) {
    if (attempts++ >= kPlacementAttempts)
      throw RegionTooSmall(fmt::format("placed {} of {} areas after {} attempts", centers.size(), config.lac_count,
                                       kPlacementAttempts));
    const GeoPoint p{lat_dist(rng), normalize_lon(lon_dist(rng))};
    const bool separated = std::all_of(centers.begin(), centers.end(), [&](const GeoPoint& q) {
      return haversine_distance(p, q) >= kMinLacSeparationM;
    });
    if (separated) centers.push_back(p);
  }

  SyntheticWorld world;
  world.config = config;
  world.seed = seed;
  const auto offsets = hex_spiral_offsets(config.cells_per_lac, hex_spacing(config.cell_radius_m));
  for (std::size_t i = 0; i < centers.size(); ++i) {
    SynthLac lac;
    lac.lac = config.first_lac + static_cast<std::uint32_t>(i);
    lac.center = centers[i];
    lac.cell_radius_m = config.cell_radius_m;
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      const auto [east, north] = offsets[k];
      const double dist = std::hypot(east, north);
      const GeoPoint p = dist == 0 ? lac.center : destination(lac.center, rad_to_deg(std::atan2(east, north)), dist);
      SynthCell cell;
      cell.cell = CellIdentity{config.mcc, config.mnc, lac.lac, static_cast<std::uint32_t>(k + 1)};
      cell.true_point = p;
      cell.stored_point = p;
      lac.cells.push_back(cell);
    }
    world.lacs.push_back(std::move(lac));
  }
  return world;
}

SyntheticWorld inject_outliers(SyntheticWorld world, const OutlierSpec& spec, std::uint64_t seed)
{
  if (!(spec.rate >= 0 && spec.rate <= 1)) throw InvalidArgument("outlier rate must lie in [0, 1]");
  if (!(spec.displacement_min_m >= 0) || !(spec.displacement_min_m <= spec.displacement_max_m))
    throw InvalidArgument("displacement bounds must satisfy 0 <= min <= max");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> bearing(0.0, 360.0);
  std::uniform_real_distribution<double> displacement(spec.displacement_min_m, spec.displacement_max_m);
  for (auto& lac : world.lacs) {
    const auto count = static_cast<std::size_t>(std::floor(spec.rate * static_cast<double>(lac.cells.size()) + 1e-9));
    std::vector<std::size_t> order(lac.cells.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
      std::swap(order[i], order[pick(rng)]);
      auto& cell = lac.cells[order[i]];
      const double b = bearing(rng);
      const double d = displacement(rng);
      cell.stored_point = destination(cell.true_point, b, d);
      cell.label = TruthLabel::outlier;
    }
  }
  world.injection = std::pair{spec, seed};
  return world;
}

std::vector<TraceEvent> generate_trace(const SyntheticWorld& world, std::size_t event_count, std::uint64_t seed,
                                       const TraceOptions& options)
{
  std::vector<CellIdentity> cells;
  std::vector<double> weights;
  for (const auto& lac : world.lacs) {
    for (std::size_t k = 0; k < lac.cells.size(); ++k) {
      auto id = lac.cells[k].cell;
      if (options.strip_operator) id.mcc.reset(), id.mnc.reset();
      cells.push_back(id);
      weights.push_back(1.0 / static_cast<double>(k + 1));
    }
  }

  std::vector<TraceEvent> events;
  if (cells.empty()) return events;
  events.reserve(event_count);
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> visit(weights.begin(), weights.end());
  for (std::size_t i = 0; i < event_count; ++i) {
    const auto& cell = i < cells.size() ? cells[i] : cells[visit(rng)];
    events.push_back({options.start + options.spacing * static_cast<long>(i), cell});
  }
  return events;
}

CellDatabase world_database(const SyntheticWorld& world)
{
  CellDatabase db;
  for (const auto& lac : world.lacs)
    for (const auto& c : lac.cells) db.insert(c.cell, c.stored_point, 1);
  return db;
}

void export_world_db(std::ostream& out, const SyntheticWorld& world)
{
  write_cell_db(out, world_database(world));
}

namespace {

json point_json(const GeoPoint& p)
{
  return json::array({p.lat, p.lon});
}

GeoPoint point_from(const json& j)
{
  return make_geo_point(j.at(0).get<double>(), j.at(1).get<double>());
}

json opt_json(const std::optional<std::uint16_t>& v)
{
  return v ? json(*v) : json(nullptr);
}

std::optional<std::uint16_t> opt_from(const json& j)
{
  if (j.is_null()) return std::nullopt;
  return j.get<std::uint16_t>();
}

} // namespace

void write_world_manifest(std::ostream& out, const SyntheticWorld& world)
{
  const auto& c = world.config;
  json j;
  j["format"] = "lacclean-world";
  j["version"] = 1;
  j["prng"] = kPrngId;
  j["seed"] = world.seed;
  j["config"] = {{"lac_count", c.lac_count},
                 {"cells_per_lac", c.cells_per_lac},
                 {"cell_radius_m", c.cell_radius_m},
                 {"region", {c.region.min_lat, c.region.max_lat, c.region.min_lon, c.region.max_lon}},
                 {"mcc", c.mcc},
                 {"mnc", c.mnc},
                 {"first_lac", c.first_lac}};
  if (world.injection) {
    const auto& [spec, seed] = *world.injection;
    j["injection"] = {{"rate", spec.rate},
                      {"displacement_min_m", spec.displacement_min_m},
                      {"displacement_max_m", spec.displacement_max_m},
                      {"seed", seed}};
  } else {
    j["injection"] = nullptr;
  }
  json lacs = json::array();
  for (const auto& l : world.lacs) {
    json cells = json::array();
    for (const auto& cell : l.cells) {
      cells.push_back({{"mcc", opt_json(cell.cell.mcc)},
                       {"mnc", opt_json(cell.cell.mnc)},
                       {"cell_id", cell.cell.cell_id},
                       {"true", point_json(cell.true_point)},
                       {"stored", point_json(cell.stored_point)},
                       {"label", cell.label == TruthLabel::clean ? "clean" : "outlier"}});
    }
    lacs.push_back({{"lac", l.lac}, {"center", point_json(l.center)}, {"cell_radius_m", l.cell_radius_m},
                    {"cells", std::move(cells)}});
  }
  j["lacs"] = std::move(lacs);
  out << j.dump(1) << '\n';
}

SyntheticWorld read_world_manifest(std::istream& in)
{
  try {
    const json j = json::parse(in);
    if (j.at("format") != "lacclean-world") throw MalformedRow(0, "not a world manifest");
    SyntheticWorld w;
    w.seed = j.at("seed").get<std::uint64_t>();
    const auto& c = j.at("config");
    w.config.lac_count = c.at("lac_count");
    w.config.cells_per_lac = c.at("cells_per_lac");
    w.config.cell_radius_m = c.at("cell_radius_m");
    const auto& r = c.at("region");
    w.config.region = {r.at(0), r.at(1), r.at(2), r.at(3)};
    w.config.mcc = c.at("mcc");
    w.config.mnc = c.at("mnc");
    w.config.first_lac = c.at("first_lac");
    if (const auto& inj = j.at("injection"); !inj.is_null()) {
      OutlierSpec spec{inj.at("rate"), inj.at("displacement_min_m"), inj.at("displacement_max_m")};
      w.injection = std::pair{spec, inj.at("seed").get<std::uint64_t>()};
    }
    for (const auto& jl : j.at("lacs")) {
      SynthLac l;
      l.lac = jl.at("lac");
      l.center = point_from(jl.at("center"));
      l.cell_radius_m = jl.at("cell_radius_m");
      for (const auto& jc : jl.at("cells")) {
        SynthCell cell;
        cell.cell = CellIdentity{opt_from(jc.at("mcc")), opt_from(jc.at("mnc")), l.lac, jc.at("cell_id")};
        cell.true_point = point_from(jc.at("true"));
        cell.stored_point = point_from(jc.at("stored"));
        const auto label = jc.at("label").get<std::string>();
        if (label != "clean" && label != "outlier") throw MalformedRow(0, "unknown label '" + label + "'");
        cell.label = label == "clean" ? TruthLabel::clean : TruthLabel::outlier;
        l.cells.push_back(cell);
      }
      w.lacs.push_back(std::move(l));
    }
    return w;
  } catch (const json::exception& e) {
    throw MalformedRow(0, std::string("world manifest: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw MalformedRow(0, std::string("world manifest: ") + e.what());
  }
}

DetectionScore score_detection(const CleanResult& result, const SyntheticWorld& world)
{
  DetectionScore s;
  auto lookup = [&](const ResolvedCell& c) {
    const auto* found = world.find(c.cell);
    if (!found) throw WorldMismatch("cell " + to_string(c.cell) + " is not part of the world");
    return found;
  };
  for (const auto& lac : result.lacs) {
    for (const auto& c : lac.representative) lookup(c);
    for (const auto& c : lac.insufficient) lookup(c);
    for (const auto& c : lac.outliers) {
      ++s.flagged;
      if (lookup(c)->label == TruthLabel::outlier) ++s.true_positives;
    }
  }
  s.true_outliers = world.outlier_count();
  s.precision = s.flagged ? static_cast<double>(s.true_positives) / static_cast<double>(s.flagged) : 1.0;
  s.recall = s.true_outliers ? static_cast<double>(s.true_positives) / static_cast<double>(s.true_outliers) : 1.0;
  return s;
}

} // namespace lacclean
