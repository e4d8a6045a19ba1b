#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <string_view>

#include "lacclean/errors.hpp"

namespace lacclean {

/// Geographic position in degrees (WGS-84 assumed). lon lives in [-180, 180).
template <typename Scalar>
struct GeoPointT
{
  Scalar lat{};
  Scalar lon{};

  friend bool operator==(const GeoPointT&, const GeoPointT&) = default;
};

using GeoPoint = GeoPointT<double>;

enum class DistanceMetric
{
  equirect_m,     ///< local equirectangular projection, meters
  haversine_m,    ///< great circle, meters
  degrees_euclid  ///< plain Euclidean distance on (lat, lon) degrees
};

std::string_view to_string(DistanceMetric m) noexcept;
/// Accepts "equirect", "equirect_m", "haversine", "haversine_m", "degrees",
/// "degrees_euclid". Throws InvalidArgument otherwise.
DistanceMetric parse_metric(std::string_view name);

/// IUGG mean Earth radius.
template <typename Scalar>
inline constexpr Scalar kEarthRadiusM = Scalar(6371008.8);

template <typename Scalar>
constexpr Scalar deg_to_rad(Scalar deg) noexcept
{
  return deg * (std::numbers::pi_v<Scalar> / Scalar(180));
}

template <typename Scalar>
constexpr Scalar rad_to_deg(Scalar rad) noexcept
{
  return rad * (Scalar(180) / std::numbers::pi_v<Scalar>);
}

/// Maps any finite longitude onto [-180, 180).
template <typename Scalar>
Scalar normalize_lon(Scalar lon) noexcept
{
  if (lon >= Scalar(-180) && lon < Scalar(180)) return lon;
  Scalar r = std::fmod(lon + Scalar(180), Scalar(360));
  if (r < 0) r += Scalar(360);
  r -= Scalar(180);
  return r >= Scalar(180) ? r - Scalar(360) : r;
}

/// Signed longitude difference b - a folded onto [-180, 180).
template <typename Scalar>
Scalar wrapped_lon_delta(Scalar a, Scalar b) noexcept
{
  return normalize_lon(b - a);
}

/// Unsigned minimal longitude separation in [0, 180]. Symmetric in (a, b)
/// bit for bit.
template <typename Scalar>
Scalar lon_separation(Scalar a, Scalar b) noexcept
{
  Scalar d = std::fmod(std::fabs(b - a), Scalar(360));
  return d > Scalar(180) ? Scalar(360) - d : d;
}

/// Validating constructor; normalizes lon. Throws InvalidArgument.
template <typename Scalar>
GeoPointT<Scalar> make_geo_point(Scalar lat, Scalar lon)
{
  if (!std::isfinite(lat) || !std::isfinite(lon))
    throw InvalidArgument("non-finite coordinate");
  if (lat < Scalar(-90) || lat > Scalar(90))
    throw InvalidArgument("latitude out of range");
  return {lat, normalize_lon(lon)};
}

template <typename Scalar>
Scalar equirect_distance(const GeoPointT<Scalar>& a, const GeoPointT<Scalar>& b) noexcept
{
  const Scalar mean_lat = deg_to_rad((a.lat + b.lat) / Scalar(2));
  const Scalar dx = kEarthRadiusM<Scalar> * deg_to_rad(lon_separation(a.lon, b.lon)) * std::cos(mean_lat);
  const Scalar dy = kEarthRadiusM<Scalar> * deg_to_rad(std::fabs(b.lat - a.lat));
  return std::hypot(dx, dy);
}

template <typename Scalar>
Scalar haversine_distance(const GeoPointT<Scalar>& a, const GeoPointT<Scalar>& b) noexcept
{
  const Scalar s_lat = std::sin(deg_to_rad(b.lat - a.lat) / Scalar(2));
  const Scalar s_lon = std::sin(deg_to_rad(lon_separation(a.lon, b.lon)) / Scalar(2));
  const Scalar h = s_lat * s_lat + std::cos(deg_to_rad(a.lat)) * std::cos(deg_to_rad(b.lat)) * s_lon * s_lon;
  return Scalar(2) * kEarthRadiusM<Scalar> * std::asin(std::sqrt(std::min(h, Scalar(1))));
}

template <typename Scalar>
Scalar degrees_distance(const GeoPointT<Scalar>& a, const GeoPointT<Scalar>& b) noexcept
{
  return std::hypot(b.lat - a.lat, lon_separation(a.lon, b.lon));
}

template <typename Scalar>
Scalar distance(const GeoPointT<Scalar>& a, const GeoPointT<Scalar>& b,
                DistanceMetric metric = DistanceMetric::equirect_m) noexcept
{
  switch (metric) {
  case DistanceMetric::equirect_m:
    return equirect_distance(a, b);
  case DistanceMetric::haversine_m:
    return haversine_distance(a, b);
  case DistanceMetric::degrees_euclid:
    return degrees_distance(a, b);
  }
  return Scalar(0);
}

/// Mean of lat and of lon unwrapped relative to the first point.
/// Throws EmptyInput, or AntimeridianSpread when the unwrapped longitudes
/// span more than 180 degrees.
template <typename Scalar>
GeoPointT<Scalar> centroid(std::span<const GeoPointT<Scalar>> points)
{
  if (points.empty()) throw EmptyInput("centroid of an empty point set");
  const Scalar ref = points.front().lon;
  Scalar sum_lat = 0;
  Scalar sum_lon = 0;
  Scalar lo = ref;
  Scalar hi = ref;
  for (const auto& p : points) {
    const Scalar lon = ref + wrapped_lon_delta(ref, p.lon);
    lo = std::min(lo, lon);
    hi = std::max(hi, lon);
    sum_lat += p.lat;
    sum_lon += lon;
  }
  if (hi - lo > Scalar(180)) throw AntimeridianSpread("longitude spread exceeds 180 degrees");
  const auto n = static_cast<Scalar>(points.size());
  return {sum_lat / n, normalize_lon(sum_lon / n)};
}

/// Point reached by travelling `distance_m` along the great circle leaving
/// `origin` at `bearing_deg` (clockwise from north).
template <typename Scalar>
GeoPointT<Scalar> destination(const GeoPointT<Scalar>& origin, Scalar bearing_deg, Scalar distance_m) noexcept
{
  const Scalar delta = distance_m / kEarthRadiusM<Scalar>;
  const Scalar theta = deg_to_rad(bearing_deg);
  const Scalar phi1 = deg_to_rad(origin.lat);
  const Scalar sin_phi2 = std::sin(phi1) * std::cos(delta) + std::cos(phi1) * std::sin(delta) * std::cos(theta);
  const Scalar phi2 = std::asin(std::clamp(sin_phi2, Scalar(-1), Scalar(1)));
  const Scalar dlambda = std::atan2(std::sin(theta) * std::sin(delta) * std::cos(phi1),
                                    std::cos(delta) - std::sin(phi1) * sin_phi2);
  return {rad_to_deg(phi2), normalize_lon(origin.lon + rad_to_deg(dlambda))};
}

} // namespace lacclean
