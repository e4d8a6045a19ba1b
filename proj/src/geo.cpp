#include "lacclean/geo.hpp"

#include <string>

namespace lacclean {

std::string_view to_string(DistanceMetric m) noexcept
{
  switch (m) {
  case DistanceMetric::equirect_m:
    return "equirect_m";
  case DistanceMetric::haversine_m:
    return "haversine_m";
  case DistanceMetric::degrees_euclid:
    return "degrees_euclid";
  }
  return "unknown";
}

DistanceMetric parse_metric(std::string_view name)
{
  if (name == "equirect" || name == "equirect_m") return DistanceMetric::equirect_m;
  if (name == "haversine" || name == "haversine_m") return DistanceMetric::haversine_m;
  if (name == "degrees" || name == "degrees_euclid") return DistanceMetric::degrees_euclid;
  throw InvalidArgument("unknown distance metric '" + std::string(name) + "'");
}

} // namespace lacclean
