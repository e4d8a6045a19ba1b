#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "lacclean/geo.hpp"
#include "lacclean/resolver.hpp"

namespace lacclean {

enum class Linkage
{
  centroid,  ///< distance between cluster centroids, recomputed per merge
  single,
  complete,
  average
};

std::string_view to_string(Linkage l) noexcept;
Linkage parse_linkage(std::string_view name);

struct ClusterParams
{
  Linkage linkage = Linkage::centroid;
  double cutoff = 35000.0;  ///< in the metric's units
  std::size_t min_size = 10;
  DistanceMetric metric = DistanceMetric::equirect_m;
};

/// Throws InvalidArgument unless cutoff > 0 and min_size >= 1.
void validate(const ClusterParams& params);

/// The cells of one location area, in canonical identity order.
struct LacGroup
{
  std::uint32_t lac = 0;
  std::vector<ResolvedCell> members;
};

/// One group per distinct lac, ascending. Cells repeated with the same
/// identity are collapsed to one (smallest coordinates kept).
std::vector<LacGroup> group_by_lac(std::span<const ResolvedCell> cells);

template <typename Scalar>
using ProximityMatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using ProximityMatrix = ProximityMatrixT<double>;

/// Symmetric pairwise distances, zero diagonal. Throws EmptyGroup.
template <typename Scalar>
ProximityMatrixT<Scalar> proximity_matrix(std::span<const GeoPointT<Scalar>> points, DistanceMetric metric)
{
  if (points.empty()) throw EmptyGroup("proximity matrix of an empty group");
  const auto n = static_cast<Eigen::Index>(points.size());
  ProximityMatrixT<Scalar> d = ProximityMatrixT<Scalar>::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      d(i, j) = d(j, i) = distance(points[i], points[j], metric);
  return d;
}

ProximityMatrix proximity_matrix(const LacGroup& group, DistanceMetric metric);

/// One accepted merge. Leaves carry ids 0..n-1, the k-th merge creates id
/// n+k. `left` is the side holding the lower-ranked member.
struct Merge
{
  std::size_t left = 0;
  std::size_t right = 0;
  double distance = 0;
  std::size_t id = 0;

  friend bool operator==(const Merge&, const Merge&) = default;
};

struct Dendrogram
{
  std::size_t leaf_count = 0;
  std::vector<Merge> merges;
};

/// Cutoff-bounded closest-pair agglomeration.
///
/// Repeatedly merges the globally closest pair of clusters while that
/// distance is <= params.cutoff. Equal distances are resolved by the lowest
/// member rank of the left cluster, then of the right. Runs in O(n^2 log n)
/// time and O(n^2) memory for every linkage.
Dendrogram agglomerate(std::span<const GeoPoint> points, const ClusterParams& params);
Dendrogram agglomerate(const LacGroup& group, const ClusterParams& params);

/// Component label per leaf, labels numbered by lowest member rank.
std::vector<std::size_t> flat_labels(const Dendrogram& dend);

using Cluster = std::vector<ResolvedCell>;

/// Connected components of the accepted merges, ordered by lowest member.
/// Throws MismatchedInput when the leaf count differs from the group size.
std::vector<Cluster> flat_clusters(const Dendrogram& dend, const LacGroup& group);

enum class LacStatus
{
  ok,
  insufficient_density
};

std::string_view to_string(LacStatus s) noexcept;

struct LacCleanResult
{
  std::uint32_t lac = 0;
  LacStatus status = LacStatus::ok;
  std::vector<ResolvedCell> representative;
  std::vector<ResolvedCell> outliers;
  /// Every member when status is insufficient_density, else empty.
  std::vector<ResolvedCell> insufficient;
  /// Non-representative clusters that still reached min_size. They are
  /// part of `outliers`; listed here for diagnostics.
  std::vector<Cluster> discarded_dense;
};

/// Picks the largest cluster with at least `min_size` members; ties go to the
/// smaller mean member-to-centroid distance, then to the smallest member.
LacCleanResult select_representative(std::span<const Cluster> clusters, std::size_t min_size,
                                     DistanceMetric metric = DistanceMetric::equirect_m);

struct CleanStats
{
  std::size_t lacs = 0;
  std::size_t ok_lacs = 0;
  std::size_t insufficient_lacs = 0;
  std::size_t input_cells = 0;
  std::size_t retained = 0;
  std::size_t outliers = 0;
  std::size_t insufficient_cells = 0;
  std::size_t discarded_dense_clusters = 0;

  friend bool operator==(const CleanStats&, const CleanStats&) = default;
};

struct CleanResult
{
  std::vector<LacCleanResult> lacs;  ///< ascending lac
  CleanStats stats;
};

/// Full per-location-area cleaning. With threads > 1 the areas are processed
/// concurrently; the result is identical to the sequential run.
CleanResult clean_dataset(std::span<const ResolvedCell> cells, const ClusterParams& params,
                          std::size_t threads = 1);

/// All representative cells, in lac then identity order.
std::vector<ResolvedCell> retained_cells(const CleanResult& result);

} // namespace lacclean
