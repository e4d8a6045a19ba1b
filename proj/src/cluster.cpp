#include "lacclean/cluster.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <optional>
#include <queue>
#include <string>
#include <thread>

#include "lacclean/errors.hpp"

namespace lacclean {

std::string_view to_string(Linkage l) noexcept
{
  switch (l) {
  case Linkage::centroid:
    return "centroid";
  case Linkage::single:
    return "single";
  case Linkage::complete:
    return "complete";
  case Linkage::average:
    return "average";
  }
  return "unknown";
}

Linkage parse_linkage(std::string_view name)
{
  if (name == "centroid") return Linkage::centroid;
  if (name == "single") return Linkage::single;
  if (name == "complete") return Linkage::complete;
  if (name == "average") return Linkage::average;
  throw InvalidArgument("unknown linkage '" + std::string(name) + "'");
}

std::string_view to_string(LacStatus s) noexcept
{
  return s == LacStatus::ok ? "ok" : "insufficient_density";
}

void validate(const ClusterParams& params)
{
  if (!(params.cutoff > 0)) throw InvalidArgument("cutoff must be positive");
  if (params.min_size < 1) throw InvalidArgument("min_size must be at least 1");
}

namespace {

bool by_identity(const ResolvedCell& a, const ResolvedCell& b)
{
  if (a.cell != b.cell) return a.cell < b.cell;
  if (a.point.lat != b.point.lat) return a.point.lat < b.point.lat;
  return a.point.lon < b.point.lon;
}

std::vector<GeoPoint> points_of(std::span<const ResolvedCell> cells)
{
  std::vector<GeoPoint> pts;
  pts.reserve(cells.size());
  for (const auto& c : cells) pts.push_back(c.point);
  return pts;
}

// Candidate merge between the clusters held in slots lo < hi. A cluster lives
// in the slot of its lowest member, so the slot pair is also the tie key.
struct Candidate
{
  double distance;
  std::uint32_t lo;
  std::uint32_t hi;
  std::uint32_t lo_id;
  std::uint32_t hi_id;

  bool operator>(const Candidate& o) const
  {
    if (distance != o.distance) return distance > o.distance;
    if (lo != o.lo) return lo > o.lo;
    return hi > o.hi;
  }
};

} // namespace

std::vector<LacGroup> group_by_lac(std::span<const ResolvedCell> cells)
{
  std::vector<ResolvedCell> sorted(cells.begin(), cells.end());
  std::sort(sorted.begin(), sorted.end(), [](const ResolvedCell& a, const ResolvedCell& b) {
    if (a.cell.lac != b.cell.lac) return a.cell.lac < b.cell.lac;
    return by_identity(a, b);
  });
  sorted.erase(std::unique(sorted.begin(), sorted.end(),
                           [](const ResolvedCell& a, const ResolvedCell& b) { return a.cell == b.cell; }),
               sorted.end());

  std::vector<LacGroup> groups;
  for (auto& c : sorted) {
    if (groups.empty() || groups.back().lac != c.cell.lac) groups.push_back(LacGroup{c.cell.lac, {}});
    groups.back().members.push_back(std::move(c));
  }
  return groups;
}

ProximityMatrix proximity_matrix(const LacGroup& group, DistanceMetric metric)
{
  const auto pts = points_of(group.members);
  return proximity_matrix<double>(std::span<const GeoPoint>(pts), metric);
}

Dendrogram agglomerate(std::span<const GeoPoint> points, const ClusterParams& params)
{
  validate(params);
  if (points.empty()) throw EmptyGroup("agglomerate on an empty group");
  const std::size_t n = points.size();
  Dendrogram dend{n, {}};
  if (n == 1) return dend;

  constexpr auto kDead = std::numeric_limits<std::uint32_t>::max();
  ProximityMatrix d = proximity_matrix(points, params.metric);
  std::vector<std::uint32_t> id(n);
  std::vector<std::size_t> size(n, 1);
  std::vector<std::vector<std::size_t>> members(n);
  std::iota(id.begin(), id.end(), 0u);
  for (std::size_t i = 0; i < n; ++i) members[i] = {i};

  std::vector<Candidate> initial;
  initial.reserve(n * (n - 1) / 2);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j) initial.push_back({d(i, j), i, j, i, j});
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> heap(std::greater<>{}, std::move(initial));

  std::vector<GeoPoint> scratch;
  auto centroid_of = [&](std::size_t slot) {
    scratch.clear();
    for (auto m : members[slot]) scratch.push_back(points[m]);
    return centroid(std::span<const GeoPoint>(scratch));
  };
  std::vector<GeoPoint> centers;
  if (params.linkage == Linkage::centroid) centers.assign(points.begin(), points.end());

  auto next_id = static_cast<std::uint32_t>(n);
  std::size_t active = n;
  while (active > 1 && !heap.empty()) {
    const Candidate top = heap.top();
    heap.pop();
    if (id[top.lo] != top.lo_id || id[top.hi] != top.hi_id) continue;
    if (!(top.distance <= params.cutoff)) break;

    const std::size_t lo = top.lo;
    const std::size_t hi = top.hi;
    dend.merges.push_back({id[lo], id[hi], top.distance, next_id});

    const auto n_lo = static_cast<double>(size[lo]);
    const auto n_hi = static_cast<double>(size[hi]);
    std::vector<std::size_t> merged;
    merged.reserve(members[lo].size() + members[hi].size());
    std::merge(members[lo].begin(), members[lo].end(), members[hi].begin(), members[hi].end(),
               std::back_inserter(merged));
    members[lo] = std::move(merged);
    members[hi].clear();
    size[lo] += size[hi];
    id[lo] = next_id++;
    id[hi] = kDead;
    --active;
    if (params.linkage == Linkage::centroid) centers[lo] = centroid_of(lo);

    for (std::size_t k = 0; k < n; ++k) {
      if (k == lo || id[k] == kDead) continue;
      double dk = 0;
      switch (params.linkage) {
      case Linkage::single:
        dk = std::min(d(lo, k), d(hi, k));
        break;
      case Linkage::complete:
        dk = std::max(d(lo, k), d(hi, k));
        break;
      case Linkage::average:
        dk = (n_lo * d(lo, k) + n_hi * d(hi, k)) / (n_lo + n_hi);
        break;
      case Linkage::centroid:
        dk = distance(centers[lo], centers[k], params.metric);
        break;
      }
      d(lo, k) = d(k, lo) = dk;
      const auto a = static_cast<std::uint32_t>(std::min(lo, k));
      const auto b = static_cast<std::uint32_t>(std::max(lo, k));
      heap.push({dk, a, b, id[a], id[b]});
    }
  }
  return dend;
}

Dendrogram agglomerate(const LacGroup& group, const ClusterParams& params)
{
  if (group.members.empty()) throw EmptyGroup("agglomerate on an empty group");
  const auto pts = points_of(group.members);
  return agglomerate(std::span<const GeoPoint>(pts), params);
}

std::vector<std::size_t> flat_labels(const Dendrogram& dend)
{
  const std::size_t n = dend.leaf_count;
  // parent over leaf and merge ids
  std::vector<std::size_t> parent(n + dend.merges.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& m : dend.merges) {
    if (m.id >= parent.size() || m.left >= m.id || m.right >= m.id)
      throw MismatchedInput("dendrogram merge references an unknown cluster id");
    parent[find(m.left)] = m.id;
    parent[find(m.right)] = m.id;
  }
  std::vector<std::size_t> labels(n);
  std::vector<std::size_t> root_label(parent.size(), std::numeric_limits<std::size_t>::max());
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto& l = root_label[find(i)];
    if (l == std::numeric_limits<std::size_t>::max()) l = next++;
    labels[i] = l;
  }
  return labels;
}

std::vector<Cluster> flat_clusters(const Dendrogram& dend, const LacGroup& group)
{
  if (dend.leaf_count != group.members.size())
    throw MismatchedInput("dendrogram has " + std::to_string(dend.leaf_count) + " leaves, group has " +
                          std::to_string(group.members.size()) + " members");
  const auto labels = flat_labels(dend);
  const std::size_t count = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<Cluster> clusters(count);
  for (std::size_t i = 0; i < labels.size(); ++i) clusters[labels[i]].push_back(group.members[i]);
  return clusters;
}

namespace {

double mean_distance_to_centroid(const Cluster& cluster, DistanceMetric metric)
{
  const auto pts = points_of(cluster);
  const auto c = centroid(std::span<const GeoPoint>(pts));
  double sum = 0;
  for (const auto& p : pts) sum += distance(p, c, metric);
  return sum / static_cast<double>(pts.size());
}

CellIdentity min_member(const Cluster& cluster)
{
  return std::min_element(cluster.begin(), cluster.end(), by_identity)->cell;
}

} // namespace

LacCleanResult select_representative(std::span<const Cluster> clusters, std::size_t min_size, DistanceMetric metric)
{
  LacCleanResult result;
  for (const auto& c : clusters) {
    if (!c.empty()) {
      result.lac = c.front().cell.lac;
      break;
    }
  }

  std::optional<std::size_t> best;
  double best_spread = 0;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const auto& c = clusters[i];
    if (c.size() < min_size || c.empty()) continue;
    const double spread = mean_distance_to_centroid(c, metric);
    if (!best) {
      best = i;
      best_spread = spread;
      continue;
    }
    const auto& b = clusters[*best];
    const bool better = c.size() != b.size() ? c.size() > b.size()
                        : spread != best_spread ? spread < best_spread
                                                : min_member(c) < min_member(b);
    if (better) {
      best = i;
      best_spread = spread;
    }
  }

  if (!best) {
    result.status = LacStatus::insufficient_density;
    for (const auto& c : clusters) result.insufficient.insert(result.insufficient.end(), c.begin(), c.end());
    std::sort(result.insufficient.begin(), result.insufficient.end(), by_identity);
    return result;
  }

  result.status = LacStatus::ok;
  result.representative = clusters[*best];
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (i == *best) continue;
    result.outliers.insert(result.outliers.end(), clusters[i].begin(), clusters[i].end());
    if (clusters[i].size() >= min_size) result.discarded_dense.push_back(clusters[i]);
  }
  std::sort(result.representative.begin(), result.representative.end(), by_identity);
  std::sort(result.outliers.begin(), result.outliers.end(), by_identity);
  return result;
}

namespace {

LacCleanResult clean_group(const LacGroup& group, const ClusterParams& params)
{
  const auto dend = agglomerate(group, params);
  const auto clusters = flat_clusters(dend, group);
  auto result = select_representative(clusters, params.min_size, params.metric);
  result.lac = group.lac;
  return result;
}

} // namespace

CleanResult clean_dataset(std::span<const ResolvedCell> cells, const ClusterParams& params, std::size_t threads)
{
  validate(params);
  const auto groups = group_by_lac(cells);
  CleanResult out;
  out.lacs.resize(groups.size());

  const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), std::max<std::size_t>(groups.size(), 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < groups.size(); ++i) out.lacs[i] = clean_group(groups[i], params);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < groups.size(); i = next++) out.lacs[i] = clean_group(groups[i], params);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  auto& s = out.stats;
  s.lacs = out.lacs.size();
  for (const auto& l : out.lacs) {
    s.input_cells += l.representative.size() + l.outliers.size() + l.insufficient.size();
    s.retained += l.representative.size();
    s.outliers += l.outliers.size();
    s.insufficient_cells += l.insufficient.size();
    s.discarded_dense_clusters += l.discarded_dense.size();
    if (l.status == LacStatus::ok)
      ++s.ok_lacs;
    else
      ++s.insufficient_lacs;
  }
  return out;
}

std::vector<ResolvedCell> retained_cells(const CleanResult& result)
{
  std::vector<ResolvedCell> out;
  for (const auto& l : result.lacs) out.insert(out.end(), l.representative.begin(), l.representative.end());
  return out;
}

} // namespace lacclean
