#include "r2f/frontiers.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

namespace r2f
{

namespace
{

constexpr std::array<std::array<int, 3>, 6> kSix = {
  {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};

bool zyx_less(const Vec3i & a, const Vec3i & b)
{
  return std::tie(a.z(), a.y(), a.x()) < std::tie(b.z(), b.y(), b.x());
}

std::uint64_t pack(const Vec3i & v)
{
  auto part = [](int x) { return static_cast<std::uint64_t>(static_cast<std::int64_t>(x) + (1 << 20)) & 0x1FFFFFULL; };
  return part(v.x()) | (part(v.y()) << 21) | (part(v.z()) << 42);
}

struct UnionFind
{
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a)
  {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  }
  void unite(int a, int b)
  {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

Vec3 mean_center(const std::vector<Vec3i> & voxels, double voxel_size)
{
  Vec3 acc = Vec3::Zero();
  for (const auto & v : voxels) acc += (v.cast<double>().array() + 0.5).matrix();
  return acc / static_cast<double>(voxels.size()) * voxel_size;
}

}  // namespace

std::vector<Vec3i> extract_frontiers(const ClassSnapshot & cells, double z_min, double z_max,
                                     int k_u, int k_f)
{
  std::vector<Vec3i> out;
  for (int z = 0; z < cells.dims.z(); ++z) {
    for (int y = 0; y < cells.dims.y(); ++y) {
      for (int x = 0; x < cells.dims.x(); ++x) {
        const Vec3i idx = cells.origin + Vec3i(x, y, z);
        if (cells.cells[cells.offset(idx)] != CellClass::Free) continue;
        const double zc = (idx.z() + 0.5) * cells.voxel_size;
        if (zc < z_min || zc > z_max) continue;
        int unknown = 0;
        int free = 0;
        for (const auto & d : kSix) {
          const CellClass c = cells.at(idx + Vec3i(d[0], d[1], d[2]));
          unknown += c == CellClass::Unknown;
          free += c == CellClass::Free;
        }
        if (unknown >= k_u && free >= k_f) out.push_back(idx);
      }
    }
  }
  return out;
}

std::vector<FrontierRegion> cluster_regions(const std::vector<Vec3i> & voxels, double voxel_size,
                                            double merge_radius)
{
  std::vector<Vec3i> sorted = voxels;
  std::sort(sorted.begin(), sorted.end(), zyx_less);
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const std::size_t n = sorted.size();

  std::unordered_map<std::uint64_t, int> lookup;
  lookup.reserve(n * 2);
  for (std::size_t i = 0; i < n; ++i) lookup.emplace(pack(sorted[i]), static_cast<int>(i));

  UnionFind voxel_sets(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int dz = -1; dz <= 1; ++dz) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0 && dz == 0) continue;
          const auto it = lookup.find(pack(sorted[i] + Vec3i(dx, dy, dz)));
          if (it != lookup.end()) voxel_sets.unite(static_cast<int>(i), it->second);
        }
      }
    }
  }

  // Components in order of their first voxel.
  std::map<int, std::vector<Vec3i>> comps;
  for (std::size_t i = 0; i < n; ++i) comps[voxel_sets.find(static_cast<int>(i))].push_back(sorted[i]);
  std::vector<std::vector<Vec3i>> parts;
  std::vector<Vec3> centroids;
  for (auto & [root, vs] : comps) {
    centroids.push_back(mean_center(vs, voxel_size));
    parts.push_back(std::move(vs));
  }

  UnionFind merged(parts.size());
  for (std::size_t a = 0; a < parts.size(); ++a) {
    for (std::size_t b = a + 1; b < parts.size(); ++b) {
      if ((centroids[a] - centroids[b]).norm() <= merge_radius) {
        merged.unite(static_cast<int>(a), static_cast<int>(b));
      }
    }
  }
  std::map<int, std::vector<Vec3i>> groups;
  for (std::size_t a = 0; a < parts.size(); ++a) {
    auto & g = groups[merged.find(static_cast<int>(a))];
    g.insert(g.end(), parts[a].begin(), parts[a].end());
  }

  std::vector<FrontierRegion> regions;
  regions.reserve(groups.size());
  for (auto & [root, vs] : groups) {
    FrontierRegion r;
    std::sort(vs.begin(), vs.end(), zyx_less);
    r.centroid = mean_center(vs, voxel_size);
    r.voxels = std::move(vs);
    regions.push_back(std::move(r));
  }
  std::sort(regions.begin(), regions.end(), [](const FrontierRegion & a, const FrontierRegion & b) {
    return std::lexicographical_compare(a.centroid.data(), a.centroid.data() + 3, b.centroid.data(),
                                        b.centroid.data() + 3);
  });
  for (std::size_t i = 0; i < regions.size(); ++i) regions[i].id = static_cast<int>(i);
  return regions;
}

std::vector<FrontierRegion> sync_regions(const std::vector<FrontierRegion> & old,
                                         std::vector<FrontierRegion> fresh, double merge_radius,
                                         const std::vector<Vec3> & invalidated_points,
                                         double invalidation_radius, int step)
{
  for (auto & f : fresh) {
    f.bins.clear();
    for (const auto & o : old) {
      if ((o.centroid - f.centroid).norm() > merge_radius) continue;
      for (const auto & [bin, acc] : o.bins) {
        auto & dst = f.bins[bin];
        if (dst.weight == 0.0) {
          dst = acc;
        } else {
          dst.sum += acc.sum;
          dst.weight += acc.weight;
        }
      }
    }
    f.invalidated = std::any_of(invalidated_points.begin(), invalidated_points.end(),
                                [&](const Vec3 & p) { return (p - f.centroid).norm() <= invalidation_radius; });
    f.last_sync_step = step;
  }
  return fresh;
}

}  // namespace r2f
