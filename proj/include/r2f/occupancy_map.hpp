#ifndef R2F_OCCUPANCY_MAP_HPP
#define R2F_OCCUPANCY_MAP_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include "r2f/common.hpp"
#include "r2f/geometry.hpp"
#include "r2f/sim_world.hpp"

namespace r2f
{

using Vec3i = Eigen::Vector3i;

enum class CellClass : std::uint8_t { Unknown = 0, Free = 1, Occupied = 2 };

struct MapConfig
{
  double voxel_size = 0.1;
  double l_occ = 0.85;
  double l_free = -0.4;
  double l_min = -2.0;
  double l_max = 3.5;
  double tau_free = -0.3;
  double tau_occ = 0.3;
  int stride = 2;
  /// Largest box snapshot_region accepts, in cubic metres (40 x 40 x 4).
  double snapshot_cap_m3 = 6400.0;

  void validate() const;
};

/// Dense copy of the classification over a voxel index box.
struct ClassSnapshot
{
  Vec3i origin = Vec3i::Zero();  // index of the first voxel
  Vec3i dims = Vec3i::Zero();
  double voxel_size = 0.1;
  std::vector<CellClass> cells;

  bool inside(const Vec3i & idx) const
  {
    const Vec3i r = idx - origin;
    return (r.array() >= 0).all() && (r.array() < dims.array()).all();
  }
  std::size_t offset(const Vec3i & idx) const
  {
    const Vec3i r = idx - origin;
    return (static_cast<std::size_t>(r.z()) * static_cast<std::size_t>(dims.y()) +
            static_cast<std::size_t>(r.y())) * static_cast<std::size_t>(dims.x()) +
           static_cast<std::size_t>(r.x());
  }
  /// Out-of-snapshot indices read as Unknown.
  CellClass at(const Vec3i & idx) const { return inside(idx) ? cells[offset(idx)] : CellClass::Unknown; }
  Vec3 center(const Vec3i & idx) const { return (idx.cast<double>().array() + 0.5).matrix() * voxel_size; }
};

class VoxelGrid
{
public:
  static constexpr int kBlock = 8;

  explicit VoxelGrid(MapConfig config = {});

  const MapConfig & config() const { return config_; }

  Vec3i index_of(const Vec3 & p) const;
  Vec3 center_of(const Vec3i & idx) const;

  /// 0 for voxels never touched.
  double log_odds(const Vec3i & idx) const;
  double log_odds(const Vec3 & p) const { return log_odds(index_of(p)); }
  CellClass classify(const Vec3i & idx) const;
  CellClass classify(const Vec3 & p) const { return classify(index_of(p)); }

  /// Add `delta` to one voxel and clamp.
  void update(const Vec3i & idx, double delta);

  /// Free evidence along origin -> end; the end voxel receives occupied
  /// evidence when `hit`, free evidence otherwise.
  void integrate_ray(const Vec3 & origin, const Vec3 & end, bool hit);

  /// Every `stride`-th pixel in both image axes (stride <= 0 uses the config).
  void integrate_observation(const Observation & obs, const CameraModel & cam, int stride = 0);

  /// Classification of all voxels intersecting `box`. Throws ResourceLimit
  /// when the box volume exceeds the configured cap.
  ClassSnapshot snapshot_region(const Aabb & box) const;

  std::size_t block_count() const { return blocks_.size(); }
  /// Index-space bounds of allocated voxels; nullopt when empty.
  std::optional<std::pair<Vec3i, Vec3i>> allocated_bounds() const;

  struct VoxelValue
  {
    Vec3i index;
    double log_odds;
  };
  /// All voxels with non-zero log-odds, sorted by index (z, y, x).
  std::vector<VoxelValue> nonzero_voxels() const;

  /// Block coordinate keys currently allocated.
  std::vector<Vec3i> block_coords() const;

private:
  using Block = std::array<double, kBlock * kBlock * kBlock>;

  static std::uint64_t key_of(const Vec3i & block);
  static Vec3i block_of_key(std::uint64_t key);
  double * slot(const Vec3i & idx);
  const double * find(const Vec3i & idx) const;

  MapConfig config_;
  std::unordered_map<std::uint64_t, std::unique_ptr<Block>> blocks_;
  // One-entry cache for consecutive updates inside the same block.
  std::uint64_t cached_key_ = ~0ULL;
  Block * cached_block_ = nullptr;
};

}  // namespace r2f

#endif  // R2F_OCCUPANCY_MAP_HPP
