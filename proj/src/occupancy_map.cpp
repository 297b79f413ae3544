#include "r2f/occupancy_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace r2f
{

namespace
{

constexpr int kBlockBits = 3;
constexpr std::int64_t kKeyBias = 1 << 20;

int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

}  // namespace

void MapConfig::validate() const
{
  if (!(voxel_size > 0.0)) throw ConfigError("map: voxel_size must be positive");
  if (!(l_occ > 0.0)) throw ConfigError("map: l_occ must be positive");
  if (!(l_free < 0.0)) throw ConfigError("map: l_free must be negative");
  if (!(l_min < 0.0 && l_max > 0.0)) throw ConfigError("map: clamp bounds must straddle 0");
  if (!(tau_free <= tau_occ)) throw ConfigError("map: tau_free must not exceed tau_occ");
  if (stride < 1) throw ConfigError("map: stride must be >= 1");
  if (!(snapshot_cap_m3 > 0.0)) throw ConfigError("map: snapshot cap must be positive");
}

VoxelGrid::VoxelGrid(MapConfig config) : config_(config) { config_.validate(); }

Vec3i VoxelGrid::index_of(const Vec3 & p) const
{
  return (p / config_.voxel_size).array().floor().cast<int>().matrix();
}

Vec3 VoxelGrid::center_of(const Vec3i & idx) const
{
  return (idx.cast<double>().array() + 0.5).matrix() * config_.voxel_size;
}

std::uint64_t VoxelGrid::key_of(const Vec3i & b)
{
  auto part = [](int v) { return static_cast<std::uint64_t>(static_cast<std::int64_t>(v) + kKeyBias) & 0x1FFFFFULL; };
  return part(b.x()) | (part(b.y()) << 21) | (part(b.z()) << 42);
}

Vec3i VoxelGrid::block_of_key(std::uint64_t key)
{
  auto part = [](std::uint64_t v) { return static_cast<int>(static_cast<std::int64_t>(v & 0x1FFFFFULL) - kKeyBias); };
  return {part(key), part(key >> 21), part(key >> 42)};
}

namespace
{

Vec3i block_coord(const Vec3i & idx)
{
  return {floor_div(idx.x(), VoxelGrid::kBlock), floor_div(idx.y(), VoxelGrid::kBlock),
          floor_div(idx.z(), VoxelGrid::kBlock)};
}

std::size_t local_offset(const Vec3i & idx)
{
  const int m = VoxelGrid::kBlock - 1;
  return static_cast<std::size_t>(((idx.z() & m) << (2 * kBlockBits)) | ((idx.y() & m) << kBlockBits) |
                                  (idx.x() & m));
}

}  // namespace

double * VoxelGrid::slot(const Vec3i & idx)
{
  const std::uint64_t key = key_of(block_coord(idx));
  if (key != cached_key_) {
    auto & block = blocks_[key];
    if (!block) {
      block = std::make_unique<Block>();
      block->fill(0.0);
    }
    cached_key_ = key;
    cached_block_ = block.get();
  }
  return &(*cached_block_)[local_offset(idx)];
}

const double * VoxelGrid::find(const Vec3i & idx) const
{
  const auto it = blocks_.find(key_of(block_coord(idx)));
  if (it == blocks_.end()) return nullptr;
  return &(*it->second)[local_offset(idx)];
}

double VoxelGrid::log_odds(const Vec3i & idx) const
{
  const double * v = find(idx);
  return v ? *v : 0.0;
}

CellClass VoxelGrid::classify(const Vec3i & idx) const
{
  const double l = log_odds(idx);
  if (l < config_.tau_free) return CellClass::Free;
  if (l > config_.tau_occ) return CellClass::Occupied;
  return CellClass::Unknown;
}

void VoxelGrid::update(const Vec3i & idx, double delta)
{
  double * v = slot(idx);
  *v = std::clamp(*v + delta, config_.l_min, config_.l_max);
}

void VoxelGrid::integrate_ray(const Vec3 & origin, const Vec3 & end, bool hit)
{
  const Vec3 seg = end - origin;
  const double length = seg.norm();
  if (!(length > 0.0) || !std::isfinite(length)) return;
  const Vec3 dir = seg / length;
  const double vs = config_.voxel_size;

  Vec3i cur = index_of(origin);
  const Vec3i last = index_of(end + 1e-6 * dir);
  Vec3i step;
  Vec3 t_max, t_delta;
  for (int a = 0; a < 3; ++a) {
    if (dir[a] > 0.0) {
      step[a] = 1;
      t_max[a] = ((cur[a] + 1) * vs - origin[a]) / dir[a];
      t_delta[a] = vs / dir[a];
    } else if (dir[a] < 0.0) {
      step[a] = -1;
      t_max[a] = (cur[a] * vs - origin[a]) / dir[a];
      t_delta[a] = -vs / dir[a];
    } else {
      step[a] = 0;
      t_max[a] = std::numeric_limits<double>::infinity();
      t_delta[a] = std::numeric_limits<double>::infinity();
    }
  }
  // Exactly one voxel per unit of Manhattan distance; an axis that already
  // reached the end voxel never advances again, so the walk terminates on it.
  const int n = (last - cur).cwiseAbs().sum();
  for (int i = 0; i < n; ++i) {
    update(cur, config_.l_free);
    int axis = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
      if (cur[a] != last[a] && t_max[a] <= best) {
        best = t_max[a];
        axis = a;
      }
    }
    if (axis < 0) break;
    cur[axis] += step[axis];
    t_max[axis] += t_delta[axis];
  }
  update(last, hit ? config_.l_occ : config_.l_free);
}

void VoxelGrid::integrate_observation(const Observation & obs, const CameraModel & cam, int stride)
{
  if (!obs.pose.position.allFinite() || !std::isfinite(obs.pose.yaw_deg)) {
    throw InvalidArgument("integrate_observation: non-finite pose");
  }
  if (stride <= 0) stride = config_.stride;
  const double c = std::cos(deg2rad(obs.pose.yaw_deg));
  const double s = std::sin(deg2rad(obs.pose.yaw_deg));
  const double free_range = cam.r_max - config_.voxel_size;
  const Vec3 & o = obs.pose.position;
  for (int v = 0; v < obs.height; v += stride) {
    for (int u = 0; u < obs.width; u += stride) {
      const std::size_t p = obs.pixel(u, v);
      const Vec3 rc = cam.pixel_ray_camera(u, v);
      const Vec3 d(c * rc.x() - s * rc.y(), s * rc.x() + c * rc.y(), rc.z());
      if (obs.oor[p]) {
        if (free_range > 0.0) integrate_ray(o, o + free_range * d, false);
        continue;
      }
      const double depth = obs.depth[p];
      if (!(depth > 0.0)) continue;
      integrate_ray(o, o + depth * d, true);
    }
  }
}

ClassSnapshot VoxelGrid::snapshot_region(const Aabb & box) const
{
  if (!box.valid()) throw InvalidArgument("snapshot_region: inverted box");
  if (box.volume() > config_.snapshot_cap_m3) {
    throw ResourceLimit("snapshot_region: box volume " + std::to_string(box.volume()) +
                        " m^3 exceeds cap " + std::to_string(config_.snapshot_cap_m3));
  }
  const double vs = config_.voxel_size;
  ClassSnapshot snap;
  snap.voxel_size = vs;
  Vec3i lo, hi;
  for (int a = 0; a < 3; ++a) {
    lo[a] = static_cast<int>(std::floor(box.min[a] / vs + 1e-9));
    hi[a] = std::max(lo[a] + 1, static_cast<int>(std::ceil(box.max[a] / vs - 1e-9)));
  }
  snap.origin = lo;
  snap.dims = hi - lo;
  snap.cells.assign(static_cast<std::size_t>(snap.dims.prod()), CellClass::Unknown);

  const Vec3i b_lo = block_coord(lo);
  const Vec3i b_hi = block_coord(hi - Vec3i::Ones());
  for (int bz = b_lo.z(); bz <= b_hi.z(); ++bz) {
    for (int by = b_lo.y(); by <= b_hi.y(); ++by) {
      for (int bx = b_lo.x(); bx <= b_hi.x(); ++bx) {
        const auto it = blocks_.find(key_of({bx, by, bz}));
        if (it == blocks_.end()) continue;
        const Block & block = *it->second;
        const Vec3i base(bx * kBlock, by * kBlock, bz * kBlock);
        const Vec3i from = base.cwiseMax(lo);
        const Vec3i to = (base + Vec3i::Constant(kBlock)).cwiseMin(hi);
        for (int z = from.z(); z < to.z(); ++z) {
          for (int y = from.y(); y < to.y(); ++y) {
            for (int x = from.x(); x < to.x(); ++x) {
              const Vec3i idx(x, y, z);
              const double l = block[local_offset(idx)];
              CellClass cls = CellClass::Unknown;
              if (l < config_.tau_free) {
                cls = CellClass::Free;
              } else if (l > config_.tau_occ) {
                cls = CellClass::Occupied;
              }
              snap.cells[snap.offset(idx)] = cls;
            }
          }
        }
      }
    }
  }
  return snap;
}

std::optional<std::pair<Vec3i, Vec3i>> VoxelGrid::allocated_bounds() const
{
  if (blocks_.empty()) return std::nullopt;
  Vec3i lo = Vec3i::Constant(std::numeric_limits<int>::max());
  Vec3i hi = Vec3i::Constant(std::numeric_limits<int>::min());
  for (const auto & [key, block] : blocks_) {
    const Vec3i b = block_of_key(key) * kBlock;
    lo = lo.cwiseMin(b);
    hi = hi.cwiseMax(b + Vec3i::Constant(kBlock));
  }
  return std::make_pair(lo, hi);
}

std::vector<Vec3i> VoxelGrid::block_coords() const
{
  std::vector<Vec3i> out;
  out.reserve(blocks_.size());
  for (const auto & [key, block] : blocks_) out.push_back(block_of_key(key));
  std::sort(out.begin(), out.end(), [](const Vec3i & a, const Vec3i & b) {
    return std::tie(a.z(), a.y(), a.x()) < std::tie(b.z(), b.y(), b.x());
  });
  return out;
}

std::vector<VoxelGrid::VoxelValue> VoxelGrid::nonzero_voxels() const
{
  std::vector<VoxelValue> out;
  for (const Vec3i & b : block_coords()) {
    const Block & block = *blocks_.at(key_of(b));
    for (int z = 0; z < kBlock; ++z) {
      for (int y = 0; y < kBlock; ++y) {
        for (int x = 0; x < kBlock; ++x) {
          const Vec3i idx = b * kBlock + Vec3i(x, y, z);
          const double l = block[local_offset(idx)];
          if (l != 0.0) out.push_back({idx, l});
        }
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const VoxelValue & a, const VoxelValue & b) {
    return std::tie(a.index.z(), a.index.y(), a.index.x()) < std::tie(b.index.z(), b.index.y(), b.index.x());
  });
  return out;
}

}  // namespace r2f
