#include "r2f/semantic_rays.hpp"

#include <algorithm>
#include <cmath>

namespace r2f
{

std::vector<std::uint8_t> erode_mask(const std::vector<std::uint8_t> & mask, int width, int height,
                                     int radius)
{
  if (radius <= 0) return mask;
  // Separable min filter; outside the image counts as false.
  std::vector<std::uint8_t> rows(mask.size(), 0);
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      bool keep = u - radius >= 0 && u + radius < width;
      for (int k = -radius; keep && k <= radius; ++k) {
        keep = mask[static_cast<std::size_t>(v * width + u + k)] != 0;
      }
      rows[static_cast<std::size_t>(v * width + u)] = keep;
    }
  }
  std::vector<std::uint8_t> out(mask.size(), 0);
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      bool keep = v - radius >= 0 && v + radius < height;
      for (int k = -radius; keep && k <= radius; ++k) {
        keep = rows[static_cast<std::size_t>((v + k) * width + u)] != 0;
      }
      out[static_cast<std::size_t>(v * width + u)] = keep;
    }
  }
  return out;
}

std::vector<std::size_t> stride_subsample(std::size_t count, std::size_t max_items)
{
  std::vector<std::size_t> idx;
  if (count == 0 || max_items == 0) return idx;
  const std::size_t k = std::min(count, max_items);
  idx.reserve(k);
  for (std::size_t i = 0; i < k; ++i) idx.push_back(i * count / k);
  return idx;
}

std::vector<SemanticRay> select_oor_rays(const Observation & obs, const CameraModel & cam,
                                         int max_rays, int erosion_radius)
{
  if (max_rays < 1) throw InvalidArgument("select_oor_rays: max_rays must be >= 1");
  const auto eroded = erode_mask(obs.oor, obs.width, obs.height, erosion_radius);
  std::vector<std::size_t> survivors;
  for (std::size_t p = 0; p < eroded.size(); ++p) {
    if (eroded[p]) survivors.push_back(p);
  }
  std::vector<SemanticRay> rays;
  for (std::size_t i : stride_subsample(survivors.size(), static_cast<std::size_t>(max_rays))) {
    const std::size_t p = survivors[i];
    const int u = static_cast<int>(p % static_cast<std::size_t>(obs.width));
    const int v = static_cast<int>(p / static_cast<std::size_t>(obs.width));
    rays.push_back({obs.pose.position, cam.pixel_ray_world(u, v, obs.pose.yaw_deg), obs.features.at(p), u, v});
  }
  return rays;
}

std::optional<std::size_t> associate_ray(const SemanticRay & ray,
                                         const std::vector<FrontierRegion> & regions,
                                         const AssociationParams & params)
{
  std::optional<std::size_t> best;
  double best_cost = 0.0;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto & r = regions[i];
    if (r.invalidated) continue;
    const Vec3 vm = r.centroid - ray.origin;
    const double along = ray.direction.dot(vm);
    if (!(along > 0.0)) continue;
    const double perp = (vm - along * ray.direction).norm();
    const double range = vm.norm();
    if (!(perp < params.tau_perp) || !(range < params.tau_r)) continue;
    const double cost = params.w_perp * perp / params.tau_perp + params.w_range * range / params.tau_r;
    if (!best || cost < best_cost || (cost == best_cost && r.id < regions[*best].id)) {
      best = i;
      best_cost = cost;
    }
  }
  return best;
}

BinIndex bin_of(const Vec3 & d)
{
  double az = rad2deg(std::atan2(d.y(), d.x()));
  if (az < 0.0) az += 360.0;
  const double el = rad2deg(std::asin(std::clamp(d.z(), -1.0, 1.0)));
  BinIndex b;
  b.azimuth = std::clamp(static_cast<int>(std::floor(az / 30.0)), 0, BinIndex::kAzimuthBins - 1);
  b.elevation = std::clamp(static_cast<int>(std::floor((el + 90.0) / 30.0)), 0, BinIndex::kElevationBins - 1);
  return b;
}

void accumulate(FrontierRegion & region, BinIndex bin, const Embedding & feature, double weight)
{
  if (!(weight > 0.0) || !std::isfinite(weight)) throw InvalidArgument("accumulate: weight must be positive");
  auto & acc = region.bins[bin.flat()];
  if (acc.weight == 0.0) {
    acc.sum = weight * feature.values();
  } else {
    acc.sum += weight * feature.values();
  }
  acc.weight += weight;
}

std::optional<Embedding> bin_feature(const FrontierRegion & region, BinIndex bin)
{
  const auto it = region.bins.find(bin.flat());
  if (it == region.bins.end() || it->second.weight <= 0.0 || it->second.sum.norm() == 0.0) {
    return std::nullopt;
  }
  return Embedding::from_values(it->second.sum / it->second.weight);
}

}  // namespace r2f
