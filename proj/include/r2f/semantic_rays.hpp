#ifndef R2F_SEMANTIC_RAYS_HPP
#define R2F_SEMANTIC_RAYS_HPP

#include <optional>
#include <vector>

#include "r2f/embedding_space.hpp"
#include "r2f/frontiers.hpp"
#include "r2f/sim_world.hpp"

namespace r2f
{

struct SemanticRay
{
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();
  Embedding feature;
  int u = 0;
  int v = 0;
};

struct BinIndex
{
  static constexpr int kAzimuthBins = 12;
  static constexpr int kElevationBins = 6;
  static constexpr int kCount = kAzimuthBins * kElevationBins;

  int azimuth = 0;
  int elevation = 0;

  int flat() const { return elevation * kAzimuthBins + azimuth; }
  static BinIndex from_flat(int f) { return {f % kAzimuthBins, f / kAzimuthBins}; }
  bool operator==(const BinIndex &) const = default;
};

/// Square-element erosion of a binary mask (pixels near the border erode).
std::vector<std::uint8_t> erode_mask(const std::vector<std::uint8_t> & mask, int width, int height,
                                     int radius);

/// Indices picked by even-stride subsampling of `count` items down to at
/// most `max_items`.
std::vector<std::size_t> stride_subsample(std::size_t count, std::size_t max_items);

std::vector<SemanticRay> select_oor_rays(const Observation & obs, const CameraModel & cam,
                                         int max_rays, int erosion_radius);

struct AssociationParams
{
  double tau_perp = 1.0;
  double tau_r = 14.0;
  double w_perp = 1.0;
  double w_range = 1.0;
};

/// Index into `regions` of the compatible region with least cost.
std::optional<std::size_t> associate_ray(const SemanticRay & ray,
                                         const std::vector<FrontierRegion> & regions,
                                         const AssociationParams & params = {});

BinIndex bin_of(const Vec3 & direction);

void accumulate(FrontierRegion & region, BinIndex bin, const Embedding & feature, double weight = 1.0);

/// Normalised mean feature of one bin; nullopt when the bin is empty.
std::optional<Embedding> bin_feature(const FrontierRegion & region, BinIndex bin);

}  // namespace r2f

#endif  // R2F_SEMANTIC_RAYS_HPP
