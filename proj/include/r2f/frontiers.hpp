#ifndef R2F_FRONTIERS_HPP
#define R2F_FRONTIERS_HPP

#include <map>
#include <vector>

#include "r2f/common.hpp"
#include "r2f/occupancy_map.hpp"

namespace r2f
{

/// Weighted feature sum for one direction bin.
struct BinAccumulator
{
  Eigen::VectorXd sum;
  double weight = 0.0;
};

struct FrontierRegion
{
  int id = 0;
  Vec3 centroid = Vec3::Zero();
  std::vector<Vec3i> voxels;
  /// Flat bin index (see semantic_rays) -> accumulator.
  std::map<int, BinAccumulator> bins;
  bool invalidated = false;
  int last_sync_step = 0;
};

/// Free voxels whose centre height lies in [z_min, z_max] with at least k_u
/// Unknown and k_f Free 6-neighbours. Neighbours outside the snapshot count
/// as Unknown. Sorted by (z, y, x).
std::vector<Vec3i> extract_frontiers(const ClassSnapshot & cells, double z_min, double z_max,
                                     int k_u, int k_f);

/// 26-connected components, then transitive merging of components whose
/// centroids lie within merge_radius. Ids follow ascending centroid order.
std::vector<FrontierRegion> cluster_regions(const std::vector<Vec3i> & voxels, double voxel_size,
                                            double merge_radius);

/// Carries bin accumulators from `old` into `fresh` (bin-wise sums over every
/// old region within merge_radius) and marks fresh regions near an
/// invalidated point.
std::vector<FrontierRegion> sync_regions(const std::vector<FrontierRegion> & old,
                                         std::vector<FrontierRegion> fresh, double merge_radius,
                                         const std::vector<Vec3> & invalidated_points,
                                         double invalidation_radius, int step = 0);

}  // namespace r2f

#endif  // R2F_FRONTIERS_HPP
