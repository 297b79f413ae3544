#include <gtest/gtest.h>

#include "r2f/occupancy_map.hpp"
#include "support.hpp"

using namespace r2f;

TEST(VoxelGrid, SingleRayArithmetic)
{
  VoxelGrid g;
  g.integrate_ray(Vec3(0.05, 0.05, 0.05), Vec3(1.05, 0.05, 0.05), true);
  for (int x = 0; x < 10; ++x) EXPECT_DOUBLE_EQ(g.log_odds(Vec3i(x, 0, 0)), -0.4) << x;
  EXPECT_DOUBLE_EQ(g.log_odds(Vec3i(10, 0, 0)), 0.85);
  EXPECT_DOUBLE_EQ(g.log_odds(Vec3i(11, 0, 0)), 0.0);
  EXPECT_DOUBLE_EQ(g.log_odds(Vec3i(5, 1, 0)), 0.0);
}

TEST(VoxelGrid, Clamping)
{
  VoxelGrid g;
  for (int i = 0; i < 10; ++i) g.integrate_ray(Vec3(0.05, 0.05, 0.05), Vec3(1.05, 0.05, 0.05), true);
  EXPECT_DOUBLE_EQ(g.log_odds(Vec3i(10, 0, 0)), 3.5);
  EXPECT_DOUBLE_EQ(g.log_odds(Vec3i(3, 0, 0)), -2.0);
}

TEST(VoxelGrid, DiagonalRayVisitsConnectedVoxels)
{
  VoxelGrid g;
  g.integrate_ray(Vec3(0.01, 0.02, 0.03), Vec3(0.93, 0.71, 0.45), true);
  const auto v = g.nonzero_voxels();
  // Face-connected walk: every visited voxel differs from its predecessor
  // by one step along one axis, so the count equals the Manhattan distance + 1.
  EXPECT_EQ(v.size(), static_cast<std::size_t>(9 + 7 + 4 + 1));
  EXPECT_DOUBLE_EQ(g.log_odds(Vec3i(9, 7, 4)), 0.85);
}

TEST(VoxelGrid, Classify)
{
  VoxelGrid g;
  EXPECT_EQ(g.classify(Vec3i(1, 2, 3)), CellClass::Unknown);
  g.update(Vec3i(1, 2, 3), -0.4);
  EXPECT_EQ(g.classify(Vec3i(1, 2, 3)), CellClass::Free);
  g.update(Vec3i(0, 0, 0), 0.85);
  EXPECT_EQ(g.classify(Vec3i(0, 0, 0)), CellClass::Occupied);
  g.update(Vec3i(5, 5, 5), 0.3);
  EXPECT_EQ(g.classify(Vec3i(5, 5, 5)), CellClass::Unknown);
  g.update(Vec3i(-3, -4, -5), -0.4);
  EXPECT_EQ(g.classify(Vec3(-0.25, -0.35, -0.45)), CellClass::Free);
}

TEST(VoxelGrid, OutOfRangePixelsOnlyCarve)
{
  const CameraModel cam;
  Observation obs = test::flat_observation(cam, test::unit(4, 0), 3.5);
  std::fill(obs.oor.begin(), obs.oor.end(), 1);
  VoxelGrid g;
  g.integrate_observation(obs, cam);
  for (const auto & v : g.nonzero_voxels()) {
    EXPECT_LT(v.log_odds, 0.0);
    EXPECT_LE((g.center_of(v.index) - obs.pose.position).norm(), cam.r_max - 0.1 + 0.1 * std::sqrt(3.0));
  }
}

TEST(VoxelGrid, SnapshotEmptyAndCap)
{
  VoxelGrid g;
  const ClassSnapshot s = g.snapshot_region(Aabb(Vec3(-1, -1, 0), Vec3(1, 1, 1)));
  EXPECT_EQ(s.dims, Vec3i(20, 20, 10));
  for (auto c : s.cells) EXPECT_EQ(c, CellClass::Unknown);

  g.integrate_ray(Vec3(0.05, 0.05, 0.05), Vec3(1.05, 0.05, 0.05), true);
  const ClassSnapshot far = g.snapshot_region(Aabb(Vec3(10, 10, 0), Vec3(11, 11, 1)));
  for (auto c : far.cells) EXPECT_EQ(c, CellClass::Unknown);
  const ClassSnapshot near = g.snapshot_region(Aabb(Vec3(0, 0, 0), Vec3(2, 1, 1)));
  EXPECT_EQ(near.at(Vec3i(4, 0, 0)), CellClass::Free);
  EXPECT_EQ(near.at(Vec3i(10, 0, 0)), CellClass::Occupied);
  EXPECT_EQ(near.at(Vec3i(-1, 0, 0)), CellClass::Unknown);

  EXPECT_THROW(g.snapshot_region(Aabb(Vec3(0, 0, 0), Vec3(100, 100, 4))), ResourceLimit);
  EXPECT_THROW(g.snapshot_region(Aabb(Vec3(1, 0, 0), Vec3(0, 1, 1))), InvalidArgument);
}

TEST(VoxelGrid, SparseBlocks)
{
  VoxelGrid g;
  g.update(Vec3i(0, 0, 0), -0.4);
  g.update(Vec3i(1000, -1000, 7), 0.85);
  EXPECT_EQ(g.block_count(), 2u);
  const auto b = g.allocated_bounds();
  ASSERT_TRUE(b.has_value());
  EXPECT_LE(b->first.x(), 0);
  EXPECT_GE(b->second.x(), 1000);
}

TEST(MapConfig, Validate)
{
  MapConfig c;
  EXPECT_NO_THROW(c.validate());
  c.tau_free = 0.5;
  EXPECT_THROW(c.validate(), Error);
  c = MapConfig{};
  c.voxel_size = 0.0;
  EXPECT_THROW(c.validate(), Error);
}

// A frontal wall seen from 2 m: the traced segment voxels end up Free and the
// voxels holding the hit points end up Occupied.
TEST(VoxelGrid, FrontalWallAgainstRayTrace)
{
  SceneSpec s;
  s.bounds = Aabb(Vec3(-1, -3, 0), Vec3(2.25, 3, 2.5));
  s.registry = test::surface_registry();
  s.walls.push_back(Aabb(Vec3(2.05, -3, 0), Vec3(2.25, 3, 2.5)));
  const CameraModel cam;
  VoxelGrid g;
  test::WallTrace oracle;
  for (int i = 0; i < 50; ++i) {
    const double yaw = -5.0 + 10.0 * i / 49.0;
    const AgentState a{Vec2(0.05, 0.05), yaw};
    RenderOptions ro;
    ro.noise_seed = static_cast<std::uint64_t>(i);
    g.integrate_observation(render(s, a, cam, ro), cam);
    test::trace_wall_view(oracle, a.camera_position(0.0), yaw, cam, 2.05, 2.5, g.config().stride, 0.1);
  }
  ASSERT_GT(oracle.free.size(), 1000u);
  ASSERT_GT(oracle.surface.size(), 500u);
  std::size_t free = 0, occ = 0;
  for (const auto & [x, y, z] : oracle.free) free += g.classify(Vec3i(x, y, z)) == CellClass::Free;
  for (const auto & [x, y, z] : oracle.surface) occ += g.classify(Vec3i(x, y, z)) == CellClass::Occupied;
  EXPECT_GE(static_cast<double>(free) / oracle.free.size(), 0.99);
  EXPECT_GE(static_cast<double>(occ) / oracle.surface.size(), 0.95);
}
