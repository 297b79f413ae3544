#include <gtest/gtest.h>

#include <cmath>

#include "r2f/planner.hpp"
#include "support.hpp"

using namespace r2f;

namespace
{

// Marks every band voxel of the columns in [x0,x1) x [y0,y1) with `delta`.
void paint(VoxelGrid & g, double x0, double y0, double x1, double y1, double delta)
{
  for (double x = x0 + 0.05; x < x1; x += 0.1)
    for (double y = y0 + 0.05; y < y1; y += 0.1)
      for (double z = 0.25; z < 1.5; z += 0.1) g.update(g.index_of(Vec3(x, y, z)), delta);
}

VoxelGrid corridor()
{
  VoxelGrid g;
  paint(g, -1.0, -1.0, 6.0, 1.0, -0.4);
  return g;
}

}  // namespace

TEST(Planner, StraightCorridor)
{
  const VoxelGrid g = corridor();
  const Path p = plan_path(g, 0.0, Vec2(0.05, 0.05), Vec2(4.05, 0.05));
  EXPECT_NEAR(p.length(Vec2(0.05, 0.05)), 4.0, 0.2);
  EXPECT_NEAR((p.waypoints.back() - Vec2(4.05, 0.05)).norm(), 0.0, 1e-9);
}

TEST(Planner, GoalProjectedOffObstacle)
{
  VoxelGrid g = corridor();
  paint(g, 3.0, 0.0, 3.1, 0.1, 2.0);  // one Occupied column at the goal
  const Vec2 goal(3.05, 0.05);
  const Path p = plan_path(g, 0.0, Vec2(0.05, 0.05), goal);
  const double off = (p.goal - goal).norm();
  EXPECT_GT(off, 0.3);
  EXPECT_LT(off, 0.45);
  EXPECT_LT(p.goal.x(), 3.0);  // approached from the start side
}

TEST(Planner, SealedStartHasNoPath)
{
  VoxelGrid g = corridor();
  paint(g, -4.0, -4.0, 8.0, 4.0, -0.4);
  for (int a = 0; a < 360; a += 2) {
    const double x = 2.0 + 1.5 * std::cos(deg2rad(a)), y = 1.5 * std::sin(deg2rad(a));
    for (double z = 0.25; z < 1.5; z += 0.1) g.update(g.index_of(Vec3(x, y, z)), 2.0);
  }
  EXPECT_THROW(plan_path(g, 0.0, Vec2(2.05, 0.05), Vec2(6.05, 0.05)), NoPath);
}

TEST(Planner, NoFreeCellNearGoal)
{
  const VoxelGrid g = corridor();
  EXPECT_THROW(plan_path(g, 0.0, Vec2(0.05, 0.05), Vec2(20.0, 20.0)), UnreachableGoal);
}

TEST(Planner, AvoidsWallWithClearance)
{
  VoxelGrid g;
  paint(g, -1.0, -3.0, 6.0, 3.0, -0.4);
  paint(g, 2.0, -3.0, 2.2, 2.0, 2.0);  // wall with a gap at the top
  const Path p = plan_path(g, 0.0, Vec2(0.55, 0.05), Vec2(4.05, 0.05));
  for (const auto & w : p.waypoints) {
    const double dx = std::max({2.0 - w.x(), 0.0, w.x() - 2.2});
    const double dy = std::max({-3.0 - w.y(), 0.0, w.y() - 2.0});
    EXPECT_GE(std::hypot(dx, dy), 0.3) << w.transpose();
  }
  EXPECT_GT(p.length(Vec2(0.55, 0.05)), 5.0);
}

TEST(Planner, StartInsideInflationEscapes)
{
  VoxelGrid g = corridor();
  paint(g, -1.0, 0.5, 6.0, 0.6, 2.0);  // wall 0.2 m from the start cell's centre
  const Path p = plan_path(g, 0.0, Vec2(0.05, 0.25), Vec2(4.05, -0.45));
  EXPECT_FALSE(p.waypoints.empty());
}

TEST(Planner, UnknownCellsCostMore)
{
  VoxelGrid g;
  paint(g, -1.0, -1.0, 6.0, 0.0, -0.4);  // known strip below y = 0
  const Path p = plan_path(g, 0.0, Vec2(0.05, -0.45), Vec2(4.05, -0.45));
  EXPECT_NEAR(p.length(Vec2(0.05, -0.45)), 4.0, 0.2);
}

TEST(Follower, Cases)
{
  Path p;
  p.waypoints = {Vec2(1, 0)};
  EXPECT_EQ(follow(p, 0, {Vec2(0, 0), 0.0}).action, Action::Forward);
  p.waypoints = {Vec2(0, 1)};
  EXPECT_EQ(follow(p, 0, {Vec2(0, 0), 0.0}).action, Action::TurnLeft);
  p.waypoints = {Vec2(0, -1)};
  EXPECT_EQ(follow(p, 0, {Vec2(0, 0), 0.0}).action, Action::TurnRight);
  p.waypoints = {Vec2(0.1, 0), Vec2(0.2, 0.1)};
  const FollowResult r = follow(p, 0, {Vec2(0, 0), 0.0});
  EXPECT_TRUE(r.arrived);
  EXPECT_EQ(r.next_index, 2u);
}

TEST(Stall, Detector)
{
  std::deque<Vec2> still(20, Vec2(1, 1));
  EXPECT_FALSE(stall_detector(still, false));
  EXPECT_TRUE(stall_detector(still, true));
  std::deque<Vec2> moving;
  for (int i = 0; i < 20; ++i) moving.push_back(Vec2(0.25 * i, 0));
  EXPECT_FALSE(stall_detector(moving, true));
  EXPECT_FALSE(stall_detector(std::deque<Vec2>(5, Vec2(0, 0)), true));

  StallMonitor m;
  for (int i = 0; i < 20; ++i) m.push(Vec2(0, 0), false);
  EXPECT_FALSE(m.stalled());
  for (int i = 0; i < 20; ++i) m.push(Vec2(0, 0), true);
  EXPECT_TRUE(m.stalled());
  m.reset();
  EXPECT_FALSE(m.stalled());
}

TEST(PlannerConfig, Validate)
{
  PlannerConfig c;
  EXPECT_NO_THROW(c.validate());
  c.unknown_cost = 0.5;
  EXPECT_THROW(c.validate(), ConfigError);
}
