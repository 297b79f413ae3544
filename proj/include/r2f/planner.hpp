#ifndef R2F_PLANNER_HPP
#define R2F_PLANNER_HPP

#include <deque>
#include <optional>
#include <vector>

#include "r2f/occupancy_map.hpp"
#include "r2f/sim_world.hpp"

namespace r2f
{

struct PlannerConfig
{
  double z_min = 0.2;  // height band above the floor
  double z_max = 1.5;
  double agent_radius = AgentState::kRadius;
  double safety_margin = 0.1;  // extra clearance added to the inflation disc
  double unknown_cost = 1.5;
  double projection_radius = 2.0;
  int waypoint_every = 3;  // cells between kept waypoints
  double arrival_radius = 0.3;
  double heading_deadband_deg = 7.5;

  void validate() const;
};

struct Path
{
  std::vector<Vec2> waypoints;
  std::optional<int> target_region;
  Vec2 goal = Vec2::Zero();  // projected goal

  double length(const Vec2 & from) const;
};

enum class ColumnClass : std::uint8_t { Unknown = 0, Free = 1, Occupied = 2 };

/// 2D projection of the height band: a column is Occupied if any band voxel
/// is Occupied, Free if at least one is Free and none Occupied.
struct NavGrid
{
  Vec2i origin = Vec2i::Zero();  // voxel index of cell (0, 0)
  int nx = 0;
  int ny = 0;
  double voxel_size = 0.1;
  std::vector<ColumnClass> cells;
  std::vector<std::uint8_t> inflated;  // 1 within the inflation radius of an Occupied column
  std::vector<float> clearance;        // cells to the nearest Occupied column, capped past the radius

  bool inside(int ix, int iy) const { return ix >= 0 && iy >= 0 && ix < nx && iy < ny; }
  std::size_t at(int ix, int iy) const { return static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(ix); }
  Vec2i cell_of(const Vec2 & p) const;
  Vec2 center(int ix, int iy) const;
  bool traversable(int ix, int iy) const { return inside(ix, iy) && !inflated[at(ix, iy)]; }
};

NavGrid build_nav_grid(const VoxelGrid & grid, double floor_height, const PlannerConfig & cfg,
                       const std::optional<Rect2> & must_cover = std::nullopt);

/// A* over the band projection. Throws UnreachableGoal when no Free cell lies
/// within projection_radius of the goal, NoPath when the search fails.
Path plan_path(const VoxelGrid & grid, double floor_height, const Vec2 & start, const Vec2 & goal,
               const PlannerConfig & cfg = {});
Path plan_path(const NavGrid & nav, const Vec2 & start, const Vec2 & goal, const PlannerConfig & cfg = {});

struct FollowResult
{
  Action action = Action::Forward;
  std::size_t next_index = 0;
  bool arrived = false;
};

/// Pure waypoint follower. `next_index` is the first waypoint not yet reached.
FollowResult follow(const Path & path, std::size_t next_index, const AgentState & state,
                    const PlannerConfig & cfg = {});

/// True iff `poses` holds `window` entries whose planar spread is below
/// `min_motion` and a forward was attempted in the window.
bool stall_detector(const std::deque<Vec2> & poses, bool forward_attempted, std::size_t window = 20,
                    double min_motion = 0.1);

class StallMonitor
{
public:
  explicit StallMonitor(std::size_t window = 20, double min_motion = 0.1) : window_(window), min_motion_(min_motion) {}
  void push(const Vec2 & position, bool forward);
  bool stalled() const;
  void reset();

private:
  std::size_t window_;
  double min_motion_;
  std::deque<Vec2> poses_;
  std::deque<bool> forwards_;
};

}  // namespace r2f

#endif  // R2F_PLANNER_HPP
