#include "r2f/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace r2f
{

void PlannerConfig::validate() const
{
  if (!(z_max > z_min)) throw ConfigError("planner: empty height band");
  if (!(agent_radius >= 0.0)) throw ConfigError("planner: negative agent radius");
  if (!(safety_margin >= 0.0)) throw ConfigError("planner: negative safety margin");
  if (!(unknown_cost >= 1.0)) throw ConfigError("planner: unknown_cost must be >= 1");
  if (!(projection_radius > 0.0)) throw ConfigError("planner: projection_radius must be positive");
  if (waypoint_every < 1) throw ConfigError("planner: waypoint_every must be >= 1");
  if (!(arrival_radius > 0.0)) throw ConfigError("planner: arrival_radius must be positive");
  if (!(heading_deadband_deg > 0.0)) throw ConfigError("planner: heading deadband must be positive");
}

double Path::length(const Vec2 & from) const
{
  double total = 0.0;
  Vec2 prev = from;
  for (const auto & w : waypoints) {
    total += (w - prev).norm();
    prev = w;
  }
  return total;
}

Vec2i NavGrid::cell_of(const Vec2 & p) const
{
  return Vec2i(static_cast<int>(std::floor(p.x() / voxel_size)), static_cast<int>(std::floor(p.y() / voxel_size))) - origin;
}

Vec2 NavGrid::center(int ix, int iy) const
{
  return Vec2(origin.x() + ix + 0.5, origin.y() + iy + 0.5) * voxel_size;
}

NavGrid build_nav_grid(const VoxelGrid & grid, double floor_height, const PlannerConfig & cfg,
                       const std::optional<Rect2> & must_cover)
{
  const double vs = grid.config().voxel_size;
  NavGrid nav;
  nav.voxel_size = vs;
  Vec2i lo = Vec2i::Constant(std::numeric_limits<int>::max());
  Vec2i hi = Vec2i::Constant(std::numeric_limits<int>::min());
  if (auto b = grid.allocated_bounds()) {
    lo = b->first.head<2>();
    hi = b->second.head<2>();
  }
  if (must_cover) {
    lo = lo.cwiseMin(Vec2i(static_cast<int>(std::floor(must_cover->min.x() / vs)), static_cast<int>(std::floor(must_cover->min.y() / vs))));
    hi = hi.cwiseMax(Vec2i(static_cast<int>(std::floor(must_cover->max.x() / vs)) + 1, static_cast<int>(std::floor(must_cover->max.y() / vs)) + 1));
  }
  if (lo.x() >= hi.x() || lo.y() >= hi.y()) return nav;
  nav.origin = lo;
  nav.nx = hi.x() - lo.x();
  nav.ny = hi.y() - lo.y();
  const std::size_t n = static_cast<std::size_t>(nav.nx) * static_cast<std::size_t>(nav.ny);
  nav.cells.assign(n, ColumnClass::Unknown);
  nav.inflated.assign(n, 0);

  const Aabb band(Vec3(lo.x() * vs, lo.y() * vs, floor_height + cfg.z_min),
                  Vec3(hi.x() * vs, hi.y() * vs, floor_height + cfg.z_max));
  const ClassSnapshot snap = grid.snapshot_region(band);
  for (int iy = 0; iy < nav.ny; ++iy) {
    for (int ix = 0; ix < nav.nx; ++ix) {
      bool any_free = false;
      bool any_occ = false;
      for (int z = 0; z < snap.dims.z(); ++z) {
        const CellClass c = snap.cells[snap.offset(snap.origin + Vec3i(ix, iy, z))];
        any_free |= c == CellClass::Free;
        any_occ |= c == CellClass::Occupied;
      }
      nav.cells[nav.at(ix, iy)] = any_occ ? ColumnClass::Occupied : (any_free ? ColumnClass::Free : ColumnClass::Unknown);
    }
  }

  const double r = (cfg.agent_radius + cfg.safety_margin + 0.5 * vs) / vs;
  const int ri = static_cast<int>(std::ceil(r));
  nav.clearance.assign(n, static_cast<float>(ri + 1));
  std::vector<Vec2i> disc;
  for (int dy = -ri; dy <= ri; ++dy) {
    for (int dx = -ri; dx <= ri; ++dx) {
      if (dx * dx + dy * dy <= r * r + 1e-9) disc.emplace_back(dx, dy);
    }
  }
  for (int iy = 0; iy < nav.ny; ++iy) {
    for (int ix = 0; ix < nav.nx; ++ix) {
      if (nav.cells[nav.at(ix, iy)] != ColumnClass::Occupied) continue;
      for (const auto & d : disc) {
        if (!nav.inside(ix + d.x(), iy + d.y())) continue;
        const std::size_t k = nav.at(ix + d.x(), iy + d.y());
        nav.inflated[k] = 1;
        nav.clearance[k] = std::min(nav.clearance[k], static_cast<float>(std::hypot(d.x(), d.y())));
      }
    }
  }
  return nav;
}

Path plan_path(const VoxelGrid & grid, double floor_height, const Vec2 & start, const Vec2 & goal,
               const PlannerConfig & cfg)
{
  const double pad = cfg.projection_radius + 0.2;
  const Rect2 cover{start.cwiseMin(goal) - Vec2::Constant(pad), start.cwiseMax(goal) + Vec2::Constant(pad)};
  return plan_path(build_nav_grid(grid, floor_height, cfg, cover), start, goal, cfg);
}

Path plan_path(const NavGrid & nav, const Vec2 & start, const Vec2 & goal, const PlannerConfig & cfg)
{
  if (nav.nx == 0 || nav.ny == 0) throw UnreachableGoal("plan_path: empty map");
  const Vec2i s = nav.cell_of(start);
  if (!nav.inside(s.x(), s.y())) throw NoPath("plan_path: start outside the mapped area");

  // Goal projection onto the nearest Free, non-inflated column.
  const Vec2i gc = nav.cell_of(goal);
  const int reach = static_cast<int>(std::ceil(cfg.projection_radius / nav.voxel_size));
  std::optional<Vec2i> g;
  double best = std::numeric_limits<double>::infinity();
  for (int dy = -reach; dy <= reach; ++dy) {
    for (int dx = -reach; dx <= reach; ++dx) {
      const int ix = gc.x() + dx;
      const int iy = gc.y() + dy;
      if (!nav.inside(ix, iy)) continue;
      const std::size_t k = nav.at(ix, iy);
      if (nav.cells[k] != ColumnClass::Free || nav.inflated[k]) continue;
      const double d = (nav.center(ix, iy) - goal).norm();
      if (d <= cfg.projection_radius && d < best) {
        best = d;
        g = Vec2i(ix, iy);
      }
    }
  }
  if (!g) throw UnreachableGoal("plan_path: no free cell within projection radius of goal");

  const std::size_t n = nav.cells.size();
  const std::size_t src = nav.at(s.x(), s.y());
  const std::size_t dst = nav.at(g->x(), g->y());
  std::vector<double> cost(n, std::numeric_limits<double>::infinity());
  std::vector<std::int64_t> parent(n, -1);
  std::vector<std::uint8_t> closed(n, 0);
  auto heuristic = [&](int ix, int iy) {
    const double dx = std::abs(ix - g->x());
    const double dy = std::abs(iy - g->y());
    return (std::max(dx, dy) + (std::sqrt(2.0) - 1.0) * std::min(dx, dy)) * nav.voxel_size;
  };
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  cost[src] = 0.0;
  open.emplace(heuristic(s.x(), s.y()), src);
  static constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
  while (!open.empty()) {
    const auto [f, cur] = open.top();
    open.pop();
    if (closed[cur]) continue;
    closed[cur] = 1;
    if (cur == dst) break;
    const int cx = static_cast<int>(cur % static_cast<std::size_t>(nav.nx));
    const int cy = static_cast<int>(cur / static_cast<std::size_t>(nav.nx));
    // A start inside the inflation band may move through inflated cells as
    // long as clearance does not shrink; it cannot re-enter the band later.
    const bool escaping = nav.inflated[cur] != 0;
    auto passable = [&](int ix, int iy) {
      if (nav.traversable(ix, iy)) return true;
      if (!escaping || !nav.inside(ix, iy)) return false;
      const std::size_t k = nav.at(ix, iy);
      return nav.cells[k] != ColumnClass::Occupied && nav.clearance[k] >= nav.clearance[cur];
    };
    for (int k = 0; k < 8; ++k) {
      const int nx = cx + kDx[k];
      const int ny = cy + kDy[k];
      if (!passable(nx, ny)) continue;
      if (k >= 4 && (!passable(cx + kDx[k], cy) || !passable(cx, cy + kDy[k]))) continue;
      const std::size_t nb = nav.at(nx, ny);
      const double step = (k < 4 ? 1.0 : std::sqrt(2.0)) * nav.voxel_size *
                          (nav.cells[nb] == ColumnClass::Unknown ? cfg.unknown_cost : 1.0);
      const double c = cost[cur] + step;
      if (c < cost[nb]) {
        cost[nb] = c;
        parent[nb] = static_cast<std::int64_t>(cur);
        open.emplace(c + heuristic(nx, ny), nb);
      }
    }
  }
  if (!closed[dst]) throw NoPath("plan_path: goal not connected to start on the agent map");

  std::vector<std::size_t> cells;
  for (std::int64_t c = static_cast<std::int64_t>(dst); c != -1; c = parent[static_cast<std::size_t>(c)]) {
    cells.push_back(static_cast<std::size_t>(c));
  }
  std::reverse(cells.begin(), cells.end());
  Path path;
  path.goal = nav.center(g->x(), g->y());
  for (std::size_t i = 1; i < cells.size(); ++i) {
    if (i % static_cast<std::size_t>(cfg.waypoint_every) == 0 || i + 1 == cells.size()) {
      const std::size_t c = cells[i];
      path.waypoints.push_back(nav.center(static_cast<int>(c % static_cast<std::size_t>(nav.nx)),
                                          static_cast<int>(c / static_cast<std::size_t>(nav.nx))));
    }
  }
  if (path.waypoints.empty()) path.waypoints.push_back(path.goal);
  return path;
}

FollowResult follow(const Path & path, std::size_t next_index, const AgentState & state,
                    const PlannerConfig & cfg)
{
  FollowResult r;
  r.next_index = next_index;
  while (r.next_index < path.waypoints.size() &&
         (path.waypoints[r.next_index] - state.position).norm() <= cfg.arrival_radius) {
    ++r.next_index;
  }
  if (r.next_index >= path.waypoints.size()) {
    r.arrived = true;
    r.action = Action::Stop;
    return r;
  }
  const Vec2 d = path.waypoints[r.next_index] - state.position;
  const double error = wrap_degrees(rad2deg(std::atan2(d.y(), d.x())) - state.yaw_deg);
  if (error > cfg.heading_deadband_deg) {
    r.action = Action::TurnLeft;
  } else if (error < -cfg.heading_deadband_deg) {
    r.action = Action::TurnRight;
  } else {
    r.action = Action::Forward;
  }
  return r;
}

bool stall_detector(const std::deque<Vec2> & poses, bool forward_attempted, std::size_t window,
                    double min_motion)
{
  if (poses.size() < window || !forward_attempted) return false;
  const std::size_t first = poses.size() - window;
  for (std::size_t i = first; i < poses.size(); ++i) {
    for (std::size_t j = i + 1; j < poses.size(); ++j) {
      if ((poses[i] - poses[j]).norm() >= min_motion) return false;
    }
  }
  return true;
}

void StallMonitor::push(const Vec2 & position, bool forward)
{
  poses_.push_back(position);
  forwards_.push_back(forward);
  while (poses_.size() > window_) {
    poses_.pop_front();
    forwards_.pop_front();
  }
}

bool StallMonitor::stalled() const
{
  return stall_detector(poses_, std::any_of(forwards_.begin(), forwards_.end(), [](bool f) { return f; }), window_,
                        min_motion_);
}

void StallMonitor::reset()
{
  poses_.clear();
  forwards_.clear();
}

}  // namespace r2f
