#include "r2f/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace r2f
{

void PolicyConfig::validate() const
{
  if (!(tau_g > -1.0 && tau_g < 1.0)) throw ConfigError("policy: tau_g must lie in (-1, 1)");
  if (n_cons < 1) throw ConfigError("policy: n_cons must be >= 1");
  if (n_map < 1) throw ConfigError("policy: n_map must be >= 1");
  if (!(invalidation_radius > 0.0)) throw ConfigError("policy: invalidation_radius must be positive");
  if (!(visited_filter >= 0.0)) throw ConfigError("policy: visited_filter must be non-negative");
  if (!(delta > 0.0)) throw ConfigError("policy: delta must be positive");
  if (t_max < 1) throw ConfigError("policy: t_max must be >= 1");
  if (!(approach_stop > 0.0)) throw ConfigError("policy: approach_stop must be positive");
  if (stall_window < 2) throw ConfigError("policy: stall_window must be >= 2");
  if (replan_every < 1) throw ConfigError("policy: replan_every must be >= 1");
  if (!(visited_spacing > 0.0)) throw ConfigError("policy: visited_spacing must be positive");
  if (min_region_voxels < 1) throw ConfigError("policy: min_region_voxels must be >= 1");
  if (initial_spin < 0) throw ConfigError("policy: initial_spin must be >= 0");
}

const char * mode_name(Mode m)
{
  switch (m) {
    case Mode::SelectGoal: return "select_goal";
    case Mode::TrackGoal: return "track_goal";
    case Mode::Approach: return "approach";
    case Mode::Verify: return "verify";
    case Mode::Done: return "done";
  }
  return "?";
}

std::optional<double> WorldModel::evidence_baseline(const Embedding & query) const
{
  if (ray_weight <= 0.0 || ray_sum.size() == 0 || ray_sum.norm() == 0.0) return std::nullopt;
  return ray_sum.dot(query.values()) / ray_sum.norm();
}

PolicyState make_policy_state(const PolicyConfig & cfg)
{
  PolicyState s;
  s.stall = StallMonitor(static_cast<std::size_t>(cfg.stall_window), cfg.stall_motion);
  return s;
}

std::optional<double> score_region(const FrontierRegion & region, const Embedding & query)
{
  std::optional<double> best;
  for (const auto & [bin, acc] : region.bins) {
    if (acc.weight <= 0.0) continue;
    const double n = acc.sum.norm();
    if (n == 0.0) continue;
    const double s = acc.sum.dot(query.values()) / n;
    if (!best || s > *best) best = s;
  }
  return best;
}

namespace
{

double planar(const Vec3 & a, const Vec2 & b) { return (a.head<2>() - b).norm(); }

bool near_any(const Vec3 & p, const std::vector<Vec3> & points, double radius)
{
  return std::any_of(points.begin(), points.end(),
                     [&](const Vec3 & q) { return (p.head<2>() - q.head<2>()).norm() <= radius; });
}

}  // namespace

Selection select_goal(const std::vector<FrontierRegion> & regions, const Embedding & query,
                      const AgentState & agent, const PolicyState & state, const PolicyConfig & cfg,
                      std::optional<double> evidence_baseline, bool geometric_only)
{
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto & r = regions[i];
    if (r.invalidated || static_cast<int>(r.voxels.size()) < cfg.min_region_voxels) continue;
    if (near_any(r.centroid, state.invalidated_points, cfg.invalidation_radius)) continue;
    candidates.push_back(i);
  }
  std::vector<std::size_t> filtered;
  for (std::size_t i : candidates) {
    const bool visited = std::any_of(state.visited_poses.begin(), state.visited_poses.end(), [&](const Vec2 & p) {
      return planar(regions[i].centroid, p) <= cfg.visited_filter;
    });
    if (!visited) filtered.push_back(i);
  }
  if (filtered.empty()) filtered = candidates;

  Selection sel;
  if (filtered.empty()) return sel;

  auto closer = [&](std::size_t a, std::size_t b) {
    const double da = planar(regions[a].centroid, agent.position);
    const double db = planar(regions[b].centroid, agent.position);
    if (da != db) return da < db;
    return regions[a].id < regions[b].id;
  };

  if (!geometric_only && evidence_baseline) {
    std::optional<std::size_t> best;
    double best_score = 0.0;
    for (std::size_t i : filtered) {
      const auto s = score_region(regions[i], query);
      if (!s || *s - *evidence_baseline <= cfg.evidence_margin) continue;
      if (!best || *s > best_score || (*s == best_score && closer(i, *best))) {
        best = i;
        best_score = *s;
      }
    }
    if (best) {
      sel.kind = Selection::Kind::Semantic;
      sel.index = *best;
      sel.score = best_score;
      return sel;
    }
  }
  sel.kind = Selection::Kind::Geometric;
  sel.index = *std::min_element(filtered.begin(), filtered.end(), closer);
  sel.score = score_region(regions[sel.index], query);
  return sel;
}

Detection detect_goal(const Observation & obs, const CameraModel & cam, const Embedding & query,
                      const PolicyConfig & cfg, DetectorState & detector, const std::vector<Vec3> & suppressed)
{
  const auto & palette = obs.features.palette;
  std::vector<double> sim(palette.size());
  for (std::size_t k = 0; k < palette.size(); ++k) sim[k] = cosine(palette[k], query);

  auto reproject = [&](std::size_t p) {
    const int u = static_cast<int>(p % static_cast<std::size_t>(obs.width));
    const int v = static_cast<int>(p / static_cast<std::size_t>(obs.width));
    const double depth = obs.oor[p] ? cam.r_max : obs.depth[p];
    return Vec3(obs.pose.position + depth * cam.pixel_ray_world(u, v, obs.pose.yaw_deg));
  };

  Detection det;
  std::optional<std::size_t> arg;
  const std::size_t n = obs.depth.size();
  for (std::size_t p = 0; p < n; ++p) {
    if (obs.oor[p] || !(obs.depth[p] > 0.0)) continue;
    const double s = sim[obs.features.index[p]];
    if (s <= det.max_similarity && arg) continue;
    if (!suppressed.empty() && near_any(reproject(p), suppressed, cfg.suppression_radius)) continue;
    det.max_similarity = s;
    arg = p;
  }
  if (arg) det.point = reproject(*arg);

  if (arg && det.max_similarity > cfg.tau_g) {
    detector.consecutive = std::min(detector.consecutive + 1, cfg.n_cons);
  } else {
    detector.consecutive = 0;
  }
  if (detector.consecutive >= cfg.n_cons) {
    det.confirmed = det.point;
    detector.last_hypothesis = det.point;
  }
  return det;
}

namespace
{

AgentState agent_of(const Observation & obs) { return {obs.pose.position.head<2>(), obs.pose.yaw_deg}; }

bool column_blocked(const VoxelGrid & grid, const Vec2 & p, double floor, const PlannerConfig & cfg)
{
  const double vs = grid.config().voxel_size;
  for (double z = floor + cfg.z_min + 0.5 * vs; z < floor + cfg.z_max; z += vs) {
    if (grid.classify(Vec3(p.x(), p.y(), z)) == CellClass::Occupied) return true;
  }
  return false;
}

Action finish(PolicyState & state, DoneReason reason)
{
  state.mode = Mode::Done;
  state.done = reason;
  return Action::Stop;
}

Action emit(PolicyState & state, Action a)
{
  state.last_action = a;
  ++state.step_index;
  ++state.steps_since_plan;
  return a;
}

bool plan_to(const PolicyInputs & in, PolicyState & state, const Vec2 & start, const Vec2 & goal)
{
  try {
    state.path = plan_path(in.world.grid, in.world.floor_height, start, goal, in.planner);
  } catch (const UnreachableGoal &) {
    return false;
  } catch (const NoPath &) {
    return false;
  }
  state.path_index = 0;
  state.steps_since_plan = 0;
  return true;
}

}  // namespace

void begin_approach(const PolicyInputs & in, PolicyState & state, const Vec3 & goal)
{
  (void)in;
  state.mode = Mode::Approach;
  state.goal_point = goal;
  state.path = Path{};
  state.path_index = 0;
  state.stall.reset();
  state.candidate.reset();
}

void reject_candidate(PolicyState & state, const Vec3 & point)
{
  state.invalidated_points.push_back(point);
  state.suppressed_points.push_back(point);
  state.detector = DetectorState{};
  state.candidate.reset();
  state.goal_point.reset();
  state.mode = Mode::SelectGoal;
}

Action step_policy(const PolicyInputs & in, PolicyState & state)
{
  if (state.mode == Mode::Done) return Action::Stop;
  // The stop itself is the t_max-th action.
  if (state.step_index + 1 >= in.cfg.t_max) return finish(state, DoneReason::Budget);

  const AgentState agent = agent_of(in.obs);
  if (state.visited_poses.empty() ||
      (state.visited_poses.back() - agent.position).norm() > in.cfg.visited_spacing) {
    state.visited_poses.push_back(agent.position);
  }
  state.stall.push(agent.position, state.last_action == Action::Forward);

  const Detection det = detect_goal(in.obs, in.cam, in.query, in.cfg, state.detector, state.suppressed_points);
  state.last_detector_max = det.max_similarity;
  if (det.confirmed) {
    if (state.mode == Mode::SelectGoal || state.mode == Mode::TrackGoal) {
      if (in.defer_confirmation) {
        state.mode = Mode::Verify;
        state.candidate = det.confirmed;
        state.sweep_turns = 0;
        state.sweep_max.clear();
        return emit(state, Action::TurnLeft);  // the caller owns the sweep
      }
      begin_approach(in, state, *det.confirmed);
    } else if (state.mode == Mode::Approach) {
      if (state.goal_point && (det.confirmed->head<2>() - state.goal_point->head<2>()).norm() > in.cfg.hypothesis_shift) {
        state.path = Path{};
      }
      state.goal_point = det.confirmed;
    }
  }

  if (state.mode == Mode::SelectGoal && state.spin_turns < in.cfg.initial_spin) {
    ++state.spin_turns;
    return emit(state, Action::TurnLeft);
  }

  for (int guard = 0; guard < 64; ++guard) {
    switch (state.mode) {
      case Mode::Done:
      case Mode::Verify:
        return Action::Stop;

      case Mode::SelectGoal: {
        const Selection sel = select_goal(in.world.regions, in.query, agent, state, in.cfg,
                                          in.world.evidence_baseline(in.query),
                                          in.kind == PolicyKind::NearestFrontier);
        state.last_selection = sel;
        if (sel.kind == Selection::Kind::Exhausted) return finish(state, DoneReason::Exhausted);
        const Vec3 target = in.world.regions[sel.index].centroid;
        if (!plan_to(in, state, agent.position, target.head<2>())) {
          state.invalidated_points.push_back(target);
          continue;
        }
        state.path.target_region = in.world.regions[sel.index].id;
        state.target_point = target;
        state.stall.reset();
        state.mode = Mode::TrackGoal;
        continue;
      }

      case Mode::TrackGoal: {
        if (in.world.synced_this_step) {
          const bool alive = std::any_of(in.world.regions.begin(), in.world.regions.end(), [&](const FrontierRegion & r) {
            return !r.invalidated && (r.centroid - *state.target_point).norm() <= in.cfg.track_radius &&
                   !near_any(r.centroid, state.invalidated_points, in.cfg.invalidation_radius);
          });
          if (!alive) {
            state.mode = Mode::SelectGoal;
            continue;
          }
        }
        if (state.stall.stalled()) {
          state.invalidated_points.push_back(*state.target_point);
          state.mode = Mode::SelectGoal;
          continue;
        }
        const bool blocked = state.path_index < state.path.waypoints.size() &&
                             column_blocked(in.world.grid, state.path.waypoints[state.path_index], in.world.floor_height, in.planner);
        if (state.steps_since_plan >= in.cfg.replan_every || blocked) {
          if (!plan_to(in, state, agent.position, state.target_point->head<2>())) {
            state.invalidated_points.push_back(*state.target_point);
            state.mode = Mode::SelectGoal;
            continue;
          }
        }
        const FollowResult f = follow(state.path, state.path_index, agent, in.planner);
        state.path_index = f.next_index;
        if (f.arrived) {
          state.invalidated_points.push_back(*state.target_point);
          state.mode = Mode::SelectGoal;
          continue;
        }
        return emit(state, f.action);
      }

      case Mode::Approach: {
        const Vec3 goal = *state.goal_point;
        if (planar(goal, agent.position) <= in.cfg.approach_stop || state.stall.stalled()) {
          return finish(state, DoneReason::ApproachStop);
        }
        if (state.path.waypoints.empty() || state.steps_since_plan >= in.cfg.replan_every) {
          if (!plan_to(in, state, agent.position, goal.head<2>())) {
            state.detector = DetectorState{};
            state.goal_point.reset();
            state.mode = Mode::SelectGoal;
            continue;
          }
        }
        const FollowResult f = follow(state.path, state.path_index, agent, in.planner);
        state.path_index = f.next_index;
        if (f.arrived) return finish(state, DoneReason::ApproachStop);
        return emit(state, f.action);
      }
    }
  }
  // Every pass through the loop invalidated something; keep looking around.
  return emit(state, Action::TurnLeft);
}

Action baseline_nearest_frontier(PolicyInputs in, PolicyState & state)
{
  in.kind = PolicyKind::NearestFrontier;
  return step_policy(in, state);
}

}  // namespace r2f
