#ifndef R2F_POLICY_HPP
#define R2F_POLICY_HPP

#include <optional>
#include <vector>

#include "r2f/frontiers.hpp"
#include "r2f/occupancy_map.hpp"
#include "r2f/planner.hpp"
#include "r2f/semantic_rays.hpp"

namespace r2f
{

struct PolicyConfig
{
  double tau_g = 0.14;
  int n_cons = 3;
  int n_map = 5;
  double invalidation_radius = 1.0;
  double visited_filter = 2.0;
  double delta = 1.5;
  int t_max = 1000;

  double approach_stop = 1.0;
  int stall_window = 20;
  double stall_motion = 0.1;
  int replan_every = 25;
  /// Approach replans when the hypothesis moves further than this.
  double hypothesis_shift = 0.5;
  /// A region counts as semantic evidence only when its best bin beats the
  /// episode-wide mean ray feature by this much.
  double evidence_margin = 0.02;
  /// Spacing between recorded visited poses.
  double visited_spacing = 0.25;
  /// Regions smaller than this are ignored by goal selection.
  int min_region_voxels = 3;
  /// Detector ignores pixels that reproject within this planar distance of a
  /// rejected hypothesis.
  double suppression_radius = 1.0;
  /// A tracked target survives a sync while some fresh region lies this close.
  double track_radius = 0.8;
  /// Turn-left actions taken in place before the first goal selection.
  int initial_spin = 24;

  void validate() const;
};

enum class PolicyKind { R2F, NearestFrontier };

enum class Mode { SelectGoal, TrackGoal, Approach, Verify, Done };
const char * mode_name(Mode m);

enum class DoneReason { None, ApproachStop, Exhausted, Budget };

struct DetectorState
{
  int consecutive = 0;
  std::optional<Vec3> last_hypothesis;
};

struct Detection
{
  double max_similarity = -1.0;
  std::optional<Vec3> point;      // reprojection of this frame's argmax pixel
  std::optional<Vec3> confirmed;  // set once n_cons consecutive frames pass
};

struct Selection
{
  enum class Kind { Semantic, Geometric, Exhausted };
  Kind kind = Kind::Exhausted;
  std::size_t index = 0;  // into the region list
  std::optional<double> score;
};

/// The agent's own memory: map, regions and the running mean ray feature.
struct WorldModel
{
  explicit WorldModel(const MapConfig & map = {}) : grid(map) {}

  VoxelGrid grid;
  std::vector<FrontierRegion> regions;
  Eigen::VectorXd ray_sum;
  double ray_weight = 0.0;
  double floor_height = 0.0;
  bool synced_this_step = false;
  int sync_count = 0;

  /// cos(mean ray feature, query); nullopt before any ray was seen.
  std::optional<double> evidence_baseline(const Embedding & query) const;
};

struct PolicyState
{
  Mode mode = Mode::SelectGoal;
  DoneReason done = DoneReason::None;
  int step_index = 0;

  Path path;
  std::size_t path_index = 0;
  std::optional<Vec3> target_point;  // tracked region centroid
  int steps_since_plan = 0;
  std::optional<Vec3> goal_point;    // approach hypothesis

  DetectorState detector;
  std::vector<Vec2> visited_poses;
  std::vector<Vec3> invalidated_points;
  std::vector<Vec3> suppressed_points;
  StallMonitor stall{20, 0.1};
  Action last_action = Action::TurnLeft;
  int spin_turns = 0;

  // Verification sweep (VLN).
  std::optional<Vec3> candidate;
  int sweep_turns = 0;
  std::vector<double> sweep_max;

  // Last decision, for traces.
  std::optional<Selection> last_selection;
  double last_detector_max = -1.0;
};

PolicyState make_policy_state(const PolicyConfig & cfg);

/// Max over populated bins of cos(bin feature, query); nullopt when no bin
/// is populated.
std::optional<double> score_region(const FrontierRegion & region, const Embedding & query);

Selection select_goal(const std::vector<FrontierRegion> & regions, const Embedding & query,
                      const AgentState & agent, const PolicyState & state, const PolicyConfig & cfg,
                      std::optional<double> evidence_baseline, bool geometric_only = false);

/// Per-pixel query similarity over in-range pixels, consecutive-frame
/// confirmation and reprojection of the argmax pixel.
Detection detect_goal(const Observation & obs, const CameraModel & cam, const Embedding & query,
                      const PolicyConfig & cfg, DetectorState & detector,
                      const std::vector<Vec3> & suppressed = {});

struct PolicyInputs
{
  const Observation & obs;
  const CameraModel & cam;
  WorldModel & world;
  const Embedding & query;
  const PolicyConfig & cfg;
  const PlannerConfig & planner;
  PolicyKind kind = PolicyKind::R2F;
  /// When set, a confirmed detection enters Verify instead of Approach.
  bool defer_confirmation = false;
};

/// One decision per simulator step. Call after perception for the step.
Action step_policy(const PolicyInputs & in, PolicyState & state);

/// Same machinery with goal selection forced to nearest-frontier.
Action baseline_nearest_frontier(PolicyInputs in, PolicyState & state);

/// Enter Approach toward `goal` (used by the VLN wrapper after verification).
void begin_approach(const PolicyInputs & in, PolicyState & state, const Vec3 & goal);

/// Mark a point invalid and go back to goal selection.
void reject_candidate(PolicyState & state, const Vec3 & point);

}  // namespace r2f

#endif  // R2F_POLICY_HPP
