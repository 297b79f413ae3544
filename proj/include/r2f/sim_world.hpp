#ifndef R2F_SIM_WORLD_HPP
#define R2F_SIM_WORLD_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "r2f/common.hpp"
#include "r2f/embedding_space.hpp"
#include "r2f/geometry.hpp"

namespace r2f
{

// Surface concepts every scene registry carries.
inline constexpr const char * kWallConcept = "wall";
inline constexpr const char * kFloorConcept = "floor";
inline constexpr const char * kCeilingConcept = "ceiling";
inline constexpr const char * kVoidConcept = "void";

struct SceneObject
{
  std::string concept_name;
  Aabb box;
  int instance_id = 0;
};

/// Suggested episode stored alongside a scene.
struct EpisodeTemplate
{
  Vec2 start = Vec2::Zero();
  double yaw_deg = 0.0;
  std::string mode = "objectnav";  // "objectnav" or "vln"
  std::string text;                // category or instruction
};

struct SceneSpec
{
  Aabb bounds;
  std::vector<Aabb> walls;
  std::vector<SceneObject> objects;
  double floor_height = 0.0;
  std::uint64_t seed = 0;
  /// Query (category name or instruction text) -> goal points on the floor.
  std::map<std::string, std::vector<Vec3>> goal_sets;
  ConceptRegistry registry;
  std::vector<EpisodeTemplate> episodes;

  double ceiling_height() const { return bounds.max.z(); }

  /// Structural checks: boxes inside bounds, registered concepts, navigable
  /// goal points. Throws InvalidArgument describing the first violation.
  void validate() const;

  nlohmann::json to_json() const;
  static SceneSpec from_json(const nlohmann::json & j);
  void save(const std::string & path) const;
  static SceneSpec load(const std::string & path);
};

struct AgentState
{
  static constexpr double kCameraHeight = 1.25;
  static constexpr double kRadius = 0.2;
  static constexpr double kForwardStep = 0.25;
  static constexpr double kTurnStep = 15.0;

  Vec2 position = Vec2::Zero();
  double yaw_deg = 0.0;

  Vec3 camera_position(double floor_height) const
  {
    return {position.x(), position.y(), floor_height + kCameraHeight};
  }
  Vec2 heading() const
  {
    return {std::cos(deg2rad(yaw_deg)), std::sin(deg2rad(yaw_deg))};
  }
};

struct CameraModel
{
  int width = 160;
  int height = 120;
  double hfov_deg = 90.0;
  double r_max = 3.5;

  void validate() const;
  double focal_px() const;
  /// Unit ray through the centre of pixel (u, v) in the camera frame
  /// (x forward, y left, z up).
  Vec3 pixel_ray_camera(int u, int v) const;
  /// Camera-frame rays for every pixel, row-major.
  std::vector<Vec3> ray_table() const;
  /// World-frame unit ray through pixel (u, v) for a camera with the given yaw.
  Vec3 pixel_ray_world(int u, int v, double yaw_deg) const;
};

struct Pose
{
  Vec3 position = Vec3::Zero();
  double yaw_deg = 0.0;
};

/// Per-pixel embeddings stored as a palette plus an index image.
struct FeatureMap
{
  std::vector<Embedding> palette;
  std::vector<std::uint32_t> index;

  const Embedding & at(std::size_t pixel) const { return palette[index[pixel]]; }
};

struct Observation
{
  int width = 0;
  int height = 0;
  std::vector<double> depth;       // metres, clipped at r_max
  std::vector<std::uint8_t> oor;   // 1 where the true surface is at or beyond r_max
  FeatureMap features;
  Pose pose;

  std::size_t pixel(int u, int v) const
  {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(u);
  }
  const Embedding & feature(int u, int v) const { return features.at(pixel(u, v)); }
  bool out_of_range(int u, int v) const { return oor[pixel(u, v)] != 0; }
};

struct RenderOptions
{
  double noise_sigma = 0.05;
  std::uint64_t noise_seed = 0;
  /// Noise variants drawn per visible concept per frame.
  int noise_variants = 16;
  /// When set, every pixel shows this concept instead of the surface it hits.
  std::optional<std::string> feature_override;
};

/// Ray-cast one posed depth + feature frame. Throws RenderError when the
/// camera lies inside solid geometry.
Observation render(const SceneSpec & scene, const AgentState & state, const CameraModel & cam,
                   const RenderOptions & options = {});

enum class Action { Forward, TurnLeft, TurnRight, Stop };

const char * action_name(Action a);
Action action_from_name(const std::string & name);

struct StepResult
{
  AgentState state;
  bool collided = false;
  bool stopped = false;
};

StepResult step(const SceneSpec & scene, const AgentState & state, Action action);

/// True iff a disc of the agent radius centred at p is inside the bounds and
/// clear of every wall and object footprint.
bool is_navigable(const SceneSpec & scene, const Vec2 & p,
                  double radius = AgentState::kRadius);

/// Ground-truth free-space grid (metrics only; the agent never sees it).
class GeodesicOracle
{
public:
  static constexpr double kCell = 0.05;

  explicit GeodesicOracle(const SceneSpec & scene, double agent_radius = AgentState::kRadius);

  /// Shortest 8-connected path length between the nearest navigable cells.
  /// Throws InvalidArgument for a non-navigable endpoint and
  /// DisconnectedError when no path exists.
  double distance(const Vec2 & a, const Vec2 & b) const;

  /// Distance from `a` to the nearest of `goals`; DisconnectedError if none reachable.
  double distance_to_nearest(const Vec2 & a, const std::vector<Vec2> & goals) const;

  /// Number of 8-connected components of navigable cells.
  int component_count() const;

  bool navigable_cell(int ix, int iy) const;
  std::optional<Vec2> nearest_navigable(const Vec2 & p, double max_radius) const;
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  Vec2 cell_center(int ix, int iy) const;

private:
  std::vector<double> dijkstra(int source, int target) const;
  int cell_of(const Vec2 & p) const;
  int nearest_cell(const Vec2 & p) const;

  bool navigable_point(const Vec2 & p) const;

  std::vector<Rect2> obstacles_;
  Rect2 bounds_;
  double radius_;
  Vec2 origin_;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<std::uint8_t> free_;
};

double geodesic_distance(const SceneSpec & scene, const Vec2 & a, const Vec2 & b);

enum class Difficulty { Small, Medium };

/// Seeded multi-room layout with labelled objects and goal sets.
SceneSpec generate_scene(std::uint64_t seed, Difficulty difficulty);

/// Hub-and-spoke layout where the target category sits at the end of exactly
/// one branch, in line of sight from the hub but beyond depth range.
SceneSpec generate_beacon_scene(std::uint64_t seed);

/// Layout with two instances of the same category: a decoy near the spawn
/// with no landmarks around it, and the true instance surrounded by the
/// instruction's landmarks in a room without line of sight to the decoy.
/// With a lexicon, landmark synonyms are kept apart from the other concepts too.
struct DecoyScene
{
  SceneSpec scene;
  std::string instruction;
  Vec3 true_goal;
  Vec3 decoy_goal;
};
DecoyScene generate_decoy_scene(std::uint64_t seed, const SynonymLexicon * lexicon = nullptr);

}  // namespace r2f

#endif  // R2F_SIM_WORLD_HPP
