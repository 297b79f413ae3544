#ifndef R2F_HARNESS_HPP
#define R2F_HARNESS_HPP

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "r2f/config.hpp"

namespace r2f
{

enum class Outcome { StoppedAtGoal, StoppedWrong, BudgetExhausted, ExplorationExhausted };
const char * outcome_name(Outcome o);

struct EpisodeSpec
{
  std::string id;
  std::shared_ptr<const SceneSpec> scene;
  std::string scene_path;  // informational
  Vec2 start = Vec2::Zero();
  double yaw_deg = 0.0;
  std::string mode = "objectnav";  // "objectnav" | "vln"
  std::string text;                // category or instruction
  std::uint64_t seed = 0;
  PolicyKind policy = PolicyKind::R2F;
  /// VLN only: run the landmark verification sweep.
  bool verify = true;
  /// Replace every rendered feature with this concept.
  std::optional<std::string> feature_override;
  /// Stop the episode after this many steps regardless of the policy
  /// (differential tests); 0 disables.
  int step_limit = 0;
  /// When non-empty, actions come from this list instead of the policy; a
  /// Stop in the list counts as the agent's own stop, running past its end
  /// stops too. The step budget still applies.
  std::vector<Action> script;
};

struct EpisodeResult
{
  std::string id;
  bool success = false;
  int steps = 0;  // actions emitted, the final stop included
  double executed_length = 0.0;
  double optimal_length = 0.0;
  double wall_time = 0.0;
  Outcome outcome = Outcome::BudgetExhausted;
  Vec2 final_position = Vec2::Zero();
  std::vector<Action> actions;
  int frontier_calls = 0;
  std::optional<Vec3> stop_hypothesis;

  nlohmann::json to_json() const;
};

/// Shared, read-only resources for a batch of episodes.
struct Resources
{
  SynonymLexicon lexicon;
  Grammar grammar;

  static Resources load(const R2fConfig & cfg);
};

/// Called after perception and the policy decision of step t. Returning false
/// ends the episode there (the result then reports budget_exhausted).
using StepObserver = std::function<bool(int t, const Observation & obs, const WorldModel & world,
                                        const PolicyState & state)>;

/// Runs one episode. Writes a JSONL trace to `trace` when given. Throws
/// ConfigError for invalid specs.
EpisodeResult run_episode(const EpisodeSpec & spec, const R2fConfig & cfg, const Resources & res,
                          std::ostream * trace = nullptr, const StepObserver & observer = {});
EpisodeResult run_episode(const EpisodeSpec & spec, const R2fConfig & cfg, std::ostream * trace = nullptr);

/// Per-step perception: integrate, periodic frontier sync, ray accumulation.
/// Returns the number of rays associated to a region.
int perceive(WorldModel & world, const Observation & obs, const R2fConfig & cfg, int step,
             const std::vector<Vec3> & invalidated_points);

double compute_sr(const std::vector<EpisodeResult> & results);
double compute_spl(const std::vector<EpisodeResult> & results);

struct BatchReport
{
  std::vector<std::optional<EpisodeResult>> results;  // parallel to the specs
  std::vector<std::string> errors;                    // empty string for no error
  std::vector<std::string> traces;                    // filled when requested
  double sr = 0.0;
  double spl = 0.0;
  double mean_wall_time = 0.0;
  double mean_steps = 0.0;
  std::map<std::string, int> outcomes;
  int error_count = 0;

  nlohmann::json summary_json() const;
};

/// Runs episodes on `jobs` worker threads. Results do not depend on `jobs`.
BatchReport run_batch(const std::vector<EpisodeSpec> & specs, const R2fConfig & cfg, int jobs = 1,
                      bool keep_traces = false);

/// Rebuilds the episode and config recorded in a trace header line.
struct TracedEpisode
{
  EpisodeSpec spec;
  R2fConfig cfg;
};
TracedEpisode episode_from_trace_header(const nlohmann::json & header);

/// Episode specs from a scene's stored episode templates.
std::vector<EpisodeSpec> episodes_from_scene(const std::shared_ptr<const SceneSpec> & scene,
                                             const std::string & scene_path, std::uint64_t seed);

}  // namespace r2f

#endif  // R2F_HARNESS_HPP
