#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "r2f/harness.hpp"
#include "support.hpp"

using namespace r2f;

namespace
{

std::shared_ptr<const SceneSpec> bed_room()
{
  SceneSpec s = test::box_room(-4, -3, 4, 3, 2);
  test::add_object(s, "bed", Aabb(Vec3(2.0, -1.0, 0), Vec3(3.9, 1.0, 0.6)));
  s.goal_sets["bed"] = {Vec3(1.5, 0, 0)};
  return std::make_shared<const SceneSpec>(std::move(s));
}

EpisodeSpec scripted(std::vector<Action> script, Vec2 start = Vec2(0.5, 0))
{
  EpisodeSpec e;
  e.id = "scripted";
  e.scene = bed_room();
  e.start = start;
  e.text = "bed";
  e.seed = 3;
  e.script = std::move(script);
  return e;
}

EpisodeResult with(bool success, double l, double l_star)
{
  EpisodeResult r;
  r.success = success;
  r.executed_length = l;
  r.optimal_length = l_star;
  return r;
}

}  // namespace

TEST(Metrics, SuccessRate)
{
  EXPECT_DOUBLE_EQ(compute_sr({with(true, 1, 1), with(true, 1, 1), with(true, 1, 1), with(false, 1, 1)}), 0.75);
  EXPECT_THROW(compute_sr({}), InvalidArgument);
  EXPECT_THROW(compute_spl({}), InvalidArgument);
}

TEST(Metrics, Spl)
{
  EXPECT_DOUBLE_EQ(compute_spl({with(true, 8, 4)}), 0.5);
  EXPECT_DOUBLE_EQ(compute_spl({with(true, 4, 4)}), 1.0);
  EXPECT_DOUBLE_EQ(compute_spl({with(true, 0, 1)}), 1.0);
  EXPECT_DOUBLE_EQ(compute_spl({with(false, 4, 4), with(false, 100, 1)}), 0.0);
  EXPECT_DOUBLE_EQ(compute_spl({with(true, 8, 4), with(false, 4, 4)}), 0.25);
}

TEST(Episode, ImmediateStopNearGoal)
{
  const EpisodeResult r = run_episode(scripted({Action::Stop}), R2fConfig{});
  EXPECT_TRUE(r.success);
  EXPECT_EQ(r.outcome, Outcome::StoppedAtGoal);
  EXPECT_DOUBLE_EQ(r.executed_length, 0.0);
  EXPECT_NEAR(r.optimal_length, 1.0, 0.15);
  EXPECT_EQ(r.steps, 1);
  EXPECT_DOUBLE_EQ(compute_spl({r}), 1.0);
}

TEST(Episode, StopFarFromGoalFails)
{
  const EpisodeResult r = run_episode(scripted({Action::Stop}, Vec2(-3, 0)), R2fConfig{});
  EXPECT_FALSE(r.success);
  EXPECT_EQ(r.outcome, Outcome::StoppedWrong);
}

TEST(Episode, NeverStoppingHitsBudget)
{
  const EpisodeResult r = run_episode(scripted(std::vector<Action>(2000, Action::TurnLeft)), R2fConfig{});
  EXPECT_FALSE(r.success);
  EXPECT_EQ(r.outcome, Outcome::BudgetExhausted);
  EXPECT_EQ(r.steps, 1000);
  EXPECT_EQ(r.actions.back(), Action::Stop);
  EXPECT_EQ(r.frontier_calls, 200);
}

TEST(Episode, LengthCountsOnlyMovesThatHappened)
{
  // Eight forwards from x = -3.5: the east bed blocks the last few.
  std::vector<Action> a(30, Action::Forward);
  const EpisodeResult r = run_episode(scripted(a, Vec2(-3.5, 0)), R2fConfig{});
  // The bed face is at x = 2.0, so the agent centre stops at or before 1.8.
  const int moved = static_cast<int>(std::floor((1.8 + 3.5) / 0.25 + 1e-9));
  EXPECT_NEAR(r.executed_length, 0.25 * moved, 1e-9);
  EXPECT_NEAR(r.final_position.x(), -3.5 + 0.25 * moved, 1e-9);
}

TEST(Episode, FrontierScheduleFollowsSteps)
{
  R2fConfig cfg;
  const Resources res = Resources::load(cfg);
  auto scene = std::make_shared<const SceneSpec>(generate_scene(2, Difficulty::Small));
  for (int limit : {1, 4, 5, 6, 37, 60}) {
    EpisodeSpec e = episodes_from_scene(scene, "small", 1)[0];
    e.step_limit = limit;
    const EpisodeResult r = run_episode(e, cfg, res);
    EXPECT_EQ(r.frontier_calls, (r.steps + cfg.policy.n_map - 1) / cfg.policy.n_map) << limit;
    EXPECT_LE(r.steps, limit);
  }
}

TEST(Episode, InvalidSpecsAreConfigErrors)
{
  R2fConfig cfg;
  EpisodeSpec e = scripted({Action::Stop});
  e.start = Vec2(3.0, 0);  // inside the bed
  EXPECT_THROW(run_episode(e, cfg), ConfigError);
  e = scripted({Action::Stop});
  e.text = "piano";
  EXPECT_THROW(run_episode(e, cfg), ConfigError);
  e = scripted({Action::Stop});
  e.mode = "pointnav";
  EXPECT_THROW(run_episode(e, cfg), ConfigError);
  e = scripted({Action::Stop});
  e.scene = nullptr;
  EXPECT_THROW(run_episode(e, cfg), ConfigError);
}

TEST(Episode, TraceHeaderRebuildsEpisode)
{
  R2fConfig cfg;
  auto scene = std::make_shared<const SceneSpec>(generate_scene(4, Difficulty::Small));
  EpisodeSpec e = episodes_from_scene(scene, "small", 9)[0];
  e.step_limit = 30;
  std::ostringstream trace;
  const EpisodeResult a = run_episode(e, cfg, &trace);
  std::istringstream in(trace.str());
  std::string line;
  std::getline(in, line);
  const TracedEpisode t = episode_from_trace_header(nlohmann::json::parse(line));
  std::ostringstream again;
  const EpisodeResult b = run_episode(t.spec, t.cfg, &again);
  EXPECT_EQ(a.actions, b.actions);
  EXPECT_EQ(trace.str(), again.str());
}

TEST(Batch, ParallelismDoesNotChangeResults)
{
  R2fConfig cfg;
  std::vector<EpisodeSpec> specs;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    auto scene = std::make_shared<const SceneSpec>(generate_scene(seed, Difficulty::Small));
    for (auto e : episodes_from_scene(scene, "s" + std::to_string(seed), seed)) {
      e.step_limit = 60;
      specs.push_back(e);
    }
  }
  const BatchReport one = run_batch(specs, cfg, 1, true);
  const BatchReport many = run_batch(specs, cfg, 8, true);
  ASSERT_EQ(one.results.size(), many.results.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    ASSERT_TRUE(one.results[i] && many.results[i]);
    EXPECT_EQ(one.results[i]->actions, many.results[i]->actions);
    EXPECT_EQ(one.traces[i], many.traces[i]);
  }
  EXPECT_EQ(one.sr, many.sr);
  EXPECT_EQ(one.spl, many.spl);
}

TEST(Batch, MixedValidAndInvalid)
{
  std::vector<EpisodeSpec> specs = {scripted({Action::Stop}), scripted({Action::Stop}, Vec2(3.0, 0)),
                                    scripted({Action::Stop}, Vec2(-3, 0))};
  const BatchReport r = run_batch(specs, R2fConfig{}, 2);
  EXPECT_EQ(r.error_count, 1);
  EXPECT_TRUE(r.results[0].has_value());
  EXPECT_FALSE(r.results[1].has_value());
  EXPECT_FALSE(r.errors[1].empty());
  EXPECT_TRUE(r.results[2].has_value());
  EXPECT_DOUBLE_EQ(r.sr, 0.5);
  EXPECT_EQ(r.outcomes.at("stopped_at_goal"), 1);
  EXPECT_EQ(r.outcomes.at("stopped_wrong"), 1);
  EXPECT_EQ(r.summary_json()["errors"], 1);
}

TEST(Config, JsonRoundTripAndErrors)
{
  R2fConfig c;
  c.policy.tau_g = 0.2;
  c.frontiers.k_u = 2;
  const R2fConfig back = R2fConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(R2fConfig::from_json(nlohmann::json::object()).to_json(), R2fConfig{}.to_json());
  EXPECT_THROW(R2fConfig::from_json({{"policy", {{"bogus", 1}}}}), ConfigError);
  EXPECT_THROW(R2fConfig::from_json({{"policy", {{"n_map", 0}}}}), ConfigError);
  EXPECT_THROW(R2fConfig::from_json({{"nonsense", {}}}), ConfigError);
}

TEST(Config, PaperDefaults)
{
  const R2fConfig c;
  EXPECT_DOUBLE_EQ(c.policy.tau_g, 0.14);
  EXPECT_EQ(c.policy.n_cons, 3);
  EXPECT_EQ(c.policy.n_map, 5);
  EXPECT_DOUBLE_EQ(c.policy.delta, 1.5);
  EXPECT_EQ(c.policy.t_max, 1000);
  EXPECT_DOUBLE_EQ(c.vln.tau_syn, 0.60);
  EXPECT_EQ(c.vln.k_syn, 5);
  EXPECT_DOUBLE_EQ(c.vln.tau_l, 0.11);
  EXPECT_DOUBLE_EQ(c.rays.association.tau_perp, 1.0);
  EXPECT_DOUBLE_EQ(c.rays.association.tau_r, 14.0);
  EXPECT_DOUBLE_EQ(c.map.voxel_size, 0.1);
  EXPECT_DOUBLE_EQ(c.camera.r_max, 3.5);
}
