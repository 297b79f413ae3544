#include "r2f/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <sstream>
#include <thread>

namespace r2f
{

namespace
{

constexpr std::uint64_t kNoisePurpose = 0x6e6f697365ULL;

nlohmann::json vec(const Vec2 & v) { return {v.x(), v.y()}; }
nlohmann::json vec(const Vec3 & v) { return {v.x(), v.y(), v.z()}; }

const char * policy_name(PolicyKind k) { return k == PolicyKind::R2F ? "r2f" : "nearest"; }

const char * selection_name(Selection::Kind k)
{
  switch (k) {
    case Selection::Kind::Semantic: return "semantic";
    case Selection::Kind::Geometric: return "geometric";
    case Selection::Kind::Exhausted: return "exhausted";
  }
  return "?";
}

}  // namespace

const char * outcome_name(Outcome o)
{
  switch (o) {
    case Outcome::StoppedAtGoal: return "stopped_at_goal";
    case Outcome::StoppedWrong: return "stopped_wrong";
    case Outcome::BudgetExhausted: return "budget_exhausted";
    case Outcome::ExplorationExhausted: return "exploration_exhausted";
  }
  return "?";
}

nlohmann::json EpisodeResult::to_json() const
{
  nlohmann::json j = {{"id", id},
                      {"success", success},
                      {"steps", steps},
                      {"executed_length", executed_length},
                      {"optimal_length", optimal_length},
                      {"wall_time", wall_time},
                      {"outcome", outcome_name(outcome)},
                      {"final_position", vec(final_position)},
                      {"frontier_calls", frontier_calls}};
  if (stop_hypothesis) j["stop_hypothesis"] = vec(*stop_hypothesis);
  return j;
}

Resources Resources::load(const R2fConfig & cfg)
{
  Resources r;
  std::string lexicon = cfg.lexicon_path;
#ifdef R2F_DATA_DIR
  if (lexicon.empty() && std::filesystem::exists(R2F_DATA_DIR "/lexicon.json")) lexicon = R2F_DATA_DIR "/lexicon.json";
#endif
  if (!lexicon.empty()) r.lexicon = SynonymLexicon::load(lexicon);
  std::string grammar = cfg.grammar_path;
#ifdef R2F_DATA_DIR
  if (grammar.empty() && std::filesystem::exists(R2F_DATA_DIR "/vln_grammar.json")) grammar = R2F_DATA_DIR "/vln_grammar.json";
#endif
  if (!grammar.empty()) r.grammar = Grammar::load(grammar);
  return r;
}

int perceive(WorldModel & world, const Observation & obs, const R2fConfig & cfg, int step,
             const std::vector<Vec3> & invalidated_points)
{
  world.grid.integrate_observation(obs, cfg.camera, cfg.map.stride);

  world.synced_this_step = false;
  if (step % cfg.policy.n_map == 0) {
    std::vector<FrontierRegion> fresh;
    if (const auto bounds = world.grid.allocated_bounds()) {
      const double vs = cfg.map.voxel_size;
      double z0 = world.floor_height + cfg.frontiers.z_min;
      double z1 = world.floor_height + cfg.frontiers.z_max;
      if (cfg.frontiers.layer == "camera") {
        const double layer = std::floor(obs.pose.position.z() / vs);
        z0 = layer * vs;
        z1 = (layer + 1.0) * vs;
      }
      const Aabb box(Vec3(bounds->first.x() * vs, bounds->first.y() * vs, z0),
                     Vec3(bounds->second.x() * vs, bounds->second.y() * vs, z1));
      const ClassSnapshot snap = world.grid.snapshot_region(box);
      const auto voxels = extract_frontiers(snap, world.floor_height + cfg.frontiers.z_min,
                                            world.floor_height + cfg.frontiers.z_max, cfg.frontiers.k_u,
                                            cfg.frontiers.k_f);
      fresh = cluster_regions(voxels, vs, cfg.frontiers.merge_radius);
    }
    world.regions = sync_regions(world.regions, std::move(fresh), cfg.frontiers.merge_radius, invalidated_points,
                                 cfg.policy.invalidation_radius, step);
    world.synced_this_step = true;
    ++world.sync_count;
  }

  int associated = 0;
  for (const auto & ray : select_oor_rays(obs, cfg.camera, cfg.rays.max_rays, cfg.rays.erosion_radius)) {
    if (world.ray_sum.size() == 0) world.ray_sum = Eigen::VectorXd::Zero(ray.feature.values().size());
    world.ray_sum += ray.feature.values();
    world.ray_weight += 1.0;
    if (const auto idx = associate_ray(ray, world.regions, cfg.rays.association)) {
      accumulate(world.regions[*idx], bin_of(ray.direction), ray.feature, 1.0);
      ++associated;
    }
  }
  return associated;
}

EpisodeResult run_episode(const EpisodeSpec & spec, const R2fConfig & cfg, std::ostream * trace)
{
  return run_episode(spec, cfg, Resources::load(cfg), trace);
}

EpisodeResult run_episode(const EpisodeSpec & spec, const R2fConfig & cfg, const Resources & res,
                          std::ostream * trace, const StepObserver & observer)
{
  if (!spec.scene) throw ConfigError("episode " + spec.id + ": no scene");
  const SceneSpec & scene = *spec.scene;
  if (!is_navigable(scene, spec.start)) throw ConfigError("episode " + spec.id + ": start is not navigable");
  if (spec.mode != "objectnav" && spec.mode != "vln") throw ConfigError("episode " + spec.id + ": unknown mode '" + spec.mode + "'");
  const auto goals_it = scene.goal_sets.find(spec.text);
  if (goals_it == scene.goal_sets.end() || goals_it->second.empty()) {
    throw ConfigError("episode " + spec.id + ": scene has no goals for '" + spec.text + "'");
  }
  std::vector<Vec2> goals;
  for (const auto & g : goals_it->second) goals.push_back(g.head<2>());

  // Query and landmarks.
  std::optional<Embedding> query;
  LandmarkSet landmarks;
  std::optional<ParsedInstruction> parsed;
  try {
    if (spec.mode == "objectnav" && scene.registry.contains(spec.text)) {
      query = encode_query(spec.text, {}, scene.registry);
    } else {
      parsed = parse_instruction(spec.text, res.grammar);
      const auto [head, attrs] = resolve_target(*parsed, scene.registry);
      query = encode_query(head, attrs, scene.registry);
      if (spec.mode == "vln" && spec.verify) landmarks = expand_landmarks(*parsed, res.lexicon, scene.registry, cfg.vln);
    }
  } catch (const UnknownConcept & e) {
    throw ConfigError("episode " + spec.id + ": " + e.what());
  } catch (const Unparseable & e) {
    throw ConfigError("episode " + spec.id + ": " + e.what());
  }

  EpisodeResult result;
  result.id = spec.id;
  {
    const GeodesicOracle oracle(scene);
    result.optimal_length = oracle.distance_to_nearest(spec.start, goals);
  }

  if (trace) {
    nlohmann::json h = {{"type", "header"},
                        {"id", spec.id},
                        {"scene_path", spec.scene_path},
                        {"scene", scene.to_json()},
                        {"config", cfg.to_json()},
                        {"start", vec(spec.start)},
                        {"yaw_deg", spec.yaw_deg},
                        {"mode", spec.mode},
                        {"text", spec.text},
                        {"seed", spec.seed},
                        {"policy", policy_name(spec.policy)},
                        {"verify", spec.verify},
                        {"step_limit", spec.step_limit}};
    if (spec.feature_override) h["feature_override"] = *spec.feature_override;
    if (parsed) {
      h["parsed"] = {{"head", parsed->target_head}, {"attributes", parsed->target_attributes}, {"landmarks", parsed->landmarks}};
    }
    *trace << h.dump() << '\n';
  }

  const auto t0 = std::chrono::steady_clock::now();
  WorldModel world(cfg.map);
  world.floor_height = scene.floor_height;
  PolicyState state = make_policy_state(cfg.policy);
  AgentState agent{spec.start, spec.yaw_deg};
  RenderOptions ro;
  ro.noise_sigma = cfg.sim.noise_sigma;
  ro.noise_variants = cfg.sim.noise_variants;
  ro.feature_override = spec.feature_override;

  const bool use_vln = spec.mode == "vln" && spec.verify;
  Action action = Action::Stop;
  for (int t = 0;; ++t) {
    ro.noise_seed = derive_seed(spec.seed, static_cast<std::uint64_t>(t), kNoisePurpose);
    const Observation obs = render(scene, agent, cfg.camera, ro);
    const int rays = perceive(world, obs, cfg, t, state.invalidated_points);

    PolicyInputs in{obs, cfg.camera, world, *query, cfg.policy, cfg.planner, spec.policy, false};
    if (!spec.script.empty()) {
      const std::size_t k = static_cast<std::size_t>(t);
      action = k < spec.script.size() ? spec.script[k] : Action::Stop;
      if (action == Action::Stop) {
        state.done = DoneReason::ApproachStop;
      } else if (t + 1 >= cfg.policy.t_max) {
        action = Action::Stop;
        state.done = DoneReason::Budget;
      }
    } else {
      action = use_vln ? vln_step_policy(in, landmarks, cfg.vln, state) : step_policy(in, state);
    }
    if (spec.step_limit > 0 && t + 1 >= spec.step_limit) action = Action::Stop;

    if (trace) {
      nlohmann::json s = {{"type", "step"},
                          {"t", t},
                          {"pose", {agent.position.x(), agent.position.y(), agent.yaw_deg}},
                          {"mode", mode_name(state.mode)},
                          {"action", action_name(action)},
                          {"detector_max", state.last_detector_max},
                          {"detector_count", state.detector.consecutive},
                          {"regions", world.regions.size()},
                          {"synced", world.synced_this_step},
                          {"rays", rays}};
      if (state.last_selection && state.last_selection->kind != Selection::Kind::Exhausted &&
          state.last_selection->index < world.regions.size()) {
        s["selection"] = {{"kind", selection_name(state.last_selection->kind)},
                          {"score", state.last_selection->score ? nlohmann::json(*state.last_selection->score) : nlohmann::json()}};
      }
      if (state.target_point) s["target"] = vec(*state.target_point);
      if (state.goal_point) s["goal"] = vec(*state.goal_point);
      *trace << s.dump() << '\n';
    }

    result.actions.push_back(action);
    ++result.steps;
    if (observer && !observer(t, obs, world, state)) break;
    if (action == Action::Stop) break;
    const StepResult sr = step(scene, agent, action);
    result.executed_length += (sr.state.position - agent.position).norm();
    agent = sr.state;
  }
  result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  result.final_position = agent.position;
  result.frontier_calls = world.sync_count;
  result.stop_hypothesis = state.goal_point;

  double nearest = std::numeric_limits<double>::infinity();
  for (const auto & g : goals) nearest = std::min(nearest, (g - agent.position).norm());
  switch (state.done) {
    case DoneReason::ApproachStop:
      result.success = nearest <= cfg.policy.delta;
      result.outcome = result.success ? Outcome::StoppedAtGoal : Outcome::StoppedWrong;
      break;
    case DoneReason::Exhausted:
      result.outcome = Outcome::ExplorationExhausted;
      break;
    case DoneReason::Budget:
    case DoneReason::None:
      result.outcome = Outcome::BudgetExhausted;
      break;
  }

  if (trace) {
    nlohmann::json r = result.to_json();
    r.erase("wall_time");
    r["type"] = "result";
    *trace << r.dump() << '\n';
  }
  return result;
}

double compute_sr(const std::vector<EpisodeResult> & results)
{
  if (results.empty()) throw InvalidArgument("compute_sr: no results");
  double s = 0.0;
  for (const auto & r : results) s += r.success ? 1.0 : 0.0;
  return s / static_cast<double>(results.size());
}

double compute_spl(const std::vector<EpisodeResult> & results)
{
  if (results.empty()) throw InvalidArgument("compute_spl: no results");
  double s = 0.0;
  for (const auto & r : results) {
    if (!r.success) continue;
    const double denom = std::max(r.executed_length, r.optimal_length);
    s += denom > 0.0 ? r.optimal_length / denom : 1.0;
  }
  return s / static_cast<double>(results.size());
}

nlohmann::json BatchReport::summary_json() const
{
  return {{"episodes", results.size()},
          {"errors", error_count},
          {"sr", sr},
          {"spl", spl},
          {"mean_wall_time", mean_wall_time},
          {"mean_steps", mean_steps},
          {"outcomes", outcomes}};
}

BatchReport run_batch(const std::vector<EpisodeSpec> & specs, const R2fConfig & cfg, int jobs, bool keep_traces)
{
  BatchReport report;
  const std::size_t n = specs.size();
  report.results.resize(n);
  report.errors.assign(n, "");
  if (keep_traces) report.traces.assign(n, "");
  const Resources res = Resources::load(cfg);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      std::ostringstream trace;
      try {
        report.results[i] = run_episode(specs[i], cfg, res, keep_traces ? &trace : nullptr);
      } catch (const std::exception & e) {
        report.errors[i] = e.what();
      }
      if (keep_traces) report.traces[i] = trace.str();
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(std::max<std::size_t>(n, 1))));
  std::vector<std::thread> pool;
  for (int k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto & th : pool) th.join();

  std::vector<EpisodeResult> ok;
  for (std::size_t i = 0; i < n; ++i) {
    if (report.results[i]) {
      ok.push_back(*report.results[i]);
      ++report.outcomes[outcome_name(report.results[i]->outcome)];
    } else {
      ++report.error_count;
    }
  }
  if (!ok.empty()) {
    report.sr = compute_sr(ok);
    report.spl = compute_spl(ok);
    for (const auto & r : ok) {
      report.mean_wall_time += r.wall_time / static_cast<double>(ok.size());
      report.mean_steps += static_cast<double>(r.steps) / static_cast<double>(ok.size());
    }
  }
  return report;
}

TracedEpisode episode_from_trace_header(const nlohmann::json & h)
{
  if (h.value("type", "") != "header") throw ConfigError("trace: first line is not a header");
  TracedEpisode out;
  try {
    out.cfg = R2fConfig::from_json(h.at("config"));
    auto & s = out.spec;
    s.id = h.at("id").get<std::string>();
    s.scene = std::make_shared<const SceneSpec>(SceneSpec::from_json(h.at("scene")));
    s.scene_path = h.value("scene_path", "");
    s.start = Vec2(h.at("start").at(0).get<double>(), h.at("start").at(1).get<double>());
    s.yaw_deg = h.at("yaw_deg").get<double>();
    s.mode = h.at("mode").get<std::string>();
    s.text = h.at("text").get<std::string>();
    s.seed = h.at("seed").get<std::uint64_t>();
    s.policy = h.at("policy").get<std::string>() == "nearest" ? PolicyKind::NearestFrontier : PolicyKind::R2F;
    s.verify = h.at("verify").get<bool>();
    s.step_limit = h.value("step_limit", 0);
    if (h.contains("feature_override")) s.feature_override = h.at("feature_override").get<std::string>();
  } catch (const nlohmann::json::exception & e) {
    throw ConfigError(std::string("trace header: ") + e.what());
  }
  return out;
}

std::vector<EpisodeSpec> episodes_from_scene(const std::shared_ptr<const SceneSpec> & scene,
                                             const std::string & scene_path, std::uint64_t seed)
{
  std::vector<EpisodeSpec> out;
  for (std::size_t i = 0; i < scene->episodes.size(); ++i) {
    const auto & e = scene->episodes[i];
    EpisodeSpec s;
    s.id = scene_path + "#" + std::to_string(i);
    s.scene = scene;
    s.scene_path = scene_path;
    s.start = e.start;
    s.yaw_deg = e.yaw_deg;
    s.mode = e.mode;
    s.text = e.text;
    s.seed = derive_seed(seed, i, fnv1a64(scene_path));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace r2f
