#include "r2f/config.hpp"

#include <fstream>
#include <set>

namespace r2f
{

void FrontierConfig::validate() const
{
  if (k_u < 0 || k_u > 6 || k_f < 0 || k_f > 6) throw ConfigError("frontiers: k_u and k_f must lie in [0, 6]");
  if (!(merge_radius >= 0.0)) throw ConfigError("frontiers: merge_radius must be non-negative");
  if (!(z_max > z_min)) throw ConfigError("frontiers: empty height band");
  if (layer != "camera" && layer != "band") throw ConfigError("frontiers: layer must be 'camera' or 'band'");
}

void RayConfig::validate() const
{
  if (max_rays < 1) throw ConfigError("rays: max_rays must be >= 1");
  if (erosion_radius < 0) throw ConfigError("rays: erosion_radius must be >= 0");
  if (!(association.tau_perp > 0.0) || !(association.tau_r > 0.0)) throw ConfigError("rays: tolerances must be positive");
  if (!(association.w_perp >= 0.0) || !(association.w_range >= 0.0)) throw ConfigError("rays: cost weights must be non-negative");
}

void SimConfig::validate() const
{
  if (!(noise_sigma >= 0.0)) throw ConfigError("sim: noise_sigma must be non-negative");
  if (noise_variants < 1) throw ConfigError("sim: noise_variants must be >= 1");
}

void R2fConfig::validate() const
{
  try {
    camera.validate();
  } catch (const InvalidArgument & e) {
    throw ConfigError(e.what());
  }
  sim.validate();
  map.validate();
  frontiers.validate();
  rays.validate();
  planner.validate();
  policy.validate();
  vln.validate();
}

nlohmann::json R2fConfig::to_json() const
{
  nlohmann::json j;
  j["camera"] = {{"width", camera.width}, {"height", camera.height}, {"hfov_deg", camera.hfov_deg}, {"r_max", camera.r_max}};
  j["sim"] = {{"noise_sigma", sim.noise_sigma}, {"noise_variants", sim.noise_variants}};
  j["map"] = {{"voxel_size", map.voxel_size}, {"l_occ", map.l_occ},   {"l_free", map.l_free},
              {"l_min", map.l_min},           {"l_max", map.l_max},   {"tau_free", map.tau_free},
              {"tau_occ", map.tau_occ},       {"stride", map.stride}, {"snapshot_cap_m3", map.snapshot_cap_m3}};
  j["frontiers"] = {{"k_u", frontiers.k_u},     {"k_f", frontiers.k_f},     {"merge_radius", frontiers.merge_radius},
                    {"z_min", frontiers.z_min}, {"z_max", frontiers.z_max}, {"layer", frontiers.layer}};
  j["rays"] = {{"max_rays", rays.max_rays},
               {"erosion_radius", rays.erosion_radius},
               {"tau_perp", rays.association.tau_perp},
               {"tau_r", rays.association.tau_r},
               {"w_perp", rays.association.w_perp},
               {"w_range", rays.association.w_range}};
  j["planner"] = {{"z_min", planner.z_min},
                  {"z_max", planner.z_max},
                  {"agent_radius", planner.agent_radius},
                  {"unknown_cost", planner.unknown_cost},
                  {"projection_radius", planner.projection_radius},
                  {"waypoint_every", planner.waypoint_every},
                  {"arrival_radius", planner.arrival_radius},
                  {"safety_margin", planner.safety_margin},
                  {"heading_deadband_deg", planner.heading_deadband_deg}};
  j["policy"] = {{"tau_g", policy.tau_g},
                 {"n_cons", policy.n_cons},
                 {"n_map", policy.n_map},
                 {"invalidation_radius", policy.invalidation_radius},
                 {"visited_filter", policy.visited_filter},
                 {"delta", policy.delta},
                 {"t_max", policy.t_max},
                 {"approach_stop", policy.approach_stop},
                 {"stall_window", policy.stall_window},
                 {"stall_motion", policy.stall_motion},
                 {"replan_every", policy.replan_every},
                 {"hypothesis_shift", policy.hypothesis_shift},
                 {"evidence_margin", policy.evidence_margin},
                 {"visited_spacing", policy.visited_spacing},
                 {"min_region_voxels", policy.min_region_voxels},
                 {"suppression_radius", policy.suppression_radius},
                 {"track_radius", policy.track_radius},
                 {"initial_spin", policy.initial_spin}};
  j["vln"] = {{"tau_syn", vln.tau_syn},         {"k_syn", vln.k_syn},
              {"tau_l", vln.tau_l},             {"synonym_cos", vln.synonym_cos},
              {"sweep_turns", vln.sweep_turns}, {"lexicon", lexicon_path},
              {"grammar", grammar_path}};
  return j;
}

namespace
{

class Reader
{
public:
  Reader(const nlohmann::json & root, const char * section) : section_(section)
  {
    if (!root.contains(section)) return;
    node_ = &root.at(section);
    if (!node_->is_object()) throw ConfigError(std::string("config: '") + section + "' must be an object");
  }
  ~Reader() noexcept(false)
  {
    if (!node_ || std::uncaught_exceptions() > 0) return;
    for (const auto & [key, value] : node_->items()) {
      if (!seen_.count(key)) throw ConfigError("config: unknown key '" + section_ + "." + key + "'");
    }
  }
  template <typename T>
  void get(const char * key, T & out)
  {
    seen_.insert(key);
    if (!node_ || !node_->contains(key)) return;
    try {
      out = node_->at(key).get<T>();
    } catch (const nlohmann::json::exception &) {
      throw ConfigError("config: bad value for '" + section_ + "." + key + "'");
    }
  }

private:
  std::string section_;
  const nlohmann::json * node_ = nullptr;
  std::set<std::string> seen_;
};

}  // namespace

R2fConfig R2fConfig::from_json(const nlohmann::json & j)
{
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  static const std::set<std::string> kSections = {"camera", "sim", "map", "frontiers", "rays", "planner", "policy", "vln"};
  for (const auto & [key, value] : j.items()) {
    if (!kSections.count(key)) throw ConfigError("config: unknown section '" + key + "'");
  }
  R2fConfig c;
  {
    Reader r(j, "camera");
    r.get("width", c.camera.width);
    r.get("height", c.camera.height);
    r.get("hfov_deg", c.camera.hfov_deg);
    r.get("r_max", c.camera.r_max);
  }
  {
    Reader r(j, "sim");
    r.get("noise_sigma", c.sim.noise_sigma);
    r.get("noise_variants", c.sim.noise_variants);
  }
  {
    Reader r(j, "map");
    r.get("voxel_size", c.map.voxel_size);
    r.get("l_occ", c.map.l_occ);
    r.get("l_free", c.map.l_free);
    r.get("l_min", c.map.l_min);
    r.get("l_max", c.map.l_max);
    r.get("tau_free", c.map.tau_free);
    r.get("tau_occ", c.map.tau_occ);
    r.get("stride", c.map.stride);
    r.get("snapshot_cap_m3", c.map.snapshot_cap_m3);
  }
  {
    Reader r(j, "frontiers");
    r.get("k_u", c.frontiers.k_u);
    r.get("k_f", c.frontiers.k_f);
    r.get("merge_radius", c.frontiers.merge_radius);
    r.get("z_min", c.frontiers.z_min);
    r.get("z_max", c.frontiers.z_max);
    r.get("layer", c.frontiers.layer);
  }
  {
    Reader r(j, "rays");
    r.get("max_rays", c.rays.max_rays);
    r.get("erosion_radius", c.rays.erosion_radius);
    r.get("tau_perp", c.rays.association.tau_perp);
    r.get("tau_r", c.rays.association.tau_r);
    r.get("w_perp", c.rays.association.w_perp);
    r.get("w_range", c.rays.association.w_range);
  }
  {
    Reader r(j, "planner");
    r.get("z_min", c.planner.z_min);
    r.get("z_max", c.planner.z_max);
    r.get("agent_radius", c.planner.agent_radius);
    r.get("unknown_cost", c.planner.unknown_cost);
    r.get("projection_radius", c.planner.projection_radius);
    r.get("waypoint_every", c.planner.waypoint_every);
    r.get("arrival_radius", c.planner.arrival_radius);
    r.get("safety_margin", c.planner.safety_margin);
    r.get("heading_deadband_deg", c.planner.heading_deadband_deg);
  }
  {
    Reader r(j, "policy");
    r.get("tau_g", c.policy.tau_g);
    r.get("n_cons", c.policy.n_cons);
    r.get("n_map", c.policy.n_map);
    r.get("invalidation_radius", c.policy.invalidation_radius);
    r.get("visited_filter", c.policy.visited_filter);
    r.get("delta", c.policy.delta);
    r.get("t_max", c.policy.t_max);
    r.get("approach_stop", c.policy.approach_stop);
    r.get("stall_window", c.policy.stall_window);
    r.get("stall_motion", c.policy.stall_motion);
    r.get("replan_every", c.policy.replan_every);
    r.get("hypothesis_shift", c.policy.hypothesis_shift);
    r.get("evidence_margin", c.policy.evidence_margin);
    r.get("visited_spacing", c.policy.visited_spacing);
    r.get("min_region_voxels", c.policy.min_region_voxels);
    r.get("suppression_radius", c.policy.suppression_radius);
    r.get("track_radius", c.policy.track_radius);
    r.get("initial_spin", c.policy.initial_spin);
  }
  {
    Reader r(j, "vln");
    r.get("tau_syn", c.vln.tau_syn);
    r.get("k_syn", c.vln.k_syn);
    r.get("tau_l", c.vln.tau_l);
    r.get("synonym_cos", c.vln.synonym_cos);
    r.get("sweep_turns", c.vln.sweep_turns);
    r.get("lexicon", c.lexicon_path);
    r.get("grammar", c.grammar_path);
  }
  c.validate();
  return c;
}

R2fConfig R2fConfig::load(const std::string & path)
{
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception & e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  return from_json(j);
}

}  // namespace r2f
