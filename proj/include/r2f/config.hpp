#ifndef R2F_CONFIG_HPP
#define R2F_CONFIG_HPP

#include <string>

#include <nlohmann/json.hpp>

#include "r2f/occupancy_map.hpp"
#include "r2f/planner.hpp"
#include "r2f/policy.hpp"
#include "r2f/semantic_rays.hpp"
#include "r2f/sim_world.hpp"
#include "r2f/vln.hpp"

namespace r2f
{

struct FrontierConfig
{
  int k_u = 3;
  int k_f = 1;
  double merge_radius = 0.8;
  double z_min = 0.2;  // above the floor
  double z_max = 1.5;
  /// "camera": one voxel layer at camera height; "band": the full height band.
  std::string layer = "camera";

  void validate() const;
};

struct RayConfig
{
  int max_rays = 64;
  int erosion_radius = 2;
  AssociationParams association;

  void validate() const;
};

struct SimConfig
{
  double noise_sigma = 0.05;
  int noise_variants = 16;

  void validate() const;
};

struct R2fConfig
{
  CameraModel camera;
  SimConfig sim;
  MapConfig map;
  FrontierConfig frontiers;
  RayConfig rays;
  PlannerConfig planner;
  PolicyConfig policy;
  VlnConfig vln;
  std::string lexicon_path;   // empty: bundled default
  std::string grammar_path;   // empty: built-in grammar

  void validate() const;
  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys and invalid values throw
  /// ConfigError.
  static R2fConfig from_json(const nlohmann::json & j);
  static R2fConfig load(const std::string & path);
};

}  // namespace r2f

#endif  // R2F_CONFIG_HPP
