#include "r2f/sim_world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <random>

namespace r2f
{

namespace
{

nlohmann::json vec_json(const Vec3 & v) { return {v.x(), v.y(), v.z()}; }
nlohmann::json vec_json(const Vec2 & v) { return {v.x(), v.y()}; }
Vec3 vec3_from(const nlohmann::json & j)
{
  return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}
Vec2 vec2_from(const nlohmann::json & j) { return Vec2(j.at(0).get<double>(), j.at(1).get<double>()); }
nlohmann::json box_json(const Aabb & b) { return {vec_json(b.min), vec_json(b.max)}; }
Aabb box_from(const nlohmann::json & j) { return {vec3_from(j.at(0)), vec3_from(j.at(1))}; }

std::vector<Rect2> obstacle_footprints(const SceneSpec & scene)
{
  std::vector<Rect2> rects;
  rects.reserve(scene.walls.size() + scene.objects.size());
  for (const auto & w : scene.walls) {
    rects.push_back(Rect2::footprint(w));
  }
  for (const auto & o : scene.objects) {
    rects.push_back(Rect2::footprint(o.box));
  }
  return rects;
}

bool disc_inside(const Rect2 & bounds, const Vec2 & p, double radius)
{
  return p.x() - radius >= bounds.min.x() && p.x() + radius <= bounds.max.x() &&
         p.y() - radius >= bounds.min.y() && p.y() + radius <= bounds.max.y();
}

}  // namespace

// --- scene ------------------------------------------------------------------

void SceneSpec::validate() const
{
  if (!bounds.valid() || bounds.volume() <= 0.0) {
    throw InvalidArgument("scene: degenerate bounds");
  }
  for (const auto & w : walls) {
    if (!w.valid() || !bounds.contains(w)) {
      throw InvalidArgument("scene: wall outside bounds");
    }
  }
  for (const auto & o : objects) {
    if (!o.box.valid() || !bounds.contains(o.box)) {
      throw InvalidArgument("scene: object '" + o.concept_name + "' outside bounds");
    }
    if (!registry.contains(o.concept_name)) {
      throw InvalidArgument("scene: object concept '" + o.concept_name + "' not registered");
    }
  }
  for (const char * c : {kWallConcept, kFloorConcept, kCeilingConcept, kVoidConcept}) {
    if (!registry.contains(c)) {
      throw InvalidArgument(std::string("scene: surface concept '") + c + "' not registered");
    }
  }
  for (const auto & [query, points] : goal_sets) {
    for (const auto & g : points) {
      if (!is_navigable(*this, g.head<2>())) {
        throw InvalidArgument("scene: goal point for '" + query + "' is not navigable");
      }
    }
  }
  for (const auto & e : episodes) {
    if (!is_navigable(*this, e.start)) {
      throw InvalidArgument("scene: episode start is not navigable");
    }
  }
}

nlohmann::json SceneSpec::to_json() const
{
  nlohmann::json j;
  j["bounds"] = box_json(bounds);
  j["floor_height"] = floor_height;
  j["seed"] = seed;
  j["walls"] = nlohmann::json::array();
  for (const auto & w : walls) {
    j["walls"].push_back(box_json(w));
  }
  j["objects"] = nlohmann::json::array();
  for (const auto & o : objects) {
    j["objects"].push_back(
      {{"concept", o.concept_name}, {"box", box_json(o.box)}, {"instance_id", o.instance_id}});
  }
  j["goal_sets"] = nlohmann::json::object();
  for (const auto & [query, points] : goal_sets) {
    auto & arr = j["goal_sets"][query] = nlohmann::json::array();
    for (const auto & p : points) {
      arr.push_back(vec_json(p));
    }
  }
  j["registry"] = registry.to_json();
  j["episodes"] = nlohmann::json::array();
  for (const auto & e : episodes) {
    j["episodes"].push_back(
      {{"start", vec_json(e.start)}, {"yaw_deg", e.yaw_deg}, {"mode", e.mode}, {"text", e.text}});
  }
  return j;
}

SceneSpec SceneSpec::from_json(const nlohmann::json & j)
{
  SceneSpec s;
  s.bounds = box_from(j.at("bounds"));
  s.floor_height = j.value("floor_height", 0.0);
  s.seed = j.value("seed", std::uint64_t{0});
  for (const auto & w : j.at("walls")) {
    s.walls.push_back(box_from(w));
  }
  for (const auto & o : j.at("objects")) {
    s.objects.push_back(
      {o.at("concept").get<std::string>(), box_from(o.at("box")), o.value("instance_id", 0)});
  }
  if (j.contains("goal_sets")) {
    for (const auto & [query, points] : j.at("goal_sets").items()) {
      auto & dst = s.goal_sets[query];
      for (const auto & p : points) {
        dst.push_back(vec3_from(p));
      }
    }
  }
  s.registry = ConceptRegistry::from_json(j.at("registry"));
  if (j.contains("episodes")) {
    for (const auto & e : j.at("episodes")) {
      s.episodes.push_back({vec2_from(e.at("start")), e.value("yaw_deg", 0.0),
                            e.value("mode", std::string("objectnav")),
                            e.value("text", std::string())});
    }
  }
  return s;
}

void SceneSpec::save(const std::string & path) const
{
  std::ofstream out(path);
  if (!out) {
    throw ConfigError("cannot write scene file " + path);
  }
  out << to_json().dump(1) << '\n';
}

SceneSpec SceneSpec::load(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open scene file " + path);
  }
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception & e) {
    throw ConfigError("malformed scene file " + path + ": " + e.what());
  }
}

// --- camera -----------------------------------------------------------------

void CameraModel::validate() const
{
  if (width <= 0 || height <= 0) {
    throw InvalidArgument("camera: non-positive resolution");
  }
  if (!(hfov_deg > 0.0 && hfov_deg < 180.0)) {
    throw InvalidArgument("camera: horizontal FOV must lie in (0, 180) degrees");
  }
  if (!(r_max > 0.0)) {
    throw InvalidArgument("camera: r_max must be > 0");
  }
}

double CameraModel::focal_px() const
{
  return 0.5 * static_cast<double>(width) / std::tan(0.5 * deg2rad(hfov_deg));
}

Vec3 CameraModel::pixel_ray_camera(int u, int v) const
{
  const double f = focal_px();
  const double right = (static_cast<double>(u) + 0.5 - 0.5 * width) / f;
  const double down = (static_cast<double>(v) + 0.5 - 0.5 * height) / f;
  return Vec3(1.0, -right, -down).normalized();
}

std::vector<Vec3> CameraModel::ray_table() const
{
  std::vector<Vec3> rays;
  rays.reserve(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      rays.push_back(pixel_ray_camera(u, v));
    }
  }
  return rays;
}

Vec3 CameraModel::pixel_ray_world(int u, int v, double yaw_deg) const
{
  const Vec3 c = pixel_ray_camera(u, v);
  const double cy = std::cos(deg2rad(yaw_deg));
  const double sy = std::sin(deg2rad(yaw_deg));
  return {cy * c.x() - sy * c.y(), sy * c.x() + cy * c.y(), c.z()};
}

// --- rendering --------------------------------------------------------------

Observation render(const SceneSpec & scene, const AgentState & state, const CameraModel & cam,
                   const RenderOptions & options)
{
  cam.validate();
  if (!(options.noise_sigma >= 0.0) || options.noise_variants < 1) {
    throw InvalidArgument("render: invalid noise options");
  }
  const Vec3 origin = state.camera_position(scene.floor_height);
  if (!scene.bounds.strictly_contains(origin)) {
    throw RenderError("render: camera outside scene bounds");
  }
  for (const auto & w : scene.walls) {
    if (w.strictly_contains(origin)) {
      throw RenderError("render: camera inside a wall");
    }
  }
  for (const auto & o : scene.objects) {
    if (o.box.strictly_contains(origin)) {
      throw RenderError("render: camera inside object '" + o.concept_name + "'");
    }
  }

  // Surface ids: 0 wall, 1 floor, 2 ceiling, 3 void, 4+ distinct object concepts.
  std::vector<std::string> concepts = {kWallConcept, kFloorConcept, kCeilingConcept, kVoidConcept};
  std::vector<int> object_surface(scene.objects.size());
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const auto & name = scene.objects[i].concept_name;
    auto it = std::find(concepts.begin(), concepts.end(), name);
    object_surface[i] = static_cast<int>(it - concepts.begin());
    if (it == concepts.end()) {
      concepts.push_back(name);
    }
  }
  constexpr int kWall = 0, kFloor = 1, kCeiling = 2, kVoid = 3;

  Observation obs;
  obs.width = cam.width;
  obs.height = cam.height;
  obs.pose = {origin, state.yaw_deg};
  const std::size_t n = static_cast<std::size_t>(cam.width) * static_cast<std::size_t>(cam.height);
  obs.depth.resize(n);
  obs.oor.resize(n);
  std::vector<int> surface(n);

  const double cy = std::cos(deg2rad(state.yaw_deg));
  const double sy = std::sin(deg2rad(state.yaw_deg));
  const double floor_z = scene.floor_height;
  const double ceil_z = scene.ceiling_height();
  const std::vector<Vec3> table = cam.ray_table();

  for (std::size_t p = 0; p < n; ++p) {
    const Vec3 & c = table[p];
    const Vec3 d(cy * c.x() - sy * c.y(), sy * c.x() + cy * c.y(), c.z());
    const Vec3 inv = d.cwiseInverse();
    double best = std::numeric_limits<double>::infinity();
    int id = kVoid;
    if (d.z() < 0.0) {
      best = (floor_z - origin.z()) / d.z();
      id = kFloor;
    } else if (d.z() > 0.0) {
      best = (ceil_z - origin.z()) / d.z();
      id = kCeiling;
    }
    for (const auto & w : scene.walls) {
      if (auto t = ray_aabb(origin, inv, w); t && *t < best) {
        best = *t;
        id = kWall;
      }
    }
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
      if (auto t = ray_aabb(origin, inv, scene.objects[i].box); t && *t < best) {
        best = *t;
        id = object_surface[i];
      }
    }
    obs.depth[p] = std::min(best, cam.r_max);
    obs.oor[p] = best >= cam.r_max ? 1 : 0;
    surface[p] = id;
  }

  // Palette: one slot per (surface concept, noise variant), created on demand.
  int override_id = -1;
  if (options.feature_override) {
    concepts.push_back(*options.feature_override);
    override_id = static_cast<int>(concepts.size()) - 1;
  }
  const int variants = options.noise_sigma > 0.0 ? options.noise_variants : 1;
  std::vector<std::int64_t> slot(concepts.size() * static_cast<std::size_t>(variants), -1);
  const std::size_t dim = scene.registry.dimension();
  const double component_sigma = options.noise_sigma / std::sqrt(static_cast<double>(dim));
  obs.features.index.resize(n);

  for (std::size_t p = 0; p < n; ++p) {
    const int id = override_id >= 0 ? override_id : surface[p];
    const int k = variants == 1
                    ? 0
                    : static_cast<int>(mix64(options.noise_seed ^ (p * 0x9e3779b97f4a7c15ULL)) %
                                       static_cast<std::uint64_t>(variants));
    auto & s = slot[static_cast<std::size_t>(id) * static_cast<std::size_t>(variants) +
                    static_cast<std::size_t>(k)];
    if (s < 0) {
      const Embedding & base = scene.registry.visual(concepts[static_cast<std::size_t>(id)]);
      if (variants == 1) {
        obs.features.palette.push_back(base);
      } else {
        std::mt19937_64 rng(derive_seed(options.noise_seed,
                                        fnv1a64(concepts[static_cast<std::size_t>(id)]),
                                        static_cast<std::uint64_t>(k)));
        std::normal_distribution<double> normal(0.0, component_sigma);
        Eigen::VectorXd v = base.values();
        for (Eigen::Index i = 0; i < v.size(); ++i) {
          v[i] += normal(rng);
        }
        obs.features.palette.push_back(Embedding::from_values(std::move(v)));
      }
      s = static_cast<std::int64_t>(obs.features.palette.size()) - 1;
    }
    obs.features.index[p] = static_cast<std::uint32_t>(s);
  }
  return obs;
}

// --- kinematics -------------------------------------------------------------

const char * action_name(Action a)
{
  switch (a) {
    case Action::Forward:
      return "forward";
    case Action::TurnLeft:
      return "turn_left";
    case Action::TurnRight:
      return "turn_right";
    case Action::Stop:
      return "stop";
  }
  return "?";
}

Action action_from_name(const std::string & name)
{
  if (name == "forward") return Action::Forward;
  if (name == "turn_left") return Action::TurnLeft;
  if (name == "turn_right") return Action::TurnRight;
  if (name == "stop") return Action::Stop;
  throw InvalidArgument("unknown action '" + name + "'");
}

bool is_navigable(const SceneSpec & scene, const Vec2 & p, double radius)
{
  if (!disc_inside(Rect2::footprint(scene.bounds), p, radius)) {
    return false;
  }
  for (const auto & w : scene.walls) {
    if (point_rect_distance(p, Rect2::footprint(w)) < radius) {
      return false;
    }
  }
  for (const auto & o : scene.objects) {
    if (point_rect_distance(p, Rect2::footprint(o.box)) < radius) {
      return false;
    }
  }
  return true;
}

StepResult step(const SceneSpec & scene, const AgentState & state, Action action)
{
  StepResult r{state, false, false};
  switch (action) {
    case Action::TurnLeft:
      r.state.yaw_deg = wrap_degrees(state.yaw_deg + AgentState::kTurnStep);
      break;
    case Action::TurnRight:
      r.state.yaw_deg = wrap_degrees(state.yaw_deg - AgentState::kTurnStep);
      break;
    case Action::Stop:
      r.stopped = true;
      break;
    case Action::Forward: {
      const Vec2 target = state.position + AgentState::kForwardStep * state.heading();
      bool blocked = !disc_inside(Rect2::footprint(scene.bounds), target, AgentState::kRadius);
      for (std::size_t i = 0; !blocked && i < scene.walls.size(); ++i) {
        blocked = segment_rect_distance(state.position, target,
                                        Rect2::footprint(scene.walls[i])) < AgentState::kRadius;
      }
      for (std::size_t i = 0; !blocked && i < scene.objects.size(); ++i) {
        blocked = segment_rect_distance(state.position, target,
                                        Rect2::footprint(scene.objects[i].box)) <
                  AgentState::kRadius;
      }
      if (blocked) {
        r.collided = true;
      } else {
        r.state.position = target;
      }
      break;
    }
  }
  return r;
}

// --- geodesic oracle --------------------------------------------------------

GeodesicOracle::GeodesicOracle(const SceneSpec & scene, double agent_radius)
: obstacles_(obstacle_footprints(scene)),
  bounds_(Rect2::footprint(scene.bounds)),
  radius_(agent_radius),
  origin_(bounds_.min)
{
  const Vec2 extent = bounds_.max - bounds_.min;
  nx_ = static_cast<int>(std::ceil(extent.x() / kCell));
  ny_ = static_cast<int>(std::ceil(extent.y() / kCell));
  free_.assign(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_), 0);
  for (int iy = 0; iy < ny_; ++iy) {
    for (int ix = 0; ix < nx_; ++ix) {
      free_[static_cast<std::size_t>(iy * nx_ + ix)] =
        disc_inside(bounds_, cell_center(ix, iy), radius_) ? 1 : 0;
    }
  }
  // Rasterise each obstacle footprint inflated by the agent radius.
  for (const auto & r : obstacles_) {
    const int x0 = std::max(0, static_cast<int>(std::floor((r.min.x() - radius_ - origin_.x()) / kCell)));
    const int x1 = std::min(nx_ - 1, static_cast<int>(std::floor((r.max.x() + radius_ - origin_.x()) / kCell)));
    const int y0 = std::max(0, static_cast<int>(std::floor((r.min.y() - radius_ - origin_.y()) / kCell)));
    const int y1 = std::min(ny_ - 1, static_cast<int>(std::floor((r.max.y() + radius_ - origin_.y()) / kCell)));
    for (int iy = y0; iy <= y1; ++iy) {
      for (int ix = x0; ix <= x1; ++ix) {
        if (point_rect_distance(cell_center(ix, iy), r) < radius_) {
          free_[static_cast<std::size_t>(iy * nx_ + ix)] = 0;
        }
      }
    }
  }
}

Vec2 GeodesicOracle::cell_center(int ix, int iy) const
{
  return origin_ + Vec2((ix + 0.5) * kCell, (iy + 0.5) * kCell);
}

bool GeodesicOracle::navigable_cell(int ix, int iy) const
{
  return ix >= 0 && iy >= 0 && ix < nx_ && iy < ny_ &&
         free_[static_cast<std::size_t>(iy * nx_ + ix)] != 0;
}

bool GeodesicOracle::navigable_point(const Vec2 & p) const
{
  if (!disc_inside(bounds_, p, radius_)) {
    return false;
  }
  return std::none_of(obstacles_.begin(), obstacles_.end(),
                      [&](const Rect2 & r) { return point_rect_distance(p, r) < radius_; });
}

int GeodesicOracle::cell_of(const Vec2 & p) const
{
  const int ix = static_cast<int>(std::floor((p.x() - origin_.x()) / kCell));
  const int iy = static_cast<int>(std::floor((p.y() - origin_.y()) / kCell));
  if (ix < 0 || iy < 0 || ix >= nx_ || iy >= ny_) {
    return -1;
  }
  return iy * nx_ + ix;
}

int GeodesicOracle::nearest_cell(const Vec2 & p) const
{
  // Search rings of growing radius; a navigable point always has a navigable
  // cell within a couple of cells.
  const int cx = static_cast<int>(std::floor((p.x() - origin_.x()) / kCell));
  const int cy = static_cast<int>(std::floor((p.y() - origin_.y()) / kCell));
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int r = 0; r <= 6 && best < 0; ++r) {
    for (int iy = cy - r; iy <= cy + r; ++iy) {
      for (int ix = cx - r; ix <= cx + r; ++ix) {
        if (std::max(std::abs(ix - cx), std::abs(iy - cy)) != r || !navigable_cell(ix, iy)) {
          continue;
        }
        const double d = (cell_center(ix, iy) - p).norm();
        if (d < best_d) {
          best_d = d;
          best = iy * nx_ + ix;
        }
      }
    }
  }
  return best;
}

std::optional<Vec2> GeodesicOracle::nearest_navigable(const Vec2 & p, double max_radius) const
{
  const int cx = static_cast<int>(std::floor((p.x() - origin_.x()) / kCell));
  const int cy = static_cast<int>(std::floor((p.y() - origin_.y()) / kCell));
  const int rmax = static_cast<int>(std::ceil(max_radius / kCell));
  std::optional<Vec2> best;
  double best_d = max_radius;
  for (int iy = cy - rmax; iy <= cy + rmax; ++iy) {
    for (int ix = cx - rmax; ix <= cx + rmax; ++ix) {
      if (!navigable_cell(ix, iy)) {
        continue;
      }
      const Vec2 c = cell_center(ix, iy);
      const double d = (c - p).norm();
      if (d <= best_d && navigable_point(c)) {
        best_d = d;
        best = c;
      }
    }
  }
  return best;
}

std::vector<double> GeodesicOracle::dijkstra(int source, int target) const
{
  std::vector<double> dist(free_.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  dist[static_cast<std::size_t>(source)] = 0.0;
  open.emplace(0.0, source);
  const double diag = std::sqrt(2.0) * kCell;
  while (!open.empty()) {
    auto [d, cell] = open.top();
    open.pop();
    if (d > dist[static_cast<std::size_t>(cell)]) {
      continue;
    }
    if (cell == target) {
      break;
    }
    const int cx = cell % nx_;
    const int cy = cell / nx_;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if ((dx == 0 && dy == 0) || !navigable_cell(cx + dx, cy + dy)) {
          continue;
        }
        // No corner cutting through blocked cells.
        if (dx != 0 && dy != 0 &&
            (!navigable_cell(cx + dx, cy) || !navigable_cell(cx, cy + dy))) {
          continue;
        }
        const int next = (cy + dy) * nx_ + (cx + dx);
        const double nd = d + ((dx != 0 && dy != 0) ? diag : kCell);
        if (nd < dist[static_cast<std::size_t>(next)]) {
          dist[static_cast<std::size_t>(next)] = nd;
          open.emplace(nd, next);
        }
      }
    }
  }
  return dist;
}

double GeodesicOracle::distance(const Vec2 & a, const Vec2 & b) const
{
  if (!navigable_point(a) || !navigable_point(b)) {
    throw InvalidArgument("geodesic_distance: endpoint is not navigable");
  }
  const int ca = nearest_cell(a);
  const int cb = nearest_cell(b);
  if (ca < 0 || cb < 0) {
    throw InvalidArgument("geodesic_distance: no navigable cell near endpoint");
  }
  if (ca == cb) {
    return 0.0;
  }
  const double d = dijkstra(ca, cb)[static_cast<std::size_t>(cb)];
  if (!std::isfinite(d)) {
    throw DisconnectedError("geodesic_distance: endpoints are disconnected");
  }
  return d;
}

double GeodesicOracle::distance_to_nearest(const Vec2 & a, const std::vector<Vec2> & goals) const
{
  if (!navigable_point(a)) {
    throw InvalidArgument("geodesic_distance: start is not navigable");
  }
  const int ca = nearest_cell(a);
  if (ca < 0) {
    throw InvalidArgument("geodesic_distance: no navigable cell near start");
  }
  const std::vector<double> dist = dijkstra(ca, -1);
  double best = std::numeric_limits<double>::infinity();
  for (const auto & g : goals) {
    const int cg = nearest_cell(g);
    if (cg >= 0) {
      best = std::min(best, dist[static_cast<std::size_t>(cg)]);
    }
  }
  if (!std::isfinite(best)) {
    throw DisconnectedError("geodesic_distance: no goal reachable");
  }
  return best;
}

int GeodesicOracle::component_count() const
{
  std::vector<int> label(free_.size(), -1);
  int count = 0;
  std::vector<int> stack;
  for (int start = 0; start < static_cast<int>(free_.size()); ++start) {
    if (!free_[static_cast<std::size_t>(start)] || label[static_cast<std::size_t>(start)] >= 0) {
      continue;
    }
    label[static_cast<std::size_t>(start)] = count;
    stack.push_back(start);
    while (!stack.empty()) {
      const int cell = stack.back();
      stack.pop_back();
      const int cx = cell % nx_;
      const int cy = cell / nx_;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if ((dx == 0 && dy == 0) || !navigable_cell(cx + dx, cy + dy)) {
            continue;
          }
          if (dx != 0 && dy != 0 &&
              (!navigable_cell(cx + dx, cy) || !navigable_cell(cx, cy + dy))) {
            continue;
          }
          const int next = (cy + dy) * nx_ + (cx + dx);
          if (label[static_cast<std::size_t>(next)] < 0) {
            label[static_cast<std::size_t>(next)] = count;
            stack.push_back(next);
          }
        }
      }
    }
    ++count;
  }
  return count;
}

double geodesic_distance(const SceneSpec & scene, const Vec2 & a, const Vec2 & b)
{
  return GeodesicOracle(scene).distance(a, b);
}

}  // namespace r2f
