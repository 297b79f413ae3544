// Shared test helpers: hand-built scenes and brute-force reference
// implementations. Oracles deliberately avoid calling the library routine
// they check.
#ifndef R2F_TESTS_SUPPORT_HPP
#define R2F_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "r2f/config.hpp"
#include "r2f/frontiers.hpp"
#include "r2f/harness.hpp"
#include "r2f/na_attention.hpp"
#include "r2f/occupancy_map.hpp"
#include "r2f/semantic_rays.hpp"
#include "r2f/sim_world.hpp"
#include "r2f/vln.hpp"

namespace r2f::test
{

inline ConceptRegistry surface_registry(std::uint64_t seed = 1)
{
  ConceptRegistry reg(ConceptRegistry::kDefaultDimension, seed);
  for (const char * c : {kWallConcept, kFloorConcept, kCeilingConcept, kVoidConcept}) reg.add(std::string(c));
  return reg;
}

/// Empty box room, walls only at the bounds (no wall boxes), ceiling 2.5 m.
inline SceneSpec box_room(double x0, double y0, double x1, double y1, std::uint64_t seed = 1)
{
  SceneSpec s;
  s.bounds = Aabb(Vec3(x0, y0, 0.0), Vec3(x1, y1, 2.5));
  s.seed = seed;
  s.registry = surface_registry(seed);
  // Perimeter walls, 0.1 m thick, inside the bounds.
  s.walls.push_back(Aabb(Vec3(x0, y0, 0.0), Vec3(x1, y0 + 0.1, 2.5)));
  s.walls.push_back(Aabb(Vec3(x0, y1 - 0.1, 0.0), Vec3(x1, y1, 2.5)));
  s.walls.push_back(Aabb(Vec3(x0, y0, 0.0), Vec3(x0 + 0.1, y1, 2.5)));
  s.walls.push_back(Aabb(Vec3(x1 - 0.1, y0, 0.0), Vec3(x1, y1, 2.5)));
  return s;
}

inline void add_object(SceneSpec & s, const std::string & name, const Aabb & box)
{
  s.registry.add(name);
  s.objects.push_back({name, box, static_cast<int>(s.objects.size())});
}

// --- frontiers --------------------------------------------------------------

inline ClassSnapshot random_snapshot(std::uint64_t seed, Vec3i dims = Vec3i(8, 8, 4))
{
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> cls(0, 2);
  std::uniform_int_distribution<int> off(-20, 20);
  ClassSnapshot s;
  s.origin = Vec3i(off(rng), off(rng), off(rng) / 4);
  s.dims = dims;
  s.voxel_size = 0.1;
  s.cells.resize(static_cast<std::size_t>(dims.prod()));
  for (auto & c : s.cells) c = static_cast<CellClass>(cls(rng));
  return s;
}

/// Direct neighbour counting over a flat x-fastest array.
inline std::vector<Vec3i> brute_frontiers(const ClassSnapshot & s, double z_min, double z_max, int k_u, int k_f)
{
  const int nx = s.dims.x(), ny = s.dims.y(), nz = s.dims.z();
  auto cell = [&](int x, int y, int z) {
    if (x < 0 || y < 0 || z < 0 || x >= nx || y >= ny || z >= nz) return CellClass::Unknown;
    return s.cells[static_cast<std::size_t>((z * ny + y) * nx + x)];
  };
  const int d[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  std::vector<Vec3i> out;
  for (int z = 0; z < nz; ++z) {
    const double zc = (s.origin.z() + z + 0.5) * s.voxel_size;
    if (zc < z_min || zc > z_max) continue;
    for (int y = 0; y < ny; ++y) {
      for (int x = 0; x < nx; ++x) {
        if (cell(x, y, z) != CellClass::Free) continue;
        int unknown = 0, free = 0;
        for (const auto & o : d) {
          const CellClass c = cell(x + o[0], y + o[1], z + o[2]);
          unknown += c == CellClass::Unknown;
          free += c == CellClass::Free;
        }
        if (unknown >= k_u && free >= k_f) out.push_back(s.origin + Vec3i(x, y, z));
      }
    }
  }
  return out;
}

// --- rays -------------------------------------------------------------------

inline std::optional<std::size_t> brute_associate(const SemanticRay & ray, const std::vector<FrontierRegion> & regions,
                                                  const AssociationParams & p)
{
  std::vector<std::tuple<double, int, std::size_t>> ok;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (regions[i].invalidated) continue;
    const Vec3 v = regions[i].centroid - ray.origin;
    const double a = v.x() * ray.direction.x() + v.y() * ray.direction.y() + v.z() * ray.direction.z();
    if (a <= 0.0) continue;
    const Vec3 perp = v - a * ray.direction;
    const double dp = std::sqrt(perp.squaredNorm());
    const double r = std::sqrt(v.squaredNorm());
    if (dp >= p.tau_perp || r >= p.tau_r) continue;
    ok.emplace_back(p.w_perp * dp / p.tau_perp + p.w_range * r / p.tau_r, regions[i].id, i);
  }
  if (ok.empty()) return std::nullopt;
  return std::get<2>(*std::min_element(ok.begin(), ok.end()));
}

// --- attention --------------------------------------------------------------

inline std::vector<Eigen::VectorXd> naive_attend(const PatchGrid & g, double sigma)
{
  const std::size_t n = g.size();
  const double d = static_cast<double>(g.keys[0].size());
  std::vector<Eigen::VectorXd> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> s(n);
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (Eigen::Index k = 0; k < g.keys[i].size(); ++k) dot += g.keys[i][k] * g.keys[j][k];
      const double dx = g.centers[i].x() - g.centers[j].x();
      const double dy = g.centers[i].y() - g.centers[j].y();
      s[j] = dot / std::sqrt(d) * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
    }
    const double m = *std::max_element(s.begin(), s.end());
    double z = 0.0;
    for (double & x : s) z += (x = std::exp(x - m));
    Eigen::VectorXd o = Eigen::VectorXd::Zero(g.values[0].size());
    for (std::size_t j = 0; j < n; ++j) o += (s[j] / z) * g.values[j];
    out.push_back(o);
  }
  return out;
}

// --- occupancy --------------------------------------------------------------

struct WallTrace
{
  std::set<std::tuple<int, int, int>> free;     // wholly in front of the wall face
  std::set<std::tuple<int, int, int>> surface;  // voxel holding the hit point
};

inline std::tuple<int, int, int> voxel_key(const Vec3 & p, double vs)
{
  return {static_cast<int>(std::floor(p.x() / vs)), static_cast<int>(std::floor(p.y() / vs)),
          static_cast<int>(std::floor(p.z() / vs))};
}

/// Samples every stride-th pixel ray that hits the plane x = wall_x between
/// the floor and the ceiling, marching 1 mm at a time.
inline void trace_wall_view(WallTrace & out, const Vec3 & cam_pos, double yaw_deg, const CameraModel & cam,
                            double wall_x, double ceiling, int stride, double vs)
{
  for (int v = 0; v < cam.height; v += stride) {
    for (int u = 0; u < cam.width; u += stride) {
      // Pinhole ray rebuilt from the intrinsics, not the library's table.
      const double f = 0.5 * cam.width / std::tan(0.5 * cam.hfov_deg * kPi / 180.0);
      Vec3 rc(f, 0.5 * cam.width - (u + 0.5), 0.5 * cam.height - (v + 0.5));
      rc.normalize();
      const double c = std::cos(yaw_deg * kPi / 180.0), s = std::sin(yaw_deg * kPi / 180.0);
      const Vec3 d(c * rc.x() - s * rc.y(), s * rc.x() + c * rc.y(), rc.z());
      if (d.x() <= 0.0) continue;
      const double t = (wall_x - cam_pos.x()) / d.x();
      const Vec3 hit = cam_pos + t * d;
      if (hit.z() <= 0.0 || hit.z() >= ceiling || t >= cam.r_max) continue;
      const auto hv = voxel_key(hit + 1e-6 * d, vs);
      out.surface.insert(hv);
      for (double r = 0.0; r < t; r += 0.001) {
        const auto k = voxel_key(cam_pos + r * d, vs);
        // Voxels straddling the wall face hold solid too; they are not free space.
        if ((std::get<0>(k) + 1) * vs > wall_x + 1e-9) break;
        out.free.insert(k);
      }
    }
  }
}

// --- geodesics --------------------------------------------------------------

/// 8-connected Dijkstra over cell centres tested with is_navigable.
inline double grid_geodesic(const SceneSpec & scene, const Vec2 & a, const Vec2 & b, double cell = 0.05)
{
  const Vec2 o = scene.bounds.min.head<2>();
  const int nx = static_cast<int>(std::ceil((scene.bounds.max.x() - o.x()) / cell));
  const int ny = static_cast<int>(std::ceil((scene.bounds.max.y() - o.y()) / cell));
  std::vector<char> ok(static_cast<std::size_t>(nx * ny));
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) ok[static_cast<std::size_t>(y * nx + x)] = is_navigable(scene, o + Vec2(x + 0.5, y + 0.5) * cell);
  auto idx = [&](const Vec2 & p) {
    const int x = std::clamp(static_cast<int>((p.x() - o.x()) / cell), 0, nx - 1);
    const int y = std::clamp(static_cast<int>((p.y() - o.y()) / cell), 0, ny - 1);
    return y * nx + x;
  };
  const int s = idx(a), g = idx(b);
  std::vector<double> dist(ok.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[static_cast<std::size_t>(s)] = 0.0;
  pq.push({0.0, s});
  while (!pq.empty()) {
    auto [dc, c] = pq.top();
    pq.pop();
    if (dc > dist[static_cast<std::size_t>(c)]) continue;
    if (c == g) return dc;
    const int cx = c % nx, cy = c / nx;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (!dx && !dy) continue;
        const int x = cx + dx, y = cy + dy;
        if (x < 0 || y < 0 || x >= nx || y >= ny || !ok[static_cast<std::size_t>(y * nx + x)]) continue;
        if (dx && dy && (!ok[static_cast<std::size_t>(cy * nx + x)] || !ok[static_cast<std::size_t>(y * nx + cx)])) continue;
        const double nd = dc + cell * std::sqrt(double(dx * dx + dy * dy));
        if (nd < dist[static_cast<std::size_t>(y * nx + x)]) {
          dist[static_cast<std::size_t>(y * nx + x)] = nd;
          pq.push({nd, y * nx + x});
        }
      }
    }
  }
  return std::numeric_limits<double>::infinity();
}

/// Observation with every pixel in range at `depth` showing `feature`.
inline Observation flat_observation(const CameraModel & cam, const Embedding & feature, double depth = 2.0,
                                    Pose pose = {Vec3(0, 0, 1.25), 0.0})
{
  Observation o;
  o.width = cam.width;
  o.height = cam.height;
  const std::size_t n = static_cast<std::size_t>(cam.width * cam.height);
  o.depth.assign(n, depth);
  o.oor.assign(n, 0);
  o.features.palette = {feature};
  o.features.index.assign(n, 0);
  o.pose = pose;
  return o;
}

inline Embedding unit(std::size_t dim, std::size_t axis)
{
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  v[static_cast<Eigen::Index>(axis)] = 1.0;
  return Embedding::from_values(v);
}


// --- instructions -----------------------------------------------------------

struct ParseCase
{
  std::string text;
  ParsedInstruction expected;
};

/// Template-generated instructions with their expected parse.
inline std::vector<ParseCase> template_corpus()
{
  const std::vector<std::string> heads = {"bed", "sink", "table", "chair", "sofa", "toilet", "lamp", "cabinet", "desk", "television"};
  const std::vector<std::vector<std::string>> attrs = {{}, {"red"}, {"small", "wooden"}};
  const std::vector<std::vector<std::string>> marks = {{"window"}, {"chest drawer", "painting"}, {"curtain", "pillow", "mirror"}};
  const std::vector<std::string> openers = {"", "the ", "a "};
  const std::vector<std::string> rels = {"near", "next to", "beside", "close to", "by"};
  std::vector<ParseCase> out;
  for (std::size_t i = 0; i < 30; ++i) {
    ParseCase c;
    c.expected.target_head = heads[i % heads.size()];
    c.expected.target_attributes = attrs[i % attrs.size()];
    c.expected.landmarks = marks[(i / 3) % marks.size()];
    std::string t = openers[(i / 2) % openers.size()];
    for (const auto & a : c.expected.target_attributes) t += a + " ";
    t += c.expected.target_head;
    if (i % 4 == 1) t += " located";
    t += " " + rels[i % rels.size()] + " ";
    const auto & lm = c.expected.landmarks;
    for (std::size_t k = 0; k < lm.size(); ++k) {
      if (k > 0) t += (k + 1 == lm.size()) ? (lm.size() > 2 ? ", and " : " and ") : ", ";
      t += (k == 0 && i % 2 == 0 ? "the " : "") + lm[k];
    }
    c.text = t;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace r2f::test

#endif  // R2F_TESTS_SUPPORT_HPP
