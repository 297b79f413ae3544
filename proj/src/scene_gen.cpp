#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "r2f/sim_world.hpp"
#include "r2f/vln.hpp"

namespace r2f
{

namespace
{

constexpr double kCeiling = 2.6;
constexpr double kWallThickness = 0.1;
constexpr double kDoorWidth = 1.0;

struct ObjectTemplate
{
  const char * name;
  double sx, sy, sz;
};

// Footprint (x, y) and height in metres.
constexpr std::array<ObjectTemplate, 18> kCatalogue = {{
  {"chair", 0.5, 0.5, 0.9},       {"bed", 2.0, 1.5, 0.6},        {"sofa", 1.9, 0.9, 0.8},
  {"table", 1.2, 0.8, 0.75},      {"toilet", 0.5, 0.7, 0.8},     {"tv", 1.0, 0.3, 1.1},
  {"plant", 0.4, 0.4, 1.2},       {"sink", 0.6, 0.5, 0.9},       {"bathtub", 1.6, 0.8, 0.6},
  {"dresser", 1.0, 0.5, 1.0},     {"lamp", 0.3, 0.3, 1.5},       {"bookshelf", 1.0, 0.4, 1.8},
  {"refrigerator", 0.8, 0.7, 1.8}, {"piano", 1.5, 0.6, 1.1},     {"wardrobe", 1.2, 0.6, 2.0},
  {"desk", 1.2, 0.6, 0.75},       {"oven", 0.6, 0.6, 0.9},       {"armchair", 0.8, 0.8, 0.9},
}};

// Large, tall objects that read well down a corridor.
constexpr std::array<ObjectTemplate, 6> kBeaconTargets = {{
  {"refrigerator", 0.8, 1.0, 1.9}, {"wardrobe", 0.7, 1.2, 2.0}, {"bookshelf", 0.5, 1.2, 1.9},
  {"piano", 0.7, 1.2, 1.3},        {"bed", 1.2, 1.2, 0.9},      {"sofa", 0.9, 1.2, 1.0},
}};

// Compact objects for the two-instance scenes; suppression radius is 1 m.
constexpr std::array<ObjectTemplate, 6> kDecoyTargets = {{
  {"armchair", 0.7, 0.7, 0.9}, {"plant", 0.5, 0.5, 1.2}, {"lamp", 0.4, 0.4, 1.5},
  {"sink", 0.6, 0.5, 0.9},     {"oven", 0.6, 0.6, 0.9},  {"toilet", 0.5, 0.6, 0.8},
}};

struct LandmarkTemplate
{
  const char * name;
  double sx, sy, sz;
};

constexpr std::array<LandmarkTemplate, 6> kLandmarks = {{
  {"chest drawer", 0.8, 0.5, 1.0}, {"painting", 0.9, 0.1, 1.8}, {"curtain", 1.0, 0.15, 2.2},
  {"pillow", 0.5, 0.4, 0.7},        {"mirror", 0.7, 0.1, 1.9},  {"nightstand", 0.5, 0.5, 0.6},
}};

constexpr std::array<const char *, 5> kAttributes = {"king size", "round dark wooden",
                                                      "small white", "large", "old"};

Aabb box2(double x0, double y0, double x1, double y1, double z1 = kCeiling)
{
  return {Vec3(std::min(x0, x1), std::min(y0, y1), 0.0),
          Vec3(std::max(x0, x1), std::max(y0, y1), z1)};
}

void add_surface_concepts(ConceptRegistry & reg)
{
  for (const char * c : {kWallConcept, kFloorConcept, kCeilingConcept, kVoidConcept}) {
    reg.add(c);
  }
}

void add_perimeter(SceneSpec & s)
{
  const double w = s.bounds.max.x();
  const double h = s.bounds.max.y();
  const double t = kWallThickness;
  s.walls.push_back(box2(0, 0, w, t));
  s.walls.push_back(box2(0, h - t, w, h));
  s.walls.push_back(box2(0, 0, t, h));
  s.walls.push_back(box2(w - t, 0, w, h));
}

struct Room
{
  double x0, y0, x1, y1;
};

// --- union-find over room indices -------------------------------------------
struct Dsu
{
  std::vector<int> parent;
  explicit Dsu(int n) : parent(static_cast<std::size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a)
  {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  }
  bool unite(int a, int b)
  {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[static_cast<std::size_t>(b)] = a;
    return true;
  }
};

// Wall along x = const (vertical=true) or y = const, from a to b, with an
// optional door centred at door_c.
void add_wall_segment(SceneSpec & s, bool vertical, double fixed, double a, double b,
                      std::optional<double> door_c)
{
  const double t = 0.5 * kWallThickness;
  auto emit = [&](double lo, double hi) {
    if (hi - lo < 1e-6) return;
    s.walls.push_back(vertical ? box2(fixed - t, lo, fixed + t, hi) : box2(lo, fixed - t, hi, fixed + t));
  };
  if (door_c) {
    emit(a, *door_c - 0.5 * kDoorWidth);
    emit(*door_c + 0.5 * kDoorWidth, b);
  } else {
    emit(a, b);
  }
}

bool object_fits(const SceneSpec & s, const Rect2 & r, const std::vector<Vec2> & doors,
                 double gap)
{
  for (const auto & d : doors) {
    if (point_rect_distance(d, r) < 1.1) return false;
  }
  for (const auto & o : s.objects) {
    const Rect2 f = Rect2::footprint(o.box);
    const bool separated = r.max.x() + gap <= f.min.x() || f.max.x() + gap <= r.min.x() ||
                           r.max.y() + gap <= f.min.y() || f.max.y() + gap <= r.min.y();
    if (!separated) return false;
  }
  return true;
}

// Re-draws the registry seed until every listed concept pair stays below its
// cosine bound. Returns the first seed that satisfies the constraint.
template <typename Check>
ConceptRegistry separated_registry(std::uint64_t seed, const std::vector<std::string> & names,
                                   Check && ok)
{
  for (std::uint64_t attempt = 0; attempt < 4096; ++attempt) {
    ConceptRegistry reg(ConceptRegistry::kDefaultDimension, derive_seed(seed, attempt, 0x5e9));
    add_surface_concepts(reg);
    for (const auto & n : names) {
      reg.add(n);
    }
    if (ok(reg)) {
      return reg;
    }
  }
  throw Error("scene generation: could not find a semantically separated registry");
}

}  // namespace

SceneSpec generate_scene(std::uint64_t seed, Difficulty difficulty)
{
  std::mt19937_64 rng(mix64(seed ^ (difficulty == Difficulty::Small ? 0x5a11ULL : 0x3ed1ULL)));
  auto uniform = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto pick = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };

  const bool small = difficulty == Difficulty::Small;
  static constexpr std::array<std::array<int, 2>, 5> kSmallGrids = {{{2, 1}, {1, 2}, {2, 2}, {3, 1}, {1, 3}}};
  static constexpr std::array<std::array<int, 2>, 5> kMediumGrids = {{{3, 2}, {2, 3}, {4, 2}, {2, 4}, {3, 3}}};
  const auto grid = small ? kSmallGrids[static_cast<std::size_t>(pick(0, 4))]
                          : kMediumGrids[static_cast<std::size_t>(pick(0, 4))];
  const int nx = grid[0];
  const int ny = grid[1];
  const double lo = small ? 3.0 : 3.5;
  const double hi = small ? 4.0 : 5.0;

  std::vector<double> xs{0.0}, ys{0.0};
  for (int i = 0; i < nx; ++i) xs.push_back(xs.back() + uniform(lo, hi));
  for (int j = 0; j < ny; ++j) ys.push_back(ys.back() + uniform(lo, hi));

  SceneSpec s;
  s.seed = seed;
  s.bounds = Aabb(Vec3(0, 0, 0), Vec3(xs.back(), ys.back(), kCeiling));
  s.registry = ConceptRegistry(ConceptRegistry::kDefaultDimension, seed);
  add_surface_concepts(s.registry);
  add_perimeter(s);

  // Room adjacency edges: (cell a, cell b, vertical wall?, i, j).
  struct Edge { int a, b; bool vertical; int i, j; };
  std::vector<Edge> edges;
  auto cell = [&](int i, int j) { return j * nx + i; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) edges.push_back({cell(i, j), cell(i + 1, j), true, i, j});
  }
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i < nx; ++i) edges.push_back({cell(i, j), cell(i, j + 1), false, i, j});
  }
  std::shuffle(edges.begin(), edges.end(), rng);

  // Merge adjacent cells until the room count lands in range.
  const int cells = nx * ny;
  const int max_rooms = small ? 4 : 8;
  const int min_rooms = small ? 2 : 5;
  int target_rooms = std::clamp(cells - pick(0, 1), min_rooms, max_rooms);
  Dsu rooms(cells);
  std::set<std::size_t> open_edges;  // edge index -> whole wall removed
  int room_count = cells;
  for (std::size_t e = 0; e < edges.size() && room_count > target_rooms; ++e) {
    if (rooms.unite(edges[e].a, edges[e].b)) {
      open_edges.insert(e);
      --room_count;
    }
  }
  // Spanning tree of doors over the merged rooms, plus a few extra doors.
  Dsu connected = rooms;
  std::vector<std::optional<double>> door(edges.size());
  std::vector<Vec2> door_points;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (open_edges.count(e)) continue;
    const bool needed = connected.unite(edges[e].a, edges[e].b);
    if (!needed && uniform(0, 1) > 0.25) continue;
    const auto & ed = edges[e];
    const double a = ed.vertical ? ys[static_cast<std::size_t>(ed.j)] : xs[static_cast<std::size_t>(ed.i)];
    const double b = ed.vertical ? ys[static_cast<std::size_t>(ed.j + 1)] : xs[static_cast<std::size_t>(ed.i + 1)];
    const double c = uniform(a + 0.9, b - 0.9);
    door[e] = c;
    const double fixed = ed.vertical ? xs[static_cast<std::size_t>(ed.i + 1)] : ys[static_cast<std::size_t>(ed.j + 1)];
    door_points.push_back(ed.vertical ? Vec2(fixed, c) : Vec2(c, fixed));
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (open_edges.count(e)) continue;
    const auto & ed = edges[e];
    if (ed.vertical) {
      add_wall_segment(s, true, xs[static_cast<std::size_t>(ed.i + 1)], ys[static_cast<std::size_t>(ed.j)],
                       ys[static_cast<std::size_t>(ed.j + 1)], door[e]);
    } else {
      add_wall_segment(s, false, ys[static_cast<std::size_t>(ed.j + 1)], xs[static_cast<std::size_t>(ed.i)],
                       xs[static_cast<std::size_t>(ed.i + 1)], door[e]);
    }
  }

  // Objects, each placed against a wall of a random cell or free-standing.
  const int n_objects = pick(5, 15);
  int instance = 0;
  for (int attempt = 0; attempt < 400 && static_cast<int>(s.objects.size()) < n_objects; ++attempt) {
    const auto & t = kCatalogue[static_cast<std::size_t>(pick(0, static_cast<int>(kCatalogue.size()) - 1))];
    double sx = t.sx, sy = t.sy;
    if (pick(0, 1)) std::swap(sx, sy);
    const int ci = pick(0, nx - 1);
    const int cj = pick(0, ny - 1);
    const double m = 0.5 * kWallThickness + 0.05;
    const double x0 = xs[static_cast<std::size_t>(ci)] + m, x1 = xs[static_cast<std::size_t>(ci + 1)] - m;
    const double y0 = ys[static_cast<std::size_t>(cj)] + m, y1 = ys[static_cast<std::size_t>(cj + 1)] - m;
    if (x1 - x0 < sx + 1.0 || y1 - y0 < sy + 1.0) continue;
    double cx = uniform(x0 + 0.5 * sx, x1 - 0.5 * sx);
    double cy = uniform(y0 + 0.5 * sy, y1 - 0.5 * sy);
    switch (pick(0, 4)) {
      case 0: cx = x0 + 0.5 * sx; break;
      case 1: cx = x1 - 0.5 * sx; break;
      case 2: cy = y0 + 0.5 * sy; break;
      case 3: cy = y1 - 0.5 * sy; break;
      default: break;  // free-standing
    }
    const Rect2 r{{cx - 0.5 * sx, cy - 0.5 * sy}, {cx + 0.5 * sx, cy + 0.5 * sy}};
    if (!object_fits(s, r, door_points, 0.7)) continue;
    s.objects.push_back({t.name, Aabb(Vec3(r.min.x(), r.min.y(), 0.0), Vec3(r.max.x(), r.max.y(), t.sz)), instance});
    // Keep free space connected; drop the object otherwise.
    if (GeodesicOracle(s).component_count() != 1) {
      s.objects.pop_back();
      continue;
    }
    ++instance;
  }

  GeodesicOracle oracle(s);
  std::vector<SceneObject> kept;
  for (const auto & o : s.objects) {
    const auto goal = oracle.nearest_navigable(o.box.center().head<2>(), 2.0);
    if (!goal) continue;
    s.registry.add(o.concept_name);
    s.goal_sets[o.concept_name].push_back(Vec3(goal->x(), goal->y(), s.floor_height));
    kept.push_back(o);
  }
  s.objects = std::move(kept);

  // A few suggested episodes with random spawns.
  std::vector<std::string> queries;
  for (const auto & [q, pts] : s.goal_sets) queries.push_back(q);
  for (int e = 0; e < 3 && !queries.empty();) {
    const Vec2 p(uniform(0.5, xs.back() - 0.5), uniform(0.5, ys.back() - 0.5));
    if (!is_navigable(s, p)) continue;
    s.episodes.push_back({p, std::round(uniform(-180, 180) / 15.0) * 15.0, "objectnav",
                          queries[static_cast<std::size_t>(pick(0, static_cast<int>(queries.size()) - 1))]});
    ++e;
  }
  return s;
}

namespace
{

// Hub-and-spoke skeleton shared by the beacon and decoy layouts. Branch k
// points along direction k * 90 degrees (0 = +x). Returns the corridor half
// widths for reference.
struct Spokes
{
  static constexpr double kCenter = 10.0;
  static constexpr double kHubHalf = 2.0;
  static constexpr double kCorridorEnd = 6.0;  // distance from centre where the end room starts
  static constexpr double kRoomHalf = 2.0;
  static constexpr double kExtent = 10.0;
  std::array<double, 4> half_width{};
};

Vec2 branch_axis(int k)
{
  static constexpr std::array<std::array<double, 2>, 4> kAxes = {{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};
  return {kAxes[static_cast<std::size_t>(k)][0], kAxes[static_cast<std::size_t>(k)][1]};
}

// Local (along, across) coordinates relative to the hub centre -> world.
Vec2 branch_point(int k, double along, double across)
{
  const Vec2 a = branch_axis(k);
  const Vec2 n(-a.y(), a.x());
  return Vec2(Spokes::kCenter, Spokes::kCenter) + along * a + across * n;
}

Aabb branch_box(int k, double along0, double along1, double across0, double across1, double z1)
{
  const Vec2 p = branch_point(k, along0, across0);
  const Vec2 q = branch_point(k, along1, across1);
  return box2(p.x(), p.y(), q.x(), q.y(), z1);
}

void build_spokes(SceneSpec & s, const Spokes & sp)
{
  const double c = Spokes::kCenter;
  const double e = Spokes::kExtent;
  s.bounds = Aabb(Vec3(c - e, c - e, 0.0), Vec3(c + e, c + e, kCeiling));
  add_perimeter(s);
  const double h = Spokes::kHubHalf;
  // Solid corner blocks.
  for (int sxn : {-1, 1}) {
    for (int syn : {-1, 1}) {
      s.walls.push_back(box2(c + sxn * h, c + syn * h, c + sxn * e, c + syn * e));
    }
  }
  // Corridor side blocks between the hub and each end room.
  for (int k = 0; k < 4; ++k) {
    const double w = sp.half_width[static_cast<std::size_t>(k)];
    s.walls.push_back(branch_box(k, h, Spokes::kCorridorEnd, w, Spokes::kRoomHalf, kCeiling));
    s.walls.push_back(branch_box(k, h, Spokes::kCorridorEnd, -Spokes::kRoomHalf, -w, kCeiling));
  }
}

Aabb object_at(int k, double along_far, double depth, double across_c, double width, double height)
{
  return branch_box(k, along_far - depth, along_far, across_c - 0.5 * width, across_c + 0.5 * width,
                    height);
}

}  // namespace

SceneSpec generate_beacon_scene(std::uint64_t seed)
{
  std::mt19937_64 rng(mix64(seed ^ 0xbea0ULL));
  auto uniform = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto pick = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };

  SceneSpec s;
  s.seed = seed;
  Spokes sp;
  for (auto & w : sp.half_width) w = uniform(0.7, 0.9);
  build_spokes(s, sp);

  const int target_branch = pick(0, 3);
  const auto & target = kBeaconTargets[static_cast<std::size_t>(pick(0, static_cast<int>(kBeaconTargets.size()) - 1))];
  const double far = Spokes::kExtent - kWallThickness - 0.05;
  s.objects.push_back({target.name, object_at(target_branch, far, target.sx, 0.0, target.sy, target.sz), 0});

  // Distractors: one or two per other branch end room, one in a hub corner.
  std::vector<std::string> names{target.name};
  int instance = 1;
  for (int k = 0; k < 4; ++k) {
    if (k == target_branch) continue;
    const int count = pick(1, 2);
    for (int i = 0; i < count; ++i) {
      const ObjectTemplate * t = nullptr;
      while (t == nullptr || t->name == std::string(target.name)) {
        t = &kCatalogue[static_cast<std::size_t>(pick(0, static_cast<int>(kCatalogue.size()) - 1))];
      }
      const double sx = std::min(t->sx, 1.0);
      const double sy = std::min(t->sy, 1.0);
      const double across = i == 0 ? uniform(-0.3, 0.3) : (pick(0, 1) ? 1.3 : -1.3);
      s.objects.push_back({t->name, object_at(k, far, sy, across, sx, t->sz), instance++});
      names.push_back(t->name);
    }
  }
  {
    const ObjectTemplate * t = nullptr;
    while (t == nullptr || t->name == std::string(target.name) || t->sx > 0.8 || t->sy > 0.8) {
      t = &kCatalogue[static_cast<std::size_t>(pick(0, static_cast<int>(kCatalogue.size()) - 1))];
    }
    const double cx = Spokes::kCenter + (pick(0, 1) ? 1 : -1) * (Spokes::kHubHalf - 0.05 - 0.5 * t->sx);
    const double cy = Spokes::kCenter + (pick(0, 1) ? 1 : -1) * (Spokes::kHubHalf - 0.05 - 0.5 * t->sy);
    s.objects.push_back({t->name, box2(cx - 0.5 * t->sx, cy - 0.5 * t->sy, cx + 0.5 * t->sx, cy + 0.5 * t->sy, t->sz), instance++});
    names.push_back(t->name);
  }

  // The target must be the only semantically query-like content: every other
  // concept stays at cosine <= 0.05 to the query.
  const std::string target_name = target.name;
  s.registry = separated_registry(seed, names, [&](const ConceptRegistry & reg) {
    const Embedding q = encode_query(target_name, {}, reg);
    for (const auto & n : reg.names()) {
      if (n != target_name && cosine(reg.visual(n), q) > 0.05) return false;
    }
    return true;
  });

  GeodesicOracle oracle(s);
  for (const auto & o : s.objects) {
    if (auto g = oracle.nearest_navigable(o.box.center().head<2>(), 2.0)) {
      s.goal_sets[o.concept_name].push_back(Vec3(g->x(), g->y(), s.floor_height));
    }
  }

  for (int e = 0; e < 8 && s.episodes.empty(); ++e) {
    const Vec2 p(Spokes::kCenter + uniform(-1.3, 1.3), Spokes::kCenter + uniform(-1.3, 1.3));
    if (!is_navigable(s, p)) continue;
    s.episodes.push_back({p, std::round(uniform(-180, 180) / 15.0) * 15.0, "objectnav", target.name});
  }
  return s;
}

DecoyScene generate_decoy_scene(std::uint64_t seed, const SynonymLexicon * lexicon)
{
  std::mt19937_64 rng(mix64(seed ^ 0xdec0ULL));
  auto uniform = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto pick = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };

  DecoyScene out;
  SceneSpec & s = out.scene;
  s.seed = seed;
  Spokes sp;
  for (auto & w : sp.half_width) w = uniform(0.7, 0.9);
  build_spokes(s, sp);

  const int decoy_branch = pick(0, 3);
  const int true_branch = (decoy_branch + (pick(0, 1) ? 1 : 3)) % 4;
  const auto & target = kDecoyTargets[static_cast<std::size_t>(pick(0, static_cast<int>(kDecoyTargets.size()) - 1))];
  const double far = Spokes::kExtent - kWallThickness - 0.05;

  // Decoy on the corridor axis, visible from the hub.
  s.objects.push_back({target.name, object_at(decoy_branch, far, target.sx, 0.0, target.sy, target.sz), 0});
  // True instance in a corner of its end room, off the corridor axis.
  const double side = pick(0, 1) ? 1.0 : -1.0;
  const double across_t = side * (Spokes::kRoomHalf - 0.1 - 0.5 * target.sy);
  s.objects.push_back({target.name, object_at(true_branch, far, target.sx, across_t, target.sy, target.sz), 1});

  // Two landmarks around the true instance: one beside it against the far
  // wall, one on the side wall next to it.
  std::vector<int> lm_idx(kLandmarks.size());
  std::iota(lm_idx.begin(), lm_idx.end(), 0);
  std::shuffle(lm_idx.begin(), lm_idx.end(), rng);
  const auto & l1 = kLandmarks[static_cast<std::size_t>(lm_idx[0])];
  const auto & l2 = kLandmarks[static_cast<std::size_t>(lm_idx[1])];
  const double across_l1 = across_t - side * (0.5 * target.sy + 0.25 + 0.5 * l1.sx);
  s.objects.push_back({l1.name, object_at(true_branch, far, l1.sy, across_l1, l1.sx, l1.sz), 2});
  {
    const double wall_across = side * (Spokes::kRoomHalf - 0.05);
    const double along_c = far - target.sx - 0.35 - 0.5 * l2.sx;
    const Vec2 p = branch_point(true_branch, along_c - 0.5 * l2.sx, wall_across - side * l2.sy);
    const Vec2 q = branch_point(true_branch, along_c + 0.5 * l2.sx, wall_across);
    s.objects.push_back({l2.name, box2(p.x(), p.y(), q.x(), q.y(), l2.sz), 3});
  }

  // Unrelated furniture in the remaining branches.
  std::vector<std::string> names{target.name, l1.name, l2.name};
  int instance = 4;
  for (int k = 0; k < 4; ++k) {
    if (k == decoy_branch || k == true_branch) continue;
    const ObjectTemplate * t = nullptr;
    while (t == nullptr || t->name == std::string(target.name)) {
      t = &kCatalogue[static_cast<std::size_t>(pick(0, static_cast<int>(kCatalogue.size()) - 1))];
    }
    s.objects.push_back({t->name, object_at(k, far, std::min(t->sy, 1.0), uniform(-0.3, 0.3), std::min(t->sx, 1.0), t->sz), instance++});
    names.push_back(t->name);
  }

  const std::string attrs = kAttributes[static_cast<std::size_t>(pick(0, static_cast<int>(kAttributes.size()) - 1))];
  out.instruction = attrs + " " + target.name + " located near the " + l1.name + " and " + l2.name;

  // Separation: only the target reads as the query, and only the two
  // landmarks read as landmarks (their text embeddings and lexicon variants
  // vs. every other concept's visual embedding stay below 0.08).
  const std::string target_name = target.name;
  const std::vector<std::string> landmark_names{l1.name, l2.name};
  const SynonymLexicon no_lexicon;
  const ParsedInstruction parsed{target_name, {}, landmark_names};
  s.registry = separated_registry(seed, names, [&](const ConceptRegistry & reg) {
    const Embedding q = reg.embed_phrase(target_name);
    const LandmarkSet lms = expand_landmarks(parsed, lexicon ? *lexicon : no_lexicon, reg, VlnConfig{});
    for (const auto & n : reg.names()) {
      const Embedding & v = reg.visual(n);
      if (n != target_name && cosine(v, q) > 0.05) return false;
      for (std::size_t i = 0; i < lms.entries.size(); ++i) {
        if (n == landmark_names[i]) continue;
        for (const auto & [variant, e] : lms.entries[i].embeddings) {
          if (cosine(v, e) > 0.08) return false;
        }
      }
    }
    return true;
  });

  GeodesicOracle oracle(s);
  auto goal_of = [&](const SceneObject & o) {
    auto g = oracle.nearest_navigable(o.box.center().head<2>(), 2.0);
    if (!g) throw Error("decoy scene: object without a navigable goal point");
    return Vec3(g->x(), g->y(), s.floor_height);
  };
  out.decoy_goal = goal_of(s.objects[0]);
  out.true_goal = goal_of(s.objects[1]);
  s.goal_sets[out.instruction] = {out.true_goal};
  s.goal_sets["decoy"] = {out.decoy_goal};

  // Spawn in the hub facing the decoy branch.
  const double yaw = 90.0 * decoy_branch + 15.0 * pick(-2, 2);
  for (int e = 0; e < 16 && s.episodes.empty(); ++e) {
    const Vec2 p = branch_point(decoy_branch, uniform(-1.2, 0.0), uniform(-1.0, 1.0));
    if (!is_navigable(s, p)) continue;
    s.episodes.push_back({p, wrap_degrees(yaw), "vln", out.instruction});
  }
  return out;
}

}  // namespace r2f
