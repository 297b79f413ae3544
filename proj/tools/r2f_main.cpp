// r2f: scene generation, batch evaluation and map dumps.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "r2f/harness.hpp"
#include "r2f/semantic_rays.hpp"

namespace fs = std::filesystem;
using namespace r2f;

namespace
{

R2fConfig load_config(const std::string & path)
{
  R2fConfig cfg = path.empty() ? R2fConfig{} : R2fConfig::load(path);
  cfg.validate();
  return cfg;
}

std::string scene_name(int index)
{
  std::ostringstream s;
  s << "scene_" << std::setw(3) << std::setfill('0') << index << ".json";
  return s.str();
}

int gen_scenes(std::uint64_t seed, int count, const std::string & difficulty, const std::string & out,
               const std::string & config)
{
  const R2fConfig cfg = load_config(config);
  const Resources res = Resources::load(cfg);
  fs::create_directories(out);
  for (int i = 0; i < count; ++i) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
    SceneSpec scene;
    if (difficulty == "small") {
      scene = generate_scene(s, Difficulty::Small);
    } else if (difficulty == "medium") {
      scene = generate_scene(s, Difficulty::Medium);
    } else if (difficulty == "beacon") {
      scene = generate_beacon_scene(s);
    } else if (difficulty == "decoy") {
      scene = generate_decoy_scene(s, &res.lexicon).scene;
    } else {
      std::cerr << "gen-scenes: unknown difficulty '" << difficulty << "'\n";
      return 2;
    }
    scene.validate();
    const fs::path path = fs::path(out) / scene_name(i);
    scene.save(path.string());
    std::cout << path.string() << '\n';
  }
  return 0;
}

struct RunArgs
{
  std::string scenes;
  std::string mode = "objectnav";
  std::string policy = "r2f";
  int episodes = 0;
  std::uint64_t seed = 0;
  std::string out = "results.jsonl";
  std::string trace_dir;
  int jobs = 1;
  std::string config;
  bool no_verify = false;
};

int run(const RunArgs & a)
{
  const R2fConfig cfg = load_config(a.config);
  if (a.mode != "objectnav" && a.mode != "vln") {
    std::cerr << "run: --mode must be objectnav or vln\n";
    return 2;
  }
  if (a.policy != "r2f" && a.policy != "nearest") {
    std::cerr << "run: --policy must be r2f or nearest\n";
    return 2;
  }

  std::vector<fs::path> files;
  for (const auto & e : fs::directory_iterator(a.scenes)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<EpisodeSpec> specs;
  int load_errors = 0;
  for (const auto & f : files) {
    std::shared_ptr<const SceneSpec> scene;
    try {
      scene = std::make_shared<const SceneSpec>(SceneSpec::load(f.string()));
    } catch (const std::exception & e) {
      std::cerr << f.string() << ": " << e.what() << '\n';
      ++load_errors;
      continue;
    }
    for (auto & s : episodes_from_scene(scene, f.filename().string(), a.seed)) {
      if (s.mode != a.mode) continue;
      s.policy = a.policy == "nearest" ? PolicyKind::NearestFrontier : PolicyKind::R2F;
      s.verify = !a.no_verify;
      specs.push_back(std::move(s));
    }
  }
  if (a.episodes > 0 && static_cast<int>(specs.size()) > a.episodes) specs.resize(static_cast<std::size_t>(a.episodes));
  if (specs.empty()) {
    std::cerr << "run: no " << a.mode << " episodes found in " << a.scenes << '\n';
    return load_errors > 0 ? 1 : 2;
  }

  const bool traces = !a.trace_dir.empty();
  const BatchReport rep = run_batch(specs, cfg, a.jobs, traces);

  std::ofstream out(a.out);
  if (!out) {
    std::cerr << "run: cannot write " << a.out << '\n';
    return 1;
  }
  if (traces) fs::create_directories(a.trace_dir);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    nlohmann::json j;
    if (rep.results[i]) {
      j = rep.results[i]->to_json();
    } else {
      j = {{"id", specs[i].id}, {"error", rep.errors[i]}};
      std::cerr << specs[i].id << ": " << rep.errors[i] << '\n';
    }
    out << j.dump() << '\n';
    if (traces) {
      std::string name = specs[i].id;
      std::replace(name.begin(), name.end(), '#', '_');
      std::ofstream(fs::path(a.trace_dir) / (name + ".trace.jsonl")) << rep.traces[i];
    }
  }

  nlohmann::json summary = rep.summary_json();
  summary["load_errors"] = load_errors;
  summary["mode"] = a.mode;
  summary["policy"] = a.policy;
  std::ofstream(a.out + ".summary.json") << summary.dump(2) << '\n';
  std::cout << summary.dump(2) << '\n';
  return rep.error_count == 0 && load_errors == 0 ? 0 : 1;
}

void write_pgm(const std::string & path, int w, int h, const std::vector<std::uint8_t> & px)
{
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << "P5\n" << w << ' ' << h << "\n255\n";
  // Image row 0 is the largest y.
  for (int r = h - 1; r >= 0; --r) {
    f.write(reinterpret_cast<const char *>(px.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(w)), w);
  }
}

int dump_map(const std::string & trace_path, int step, const std::string & out)
{
  std::ifstream in(trace_path);
  std::string line;
  if (!in || !std::getline(in, line)) {
    std::cerr << "dump-map: cannot read " << trace_path << '\n';
    return 1;
  }
  const TracedEpisode ep = episode_from_trace_header(nlohmann::json::parse(line));
  const Resources res = Resources::load(ep.cfg);

  const SceneSpec & scene = *ep.spec.scene;
  std::optional<Embedding> query;
  if (ep.spec.mode == "objectnav" && scene.registry.contains(ep.spec.text)) {
    query = encode_query(ep.spec.text, {}, scene.registry);
  } else {
    const auto parsed = parse_instruction(ep.spec.text, res.grammar);
    const auto [head, attrs] = resolve_target(parsed, scene.registry);
    query = encode_query(head, attrs, scene.registry);
  }

  bool dumped = false;
  const fs::path base = fs::path(out).replace_extension();
  auto observer = [&](int t, const Observation & obs, const WorldModel & world, const PolicyState &) {
    if (t < step) return true;
    const double vs = world.grid.config().voxel_size;
    const auto bounds = world.grid.allocated_bounds();
    if (!bounds) throw Error("dump-map: empty map");
    const double layer = std::floor(obs.pose.position.z() / vs);
    const Aabb slice(Vec3(bounds->first.x() * vs, bounds->first.y() * vs, layer * vs),
                     Vec3(bounds->second.x() * vs, bounds->second.y() * vs, (layer + 1.0) * vs));
    const ClassSnapshot snap = world.grid.snapshot_region(slice);
    const int w = snap.dims.x();
    const int h = snap.dims.y();
    std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 128);
    for (int iy = 0; iy < h; ++iy) {
      for (int ix = 0; ix < w; ++ix) {
        const CellClass c = snap.at(snap.origin + Vec3i(ix, iy, 0));
        px[static_cast<std::size_t>(iy * w + ix)] = c == CellClass::Free ? 255 : c == CellClass::Occupied ? 0 : 128;
      }
    }
    std::ofstream regions(base.string() + "_regions.csv");
    regions << "id,x,y,z,voxels,best_bin,best_score,invalidated\n";
    for (const auto & r : world.regions) {
      const int cx = static_cast<int>(std::floor(r.centroid.x() / vs)) - snap.origin.x();
      const int cy = static_cast<int>(std::floor(r.centroid.y() / vs)) - snap.origin.y();
      for (int d = -2; d <= 2; ++d) {
        for (const auto & [dx, dy] : {std::pair{d, 0}, std::pair{0, d}}) {
          if (cx + dx >= 0 && cx + dx < w && cy + dy >= 0 && cy + dy < h) px[static_cast<std::size_t>((cy + dy) * w + cx + dx)] = 64;
        }
      }
      std::optional<int> best_bin;
      double best = 0.0;
      for (const auto & [bin, acc] : r.bins) {
        const auto f = bin_feature(r, BinIndex::from_flat(bin));
        if (!f) continue;
        const double s = cosine(*f, *query);
        if (!best_bin || s > best) {
          best_bin = bin;
          best = s;
        }
      }
      regions << r.id << ',' << r.centroid.x() << ',' << r.centroid.y() << ',' << r.centroid.z() << ','
              << r.voxels.size() << ',' << (best_bin ? std::to_string(*best_bin) : "") << ','
              << (best_bin ? std::to_string(best) : "") << ',' << (r.invalidated ? 1 : 0) << '\n';
    }
    write_pgm(out, w, h, px);

    std::ofstream voxels(base.string() + "_voxels.csv");
    voxels << "x,y,z,log_odds\n";
    voxels << std::setprecision(9);
    for (const auto & v : world.grid.nonzero_voxels()) {
      const Vec3 c = world.grid.center_of(v.index);
      voxels << c.x() << ',' << c.y() << ',' << c.z() << ',' << v.log_odds << '\n';
    }
    dumped = true;
    return false;
  };
  run_episode(ep.spec, ep.cfg, res, nullptr, observer);
  if (!dumped) {
    std::cerr << "dump-map: episode ended before step " << step << '\n';
    return 1;
  }
  std::cout << out << '\n' << base.string() << "_voxels.csv\n" << base.string() << "_regions.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Ray-frontier semantic exploration: scenes, episodes, map dumps"};
  app.require_subcommand(1);

  std::uint64_t gen_seed = 0;
  int gen_count = 10;
  std::string gen_difficulty = "medium";
  std::string gen_out = "scenes";
  std::string gen_config;
  auto * gen = app.add_subcommand("gen-scenes", "Generate seeded scene files");
  gen->add_option("--seed", gen_seed, "First scene seed");
  gen->add_option("--count", gen_count, "Number of scenes")->check(CLI::PositiveNumber);
  gen->add_option("--difficulty", gen_difficulty, "small | medium | beacon | decoy");
  gen->add_option("--out", gen_out, "Output directory");
  gen->add_option("--config", gen_config, "Config JSON (lexicon path for decoy scenes)");

  RunArgs ra;
  auto * runc = app.add_subcommand("run", "Run episodes over a scene directory");
  runc->add_option("--scenes", ra.scenes, "Directory of scene JSON files")->required();
  runc->add_option("--mode", ra.mode, "objectnav | vln");
  runc->add_option("--policy", ra.policy, "r2f | nearest");
  runc->add_option("--episodes", ra.episodes, "Episode cap (0 = all)");
  runc->add_option("--seed", ra.seed, "Episode seed");
  runc->add_option("--out", ra.out, "Results JSONL");
  runc->add_option("--trace", ra.trace_dir, "Write per-episode JSONL traces to this directory");
  runc->add_option("--jobs", ra.jobs, "Worker threads")->check(CLI::PositiveNumber);
  runc->add_option("--config", ra.config, "Config JSON");
  runc->add_flag("--no-verify", ra.no_verify, "VLN: skip landmark verification");

  std::string dm_trace;
  int dm_step = 0;
  std::string dm_out = "map.pgm";
  auto * dm = app.add_subcommand("dump-map", "Replay a trace and dump the map at a step");
  dm->add_option("--trace", dm_trace, "Trace JSONL")->required();
  dm->add_option("--step", dm_step, "Step index")->check(CLI::NonNegativeNumber);
  dm->add_option("--out", dm_out, "PGM output path");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) return gen_scenes(gen_seed, gen_count, gen_difficulty, gen_out, gen_config);
    if (*runc) return run(ra);
    if (*dm) return dump_map(dm_trace, dm_step, dm_out);
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
