#include <chrono>
#include <filesystem>
#include <iostream>
#include <regex>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "divnav/io.hpp"
#include "divnav/remote.hpp"
#include "divnav/util.hpp"

namespace fs = std::filesystem;
using namespace divnav;

namespace {

// Expands a trailing-component glob ("worlds/ep_*.json"); a plain path is
// returned as-is.
std::vector<fs::path> expand_glob(const std::string& pattern) {
  const fs::path p(pattern);
  const std::string name = p.filename().string();
  if (name.find('*') == std::string::npos && name.find('?') == std::string::npos) {
    return {p};
  }
  std::string re_text;
  for (char c : name) {
    if (c == '*') re_text += "[^/]*";
    else if (c == '?') re_text += ".";
    else if (std::string("\\^$.|+()[]{}").find(c) != std::string::npos) re_text += std::string("\\") + c;
    else re_text += c;
  }
  const std::regex re(re_text);
  const fs::path dir = p.parent_path().empty() ? fs::path(".") : p.parent_path();
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && std::regex_match(entry.path().filename().string(), re))
      out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  return out;
}

WorldModel load_world_for(const Episode& episode, const fs::path& episode_path) {
  fs::path world_path(episode.world_ref);
  if (world_path.is_relative()) world_path = episode_path.parent_path() / world_path;
  return load_world(world_path);
}

void write_run_outputs(const fs::path& out_dir, const EpisodeArtifacts& run) {
  fs::create_directories(out_dir);
  write_text_file(out_dir / "result.json", result_to_json(run.result) + "\n");

  // timestamps live outside the deterministic result document
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  nlohmann::json meta;
  meta["finished_unix_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
  write_text_file(out_dir / "run_meta.json", meta.dump(2) + "\n");

  export_map(run.last_s_comb, out_dir / "s_comb.pgm");
  export_mask(run.state.observed, out_dir / "observed.pgm");
  export_mask(run.state.explored, out_dir / "explored.pgm");
  export_mask(run.state.searched, out_dir / "searched.pgm");
  export_mask(run.state.navigable, out_dir / "navigable.pgm");

  std::ostringstream traj;
  traj << "x,y,heading\n";
  for (const auto& pose : run.trajectory)
    traj << pose.x << "," << pose.y << "," << pose.heading << "\n";
  write_text_file(out_dir / "trajectory.csv", traj.str());
}

int cmd_run(const std::string& episode_file, const std::string& config_file,
            const std::string& mode, std::uint64_t seed, const std::string& out_dir) {
  Episode episode = load_episode(episode_file);
  if (mode == "multion") episode.mode = EpisodeMode::MultiOn;
  else if (mode == "realworld") episode.mode = EpisodeMode::RealWorld;
  else if (!mode.empty()) throw LoadError("unknown mode '" + mode + "'");
  const WorldModel world = load_world_for(episode, episode_file);
  PipelineConfig cfg = config_file.empty() ? PipelineConfig{} : load_config(config_file);

  auto run = run_episode_full(world, episode, cfg, seed);
  run.result.config_fingerprint = config_fingerprint(cfg);
  write_run_outputs(out_dir, run);
  std::cout << result_to_json(run.result) << "\n";
  return 0;
}

int cmd_batch(const std::string& glob, const std::string& config_file, int jobs,
              std::uint64_t seed, const std::string& out_dir) {
  const auto files = expand_glob(glob);
  if (files.empty()) throw LoadError("no episode files match '" + glob + "'");
  PipelineConfig cfg = config_file.empty() ? PipelineConfig{} : load_config(config_file);

  std::vector<std::pair<WorldModel, Episode>> episodes;
  for (const auto& f : files) {
    Episode e = load_episode(f);
    WorldModel w = load_world_for(e, f);
    episodes.emplace_back(std::move(w), std::move(e));
  }
  auto results = run_batch(episodes, cfg, seed, jobs);
  const std::string fingerprint = config_fingerprint(cfg);
  for (auto& r : results) r.config_fingerprint = fingerprint;

  fs::create_directories(out_dir);
  for (size_t i = 0; i < results.size(); ++i)
    write_text_file(fs::path(out_dir) / (results[i].episode_id + ".result.json"),
                    result_to_json(results[i]) + "\n");
  const MetricsReport report = aggregate(results);
  write_text_file(fs::path(out_dir) / "report.json", report_to_json(report) + "\n");
  const std::string table = report_to_table(report);
  write_text_file(fs::path(out_dir) / "report.txt", table);
  std::cout << table;
  return 0;
}

int cmd_decompose(const std::string& text, const std::string& lexicon_file, bool remote) {
  const Lexicon lexicon =
      lexicon_file.empty() ? Lexicon::defaults() : load_lexicon(lexicon_file);
  QueryDecomposition d;
  if (remote) {
    d = decompose_remote(text, RemoteConfig::lvlm_from_env(), lexicon);
  } else {
    d = decompose(text, lexicon);
  }
  std::cout << decomposition_to_json(d) << "\n";
  return 0;
}

// Builds a fully observed belief map from a world file (every object
// integrated at full strength, free space at full confidence), then dumps the
// per-query maps plus their fusion.
int cmd_query_map(const std::string& world_file, const std::string& queries_csv, double alpha,
                  int blur_radius, const std::string& out_dir) {
  const WorldModel world = load_world(world_file);
  const SyntheticEmbedder embedder(64, world.affinity);

  FeatureGrid grid(world.spec, embedder.dim());
  std::vector<SemanticHit> hits;
  for (int i = 0; i < world.spec.cells(); ++i) {
    const Cell c = world.spec.cell_of(i);
    if (!world.occupancy.at(c)) hits.push_back({"", c, 1.0});
  }
  for (const auto& obj : world.objects) hits.push_back({obj.label, obj.cell, 1.0});
  integrate_observation(grid, hits, embedder);
  const FeatureGrid blurred = blur_features(grid, blur_radius);

  std::vector<std::string> queries;
  std::stringstream ss(queries_csv);
  std::string q;
  while (std::getline(ss, q, ',')) {
    if (!q.empty()) queries.push_back(q);
  }
  if (queries.empty()) throw LoadError("query-map: no queries given");

  fs::create_directories(out_dir);
  std::vector<SimilarityMap> maps;
  for (size_t i = 0; i < queries.size(); ++i) {
    maps.push_back(query(blurred, embedder.embed_text(queries[i])));
    export_map(maps.back(), fs::path(out_dir) / ("s_" + std::to_string(i) + ".pgm"));
  }
  export_map(intersect(maps), fs::path(out_dir) / "s_int.pgm");
  export_map(combine(maps, FusionConfig{alpha}), fs::path(out_dir) / "s_comb.pgm");
  std::cout << "wrote " << maps.size() << " query maps + s_int + s_comb to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DIV-Nav: spatially-constrained object search on semantic belief maps"};
  app.require_subcommand(1);

  std::string episode_file, config_file, mode, out_dir, glob, text, lexicon_file, world_file,
      queries_csv;
  std::uint64_t seed = 0;
  int jobs = 1, blur_radius = 1;
  double alpha = 0.8;
  bool remote = false;

  auto* run = app.add_subcommand("run", "run one episode");
  run->add_option("--episode", episode_file, "episode JSON file")->required();
  run->add_option("--config", config_file, "config JSON file");
  run->add_option("--mode", mode, "multion|realworld (overrides the episode)");
  run->add_option("--seed", seed, "root RNG seed");
  run->add_option("--out", out_dir, "output directory")->required();

  auto* batch = app.add_subcommand("batch", "run many episodes and aggregate metrics");
  batch->add_option("--episodes", glob, "episode files (glob)")->required();
  batch->add_option("--config", config_file, "config JSON file");
  batch->add_option("--jobs", jobs, "worker threads")->default_val(1);
  batch->add_option("--seed", seed, "root RNG seed");
  batch->add_option("--out", out_dir, "output directory")->required();

  auto* dec = app.add_subcommand("decompose", "decompose a query into targets");
  dec->add_option("--text", text, "natural-language query")->required();
  dec->add_option("--lexicon", lexicon_file, "lexicon JSON file");
  dec->add_flag("--remote", remote, "use the LVLM endpoint (env LVLM_ENDPOINT)");

  auto* qm = app.add_subcommand("query-map", "dump similarity maps for queries over a world");
  qm->add_option("--grid", world_file, "world JSON file (fully observed)")->required();
  qm->add_option("--queries", queries_csv, "comma-separated query list")->required();
  qm->add_option("--alpha", alpha, "fusion weight")->default_val(0.8);
  qm->add_option("--blur", blur_radius, "blur radius in cells")->default_val(1);
  qm->add_option("--out", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(episode_file, config_file, mode, seed, out_dir);
    if (*batch) return cmd_batch(glob, config_file, jobs, seed, out_dir);
    if (*dec) return cmd_decompose(text, lexicon_file, remote);
    if (*qm) return cmd_query_map(world_file, queries_csv, alpha, blur_radius, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
