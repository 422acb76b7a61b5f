#include "divnav/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "divnav/util.hpp"

namespace divnav {

using nlohmann::json;

namespace {

json spec_to_json(const GridSpec& s) {
  return json{{"resolution", s.resolution},
              {"width", s.width},
              {"height", s.height},
              {"origin", {s.origin_x, s.origin_y}}};
}

GridSpec spec_from_json(const json& j) {
  GridSpec s;
  s.resolution = j.at("resolution").get<double>();
  s.width = j.at("width").get<int>();
  s.height = j.at("height").get<int>();
  if (j.contains("origin")) {
    s.origin_x = j.at("origin").at(0).get<double>();
    s.origin_y = j.at("origin").at(1).get<double>();
  }
  s.validate();
  return s;
}

Cell cell_from_json(const json& j) {
  return Cell{j.at(0).get<int>(), j.at(1).get<int>()};
}

[[noreturn]] void fail(const std::string& what) { throw LoadError(what); }

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write '" + path.string() + "'");
  out << content;
  if (!out) fail("write failed for '" + path.string() + "'");
}

// --- world ---

WorldModel parse_world(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  WorldModel w;
  w.spec = spec_from_json(j.at("spec"));
  w.occupancy = Mask(w.spec, 0);
  if (j.contains("walls")) {
    const auto& walls = j.at("walls");
    if (!walls.empty() && walls.front().is_string()) {
      // row strings: '#' = wall, anything else free; row 0 first
      if (static_cast<int>(walls.size()) != w.spec.height)
        fail("world: wall row count does not match grid height");
      for (int row = 0; row < w.spec.height; ++row) {
        const std::string line = walls.at(static_cast<size_t>(row)).get<std::string>();
        if (static_cast<int>(line.size()) != w.spec.width)
          fail("world: wall row length does not match grid width");
        for (int col = 0; col < w.spec.width; ++col)
          if (line[static_cast<size_t>(col)] == '#') w.occupancy.at({col, row}) = 1;
      }
    } else {
      for (const auto& cell : walls) {
        const Cell c = cell_from_json(cell);
        if (!w.spec.contains(c)) fail("world: wall cell out of bounds");
        w.occupancy.at(c) = 1;
      }
    }
  }
  for (const auto& room : j.value("rooms", json::array())) {
    RoomRegion r;
    r.label = room.at("label").get<std::string>();
    const auto& rect = room.at("rect");
    r.col = rect.at(0).get<int>();
    r.row = rect.at(1).get<int>();
    r.width = rect.at(2).get<int>();
    r.height = rect.at(3).get<int>();
    w.rooms.push_back(std::move(r));
  }
  for (const auto& obj : j.value("objects", json::array())) {
    ObjectInstance o;
    o.id = obj.at("id").get<std::string>();
    o.label = obj.at("label").get<std::string>();
    o.cell = cell_from_json(obj.at("cell"));
    for (const auto& rel : obj.value("relations", json::array())) {
      const std::string kind_s = rel.at("kind").get<std::string>();
      const auto kind = relation_kind_from_string(kind_s);
      if (!kind) fail("world: unknown relation kind '" + kind_s + "'");
      o.relations.push_back({*kind, rel.at("target").get<std::string>()});
    }
    w.objects.push_back(std::move(o));
  }
  if (j.contains("affinity")) {
    std::vector<std::string> labels;
    for (const auto& [label, row] : j.at("affinity").items()) labels.push_back(label);
    w.affinity = AffinityMatrix::identity(labels);
    for (const auto& [a, row] : j.at("affinity").items())
      for (const auto& [b, v] : row.items()) {
        const int ia = w.affinity.index_of(a);
        const int ib = w.affinity.index_of(b);
        if (ib < 0) fail("world: affinity row '" + a + "' references unknown label '" + b + "'");
        w.affinity.values(ia, ib) = v.get<double>();
      }
  } else {
    std::vector<std::string> labels;
    for (const auto& o : w.objects)
      if (std::find(labels.begin(), labels.end(), o.label) == labels.end())
        labels.push_back(o.label);
    w.affinity = AffinityMatrix::identity(labels);
  }
  w.near_distance_m = j.value("near_distance_m", w.near_distance_m);
  w.validate();
  return w;
  } catch (const json::exception& e) {
    fail(std::string("world JSON error: ") + e.what());
  }
}

WorldModel load_world(const std::filesystem::path& path) {
  try {
    return parse_world(read_text_file(path));
  } catch (const LoadError& e) {
    fail(path.string() + ": " + e.what());
  }
}

std::string world_to_json(const WorldModel& w) {
  json j;
  j["spec"] = spec_to_json(w.spec);
  json walls = json::array();
  for (int row = 0; row < w.spec.height; ++row) {
    std::string line(static_cast<size_t>(w.spec.width), '.');
    for (int col = 0; col < w.spec.width; ++col)
      if (w.occupancy.at({col, row})) line[static_cast<size_t>(col)] = '#';
    walls.push_back(line);
  }
  j["walls"] = walls;
  j["rooms"] = json::array();
  for (const auto& r : w.rooms)
    j["rooms"].push_back({{"label", r.label}, {"rect", {r.col, r.row, r.width, r.height}}});
  j["objects"] = json::array();
  for (const auto& o : w.objects) {
    json rels = json::array();
    for (const auto& rel : o.relations)
      rels.push_back({{"kind", to_string(rel.kind)}, {"target", rel.target}});
    j["objects"].push_back(
        {{"id", o.id}, {"label", o.label}, {"cell", {o.cell.col, o.cell.row}}, {"relations", rels}});
  }
  json aff = json::object();
  for (size_t a = 0; a < w.affinity.labels.size(); ++a) {
    json row = json::object();
    for (size_t b = 0; b < w.affinity.labels.size(); ++b)
      row[w.affinity.labels[b]] =
          w.affinity.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    aff[w.affinity.labels[a]] = row;
  }
  j["affinity"] = aff;
  j["near_distance_m"] = w.near_distance_m;
  return j.dump(2);
}

// --- episode ---

Episode parse_episode(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  Episode e;
  e.id = j.value("id", std::string("episode"));
  e.world_ref = j.at("world").get<std::string>();
  const auto& s = j.at("start");
  e.start = GridPose{s.at("x").get<double>(), s.at("y").get<double>(),
                     s.value("heading", 0.0)};
  const std::string mode = j.value("mode", std::string("multion"));
  if (mode == "multion")
    e.mode = EpisodeMode::MultiOn;
  else if (mode == "realworld")
    e.mode = EpisodeMode::RealWorld;
  else
    fail("episode: unknown mode '" + mode + "'");
  for (const auto& t : j.at("targets"))
    e.targets.push_back({t.at("query").get<std::string>(), t.at("goal_id").get<std::string>()});
  e.step_budget = j.value("step_budget", e.step_budget);
  return e;
  } catch (const json::exception& e) {
    fail(std::string("episode JSON error: ") + e.what());
  }
}

Episode load_episode(const std::filesystem::path& path) {
  try {
    return parse_episode(read_text_file(path));
  } catch (const LoadError& e) {
    fail(path.string() + ": " + e.what());
  }
}

std::string episode_to_json(const Episode& e) {
  json j;
  j["id"] = e.id;
  j["world"] = e.world_ref;
  j["start"] = {{"x", e.start.x}, {"y", e.start.y}, {"heading", e.start.heading}};
  j["mode"] = e.mode == EpisodeMode::MultiOn ? "multion" : "realworld";
  j["targets"] = json::array();
  for (const auto& t : e.targets)
    j["targets"].push_back({{"query", t.query}, {"goal_id", t.goal_id}});
  j["step_budget"] = e.step_budget;
  return j.dump(2);
}

// --- config ---

namespace {

json config_to_json_obj(const PipelineConfig& c) {
  json j;
  j["alpha"] = c.alpha;
  j["embedding_dim"] = c.embedding_dim;
  j["blur_radius"] = c.blur_radius;
  j["tau_explore"] = c.tau_explore;
  j["cluster_percentile"] = c.cluster_percentile;
  j["detection_percentile"] = c.detection_percentile;
  j["inflation_radius_cells"] = c.inflation_radius_cells;
  j["snap_radius_cells"] = c.snap_radius_cells;
  j["decision_interval"] = c.decision_interval;
  j["sensor_range_m"] = c.sensor_range_m;
  j["fov_deg"] = c.fov_deg;
  j["ray_spacing_deg"] = c.ray_spacing_deg;
  j["confidence_gain"] = c.confidence_gain;
  j["forward_step_m"] = c.forward_step_m;
  j["turn_step_deg"] = c.turn_step_deg;
  j["success_radius_m"] = c.success_radius_m;
  j["step_budget"] = c.step_budget;
  j["eps_false_negative"] = c.eps_false_negative;
  j["eps_false_positive"] = c.eps_false_positive;
  j["detector_miss_rate"] = c.detector_miss_rate;
  j["label_confusion"] = c.label_confusion;
  j["primary_only"] = c.primary_only;
  j["validate_constraint"] = c.validate_constraint;
  j["embed_endpoint"] = c.embed_endpoint;
  j["lvlm_endpoint"] = c.lvlm_endpoint;
  j["lvlm_model"] = c.lvlm_model;
  j["max_retries"] = c.max_retries;
  return j;
}

}  // namespace

PipelineConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  PipelineConfig c;
  c.alpha = j.value("alpha", c.alpha);
  c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
  c.blur_radius = j.value("blur_radius", c.blur_radius);
  c.tau_explore = j.value("tau_explore", c.tau_explore);
  c.cluster_percentile = j.value("cluster_percentile", c.cluster_percentile);
  c.detection_percentile = j.value("detection_percentile", c.detection_percentile);
  c.inflation_radius_cells = j.value("inflation_radius_cells", c.inflation_radius_cells);
  c.snap_radius_cells = j.value("snap_radius_cells", c.snap_radius_cells);
  c.decision_interval = j.value("decision_interval", c.decision_interval);
  c.sensor_range_m = j.value("sensor_range_m", c.sensor_range_m);
  c.fov_deg = j.value("fov_deg", c.fov_deg);
  c.ray_spacing_deg = j.value("ray_spacing_deg", c.ray_spacing_deg);
  c.confidence_gain = j.value("confidence_gain", c.confidence_gain);
  c.forward_step_m = j.value("forward_step_m", c.forward_step_m);
  c.turn_step_deg = j.value("turn_step_deg", c.turn_step_deg);
  c.success_radius_m = j.value("success_radius_m", c.success_radius_m);
  c.step_budget = j.value("step_budget", c.step_budget);
  c.eps_false_negative = j.value("eps_false_negative", c.eps_false_negative);
  c.eps_false_positive = j.value("eps_false_positive", c.eps_false_positive);
  c.detector_miss_rate = j.value("detector_miss_rate", c.detector_miss_rate);
  if (j.contains("label_confusion"))
    c.label_confusion =
        j.at("label_confusion").get<std::map<std::string, std::map<std::string, double>>>();
  c.primary_only = j.value("primary_only", c.primary_only);
  c.validate_constraint = j.value("validate_constraint", c.validate_constraint);
  c.embed_endpoint = j.value("embed_endpoint", c.embed_endpoint);
  c.lvlm_endpoint = j.value("lvlm_endpoint", c.lvlm_endpoint);
  c.lvlm_model = j.value("lvlm_model", c.lvlm_model);
  c.max_retries = j.value("max_retries", c.max_retries);
  c.validate();
  return c;
  } catch (const json::exception& e) {
    fail(std::string("config JSON error: ") + e.what());
  }
}

PipelineConfig load_config(const std::filesystem::path& path) {
  try {
    return parse_config(read_text_file(path));
  } catch (const LoadError& e) {
    fail(path.string() + ": " + e.what());
  }
}

std::string config_to_json(const PipelineConfig& cfg) { return config_to_json_obj(cfg).dump(2); }

std::string config_fingerprint(const PipelineConfig& cfg) {
  // api key deliberately excluded
  const std::uint64_t h = fnv1a(config_to_json_obj(cfg).dump());
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

// --- lexicon ---

Lexicon parse_lexicon(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  Lexicon lex;
  if (j.contains("containers"))
    lex.containers = j.at("containers").get<std::map<std::string, std::vector<std::string>>>();
  if (j.contains("demands"))
    lex.demands = j.at("demands").get<std::map<std::string, std::vector<std::string>>>();
  const json preps = j.value("prepositions", json::object());
  for (const auto& [word, kind_s] : preps.items()) {
    const auto kind = relation_kind_from_string(kind_s.get<std::string>());
    if (!kind) fail("lexicon: unknown relation kind for preposition '" + word + "'");
    lex.preposition_overrides[word] = *kind;
  }
  return lex;
  } catch (const json::exception& e) {
    fail(std::string("lexicon JSON error: ") + e.what());
  }
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  try {
    return parse_lexicon(read_text_file(path));
  } catch (const LoadError& e) {
    fail(path.string() + ": " + e.what());
  }
}

// --- decomposition ---

std::string decomposition_to_json(const QueryDecomposition& d) {
  json j;
  j["raw"] = d.raw;
  j["primary"] = d.primary;
  j["explicit_targets"] = d.explicit_targets;
  j["inferred_targets"] = d.inferred_targets;
  j["implicit_targets"] = d.implicit_targets;
  j["relations"] = json::array();
  for (const auto& r : d.relations)
    j["relations"].push_back(
        {{"kind", to_string(r.kind)}, {"subject", r.subject}, {"object", r.object}});
  j["proximity_set"] = d.proximity_set;
  j["parse_quality"] = d.parse_quality == ParseQuality::Full      ? "full"
                       : d.parse_quality == ParseQuality::Partial ? "partial"
                                                                  : "fallback";
  j["remote_fallback"] = d.remote_fallback;
  return j.dump(2);
}

// --- results & reports ---

namespace {

json outcome_to_json(const TargetOutcome& t) {
  return json{{"query", t.query},
              {"goal_id", t.goal_id},
              {"outcome", to_string(t.outcome)},
              {"steps", t.steps},
              {"path_length_m", t.path_length_m}};
}

TargetOutcomeKind outcome_kind_from_string(const std::string& s) {
  if (s == "found") return TargetOutcomeKind::Found;
  if (s == "false_positive") return TargetOutcomeKind::FalsePositive;
  if (s == "terminated_not_found") return TargetOutcomeKind::TerminatedNotFound;
  if (s == "budget_exhausted") return TargetOutcomeKind::BudgetExhausted;
  fail("unknown outcome '" + s + "'");
}

json rate_to_json(const RateWithCI& r) {
  return json{{"rate", r.rate},
              {"numerator", r.numerator},
              {"denominator", r.denominator},
              {"ci_low", r.ci_low},
              {"ci_high", r.ci_high}};
}

RateWithCI rate_from_json(const json& j) {
  RateWithCI r;
  r.rate = j.at("rate").get<double>();
  r.numerator = j.at("numerator").get<int>();
  r.denominator = j.at("denominator").get<int>();
  r.ci_low = j.at("ci_low").get<double>();
  r.ci_high = j.at("ci_high").get<double>();
  return r;
}

}  // namespace

std::string result_to_json(const EpisodeResult& r) {
  json j;
  j["episode_id"] = r.episode_id;
  j["mode"] = r.mode;
  j["seed"] = r.seed;
  j["config_fingerprint"] = r.config_fingerprint;
  j["total_targets"] = r.total_targets;
  j["outcomes"] = json::array();
  for (const auto& t : r.outcomes) j["outcomes"].push_back(outcome_to_json(t));
  return j.dump(2);
}

EpisodeResult parse_result(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  EpisodeResult r;
  r.episode_id = j.at("episode_id").get<std::string>();
  r.mode = j.at("mode").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.config_fingerprint = j.value("config_fingerprint", std::string());
  r.total_targets = j.at("total_targets").get<int>();
  for (const auto& t : j.at("outcomes")) {
    TargetOutcome o;
    o.query = t.at("query").get<std::string>();
    o.goal_id = t.at("goal_id").get<std::string>();
    o.outcome = outcome_kind_from_string(t.at("outcome").get<std::string>());
    o.steps = t.at("steps").get<int>();
    o.path_length_m = t.at("path_length_m").get<double>();
    r.outcomes.push_back(std::move(o));
  }
  return r;
  } catch (const json::exception& e) {
    fail(std::string("result JSON error: ") + e.what());
  }
}

std::string report_to_json(const MetricsReport& r) {
  json j;
  j["sr"] = rate_to_json(r.sr);
  j["pr"] = rate_to_json(r.pr);
  j["srat"] = rate_to_json(r.srat);
  j["fp"] = rate_to_json(r.fp);
  j["tnf"] = rate_to_json(r.tnf);
  j["episodes"] = r.episodes;
  j["attempted_targets"] = r.attempted_targets;
  return j.dump(2);
}

MetricsReport parse_report(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  MetricsReport r;
  r.sr = rate_from_json(j.at("sr"));
  r.pr = rate_from_json(j.at("pr"));
  r.srat = rate_from_json(j.at("srat"));
  r.fp = rate_from_json(j.at("fp"));
  r.tnf = rate_from_json(j.at("tnf"));
  r.episodes = j.at("episodes").get<int>();
  r.attempted_targets = j.at("attempted_targets").get<int>();
  return r;
  } catch (const json::exception& e) {
    fail(std::string("report JSON error: ") + e.what());
  }
}

std::string report_to_table(const MetricsReport& r) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3);
  out << "metric  rate   n/d      95% CI\n";
  auto row = [&](const char* name, const RateWithCI& m) {
    out << std::left << std::setw(7) << name << std::right << std::setw(6) << m.rate << "  "
        << m.numerator << "/" << m.denominator << "  [" << m.ci_low << ", " << m.ci_high << "]\n";
  };
  row("SRAT", r.srat);
  row("Pr", r.pr);
  row("SR", r.sr);
  row("FP", r.fp);
  row("TNF", r.tnf);
  out << "episodes: " << r.episodes << ", attempted targets: " << r.attempted_targets << "\n";
  return out.str();
}

// --- PGM ---

namespace {

void write_pgm(const std::filesystem::path& path, int width, int height,
               const std::vector<std::uint8_t>& pixels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write '" + path.string() + "'");
  out << "P5\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
  if (!out) fail("write failed for '" + path.string() + "'");
}

}  // namespace

void export_map(const SimilarityMap& map, const std::filesystem::path& path) {
  if (map.scores.size() != static_cast<size_t>(map.spec.cells()))
    throw DimensionError("export_map: size mismatch");
  std::vector<std::uint8_t> pixels(map.scores.size());
  for (size_t i = 0; i < map.scores.size(); ++i) {
    const double v = std::clamp(map.scores[i], 0.0, 1.0) * 255.0;
    pixels[i] = static_cast<std::uint8_t>(std::floor(v + 0.5));  // round half-up
  }
  write_pgm(path, map.spec.width, map.spec.height, pixels);
}

void export_mask(const Mask& mask, const std::filesystem::path& path) {
  std::vector<std::uint8_t> pixels(mask.data().size());
  for (size_t i = 0; i < pixels.size(); ++i) pixels[i] = mask.data()[i] ? 255 : 0;
  write_pgm(path, mask.spec().width, mask.spec().height, pixels);
}

SimilarityMap import_map(const std::filesystem::path& path, const GridSpec& spec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open '" + path.string() + "'");
  std::string magic;
  int width = 0, height = 0, maxval = 0;
  in >> magic >> width >> height >> maxval;
  if (magic != "P5" || maxval != 255) fail("'" + path.string() + "' is not an 8-bit P5 PGM");
  if (width != spec.width || height != spec.height)
    fail("'" + path.string() + "' dimensions do not match the given spec");
  in.get();  // single whitespace after the header
  std::vector<char> pixels(static_cast<size_t>(width) * height);
  in.read(pixels.data(), static_cast<std::streamsize>(pixels.size()));
  if (!in) fail("truncated PGM '" + path.string() + "'");
  SimilarityMap map{spec, std::vector<double>(pixels.size())};
  for (size_t i = 0; i < pixels.size(); ++i)
    map.scores[i] = static_cast<double>(static_cast<std::uint8_t>(pixels[i])) / 255.0;
  return map;
}

}  // namespace divnav
