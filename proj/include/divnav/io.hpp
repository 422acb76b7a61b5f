#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "divnav/belief_map.hpp"
#include "divnav/metrics.hpp"
#include "divnav/pipeline.hpp"
#include "divnav/query_pipeline.hpp"
#include "divnav/simulator.hpp"

namespace divnav {

// --- JSON documents (formats documented in README) ---

WorldModel load_world(const std::filesystem::path& path);
WorldModel parse_world(const std::string& json_text);
std::string world_to_json(const WorldModel& world);

// episode.world_ref holds the world path as written in the file (resolved
// relative to the episode file by the CLI).
Episode load_episode(const std::filesystem::path& path);
Episode parse_episode(const std::string& json_text);
std::string episode_to_json(const Episode& episode);

PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const std::string& json_text);
std::string config_to_json(const PipelineConfig& cfg);
// FNV-1a hex digest of the canonical config JSON.
std::string config_fingerprint(const PipelineConfig& cfg);

Lexicon load_lexicon(const std::filesystem::path& path);
Lexicon parse_lexicon(const std::string& json_text);

std::string decomposition_to_json(const QueryDecomposition& d);

std::string result_to_json(const EpisodeResult& result);
EpisodeResult parse_result(const std::string& json_text);

std::string report_to_json(const MetricsReport& report);
MetricsReport parse_report(const std::string& json_text);
std::string report_to_table(const MetricsReport& report);

// --- map dumps ---

// 8-bit grayscale PGM (P5), row-major, score*255 rounded half-up.
void export_map(const SimilarityMap& map, const std::filesystem::path& path);
// Masks render as 0/255.
void export_mask(const Mask& mask, const std::filesystem::path& path);
// Inverse of export_map up to 1/255 quantization (spec taken from the caller).
SimilarityMap import_map(const std::filesystem::path& path, const GridSpec& spec);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace divnav
