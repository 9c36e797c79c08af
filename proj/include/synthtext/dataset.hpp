#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "synthtext/bundle.hpp"
#include "synthtext/scene.hpp"

namespace synthtext {

/// Produces bundle `i` of `count`; called concurrently from worker threads.
struct BundleSource {
  std::size_t count = 0;
  std::function<SceneBundle(std::size_t)> load;

  static BundleSource from_directory(const std::filesystem::path& dir);
  static BundleSource synthetic(std::uint64_t seed, std::size_t count, cv::Size size = {512, 512});
};

struct DatasetOptions {
  std::filesystem::path out_dir;
  std::size_t num_scenes = 0;
  int workers = 1;
  bool preview = false;
  bool emit_targets = false;
  int target_stride = 16;
};

struct StatsReport {
  std::size_t requested = 0, emitted = 0, rejected = 0;
  std::map<int, std::size_t> instance_histogram;  // instances per emitted image
  std::map<std::string, std::size_t> reject_reasons;
  double mean_instances = 0;
  double mean_seconds = 0;  // per scene, emitted and rejected alike
  double total_seconds = 0;
  int workers = 1;

  nlohmann::json to_json() const;
};

/// Scene i uses bundle i % count and RNG index i. Writes images/<id>.png,
/// annotations.jsonl (scene order) and stats.json under out_dir. On an I/O error
/// a manifest.json listing what was written is left behind and the error rethrown.
StatsReport run_dataset(const BundleSource& bundles, const GenConfig& cfg, const Resources& res,
                        const DatasetOptions& opts);

/// Image id for scene `index`.
std::string scene_id(std::size_t index);

struct ValidationReport {
  std::size_t records = 0, invalid = 0;
  std::vector<std::string> problems;
};

/// Checks every annotation record and that its image exists with the stated size.
ValidationReport validate_dataset(const std::filesystem::path& dir);

/// Counts recomputed from annotations.jsonl, merged with stats.json timing when present.
nlohmann::json dataset_stats(const std::filesystem::path& dir);

}  // namespace synthtext
