#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

namespace synthtext {

/// One background image with its per-pixel inputs.
struct SceneBundle {
  std::string id;
  cv::Mat image;               // CV_64FC3 RGB in [0,1]
  cv::Mat depth;               // CV_64FC1, finite and > 0
  std::optional<cv::Mat> ucm;  // CV_64FC1 in [0,1]

  /// Throws ValidationError on size mismatch or bad depth/ucm values.
  void validate() const;
};

/// Reads `<id>.png`, `<id>.depth.raw` and, when present, `<id>.ucm.raw` or
/// `<id>.ucm.png` from `dir`.
SceneBundle load_bundle(const std::filesystem::path& dir, const std::string& id);

/// Every bundle in `dir` that has both an image and a depth raster, sorted by id.
std::vector<SceneBundle> load_bundles(const std::filesystem::path& dir);

/// Ids that load_bundles would return, without reading the rasters.
std::vector<std::string> list_bundle_ids(const std::filesystem::path& dir);

void save_bundle(const std::filesystem::path& dir, const SceneBundle& bundle);

/// A ray-cast room with a few tilted boards: Lambert-shaded flat surfaces, some
/// of them carrying a busy texture, exact depth and a UCM marking surface
/// changes. Deterministic in `seed`.
SceneBundle make_synthetic_bundle(std::uint64_t seed, cv::Size size = {512, 512});

}  // namespace synthtext
