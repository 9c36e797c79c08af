#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>
#include <opencv2/core.hpp>

#include "synthtext/bundle.hpp"
#include "synthtext/chroma.hpp"
#include "synthtext/compose.hpp"
#include "synthtext/corpus.hpp"
#include "synthtext/geometry.hpp"
#include "synthtext/segmentation.hpp"
#include "synthtext/typeset.hpp"

namespace synthtext {

struct TextConfig {
  TextSamplerConfig sampler;
  int min_size_px = kMinTextSize;
  int max_size_px = 160;
  // The text may fill a random fraction of the fitted rectangle, drawn per instance.
  double fill_min = 0.35;
  double fill_max = 0.9;
  double fit_margin = 0.95;
  // Border width as a fraction of the text size, at least one pixel.
  double border_width_frac = 0.08;
};

/// Generation parameters; the JSON config file mirrors this struct field by field.
struct GenConfig {
  std::uint64_t seed = 0;
  int instances_per_image = 10;
  std::array<double, 3> kind_probs{1.0 / 3, 1.0 / 3, 1.0 / 3};  // word, line, paragraph
  RegionFilterConfig filter;
  BlendMode blend_mode = BlendMode::Poisson;
  DecorationConfig decoration;  // border_prob defaults to 0.2
  double shadow_prob = 0.0;
  cv::Size output_size{512, 512};
  int attempt_budget = 0;  // 0 means 3 * instances_per_image
  double ucm_threshold = 0.11;
  FallbackSegmentConfig fallback;
  RansacConfig ransac;
  TextConfig text;
  PlaceConfig place;

  std::filesystem::path corpus_path;
  std::filesystem::path font_dir;  // empty: default_font_dir()
  std::vector<std::string> font_families;
  std::filesystem::path palette_path;  // empty: built-in palette

  int effective_attempt_budget() const { return attempt_budget > 0 ? attempt_budget : 3 * instances_per_image; }
  void validate() const;
};

GenConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const GenConfig& cfg);
/// Relative resource paths are resolved against the config file's directory.
GenConfig load_config(const std::filesystem::path& path);

/// Read-only inputs shared by every scene of a run.
struct Resources {
  Corpus corpus;
  FontCatalog fonts;
  Palette palette;

  static Resources load(const GenConfig& cfg);
};

/// Hand-picked fg/bg pairs used when no learned palette is configured.
Palette builtin_palette();

struct TextInstance {
  std::string text;
  std::string kind;
  std::vector<std::string> words;
  std::vector<cv::Rect2d> word_bboxes;  // x, y, w, h
  std::vector<Quad> word_quads;
  std::vector<cv::Rect2d> char_bboxes;
  TextStyle style;
  int region_label = 0;
};

struct SceneAnnotation {
  std::string image_id;
  std::string source;
  int width = 0, height = 0;
  std::vector<TextInstance> instances;
};

nlohmann::json annotation_to_json(const SceneAnnotation& ann);
SceneAnnotation annotation_from_json(const nlohmann::json& j);

/// Problems found in an annotation record; empty when it is valid.
std::vector<std::string> annotation_problems(const SceneAnnotation& ann);

struct SceneResult {
  bool rejected = false;
  std::string reject_reason;
  cv::Mat image;  // CV_64FC3 RGB
  SceneAnnotation annotation;
  std::vector<Placement> placements;
  std::vector<Region> regions;
  std::vector<RegionAssessment> assessments;
  int attempts = 0;
  double seconds = 0;
};

/// One synthetic scene. All randomness comes from derive_seed(cfg.seed, index),
/// so the result depends only on the inputs.
SceneResult generate_scene(const SceneBundle& bundle, const GenConfig& cfg, const Resources& res, std::uint64_t index);

/// Word boxes stroked in red, 2 px wide.
cv::Mat render_preview(const cv::Mat& image, const SceneAnnotation& ann);

}  // namespace synthtext
