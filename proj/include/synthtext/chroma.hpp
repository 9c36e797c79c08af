#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <opencv2/core.hpp>

#include "synthtext/rng.hpp"

namespace synthtext {

/// CIE L*a*b* under D65.
struct LabColor {
  double L = 0, a = 0, b = 0;

  double distance(const LabColor& o) const;
  bool operator==(const LabColor&) const = default;
};

/// sRGB in [0,1] (clamped) to Lab.
LabColor rgb_to_lab(const cv::Vec3d& rgb);
/// Lab to sRGB, clamped to [0,1].
cv::Vec3d lab_to_rgb(const LabColor& lab);

struct ColorPair {
  LabColor fg;
  LabColor bg;
};

struct Palette {
  std::vector<ColorPair> pairs;
};

struct PaletteLearnConfig {
  int max_iterations = 20;
  int restarts = 16;  // best-inertia run is kept
};

struct TwoMeans {
  LabColor fg, bg;  // bg is the larger cluster
  std::size_t fg_count = 0, bg_count = 0;
  double inertia = 0;
};

/// 2-means in Lab with k-means++ seeding. nullopt when the pixels hold fewer
/// than two distinct colors.
std::optional<TwoMeans> two_means(std::span<const LabColor> pixels, Rng& rng, const PaletteLearnConfig& cfg = {});

/// Learns one fg/bg pair per crop (RGB [0,1] CV_64FC3 or 8-bit BGR). Single-color
/// crops are skipped; `skipped` receives their count when non-null.
Palette learn_palette(std::span<const cv::Mat> crops, Rng& rng, const PaletteLearnConfig& cfg = {},
                      std::size_t* skipped = nullptr);

/// Pair whose bg is nearest to `region_mean` in Lab; lowest index on ties.
std::size_t select_pair_index(const LabColor& region_mean, const Palette& palette);
const ColorPair& select_pair(const LabColor& region_mean, const Palette& palette);

enum class BorderRule { LightnessShift, Midpoint };

struct BorderSpec {
  LabColor color;
  BorderRule rule = BorderRule::Midpoint;
};

struct DecorationConfig {
  double border_prob = 0.2;
  double lightness_shift = 30.0;
  double shift_rule_prob = 0.5;  // vs. the fg/bg midpoint
};

/// Exactly one draw is consumed when no border is chosen.
std::optional<BorderSpec> choose_decoration(const LabColor& fg, const LabColor& bg, Rng& rng,
                                            const DecorationConfig& cfg = {});

/// Text table, one pair per line: "fgL fga fgb bgL bga bgb".
void save_palette(const std::filesystem::path& path, const Palette& palette);
Palette load_palette(const std::filesystem::path& path);

/// Mean Lab color over the set pixels of `mask` (same size as `rgb`).
LabColor mean_lab(const cv::Mat& rgb, const cv::Mat& mask, cv::Point mask_offset = {0, 0});

}  // namespace synthtext
