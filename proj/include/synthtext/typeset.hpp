#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "synthtext/corpus.hpp"
#include "synthtext/geometry.hpp"
#include "synthtext/region.hpp"
#include "synthtext/rng.hpp"

namespace synthtext {

/// Ink extent of one glyph at 1 px/em, relative to the pen on the baseline (y down).
struct GlyphMetrics {
  double advance = 0;
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

struct FontFace {
  std::string id;  // file stem
  std::filesystem::path path;
  bool bold = false, italic = false, mono = false;
  std::array<GlyphMetrics, 95> glyphs{};  // printable ASCII 0x20..0x7e
  double ascent = 0, descent = 0;         // em fractions over printable ASCII ink

  const GlyphMetrics& glyph(char c) const { return glyphs[static_cast<unsigned char>(c) - 0x20]; }
};

/// Outline fonts available for rendering. Immutable after loading; rasterizer
/// state is kept per thread.
class FontCatalog {
 public:
  /// Loads every .ttf/.otf file directly inside `dir`, sorted by file name. When
  /// `families` is non-empty only font ids starting with one of them are kept.
  static FontCatalog load_directory(const std::filesystem::path& dir, std::span<const std::string> families = {});
  static FontCatalog load_files(std::span<const std::filesystem::path> files);

  std::size_t size() const { return faces_.size(); }
  const FontFace& face(std::size_t i) const { return faces_.at(i); }
  std::optional<std::size_t> find(const std::string& id) const;

 private:
  std::vector<FontFace> faces_;
};

/// SYNTHTEXT_FONT_DIR if set, else the system DejaVu directory.
std::filesystem::path default_font_dir();

/// True for printable ASCII (space through tilde) and newline.
bool renderable(const std::string& text);

struct TextStyle {
  std::string font_id;
  int size_px = 0;
  bool has_border = false;
  int border_width_px = 0;
};

/// Text rendered in its own frame. Boxes use continuous pixel coordinates:
/// pixel (x, y) covers [x, x+1) x [y, y+1).
struct RenderedText {
  cv::Mat alpha;         // CV_64FC1 glyph coverage in [0,1]
  cv::Mat border_alpha;  // CV_64FC1 outline coverage; empty without a border
  std::vector<cv::Rect2d> char_boxes;
  std::vector<cv::Rect2d> word_boxes;
  std::vector<std::string> words;
  std::vector<double> baselines;  // one per line
  TextSample text;
  TextStyle style;

  cv::Rect2d ink_box() const;
  /// Glyph and border coverage combined.
  cv::Mat coverage() const;
};

inline constexpr int kMinTextSize = 8;
inline constexpr double kLineGap = 0.2;

/// Anti-aliased rendering, one glyph at a time at pen positions from the font
/// advances; lines are stacked with a 0.2 * size gap. Throws ValidationError
/// when the size is below the legibility floor or a character cannot be drawn.
RenderedText rasterize_text(const TextSample& sample, const FontCatalog& fonts, std::size_t font, int size_px);

/// Ink extent predicted from the font metrics alone.
cv::Size2d estimate_extent(const TextSample& sample, const FontFace& face, int size_px);

struct FitConfig {
  double margin = 0.95;
  int min_size = kMinTextSize;
  int max_size = 400;
};

/// Largest integer size whose rendered extent is within margin * (width, height).
std::optional<RenderedText> fit_text_to_rect(const TextSample& sample, const FontCatalog& fonts, std::size_t font,
                                             double width, double height, const FitConfig& cfg = {});

/// Size chosen by fit_text_to_rect for the rectangle's dimensions.
std::optional<int> size_to_rect(const TextSample& sample, const FontCatalog& fonts, std::size_t font,
                                const RotatedRect& rect, const FitConfig& cfg = {});

/// Adds an outline of `width_px` around the glyphs, growing the rasters.
void apply_border(RenderedText& text, int width_px);

/// Image-frame raster confined to `roi`.
struct AlphaPatch {
  cv::Rect roi;
  cv::Mat alpha;  // CV_64FC1, roi-sized

  int count_above(double threshold) const;
};

using Quad = std::array<cv::Point2d, 4>;

struct Placement {
  int region_label = 0;
  Homography homography;  // text frame -> image frame
  AlphaPatch glyph;
  AlphaPatch border;      // empty roi without a border
  AlphaPatch image_mask;  // glyph and border coverage
  std::vector<Quad> image_word_quads;
  std::vector<cv::Rect2d> image_word_bboxes;
  std::vector<cv::Rect2d> image_char_bboxes;
};

struct PlaceConfig {
  int attempts = 10;
  double max_stray_fraction = 0.02;
  double binarize = 0.05;
};

cv::Rect2d tight_bbox(const Quad& quad);

/// Maps the text into the image at `offset` from the rectangle center (along the
/// rectangle's axes), then checks bounds, region containment and collisions.
std::optional<Placement> place_text_at(const RenderedText& text, const Region& region, const Homography& to_frontal,
                                       const RotatedRect& rect, cv::Point2d offset, std::span<const Placement> existing,
                                       cv::Size image_size, const PlaceConfig& cfg = {});

/// Tries up to cfg.attempts uniformly drawn offsets that keep the text inside
/// the fronto-parallel rectangle.
std::optional<Placement> place_text(const RenderedText& text, const Region& region, const Homography& to_frontal,
                                    const RotatedRect& rect, std::span<const Placement> existing, cv::Size image_size,
                                    Rng& rng, const PlaceConfig& cfg = {});

/// Number of pixels where both masks exceed `threshold`.
int mask_overlap(const AlphaPatch& a, const AlphaPatch& b, double threshold);

}  // namespace synthtext
