#include "synthtext/typeset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <tuple>

#include <opencv2/freetype.hpp>
#include <opencv2/imgproc.hpp>

#include "synthtext/errors.hpp"

namespace synthtext {

namespace {

constexpr int kInkRefSize = 256;
constexpr int kAdvanceRefSize = 512;

// FreeType faces carry mutable size state, so each thread keeps its own.
cv::freetype::FreeType2& rasterizer(const std::filesystem::path& path) {
  thread_local std::map<std::string, cv::Ptr<cv::freetype::FreeType2>> cache;
  auto& slot = cache[path.string()];
  if (!slot) {
    slot = cv::freetype::createFreeType2();
    slot->loadFontData(path.string(), 0);
  }
  return *slot;
}

struct GlyphBitmap {
  cv::Mat alpha;     // CV_8UC1 tight ink
  cv::Point offset;  // ink top-left relative to the pen on the baseline
};

GlyphBitmap draw_glyph(const std::filesystem::path& path, char c, int size, cv::Size canvas_size, cv::Point origin) {
  cv::Mat canvas = cv::Mat::zeros(canvas_size, CV_8UC3);
  rasterizer(path).putText(canvas, std::string(1, c), origin, size, cv::Scalar::all(255), -1, cv::LINE_AA, true);
  cv::Mat ch;
  cv::extractChannel(canvas, ch, 0);
  const cv::Rect ink = cv::boundingRect(ch);
  GlyphBitmap g;
  if (ink.empty()) return g;
  g.alpha = ch(ink).clone();
  g.offset = ink.tl() - origin;
  // Signal clipping to the caller through an empty result.
  if (ink.x == 0 || ink.y == 0 || ink.br().x == canvas_size.width || ink.br().y == canvas_size.height)
    g.alpha.release();
  return g;
}

const GlyphBitmap& glyph_bitmap(const FontFace& face, char c, int size) {
  using Key = std::tuple<std::string, int, char>;
  thread_local std::map<Key, GlyphBitmap> cache;
  if (cache.size() > 20000) cache.clear();
  const Key key{face.path.string(), size, c};
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  const GlyphMetrics& m = face.glyph(c);
  GlyphBitmap g;
  for (int margin = 4 + size / 4; margin < 64 + 4 * size; margin *= 2) {
    const int w = static_cast<int>(std::ceil((m.x1 - m.x0) * size)) + 2 * margin;
    const int h = static_cast<int>(std::ceil((m.y1 - m.y0) * size)) + 2 * margin;
    const cv::Point origin(margin - static_cast<int>(std::floor(m.x0 * size)),
                           margin - static_cast<int>(std::floor(m.y0 * size)));
    g = draw_glyph(face.path, c, size, {w, h}, origin);
    if (!g.alpha.empty()) break;
  }
  if (g.alpha.empty())
    throw ValidationError(std::string("glyph '") + c + "' has no ink in font " + face.id);
  return cache.emplace(key, std::move(g)).first->second;
}

FontFace measure_face(const std::filesystem::path& path) {
  FontFace f;
  f.path = path;
  f.id = path.stem().string();
  std::string lower = f.id;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
  f.bold = lower.find("bold") != std::string::npos;
  f.italic = lower.find("italic") != std::string::npos || lower.find("oblique") != std::string::npos;
  f.mono = lower.find("mono") != std::string::npos;

  auto& ft = rasterizer(path);
  int baseline = 0;
  const double two_spaces = ft.getTextSize("  ", kAdvanceRefSize, -1, &baseline).width;
  f.glyphs[0].advance = two_spaces / 2.0 / kAdvanceRefSize;

  const cv::Size canvas(3 * kInkRefSize, 3 * kInkRefSize);
  const cv::Point origin(kInkRefSize, 2 * kInkRefSize);
  for (int code = 0x21; code <= 0x7e; ++code) {
    const char c = static_cast<char>(code);
    GlyphMetrics& m = f.glyphs[code - 0x20];
    const std::string probe = std::string(" ") + c + " ";
    m.advance = (ft.getTextSize(probe, kAdvanceRefSize, -1, &baseline).width - two_spaces) / kAdvanceRefSize;
    const GlyphBitmap g = draw_glyph(path, c, kInkRefSize, canvas, origin);
    if (g.alpha.empty()) throw IngestionError("font " + path.string() + " cannot render '" + std::string(1, c) + "'");
    m.x0 = static_cast<double>(g.offset.x) / kInkRefSize;
    m.y0 = static_cast<double>(g.offset.y) / kInkRefSize;
    m.x1 = static_cast<double>(g.offset.x + g.alpha.cols) / kInkRefSize;
    m.y1 = static_cast<double>(g.offset.y + g.alpha.rows) / kInkRefSize;
    f.ascent = std::max(f.ascent, -m.y0);
    f.descent = std::max(f.descent, m.y1);
  }
  return f;
}

struct GlyphSlot {
  char c;
  int line;
  int word;
  double pen;  // in em from the line start
};

struct Layout {
  std::vector<GlyphSlot> glyphs;
  std::vector<std::string> words;
  std::vector<double> line_width;  // em
  int lines = 0;
};

Layout layout_text(const std::string& content, const FontFace& face) {
  Layout out;
  int word = -1;
  bool in_word = false;
  double pen = 0;
  out.lines = 1;
  out.line_width.push_back(0);
  for (char c : content) {
    if (c == '\n') {
      ++out.lines;
      out.line_width.push_back(0);
      pen = 0;
      in_word = false;
      continue;
    }
    if (c == ' ' || c == '\t') {
      pen += face.glyph(' ').advance;
      in_word = false;
      continue;
    }
    if (!in_word) {
      ++word;
      out.words.emplace_back();
      in_word = true;
    }
    out.words.back().push_back(c);
    out.glyphs.push_back({c, out.lines - 1, word, pen});
    pen += face.glyph(c).advance;
    out.line_width.back() = pen;
  }
  return out;
}

double line_pitch(int size) { return (1.0 + kLineGap) * size; }

}  // namespace

std::filesystem::path default_font_dir() {
  if (const char* env = std::getenv("SYNTHTEXT_FONT_DIR"); env && *env) return env;
  return "/usr/share/fonts/truetype/dejavu";
}

bool renderable(const std::string& text) {
  return std::all_of(text.begin(), text.end(), [](char c) { return c == '\n' || (c >= 0x20 && c <= 0x7e); });
}

FontCatalog FontCatalog::load_files(std::span<const std::filesystem::path> files) {
  FontCatalog cat;
  for (const auto& p : files) cat.faces_.push_back(measure_face(p));
  if (cat.faces_.empty()) throw ValidationError("font catalog is empty");
  return cat;
}

FontCatalog FontCatalog::load_directory(const std::filesystem::path& dir, std::span<const std::string> families) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IngestionError("font directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (ext != ".ttf" && ext != ".otf") continue;
    const std::string stem = entry.path().stem().string();
    if (!families.empty() &&
        std::none_of(families.begin(), families.end(), [&](const std::string& f) { return stem.rfind(f, 0) == 0; }))
      continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return load_files(files);
}

std::optional<std::size_t> FontCatalog::find(const std::string& id) const {
  for (std::size_t i = 0; i < faces_.size(); ++i)
    if (faces_[i].id == id) return i;
  return std::nullopt;
}

cv::Rect2d RenderedText::ink_box() const {
  if (word_boxes.empty()) return {};
  cv::Rect2d box = word_boxes.front();
  for (const auto& b : word_boxes) box |= b;
  return box;
}

cv::Mat RenderedText::coverage() const {
  if (border_alpha.empty()) return alpha;
  cv::Mat out;
  cv::max(alpha, border_alpha, out);
  return out;
}

cv::Size2d estimate_extent(const TextSample& sample, const FontFace& face, int size_px) {
  const Layout lay = layout_text(sample.content, face);
  if (lay.glyphs.empty()) return {0, 0};
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& g : lay.glyphs) {
    const GlyphMetrics& m = face.glyph(g.c);
    const double base = g.line * line_pitch(size_px);
    x0 = std::min(x0, (g.pen + m.x0) * size_px);
    x1 = std::max(x1, (g.pen + m.x1) * size_px);
    y0 = std::min(y0, base + m.y0 * size_px);
    y1 = std::max(y1, base + m.y1 * size_px);
  }
  return {x1 - x0, y1 - y0};
}

RenderedText rasterize_text(const TextSample& sample, const FontCatalog& fonts, std::size_t font, int size_px) {
  if (size_px < kMinTextSize) throw ValidationError("text size below the legibility floor");
  if (!renderable(sample.content)) throw ValidationError("text contains characters outside printable ASCII");
  const FontFace& face = fonts.face(font);
  const Layout lay = layout_text(sample.content, face);
  if (lay.glyphs.empty()) throw ValidationError("text sample has no visible characters");

  const int pad = 8 + size_px;
  const double widest = *std::max_element(lay.line_width.begin(), lay.line_width.end());
  const int width = 2 * pad + static_cast<int>(std::ceil(widest * size_px)) + size_px;
  const int height = 2 * pad + static_cast<int>(std::ceil(lay.lines * line_pitch(size_px))) + size_px;
  cv::Mat canvas = cv::Mat::zeros(height, width, CV_8UC1);

  const int first_baseline = pad + static_cast<int>(std::lround(face.ascent * size_px));
  std::vector<int> baselines(lay.lines);
  for (int i = 0; i < lay.lines; ++i) baselines[i] = first_baseline + static_cast<int>(std::lround(i * line_pitch(size_px)));

  RenderedText out;
  out.text = sample;
  out.words = lay.words;
  out.style.font_id = face.id;
  out.style.size_px = size_px;
  out.word_boxes.assign(lay.words.size(), cv::Rect2d());
  std::vector<bool> word_seen(lay.words.size(), false);
  const cv::Rect canvas_rect({0, 0}, canvas.size());
  for (const auto& g : lay.glyphs) {
    const GlyphBitmap& bmp = glyph_bitmap(face, g.c, size_px);
    const cv::Point origin(pad + static_cast<int>(std::lround(g.pen * size_px)), baselines[g.line]);
    const cv::Rect dst(origin + bmp.offset, bmp.alpha.size());
    if ((dst & canvas_rect) != dst) throw ValidationError("glyph exceeds the layout canvas");
    cv::Mat target = canvas(dst);
    cv::max(target, bmp.alpha, target);
    const cv::Rect2d box(dst.x, dst.y, dst.width, dst.height);
    out.char_boxes.push_back(box);
    auto& wb = out.word_boxes[g.word];
    wb = word_seen[g.word] ? (wb | box) : box;
    word_seen[g.word] = true;
  }

  // Crop to the ink with a 2 px transparent frame.
  cv::Rect2d ink = out.ink_box();
  const cv::Rect crop = cv::Rect(static_cast<int>(ink.x) - 2, static_cast<int>(ink.y) - 2,
                                 static_cast<int>(ink.width) + 4, static_cast<int>(ink.height) + 4) &
                        canvas_rect;
  canvas(crop).convertTo(out.alpha, CV_64FC1, 1.0 / 255.0);
  const cv::Point2d shift(crop.x, crop.y);
  for (auto& b : out.char_boxes) b -= shift;
  for (auto& b : out.word_boxes) b -= shift;
  for (int b : baselines) out.baselines.push_back(b - crop.y);
  return out;
}

std::optional<RenderedText> fit_text_to_rect(const TextSample& sample, const FontCatalog& fonts, std::size_t font,
                                             double width, double height, const FitConfig& cfg) {
  const FontFace& face = fonts.face(font);
  const double max_w = cfg.margin * width, max_h = cfg.margin * height;
  auto fits = [&](cv::Size2d e) { return e.width <= max_w && e.height <= max_h; };

  int lo = cfg.min_size, hi = cfg.max_size;
  if (lo > hi || !fits(estimate_extent(sample, face, lo))) {
    // The metric estimate can be off by a pixel; confirm with a real render.
    if (lo > hi) return std::nullopt;
    RenderedText r = rasterize_text(sample, fonts, font, lo);
    const auto ink = r.ink_box();
    if (fits({ink.width, ink.height})) return r;
    return std::nullopt;
  }
  while (lo < hi) {
    const int mid = lo + (hi - lo + 1) / 2;
    if (fits(estimate_extent(sample, face, mid)))
      lo = mid;
    else
      hi = mid - 1;
  }
  for (int s = lo; s >= cfg.min_size; --s) {
    RenderedText r = rasterize_text(sample, fonts, font, s);
    const auto ink = r.ink_box();
    if (fits({ink.width, ink.height})) return r;
  }
  return std::nullopt;
}

std::optional<int> size_to_rect(const TextSample& sample, const FontCatalog& fonts, std::size_t font,
                                const RotatedRect& rect, const FitConfig& cfg) {
  auto r = fit_text_to_rect(sample, fonts, font, rect.width, rect.height, cfg);
  if (!r) return std::nullopt;
  return r->style.size_px;
}

void apply_border(RenderedText& text, int width_px) {
  if (width_px <= 0) return;
  const int pad = width_px + 1;
  cv::Mat grown;
  cv::copyMakeBorder(text.alpha, grown, pad, pad, pad, pad, cv::BORDER_CONSTANT, 0);
  text.alpha = grown;
  const cv::Mat kernel = cv::getStructuringElement(cv::MORPH_ELLIPSE, {2 * width_px + 1, 2 * width_px + 1});
  cv::dilate(text.alpha, text.border_alpha, kernel);
  const cv::Point2d shift(pad, pad);
  for (auto& b : text.char_boxes) b += shift;
  for (auto& b : text.word_boxes) b += shift;
  for (auto& b : text.baselines) b += pad;
  text.style.has_border = true;
  text.style.border_width_px = width_px;
}

int AlphaPatch::count_above(double threshold) const {
  if (alpha.empty()) return 0;
  return cv::countNonZero(alpha > threshold);
}

cv::Rect2d tight_bbox(const Quad& q) {
  double x0 = q[0].x, x1 = q[0].x, y0 = q[0].y, y1 = q[0].y;
  for (const auto& p : q) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  return {x0, y0, x1 - x0, y1 - y0};
}

int mask_overlap(const AlphaPatch& a, const AlphaPatch& b, double threshold) {
  const cv::Rect inter = a.roi & b.roi;
  if (inter.empty() || a.alpha.empty() || b.alpha.empty()) return 0;
  const cv::Mat pa = a.alpha(inter - a.roi.tl()) > threshold;
  const cv::Mat pb = b.alpha(inter - b.roi.tl()) > threshold;
  return cv::countNonZero(pa & pb);
}

namespace {

Quad map_box(const Homography& h, const cv::Rect2d& b) {
  return {h.apply({b.x, b.y}), h.apply({b.x + b.width, b.y}), h.apply({b.x + b.width, b.y + b.height}),
          h.apply({b.x, b.y + b.height})};
}

}  // namespace

std::optional<Placement> place_text_at(const RenderedText& text, const Region& region, const Homography& to_frontal,
                                       const RotatedRect& rect, cv::Point2d offset, std::span<const Placement> existing,
                                       cv::Size image_size, const PlaceConfig& cfg) {
  const cv::Rect2d ink = text.ink_box();
  const cv::Point2d tc(ink.x + ink.width / 2, ink.y + ink.height / 2);
  const double c = std::cos(rect.angle_rad), s = std::sin(rect.angle_rad);
  const cv::Point2d e(c, s), n(-s, c);
  const cv::Point2d target = rect.center + offset.x * e + offset.y * n;
  const cv::Matx33d text_to_frontal(c, -s, target.x - (c * tc.x - s * tc.y), s, c, target.y - (s * tc.x + c * tc.y), 0,
                                    0, 1);
  const Homography to_image = to_frontal.inverse() * Homography::normalized(text_to_frontal);

  // Reject when any part of the text raster maps behind the view.
  const double W = text.alpha.cols, H = text.alpha.rows;
  const std::array<cv::Point2d, 4> frame{{{0, 0}, {W, 0}, {W, H}, {0, H}}};
  double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
  for (const auto& p : frame) {
    if (to_image.depth_sign(p) <= 0) return std::nullopt;
    const cv::Point2d q = to_image.apply(p);
    x0 = std::min(x0, q.x);
    y0 = std::min(y0, q.y);
    x1 = std::max(x1, q.x);
    y1 = std::max(y1, q.y);
  }
  const cv::Rect image_rect({0, 0}, image_size);
  if (!std::isfinite(x0) || !std::isfinite(y0) || !std::isfinite(x1) || !std::isfinite(y1)) return std::nullopt;
  const double lim = 4.0 * std::max(image_size.width, image_size.height);
  if (x0 < -lim || y0 < -lim || x1 > lim || y1 > lim) return std::nullopt;
  const cv::Rect roi = cv::Rect(cv::Point(static_cast<int>(std::floor(x0)) - 1, static_cast<int>(std::floor(y0)) - 1),
                                cv::Point(static_cast<int>(std::ceil(x1)) + 1, static_cast<int>(std::ceil(y1)) + 1)) &
                       image_rect;
  if (roi.empty()) return std::nullopt;

  Placement pl;
  pl.region_label = region.label;
  pl.homography = to_image;
  for (const auto& wb : text.word_boxes) {
    const Quad q = map_box(to_image, wb);
    for (const auto& p : q)
      if (p.x < 0 || p.y < 0 || p.x > image_size.width || p.y > image_size.height) return std::nullopt;
    pl.image_word_quads.push_back(q);
    pl.image_word_bboxes.push_back(tight_bbox(q));
  }
  for (const auto& cb : text.char_boxes) pl.image_char_bboxes.push_back(tight_bbox(map_box(to_image, cb)));

  // Pixel centers sit at +0.5 in continuous coordinates.
  const cv::Matx33d to_roi(1, 0, -0.5 - roi.x, 0, 1, -0.5 - roi.y, 0, 0, 1);
  const cv::Matx33d from_index(1, 0, 0.5, 0, 1, 0.5, 0, 0, 1);
  const cv::Matx33d warp = to_roi * to_image.m * from_index;
  auto warp_alpha = [&](const cv::Mat& src) {
    AlphaPatch p;
    p.roi = roi;
    cv::warpPerspective(src, p.alpha, cv::Mat(warp), roi.size(), cv::INTER_LINEAR, cv::BORDER_CONSTANT, 0);
    return p;
  };
  pl.glyph = warp_alpha(text.alpha);
  if (!text.border_alpha.empty()) {
    pl.border = warp_alpha(text.border_alpha);
    pl.image_mask.roi = roi;
    cv::max(pl.glyph.alpha, pl.border.alpha, pl.image_mask.alpha);
  } else {
    pl.image_mask = pl.glyph;
  }

  // Stray coverage counts any ink at all; the binarization level only governs collisions.
  int on = 0, stray = 0;
  for (int y = 0; y < roi.height; ++y) {
    const auto* row = pl.image_mask.alpha.ptr<double>(y);
    for (int x = 0; x < roi.width; ++x) {
      if (!(row[x] > 0)) continue;
      ++on;
      if (!region.contains(x + roi.x, y + roi.y)) ++stray;
    }
  }
  if (on == 0 || stray > cfg.max_stray_fraction * on) return std::nullopt;
  for (const auto& other : existing)
    if (mask_overlap(other.image_mask, pl.image_mask, cfg.binarize) > 0) return std::nullopt;
  return pl;
}

std::optional<Placement> place_text(const RenderedText& text, const Region& region, const Homography& to_frontal,
                                    const RotatedRect& rect, std::span<const Placement> existing, cv::Size image_size,
                                    Rng& rng, const PlaceConfig& cfg) {
  const cv::Rect2d ink = text.ink_box();
  const double sx = std::max(0.0, (rect.width - ink.width) / 2);
  const double sy = std::max(0.0, (rect.height - ink.height) / 2);
  for (int i = 0; i < cfg.attempts; ++i) {
    const cv::Point2d off(rng.uniform(-sx, sx), rng.uniform(-sy, sy));
    if (auto p = place_text_at(text, region, to_frontal, rect, off, existing, image_size, cfg)) return p;
  }
  return std::nullopt;
}

}  // namespace synthtext
