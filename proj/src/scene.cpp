#include "synthtext/scene.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>

#include <opencv2/imgproc.hpp>

#include "synthtext/errors.hpp"

namespace synthtext {

namespace fs = std::filesystem;
using nlohmann::json;

void GenConfig::validate() const {
  if (instances_per_image < 1) throw ValidationError("instances_per_image must be at least 1");
  double sum = 0;
  for (double p : kind_probs) {
    if (!(p >= 0)) throw ValidationError("kind_probs must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("kind_probs must sum to 1");
  filter.validate();
  auto prob = [](double p, const char* name) {
    if (!(p >= 0 && p <= 1)) throw ValidationError(std::string(name) + " must lie in [0,1]");
  };
  prob(decoration.border_prob, "border_prob");
  prob(decoration.shift_rule_prob, "border_shift_rule_prob");
  prob(shadow_prob, "shadow_prob");
  if (output_size.width < 16 || output_size.height < 16) throw ValidationError("output size must be at least 16x16");
  if (attempt_budget < 0) throw ValidationError("attempt_budget must be non-negative");
  if (!(ucm_threshold >= 0 && ucm_threshold <= 1)) throw ValidationError("ucm_threshold must lie in [0,1]");
  if (text.min_size_px < kMinTextSize || text.max_size_px < text.min_size_px)
    throw ValidationError("text size range is invalid");
  if (!(text.fill_min > 0 && text.fill_min <= text.fill_max && text.fill_max <= 1))
    throw ValidationError("text fill range must satisfy 0 < min <= max <= 1");
  if (!(text.fit_margin > 0 && text.fit_margin <= 1)) throw ValidationError("fit_margin must lie in (0,1]");
  if (place.attempts < 1) throw ValidationError("placement attempts must be at least 1");
  if (ransac.iterations < 1) throw ValidationError("ransac iterations must be at least 1");
}

namespace {

const char* blend_name(BlendMode m) { return m == BlendMode::Poisson ? "poisson" : "alpha"; }

BlendMode parse_blend(const std::string& s) {
  if (s == "poisson") return BlendMode::Poisson;
  if (s == "alpha") return BlendMode::Alpha;
  throw ValidationError("blend_mode must be \"poisson\" or \"alpha\"");
}

// Copies j[key] into `out` when present; type errors become ValidationError.
template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config field '") + key + "': " + e.what());
  }
}

void check_keys(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
  std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ValidationError("unknown config field '" + k + "' in " + where);
}

}  // namespace

GenConfig config_from_json(const json& j) {
  check_keys(j,
             {"seed", "instances_per_image", "kind_probs", "filter", "blend_mode", "border_prob",
              "border_lightness_shift", "border_shift_rule_prob", "shadow_prob", "output_size", "attempt_budget",
              "ucm_threshold", "fallback_segmentation", "ransac", "text", "placement", "corpus", "font_dir",
              "font_families", "palette"},
             "config");
  GenConfig c;
  read(j, "seed", c.seed);
  read(j, "instances_per_image", c.instances_per_image);
  if (j.contains("kind_probs")) {
    const json& k = j.at("kind_probs");
    check_keys(k, {"word", "line", "paragraph"}, "kind_probs");
    c.kind_probs = {0, 0, 0};
    read(k, "word", c.kind_probs[0]);
    read(k, "line", c.kind_probs[1]);
    read(k, "paragraph", c.kind_probs[2]);
  }
  if (j.contains("filter")) {
    const json& f = j.at("filter");
    check_keys(f, {"min_area_px", "max_aspect_ratio", "max_normal_view_angle_deg", "max_texture_score",
                   "aspect_in_image_frame"},
               "filter");
    read(f, "min_area_px", c.filter.min_area_px);
    read(f, "max_aspect_ratio", c.filter.max_aspect_ratio);
    read(f, "max_normal_view_angle_deg", c.filter.max_normal_view_angle_deg);
    read(f, "max_texture_score", c.filter.max_texture_score);
    read(f, "aspect_in_image_frame", c.filter.aspect_in_image_frame);
  }
  if (j.contains("blend_mode")) c.blend_mode = parse_blend(j.at("blend_mode").get<std::string>());
  read(j, "border_prob", c.decoration.border_prob);
  read(j, "border_lightness_shift", c.decoration.lightness_shift);
  read(j, "border_shift_rule_prob", c.decoration.shift_rule_prob);
  read(j, "shadow_prob", c.shadow_prob);
  if (j.contains("output_size")) {
    const json& s = j.at("output_size");
    check_keys(s, {"width", "height"}, "output_size");
    read(s, "width", c.output_size.width);
    read(s, "height", c.output_size.height);
  }
  read(j, "attempt_budget", c.attempt_budget);
  read(j, "ucm_threshold", c.ucm_threshold);
  if (j.contains("fallback_segmentation")) {
    const json& f = j.at("fallback_segmentation");
    check_keys(f, {"scale", "min_size"}, "fallback_segmentation");
    read(f, "scale", c.fallback.scale);
    read(f, "min_size", c.fallback.min_size);
  }
  if (j.contains("ransac")) {
    const json& r = j.at("ransac");
    check_keys(r, {"iterations", "inlier_tol_rel", "min_inlier_fraction", "max_points"}, "ransac");
    read(r, "iterations", c.ransac.iterations);
    read(r, "inlier_tol_rel", c.ransac.inlier_tol_rel);
    read(r, "min_inlier_fraction", c.ransac.min_inlier_fraction);
    read(r, "max_points", c.ransac.max_points);
  }
  if (j.contains("text")) {
    const json& t = j.at("text");
    check_keys(t, {"max_token_length", "max_line_run", "max_paragraph_run", "min_size_px", "max_size_px", "fill_min",
                   "fill_max", "fit_margin", "border_width_frac"},
               "text");
    read(t, "max_token_length", c.text.sampler.max_token_length);
    read(t, "max_line_run", c.text.sampler.max_line_run);
    read(t, "max_paragraph_run", c.text.sampler.max_paragraph_run);
    read(t, "min_size_px", c.text.min_size_px);
    read(t, "max_size_px", c.text.max_size_px);
    read(t, "fill_min", c.text.fill_min);
    read(t, "fill_max", c.text.fill_max);
    read(t, "fit_margin", c.text.fit_margin);
    read(t, "border_width_frac", c.text.border_width_frac);
  }
  if (j.contains("placement")) {
    const json& p = j.at("placement");
    check_keys(p, {"attempts", "max_stray_fraction", "binarize"}, "placement");
    read(p, "attempts", c.place.attempts);
    read(p, "max_stray_fraction", c.place.max_stray_fraction);
    read(p, "binarize", c.place.binarize);
  }
  if (j.contains("corpus")) c.corpus_path = j.at("corpus").get<std::string>();
  if (j.contains("font_dir")) c.font_dir = j.at("font_dir").get<std::string>();
  read(j, "font_families", c.font_families);
  if (j.contains("palette")) c.palette_path = j.at("palette").get<std::string>();
  c.validate();
  return c;
}

json config_to_json(const GenConfig& c) {
  return {
      {"seed", c.seed},
      {"instances_per_image", c.instances_per_image},
      {"kind_probs", {{"word", c.kind_probs[0]}, {"line", c.kind_probs[1]}, {"paragraph", c.kind_probs[2]}}},
      {"filter",
       {{"min_area_px", c.filter.min_area_px},
        {"max_aspect_ratio", c.filter.max_aspect_ratio},
        {"max_normal_view_angle_deg", c.filter.max_normal_view_angle_deg},
        {"max_texture_score", c.filter.max_texture_score},
        {"aspect_in_image_frame", c.filter.aspect_in_image_frame}}},
      {"blend_mode", blend_name(c.blend_mode)},
      {"border_prob", c.decoration.border_prob},
      {"border_lightness_shift", c.decoration.lightness_shift},
      {"border_shift_rule_prob", c.decoration.shift_rule_prob},
      {"shadow_prob", c.shadow_prob},
      {"output_size", {{"width", c.output_size.width}, {"height", c.output_size.height}}},
      {"attempt_budget", c.attempt_budget},
      {"ucm_threshold", c.ucm_threshold},
      {"fallback_segmentation", {{"scale", c.fallback.scale}, {"min_size", c.fallback.min_size}}},
      {"ransac",
       {{"iterations", c.ransac.iterations},
        {"inlier_tol_rel", c.ransac.inlier_tol_rel},
        {"min_inlier_fraction", c.ransac.min_inlier_fraction},
        {"max_points", c.ransac.max_points}}},
      {"text",
       {{"max_token_length", c.text.sampler.max_token_length},
        {"max_line_run", c.text.sampler.max_line_run},
        {"max_paragraph_run", c.text.sampler.max_paragraph_run},
        {"min_size_px", c.text.min_size_px},
        {"max_size_px", c.text.max_size_px},
        {"fill_min", c.text.fill_min},
        {"fill_max", c.text.fill_max},
        {"fit_margin", c.text.fit_margin},
        {"border_width_frac", c.text.border_width_frac}}},
      {"placement",
       {{"attempts", c.place.attempts},
        {"max_stray_fraction", c.place.max_stray_fraction},
        {"binarize", c.place.binarize}}},
      {"corpus", c.corpus_path.string()},
      {"font_dir", c.font_dir.string()},
      {"font_families", c.font_families},
      {"palette", c.palette_path.string()},
  };
}

GenConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw IngestionError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  GenConfig c = config_from_json(j);
  const fs::path base = path.parent_path();
  for (fs::path* p : {&c.corpus_path, &c.font_dir, &c.palette_path})
    if (!p->empty() && p->is_relative()) *p = base / *p;
  return c;
}

Palette builtin_palette() {
  // Dark-on-light and light-on-dark pairs spread over common surface colors.
  static const double table[][6] = {
      {15, 0, 0, 92, 0, 2},       {95, 0, 0, 20, 0, 0},     {20, 5, -30, 85, -2, 10},  {90, 2, 8, 35, 10, -40},
      {30, 45, 30, 88, 3, 15},    {92, -2, 5, 45, 55, 35},  {25, -20, 15, 80, -15, 40}, {85, 5, 70, 30, -25, 10},
      {10, 0, 0, 60, 0, 0},       {98, 0, 0, 50, 0, -5},    {35, 20, -45, 70, 10, 60}, {80, 0, 75, 25, 5, -35},
      {45, 60, 45, 95, 0, 5},     {20, 10, 10, 70, 15, 25}, {90, -5, 20, 55, -30, 25}, {25, 30, -50, 92, -3, 3},
      {60, -40, 35, 15, 2, -10},  {18, 2, -8, 75, -5, -20}, {88, 10, 15, 40, 25, 30},  {30, -10, -20, 65, 40, 55},
  };
  Palette p;
  for (const auto& r : table) p.pairs.push_back({{r[0], r[1], r[2]}, {r[3], r[4], r[5]}});
  return p;
}

Resources Resources::load(const GenConfig& cfg) {
  if (cfg.corpus_path.empty()) throw ValidationError("config has no corpus path");
  Resources r{load_corpus(cfg.corpus_path),
              FontCatalog::load_directory(cfg.font_dir.empty() ? default_font_dir() : cfg.font_dir, cfg.font_families),
              cfg.palette_path.empty() ? builtin_palette() : load_palette(cfg.palette_path)};
  if (r.palette.pairs.empty()) throw ValidationError("palette is empty");
  return r;
}

namespace {

json rect_json(const cv::Rect2d& r) { return json::array({r.x, r.y, r.width, r.height}); }

cv::Rect2d rect_from(const json& j) {
  if (!j.is_array() || j.size() != 4) throw ValidationError("box must be [x, y, w, h]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

}  // namespace

json annotation_to_json(const SceneAnnotation& ann) {
  json instances = json::array();
  for (const auto& inst : ann.instances) {
    json wb = json::array(), wq = json::array(), cb = json::array();
    for (const auto& b : inst.word_bboxes) wb.push_back(rect_json(b));
    for (const auto& q : inst.word_quads) {
      json flat = json::array();
      for (const auto& p : q) {
        flat.push_back(p.x);
        flat.push_back(p.y);
      }
      wq.push_back(flat);
    }
    for (const auto& b : inst.char_bboxes) cb.push_back(rect_json(b));
    instances.push_back({{"text", inst.text},
                         {"kind", inst.kind},
                         {"words", inst.words},
                         {"word_bboxes", wb},
                         {"word_quads", wq},
                         {"char_bboxes", cb},
                         {"font", inst.style.font_id},
                         {"size_px", inst.style.size_px},
                         {"border", inst.style.has_border},
                         {"border_width_px", inst.style.border_width_px},
                         {"region_label", inst.region_label}});
  }
  return {{"image", ann.image_id},
          {"source", ann.source},
          {"width", ann.width},
          {"height", ann.height},
          {"instances", instances}};
}

SceneAnnotation annotation_from_json(const json& j) {
  try {
    SceneAnnotation a;
    a.image_id = j.at("image").get<std::string>();
    a.source = j.value("source", "");
    a.width = j.value("width", 0);
    a.height = j.value("height", 0);
    for (const auto& ji : j.at("instances")) {
      TextInstance t;
      t.text = ji.at("text").get<std::string>();
      t.kind = ji.value("kind", "");
      t.words = ji.value("words", std::vector<std::string>{});
      for (const auto& b : ji.at("word_bboxes")) t.word_bboxes.push_back(rect_from(b));
      for (const auto& q : ji.value("word_quads", json::array())) {
        if (!q.is_array() || q.size() != 8) throw ValidationError("word quad must have 8 numbers");
        Quad quad;
        for (int k = 0; k < 4; ++k) quad[k] = {q[2 * k].get<double>(), q[2 * k + 1].get<double>()};
        t.word_quads.push_back(quad);
      }
      for (const auto& b : ji.value("char_bboxes", json::array())) t.char_bboxes.push_back(rect_from(b));
      t.style.font_id = ji.value("font", "");
      t.style.size_px = ji.value("size_px", 0);
      t.style.has_border = ji.value("border", false);
      t.style.border_width_px = ji.value("border_width_px", 0);
      t.region_label = ji.value("region_label", 0);
      a.instances.push_back(std::move(t));
    }
    return a;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed annotation record: ") + e.what());
  }
}

std::vector<std::string> annotation_problems(const SceneAnnotation& ann) {
  std::vector<std::string> out;
  if (ann.image_id.empty()) out.push_back("missing image id");
  if (ann.width <= 0 || ann.height <= 0) out.push_back("missing image size");
  const double W = ann.width, H = ann.height;
  auto in_bounds = [&](const cv::Rect2d& b) {
    return b.x >= 0 && b.y >= 0 && b.width >= 0 && b.height >= 0 && b.x + b.width <= W + 1e-9 &&
           b.y + b.height <= H + 1e-9;
  };
  for (std::size_t i = 0; i < ann.instances.size(); ++i) {
    const auto& t = ann.instances[i];
    const std::string at = "instance " + std::to_string(i) + ": ";
    if (t.text.empty()) out.push_back(at + "empty text");
    if (t.word_bboxes.empty()) out.push_back(at + "no word boxes");
    if (!t.word_quads.empty() && t.word_quads.size() != t.word_bboxes.size())
      out.push_back(at + "word quad and box counts differ");
    for (std::size_t k = 0; k < t.word_bboxes.size(); ++k) {
      if (!in_bounds(t.word_bboxes[k])) out.push_back(at + "word box " + std::to_string(k) + " out of bounds");
      if (k < t.word_quads.size()) {
        const cv::Rect2d tb = tight_bbox(t.word_quads[k]);
        const cv::Rect2d& b = t.word_bboxes[k];
        if (std::abs(tb.x - b.x) > 1e-6 || std::abs(tb.y - b.y) > 1e-6 || std::abs(tb.width - b.width) > 1e-6 ||
            std::abs(tb.height - b.height) > 1e-6)
          out.push_back(at + "word box " + std::to_string(k) + " is not the tight bound of its quad");
      }
    }
    for (std::size_t k = 0; k < t.char_bboxes.size(); ++k)
      if (!in_bounds(t.char_bboxes[k])) out.push_back(at + "char box " + std::to_string(k) + " out of bounds");
  }
  return out;
}

namespace {

// Nearest-neighbour resize that keeps one-pixel boundaries when shrinking.
cv::Mat resize_boundaries(const cv::Mat& ucm, cv::Size size) {
  if (ucm.size() == size) return ucm;
  cv::Mat src = ucm;
  const int k = static_cast<int>(std::ceil(std::max(static_cast<double>(ucm.cols) / size.width,
                                                    static_cast<double>(ucm.rows) / size.height)));
  if (k > 1) cv::dilate(ucm, src, cv::getStructuringElement(cv::MORPH_RECT, {k, k}));
  cv::Mat out;
  cv::resize(src, out, size, 0, 0, cv::INTER_NEAREST);
  return out;
}

struct Colored {
  Placement placement;
  cv::Vec3d fg, border;
  bool shadow = false;
};

// Paints `color` under `alpha` (roi-local) into `layer`.
void paint(cv::Mat& layer, const AlphaPatch& patch, const cv::Vec3d& color, cv::Point shift = {0, 0}, double gain = 1) {
  for (int y = 0; y < patch.roi.height; ++y) {
    const int iy = y + patch.roi.y + shift.y;
    if (iy < 0 || iy >= layer.rows) continue;
    const auto* a = patch.alpha.ptr<double>(y);
    auto* out = layer.ptr<cv::Vec3d>(iy);
    for (int x = 0; x < patch.roi.width; ++x) {
      const int ix = x + patch.roi.x + shift.x;
      if (ix < 0 || ix >= layer.cols) continue;
      const double w = std::clamp(a[x] * gain, 0.0, 1.0);
      if (w > 0) out[ix] = w * color + (1 - w) * out[ix];
    }
  }
}

void accumulate(cv::Mat& alpha, const AlphaPatch& patch) {
  if (patch.alpha.empty()) return;
  cv::Mat target = alpha(patch.roi);
  cv::max(target, patch.alpha, target);
}

}  // namespace

SceneResult generate_scene(const SceneBundle& bundle, const GenConfig& cfg, const Resources& res,
                           std::uint64_t index) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(derive_seed(cfg.seed, index));
  SceneResult out;
  const cv::Size size = cfg.output_size;

  cv::Mat image = bundle.image, depth = bundle.depth;
  std::optional<cv::Mat> ucm = bundle.ucm;
  if (image.size() != size) {
    const bool shrink = image.cols > size.width || image.rows > size.height;
    cv::resize(bundle.image, image, size, 0, 0, shrink ? cv::INTER_AREA : cv::INTER_LINEAR);
    cv::resize(bundle.depth, depth, size, 0, 0, cv::INTER_NEAREST);
    if (ucm) ucm = resize_boundaries(*ucm, size);
  }
  out.image = image.clone();
  out.annotation.image_id = bundle.id + "#" + std::to_string(index);  // run_dataset substitutes the file path
  out.annotation.source = bundle.id;
  out.annotation.width = size.width;
  out.annotation.height = size.height;

  const SegmentMap seg = ucm ? threshold_ucm(*ucm, cfg.ucm_threshold) : fallback_segment(image, cfg.fallback);
  out.regions = extract_regions(seg);
  const CameraModel cam = CameraModel::for_image(size);
  std::vector<std::optional<Plane>> planes(out.regions.size());
  for (std::size_t i = 0; i < out.regions.size(); ++i)
    if (out.regions[i].area_px >= cfg.filter.min_area_px)
      planes[i] = fit_plane_ransac(out.regions[i], depth, cam, cfg.ransac, rng);
  out.assessments = assess_regions(out.regions, planes, cfg.filter, image, cam);

  std::vector<const RegionAssessment*> candidates;
  for (const auto& a : out.assessments)
    if (a.verdict == RegionVerdict::Accepted) candidates.push_back(&a);
  auto finish = [&] {
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  };
  if (candidates.empty()) {
    out.rejected = true;
    out.reject_reason = "no suitable regions";
    return finish();
  }

  std::vector<LabColor> region_color(out.regions.size());
  std::vector<bool> have_color(out.regions.size(), false);
  const FitConfig fit{cfg.text.fit_margin, cfg.text.min_size_px, cfg.text.max_size_px};
  std::vector<Colored> colored;
  std::vector<Placement> placed;
  const int budget = cfg.effective_attempt_budget();
  while (out.attempts < budget && static_cast<int>(placed.size()) < cfg.instances_per_image) {
    ++out.attempts;
    const RegionAssessment& cand = *candidates[rng.uniform_index(candidates.size())];
    const Region& region = out.regions[cand.index];

    const TextKind kind = sample_kind(cfg.kind_probs, rng);
    TextSample sample = sample_text(res.corpus, kind, rng, cfg.text.sampler);
    for (int redraw = 0; redraw < 5 && !renderable(sample.content); ++redraw)
      sample = sample_text(res.corpus, kind, rng, cfg.text.sampler);
    if (!renderable(sample.content)) continue;
    const std::size_t font = rng.uniform_index(res.fonts.size());
    const double fill = rng.uniform(cfg.text.fill_min, cfg.text.fill_max);
    std::optional<RenderedText> text;
    try {
      text = fit_text_to_rect(sample, res.fonts, font, cand.rect.width * fill, cand.rect.height * fill, fit);
    } catch (const ValidationError&) {
      continue;
    }
    if (!text) continue;

    if (!have_color[cand.index]) {
      region_color[cand.index] = mean_lab(image, region.mask, region.bbox.tl());
      have_color[cand.index] = true;
    }
    const ColorPair& pair = select_pair(region_color[cand.index], res.palette);
    const auto deco = choose_decoration(pair.fg, pair.bg, rng, cfg.decoration);
    if (deco) {
      const int width = std::max(1, static_cast<int>(std::lround(cfg.text.border_width_frac * text->style.size_px)));
      apply_border(*text, width);
    }
    const bool shadow = rng.bernoulli(cfg.shadow_prob);

    auto pl = place_text(*text, region, cand.to_frontal, cand.rect, placed, size, rng, cfg.place);
    if (!pl) continue;

    TextInstance inst;
    inst.text = text->text.content;
    inst.kind = to_string(text->text.kind);
    inst.words = text->words;
    inst.word_bboxes = pl->image_word_bboxes;
    inst.word_quads = pl->image_word_quads;
    inst.char_bboxes = pl->image_char_bboxes;
    inst.style = text->style;
    inst.region_label = region.label;
    out.annotation.instances.push_back(std::move(inst));

    colored.push_back({*pl, lab_to_rgb(pair.fg), deco ? lab_to_rgb(deco->color) : cv::Vec3d{}, shadow});
    placed.push_back(std::move(*pl));
  }
  out.placements = placed;
  if (placed.empty()) {
    out.rejected = true;
    out.reject_reason = "no text placed";
    return finish();
  }

  // Text layer: the background with the colored glyphs painted over it.
  cv::Mat layer = image.clone();
  cv::Mat alpha = cv::Mat::zeros(size, CV_64FC1);
  for (const auto& c : colored) {
    const Placement& p = c.placement;
    if (c.shadow) paint(layer, p.glyph, {0, 0, 0}, {2, 2}, 0.5);
    if (!p.border.alpha.empty()) paint(layer, p.border, c.border);
    paint(layer, p.glyph, c.fg);
    accumulate(alpha, p.image_mask);
  }

  BlendRequest req{image, layer, cv::Mat(), cfg.blend_mode};
  if (cfg.blend_mode == BlendMode::Poisson) {
    req.mask = blend_mask_from_alpha(alpha, cfg.place.binarize, 2);
    out.image = poisson_blend(req);
  } else {
    out.image = alpha_blend(req, alpha);
  }
  return finish();
}

cv::Mat render_preview(const cv::Mat& image, const SceneAnnotation& ann) {
  cv::Mat out = image.clone();
  const cv::Scalar red = image.depth() == CV_8U ? cv::Scalar(0, 0, 255) : cv::Scalar(1.0, 0, 0);
  for (const auto& inst : ann.instances)
    for (const auto& b : inst.word_bboxes) {
      const cv::Point p0(static_cast<int>(std::floor(b.x)), static_cast<int>(std::floor(b.y)));
      const cv::Point p1(static_cast<int>(std::ceil(b.x + b.width)) - 1, static_cast<int>(std::ceil(b.y + b.height)) - 1);
      cv::rectangle(out, p0, p1, red, 2, cv::LINE_8);
    }
  return out;
}

}  // namespace synthtext
