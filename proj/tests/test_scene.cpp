#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "synthtext/dataset.hpp"
#include "synthtext/errors.hpp"
#include "synthtext/scene.hpp"
#include "test_support.hpp"

using namespace synthtext;
using synthtext::testing::data_dir;

namespace {

GenConfig test_config() {
  GenConfig cfg;
  cfg.seed = 1234;
  cfg.corpus_path = data_dir() / "sample_corpus.txt";
  return cfg;
}

const Resources& resources() {
  static const Resources res = Resources::load(test_config());
  return res;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config json round trip and strictness") {
  GenConfig cfg = test_config();
  cfg.instances_per_image = 7;
  cfg.kind_probs = {0.5, 0.25, 0.25};
  cfg.blend_mode = BlendMode::Alpha;
  cfg.decoration.border_prob = 0.3;
  const nlohmann::json j = config_to_json(cfg);
  const GenConfig back = config_from_json(j);
  CHECK(config_to_json(back) == j);
  CHECK(back.instances_per_image == 7);
  CHECK(back.blend_mode == BlendMode::Alpha);

  nlohmann::json bad = j;
  bad["instances_per_imag"] = 3;
  CHECK_THROWS_AS(config_from_json(bad), ValidationError);
  bad = j;
  bad["kind_probs"]["word"] = 0.9;
  CHECK_THROWS_AS(config_from_json(bad), ValidationError);
  bad = j;
  bad["instances_per_image"] = 0;
  CHECK_THROWS_AS(config_from_json(bad), ValidationError);
  CHECK(GenConfig{}.effective_attempt_budget() == 30);
}

TEST_CASE("shipped config loads with resolved paths") {
  const auto path = data_dir().parent_path() / "configs" / "default.json";
  const GenConfig cfg = load_config(path);
  CHECK(std::filesystem::exists(cfg.corpus_path));
  CHECK(cfg.output_size == cv::Size(512, 512));
  CHECK(cfg.instances_per_image == 10);
  CHECK(cfg.decoration.border_prob == 0.2);
}

TEST_CASE("generated scene satisfies the annotation invariants") {
  const GenConfig cfg = test_config();
  const SceneBundle bundle = make_synthetic_bundle(42);
  const SceneResult a = generate_scene(bundle, cfg, resources(), 3);
  REQUIRE_FALSE(a.rejected);
  CHECK(a.image.size() == cfg.output_size);
  for (const auto& p : annotation_problems(a.annotation)) FAIL_CHECK(p);
  REQUIRE(a.annotation.instances.size() == a.placements.size());
  CHECK(a.placements.size() <= static_cast<std::size_t>(cfg.instances_per_image));
  for (std::size_t i = 0; i < a.placements.size(); ++i) {
    const auto& inst = a.annotation.instances[i];
    CHECK_FALSE(inst.text.empty());
    REQUIRE(inst.word_bboxes.size() == inst.word_quads.size());
    for (std::size_t k = 0; k < inst.word_bboxes.size(); ++k) {
      double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
      for (const auto& p : inst.word_quads[k]) {
        x0 = std::min(x0, p.x);
        y0 = std::min(y0, p.y);
        x1 = std::max(x1, p.x);
        y1 = std::max(y1, p.y);
      }
      CHECK(inst.word_bboxes[k].x == x0);
      CHECK(inst.word_bboxes[k].y == y0);
      CHECK(inst.word_bboxes[k].width == doctest::Approx(x1 - x0).epsilon(1e-12));
      CHECK(inst.word_bboxes[k].height == doctest::Approx(y1 - y0).epsilon(1e-12));
    }
    const auto& pl = a.placements[i];
    const auto region = std::find_if(a.regions.begin(), a.regions.end(),
                                     [&](const Region& r) { return r.label == pl.region_label; });
    REQUIRE(region != a.regions.end());
    CHECK(synthtext::testing::stray_fraction(pl, *region) <= 0.02);
    for (std::size_t j = i + 1; j < a.placements.size(); ++j)
      CHECK(synthtext::testing::overlap_pixels(pl, a.placements[j], 0.05, a.image.size()) == 0);
  }

  const SceneResult b = generate_scene(bundle, cfg, resources(), 3);
  CHECK(cv::norm(a.image, b.image, cv::NORM_INF) == 0);
  CHECK(annotation_to_json(a.annotation) == annotation_to_json(b.annotation));
  const SceneResult c = generate_scene(bundle, cfg, resources(), 4);
  CHECK(annotation_to_json(a.annotation) != annotation_to_json(c.annotation));
}

TEST_CASE("alpha blending mode also produces valid scenes") {
  GenConfig cfg = test_config();
  cfg.blend_mode = BlendMode::Alpha;
  cfg.decoration.border_prob = 1.0;
  cfg.shadow_prob = 1.0;
  const SceneResult r = generate_scene(make_synthetic_bundle(5), cfg, resources(), 0);
  REQUIRE_FALSE(r.rejected);
  for (const auto& p : annotation_problems(r.annotation)) FAIL_CHECK(p);
  for (const auto& inst : r.annotation.instances) CHECK(inst.style.has_border);
}

TEST_CASE("scene with only tiny regions is rejected") {
  SceneBundle b = make_synthetic_bundle(8, {256, 256});
  cv::Mat ucm = cv::Mat::zeros(256, 256, CV_64FC1);
  for (int k = 0; k < 256; k += 20) {
    ucm.row(k).setTo(1.0);
    ucm.col(k).setTo(1.0);
  }
  b.ucm = ucm;
  GenConfig cfg = test_config();
  cfg.output_size = {256, 256};
  const SceneResult r = generate_scene(b, cfg, resources(), 0);
  CHECK(r.rejected);
  CHECK(r.reject_reason == "no suitable regions");
  CHECK(r.annotation.instances.empty());
}

TEST_CASE("annotation json and validation") {
  SceneAnnotation ann;
  ann.image_id = "x";
  ann.width = 100;
  ann.height = 80;
  TextInstance t;
  t.text = "hello";
  t.kind = "word";
  t.words = {"hello"};
  t.word_quads = {Quad{cv::Point2d(10, 10), {40, 12}, {41, 30}, {11, 28}}};
  t.word_bboxes = {tight_bbox(t.word_quads[0])};
  t.char_bboxes = {{10, 10, 5, 5}};
  ann.instances.push_back(t);
  CHECK(annotation_problems(ann).empty());
  const SceneAnnotation back = annotation_from_json(annotation_to_json(ann));
  CHECK(annotation_to_json(back) == annotation_to_json(ann));

  SceneAnnotation bad = ann;
  bad.instances[0].text.clear();
  CHECK_FALSE(annotation_problems(bad).empty());
  bad = ann;
  bad.instances[0].word_bboxes[0].x = 90;
  CHECK(annotation_problems(bad).size() >= 1);
  bad = ann;
  bad.instances[0].word_bboxes.clear();
  bad.instances[0].word_quads.clear();
  CHECK_FALSE(annotation_problems(bad).empty());
}

TEST_CASE("preview") {
  const cv::Mat img(60, 80, CV_64FC3, cv::Scalar(0.2, 0.3, 0.4));
  SceneAnnotation ann;
  ann.width = 80;
  ann.height = 60;
  CHECK(cv::norm(render_preview(img, ann), img, cv::NORM_INF) == 0);
  TextInstance t;
  t.word_bboxes = {{10, 10, 30, 20}};
  ann.instances.push_back(t);
  const cv::Mat p = render_preview(img, ann);
  CHECK(p.size() == img.size());
  CHECK(p.at<cv::Vec3d>(10, 20) == cv::Vec3d(1, 0, 0));
  CHECK(p.at<cv::Vec3d>(20, 25) == img.at<cv::Vec3d>(20, 25));
  CHECK(p.at<cv::Vec3d>(50, 70) == img.at<cv::Vec3d>(50, 70));
}

TEST_CASE("dataset run is independent of the worker count") {
  const GenConfig cfg = test_config();
  const BundleSource src = BundleSource::synthetic(77, 3, {256, 256});
  GenConfig small = cfg;
  small.output_size = {256, 256};
  small.instances_per_image = 4;
  const auto root = std::filesystem::temp_directory_path() / "synthtext_scene_test";
  std::filesystem::remove_all(root);
  DatasetOptions o1{root / "w1", 5, 1, true, true, 16};
  DatasetOptions o3{root / "w3", 5, 3, false, false, 16};
  const StatsReport s1 = run_dataset(src, small, resources(), o1);
  const StatsReport s3 = run_dataset(src, small, resources(), o3);
  CHECK(s1.emitted + s1.rejected == 5);
  CHECK(s1.emitted == s3.emitted);
  CHECK(slurp(root / "w1" / "annotations.jsonl") == slurp(root / "w3" / "annotations.jsonl"));
  for (const auto& e : std::filesystem::directory_iterator(root / "w1" / "images"))
    CHECK(slurp(e.path()) == slurp(root / "w3" / "images" / e.path().filename()));
  const ValidationReport v = validate_dataset(root / "w1");
  CHECK(v.invalid == 0);
  CHECK(v.records == s1.emitted);
  const nlohmann::json st = dataset_stats(root / "w1");
  CHECK(st.at("images").get<std::size_t>() == s1.emitted);
  if (s1.emitted > 0) CHECK_FALSE(std::filesystem::is_empty(root / "w1" / "targets"));
  std::filesystem::remove_all(root);
}
