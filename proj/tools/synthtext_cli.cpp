// Command-line front end: dataset generation, inspection and evaluation.
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "synthtext/chroma.hpp"
#include "synthtext/dataset.hpp"
#include "synthtext/errors.hpp"
#include "synthtext/eval.hpp"
#include "synthtext/raster_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace synthtext;

namespace {

int cmd_generate(const fs::path& config_path, const fs::path& out, std::size_t num, std::optional<std::uint64_t> seed,
                 int workers, bool preview, bool emit_targets, const fs::path& bundle_dir, std::size_t synthetic) {
  GenConfig cfg = load_config(config_path);
  if (seed) cfg.seed = *seed;
  const Resources res = Resources::load(cfg);
  const BundleSource src =
      bundle_dir.empty() ? BundleSource::synthetic(cfg.seed, synthetic) : BundleSource::from_directory(bundle_dir);
  DatasetOptions opts;
  opts.out_dir = out;
  opts.num_scenes = num;
  opts.workers = workers;
  opts.preview = preview;
  opts.emit_targets = emit_targets;
  const StatsReport stats = run_dataset(src, cfg, res, opts);
  std::cout << stats.to_json().dump(2) << "\n";
  return 0;
}

int cmd_validate(const fs::path& dir) {
  const ValidationReport rep = validate_dataset(dir);
  for (const auto& p : rep.problems) std::cerr << p << "\n";
  std::cout << json{{"records", rep.records}, {"invalid", rep.invalid}}.dump() << "\n";
  return rep.invalid == 0 ? 0 : 1;
}

std::map<std::string, std::vector<ScoredBox>> read_boxes(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot read " + path.string());
  std::map<std::string, std::vector<ScoredBox>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    auto& boxes = out[j.at("image").get<std::string>()];
    auto box = [](const json& b) { return cv::Rect2d(b[0], b[1], b[2], b[3]); };
    if (j.contains("detections")) {
      for (const auto& d : j["detections"]) boxes.push_back({box(d.at("bbox")), d.value("score", 1.0)});
    } else {
      for (const auto& inst : j.at("instances"))
        for (const auto& b : inst.at("word_bboxes")) boxes.push_back({box(b), 1.0});
    }
  }
  return out;
}

int cmd_eval(const fs::path& gt_path, const fs::path& det_path, double thr, const fs::path& curve_path) {
  const auto gt = read_boxes(gt_path);
  auto det = read_boxes(det_path);
  std::vector<std::vector<ScoredBox>> dets;
  std::vector<std::vector<cv::Rect2d>> gts;
  for (const auto& [image, boxes] : gt) {
    std::vector<cv::Rect2d> g;
    for (const auto& b : boxes) g.push_back(b.box);
    gts.push_back(std::move(g));
    dets.push_back(det[image]);
  }
  std::size_t unmatched_images = 0;
  for (const auto& [image, boxes] : det)
    if (!gt.count(image)) {
      ++unmatched_images;
      gts.emplace_back();
      dets.push_back(boxes);
    }
  const PrCurve c = pr_sweep(dets, gts, thr);
  json report = {{"iou_threshold", thr},
                 {"gt_boxes", c.gt_count},
                 {"precision", c.best.precision},
                 {"recall", c.best.recall},
                 {"f", c.best.f},
                 {"score_threshold", c.best.threshold},
                 {"max_recall", c.max_recall},
                 {"images_without_gt", unmatched_images}};
  std::cout << report.dump(2) << "\n";
  if (!curve_path.empty()) {
    std::ofstream out(curve_path);
    out << "# recall precision threshold\n";
    for (const auto& p : c.points) out << p.recall << ' ' << p.precision << ' ' << p.threshold << '\n';
    if (!out) throw IoError("cannot write " + curve_path.string());
  }
  return 0;
}

int cmd_make_bundles(const fs::path& out, std::size_t count, std::uint64_t seed, int width, int height) {
  for (std::size_t i = 0; i < count; ++i) {
    SceneBundle b = make_synthetic_bundle(derive_seed(seed, i), {width, height});
    save_bundle(out, b);
  }
  std::cout << "wrote " << count << " bundles to " << out << "\n";
  return 0;
}

int cmd_learn_palette(const fs::path& crops_dir, const fs::path& out, std::uint64_t seed) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(crops_dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<cv::Mat> crops;
  for (const auto& f : files) {
    cv::Mat m = cv::imread(f.string(), cv::IMREAD_COLOR);
    if (!m.empty()) crops.push_back(m);
  }
  if (crops.empty()) throw IngestionError("no readable images in " + crops_dir.string());
  Rng rng(seed);
  std::size_t skipped = 0;
  const Palette p = learn_palette(crops, rng, {}, &skipped);
  save_palette(out, p);
  std::cout << "learned " << p.pairs.size() << " pairs (" << skipped << " single-color crops skipped)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  cv::setNumThreads(1);
  CLI::App app{"Synthetic scene-text dataset generator"};
  app.require_subcommand(1);

  fs::path config, out, bundles, dataset, gt, det, curve, crops;
  std::size_t num = 100, synthetic = 50, count = 50;
  std::uint64_t seed_value = 0;
  int workers = 1, width = 512, height = 512;
  bool preview = false, emit_targets = false;
  double iou_thr = 0.5;

  auto* gen = app.add_subcommand("generate", "Render a dataset of synthetic text scenes");
  gen->add_option("--config", config, "JSON generation config")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", out, "Output directory")->required();
  gen->add_option("--num", num, "Number of scenes")->check(CLI::PositiveNumber);
  auto* seed_opt = gen->add_option("--seed", seed_value, "Overrides the config seed");
  gen->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  gen->add_flag("--preview", preview, "Also write previews with word boxes");
  gen->add_flag("--emit-targets", emit_targets, "Also write detection grid targets");
  gen->add_option("--bundles", bundles, "Bundle directory; synthetic rooms when omitted")->check(CLI::ExistingDirectory);
  gen->add_option("--synthetic", synthetic, "Number of synthetic bundles to cycle through")->check(CLI::PositiveNumber);

  auto* st = app.add_subcommand("stats", "Summarize a generated dataset");
  st->add_option("--dataset", dataset)->required()->check(CLI::ExistingDirectory);

  auto* val = app.add_subcommand("validate", "Check every annotation of a dataset");
  val->add_option("--dataset", dataset)->required()->check(CLI::ExistingDirectory);

  auto* ev = app.add_subcommand("eval", "Precision/recall of detections against ground truth");
  ev->add_option("--gt", gt, "Ground-truth annotations (JSONL)")->required()->check(CLI::ExistingFile);
  ev->add_option("--det", det, "Detections (JSONL)")->required()->check(CLI::ExistingFile);
  ev->add_option("--iou", iou_thr, "IoU threshold")->check(CLI::Range(0.0, 1.0));
  ev->add_option("--curve", curve, "Write the PR curve here");

  auto* mb = app.add_subcommand("make-bundles", "Write synthetic room bundles");
  mb->add_option("--out", out)->required();
  mb->add_option("--count", count)->check(CLI::PositiveNumber);
  mb->add_option("--seed", seed_value);
  mb->add_option("--width", width)->check(CLI::Range(16, 8192));
  mb->add_option("--height", height)->check(CLI::Range(16, 8192));

  auto* lp = app.add_subcommand("learn-palette", "Learn fg/bg color pairs from word crops");
  lp->add_option("--crops", crops)->required()->check(CLI::ExistingDirectory);
  lp->add_option("--out", out)->required();
  lp->add_option("--seed", seed_value);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen)
      return cmd_generate(config, out, num, seed_opt->count() ? std::optional(seed_value) : std::nullopt, workers,
                          preview, emit_targets, bundles, synthetic);
    if (*st) {
      std::cout << dataset_stats(dataset).dump(2) << "\n";
      return 0;
    }
    if (*val) return cmd_validate(dataset);
    if (*ev) return cmd_eval(gt, det, iou_thr, curve);
    if (*mb) return cmd_make_bundles(out, count, seed_value, width, height);
    if (*lp) return cmd_learn_palette(crops, out, seed_value);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
