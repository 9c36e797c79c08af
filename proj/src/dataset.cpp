#include "synthtext/dataset.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include <opencv2/imgcodecs.hpp>

#include "synthtext/dettarget.hpp"
#include "synthtext/errors.hpp"
#include "synthtext/raster_io.hpp"

namespace synthtext {

namespace fs = std::filesystem;
using nlohmann::json;

BundleSource BundleSource::from_directory(const fs::path& dir) {
  auto ids = std::make_shared<std::vector<std::string>>(list_bundle_ids(dir));
  if (ids->empty()) throw IngestionError("no bundles (<id>.png + <id>.depth.raw) in " + dir.string());
  return {ids->size(), [dir, ids](std::size_t i) { return load_bundle(dir, (*ids)[i]); }};
}

BundleSource BundleSource::synthetic(std::uint64_t seed, std::size_t count, cv::Size size) {
  return {count, [seed, size](std::size_t i) { return make_synthetic_bundle(derive_seed(seed, i), size); }};
}

std::string scene_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%06zu", index);
  return buf;
}

json StatsReport::to_json() const {
  json hist = json::object();
  for (const auto& [k, v] : instance_histogram) hist[std::to_string(k)] = v;
  return {{"requested", requested},
          {"emitted", emitted},
          {"rejected", rejected},
          {"reject_reasons", reject_reasons},
          {"instances_histogram", hist},
          {"mean_instances_per_image", mean_instances},
          {"mean_seconds_per_scene", mean_seconds},
          {"total_seconds", total_seconds},
          {"workers", workers}};
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

void write_png(const fs::path& path, const cv::Mat& rgb) {
  if (!cv::imwrite(path.string(), to_bgr8(rgb))) throw IoError("cannot write " + path.string());
}

struct SceneOutcome {
  bool done = false;
  bool rejected = false;
  std::string reason;
  std::string record;  // JSONL line without newline
  int instances = 0;
  double seconds = 0;
  std::vector<std::string> files;
};

}  // namespace

StatsReport run_dataset(const BundleSource& bundles, const GenConfig& cfg, const Resources& res,
                        const DatasetOptions& opts) {
  if (bundles.count == 0) throw ValidationError("no input bundles");
  if (opts.workers < 1) throw ValidationError("workers must be at least 1");
  cfg.validate();
  const fs::path images = opts.out_dir / "images";
  std::error_code ec;
  fs::create_directories(images, ec);
  if (ec) throw IoError("cannot create " + images.string() + ": " + ec.message());
  if (opts.preview) fs::create_directories(opts.out_dir / "previews", ec);
  if (opts.emit_targets) fs::create_directories(opts.out_dir / "targets", ec);
  if (ec) throw IoError("cannot create output directories: " + ec.message());

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<SceneOutcome> outcomes(opts.num_scenes);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    while (!abort) {
      const std::size_t i = next++;
      if (i >= opts.num_scenes) return;
      try {
        const SceneBundle bundle = bundles.load(i % bundles.count);
        SceneResult r = generate_scene(bundle, cfg, res, i);
        SceneOutcome& o = outcomes[i];
        o.seconds = r.seconds;
        if (r.rejected) {
          o.rejected = true;
          o.reason = r.reject_reason;
        } else {
          const std::string id = scene_id(i);
          r.annotation.image_id = "images/" + id + ".png";
          write_png(opts.out_dir / r.annotation.image_id, r.image);
          o.files.push_back(r.annotation.image_id);
          if (opts.preview) {
            const std::string p = "previews/" + id + ".png";
            write_png(opts.out_dir / p, render_preview(r.image, r.annotation));
            o.files.push_back(p);
          }
          if (opts.emit_targets) {
            const std::string p = "targets/" + id + ".grid";
            write_grid(opts.out_dir / p, encode_targets(r.annotation, opts.target_stride));
            o.files.push_back(p);
          }
          o.record = annotation_to_json(r.annotation).dump();
          o.instances = static_cast<int>(r.annotation.instances.size());
        }
        o.done = true;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        abort = true;
      }
    }
  };

  if (opts.workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < opts.workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  if (failure) {
    json manifest = {{"complete", false}, {"files", json::array()}};
    for (const auto& o : outcomes)
      for (const auto& f : o.files) manifest["files"].push_back(f);
    try {
      write_text(opts.out_dir / "manifest.json", manifest.dump(2) + "\n");
    } catch (const IoError&) {
    }
    std::rethrow_exception(failure);
  }

  StatsReport stats;
  stats.requested = opts.num_scenes;
  stats.workers = opts.workers;
  std::string jsonl;
  double instances = 0, seconds = 0;
  for (const auto& o : outcomes) {
    seconds += o.seconds;
    if (o.rejected) {
      ++stats.rejected;
      ++stats.reject_reasons[o.reason];
      continue;
    }
    ++stats.emitted;
    ++stats.instance_histogram[o.instances];
    instances += o.instances;
    jsonl += o.record;
    jsonl += '\n';
  }
  stats.mean_instances = stats.emitted ? instances / stats.emitted : 0.0;
  stats.mean_seconds = opts.num_scenes ? seconds / opts.num_scenes : 0.0;
  stats.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_text(opts.out_dir / "annotations.jsonl", jsonl);
  write_text(opts.out_dir / "stats.json", stats.to_json().dump(2) + "\n");
  return stats;
}

namespace {

std::vector<SceneAnnotation> read_annotations(const fs::path& dir, ValidationReport* report) {
  const fs::path path = dir / "annotations.jsonl";
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot read " + path.string());
  std::vector<SceneAnnotation> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(annotation_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      if (!report) throw ValidationError("line " + std::to_string(lineno) + ": " + e.what());
      ++report->records;
      ++report->invalid;
      report->problems.push_back("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

ValidationReport validate_dataset(const fs::path& dir) {
  ValidationReport rep;
  for (const auto& ann : read_annotations(dir, &rep)) {
    ++rep.records;
    auto problems = annotation_problems(ann);
    const fs::path img = dir / ann.image_id;
    cv::Mat header = cv::imread(img.string(), cv::IMREAD_UNCHANGED);
    if (header.empty())
      problems.push_back("image file missing or unreadable");
    else if (header.cols != ann.width || header.rows != ann.height)
      problems.push_back("image size differs from the record");
    if (ann.instances.empty()) problems.push_back("record has no text instances");
    if (!problems.empty()) {
      ++rep.invalid;
      for (const auto& p : problems) rep.problems.push_back(ann.image_id + ": " + p);
    }
  }
  return rep;
}

json dataset_stats(const fs::path& dir) {
  const auto anns = read_annotations(dir, nullptr);
  std::map<int, std::size_t> hist;
  std::size_t words = 0, instances = 0, bordered = 0;
  std::map<std::string, std::size_t> kinds;
  for (const auto& a : anns) {
    ++hist[static_cast<int>(a.instances.size())];
    for (const auto& t : a.instances) {
      ++instances;
      words += t.word_bboxes.size();
      bordered += t.style.has_border;
      ++kinds[t.kind];
    }
  }
  json h = json::object();
  for (const auto& [k, v] : hist) h[std::to_string(k)] = v;
  json out = {{"images", anns.size()},
              {"instances", instances},
              {"words", words},
              {"mean_instances_per_image", anns.empty() ? 0.0 : static_cast<double>(instances) / anns.size()},
              {"border_fraction", instances ? static_cast<double>(bordered) / instances : 0.0},
              {"kinds", kinds},
              {"instances_histogram", h}};
  std::ifstream in(dir / "stats.json");
  if (in) {
    try {
      const json run = json::parse(in);
      for (const char* k : {"requested", "rejected", "reject_reasons", "mean_seconds_per_scene", "workers"})
        if (run.contains(k)) out[k] = run[k];
    } catch (const json::exception&) {
    }
  }
  return out;
}

}  // namespace synthtext
