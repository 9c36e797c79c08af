#include "synthtext/dettarget.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include <opencv2/imgproc.hpp>

#include "synthtext/errors.hpp"
#include "synthtext/eval.hpp"

namespace synthtext {

GridTarget::GridTarget(cv::Size size, int d) : delta(d), image_size(size) {
  if (d <= 0) throw ValidationError("grid stride must be positive");
  if (size.width <= 0 || size.height <= 0 || size.width % d || size.height % d)
    throw ValidationError("grid image size must be a positive multiple of the stride");
  rows = size.height / d;
  cols = size.width / d;
  data.assign(static_cast<std::size_t>(rows) * cols * kGridChannels, 0.0);
}

cv::Size padded_size(cv::Size size, int delta) {
  auto up = [delta](int v) { return (v + delta - 1) / delta * delta; };
  return {up(size.width), up(size.height)};
}

cv::Mat pad_to_stride(const cv::Mat& image, int delta) {
  const cv::Size p = padded_size(image.size(), delta);
  cv::Mat out;
  cv::copyMakeBorder(image, out, 0, p.height - image.rows, 0, p.width - image.cols, cv::BORDER_REPLICATE);
  return out;
}

GridTarget encode_targets(std::span<const WordBox> words, cv::Size image_size, int delta) {
  GridTarget g(image_size, delta);
  const double W = image_size.width, H = image_size.height;
  std::vector<double> owner_area(static_cast<std::size_t>(g.rows) * g.cols, -1.0);
  for (const auto& w : words) {
    if (!(w.size.width > 0 && w.size.height > 0)) throw ValidationError("word box has zero area");
    const double x = w.center.x, y = w.center.y;
    if (!(x >= 0 && x < W && y >= 0 && y < H)) throw ValidationError("word center lies outside the image");
    const int c = static_cast<int>(std::floor(x / delta));
    const int r = static_cast<int>(std::floor(y / delta));
    const double area = w.size.width * w.size.height;
    double& owner = owner_area[static_cast<std::size_t>(r) * g.cols + c];
    if (owner >= 0) {
      ++g.collisions;
      if (area <= owner) continue;
    }
    owner = area;
    const double u = c * delta, v = r * delta;
    const double pose[kGridChannels] = {1.0,
                                        (x - u) / delta,
                                        (y - v) / delta,
                                        w.size.width / W,
                                        w.size.height / H,
                                        std::cos(w.angle),
                                        std::sin(w.angle)};
    for (int ch = 0; ch < kGridChannels; ++ch) g.at(r, c, ch) = pose[ch];
  }
  return g;
}

GridTarget encode_targets(const SceneAnnotation& ann, int delta) {
  std::vector<WordBox> words;
  for (const auto& inst : ann.instances)
    for (const auto& b : inst.word_bboxes)
      words.push_back({{b.x + b.width / 2, b.y + b.height / 2}, {b.width, b.height}, 0.0});
  return encode_targets(words, padded_size({ann.width, ann.height}, delta), delta);
}

std::vector<DetectionBox> decode_grid(const GridTarget& g, double threshold) {
  std::vector<DetectionBox> out;
  const double W = g.image_size.width, H = g.image_size.height;
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) {
      const double conf = g.at(r, c, 0);
      if (!(conf >= threshold)) continue;
      DetectionBox b;
      b.center = {c * g.delta + g.delta * g.at(r, c, 1), r * g.delta + g.delta * g.at(r, c, 2)};
      b.size = {g.at(r, c, 3) * W, g.at(r, c, 4) * H};
      b.angle = std::atan2(g.at(r, c, 6), g.at(r, c, 5));
      b.score = std::clamp(conf, 0.0, 1.0);
      out.push_back(b);
    }
  return out;
}

std::vector<DetectionBox> nms(std::span<const DetectionBox> boxes, double iou_thresh) {
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (boxes[a].score != boxes[b].score) return boxes[a].score > boxes[b].score;
    return boxes[a].area() > boxes[b].area();
  });
  std::vector<DetectionBox> kept;
  std::vector<cv::Rect2d> kept_rects;
  for (std::size_t i : order) {
    const cv::Rect2d r = boxes[i].rect();
    const bool suppressed =
        std::any_of(kept_rects.begin(), kept_rects.end(), [&](const cv::Rect2d& k) { return iou(k, r) > iou_thresh; });
    if (suppressed) continue;
    kept.push_back(boxes[i]);
    kept_rects.push_back(r);
  }
  return kept;
}

std::vector<DetectionBox> multiscale_merge(const std::map<double, std::vector<DetectionBox>>& per_scale,
                                           double iou_thresh) {
  std::vector<DetectionBox> all;
  for (const auto& [scale, boxes] : per_scale) {
    if (scale != 1.0 && scale != 0.5 && scale != 0.25 && scale != 0.125)
      throw ValidationError("unsupported detection scale " + std::to_string(scale));
    for (DetectionBox b : boxes) {
      b.center = {b.center.x / scale, b.center.y / scale};
      b.size = {b.size.width / scale, b.size.height / scale};
      all.push_back(b);
    }
  }
  return nms(all, iou_thresh);
}

void LossConfig::validate() const {
  if (!(nontext_weight > 0 && nontext_weight <= 1)) throw ValidationError("nontext_weight must lie in (0,1]");
}

double nontext_weight_schedule(double progress, double start, double end) {
  const double t = std::clamp(progress, 0.0, 1.0);
  return std::exp(std::log(start) + t * (std::log(end) - std::log(start)));
}

double grid_loss(const GridTarget& pred, const GridTarget& target, const LossConfig& cfg) {
  cfg.validate();
  if (pred.rows != target.rows || pred.cols != target.cols || pred.delta != target.delta ||
      pred.data.size() != target.data.size())
    throw ValidationError("prediction and target grids differ in shape");
  // Neumaier summation keeps the result independent of cell order to ~1 ulp.
  double sum = 0, comp = 0;
  auto add = [&](double v) {
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  };
  for (int r = 0; r < target.rows; ++r)
    for (int c = 0; c < target.cols; ++c) {
      if (target.at(r, c, 0) > 0.5) {
        for (int ch = 0; ch < kGridChannels; ++ch) {
          const double d = pred.at(r, c, ch) - target.at(r, c, ch);
          add(d * d);
        }
      } else {
        const double d = pred.at(r, c, 0) - target.at(r, c, 0);
        add(cfg.nontext_weight * d * d);
      }
    }
  return sum + comp;
}

namespace {

static_assert(std::endian::native == std::endian::little, "raw grid I/O assumes a little-endian host");

}  // namespace

void write_grid(const std::filesystem::path& path, const GridTarget& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << g.rows << ' ' << g.cols << ' ' << kGridChannels << " f32 " << g.delta << ' ' << g.image_size.height << ' '
      << g.image_size.width << '\n';
  std::vector<float> buf(g.data.begin(), g.data.end());
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!out) throw IoError("failed writing " + path.string());
}

GridTarget read_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot read " + path.string());
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  int rows = 0, cols = 0, ch = 0, delta = 0, h = 0, w = 0;
  std::string kind;
  if (!(hs >> rows >> cols >> ch >> kind >> delta >> h >> w) || kind != "f32" || ch != kGridChannels)
    throw IngestionError("bad grid header in " + path.string());
  GridTarget g({w, h}, delta);
  if (g.rows != rows || g.cols != cols) throw IngestionError("inconsistent grid header in " + path.string());
  std::vector<float> buf(g.data.size());
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (in.gcount() != static_cast<std::streamsize>(buf.size() * sizeof(float)))
    throw IngestionError("truncated grid " + path.string());
  std::copy(buf.begin(), buf.end(), g.data.begin());
  return g;
}

}  // namespace synthtext
