#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include <opencv2/core.hpp>

#include "synthtext/scene.hpp"

namespace synthtext {

inline constexpr int kGridChannels = 7;  // c, x, y, w, h, cos, sin
inline constexpr int kDefaultStride = 16;

/// Oriented word box in pixels.
struct WordBox {
  cv::Point2d center;
  cv::Size2d size;
  double angle = 0;
};

/// Dense per-cell targets (or predictions) over a stride-aligned image.
struct GridTarget {
  int rows = 0, cols = 0;
  int delta = kDefaultStride;
  cv::Size image_size;  // multiple of delta in both directions
  std::vector<double> data;  // rows * cols * 7, row-major, channels last
  int collisions = 0;

  GridTarget() = default;
  GridTarget(cv::Size image_size, int delta);

  double& at(int r, int c, int ch) { return data[(static_cast<std::size_t>(r) * cols + c) * kGridChannels + ch]; }
  double at(int r, int c, int ch) const { return data[(static_cast<std::size_t>(r) * cols + c) * kGridChannels + ch]; }
};

/// Smallest stride-aligned size covering `size`.
cv::Size padded_size(cv::Size size, int delta = kDefaultStride);

/// Pads bottom and right edges by replication up to padded_size.
cv::Mat pad_to_stride(const cv::Mat& image, int delta = kDefaultStride);

/// Each word is assigned to the cell containing its center; when two words share
/// a cell the larger one is kept and `collisions` counts the loser. Throws
/// ValidationError for unaligned sizes, zero-area boxes or centers outside the image.
GridTarget encode_targets(std::span<const WordBox> words, cv::Size image_size, int delta = kDefaultStride);

/// Encodes the axis-aligned word boxes of an annotation on its padded image size.
GridTarget encode_targets(const SceneAnnotation& ann, int delta = kDefaultStride);

struct DetectionBox {
  cv::Point2d center;
  cv::Size2d size;
  double angle = 0;
  double score = 0;

  double area() const { return size.width * size.height; }
  /// Axis-aligned extent, ignoring the angle.
  cv::Rect2d rect() const {
    return {center.x - size.width / 2, center.y - size.height / 2, size.width, size.height};
  }
};

/// Boxes of cells whose confidence is at least `threshold`, in raster order.
std::vector<DetectionBox> decode_grid(const GridTarget& grid, double threshold);

/// Greedy suppression by descending score (ties: larger area, then input order).
/// Overlap is the IoU of the axis-aligned extents.
std::vector<DetectionBox> nms(std::span<const DetectionBox> boxes, double iou_thresh = 0.5);

/// Maps per-scale detections back to the original frame and suppresses across
/// scales. Allowed scales are 1, 1/2, 1/4 and 1/8.
std::vector<DetectionBox> multiscale_merge(const std::map<double, std::vector<DetectionBox>>& per_scale,
                                           double iou_thresh = 0.5);

struct LossConfig {
  double nontext_weight = 0.01;
  void validate() const;
};

/// Non-text weight at `progress` in [0,1]: log-linear from `start` to `end`.
double nontext_weight_schedule(double progress, double start = 0.01, double end = 1.0);

/// Squared error on all channels of text cells (target c > 0.5) plus the
/// weighted squared error on c alone elsewhere. Compensated summation.
double grid_loss(const GridTarget& pred, const GridTarget& target, const LossConfig& cfg);

/// ASCII header "rows cols 7 f32 delta H W\n" then little-endian float32 data.
void write_grid(const std::filesystem::path& path, const GridTarget& grid);
GridTarget read_grid(const std::filesystem::path& path);

}  // namespace synthtext
