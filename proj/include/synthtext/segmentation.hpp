#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "synthtext/geometry.hpp"
#include "synthtext/region.hpp"

namespace synthtext {

/// Dense labelling; labels lie in [0, region_count) and each occurs.
struct SegmentMap {
  cv::Mat labels;  // CV_32SC1
  int region_count = 0;
};

/// Connected components (4-connectivity) of pixels whose boundary strength is
/// <= tau. Pixels above tau are then absorbed into the adjacent region with the
/// most 4-neighbours, lowest label on ties, so the labels partition the image.
SegmentMap threshold_ucm(const cv::Mat& ucm, double tau = 0.11);

struct FallbackSegmentConfig {
  double scale = 1.0;  // merge tolerance k in tau(C) = k / |C|, RGB in [0,1]
  int min_size = 50;
};

/// Greedy graph-based region merging over the 4-connected pixel grid with RGB
/// distance edge weights (Felzenszwalb-Huttenlocher criterion).
SegmentMap fallback_segment(const cv::Mat& rgb, const FallbackSegmentConfig& cfg = {});

std::vector<Region> extract_regions(const SegmentMap& segments);

/// Mean third-order finite-difference magnitude over masked pixels and
/// channels. Only pixels whose 4-tap stencil lies inside the mask contribute.
double texture_score(const cv::Mat& rgb, const Region& region);
double texture_score(const cv::Mat& rgb, const cv::Mat& full_mask);

struct RegionFilterConfig {
  int min_area_px = 6000;
  double max_aspect_ratio = 8.0;
  double max_normal_view_angle_deg = 75.0;
  double max_texture_score = 0.03;
  // Aspect is measured on the rectified rectangle unless this is set.
  bool aspect_in_image_frame = false;

  void validate() const;
};

enum class RegionVerdict { Accepted, TooSmall, NoPlane, BadWarp, NoRectangle, ExtremeAspect, GrazingView, Textured };

const char* to_string(RegionVerdict verdict);

/// Everything the placement stage needs about a region that survived filtering.
struct RegionAssessment {
  RegionVerdict verdict = RegionVerdict::TooSmall;
  std::size_t index = 0;  // position in the input list
  Plane plane;
  Homography to_frontal;  // image -> fronto-parallel frame
  RotatedRect rect;       // in the fronto-parallel frame
  double aspect = 0;
  double view_angle_deg = 0;
  double texture = 0;
};

std::vector<RegionAssessment> assess_regions(std::span<const Region> regions,
                                             std::span<const std::optional<Plane>> planes,
                                             const RegionFilterConfig& cfg, const cv::Mat& rgb,
                                             const CameraModel& cam);

/// Keeps regions passing the area, aspect, viewing-angle and texture tests, in
/// input order. Regions without a plane are dropped.
std::vector<Region> filter_regions(std::span<const Region> regions, std::span<const std::optional<Plane>> planes,
                                   const RegionFilterConfig& cfg, const cv::Mat& rgb, const CameraModel& cam);

}  // namespace synthtext
