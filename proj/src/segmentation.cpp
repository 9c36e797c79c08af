#include "synthtext/segmentation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

#include <opencv2/imgproc.hpp>

#include "synthtext/errors.hpp"

namespace synthtext {

cv::Mat Region::full_mask(cv::Size size) const {
  cv::Mat out = cv::Mat::zeros(size, CV_8UC1);
  mask.copyTo(out(bbox));
  return out;
}

namespace {

const std::array<cv::Point, 4> kNeighbours{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};

// Renumbers labels by first occurrence in raster order.
int compact_labels(cv::Mat& labels) {
  std::vector<int> remap;
  int next = 0;
  for (int y = 0; y < labels.rows; ++y) {
    auto* row = labels.ptr<int>(y);
    for (int x = 0; x < labels.cols; ++x) {
      const int l = row[x];
      if (l >= static_cast<int>(remap.size())) remap.resize(l + 1, -1);
      if (remap[l] < 0) remap[l] = next++;
      row[x] = remap[l];
    }
  }
  return next;
}

struct DisjointSet {
  std::vector<int> parent, size;
  std::vector<float> internal;  // max MST edge inside the component

  explicit DisjointSet(int n) : parent(n), size(n, 1), internal(n, 0.f) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  int join(int a, int b, float w) {
    if (size[a] < size[b]) std::swap(a, b);
    parent[b] = a;
    size[a] += size[b];
    internal[a] = std::max({internal[a], internal[b], w});
    return a;
  }
};

}  // namespace

SegmentMap threshold_ucm(const cv::Mat& ucm_in, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ValidationError("ucm threshold must lie in [0, 1]");
  if (ucm_in.empty() || ucm_in.channels() != 1) throw ValidationError("ucm must be a non-empty single-channel raster");
  cv::Mat ucm;
  ucm_in.convertTo(ucm, CV_64F);
  double lo = 0, hi = 0;
  cv::minMaxLoc(ucm, &lo, &hi);
  if (lo < 0.0 || hi > 1.0) throw ValidationError("ucm values must lie in [0, 1]");

  const int rows = ucm.rows, cols = ucm.cols;
  cv::Mat labels(rows, cols, CV_32SC1, cv::Scalar(-1));
  int count = 0;
  std::vector<cv::Point> stack;
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      if (labels.at<int>(y, x) >= 0 || ucm.at<double>(y, x) > tau) continue;
      labels.at<int>(y, x) = count;
      stack.assign(1, {x, y});
      while (!stack.empty()) {
        const cv::Point p = stack.back();
        stack.pop_back();
        for (const auto& d : kNeighbours) {
          const cv::Point q = p + d;
          if (q.x < 0 || q.y < 0 || q.x >= cols || q.y >= rows) continue;
          if (labels.at<int>(q) >= 0 || ucm.at<double>(q) > tau) continue;
          labels.at<int>(q) = count;
          stack.push_back(q);
        }
      }
      ++count;
    }
  }
  if (count == 0) {
    labels.setTo(0);
    return {labels, 1};
  }

  // Absorb boundary pixels layer by layer; each layer sees only earlier assignments.
  std::vector<cv::Point> frontier;
  for (int y = 0; y < rows; ++y)
    for (int x = 0; x < cols; ++x) {
      if (labels.at<int>(y, x) >= 0) continue;
      for (const auto& d : kNeighbours) {
        const cv::Point q(x + d.x, y + d.y);
        if (q.x >= 0 && q.y >= 0 && q.x < cols && q.y < rows && labels.at<int>(q) >= 0) {
          frontier.emplace_back(x, y);
          break;
        }
      }
    }
  std::vector<int> chosen;
  while (!frontier.empty()) {
    chosen.assign(frontier.size(), -1);
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      std::array<int, 4> seen{};
      std::array<int, 4> votes{};
      int distinct = 0;
      for (const auto& d : kNeighbours) {
        const cv::Point q = frontier[i] + d;
        if (q.x < 0 || q.y < 0 || q.x >= cols || q.y >= rows) continue;
        const int l = labels.at<int>(q);
        if (l < 0) continue;
        int k = 0;
        while (k < distinct && seen[k] != l) ++k;
        if (k == distinct) seen[distinct++] = l;
        ++votes[k];
      }
      int best = -1, best_votes = 0;
      for (int k = 0; k < distinct; ++k)
        if (votes[k] > best_votes || (votes[k] == best_votes && seen[k] < best)) {
          best = seen[k];
          best_votes = votes[k];
        }
      chosen[i] = best;
    }
    for (std::size_t i = 0; i < frontier.size(); ++i) labels.at<int>(frontier[i]) = chosen[i];
    std::vector<cv::Point> next;
    for (const auto& p : frontier)
      for (const auto& d : kNeighbours) {
        const cv::Point q = p + d;
        if (q.x < 0 || q.y < 0 || q.x >= cols || q.y >= rows) continue;
        if (labels.at<int>(q) == -1) {
          labels.at<int>(q) = -2;  // queued
          next.push_back(q);
        }
      }
    for (const auto& q : next) labels.at<int>(q) = -1;
    frontier = std::move(next);
  }
  return {labels, count};
}

SegmentMap fallback_segment(const cv::Mat& rgb_in, const FallbackSegmentConfig& cfg) {
  if (rgb_in.empty()) throw ValidationError("fallback_segment: empty image");
  cv::Mat rgb;
  rgb_in.convertTo(rgb, CV_64FC3);
  const int rows = rgb.rows, cols = rgb.cols;

  struct Edge {
    float w;
    int a, b;
  };
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(rows) * cols * 2);
  auto diff = [&](int y0, int x0, int y1, int x1) {
    const cv::Vec3d d = rgb.at<cv::Vec3d>(y0, x0) - rgb.at<cv::Vec3d>(y1, x1);
    return static_cast<float>(std::sqrt(d.dot(d)));
  };
  for (int y = 0; y < rows; ++y)
    for (int x = 0; x < cols; ++x) {
      const int id = y * cols + x;
      if (x + 1 < cols) edges.push_back({diff(y, x, y, x + 1), id, id + 1});
      if (y + 1 < rows) edges.push_back({diff(y, x, y + 1, x), id, id + cols});
    }
  std::stable_sort(edges.begin(), edges.end(), [](const Edge& l, const Edge& r) { return l.w < r.w; });

  DisjointSet ds(rows * cols);
  const auto k = static_cast<float>(cfg.scale);
  for (const auto& e : edges) {
    int a = ds.find(e.a), b = ds.find(e.b);
    if (a == b) continue;
    const float ta = ds.internal[a] + k / ds.size[a];
    const float tb = ds.internal[b] + k / ds.size[b];
    if (e.w <= std::min(ta, tb)) ds.join(a, b, e.w);
  }
  for (const auto& e : edges) {
    int a = ds.find(e.a), b = ds.find(e.b);
    if (a != b && (ds.size[a] < cfg.min_size || ds.size[b] < cfg.min_size)) ds.join(a, b, e.w);
  }

  cv::Mat labels(rows, cols, CV_32SC1);
  for (int y = 0; y < rows; ++y)
    for (int x = 0; x < cols; ++x) labels.at<int>(y, x) = ds.find(y * cols + x);
  const int count = compact_labels(labels);
  return {labels, count};
}

std::vector<Region> extract_regions(const SegmentMap& seg) {
  const int n = seg.region_count;
  std::vector<Region> regions(n);
  std::vector<int> x0(n, INT32_MAX), y0(n, INT32_MAX), x1(n, -1), y1(n, -1), area(n, 0);
  for (int y = 0; y < seg.labels.rows; ++y) {
    const auto* row = seg.labels.ptr<int>(y);
    for (int x = 0; x < seg.labels.cols; ++x) {
      const int l = row[x];
      x0[l] = std::min(x0[l], x);
      x1[l] = std::max(x1[l], x);
      y0[l] = std::min(y0[l], y);
      y1[l] = std::max(y1[l], y);
      ++area[l];
    }
  }
  for (int l = 0; l < n; ++l) {
    Region& r = regions[l];
    r.label = l;
    r.area_px = area[l];
    if (area[l] == 0) continue;
    r.bbox = cv::Rect(x0[l], y0[l], x1[l] - x0[l] + 1, y1[l] - y0[l] + 1);
    cv::Mat local = seg.labels(r.bbox);
    r.mask = cv::Mat::zeros(r.bbox.size(), CV_8UC1);
    for (int y = 0; y < local.rows; ++y) {
      const auto* row = local.ptr<int>(y);
      auto* m = r.mask.ptr<unsigned char>(y);
      for (int x = 0; x < local.cols; ++x) m[x] = row[x] == l ? 255 : 0;
    }
    cv::Mat padded;
    cv::copyMakeBorder(r.mask, padded, 1, 1, 1, 1, cv::BORDER_CONSTANT, 0);
    std::vector<std::vector<cv::Point>> contours;
    cv::findContours(padded, contours, cv::RETR_EXTERNAL, cv::CHAIN_APPROX_NONE);
    std::size_t best = 0;
    for (std::size_t i = 1; i < contours.size(); ++i)
      if (contours[i].size() > contours[best].size()) best = i;
    if (!contours.empty())
      for (const auto& p : contours[best]) r.contour.emplace_back(p.x - 1 + r.bbox.x, p.y - 1 + r.bbox.y);
  }
  return regions;
}

namespace {

double texture_score_local(const cv::Mat& rgb, const cv::Mat& mask, cv::Point offset) {
  double sum = 0;
  std::size_t n = 0;
  auto inside = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < mask.cols && y < mask.rows && mask.at<unsigned char>(y, x) != 0;
  };
  for (int y = 0; y < mask.rows; ++y)
    for (int x = 0; x < mask.cols; ++x) {
      if (!inside(x, y)) continue;
      if (!inside(x - 1, y) || !inside(x + 1, y) || !inside(x + 2, y)) continue;
      if (!inside(x, y - 1) || !inside(x, y + 1) || !inside(x, y + 2)) continue;
      const int ix = x + offset.x, iy = y + offset.y;
      auto px = [&](int xx, int yy) { return rgb.at<cv::Vec3d>(yy, xx); };
      const cv::Vec3d dx = px(ix + 2, iy) - 3 * px(ix + 1, iy) + 3 * px(ix, iy) - px(ix - 1, iy);
      const cv::Vec3d dy = px(ix, iy + 2) - 3 * px(ix, iy + 1) + 3 * px(ix, iy) - px(ix, iy - 1);
      for (int c = 0; c < 3; ++c) sum += std::hypot(dx[c], dy[c]);
      n += 3;
    }
  return n ? sum / static_cast<double>(n) : 0.0;
}

cv::Mat as_rgb64(const cv::Mat& rgb) {
  if (rgb.type() == CV_64FC3) return rgb;
  cv::Mat out;
  rgb.convertTo(out, CV_64FC3);
  return out;
}

}  // namespace

double texture_score(const cv::Mat& rgb, const Region& region) {
  if (region.area_px == 0) throw ValidationError("texture_score: empty mask");
  return texture_score_local(as_rgb64(rgb), region.mask, region.bbox.tl());
}

double texture_score(const cv::Mat& rgb, const cv::Mat& full_mask) {
  const cv::Rect box = cv::boundingRect(full_mask);
  if (box.empty()) throw ValidationError("texture_score: empty mask");
  return texture_score_local(as_rgb64(rgb), full_mask(box), box.tl());
}

void RegionFilterConfig::validate() const {
  if (min_area_px <= 0 || max_aspect_ratio <= 0 || max_normal_view_angle_deg <= 0 || max_texture_score <= 0)
    throw ValidationError("region filter thresholds must be positive");
}

const char* to_string(RegionVerdict v) {
  switch (v) {
    case RegionVerdict::Accepted: return "accepted";
    case RegionVerdict::TooSmall: return "too_small";
    case RegionVerdict::NoPlane: return "no_plane";
    case RegionVerdict::BadWarp: return "bad_warp";
    case RegionVerdict::NoRectangle: return "no_rectangle";
    case RegionVerdict::ExtremeAspect: return "extreme_aspect";
    case RegionVerdict::GrazingView: return "grazing_view";
    case RegionVerdict::Textured: return "textured";
  }
  return "unknown";
}

std::vector<RegionAssessment> assess_regions(std::span<const Region> regions,
                                             std::span<const std::optional<Plane>> planes,
                                             const RegionFilterConfig& cfg, const cv::Mat& rgb,
                                             const CameraModel& cam) {
  cfg.validate();
  CV_Assert(planes.size() == regions.size());
  const cv::Mat img = as_rgb64(rgb);
  std::vector<RegionAssessment> out;
  out.reserve(regions.size());
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const Region& r = regions[i];
    RegionAssessment a;
    a.index = i;
    out.push_back(a);
    RegionAssessment& res = out.back();
    if (r.area_px < cfg.min_area_px) {
      res.verdict = RegionVerdict::TooSmall;
      continue;
    }
    if (!planes[i]) {
      res.verdict = RegionVerdict::NoPlane;
      continue;
    }
    res.plane = *planes[i];
    res.view_angle_deg = std::acos(std::clamp(res.plane.normal[2], -1.0, 1.0)) * 180.0 / std::numbers::pi;
    res.to_frontal = frontoparallel_homography(res.plane, r, cam);

    std::vector<cv::Point2d> warped;
    warped.reserve(r.contour.size());
    bool ok = true;
    for (const auto& p : r.contour) {
      const cv::Point2d q(p.x + 0.5, p.y + 0.5);
      if (res.to_frontal.depth_sign(q) <= 0) {
        ok = false;
        break;
      }
      warped.push_back(res.to_frontal.apply(q));
    }
    if (!ok) {
      res.verdict = RegionVerdict::BadWarp;
      continue;
    }
    const auto rect = fit_rectangle(warped);
    if (!rect) {
      res.verdict = RegionVerdict::NoRectangle;
      continue;
    }
    res.rect = *rect;
    if (cfg.aspect_in_image_frame) {
      std::vector<cv::Point2d> raw(r.contour.begin(), r.contour.end());
      const auto img_rect = fit_rectangle(raw);
      res.aspect = img_rect ? img_rect->width / std::max(img_rect->height, 1e-12) : INFINITY;
    } else {
      res.aspect = rect->width / std::max(rect->height, 1e-12);
    }
    if (res.aspect > cfg.max_aspect_ratio) {
      res.verdict = RegionVerdict::ExtremeAspect;
      continue;
    }
    if (res.view_angle_deg > cfg.max_normal_view_angle_deg) {
      res.verdict = RegionVerdict::GrazingView;
      continue;
    }
    res.texture = texture_score(img, r);
    if (res.texture > cfg.max_texture_score) {
      res.verdict = RegionVerdict::Textured;
      continue;
    }
    res.verdict = RegionVerdict::Accepted;
  }
  return out;
}

std::vector<Region> filter_regions(std::span<const Region> regions, std::span<const std::optional<Plane>> planes,
                                   const RegionFilterConfig& cfg, const cv::Mat& rgb, const CameraModel& cam) {
  std::vector<Region> kept;
  for (const auto& a : assess_regions(regions, planes, cfg, rgb, cam))
    if (a.verdict == RegionVerdict::Accepted) kept.push_back(regions[a.index]);
  return kept;
}

}  // namespace synthtext
