#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include <opencv2/core.hpp>

#include "synthtext/region.hpp"
#include "synthtext/rng.hpp"

namespace synthtext {

/// Pinhole intrinsics with square pixels.
struct CameraModel {
  double focal_px = 1.0;
  cv::Point2d principal_point;

  /// f = max(H, W), principal point at the image center.
  static CameraModel for_image(cv::Size size);
};

cv::Vec3d backproject(double u, double v, double depth, const CameraModel& cam);
cv::Point2d project(const cv::Vec3d& X, const CameraModel& cam);

/// n . X = offset, with |n| = 1 and n_z >= 0.
struct Plane {
  cv::Vec3d normal{0, 0, 1};
  double offset = 0;
  double inlier_fraction = 0;

  double distance(const cv::Vec3d& X) const { return normal.dot(X) - offset; }
};

struct RansacConfig {
  int iterations = 200;
  double inlier_tol_rel = 0.01;  // times the median region depth
  double min_inlier_fraction = 0.6;
  int max_points = 4000;         // region pixels are subsampled beyond this
};

/// Best-consensus plane over random 3-point hypotheses, refined by total least
/// squares on the inliers. Returns nullopt when the inlier fraction falls below
/// the acceptance level. Throws ValidationError for regions under 3 pixels.
std::optional<Plane> fit_plane_ransac(const Region& region, const cv::Mat& depth, const CameraModel& cam,
                                      const RansacConfig& cfg, Rng& rng);

/// Point-set variant used by fit_plane_ransac.
std::optional<Plane> fit_plane_ransac(std::span<const cv::Vec3d> points, const RansacConfig& cfg, double inlier_tol,
                                      Rng& rng);

/// Total-least-squares plane through `points` (canonicalized, inlier_fraction 1).
Plane fit_plane_lsq(std::span<const cv::Vec3d> points);

/// 3x3 projective map with m(2,2) = 1 whenever it is nonzero.
struct Homography {
  cv::Matx33d m = cv::Matx33d::eye();

  cv::Point2d apply(const cv::Point2d& p) const;
  /// Homogeneous w of the mapped point; <= 0 means the point maps behind the view.
  double depth_sign(const cv::Point2d& p) const;
  Homography inverse() const;
  Homography operator*(const Homography& rhs) const;
  static Homography normalized(const cv::Matx33d& m);
};

/// Plane-induced homography from the image to a virtual view in which the plane
/// faces the camera. The rotation takes the normal onto the optical axis about
/// normal x z and pivots on the region's 3D centroid, so the centroid pixel is a
/// fixed point.
Homography frontoparallel_homography(const Plane& plane, const Region& region, const CameraModel& cam);

struct RotatedRect {
  cv::Point2d center;
  double width = 0;   // longer side
  double height = 0;
  double angle_rad = 0;  // direction of the width side, in (-pi/2, pi/2]

  double area() const { return width * height; }
  std::array<cv::Point2d, 4> corners() const;
};

std::vector<cv::Point2d> convex_hull(std::span<const cv::Point2d> points);
double polygon_area(std::span<const cv::Point2d> polygon);

/// Minimum-area enclosing rectangle by rotating calipers over the convex hull.
/// nullopt for fewer than 3 points or a zero-area hull.
std::optional<RotatedRect> fit_rectangle(std::span<const cv::Point2d> contour);

}  // namespace synthtext
