#include <doctest.h>

#include <cmath>

#include <opencv2/imgproc.hpp>

#include "oracles.hpp"
#include "synthtext/errors.hpp"
#include "synthtext/geometry.hpp"
#include "test_support.hpp"

using namespace synthtext;

namespace {

constexpr double kPi = 3.14159265358979323846;

double angle_deg(const cv::Vec3d& a, const cv::Vec3d& b) {
  return std::acos(std::clamp(a.dot(b) / (cv::norm(a) * cv::norm(b)), -1.0, 1.0)) * 180.0 / kPi;
}


// Minimum bounding-box area over a sweep of orientations.
std::pair<double, double> sweep_min_area(const std::vector<cv::Point2d>& pts, double step_deg) {
  double best = INFINITY, best_angle = 0;
  for (double a = 0; a < 180; a += step_deg) {
    const double t = a * kPi / 180, c = std::cos(t), s = std::sin(t);
    double u0 = INFINITY, u1 = -INFINITY, v0 = INFINITY, v1 = -INFINITY;
    for (const auto& p : pts) {
      const double u = c * p.x + s * p.y, v = -s * p.x + c * p.y;
      u0 = std::min(u0, u);
      u1 = std::max(u1, u);
      v0 = std::min(v0, v);
      v1 = std::max(v1, v);
    }
    if ((u1 - u0) * (v1 - v0) < best) {
      best = (u1 - u0) * (v1 - v0);
      best_angle = a;
    }
  }
  return {best, best_angle};
}

}  // namespace

TEST_CASE("backprojection examples") {
  CameraModel cam;
  cam.focal_px = 100;
  cam.principal_point = {64, 48};
  const cv::Vec3d a = backproject(64, 48, 5, cam);
  CHECK(a[0] == doctest::Approx(0.0));
  CHECK(a[1] == doctest::Approx(0.0));
  CHECK(a[2] == doctest::Approx(5.0));
  const cv::Vec3d b = backproject(164, 48, 2, cam);
  CHECK(b[0] == doctest::Approx(2.0));
  CHECK(b[1] == doctest::Approx(0.0));
  CHECK(b[2] == doctest::Approx(2.0));
  CHECK_THROWS_AS(backproject(1, 1, 0, cam), ValidationError);
  CHECK_THROWS_AS(backproject(1, 1, -3, cam), ValidationError);

  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const double u = rng.uniform(0, 128), v = rng.uniform(0, 96), d = rng.uniform(0.1, 50);
    const cv::Point2d p = project(backproject(u, v, d, cam), cam);
    CHECK(p.x == doctest::Approx(u).epsilon(1e-12));
    CHECK(p.y == doctest::Approx(v).epsilon(1e-12));
  }
}

TEST_CASE("default intrinsics") {
  const CameraModel cam = CameraModel::for_image({640, 480});
  CHECK(cam.focal_px == 640);
  CHECK(cam.principal_point.x == 320);
  CHECK(cam.principal_point.y == 240);
}

TEST_CASE("constant depth gives the fronto-parallel plane") {
  const cv::Size size(80, 60);
  const CameraModel cam = CameraModel::for_image(size);
  const cv::Mat depth(size, CV_64FC1, cv::Scalar(4.0));
  const Region r = testing::region_from_mask(cv::Mat(size, CV_8U, cv::Scalar(255)));
  Rng rng(2);
  const auto p = fit_plane_ransac(r, depth, cam, {}, rng);
  REQUIRE(p);
  CHECK(std::abs(p->normal[0]) < 1e-6);
  CHECK(std::abs(p->normal[1]) < 1e-6);
  CHECK(p->normal[2] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(p->offset == doctest::Approx(4.0));
  CHECK(p->inlier_fraction == doctest::Approx(1.0));
}

TEST_CASE("slanted plane with corrupted pixels") {
  const cv::Size size(120, 100);
  const CameraModel cam = CameraModel::for_image(size);
  const cv::Vec3d n = cv::normalize(cv::Vec3d(0.1, -0.2, 0.97));
  cv::Mat depth = oracle::plane_depth(n, 3.0, cam, size);
  Rng noise(5);
  for (int y = 0; y < size.height; ++y)
    for (int x = 0; x < size.width; ++x)
      if (noise.bernoulli(0.2)) depth.at<double>(y, x) = noise.uniform(0.5, 10);
  const Region r = testing::region_from_mask(cv::Mat(size, CV_8U, cv::Scalar(255)));
  Rng rng(6);
  const auto p = fit_plane_ransac(r, depth, cam, {}, rng);
  REQUIRE(p);
  CHECK(angle_deg(p->normal, n) < 1.0);
  CHECK(p->normal[2] >= 0);
  CHECK(cv::norm(p->normal) == doctest::Approx(1.0).epsilon(1e-12));

  Rng again(6);
  const auto q = fit_plane_ransac(r, depth, cam, {}, again);
  REQUIRE(q);
  CHECK(q->normal == p->normal);
  CHECK(q->offset == p->offset);
}

TEST_CASE("mostly random depth yields no fit") {
  const cv::Size size(60, 60);
  const CameraModel cam = CameraModel::for_image(size);
  cv::Mat depth(size, CV_64FC1);
  Rng noise(8);
  for (int y = 0; y < size.height; ++y)
    for (int x = 0; x < size.width; ++x) depth.at<double>(y, x) = noise.uniform(1, 10);
  const Region r = testing::region_from_mask(cv::Mat(size, CV_8U, cv::Scalar(255)));
  Rng rng(9);
  CHECK_FALSE(fit_plane_ransac(r, depth, cam, {}, rng).has_value());
}

TEST_CASE("regions under three pixels are rejected") {
  cv::Mat mask = cv::Mat::zeros(10, 10, CV_8U);
  mask.at<unsigned char>(3, 3) = 255;
  mask.at<unsigned char>(3, 4) = 255;
  const Region r = testing::region_from_mask(mask);
  const cv::Mat depth(10, 10, CV_64FC1, cv::Scalar(1.0));
  Rng rng(1);
  CHECK_THROWS_AS(fit_plane_ransac(r, depth, CameraModel::for_image({10, 10}), {}, rng), ValidationError);
}

TEST_CASE("plane normals are canonicalized toward the camera") {
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    std::vector<cv::Vec3d> pts;
    const cv::Vec3d n = cv::normalize(cv::Vec3d(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)));
    const cv::Vec3d u = cv::normalize(n.cross(cv::Vec3d(0.3, 0.5, 0.7))), v = n.cross(u);
    for (int k = 0; k < 30; ++k) pts.push_back(n * 2.0 + u * rng.uniform(-1, 1) + v * rng.uniform(-1, 1));
    const Plane p = fit_plane_lsq(pts);
    CHECK(p.normal[2] >= 0);
    CHECK(std::min(angle_deg(p.normal, n), angle_deg(p.normal, -n)) < 1e-6);
  }
}

TEST_CASE("fronto-parallel homography basics") {
  const cv::Size size(100, 80);
  const CameraModel cam = CameraModel::for_image(size);
  cv::Mat mask = cv::Mat::zeros(size, CV_8U);
  mask(cv::Rect(20, 20, 50, 40)).setTo(255);
  const Region r = testing::region_from_mask(mask);

  Plane facing;
  facing.offset = 3;
  const Homography id = frontoparallel_homography(facing, r, cam);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(id.m(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));

  Plane tilted;
  tilted.normal = cv::normalize(cv::Vec3d(0.3, -0.4, 0.8));
  tilted.offset = 2;
  const Homography h = frontoparallel_homography(tilted, r, cam);
  const cv::Matx33d prod = (h * h.inverse()).m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(std::abs(prod(i, j) - (i == j ? 1.0 : 0.0)) < 1e-9);
  CHECK(std::abs(cv::determinant(h.m)) > 1e-12);

  // Area is preserved by a round trip through H and its inverse.
  Rng rng(12);
  for (int t = 0; t < 20; ++t) {
    std::vector<cv::Point2d> poly;
    for (int k = 0; k < 6; ++k) poly.emplace_back(rng.uniform(20, 70), rng.uniform(20, 60));
    const auto hull = convex_hull(poly);
    std::vector<cv::Point2d> back;
    const Homography inv = h.inverse();
    for (const auto& p : hull) back.push_back(h.apply(inv.apply(p)));
    CHECK(polygon_area(back) == doctest::Approx(polygon_area(hull)).epsilon(1e-6));
  }
}

TEST_CASE("a slanted rectangle is rectified to an axis-aligned one") {
  const cv::Size size(400, 300);
  const CameraModel cam = CameraModel::for_image(size);
  for (const double tilt_deg : {25.0, 40.0, 55.0}) {
    for (const bool about_x : {true, false}) {
      const double t = tilt_deg * kPi / 180;
      const cv::Vec3d n = about_x ? cv::Vec3d(0, -std::sin(t), std::cos(t)) : cv::Vec3d(std::sin(t), 0, std::cos(t));
      const cv::Vec3d center(0.1, 0.05, 4.0);
      const cv::Vec3d u = about_x ? cv::Vec3d(1, 0, 0) : cv::normalize(cv::Vec3d(0, 1, 0).cross(n));
      const cv::Vec3d v = cv::normalize(n.cross(u));
      const double a = 1.2, b = 0.6;  // half extents, width along u
      std::vector<cv::Point> poly;
      for (const auto& [su, sv] : {std::pair{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}) {
        const cv::Point2d p = project(center + su * a * u + sv * b * v, cam);
        poly.emplace_back(static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y)));
      }
      cv::Mat mask = cv::Mat::zeros(size, CV_8U);
      cv::fillConvexPoly(mask, poly, 255);
      const Region r = testing::region_from_mask(mask);
      Plane plane;
      plane.normal = n;
      plane.offset = n.dot(center);
      const Homography h = frontoparallel_homography(plane, r, cam);
      std::vector<cv::Point2d> warped;
      for (const auto& p : r.contour) warped.push_back(h.apply({p.x + 0.5, p.y + 0.5}));
      const auto rect = fit_rectangle(warped);
      REQUIRE(rect);
      CHECK(std::abs(rect->angle_rad * 180 / kPi) < 0.5);
      CHECK(rect->width / rect->height == doctest::Approx(a / b).epsilon(0.05));
    }
  }
}

TEST_CASE("rectangle fitting: unit square and rotations") {
  const std::vector<cv::Point2d> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const auto r = fit_rectangle(sq);
  REQUIRE(r);
  CHECK(r->center.x == doctest::Approx(0.5));
  CHECK(r->center.y == doctest::Approx(0.5));
  CHECK(r->width == doctest::Approx(1.0));
  CHECK(r->height == doctest::Approx(1.0));
  CHECK(r->angle_rad == doctest::Approx(0.0));

  const double th = 30 * kPi / 180;
  std::vector<cv::Point2d> rot;
  for (const auto& p : sq) rot.emplace_back(std::cos(th) * p.x - std::sin(th) * p.y, std::sin(th) * p.x + std::cos(th) * p.y);
  const auto rr = fit_rectangle(rot);
  REQUIRE(rr);
  CHECK(rr->width == doctest::Approx(1.0));
  CHECK(rr->height == doctest::Approx(1.0));
  CHECK(std::abs(rr->angle_rad - th) < 1e-6);

  // Oblong rectangle rotated by 30 degrees: angle of the long side.
  std::vector<cv::Point2d> longr;
  for (const auto& p : std::vector<cv::Point2d>{{0, 0}, {3, 0}, {3, 1}, {0, 1}})
    longr.emplace_back(std::cos(th) * p.x - std::sin(th) * p.y, std::sin(th) * p.x + std::cos(th) * p.y);
  const auto lr = fit_rectangle(longr);
  REQUIRE(lr);
  CHECK(lr->width == doctest::Approx(3.0));
  CHECK(std::abs(lr->angle_rad - th) < 1e-6);
  const auto sweep = sweep_min_area(longr, 0.01);
  CHECK(std::abs(sweep.second - 30.0) < 0.011);
}

TEST_CASE("rectangle fitting matches a brute-force orientation sweep") {
  Rng rng(21);
  for (int t = 0; t < 50; ++t) {
    std::vector<cv::Point2d> pts;
    for (int k = 0; k < 12; ++k) pts.emplace_back(rng.uniform(-5, 5), rng.uniform(-2, 2));
    const auto r = fit_rectangle(pts);
    REQUIRE(r);
    const auto [best, angle] = sweep_min_area(pts, 0.01);
    CHECK(r->area() <= best + 1e-9);
    CHECK(r->area() >= best * (1 - 1e-3));
    CHECK(r->area() >= polygon_area(convex_hull(pts)) - 1e-9);
    CHECK(r->width >= r->height);
    CHECK(r->angle_rad > -kPi / 2);
    CHECK(r->angle_rad <= kPi / 2);
    for (const auto& p : pts) {
      const cv::Point2d d = p - r->center;
      const double u = d.x * std::cos(r->angle_rad) + d.y * std::sin(r->angle_rad);
      const double v = -d.x * std::sin(r->angle_rad) + d.y * std::cos(r->angle_rad);
      CHECK(std::abs(u) <= r->width / 2 + 1e-9);
      CHECK(std::abs(v) <= r->height / 2 + 1e-9);
    }
  }
}

TEST_CASE("degenerate contours do not fit") {
  CHECK_FALSE(fit_rectangle(std::vector<cv::Point2d>{{0, 0}, {1, 1}}).has_value());
  CHECK_FALSE(fit_rectangle(std::vector<cv::Point2d>{{0, 0}, {1, 1}, {2, 2}}).has_value());
}
