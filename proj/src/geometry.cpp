#include "synthtext/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "synthtext/errors.hpp"

namespace synthtext {

CameraModel CameraModel::for_image(cv::Size size) {
  CameraModel cam;
  cam.focal_px = std::max(size.width, size.height);
  cam.principal_point = {size.width / 2.0, size.height / 2.0};
  return cam;
}

cv::Vec3d backproject(double u, double v, double depth, const CameraModel& cam) {
  if (!(depth > 0)) throw ValidationError("backproject: depth must be positive");
  return {depth * (u - cam.principal_point.x) / cam.focal_px, depth * (v - cam.principal_point.y) / cam.focal_px,
          depth};
}

cv::Point2d project(const cv::Vec3d& X, const CameraModel& cam) {
  return {cam.focal_px * X[0] / X[2] + cam.principal_point.x, cam.focal_px * X[1] / X[2] + cam.principal_point.y};
}

namespace {

Plane canonical(cv::Vec3d n, double d) {
  const double len = cv::norm(n);
  n /= len;
  d /= len;
  bool flip = n[2] < 0;
  if (n[2] == 0) flip = n[1] < 0 || (n[1] == 0 && n[0] < 0);
  if (flip) {
    n = -n;
    d = -d;
  }
  Plane p;
  p.normal = n;
  p.offset = d;
  return p;
}

std::size_t count_inliers(std::span<const cv::Vec3d> pts, const cv::Vec3d& n, double d, double tol,
                          std::vector<cv::Vec3d>* keep = nullptr) {
  std::size_t c = 0;
  for (const auto& X : pts) {
    if (std::abs(n.dot(X) - d) <= tol) {
      ++c;
      if (keep) keep->push_back(X);
    }
  }
  return c;
}

}  // namespace

Plane fit_plane_lsq(std::span<const cv::Vec3d> points) {
  CV_Assert(points.size() >= 3);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : points) mean += Eigen::Vector3d(p[0], p[1], p[2]);
  mean /= static_cast<double>(points.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Eigen::Vector3d q = Eigen::Vector3d(p[0], p[1], p[2]) - mean;
    cov += q * q.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const Eigen::Vector3d n = eig.eigenvectors().col(0);
  Plane p = canonical({n.x(), n.y(), n.z()}, n.dot(mean));
  p.inlier_fraction = 1.0;
  return p;
}

std::optional<Plane> fit_plane_ransac(std::span<const cv::Vec3d> pts, const RansacConfig& cfg, double tol,
                                      Rng& rng) {
  if (pts.size() < 3) throw ValidationError("plane fit needs at least 3 points");
  const std::size_t n = pts.size();

  std::size_t best_count = 0;
  cv::Vec3d best_n(0, 0, 1);
  double best_d = 0;
  bool have = false;

  int done = 0;
  const int max_draws = cfg.iterations * 20;
  for (int draw = 0; draw < max_draws && done < cfg.iterations; ++draw) {
    const auto i = rng.uniform_index(n);
    const auto j = rng.uniform_index(n);
    const auto k = rng.uniform_index(n);
    if (i == j || j == k || i == k) continue;
    const cv::Vec3d ab = pts[j] - pts[i];
    const cv::Vec3d ac = pts[k] - pts[i];
    cv::Vec3d nn = ab.cross(ac);
    const double len = cv::norm(nn);
    if (len <= 1e-12 * cv::norm(ab) * cv::norm(ac) || len == 0) continue;  // collinear
    nn /= len;
    const double d = nn.dot(pts[i]);
    ++done;
    const std::size_t c = count_inliers(pts, nn, d, tol);
    if (!have || c > best_count) {
      have = true;
      best_count = c;
      best_n = nn;
      best_d = d;
    }
  }
  if (!have || best_count < 3) return std::nullopt;

  Plane plane;
  plane.normal = best_n;
  plane.offset = best_d;
  for (int round = 0; round < 2; ++round) {
    std::vector<cv::Vec3d> inliers;
    inliers.reserve(n);
    count_inliers(pts, plane.normal, plane.offset, tol, &inliers);
    if (inliers.size() < 3) return std::nullopt;
    plane = fit_plane_lsq(inliers);
  }
  plane.inlier_fraction = static_cast<double>(count_inliers(pts, plane.normal, plane.offset, tol)) / n;
  if (plane.inlier_fraction < cfg.min_inlier_fraction) return std::nullopt;
  return plane;
}

std::optional<Plane> fit_plane_ransac(const Region& region, const cv::Mat& depth, const CameraModel& cam,
                                      const RansacConfig& cfg, Rng& rng) {
  if (region.area_px < 3) throw ValidationError("plane fit needs a region of at least 3 pixels");
  CV_Assert(depth.type() == CV_64FC1);

  const int stride = std::max(1, (region.area_px + cfg.max_points - 1) / cfg.max_points);
  std::vector<double> depths;
  depths.reserve(region.area_px);
  std::vector<cv::Vec3d> pts;
  pts.reserve(region.area_px / stride + 1);
  int idx = 0;
  for (int y = 0; y < region.mask.rows; ++y) {
    const auto* m = region.mask.ptr<unsigned char>(y);
    const int iy = y + region.bbox.y;
    const auto* drow = depth.ptr<double>(iy);
    for (int x = 0; x < region.mask.cols; ++x) {
      if (!m[x]) continue;
      const int ix = x + region.bbox.x;
      const double z = drow[ix];
      if (!(z > 0) || !std::isfinite(z)) continue;
      depths.push_back(z);
      if (idx++ % stride == 0) pts.push_back(backproject(ix + 0.5, iy + 0.5, z, cam));
    }
  }
  if (pts.size() < 3) return std::nullopt;
  auto mid = depths.begin() + depths.size() / 2;
  std::nth_element(depths.begin(), mid, depths.end());
  const double tol = cfg.inlier_tol_rel * *mid;
  return fit_plane_ransac(pts, cfg, tol, rng);
}

cv::Point2d Homography::apply(const cv::Point2d& p) const {
  const cv::Vec3d q = m * cv::Vec3d(p.x, p.y, 1.0);
  return {q[0] / q[2], q[1] / q[2]};
}

double Homography::depth_sign(const cv::Point2d& p) const {
  return m(2, 0) * p.x + m(2, 1) * p.y + m(2, 2);
}

Homography Homography::normalized(const cv::Matx33d& m) {
  Homography h;
  h.m = std::abs(m(2, 2)) > 1e-15 ? m * (1.0 / m(2, 2)) : m;
  return h;
}

Homography Homography::inverse() const { return normalized(m.inv(cv::DECOMP_LU)); }

Homography Homography::operator*(const Homography& rhs) const { return normalized(m * rhs.m); }

Homography frontoparallel_homography(const Plane& plane, const Region& region, const CameraModel& cam) {
  const cv::Vec3d n = plane.normal;
  const double tilt = std::acos(std::clamp(n[2], -1.0, 1.0));
  if (tilt < 1e-6 || region.area_px == 0) return {};

  double su = 0, sv = 0;
  for (int y = 0; y < region.mask.rows; ++y) {
    const auto* m = region.mask.ptr<unsigned char>(y);
    for (int x = 0; x < region.mask.cols; ++x)
      if (m[x]) {
        su += x + region.bbox.x;
        sv += y + region.bbox.y;
      }
  }
  su = su / region.area_px + 0.5;
  sv = sv / region.area_px + 0.5;
  const cv::Vec3d ray((su - cam.principal_point.x) / cam.focal_px, (sv - cam.principal_point.y) / cam.focal_px, 1.0);
  const double denom = n.dot(ray);
  if (std::abs(denom) < 1e-12 || std::abs(plane.offset) < 1e-12) return {};
  const cv::Vec3d centroid = ray * (plane.offset / denom);

  cv::Vec3d axis = n.cross(cv::Vec3d(0, 0, 1));
  axis /= cv::norm(axis);
  const double c = std::cos(tilt), s = std::sin(tilt);
  const cv::Matx33d skew(0, -axis[2], axis[1], axis[2], 0, -axis[0], -axis[1], axis[0], 0);
  const cv::Matx33d outer = cv::Matx31d(axis[0], axis[1], axis[2]) * cv::Matx13d(axis[0], axis[1], axis[2]);
  const cv::Matx33d R = cv::Matx33d::eye() * c + outer * (1 - c) + skew * s;

  const cv::Matx33d K(cam.focal_px, 0, cam.principal_point.x, 0, cam.focal_px, cam.principal_point.y, 0, 0, 1);
  const cv::Vec3d t = centroid - R * centroid;
  const cv::Matx33d plane_term = cv::Matx31d(t[0], t[1], t[2]) * cv::Matx13d(n[0], n[1], n[2]) * (1.0 / plane.offset);
  return Homography::normalized(K * (R + plane_term) * K.inv());
}

std::array<cv::Point2d, 4> RotatedRect::corners() const {
  const cv::Point2d e(std::cos(angle_rad), std::sin(angle_rad));
  const cv::Point2d n(-e.y, e.x);
  const cv::Point2d a = e * (width / 2), b = n * (height / 2);
  return {center - a - b, center + a - b, center + a + b, center - a + b};
}

namespace {

double cross(const cv::Point2d& o, const cv::Point2d& a, const cv::Point2d& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double wrap_half_turn(double a) {
  // Maps to (-pi/2, pi/2].
  while (a > std::numbers::pi / 2) a -= std::numbers::pi;
  while (a <= -std::numbers::pi / 2) a += std::numbers::pi;
  return a;
}

}  // namespace

std::vector<cv::Point2d> convex_hull(std::span<const cv::Point2d> points) {
  std::vector<cv::Point2d> p(points.begin(), points.end());
  std::sort(p.begin(), p.end(), [](const auto& a, const auto& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.size() < 3) return p;
  std::vector<cv::Point2d> h(2 * p.size());
  std::size_t k = 0;
  for (const auto& q : p) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], q) <= 0) --k;
    h[k++] = q;
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  h.resize(k - 1);
  return h;
}

double polygon_area(std::span<const cv::Point2d> poly) {
  double a = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    a += p.x * q.y - q.x * p.y;
  }
  return std::abs(a) / 2;
}

std::optional<RotatedRect> fit_rectangle(std::span<const cv::Point2d> contour) {
  if (contour.size() < 3) return std::nullopt;
  const auto hull = convex_hull(contour);
  if (hull.size() < 3) return std::nullopt;
  const double hull_area = polygon_area(hull);
  if (hull_area <= 1e-12) return std::nullopt;

  const std::size_t h = hull.size();
  auto next = [h](std::size_t i) { return (i + 1) % h; };
  auto dot = [](const cv::Point2d& a, const cv::Point2d& b) { return a.x * b.x + a.y * b.y; };

  // Caliper indices: max along the edge, max along the inward normal, min along the edge.
  std::size_t right = 0, top = 0, left = 0;
  std::optional<RotatedRect> best;
  for (std::size_t i = 0; i < h; ++i) {
    const cv::Point2d d = hull[next(i)] - hull[i];
    const cv::Point2d e = d / std::hypot(d.x, d.y);
    const cv::Point2d n(-e.y, e.x);
    if (i == 0) {
      for (std::size_t j = 0; j < h; ++j) {
        if (dot(hull[j], e) > dot(hull[right], e)) right = j;
        if (dot(hull[j], n) > dot(hull[top], n)) top = j;
        if (dot(hull[j], e) < dot(hull[left], e)) left = j;
      }
    } else {
      for (std::size_t s = 0; s < h && dot(hull[next(right)], e) > dot(hull[right], e); ++s) right = next(right);
      for (std::size_t s = 0; s < h && dot(hull[next(top)], n) > dot(hull[top], n); ++s) top = next(top);
      for (std::size_t s = 0; s < h && dot(hull[next(left)], e) < dot(hull[left], e); ++s) left = next(left);
    }
    const double e_min = dot(hull[left], e), e_max = dot(hull[right], e);
    const double n_min = dot(hull[i], n), n_max = dot(hull[top], n);
    const double len_e = e_max - e_min, len_n = n_max - n_min;

    RotatedRect r;
    r.center = e * ((e_min + e_max) / 2) + n * ((n_min + n_max) / 2);
    const double a_e = wrap_half_turn(std::atan2(e.y, e.x));
    const double a_n = wrap_half_turn(std::atan2(n.y, n.x));
    const double scale = std::max(len_e, len_n);
    if (std::abs(len_e - len_n) <= 1e-9 * scale) {
      r.width = r.height = scale;
      r.angle_rad = std::abs(a_e) <= std::abs(a_n) ? a_e : a_n;
    } else if (len_e > len_n) {
      r.width = len_e;
      r.height = len_n;
      r.angle_rad = a_e;
    } else {
      r.width = len_n;
      r.height = len_e;
      r.angle_rad = a_n;
    }
    if (!best) {
      best = r;
      continue;
    }
    const double tol = 1e-9 * std::max(best->area(), r.area());
    if (r.area() < best->area() - tol ||
        (std::abs(r.area() - best->area()) <= tol && std::abs(r.angle_rad) < std::abs(best->angle_rad)))
      best = r;
  }
  return best;
}

}  // namespace synthtext
