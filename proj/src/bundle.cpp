#include "synthtext/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <opencv2/imgproc.hpp>

#include "synthtext/errors.hpp"
#include "synthtext/raster_io.hpp"
#include "synthtext/rng.hpp"

namespace synthtext {

namespace fs = std::filesystem;

void SceneBundle::validate() const {
  if (image.empty() || image.type() != CV_64FC3) throw ValidationError("bundle " + id + ": image must be RGB doubles");
  if (depth.size() != image.size() || depth.type() != CV_64FC1)
    throw ValidationError("bundle " + id + ": depth must match the image size");
  for (int y = 0; y < depth.rows; ++y) {
    const auto* d = depth.ptr<double>(y);
    for (int x = 0; x < depth.cols; ++x)
      if (!std::isfinite(d[x]) || d[x] <= 0) throw ValidationError("bundle " + id + ": depth must be finite and positive");
  }
  if (ucm) {
    if (ucm->size() != image.size() || ucm->type() != CV_64FC1)
      throw ValidationError("bundle " + id + ": ucm must match the image size");
    double lo, hi;
    cv::minMaxLoc(*ucm, &lo, &hi);
    if (lo < 0 || hi > 1 || !std::isfinite(lo) || !std::isfinite(hi))
      throw ValidationError("bundle " + id + ": ucm values must lie in [0,1]");
  }
}

SceneBundle load_bundle(const fs::path& dir, const std::string& id) {
  SceneBundle b;
  b.id = id;
  b.image = read_rgb(dir / (id + ".png"));
  b.depth = read_scalar_raster(dir / (id + ".depth.raw"));
  for (const char* ext : {".ucm.raw", ".ucm.png"}) {
    const fs::path p = dir / (id + ext);
    if (fs::exists(p)) {
      b.ucm = read_scalar_raster(p);
      break;
    }
  }
  b.validate();
  return b;
}

std::vector<std::string> list_bundle_ids(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IngestionError("bundle directory not found: " + dir.string());
  std::set<std::string> ids;
  const std::string suffix = ".depth.raw";
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) continue;
    const std::string id = name.substr(0, name.size() - suffix.size());
    if (fs::exists(dir / (id + ".png"))) ids.insert(id);
  }
  return {ids.begin(), ids.end()};
}

std::vector<SceneBundle> load_bundles(const fs::path& dir) {
  std::vector<SceneBundle> out;
  for (const auto& id : list_bundle_ids(dir)) out.push_back(load_bundle(dir, id));
  return out;
}

void save_bundle(const fs::path& dir, const SceneBundle& bundle) {
  bundle.validate();
  fs::create_directories(dir);
  write_rgb_png(dir / (bundle.id + ".png"), bundle.image);
  write_raster_f32(dir / (bundle.id + ".depth.raw"), bundle.depth);
  if (bundle.ucm) write_raster_f32(dir / (bundle.id + ".ucm.raw"), *bundle.ucm);
}

namespace {

struct Surface {
  // Points p with normal.dot(p) == offset; finite boards are limited to
  // |(p - center).u| <= half_u and |(p - center).v| <= half_v.
  cv::Vec3d normal;
  double offset = 0;
  bool bounded = false;
  cv::Vec3d center, u, v;
  double half_u = 0, half_v = 0;
  cv::Vec3d albedo;
  bool textured = false;
  double texture_freq = 0;
};

cv::Vec3d random_albedo(Rng& rng) {
  return {rng.uniform(0.15, 0.95), rng.uniform(0.15, 0.95), rng.uniform(0.15, 0.95)};
}

cv::Vec3d unit(const cv::Vec3d& v) { return v / cv::norm(v); }

}  // namespace

SceneBundle make_synthetic_bundle(std::uint64_t seed, cv::Size size) {
  Rng rng(derive_seed(seed, 0x5eed));
  const double f = std::max(size.width, size.height);
  const double cx = size.width / 2.0, cy = size.height / 2.0;

  // Room: camera at the origin looking down +z, y pointing down.
  const double half_w = rng.uniform(2.0, 4.0), floor_y = rng.uniform(1.0, 2.0), ceil_y = -rng.uniform(1.5, 3.0);
  const double back_z = rng.uniform(5.0, 9.0);
  std::vector<Surface> surfaces;
  auto wall = [&](cv::Vec3d n, double d) {
    Surface s;
    s.normal = n;
    s.offset = d;
    s.albedo = random_albedo(rng);
    s.textured = rng.bernoulli(0.25);
    s.texture_freq = rng.uniform(1.5, 4.0);
    surfaces.push_back(s);
  };
  // Walls store inward normals with n.p = d.
  wall({0, 0, -1}, -back_z);
  wall({0, -1, 0}, -floor_y);
  wall({0, 1, 0}, ceil_y);
  wall({1, 0, 0}, -half_w);
  wall({-1, 0, 0}, -half_w);

  const int boards = static_cast<int>(rng.uniform_int(1, 3));
  for (int i = 0; i < boards; ++i) {
    Surface s;
    s.bounded = true;
    const double z = rng.uniform(0.45, 0.8) * back_z;
    s.center = {rng.uniform(-0.4, 0.4) * half_w, rng.uniform(ceil_y * 0.4, floor_y * 0.4), z};
    const double yaw = rng.uniform(-0.8, 0.8), pitch = rng.uniform(-0.5, 0.5);
    s.normal = unit(cv::Vec3d(std::sin(yaw) * std::cos(pitch), std::sin(pitch), -std::cos(yaw) * std::cos(pitch)));
    s.u = unit(cv::Vec3d(0, 1, 0).cross(s.normal));
    s.v = s.normal.cross(s.u);
    s.half_u = rng.uniform(0.5, 1.4);
    s.half_v = rng.uniform(0.3, 0.9);
    s.offset = s.normal.dot(s.center);
    s.albedo = random_albedo(rng);
    s.textured = rng.bernoulli(0.2);
    s.texture_freq = rng.uniform(2.0, 6.0);
    surfaces.push_back(s);
  }

  const cv::Vec3d light = unit({rng.uniform(-0.6, 0.6), -1.0, rng.uniform(-0.8, -0.2)});
  const double ambient = rng.uniform(0.25, 0.45);
  const std::uint64_t noise_seed = rng.next_u64();

  SceneBundle b;
  b.id = "synthetic_" + std::to_string(seed);
  b.image.create(size, CV_64FC3);
  b.depth.create(size, CV_64FC1);
  cv::Mat ids(size, CV_32S);
  for (int y = 0; y < size.height; ++y) {
    for (int x = 0; x < size.width; ++x) {
      const cv::Vec3d ray((x + 0.5 - cx) / f, (y + 0.5 - cy) / f, 1.0);
      double best_t = INFINITY;
      int best = -1;
      for (int k = 0; k < static_cast<int>(surfaces.size()); ++k) {
        const Surface& s = surfaces[k];
        const double denom = s.normal.dot(ray);
        if (std::abs(denom) < 1e-12) continue;
        const double t = s.offset / denom;
        if (!(t > 1e-6) || t >= best_t) continue;
        if (s.bounded) {
          const cv::Vec3d rel = ray * t - s.center;
          if (std::abs(rel.dot(s.u)) > s.half_u || std::abs(rel.dot(s.v)) > s.half_v) continue;
        } else if (denom > 0) {
          // Inward normals: a ray leaving the room meets walls with n.ray < 0.
          continue;
        }
        best_t = t;
        best = k;
      }
      if (best < 0) throw Error("synthetic room ray escaped");
      const Surface& s = surfaces[best];
      const cv::Vec3d p = ray * best_t;
      cv::Vec3d n = s.normal;
      if (n.dot(ray) > 0) n = -n;
      const double shade = ambient + (1 - ambient) * std::max(0.0, -n.dot(light));
      cv::Vec3d color = s.albedo * shade;
      // Per-pixel values from a counter-based hash.
      const std::uint64_t h = mix64(noise_seed ^ (static_cast<std::uint64_t>(y) * size.width + x));
      const double u = static_cast<double>(h >> 11) * 0x1.0p-53 - 0.5;
      if (s.textured) {
        const double q = std::sin(p[0] * 13.0 * s.texture_freq) * std::sin(p[1] * 11.0 * s.texture_freq + p[2] * 7.0);
        color *= 0.8 + 0.2 * q + 0.5 * u;  // grain strong enough to read as clutter
      }
      const double noise = u * 0.01;
      for (int c = 0; c < 3; ++c) b.image.at<cv::Vec3d>(y, x)[c] = std::clamp(color[c] + noise, 0.0, 1.0);
      b.depth.at<double>(y, x) = p[2];
      ids.at<int>(y, x) = best;
    }
  }

  cv::Mat ucm = cv::Mat::zeros(size, CV_64FC1);
  for (int y = 0; y < size.height; ++y)
    for (int x = 0; x < size.width; ++x) {
      const int id = ids.at<int>(y, x);
      const bool edge = (x + 1 < size.width && ids.at<int>(y, x + 1) != id) ||
                        (y + 1 < size.height && ids.at<int>(y + 1, x) != id);
      if (edge) ucm.at<double>(y, x) = 1.0;
    }
  b.ucm = ucm;
  return b;
}

}  // namespace synthtext
