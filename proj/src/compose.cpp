#include "synthtext/compose.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <vector>

#include <fftw3.h>
#include <opencv2/imgproc.hpp>

#include "synthtext/errors.hpp"

namespace synthtext {

namespace {

// Planner calls are not thread-safe in FFTW; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : data(fftw_alloc_real(n)) {}
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  double* data;
};

class Dst2 {
 public:
  Dst2(int rows, int cols, double* in, double* out) {
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_r2r_2d(rows, cols, in, out, FFTW_RODFT00, FFTW_RODFT00, FFTW_ESTIMATE);
  }
  ~Dst2() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  Dst2(const Dst2&) = delete;
  Dst2& operator=(const Dst2&) = delete;
  void run(double* in, double* out) const { fftw_execute_r2r(plan_, in, out); }

 private:
  fftw_plan plan_;
};

}  // namespace

GradientField guidance_field(const cv::Mat& src, const cv::Mat& dst, const cv::Mat& mask) {
  CV_Assert(src.size() == dst.size() && mask.size() == dst.size());
  CV_Assert(src.type() == CV_64FC3 && dst.type() == CV_64FC3 && mask.type() == CV_8UC1);
  const int rows = dst.rows, cols = dst.cols;
  GradientField f{cv::Mat::zeros(rows, cols, CV_64FC3), cv::Mat::zeros(rows, cols, CV_64FC3)};
  auto pick = [](const cv::Vec3d& s, const cv::Vec3d& d) {
    cv::Vec3d v;
    for (int c = 0; c < 3; ++c) v[c] = std::abs(s[c]) > std::abs(d[c]) ? s[c] : d[c];
    return v;
  };
  for (int y = 0; y < rows; ++y)
    for (int x = 0; x < cols; ++x) {
      const bool in = mask.at<unsigned char>(y, x) != 0;
      if (x + 1 < cols) {
        const cv::Vec3d gd = dst.at<cv::Vec3d>(y, x + 1) - dst.at<cv::Vec3d>(y, x);
        const bool mixed = in || mask.at<unsigned char>(y, x + 1) != 0;
        f.gx.at<cv::Vec3d>(y, x) = mixed ? pick(src.at<cv::Vec3d>(y, x + 1) - src.at<cv::Vec3d>(y, x), gd) : gd;
      }
      if (y + 1 < rows) {
        const cv::Vec3d gd = dst.at<cv::Vec3d>(y + 1, x) - dst.at<cv::Vec3d>(y, x);
        const bool mixed = in || mask.at<unsigned char>(y + 1, x) != 0;
        f.gy.at<cv::Vec3d>(y, x) = mixed ? pick(src.at<cv::Vec3d>(y + 1, x) - src.at<cv::Vec3d>(y, x), gd) : gd;
      }
    }
  return f;
}

cv::Mat divergence(const GradientField& field) {
  const int rows = field.gx.rows, cols = field.gx.cols;
  cv::Mat div = cv::Mat::zeros(rows, cols, field.gx.type());
  for (int y = 0; y < rows; ++y)
    for (int x = 0; x < cols; ++x) {
      cv::Vec3d v = field.gx.at<cv::Vec3d>(y, x) + field.gy.at<cv::Vec3d>(y, x);
      if (x > 0) v -= field.gx.at<cv::Vec3d>(y, x - 1);
      if (y > 0) v -= field.gy.at<cv::Vec3d>(y - 1, x);
      div.at<cv::Vec3d>(y, x) = v;
    }
  return div;
}

cv::Mat discrete_laplacian(const cv::Mat& u) {
  CV_Assert(u.type() == CV_64FC1);
  cv::Mat lap = cv::Mat::zeros(u.size(), CV_64FC1);
  for (int y = 1; y + 1 < u.rows; ++y)
    for (int x = 1; x + 1 < u.cols; ++x)
      lap.at<double>(y, x) = u.at<double>(y, x + 1) + u.at<double>(y, x - 1) + u.at<double>(y + 1, x) +
                             u.at<double>(y - 1, x) - 4 * u.at<double>(y, x);
  return lap;
}

cv::Mat dst_poisson_solve(const cv::Mat& rhs, const cv::Mat& boundary) {
  CV_Assert(rhs.type() == CV_64FC1 && boundary.type() == CV_64FC1 && rhs.size() == boundary.size());
  if (rhs.rows < 3 || rhs.cols < 3) throw ValidationError("dst_poisson_solve: grid must be at least 3x3");
  const int H = rhs.rows, W = rhs.cols;
  const int nr = H - 2, nc = W - 2;

  FftwBuffer a(static_cast<std::size_t>(nr) * nc), b(static_cast<std::size_t>(nr) * nc);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nc; ++j) {
      const int y = i + 1, x = j + 1;
      double v = rhs.at<double>(y, x);
      if (y == 1) v -= boundary.at<double>(0, x);
      if (y == H - 2) v -= boundary.at<double>(H - 1, x);
      if (x == 1) v -= boundary.at<double>(y, 0);
      if (x == W - 2) v -= boundary.at<double>(y, W - 1);
      a.data[static_cast<std::size_t>(i) * nc + j] = v;
    }

  std::vector<double> lr(nr), lc(nc);
  for (int k = 0; k < nr; ++k) lr[k] = 2 * std::cos(std::numbers::pi * (k + 1) / (nr + 1)) - 2;
  for (int k = 0; k < nc; ++k) lc[k] = 2 * std::cos(std::numbers::pi * (k + 1) / (nc + 1)) - 2;

  Dst2 dst(nr, nc, a.data, b.data);
  dst.run(a.data, b.data);
  const double norm = 1.0 / (4.0 * (nr + 1) * (nc + 1));
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nc; ++j) b.data[static_cast<std::size_t>(i) * nc + j] *= norm / (lr[i] + lc[j]);
  dst.run(b.data, a.data);

  cv::Mat u = boundary.clone();
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nc; ++j) u.at<double>(i + 1, j + 1) = a.data[static_cast<std::size_t>(i) * nc + j];
  return u;
}

cv::Mat poisson_blend(const BlendRequest& req) {
  CV_Assert(req.dst.type() == CV_64FC3 && req.src.type() == CV_64FC3 && req.mask.type() == CV_8UC1);
  CV_Assert(req.src.size() == req.dst.size() && req.mask.size() == req.dst.size());
  cv::Mat out = req.dst.clone();
  const cv::Rect box = cv::boundingRect(req.mask);
  if (box.empty()) return out;
  if (box.x < 1 || box.y < 1 || box.x + box.width > req.dst.cols - 1 || box.y + box.height > req.dst.rows - 1)
    throw ValidationError("poisson_blend: mask touches the image border");

  const cv::Rect roi(box.x - 1, box.y - 1, box.width + 2, box.height + 2);
  const cv::Mat dst = req.dst(roi).clone(), src = req.src(roi).clone(), mask = req.mask(roi).clone();
  const cv::Mat div = divergence(guidance_field(src, dst, mask));

  std::vector<cv::Mat> div_ch, dst_ch;
  cv::split(div, div_ch);
  cv::split(dst, dst_ch);
  for (int c = 0; c < 3; ++c) {
    const cv::Mat u = dst_poisson_solve(div_ch[c], dst_ch[c]);
    for (int y = 0; y < roi.height; ++y)
      for (int x = 0; x < roi.width; ++x)
        if (mask.at<unsigned char>(y, x))
          out.at<cv::Vec3d>(y + roi.y, x + roi.x)[c] = std::clamp(u.at<double>(y, x), 0.0, 1.0);
  }
  return out;
}

cv::Mat alpha_blend(const BlendRequest& req, const cv::Mat& alpha) {
  CV_Assert(req.dst.type() == CV_64FC3 && req.src.type() == CV_64FC3 && alpha.type() == CV_64FC1);
  CV_Assert(req.src.size() == req.dst.size() && alpha.size() == req.dst.size());
  cv::Mat out = req.dst.clone();
  for (int y = 0; y < out.rows; ++y)
    for (int x = 0; x < out.cols; ++x) {
      const double a = alpha.at<double>(y, x);
      if (a == 0) continue;
      out.at<cv::Vec3d>(y, x) = a * req.src.at<cv::Vec3d>(y, x) + (1 - a) * req.dst.at<cv::Vec3d>(y, x);
    }
  return out;
}

cv::Mat blend_mask_from_alpha(const cv::Mat& alpha, double threshold, int radius) {
  cv::Mat a64;
  alpha.convertTo(a64, CV_64F);
  cv::Mat bin = a64 > threshold;
  if (radius > 0) {
    const cv::Mat kernel = cv::getStructuringElement(cv::MORPH_ELLIPSE, {2 * radius + 1, 2 * radius + 1});
    cv::dilate(bin, bin, kernel);
  }
  if (bin.rows > 0 && bin.cols > 0) {
    bin.row(0).setTo(0);
    bin.row(bin.rows - 1).setTo(0);
    bin.col(0).setTo(0);
    bin.col(bin.cols - 1).setTo(0);
  }
  return bin;
}

}  // namespace synthtext
