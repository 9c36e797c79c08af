#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "synthtext/compose.hpp"
#include "synthtext/errors.hpp"
#include "synthtext/rng.hpp"

using namespace synthtext;

namespace {

constexpr double kPi = 3.14159265358979323846;

cv::Mat random_mat(Rng& rng, int rows, int cols, int type = CV_64FC1, double lo = 0, double hi = 1) {
  cv::Mat m(rows, cols, type);
  auto* p = m.ptr<double>();
  for (std::size_t i = 0; i < m.total() * m.channels(); ++i) p[i] = rng.uniform(lo, hi);
  return m;
}

double max_abs(const cv::Mat& a, const cv::Mat& b) { return cv::norm(a, b, cv::NORM_INF); }


}  // namespace

TEST_CASE("guidance field selection rules") {
  Rng rng(1);
  const cv::Mat a = random_mat(rng, 12, 15, CV_64FC3), b = random_mat(rng, 12, 15, CV_64FC3);
  cv::Mat mask = cv::Mat::zeros(12, 15, CV_8U);
  mask(cv::Rect(3, 3, 6, 5)).setTo(255);

  const GradientField same = guidance_field(a, a, mask);
  const GradientField own = guidance_field(b, a, cv::Mat::zeros(12, 15, CV_8U));
  CHECK(max_abs(same.gx, own.gx) == 0);
  CHECK(max_abs(same.gy, own.gy) == 0);

  const cv::Mat flat(12, 15, CV_64FC3, cv::Scalar(0.5, 0.5, 0.5));
  const GradientField f = guidance_field(b, flat, mask);
  for (int y = 4; y < 7; ++y)
    for (int x = 4; x < 8; ++x)
      for (int c = 0; c < 3; ++c)
        CHECK(f.gx.at<cv::Vec3d>(y, x)[c] == b.at<cv::Vec3d>(y, x + 1)[c] - b.at<cv::Vec3d>(y, x)[c]);

  // Pointwise: the chosen component has the larger magnitude of the two.
  const GradientField m = guidance_field(b, a, mask);
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x + 1 < 15; ++x)
      if (mask.at<unsigned char>(y, x) || mask.at<unsigned char>(y, x + 1))
        for (int c = 0; c < 3; ++c) {
          const double gs = b.at<cv::Vec3d>(y, x + 1)[c] - b.at<cv::Vec3d>(y, x)[c];
          const double gd = a.at<cv::Vec3d>(y, x + 1)[c] - a.at<cv::Vec3d>(y, x)[c];
          CHECK(std::abs(m.gx.at<cv::Vec3d>(y, x)[c]) == std::max(std::abs(gs), std::abs(gd)));
        }
}

TEST_CASE("zero data gives the zero solution") {
  const cv::Mat z = cv::Mat::zeros(20, 17, CV_64FC1);
  CHECK(cv::norm(dst_poisson_solve(z, z), cv::NORM_INF) < 1e-10);
}

TEST_CASE("sine eigenfunctions round trip") {
  const int N = 30, M = 22;  // interior sizes
  for (const auto& [k, l] : {std::pair{1, 1}, {3, 2}, {7, 5}, {N, M}}) {
    cv::Mat u = cv::Mat::zeros(M + 2, N + 2, CV_64FC1);
    for (int y = 1; y <= M; ++y)
      for (int x = 1; x <= N; ++x)
        u.at<double>(y, x) = std::sin(kPi * k * x / (N + 1)) * std::sin(kPi * l * y / (M + 1));
    const cv::Mat rhs = discrete_laplacian(u);
    // Analytic eigenvalue check on one interior point.
    const double lam = 2 * std::cos(kPi * k / (N + 1)) - 2 + 2 * std::cos(kPi * l / (M + 1)) - 2;
    CHECK(rhs.at<double>(3, 4) == doctest::Approx(lam * u.at<double>(3, 4)).epsilon(1e-9));
    const cv::Mat back = dst_poisson_solve(rhs, cv::Mat::zeros(u.size(), CV_64FC1));
    CHECK(max_abs(back, u) < 1e-8);
  }
}

TEST_CASE("DST solve matches a dense solve") {
  Rng rng(2);
  for (const int n : {16, 32}) {
    const cv::Mat rhs = random_mat(rng, n + 2, n + 2, CV_64FC1, -1, 1);
    const cv::Mat boundary = random_mat(rng, n + 2, n + 2);
    CHECK(max_abs(dst_poisson_solve(rhs, boundary), oracle::dense_poisson(rhs, boundary)) < 1e-6);
  }
  const cv::Mat rhs = random_mat(rng, 12, 21, CV_64FC1, -1, 1), boundary = random_mat(rng, 12, 21);
  CHECK(max_abs(dst_poisson_solve(rhs, boundary), oracle::dense_poisson(rhs, boundary)) < 1e-9);
}

TEST_CASE("solver is linear and has small residuals") {
  Rng rng(3);
  const cv::Mat r1 = random_mat(rng, 40, 50, CV_64FC1, -1, 1), r2 = random_mat(rng, 40, 50, CV_64FC1, -1, 1);
  const cv::Mat z = cv::Mat::zeros(40, 50, CV_64FC1);
  const cv::Mat lhs = dst_poisson_solve(2.5 * r1 - 0.75 * r2, z);
  const cv::Mat rhs = 2.5 * dst_poisson_solve(r1, z) - 0.75 * dst_poisson_solve(r2, z);
  CHECK(max_abs(lhs, rhs) < 1e-8);

  const cv::Mat big = random_mat(rng, 512, 512, CV_64FC1, -1, 1);
  const cv::Mat bnd = random_mat(rng, 512, 512);
  const cv::Mat u = dst_poisson_solve(big, bnd);
  const cv::Mat res = discrete_laplacian(u) - big;
  CHECK(cv::norm(res(cv::Rect(1, 1, 510, 510)), cv::NORM_INF) <= 1e-6);
  CHECK_THROWS_AS(dst_poisson_solve(cv::Mat::zeros(2, 5, CV_64FC1), cv::Mat::zeros(2, 5, CV_64FC1)), ValidationError);
}

TEST_CASE("poisson blend: trivial cases and outside pixels") {
  Rng rng(4);
  const cv::Mat dst = random_mat(rng, 30, 40, CV_64FC3), src = random_mat(rng, 30, 40, CV_64FC3);
  const cv::Mat none = cv::Mat::zeros(30, 40, CV_8U);
  CHECK(max_abs(poisson_blend({dst, src, none}), dst) == 0);

  cv::Mat mask = cv::Mat::zeros(30, 40, CV_8U);
  mask(cv::Rect(5, 6, 20, 12)).setTo(255);
  mask(cv::Rect(20, 10, 12, 15)).setTo(255);
  CHECK(max_abs(poisson_blend({dst, dst, mask}), dst) < 1e-6);

  const cv::Mat out = poisson_blend({dst, src, mask});
  cv::Mat outside;
  cv::bitwise_not(mask, outside);
  cv::Mat diff;
  cv::compare(out, dst, diff, cv::CMP_NE);
  std::vector<cv::Mat> ch;
  cv::split(diff, ch);
  for (const auto& c : ch) CHECK(cv::countNonZero(c & outside) == 0);
  double lo, hi;
  cv::minMaxLoc(out.reshape(1), &lo, &hi);
  CHECK(lo >= 0);
  CHECK(hi <= 1);

  cv::Mat edge = cv::Mat::zeros(30, 40, CV_8U);
  edge(cv::Rect(0, 5, 4, 4)).setTo(255);
  CHECK_THROWS_AS(poisson_blend({dst, src, edge}), ValidationError);
}

TEST_CASE("poisson blend matches a dense solve of the guided system") {
  Rng rng(5);
  // Illumination ramp in dst, flat text colour in src.
  cv::Mat dst(26, 34, CV_64FC3);
  for (int y = 0; y < 26; ++y)
    for (int x = 0; x < 34; ++x) dst.at<cv::Vec3d>(y, x) = cv::Vec3d(0.2 + 0.015 * x, 0.3 + 0.01 * y, 0.5);
  const cv::Mat src(26, 34, CV_64FC3, cv::Scalar(0.9, 0.1, 0.3));
  const cv::Rect box(6, 5, 18, 14);
  cv::Mat mask = cv::Mat::zeros(26, 34, CV_8U);
  mask(box).setTo(255);
  const cv::Mat out = poisson_blend({dst, src, mask});

  // Oracle: guidance built here, dense solve on the box with dst as boundary.
  const cv::Rect roi(box.x - 1, box.y - 1, box.width + 2, box.height + 2);
  for (int c = 0; c < 3; ++c) {
    cv::Mat rhs = cv::Mat::zeros(roi.size(), CV_64FC1), bnd(roi.size(), CV_64FC1);
    auto g = [&](const cv::Mat& img, int y0, int x0, int y1, int x1) {
      return img.at<cv::Vec3d>(y1, x1)[c] - img.at<cv::Vec3d>(y0, x0)[c];
    };
    auto mixed = [&](int y0, int x0, int y1, int x1) {
      const double s = g(src, y0, x0, y1, x1), d = g(dst, y0, x0, y1, x1);
      return std::abs(s) > std::abs(d) ? s : d;
    };
    for (int y = 0; y < roi.height; ++y)
      for (int x = 0; x < roi.width; ++x) {
        const int iy = y + roi.y, ix = x + roi.x;
        bnd.at<double>(y, x) = dst.at<cv::Vec3d>(iy, ix)[c];
        rhs.at<double>(y, x) = mixed(iy, ix, iy, ix + 1) - mixed(iy, ix - 1, iy, ix) + mixed(iy, ix, iy + 1, ix) -
                               mixed(iy - 1, ix, iy, ix);
      }
    const cv::Mat u = oracle::dense_poisson(rhs, bnd);
    for (int y = 1; y + 1 < roi.height; ++y)
      for (int x = 1; x + 1 < roi.width; ++x)
        CHECK(std::abs(out.at<cv::Vec3d>(y + roi.y, x + roi.x)[c] - std::clamp(u.at<double>(y, x), 0.0, 1.0)) < 1e-5);
  }
  // A flat source keeps the background's ramp: the blended region is the ramp itself.
  CHECK(max_abs(out, dst) < 1e-6);
}

TEST_CASE("alpha blending") {
  const cv::Mat white(4, 4, CV_64FC3, cv::Scalar(1, 1, 1)), black(4, 4, CV_64FC3, cv::Scalar(0, 0, 0));
  BlendRequest req{black, white, cv::Mat(), BlendMode::Alpha};
  CHECK(max_abs(alpha_blend(req, cv::Mat::zeros(4, 4, CV_64FC1)), black) == 0);
  CHECK(max_abs(alpha_blend(req, cv::Mat::ones(4, 4, CV_64FC1)), white) == 0);
  const cv::Mat half = alpha_blend(req, cv::Mat(4, 4, CV_64FC1, cv::Scalar(0.5)));
  CHECK(half.at<cv::Vec3d>(2, 2)[1] == 0.5);
}

TEST_CASE("blend mask is dilated and keeps a clear frame") {
  cv::Mat alpha = cv::Mat::zeros(20, 20, CV_64FC1);
  alpha.at<double>(10, 10) = 0.5;
  alpha.at<double>(0, 5) = 1.0;
  const cv::Mat m = blend_mask_from_alpha(alpha, 0.05, 2);
  CHECK(m.at<unsigned char>(10, 12) != 0);
  CHECK(m.at<unsigned char>(10, 13) == 0);
  CHECK(cv::countNonZero(m.row(0)) == 0);
  CHECK(m.at<unsigned char>(1, 5) != 0);
}
