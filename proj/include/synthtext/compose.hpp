#pragma once

#include <opencv2/core.hpp>

namespace synthtext {

/// Per-channel forward-difference gradient pair, CV_64FC3 each. gx(y, x) holds
/// I(y, x+1) - I(y, x); the last column (gy: last row) is zero.
struct GradientField {
  cv::Mat gx, gy;
};

/// Mixed guidance field: on every grid edge touching a mask pixel, the src or
/// dst gradient with the larger magnitude (per channel and axis); elsewhere the
/// dst gradient.
GradientField guidance_field(const cv::Mat& src, const cv::Mat& dst, const cv::Mat& mask);

/// Backward difference of the field (5-point Laplacian when the field is a gradient).
cv::Mat divergence(const GradientField& field);

/// Solves the 5-point Poisson equation lap(u) = rhs on the interior of an HxW
/// grid with Dirichlet values taken from the border ring of `boundary`. Both
/// inputs are CV_64FC1 of the same size, H, W >= 3. Uses a 2D DST-I.
cv::Mat dst_poisson_solve(const cv::Mat& rhs, const cv::Mat& boundary);

/// 5-point Laplacian on the interior; border entries are zero.
cv::Mat discrete_laplacian(const cv::Mat& u);

enum class BlendMode { Poisson, Alpha };

struct BlendRequest {
  cv::Mat dst;   // CV_64FC3, [0,1]
  cv::Mat src;   // text layer, same size
  cv::Mat mask;  // CV_8U, nonzero = blend
  BlendMode mode = BlendMode::Poisson;
};

/// Poisson editing with the mixed guidance field, solved per channel on the
/// mask's bounding rectangle grown by one pixel. Pixels outside the mask are
/// copied from dst unchanged; the result is clamped to [0,1]. Throws
/// ValidationError when the mask reaches the image border.
cv::Mat poisson_blend(const BlendRequest& req);

/// out = alpha * src + (1 - alpha) * dst, alpha CV_64FC1 in [0,1].
cv::Mat alpha_blend(const BlendRequest& req, const cv::Mat& alpha);

/// Binarizes `alpha` (> threshold), dilates by `radius` and clears a one-pixel
/// frame so the border stays Dirichlet.
cv::Mat blend_mask_from_alpha(const cv::Mat& alpha, double threshold = 0.05, int radius = 2);

}  // namespace synthtext
