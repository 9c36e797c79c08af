#pragma once

#include <vector>

#include <opencv2/core.hpp>

namespace synthtext {

/// One contiguous segment. The mask is stored cropped to `bbox`.
struct Region {
  int label = 0;
  cv::Rect bbox;                   // image frame
  cv::Mat mask;                    // CV_8U, bbox-sized, 255 inside
  int area_px = 0;
  std::vector<cv::Point> contour;  // outer boundary pixels, image frame

  bool contains(int x, int y) const {
    if (!bbox.contains({x, y})) return false;
    return mask.at<unsigned char>(y - bbox.y, x - bbox.x) != 0;
  }

  /// Mask expanded to a full raster of `size`.
  cv::Mat full_mask(cv::Size size) const;
};

}  // namespace synthtext
