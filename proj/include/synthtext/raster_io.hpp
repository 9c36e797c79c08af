#pragma once

#include <filesystem>

#include <opencv2/core.hpp>

namespace synthtext {

// Single-channel float rasters are stored as an ASCII header "H W f32\n"
// followed by H*W little-endian 32-bit floats in row-major order.

/// Returns a CV_64FC1 raster.
cv::Mat read_raster_f32(const std::filesystem::path& path);

void write_raster_f32(const std::filesystem::path& path, const cv::Mat& raster);

/// Reads a boundary/depth raster either from the raw f32 format (".raw") or
/// from a 16-bit grayscale image scaled to [0, 1].
cv::Mat read_scalar_raster(const std::filesystem::path& path);

/// RGB image in [0,1] as CV_64FC3 (channel order R, G, B).
cv::Mat read_rgb(const std::filesystem::path& path);

/// Writes a CV_64FC3 RGB [0,1] image as 8-bit PNG.
void write_rgb_png(const std::filesystem::path& path, const cv::Mat& rgb);

/// Quantizes a CV_64FC3 RGB [0,1] image to CV_8UC3 BGR.
cv::Mat to_bgr8(const cv::Mat& rgb);

/// Converts CV_8UC3 BGR to CV_64FC3 RGB in [0,1].
cv::Mat from_bgr8(const cv::Mat& bgr);

}  // namespace synthtext
