#include "synthtext/raster_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "synthtext/errors.hpp"

namespace synthtext {

namespace {

float load_le_f32(const unsigned char* p) {
  std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                       (static_cast<std::uint32_t>(p[2]) << 16) |
                       (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

void store_le_f32(float v, unsigned char* p) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  p[0] = bits & 0xff;
  p[1] = (bits >> 8) & 0xff;
  p[2] = (bits >> 16) & 0xff;
  p[3] = (bits >> 24) & 0xff;
}

}  // namespace

cv::Mat read_raster_f32(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open raster: " + path.string());
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  int rows = 0, cols = 0;
  std::string kind;
  if (!(hs >> rows >> cols >> kind) || kind != "f32" || rows <= 0 || cols <= 0)
    throw IngestionError("bad raster header in " + path.string());

  const std::size_t count = static_cast<std::size_t>(rows) * cols;
  std::vector<unsigned char> bytes(count * 4);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size())
    throw IngestionError("truncated raster: " + path.string());

  cv::Mat out(rows, cols, CV_64FC1);
  for (int y = 0; y < rows; ++y) {
    auto* row = out.ptr<double>(y);
    for (int x = 0; x < cols; ++x)
      row[x] = load_le_f32(&bytes[(static_cast<std::size_t>(y) * cols + x) * 4]);
  }
  return out;
}

void write_raster_f32(const std::filesystem::path& path, const cv::Mat& raster) {
  CV_Assert(raster.channels() == 1);
  cv::Mat src;
  raster.convertTo(src, CV_64F);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write raster: " + path.string());
  out << src.rows << ' ' << src.cols << " f32\n";
  std::vector<unsigned char> bytes(static_cast<std::size_t>(src.total()) * 4);
  std::size_t k = 0;
  for (int y = 0; y < src.rows; ++y) {
    const auto* row = src.ptr<double>(y);
    for (int x = 0; x < src.cols; ++x, k += 4) store_le_f32(static_cast<float>(row[x]), &bytes[k]);
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

cv::Mat read_scalar_raster(const std::filesystem::path& path) {
  if (path.extension() == ".raw") return read_raster_f32(path);
  cv::Mat img = cv::imread(path.string(), cv::IMREAD_ANYDEPTH | cv::IMREAD_GRAYSCALE);
  if (img.empty()) throw IngestionError("cannot read raster image: " + path.string());
  cv::Mat out;
  const double scale = img.depth() == CV_16U ? 1.0 / 65535.0 : 1.0 / 255.0;
  img.convertTo(out, CV_64F, scale);
  return out;
}

cv::Mat from_bgr8(const cv::Mat& bgr) {
  cv::Mat rgb, out;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  rgb.convertTo(out, CV_64FC3, 1.0 / 255.0);
  return out;
}

cv::Mat to_bgr8(const cv::Mat& rgb) {
  cv::Mat u8, bgr;
  rgb.convertTo(u8, CV_8UC3, 255.0);
  cv::cvtColor(u8, bgr, cv::COLOR_RGB2BGR);
  return bgr;
}

cv::Mat read_rgb(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw IngestionError("cannot read image: " + path.string());
  return from_bgr8(bgr);
}

void write_rgb_png(const std::filesystem::path& path, const cv::Mat& rgb) {
  if (!cv::imwrite(path.string(), to_bgr8(rgb))) throw IoError("cannot write image: " + path.string());
}

}  // namespace synthtext
