#include "synthtext/chroma.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include <opencv2/imgproc.hpp>

#include "synthtext/errors.hpp"

namespace synthtext {

namespace {

// D65 reference white.
constexpr double kXn = 0.95047, kYn = 1.0, kZn = 1.08883;
constexpr double kEps = 216.0 / 24389.0;
constexpr double kKappa = 24389.0 / 27.0;

double srgb_to_linear(double c) { return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4); }
double linear_to_srgb(double c) { return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055; }
double f_lab(double t) { return t > kEps ? std::cbrt(t) : (kKappa * t + 16.0) / 116.0; }
double f_lab_inv(double f) {
  const double t = f * f * f;
  return t > kEps ? t : (116.0 * f - 16.0) / kKappa;
}

}  // namespace

double LabColor::distance(const LabColor& o) const { return std::sqrt((L - o.L) * (L - o.L) + (a - o.a) * (a - o.a) + (b - o.b) * (b - o.b)); }

LabColor rgb_to_lab(const cv::Vec3d& rgb) {
  const double r = srgb_to_linear(std::clamp(rgb[0], 0.0, 1.0));
  const double g = srgb_to_linear(std::clamp(rgb[1], 0.0, 1.0));
  const double b = srgb_to_linear(std::clamp(rgb[2], 0.0, 1.0));
  const double X = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double Y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double Z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
  const double fx = f_lab(X / kXn), fy = f_lab(Y / kYn), fz = f_lab(Z / kZn);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

cv::Vec3d lab_to_rgb(const LabColor& lab) {
  const double fy = (lab.L + 16.0) / 116.0;
  const double fx = fy + lab.a / 500.0;
  const double fz = fy - lab.b / 200.0;
  const double X = kXn * f_lab_inv(fx), Y = kYn * f_lab_inv(fy), Z = kZn * f_lab_inv(fz);
  const double r = 3.2404542 * X - 1.5371385 * Y - 0.4985314 * Z;
  const double g = -0.9692660 * X + 1.8760108 * Y + 0.0415560 * Z;
  const double b = 0.0556434 * X - 0.2040259 * Y + 1.0572252 * Z;
  return {std::clamp(linear_to_srgb(std::max(r, 0.0)), 0.0, 1.0), std::clamp(linear_to_srgb(std::max(g, 0.0)), 0.0, 1.0),
          std::clamp(linear_to_srgb(std::max(b, 0.0)), 0.0, 1.0)};
}

namespace {

double sq(const LabColor& p, const LabColor& q) {
  return (p.L - q.L) * (p.L - q.L) + (p.a - q.a) * (p.a - q.a) + (p.b - q.b) * (p.b - q.b);
}

struct Lloyd {
  LabColor c[2];
  std::size_t count[2] = {0, 0};
  double inertia = 0;
};

Lloyd run_lloyd(std::span<const LabColor> px, LabColor c0, LabColor c1, int max_iter) {
  Lloyd out{{c0, c1}};
  std::vector<int> assign(px.size(), -1);
  double s[2][3] = {};
  auto recompute = [&] {
    std::fill(&s[0][0], &s[0][0] + 6, 0.0);
    out.count[0] = out.count[1] = 0;
    for (std::size_t i = 0; i < px.size(); ++i) {
      const int k = assign[i];
      s[k][0] += px[i].L;
      s[k][1] += px[i].a;
      s[k][2] += px[i].b;
      ++out.count[k];
    }
    for (int k = 0; k < 2; ++k)
      if (out.count[k]) out.c[k] = {s[k][0] / out.count[k], s[k][1] / out.count[k], s[k][2] / out.count[k]};
  };
  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < px.size(); ++i) {
      const int k = sq(px[i], out.c[1]) < sq(px[i], out.c[0]) ? 1 : 0;
      if (k != assign[i]) {
        assign[i] = k;
        changed = true;
      }
    }
    if (!changed) break;
    recompute();
  }
  recompute();
  // Hartigan single-point moves escape Lloyd fixed points that are not local
  // minima of the inertia; each accepted move strictly lowers it.
  for (int pass = 0; pass < 4 * max_iter; ++pass) {
    bool moved = false;
    for (std::size_t i = 0; i < px.size(); ++i) {
      const int a = assign[i], b = 1 - a;
      const double na = static_cast<double>(out.count[a]), nb = static_cast<double>(out.count[b]);
      if (na < 2) continue;
      const double gain = na / (na - 1) * sq(px[i], out.c[a]) - nb / (nb + 1) * sq(px[i], out.c[b]);
      if (!(gain > 1e-12 * (1 + sq(px[i], out.c[a])))) continue;
      assign[i] = b;
      const double v[3] = {px[i].L, px[i].a, px[i].b};
      for (int d = 0; d < 3; ++d) {
        s[a][d] -= v[d];
        s[b][d] += v[d];
      }
      --out.count[a];
      ++out.count[b];
      for (int k = 0; k < 2; ++k)
        out.c[k] = {s[k][0] / out.count[k], s[k][1] / out.count[k], s[k][2] / out.count[k]};
      moved = true;
    }
    if (!moved) break;
  }
  out.inertia = 0;
  for (std::size_t i = 0; i < px.size(); ++i) out.inertia += sq(px[i], out.c[assign[i]]);
  return out;
}

}  // namespace

std::optional<TwoMeans> two_means(std::span<const LabColor> px, Rng& rng, const PaletteLearnConfig& cfg) {
  if (px.empty()) return std::nullopt;
  const bool distinct = std::any_of(px.begin(), px.end(), [&](const LabColor& p) { return !(p == px[0]); });
  if (!distinct) return std::nullopt;

  std::optional<Lloyd> best;
  std::vector<double> d2(px.size());
  for (int r = 0; r < std::max(1, cfg.restarts); ++r) {
    // k-means++: second seed drawn proportionally to squared distance from the first.
    const LabColor first = px[rng.uniform_index(px.size())];
    double total = 0;
    for (std::size_t i = 0; i < px.size(); ++i) total += d2[i] = sq(px[i], first);
    double u = rng.uniform() * total;
    std::size_t pick = px.size() - 1;
    for (std::size_t i = 0; i < px.size(); ++i) {
      if (d2[i] > 0 && u < d2[i]) {
        pick = i;
        break;
      }
      u -= d2[i];
    }
    if (d2[pick] == 0) {
      pick = static_cast<std::size_t>(std::max_element(d2.begin(), d2.end()) - d2.begin());
    }
    Lloyd run = run_lloyd(px, first, px[pick], cfg.max_iterations);
    if (!best || run.inertia < best->inertia) best = run;
  }
  TwoMeans out;
  const int bg = best->count[1] > best->count[0] ? 1 : 0;
  out.bg = best->c[bg];
  out.fg = best->c[1 - bg];
  out.bg_count = best->count[bg];
  out.fg_count = best->count[1 - bg];
  out.inertia = best->inertia;
  return out;
}

Palette learn_palette(std::span<const cv::Mat> crops, Rng& rng, const PaletteLearnConfig& cfg, std::size_t* skipped) {
  Palette palette;
  std::size_t skip = 0;
  for (const auto& crop : crops) {
    cv::Mat rgb;
    if (crop.type() == CV_8UC3) {
      cv::Mat tmp;
      cv::cvtColor(crop, tmp, cv::COLOR_BGR2RGB);
      tmp.convertTo(rgb, CV_64FC3, 1.0 / 255.0);
    } else {
      crop.convertTo(rgb, CV_64FC3);
    }
    std::vector<LabColor> px;
    px.reserve(rgb.total());
    for (int y = 0; y < rgb.rows; ++y)
      for (int x = 0; x < rgb.cols; ++x) px.push_back(rgb_to_lab(rgb.at<cv::Vec3d>(y, x)));
    const auto tm = two_means(px, rng, cfg);
    if (!tm) {
      ++skip;
      std::clog << "warning: skipping single-color crop\n";
      continue;
    }
    palette.pairs.push_back({tm->fg, tm->bg});
  }
  if (skipped) *skipped = skip;
  return palette;
}

std::size_t select_pair_index(const LabColor& region_mean, const Palette& palette) {
  if (palette.pairs.empty()) throw ValidationError("select_pair: empty palette");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < palette.pairs.size(); ++i) {
    const double d = sq(palette.pairs[i].bg, region_mean);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

const ColorPair& select_pair(const LabColor& region_mean, const Palette& palette) {
  return palette.pairs[select_pair_index(region_mean, palette)];
}

std::optional<BorderSpec> choose_decoration(const LabColor& fg, const LabColor& bg, Rng& rng,
                                            const DecorationConfig& cfg) {
  if (rng.uniform() >= cfg.border_prob) return std::nullopt;
  BorderSpec spec;
  if (rng.uniform() < cfg.shift_rule_prob) {
    spec.rule = BorderRule::LightnessShift;
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    spec.color = {std::clamp(fg.L + sign * cfg.lightness_shift, 0.0, 100.0), fg.a, fg.b};
  } else {
    spec.rule = BorderRule::Midpoint;
    spec.color = {(fg.L + bg.L) / 2, (fg.a + bg.a) / 2, (fg.b + bg.b) / 2};
  }
  return spec;
}

void save_palette(const std::filesystem::path& path, const Palette& palette) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write palette: " + path.string());
  out << std::setprecision(17);
  for (const auto& p : palette.pairs)
    out << p.fg.L << ' ' << p.fg.a << ' ' << p.fg.b << ' ' << p.bg.L << ' ' << p.bg.a << ' ' << p.bg.b << '\n';
}

Palette load_palette(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot read palette: " + path.string());
  Palette palette;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::istringstream ss(line);
    ColorPair p;
    if (!(ss >> p.fg.L >> p.fg.a >> p.fg.b >> p.bg.L >> p.bg.a >> p.bg.b))
      throw IngestionError("bad palette row " + std::to_string(lineno) + " in " + path.string());
    palette.pairs.push_back(p);
  }
  if (palette.pairs.empty()) throw ValidationError("palette is empty: " + path.string());
  return palette;
}

LabColor mean_lab(const cv::Mat& rgb, const cv::Mat& mask, cv::Point off) {
  double L = 0, a = 0, b = 0;
  std::size_t n = 0;
  for (int y = 0; y < mask.rows; ++y)
    for (int x = 0; x < mask.cols; ++x) {
      if (!mask.at<unsigned char>(y, x)) continue;
      const LabColor c = rgb_to_lab(rgb.at<cv::Vec3d>(y + off.y, x + off.x));
      L += c.L;
      a += c.a;
      b += c.b;
      ++n;
    }
  if (n == 0) return {};
  return {L / n, a / n, b / n};
}

}  // namespace synthtext
