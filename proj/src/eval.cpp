#include "synthtext/eval.hpp"

#include <algorithm>
#include <numeric>

#include "synthtext/errors.hpp"

namespace synthtext {

double iou(const cv::Rect2d& a, const cv::Rect2d& b) {
  const double ix = std::max(0.0, std::min(a.x + a.width, b.x + b.width) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.height, b.y + b.height) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.width * a.height + b.width * b.height - inter;
  return uni > 0 ? inter / uni : 0.0;
}

namespace {

std::vector<std::size_t> by_score(std::span<const ScoredBox> dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  return order;
}

// Pairs in visiting order; det_matched flags matched detections by input index.
std::vector<MatchPair> greedy(std::span<const ScoredBox> dets, std::span<const cv::Rect2d> gts,
                              std::span<const std::size_t> order, double thr, std::vector<bool>* det_matched) {
  std::vector<bool> used(gts.size(), false);
  std::vector<MatchPair> pairs;
  if (det_matched) det_matched->assign(dets.size(), false);
  for (std::size_t d : order) {
    double best = -1;
    std::size_t best_g = 0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (used[g]) continue;
      const double v = iou(dets[d].box, gts[g]);
      if (v > best) {
        best = v;
        best_g = g;
      }
    }
    if (best >= thr && best >= 0) {
      used[best_g] = true;
      pairs.push_back({d, best_g, best});
      if (det_matched) (*det_matched)[d] = true;
    }
  }
  return pairs;
}

}  // namespace

MatchResult match_detections(std::span<const ScoredBox> dets, std::span<const cv::Rect2d> gts, double iou_thresh) {
  const auto order = by_score(dets);
  MatchResult r;
  r.pairs = greedy(dets, gts, order, iou_thresh, nullptr);
  r.tp = static_cast<int>(r.pairs.size());
  r.fp = static_cast<int>(dets.size()) - r.tp;
  r.fn = static_cast<int>(gts.size()) - r.tp;
  return r;
}

PrCurve pr_sweep(std::span<const std::vector<ScoredBox>> dets, std::span<const std::vector<cv::Rect2d>> gts,
                 double iou_thresh) {
  if (dets.size() != gts.size()) throw ValidationError("detection and ground-truth image counts differ");
  PrCurve curve;
  for (const auto& g : gts) curve.gt_count += static_cast<int>(g.size());
  if (curve.gt_count == 0) throw ValidationError("no ground-truth boxes to evaluate against");

  // Greedy matching visits detections by score, so the matching at threshold t
  // is the prefix of the full matching over detections scoring >= t.
  struct Scored {
    double score;
    bool tp;
  };
  std::vector<Scored> all;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const auto order = by_score(dets[i]);
    std::vector<bool> matched;
    greedy(dets[i], gts[i], order, iou_thresh, &matched);
    for (std::size_t d = 0; d < dets[i].size(); ++d) all.push_back({dets[i][d].score, matched[d]});
  }
  std::stable_sort(all.begin(), all.end(), [](const Scored& a, const Scored& b) { return a.score > b.score; });

  int tp = 0, fp = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    (all[i].tp ? tp : fp) += 1;
    if (i + 1 < all.size() && all[i + 1].score == all[i].score) continue;
    PrPoint p;
    p.threshold = all[i].score;
    p.tp = tp;
    p.fp = fp;
    p.precision = static_cast<double>(tp) / (tp + fp);
    p.recall = static_cast<double>(tp) / curve.gt_count;
    p.f = p.precision + p.recall > 0 ? 2 * p.precision * p.recall / (p.precision + p.recall) : 0.0;
    if (curve.points.empty() || p.f > curve.best.f) curve.best = p;
    curve.points.push_back(p);
  }
  curve.max_recall = static_cast<double>(tp) / curve.gt_count;
  return curve;
}

}  // namespace synthtext
