#pragma once

#include <span>
#include <vector>

#include <opencv2/core.hpp>

namespace synthtext {

/// Intersection over union of two axis-aligned boxes; 0 for an empty union.
double iou(const cv::Rect2d& a, const cv::Rect2d& b);

struct ScoredBox {
  cv::Rect2d box;
  double score = 0;
};

struct MatchPair {
  std::size_t det = 0, gt = 0;
  double iou = 0;
};

struct MatchResult {
  int tp = 0, fp = 0, fn = 0;
  std::vector<MatchPair> pairs;
};

/// Greedy one-to-one matching: detections in descending score order (input
/// order on ties) each take the unmatched ground truth of largest IoU, lowest
/// index on ties, if that IoU reaches the threshold.
MatchResult match_detections(std::span<const ScoredBox> dets, std::span<const cv::Rect2d> gts,
                             double iou_thresh = 0.5);

struct PrPoint {
  double threshold = 0;
  double precision = 0, recall = 0, f = 0;
  int tp = 0, fp = 0;
};

struct PrCurve {
  std::vector<PrPoint> points;  // descending threshold, one per distinct score
  PrPoint best;                 // maximum F (highest threshold on ties)
  double max_recall = 0;        // with every detection accepted
  int gt_count = 0;
};

/// Precision/recall at every distinct detection score across all images.
/// Throws ValidationError when there is no ground truth at all.
PrCurve pr_sweep(std::span<const std::vector<ScoredBox>> dets, std::span<const std::vector<cv::Rect2d>> gts,
                 double iou_thresh = 0.5);

}  // namespace synthtext
