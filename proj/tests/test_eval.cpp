#include <doctest.h>

#include <algorithm>

#include "synthtext/errors.hpp"
#include "synthtext/eval.hpp"
#include "synthtext/rng.hpp"

using namespace synthtext;

namespace {

// Loop-only reimplementation of greedy matching.
MatchResult oracle_match(const std::vector<ScoredBox>& dets, const std::vector<cv::Rect2d>& gts, double thr) {
  MatchResult m;
  std::vector<bool> det_done(dets.size(), false), gt_used(gts.size(), false);
  for (std::size_t step = 0; step < dets.size(); ++step) {
    std::size_t d = dets.size();
    for (std::size_t i = 0; i < dets.size(); ++i)
      if (!det_done[i] && (d == dets.size() || dets[i].score > dets[d].score)) d = i;
    det_done[d] = true;
    double best = -1;
    std::size_t g = gts.size();
    for (std::size_t j = 0; j < gts.size(); ++j) {
      if (gt_used[j]) continue;
      const double v = iou(dets[d].box, gts[j]);
      if (v > best) {
        best = v;
        g = j;
      }
    }
    if (g < gts.size() && best >= thr) {
      gt_used[g] = true;
      ++m.tp;
      m.pairs.push_back({d, g, best});
    } else {
      ++m.fp;
    }
  }
  m.fn = static_cast<int>(gts.size()) - m.tp;
  return m;
}

}  // namespace

TEST_CASE("iou examples") {
  const cv::Rect2d a(0, 0, 1, 1);
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, {3, 3, 1, 1}) == 0.0);
  CHECK(iou(a, {0.5, 0, 1, 1}) == 1.0 / 3.0);
  CHECK(iou({0, 0, 0, 0}, {0, 0, 0, 0}) == 0.0);
}

TEST_CASE("matching examples") {
  const std::vector<cv::Rect2d> gt{{10, 10, 20, 20}};
  const std::vector<ScoredBox> one{{{10, 10, 20, 20}, 0.9}};
  auto m = match_detections(one, gt);
  CHECK(m.tp == 1);
  CHECK(m.fp == 0);
  CHECK(m.fn == 0);
  const std::vector<ScoredBox> two{{{10, 10, 20, 20}, 0.6}, {{11, 10, 20, 20}, 0.9}};
  m = match_detections(two, gt);
  CHECK(m.tp == 1);
  CHECK(m.fp == 1);
  REQUIRE(m.pairs.size() == 1);
  CHECK(m.pairs[0].det == 1);
}

TEST_CASE("matching agrees with the loop oracle") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<cv::Rect2d> gts;
    std::vector<ScoredBox> dets;
    const int ng = rng.uniform_int(0, 10), nd = rng.uniform_int(0, 15);
    for (int i = 0; i < ng; ++i) gts.emplace_back(rng.uniform(0, 100), rng.uniform(0, 100), rng.uniform(5, 30), rng.uniform(5, 30));
    for (int i = 0; i < nd; ++i) {
      cv::Rect2d b = ng > 0 && rng.bernoulli(0.6) ? gts[rng.uniform_index(ng)] : cv::Rect2d(rng.uniform(0, 100), rng.uniform(0, 100), 20, 20);
      b.x += rng.uniform(-4, 4);
      b.y += rng.uniform(-4, 4);
      dets.push_back({b, rng.uniform()});
    }
    for (const double thr : {0.3, 0.5, 0.7}) {
      const auto got = match_detections(dets, gts, thr);
      const auto want = oracle_match(dets, gts, thr);
      CHECK(got.tp == want.tp);
      CHECK(got.fp == want.fp);
      CHECK(got.fn == want.fn);
      CHECK(got.tp + got.fn == ng);
      CHECK(got.tp + got.fp == nd);
      REQUIRE(got.pairs.size() == want.pairs.size());
      for (std::size_t k = 0; k < got.pairs.size(); ++k) {
        CHECK(got.pairs[k].det == want.pairs[k].det);
        CHECK(got.pairs[k].gt == want.pairs[k].gt);
      }
    }
    CHECK(match_detections(dets, gts, 0.7).tp <= match_detections(dets, gts, 0.5).tp);
  }
}

TEST_CASE("pr sweep") {
  const std::vector<std::vector<cv::Rect2d>> gts{{{0, 0, 10, 10}, {20, 20, 10, 10}}, {{5, 5, 8, 8}}};
  std::vector<std::vector<ScoredBox>> perfect(2);
  for (std::size_t i = 0; i < 2; ++i)
    for (const auto& g : gts[i]) perfect[i].push_back({g, 1.0});
  const PrCurve c = pr_sweep(perfect, gts);
  for (const auto& p : c.points) {
    CHECK(p.precision == 1.0);
    CHECK(p.recall == 1.0);
    CHECK(p.f == 1.0);
  }
  CHECK(c.best.f == 1.0);
  CHECK(c.max_recall == 1.0);

  const std::vector<std::vector<ScoredBox>> none(2);
  const PrCurve z = pr_sweep(none, gts);
  CHECK(z.max_recall == 0.0);
  CHECK(z.best.f == 0.0);

  const std::vector<std::vector<cv::Rect2d>> empty(2);
  CHECK_THROWS_AS(pr_sweep(perfect, empty), ValidationError);

  Rng rng(9);
  std::vector<std::vector<ScoredBox>> noisy(2);
  for (std::size_t i = 0; i < 2; ++i) {
    for (const auto& g : gts[i]) noisy[i].push_back({g, rng.uniform()});
    for (int k = 0; k < 5; ++k) noisy[i].push_back({{rng.uniform(0, 50), rng.uniform(0, 50), 6, 6}, rng.uniform()});
  }
  const PrCurve n = pr_sweep(noisy, gts);
  double last_thr = 2;
  for (const auto& p : n.points) {
    CHECK(p.threshold < last_thr);
    CHECK(p.precision >= 0);
    CHECK(p.precision <= 1);
    CHECK(p.f <= 2 * std::min(p.precision, p.recall) + 1e-12);
    last_thr = p.threshold;
  }
  // Points run from high to low threshold, so recall never drops along the list.
  for (std::size_t k = 1; k < n.points.size(); ++k) CHECK(n.points[k].recall >= n.points[k - 1].recall);
  CHECK(n.max_recall == n.points.back().recall);
}
