#include "occdepth/metrics.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "support/gen.hpp"
#include "support/oracles.hpp"

using namespace occdepth;

namespace {

TEST(OcclusionPrf, PerfectPrediction) {
  const DirectedFacts facts{{1, 2}, {3, 4}};
  const OcclusionPRF prf = occlusion_prf(facts, facts);
  EXPECT_EQ(prf.recall, 1.0);
  EXPECT_EQ(prf.precision, 1.0);
  EXPECT_EQ(prf.f1, 1.0);
}

TEST(OcclusionPrf, HalfRecallFullPrecision) {
  const OcclusionPRF prf = occlusion_prf({{1, 2}, {3, 4}}, {{1, 2}});
  EXPECT_DOUBLE_EQ(prf.recall, 0.5);
  EXPECT_DOUBLE_EQ(prf.precision, 1.0);
  EXPECT_DOUBLE_EQ(prf.f1, 2.0 / 3.0);
}

TEST(OcclusionPrf, BidirectionalExpandsToTwoFacts) {
  ImageAnnotation gt;
  gt.image_id = 1;
  for (int id : {1, 2}) {
    InstanceRef ref;
    ref.image_id = 1;
    ref.instance_id = id;
    gt.instances.push_back(ref);
  }
  PairOrder p;
  p.a = 1;
  p.b = 2;
  p.occlusion = OcclusionRelation::Bidirectional;
  gt.pairs.push_back(p);

  ImageAnnotation pred = gt;
  pred.pairs[0].occlusion = OcclusionRelation::AOccludesB;

  const OcclusionPRF prf = finalize_occlusion(
      occlusion_counts_for_image(gt, pred, OcclusionMode::WithBidirectional));
  EXPECT_DOUBLE_EQ(prf.recall, 0.5);
  EXPECT_DOUBLE_EQ(prf.precision, 1.0);
  EXPECT_DOUBLE_EQ(prf.f1, 2.0 / 3.0);
}

TEST(OcclusionPrf, ZeroDenominatorConventions) {
  const OcclusionPRF both_empty = occlusion_prf({}, {});
  EXPECT_EQ(both_empty.recall, 1.0);
  EXPECT_EQ(both_empty.precision, 1.0);
  EXPECT_EQ(both_empty.f1, 1.0);

  const OcclusionPRF empty_gt = occlusion_prf({}, {{1, 2}});
  EXPECT_EQ(empty_gt.recall, 0.0);
  EXPECT_EQ(empty_gt.precision, 0.0);
  EXPECT_EQ(empty_gt.f1, 0.0);

  const OcclusionPRF empty_pred = occlusion_prf({{1, 2}}, {});
  EXPECT_EQ(empty_pred.recall, 0.0);
  EXPECT_EQ(empty_pred.precision, 0.0);
  EXPECT_EQ(empty_pred.f1, 0.0);
}

TEST(OcclusionPrf, PredictionOutsideUniverseRejected) {
  ImageAnnotation gt;
  gt.image_id = 1;
  for (int id : {1, 2, 3}) {
    InstanceRef ref;
    ref.image_id = 1;
    ref.instance_id = id;
    gt.instances.push_back(ref);
  }
  PairOrder p;
  p.a = 1;
  p.b = 2;
  p.occlusion = OcclusionRelation::AOccludesB;
  gt.pairs.push_back(p);

  ImageAnnotation pred = gt;
  PairOrder extra;
  extra.a = 2;
  extra.b = 3;
  extra.occlusion = OcclusionRelation::AOccludesB;
  pred.pairs.push_back(extra);
  EXPECT_THROW(
      occlusion_counts_for_image(gt, pred, OcclusionMode::WithBidirectional),
      ValidationError);
}

// Randomized equivalence against the brute-force directed-fact enumerator.
// Without-bidirectional predictions use the three-label set, matching
// methods that cannot emit bidirectional orders.
TEST(OcclusionPrf, MatchesBruteForceOracle) {
  testgen::Rng rng(101);
  for (int trial = 0; trial < 500; ++trial) {
    const auto gt = testgen::random_image(rng, trial + 1);
    const auto pred_full = testgen::random_predictions(
        rng, DatasetFile{{gt}});
    const ImageAnnotation& pred = pred_full.images[0];

    std::vector<oracle::RelPair> rel_pairs;
    for (const auto& g : gt.pairs) {
      oracle::RelPair rp;
      rp.a = g.a;
      rp.b = g.b;
      rp.gt = g.occlusion.value_or(OcclusionRelation::None);
      rp.pred = OcclusionRelation::None;
      for (const auto& q : pred.pairs)
        if (q.a == g.a && q.b == g.b)
          rp.pred = q.occlusion.value_or(OcclusionRelation::None);
      rel_pairs.push_back(rp);
    }

    const auto expected =
        oracle::occlusion_prf(rel_pairs, /*without_bi=*/false);
    const auto got = finalize_occlusion(occlusion_counts_for_image(
        gt, pred, OcclusionMode::WithBidirectional));
    ASSERT_EQ(got.recall, expected.recall);
    ASSERT_EQ(got.precision, expected.precision);
    ASSERT_EQ(got.f1, expected.f1);
    ASSERT_LE(got.f1, std::max(got.precision, got.recall) + 1e-15);

    // Without-bi: restrict predictions to the three-label set first.
    ImageAnnotation pred3 = pred;
    auto rel3 = rel_pairs;
    for (auto& q : pred3.pairs)
      if (q.occlusion == OcclusionRelation::Bidirectional)
        q.occlusion = OcclusionRelation::AOccludesB;
    for (auto& rp : rel3)
      if (rp.pred == OcclusionRelation::Bidirectional)
        rp.pred = OcclusionRelation::AOccludesB;

    const auto expected3 = oracle::occlusion_prf(rel3, /*without_bi=*/true);
    const auto got3 = finalize_occlusion(occlusion_counts_for_image(
        gt, pred3, OcclusionMode::WithoutBidirectional));
    ASSERT_EQ(got3.recall, expected3.recall);
    ASSERT_EQ(got3.precision, expected3.precision);
    ASSERT_EQ(got3.f1, expected3.f1);
  }
}

TEST(Whdr, AllCorrectIsZero) {
  std::vector<WhdrItem> items{{DepthOrder::Closer, DepthOrder::Closer, 2,
                               RangeKind::Distinct},
                              {DepthOrder::Equal, DepthOrder::Equal, 5,
                               RangeKind::Overlap}};
  EXPECT_EQ(whdr(items, WhdrCategory::All), 0.0);
}

TEST(Whdr, AllWrongIsOne) {
  std::vector<WhdrItem> items{{DepthOrder::Closer, DepthOrder::Farther, 2,
                               RangeKind::Distinct},
                              {DepthOrder::Equal, DepthOrder::Closer, 5,
                               RangeKind::Overlap}};
  EXPECT_EQ(whdr(items, WhdrCategory::All), 1.0);
}

TEST(Whdr, HandDerivedThird) {
  // Weights 2/2 = 1 and 2/4 = 0.5; only the second disagrees: 0.5 / 1.5.
  std::vector<WhdrItem> items{
      {DepthOrder::Closer, DepthOrder::Closer, 2, RangeKind::Distinct},
      {DepthOrder::Equal, DepthOrder::Farther, 4, RangeKind::Distinct}};
  EXPECT_DOUBLE_EQ(whdr(items, WhdrCategory::All), 1.0 / 3.0);
}

TEST(Whdr, CategoryFiltersOnGroundTruthRangeKind) {
  std::vector<WhdrItem> items{
      {DepthOrder::Closer, DepthOrder::Farther, 2, RangeKind::Distinct},
      {DepthOrder::Closer, DepthOrder::Closer, 2, RangeKind::Overlap}};
  EXPECT_EQ(whdr(items, WhdrCategory::Distinct), 1.0);
  EXPECT_EQ(whdr(items, WhdrCategory::Overlap), 0.0);
  EXPECT_EQ(whdr(items, WhdrCategory::All), 0.5);
}

TEST(Whdr, EmptyCategoryIsAnError) {
  std::vector<WhdrItem> items{
      {DepthOrder::Closer, DepthOrder::Closer, 2, RangeKind::Distinct}};
  EXPECT_THROW(whdr(items, WhdrCategory::Overlap), ValidationError);
  EXPECT_THROW(whdr({}, WhdrCategory::All), ValidationError);
}

TEST(Whdr, CountBelowTwoRejected) {
  std::vector<WhdrItem> items{
      {DepthOrder::Closer, DepthOrder::Closer, 1, RangeKind::Distinct}};
  EXPECT_THROW(whdr(items, WhdrCategory::All), ValidationError);
}

std::vector<WhdrItem> random_whdr_items(testgen::Rng& rng, int max_items) {
  std::vector<WhdrItem> items;
  const int n = testgen::pick(rng, 1, max_items);
  for (int i = 0; i < n; ++i)
    items.push_back({testgen::random_depth_order(rng),
                     testgen::random_depth_order(rng), testgen::pick(rng, 2, 8),
                     testgen::pick(rng, 0, 1) ? RangeKind::Overlap
                                              : RangeKind::Distinct});
  return items;
}

TEST(Whdr, MatchesEnumerationOracle) {
  testgen::Rng rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto items = random_whdr_items(rng, 12);
    std::vector<oracle::WhdrPair> pairs;
    for (const auto& it : items)
      pairs.push_back(
          {it.gt, it.pred, it.count, it.kind == RangeKind::Overlap});
    for (char cat : {'d', 'o', 'a'}) {
      const WhdrCategory category = cat == 'd'   ? WhdrCategory::Distinct
                                    : cat == 'o' ? WhdrCategory::Overlap
                                                 : WhdrCategory::All;
      bool has_any = false;
      for (const auto& p : pairs) {
        if (cat == 'd' && !p.overlap) has_any = true;
        if (cat == 'o' && p.overlap) has_any = true;
        if (cat == 'a') has_any = true;
      }
      if (!has_any) continue;
      ASSERT_DOUBLE_EQ(whdr(items, category), oracle::whdr(pairs, cat));
    }
  }
}

TEST(Whdr, InvariantUnderUniformCountScaling) {
  testgen::Rng rng(37);
  for (int trial = 0; trial < 200; ++trial) {
    auto items = random_whdr_items(rng, 10);
    auto doubled = items;
    for (auto& it : doubled) it.count *= 2;
    EXPECT_NEAR(whdr(items, WhdrCategory::All),
                whdr(doubled, WhdrCategory::All), 1e-12);
  }
}

TEST(Whdr, FlippingACorrectPredictionNeverDecreases) {
  testgen::Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    auto items = random_whdr_items(rng, 10);
    const double before = whdr(items, WhdrCategory::All);
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (items[i].pred != items[i].gt) continue;
      auto flipped = items;
      flipped[i].pred = items[i].gt == DepthOrder::Closer
                            ? DepthOrder::Farther
                            : DepthOrder::Closer;
      EXPECT_GE(whdr(flipped, WhdrCategory::All), before - 1e-12);
    }
  }
}

TEST(Whdr, AllLiesBetweenCategoryExtremes) {
  testgen::Rng rng(43);
  for (int trial = 0; trial < 1000; ++trial) {
    auto items = random_whdr_items(rng, 12);
    bool has_distinct = false;
    bool has_overlap = false;
    for (const auto& it : items) {
      has_distinct |= it.kind == RangeKind::Distinct;
      has_overlap |= it.kind == RangeKind::Overlap;
    }
    if (!has_distinct || !has_overlap) continue;
    const double d = whdr(items, WhdrCategory::Distinct);
    const double o = whdr(items, WhdrCategory::Overlap);
    const double a = whdr(items, WhdrCategory::All);
    EXPECT_GE(a, std::min(d, o) - 1e-12);
    EXPECT_LE(a, std::max(d, o) + 1e-12);
  }
}

Grid grid_from(std::initializer_list<double> values) {
  Grid g(1, static_cast<int>(values.size()));
  std::copy(values.begin(), values.end(), g.values.begin());
  return g;
}

TEST(MedianScale, HandExample) {
  const Grid pred = grid_from({1.0, 3.0});
  const Grid gt = grid_from({2.0, 8.0});
  const Grid scaled = median_scale(pred, gt, {{0, 0}, {0, 1}});
  EXPECT_DOUBLE_EQ(scaled.at(0, 0), 2.5);
  EXPECT_DOUBLE_EQ(scaled.at(0, 1), 7.5);
}

TEST(MedianScale, ExactScalarMultipleRecoversGt) {
  testgen::Rng rng(47);
  const Grid gt = testgen::random_grid(rng, 4, 5, 0.5, 2.0);
  Grid pred = gt;
  for (double& v : pred.values) v *= 2.0;
  const auto valid = valid_from_positive(gt);
  const Grid scaled = median_scale(pred, gt, valid);
  for (std::size_t i = 0; i < gt.values.size(); ++i)
    EXPECT_DOUBLE_EQ(scaled.values[i], gt.values[i]);
}

TEST(MedianScale, IdentityWhenEqual) {
  testgen::Rng rng(53);
  const Grid gt = testgen::random_grid(rng, 3, 3, 0.5, 2.0);
  const Grid scaled = median_scale(gt, gt, valid_from_positive(gt));
  EXPECT_EQ(scaled, gt);
}

TEST(MedianScale, ZeroMedianRejected) {
  const Grid pred = grid_from({-1.0, 0.0, 1.0});
  const Grid gt = grid_from({1.0, 2.0, 3.0});
  EXPECT_THROW(median_scale(pred, gt, {{0, 0}, {0, 1}, {0, 2}}),
               ValidationError);
}

TEST(DepthMapMetrics, PerfectPrediction) {
  testgen::Rng rng(59);
  const Grid gt = testgen::random_grid(rng, 6, 6, 0.5, 5.0);
  const auto report =
      depth_map_metrics(gt, gt, valid_from_positive(gt), false);
  EXPECT_EQ(report.abs_rel, 0.0);
  EXPECT_EQ(report.sq_rel, 0.0);
  EXPECT_EQ(report.rmse_log, 0.0);
  EXPECT_EQ(report.delta1, 1.0);
  EXPECT_EQ(report.delta2, 1.0);
  EXPECT_EQ(report.delta3, 1.0);
}

TEST(DepthMapMetrics, DoubledPredictionUnscaled) {
  testgen::Rng rng(61);
  const Grid gt = testgen::random_grid(rng, 5, 7, 0.5, 5.0);
  Grid pred = gt;
  for (double& v : pred.values) v *= 2.0;
  const auto report =
      depth_map_metrics(gt, pred, valid_from_positive(gt), false);
  EXPECT_NEAR(report.abs_rel, 1.0, 1e-12);
  EXPECT_EQ(report.delta1, 0.0);  // ratio 2 >= 1.25
  EXPECT_EQ(report.delta2, 0.0);  // 2 >= 1.5625
  EXPECT_EQ(report.delta3, 0.0);  // 2 >= 1.953125
}

TEST(DepthMapMetrics, DoubledPredictionWithMedianScaling) {
  testgen::Rng rng(67);
  const Grid gt = testgen::random_grid(rng, 5, 7, 0.5, 5.0);
  Grid pred = gt;
  for (double& v : pred.values) v *= 2.0;
  const auto report =
      depth_map_metrics(gt, pred, valid_from_positive(gt), true);
  EXPECT_LT(report.abs_rel, 1e-9);
  EXPECT_LT(report.sq_rel, 1e-9);
  EXPECT_LT(report.rmse_log, 1e-9);
  EXPECT_EQ(report.delta1, 1.0);
}

TEST(DepthMapMetrics, ScaledMetricsInvariantToPositiveScalars) {
  testgen::Rng rng(71);
  for (int trial = 0; trial < 200; ++trial) {
    const Grid gt = testgen::random_grid(rng, 4, 4, 0.5, 4.0);
    const Grid pred = testgen::random_grid(rng, 4, 4, 0.5, 4.0);
    const double c = std::exp(testgen::pick_real(rng, -3.0, 3.0));
    Grid scaled_pred = pred;
    for (double& v : scaled_pred.values) v *= c;
    const auto valid = valid_from_positive(gt);
    const auto a = depth_map_metrics(gt, pred, valid, true);
    const auto b = depth_map_metrics(gt, scaled_pred, valid, true);
    EXPECT_NEAR(a.abs_rel, b.abs_rel, 1e-9 * std::max(1.0, a.abs_rel));
    EXPECT_NEAR(a.sq_rel, b.sq_rel, 1e-9 * std::max(1.0, a.sq_rel));
    EXPECT_NEAR(a.rmse_log, b.rmse_log, 1e-9 * std::max(1.0, a.rmse_log));
    EXPECT_EQ(a.delta1, b.delta1);
    EXPECT_EQ(a.delta2, b.delta2);
    EXPECT_EQ(a.delta3, b.delta3);
    EXPECT_LE(a.delta1, a.delta2);
    EXPECT_LE(a.delta2, a.delta3);
  }
}

TEST(DepthMapMetrics, DeltaSymmetricInGtAndPred) {
  testgen::Rng rng(73);
  for (int trial = 0; trial < 100; ++trial) {
    const Grid gt = testgen::random_grid(rng, 4, 5, 0.5, 4.0);
    const Grid pred = testgen::random_grid(rng, 4, 5, 0.5, 4.0);
    const auto valid = valid_from_positive(gt);
    const auto a = depth_map_metrics(gt, pred, valid, false);
    const auto b = depth_map_metrics(pred, gt, valid, false);
    EXPECT_EQ(a.delta1, b.delta1);
    EXPECT_EQ(a.delta2, b.delta2);
    EXPECT_EQ(a.delta3, b.delta3);
  }
}

TEST(DepthMapMetrics, NonpositiveValuesRejected) {
  const Grid gt = grid_from({1.0, -1.0});
  const Grid pred = grid_from({1.0, 1.0});
  EXPECT_THROW(depth_map_metrics(gt, pred, {{0, 0}, {0, 1}}, false),
               ValidationError);
  EXPECT_THROW(depth_map_metrics(pred, gt, {{0, 0}, {0, 1}}, false),
               ValidationError);
}

TEST(PointPair, DirectComparison) {
  Grid disp(1, 2);
  disp.at(0, 0) = 0.9;
  disp.at(0, 1) = 0.1;
  EXPECT_EQ(point_pair_relation(disp, {0, 0}, {0, 1}), DepthOrder::Closer);
  EXPECT_EQ(point_pair_relation(disp, {0, 1}, {0, 0}), DepthOrder::Farther);
}

TEST(PointPair, ExactTieIsEqual) {
  Grid disp(1, 2, 0.5);
  EXPECT_EQ(point_pair_relation(disp, {0, 0}, {0, 1}), DepthOrder::Equal);
  const PointPairResult r =
      point_pair_eval(disp, {{{0, 0}, {0, 1}, DepthOrder::Closer}});
  EXPECT_EQ(r.n_correct, 0);
  EXPECT_EQ(r.n_wrong, 1);
}

TEST(PointPair, CountsAndUnitWeightWhdr) {
  Grid disp(1, 3);
  disp.at(0, 0) = 0.9;
  disp.at(0, 1) = 0.1;
  disp.at(0, 2) = 0.5;
  const std::vector<PointPairQuery> queries{
      {{0, 0}, {0, 1}, DepthOrder::Closer},
      {{0, 1}, {0, 2}, DepthOrder::Farther},
      {{0, 2}, {0, 0}, DepthOrder::Closer}};
  const PointPairResult r = point_pair_eval(disp, queries);
  EXPECT_EQ(r.n_correct, 2);
  EXPECT_EQ(r.n_wrong, 1);
  EXPECT_DOUBLE_EQ(r.whdr, 1.0 / 3.0);
}

TEST(PointPair, OutOfBoundsRejected) {
  Grid disp(1, 2, 0.5);
  EXPECT_THROW(point_pair_relation(disp, {0, 0}, {0, 2}), ValidationError);
}

}  // namespace
