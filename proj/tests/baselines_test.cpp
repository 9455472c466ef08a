#include "occdepth/baselines.hpp"

#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "support/gen.hpp"

using namespace occdepth;

namespace {

InstanceRef inst(std::optional<std::int64_t> area,
                 std::optional<int> bottom_row = {}) {
  InstanceRef ref;
  ref.instance_id = 1;
  ref.bbox_area_px = area;
  ref.bottom_row = bottom_row;
  return ref;
}

TEST(AreaHeuristic, LargerInstanceOccludesAndIsCloser) {
  EXPECT_EQ(predict_occlusion_by_area(inst(100), inst(50)),
            OcclusionRelation::AOccludesB);
  EXPECT_EQ(predict_depth_by_area(inst(100), inst(50)), DepthOrder::Closer);

  EXPECT_EQ(predict_occlusion_by_area(inst(50), inst(100)),
            OcclusionRelation::BOccludesA);
  EXPECT_EQ(predict_depth_by_area(inst(50), inst(100)), DepthOrder::Farther);
}

TEST(AreaHeuristic, TiePredictsNoneAndEqual) {
  EXPECT_EQ(predict_occlusion_by_area(inst(70), inst(70)),
            OcclusionRelation::None);
  EXPECT_EQ(predict_depth_by_area(inst(70), inst(70)), DepthOrder::Equal);
}

TEST(AreaHeuristic, MissingAreaRejected) {
  EXPECT_THROW(predict_occlusion_by_area(inst({}), inst(50)), ValidationError);
  EXPECT_THROW(predict_depth_by_area(inst(50), inst({})), ValidationError);
}

TEST(YAxisHeuristic, BottomMostMaskPixelWins) {
  EXPECT_EQ(predict_occlusion_by_yaxis(inst({}, 400), inst({}, 200)),
            OcclusionRelation::AOccludesB);
  EXPECT_EQ(predict_occlusion_by_yaxis(inst({}, 120), inst({}, 120)),
            OcclusionRelation::None);
  EXPECT_EQ(predict_occlusion_by_yaxis(inst({}, 0), inst({}, 1)),
            OcclusionRelation::BOccludesA);
  EXPECT_EQ(predict_depth_by_yaxis(inst({}, 400), inst({}, 200)),
            DepthOrder::Closer);
  EXPECT_THROW(predict_occlusion_by_yaxis(inst({}), inst({}, 3)),
               ValidationError);
}

TEST(Heuristics, Antisymmetric) {
  testgen::Rng rng(211);
  for (int trial = 0; trial < 500; ++trial) {
    const auto a = inst(testgen::pick(rng, 1, 50), testgen::pick(rng, 0, 20));
    const auto b = inst(testgen::pick(rng, 1, 50), testgen::pick(rng, 0, 20));
    EXPECT_EQ(predict_occlusion_by_area(a, b),
              flipped(predict_occlusion_by_area(b, a)));
    EXPECT_EQ(predict_depth_by_area(a, b),
              flipped(predict_depth_by_area(b, a)));
    EXPECT_EQ(predict_occlusion_by_yaxis(a, b),
              flipped(predict_occlusion_by_yaxis(b, a)));
    EXPECT_EQ(predict_depth_by_yaxis(a, b),
              flipped(predict_depth_by_yaxis(b, a)));
  }
}

struct MaskedValues {
  Grid disp;
  InstanceMask mask;
};

MaskedValues masked(const std::vector<double>& values) {
  MaskedValues mv;
  mv.disp = Grid(1, static_cast<int>(values.size()));
  mv.mask.rows = 1;
  mv.mask.cols = static_cast<int>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    mv.disp.at(0, static_cast<int>(i)) = values[i];
    mv.mask.pixels.push_back({0, static_cast<int>(i)});
  }
  return mv;
}

TEST(TrimmedStat, NoTrim) {
  const auto mv = masked({1.0, 2.0, 3.0});
  EXPECT_DOUBLE_EQ(
      trimmed_instance_stat(mv.disp, mv.mask, InstanceStat::Mean, {0.0}), 2.0);
  EXPECT_DOUBLE_EQ(
      trimmed_instance_stat(mv.disp, mv.mask, InstanceStat::Median, {0.0}),
      2.0);
}

TEST(TrimmedStat, HandTrimmedTwentyValues) {
  // n = 20, trim 0.05 drops exactly one value from each tail.
  std::vector<double> values{0.0};
  for (int i = 0; i < 18; ++i) values.push_back(10.0);
  values.push_back(1000.0);
  const auto mv = masked(values);
  EXPECT_DOUBLE_EQ(
      trimmed_instance_stat(mv.disp, mv.mask, InstanceStat::Mean, {0.05}),
      10.0);
  EXPECT_DOUBLE_EQ(
      trimmed_instance_stat(mv.disp, mv.mask, InstanceStat::Median, {0.05}),
      10.0);
}

TEST(TrimmedStat, SingleValueUntouchedByFloor) {
  const auto mv = masked({7.0});
  EXPECT_DOUBLE_EQ(
      trimmed_instance_stat(mv.disp, mv.mask, InstanceStat::Mean, {0.05}),
      7.0);
}

TEST(TrimmedStat, ErrorPaths) {
  const auto mv = masked({1.0, 2.0});
  InstanceMask empty;
  empty.rows = 1;
  empty.cols = 2;
  EXPECT_THROW(trimmed_instance_stat(mv.disp, empty, InstanceStat::Mean),
               ValidationError);
  EXPECT_THROW(
      trimmed_instance_stat(mv.disp, mv.mask, InstanceStat::Mean, {0.5}),
      ValidationError);
  EXPECT_THROW(
      trimmed_instance_stat(mv.disp, mv.mask, InstanceStat::Mean, {-0.1}),
      ValidationError);
}

TEST(TrimmedStat, MedianUnchangedBySymmetricExtremeInjection) {
  testgen::Rng rng(223);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = testgen::pick(rng, 20, 120);
    std::vector<double> values;
    for (int i = 0; i < n; ++i) values.push_back(testgen::pick_real(rng, 0, 1));
    const auto base = masked(values);
    const double before =
        trimmed_instance_stat(base.disp, base.mask, InstanceStat::Median,
                              {0.05});

    // Inject j extremes per tail, where j stays within the recomputed trim.
    const int j = testgen::pick(rng, 1, n / 20);
    auto widened = values;
    for (int i = 0; i < j; ++i) {
      widened.push_back(1e18);
      widened.push_back(-1e18);
    }
    const auto injected = masked(widened);
    EXPECT_EQ(trimmed_instance_stat(injected.disp, injected.mask,
                                    InstanceStat::Median, {0.05}),
              before)
        << "n=" << n << " j=" << j;
  }
}

TEST(TrimmedStat, MedianUnchangedByTailReplacement) {
  testgen::Rng rng(227);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = testgen::pick(rng, 40, 120);
    std::vector<double> values;
    for (int i = 0; i < n; ++i) values.push_back(testgen::pick_real(rng, 0, 1));
    std::sort(values.begin(), values.end());
    const auto base = masked(values);
    const double before =
        trimmed_instance_stat(base.disp, base.mask, InstanceStat::Median,
                              {0.05});

    const int k = static_cast<int>(0.05 * n);
    const int j = testgen::pick(rng, 1, std::max(1, k));
    auto replaced = values;
    for (int i = 0; i < j; ++i) {
      replaced[i] = -1e18;
      replaced[n - 1 - i] = 1e18;
    }
    const auto poisoned = masked(replaced);
    EXPECT_EQ(trimmed_instance_stat(poisoned.disp, poisoned.mask,
                                    InstanceStat::Median, {0.05}),
              before);
  }
}

TEST(PredictDepthFromDisparity, HigherDisparityIsCloser) {
  const auto mv = masked({0.8, 0.3});
  InstanceMask a;
  a.rows = 1;
  a.cols = 2;
  a.pixels = {{0, 0}};
  InstanceMask b = a;
  b.pixels = {{0, 1}};
  EXPECT_EQ(predict_depth_from_disparity(mv.disp, a, b, InstanceStat::Mean),
            DepthOrder::Closer);
  EXPECT_EQ(predict_depth_from_disparity(mv.disp, b, a, InstanceStat::Mean),
            DepthOrder::Farther);
}

TEST(PredictDepthFromDisparity, ExactTieIsEqual) {
  const auto mv = masked({0.4, 0.4});
  InstanceMask a;
  a.rows = 1;
  a.cols = 2;
  a.pixels = {{0, 0}};
  InstanceMask b = a;
  b.pixels = {{0, 1}};
  EXPECT_EQ(predict_depth_from_disparity(mv.disp, a, b, InstanceStat::Median),
            DepthOrder::Equal);
}

TEST(PredictDepthFromDisparity, ToleranceWindowPredictsEqual) {
  const auto mv = masked({0.51, 0.50});
  InstanceMask a;
  a.rows = 1;
  a.cols = 2;
  a.pixels = {{0, 0}};
  InstanceMask b = a;
  b.pixels = {{0, 1}};
  EXPECT_EQ(predict_depth_from_disparity(mv.disp, a, b, InstanceStat::Mean,
                                         {0.0}, 0.05),
            DepthOrder::Equal);
  EXPECT_EQ(predict_depth_from_disparity(mv.disp, a, b, InstanceStat::Mean,
                                         {0.0}, 0.0),
            DepthOrder::Closer);
}

TEST(PredictDepthFromDisparity, ZeroToleranceNeverEqualUnlessExact) {
  testgen::Rng rng(229);
  for (int trial = 0; trial < 300; ++trial) {
    Grid disp = testgen::random_grid(rng, 2, 4, 0.0, 1.0);
    InstanceMask a;
    a.rows = 2;
    a.cols = 4;
    for (int c = 0; c < 4; ++c) a.pixels.push_back({0, c});
    InstanceMask b;
    b.rows = 2;
    b.cols = 4;
    for (int c = 0; c < 4; ++c) b.pixels.push_back({1, c});
    const double sa =
        trimmed_instance_stat(disp, a, InstanceStat::Mean, {0.0});
    const double sb =
        trimmed_instance_stat(disp, b, InstanceStat::Mean, {0.0});
    const DepthOrder rel =
        predict_depth_from_disparity(disp, a, b, InstanceStat::Mean, {0.0});
    if (sa == sb)
      EXPECT_EQ(rel, DepthOrder::Equal);
    else
      EXPECT_NE(rel, DepthOrder::Equal);
  }
}

}  // namespace
