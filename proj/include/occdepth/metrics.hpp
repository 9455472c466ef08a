#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "occdepth/error.hpp"
#include "occdepth/grid.hpp"
#include "occdepth/order_model.hpp"

namespace occdepth {

struct OcclusionPRF {
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
};

// Associative partial counts for parallel per-image evaluation; ratios are
// taken only after all counts are merged.
struct OcclusionCounts {
  long long hits = 0;
  long long gt_total = 0;
  long long pred_total = 0;

  OcclusionCounts& operator+=(const OcclusionCounts& o) {
    hits += o.hits;
    gt_total += o.gt_total;
    pred_total += o.pred_total;
    return *this;
  }
};

// Zero-denominator conventions: empty gt scores recall 1 against an empty
// prediction and 0 otherwise; empty prediction scores precision 1 only when
// gt is empty too; F1 is 0 when P + R = 0.
inline OcclusionPRF finalize_occlusion(const OcclusionCounts& c) {
  OcclusionPRF out;
  out.recall = c.gt_total > 0
                   ? static_cast<double>(c.hits) / static_cast<double>(c.gt_total)
                   : (c.pred_total == 0 ? 1.0 : 0.0);
  out.precision = c.pred_total > 0 ? static_cast<double>(c.hits) /
                                         static_cast<double>(c.pred_total)
                                   : (c.gt_total == 0 ? 1.0 : 0.0);
  out.f1 = (out.precision + out.recall) > 0.0
               ? 2.0 * out.precision * out.recall /
                     (out.precision + out.recall)
               : 0.0;
  return out;
}

// A directed occluder->occludee fact.
using DirectedFact = std::pair<int, int>;
using DirectedFacts = std::vector<DirectedFact>;  // sorted, unique

inline void append_occlusion_facts(DirectedFacts& out, int a, int b,
                                   OcclusionRelation rel) {
  if (occludes_forward(rel)) out.push_back({a, b});
  if (occludes_backward(rel)) out.push_back({b, a});
}

inline OcclusionCounts count_occlusion_facts(const DirectedFacts& gt,
                                             const DirectedFacts& pred) {
  OcclusionCounts c;
  c.gt_total = static_cast<long long>(gt.size());
  c.pred_total = static_cast<long long>(pred.size());
  DirectedFacts both;
  std::set_intersection(gt.begin(), gt.end(), pred.begin(), pred.end(),
                        std::back_inserter(both));
  c.hits = static_cast<long long>(both.size());
  return c;
}

inline OcclusionPRF occlusion_prf(const DirectedFacts& gt,
                                  const DirectedFacts& pred) {
  return finalize_occlusion(count_occlusion_facts(gt, pred));
}

// Directed facts of one image's pairs under a mode. A bidirectional pair
// contributes two facts; in without-bidirectional mode bidirectional
// relations must not reach this point.
inline DirectedFacts occlusion_facts(const ImageAnnotation& ann,
                                     OcclusionMode mode) {
  DirectedFacts facts;
  for (const auto& p : ann.pairs) {
    const OcclusionRelation rel =
        occlusion_mode_project(p.occlusion.value_or(OcclusionRelation::None),
                               mode);
    append_occlusion_facts(facts, p.a, p.b, rel);
  }
  std::sort(facts.begin(), facts.end());
  return facts;
}

// Per-image counts for a gt/pred annotation pair. The pair universe is the
// gt's annotated pair set: a pair absent from the prediction's entries scores
// as no-occlusion, a prediction pair outside the universe is an error. In
// without-bidirectional mode, pairs whose ground truth is bidirectional are
// excluded from the universe before projection.
inline OcclusionCounts occlusion_counts_for_image(const ImageAnnotation& gt,
                                                  const ImageAnnotation& pred,
                                                  OcclusionMode mode) {
  std::map<std::pair<int, int>, OcclusionRelation> pred_rel;
  for (const auto& p : pred.pairs) {
    const auto key = std::pair(p.a, p.b);
    bool in_gt = false;
    for (const auto& g : gt.pairs)
      if (std::pair(g.a, g.b) == key) in_gt = true;
    if (!in_gt)
      throw ValidationError("image " + std::to_string(gt.image_id) +
                            ": predicted pair (" + std::to_string(p.a) + "," +
                            std::to_string(p.b) +
                            ") is outside the ground-truth pair universe");
    pred_rel[key] = p.occlusion.value_or(OcclusionRelation::None);
  }

  DirectedFacts gt_facts;
  DirectedFacts pred_facts;
  for (const auto& g : gt.pairs) {
    const OcclusionRelation gt_rel =
        g.occlusion.value_or(OcclusionRelation::None);
    if (mode == OcclusionMode::WithoutBidirectional &&
        gt_rel == OcclusionRelation::Bidirectional)
      continue;  // pre-filtered out of the evaluation universe
    auto it = pred_rel.find({g.a, g.b});
    const OcclusionRelation pr =
        it == pred_rel.end() ? OcclusionRelation::None : it->second;
    append_occlusion_facts(gt_facts, g.a, g.b,
                           occlusion_mode_project(gt_rel, mode));
    append_occlusion_facts(pred_facts, g.a, g.b,
                           occlusion_mode_project(pr, mode));
  }
  std::sort(gt_facts.begin(), gt_facts.end());
  std::sort(pred_facts.begin(), pred_facts.end());
  return count_occlusion_facts(gt_facts, pred_facts);
}

enum class WhdrCategory { Distinct, Overlap, All };

// One evaluated pair: ground-truth relation with its worker count and range
// kind, and the predicted relation.
struct WhdrItem {
  DepthOrder gt = DepthOrder::Equal;
  DepthOrder pred = DepthOrder::Equal;
  int count = 2;
  RangeKind kind = RangeKind::Distinct;
};

struct WhdrAccum {
  double weighted_error = 0.0;
  double weight_sum = 0.0;

  WhdrAccum& operator+=(const WhdrAccum& o) {
    weighted_error += o.weighted_error;
    weight_sum += o.weight_sum;
    return *this;
  }
};

inline WhdrAccum whdr_accumulate(const std::vector<WhdrItem>& items,
                                 WhdrCategory category) {
  WhdrAccum acc;
  for (const auto& item : items) {
    if (category == WhdrCategory::Distinct && item.kind != RangeKind::Distinct)
      continue;
    if (category == WhdrCategory::Overlap && item.kind != RangeKind::Overlap)
      continue;
    if (item.count < 2)
      throw ValidationError("WHDR requires a ground-truth count >= 2, got " +
                            std::to_string(item.count));
    const double w = 2.0 / static_cast<double>(item.count);
    acc.weight_sum += w;
    if (item.pred != item.gt) acc.weighted_error += w;
  }
  return acc;
}

inline double finalize_whdr(const WhdrAccum& acc) {
  if (acc.weight_sum <= 0.0)
    throw ValidationError("WHDR is undefined for an empty category selection");
  return acc.weighted_error / acc.weight_sum;
}

inline double whdr(const std::vector<WhdrItem>& items, WhdrCategory category) {
  return finalize_whdr(whdr_accumulate(items, category));
}

// Joins one image's gt depth annotations with predicted relations. Every gt
// depth pair needs a prediction; predicted depth pairs outside the gt set are
// an error.
inline std::vector<WhdrItem> whdr_items_for_image(const ImageAnnotation& gt,
                                                  const ImageAnnotation& pred) {
  std::map<std::pair<int, int>, DepthOrder> pred_rel;
  for (const auto& p : pred.pairs)
    if (p.depth) pred_rel[{p.a, p.b}] = p.depth->relation;

  std::vector<WhdrItem> items;
  std::size_t used = 0;
  for (const auto& g : gt.pairs) {
    if (!g.depth) continue;
    auto it = pred_rel.find({g.a, g.b});
    if (it == pred_rel.end())
      throw ValidationError("image " + std::to_string(gt.image_id) +
                            ": missing depth prediction for pair (" +
                            std::to_string(g.a) + "," + std::to_string(g.b) +
                            ")");
    ++used;
    if (!g.depth_count)
      throw ValidationError("image " + std::to_string(gt.image_id) +
                            ": ground-truth pair (" + std::to_string(g.a) +
                            "," + std::to_string(g.b) + ") has no count");
    items.push_back({g.depth->relation, it->second, *g.depth_count,
                     g.depth->range_kind});
  }
  if (used != pred_rel.size())
    throw ValidationError("image " + std::to_string(gt.image_id) +
                          ": predicted depth pairs outside the ground-truth "
                          "pair universe");
  return items;
}

inline double median_over(const Grid& grid, const std::vector<Pixel>& valid) {
  if (valid.empty())
    throw ValidationError("median over an empty pixel set is undefined");
  std::vector<double> values;
  values.reserve(valid.size());
  for (const auto& p : valid) {
    if (!grid.in_bounds(p))
      throw ValidationError("valid pixel (" + std::to_string(p.row) + "," +
                            std::to_string(p.col) + ") out of bounds");
    values.push_back(grid.at(p));
  }
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Per-image median ground-truth scaling: pred * median(gt) / median(pred)
// over the valid set.
inline Grid median_scale(const Grid& pred, const Grid& gt,
                         const std::vector<Pixel>& valid) {
  if (!pred.same_shape(gt))
    throw ValidationError("median_scale requires equally shaped grids");
  const double m_pred = median_over(pred, valid);
  const double m_gt = median_over(gt, valid);
  if (m_pred == 0.0)
    throw ValidationError("cannot median-scale: prediction median is zero");
  const double factor = m_gt / m_pred;
  Grid out = pred;
  for (double& v : out.values) v *= factor;
  return out;
}

struct DepthMapReport {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse_log = 0.0;
  double delta1 = 0.0;  // max(D'/D, D/D') < 1.25
  double delta2 = 0.0;  // 1.25^2
  double delta3 = 0.0;  // 1.25^3
};

inline std::vector<Pixel> valid_from_positive(const Grid& gt) {
  std::vector<Pixel> valid;
  for (int r = 0; r < gt.rows; ++r)
    for (int c = 0; c < gt.cols; ++c)
      if (gt.at(r, c) > 0.0) valid.push_back({r, c});
  return valid;
}

inline DepthMapReport depth_map_metrics(const Grid& gt, const Grid& pred,
                                        const std::vector<Pixel>& valid,
                                        bool scale) {
  if (!pred.same_shape(gt))
    throw ValidationError("depth metrics require equally shaped grids");
  if (valid.empty())
    throw ValidationError("depth metrics need a nonempty valid pixel set");
  const Grid scaled = scale ? median_scale(pred, gt, valid) : pred;

  double abs_rel = 0.0, sq_rel = 0.0, sq_log = 0.0;
  long long d1 = 0, d2 = 0, d3 = 0;
  for (const auto& p : valid) {
    if (!gt.in_bounds(p))
      throw ValidationError("valid pixel (" + std::to_string(p.row) + "," +
                            std::to_string(p.col) + ") out of bounds");
    const double d = gt.at(p);
    const double dp = scaled.at(p);
    if (d <= 0.0 || dp <= 0.0)
      throw ValidationError("depth metrics require positive values on the "
                            "valid set");
    abs_rel += std::abs(dp - d) / d;
    sq_rel += (dp - d) * (dp - d) / d;
    const double dl = std::log(dp) - std::log(d);
    sq_log += dl * dl;
    const double ratio = std::max(dp / d, d / dp);
    if (ratio < 1.25) ++d1;
    if (ratio < 1.25 * 1.25) ++d2;
    if (ratio < 1.25 * 1.25 * 1.25) ++d3;
  }
  const double n = static_cast<double>(valid.size());
  DepthMapReport report;
  report.abs_rel = abs_rel / n;
  report.sq_rel = sq_rel / n;
  report.rmse_log = std::sqrt(sq_log / n);
  report.delta1 = static_cast<double>(d1) / n;
  report.delta2 = static_cast<double>(d2) / n;
  report.delta3 = static_cast<double>(d3) / n;
  return report;
}

struct PointPairQuery {
  Pixel p1;
  Pixel p2;
  DepthOrder gt = DepthOrder::Closer;
};

struct PointPairResult {
  long long n_correct = 0;
  long long n_wrong = 0;
  double whdr = 0.0;
};

// Predicted relation of p1 versus p2 on a disparity map: larger disparity is
// nearer; an exact tie maps to Equal.
inline DepthOrder point_pair_relation(const DisparityMap& disp, Pixel p1,
                                      Pixel p2) {
  if (!disp.in_bounds(p1) || !disp.in_bounds(p2))
    throw ValidationError("query point out of bounds");
  const double d1 = disp.at(p1);
  const double d2 = disp.at(p2);
  if (d1 > d2) return DepthOrder::Closer;
  if (d1 < d2) return DepthOrder::Farther;
  return DepthOrder::Equal;
}

inline PointPairResult point_pair_eval(
    const DisparityMap& disp, const std::vector<PointPairQuery>& queries) {
  PointPairResult result;
  for (const auto& q : queries) {
    if (point_pair_relation(disp, q.p1, q.p2) == q.gt)
      ++result.n_correct;
    else
      ++result.n_wrong;
  }
  const long long total = result.n_correct + result.n_wrong;
  if (total == 0)
    throw ValidationError("point-pair evaluation needs at least one query");
  result.whdr = static_cast<double>(result.n_wrong) /
                static_cast<double>(total);
  return result;
}

}  // namespace occdepth
