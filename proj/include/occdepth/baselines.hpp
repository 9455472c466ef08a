#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "occdepth/error.hpp"
#include "occdepth/grid.hpp"
#include "occdepth/order_model.hpp"

namespace occdepth {

// Tail fraction ignored on each side before an instance-wise statistic;
// floor(trim * n) values are dropped per tail.
struct TrimSpec {
  double trim_fraction = 0.05;
};

enum class InstanceStat { Mean, Median };

// The larger instance is taken as the occluder. Ties predict no occlusion.
inline OcclusionRelation predict_occlusion_by_area(const InstanceRef& a,
                                                   const InstanceRef& b) {
  if (!a.bbox_area_px || !b.bbox_area_px)
    throw ValidationError("area heuristic needs areas for both instances");
  if (*a.bbox_area_px > *b.bbox_area_px) return OcclusionRelation::AOccludesB;
  if (*a.bbox_area_px < *b.bbox_area_px) return OcclusionRelation::BOccludesA;
  return OcclusionRelation::None;
}

// The larger instance is taken as the closer one. Ties predict equal depth.
inline DepthOrder predict_depth_by_area(const InstanceRef& a,
                                        const InstanceRef& b) {
  if (!a.bbox_area_px || !b.bbox_area_px)
    throw ValidationError("area heuristic needs areas for both instances");
  if (*a.bbox_area_px > *b.bbox_area_px) return DepthOrder::Closer;
  if (*a.bbox_area_px < *b.bbox_area_px) return DepthOrder::Farther;
  return DepthOrder::Equal;
}

// The instance whose mask reaches closest to the image bottom (largest row
// index) is taken as the occluder. Ties predict no occlusion.
inline OcclusionRelation predict_occlusion_by_yaxis(const InstanceRef& a,
                                                    const InstanceRef& b) {
  if (!a.bottom_row || !b.bottom_row)
    throw ValidationError("y-axis heuristic needs bottom rows for both "
                          "instances");
  if (*a.bottom_row > *b.bottom_row) return OcclusionRelation::AOccludesB;
  if (*a.bottom_row < *b.bottom_row) return OcclusionRelation::BOccludesA;
  return OcclusionRelation::None;
}

inline DepthOrder predict_depth_by_yaxis(const InstanceRef& a,
                                         const InstanceRef& b) {
  if (!a.bottom_row || !b.bottom_row)
    throw ValidationError("y-axis heuristic needs bottom rows for both "
                          "instances");
  if (*a.bottom_row > *b.bottom_row) return DepthOrder::Closer;
  if (*a.bottom_row < *b.bottom_row) return DepthOrder::Farther;
  return DepthOrder::Equal;
}

// Trimmed mean or median of the disparity values under a mask.
inline double trimmed_instance_stat(const DisparityMap& disp,
                                    const InstanceMask& mask, InstanceStat stat,
                                    TrimSpec trim = {}) {
  if (mask.empty())
    throw ValidationError("instance statistic over an empty mask");
  if (trim.trim_fraction < 0.0 || trim.trim_fraction >= 0.5)
    throw ValidationError("trim fraction must lie in [0, 0.5)");

  std::vector<double> values;
  values.reserve(mask.size());
  for (const auto& p : mask.pixels) {
    if (!disp.in_bounds(p))
      throw ValidationError("mask pixel (" + std::to_string(p.row) + "," +
                            std::to_string(p.col) +
                            ") outside the disparity map");
    values.push_back(disp.at(p));
  }
  std::sort(values.begin(), values.end());

  const std::size_t n = values.size();
  const std::size_t k = static_cast<std::size_t>(
      std::floor(trim.trim_fraction * static_cast<double>(n)));
  if (2 * k >= n)
    throw ValidationError("trimming removed every value");
  const std::size_t m = n - 2 * k;

  if (stat == InstanceStat::Mean) {
    double sum = 0.0;
    for (std::size_t i = k; i < k + m; ++i) sum += values[i];
    return sum / static_cast<double>(m);
  }
  return m % 2 == 1 ? values[k + m / 2]
                    : 0.5 * (values[k + m / 2 - 1] + values[k + m / 2]);
}

// Depth order of A vs B from trimmed instance-wise disparity statistics.
// Higher disparity is nearer. |sA - sB| <= eq_tol * max(|sA|, |sB|) predicts
// Equal; with the default eq_tol = 0 only exactly equal statistics do.
inline DepthOrder predict_depth_from_disparity(const DisparityMap& disp,
                                               const InstanceMask& mask_a,
                                               const InstanceMask& mask_b,
                                               InstanceStat stat,
                                               TrimSpec trim = {},
                                               double eq_tol = 0.0) {
  if (eq_tol < 0.0) throw ValidationError("eq_tol must be non-negative");
  const double sa = trimmed_instance_stat(disp, mask_a, stat, trim);
  const double sb = trimmed_instance_stat(disp, mask_b, stat, trim);
  if (std::abs(sa - sb) <= eq_tol * std::max(std::abs(sa), std::abs(sb)))
    return DepthOrder::Equal;
  return sa > sb ? DepthOrder::Closer : DepthOrder::Farther;
}

}  // namespace occdepth
