#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "occdepth/error.hpp"
#include "occdepth/grid.hpp"

namespace occdepth {

// Weights for the combined objective over (order cross-entropy, depth-order
// cross-entropy, instance disparity, smoothness).
struct LossWeights {
  double lambda_oo = 0.0;
  double lambda_do = 0.0;
  double lambda_disp = 0.0;
  double lambda_smooth = 0.0;
};

// Preset for the depth-order-only training variant.
inline LossWeights depth_variant_weights() { return {0.0, 1.0, 1.0, 0.1}; }
// Preset for the joint occlusion + depth variant.
inline LossWeights joint_variant_weights() { return {1.0, 1.0, 1.0, 0.1}; }

// Instance-wise disparity loss for a distinct pair with signed depth code
// d in {+1, -1} (A closer / A farther). With s(i) = d * D(i),
//   loss = (1/2N) * [ sum_{i in A} 1(s(i) <= max_{j in B} s(j))
//                   + sum_{i in B} 1(s(i) >= min_{j in A} s(j)) ],
// N = |A u B|. Zero exactly when the two disparity ranges are strictly
// separated in the direction d; at most 1/2. Indicators are non-strict, and
// the bounds are extrema of the sign-adjusted disparities, which makes the
// loss symmetric under (A, B, d) -> (B, A, -d).
inline double instance_disparity_loss(const DisparityMap& disp,
                                      const InstanceMask& mask_a,
                                      const InstanceMask& mask_b, int d_ab) {
  if (d_ab != 1 && d_ab != -1)
    throw ValidationError(
        "instance disparity loss is defined for distinct pairs only "
        "(signed depth code +1 or -1, got " +
        std::to_string(d_ab) + ")");
  if (mask_a.empty() || mask_b.empty())
    throw ValidationError("instance disparity loss needs nonempty masks");
  if (!mask_a.disjoint_from(mask_b))
    throw ValidationError("instance masks must be disjoint");

  const double d = static_cast<double>(d_ab);
  auto signed_at = [&](Pixel p) {
    if (!disp.in_bounds(p))
      throw ValidationError("mask pixel (" + std::to_string(p.row) + "," +
                            std::to_string(p.col) +
                            ") outside the disparity map");
    return d * disp.at(p);
  };

  double max_b = -std::numeric_limits<double>::infinity();
  for (const auto& p : mask_b.pixels) max_b = std::max(max_b, signed_at(p));
  double min_a = std::numeric_limits<double>::infinity();
  for (const auto& p : mask_a.pixels) min_a = std::min(min_a, signed_at(p));

  long long violations = 0;
  for (const auto& p : mask_a.pixels)
    if (signed_at(p) <= max_b) ++violations;
  for (const auto& p : mask_b.pixels)
    if (signed_at(p) >= min_a) ++violations;

  const std::size_t n = mask_a.size() + mask_b.size();
  return static_cast<double>(violations) / (2.0 * static_cast<double>(n));
}

// Edge-aware smoothness: mean over forward-difference terms of
// |dx D| * exp(-||dx I||) + |dy D| * exp(-||dy I||), where ||.|| is the L2
// norm of the 3-channel image gradient and the mean counts difference terms
// (H*(W-1) horizontal + (H-1)*W vertical).
inline double smoothness_loss(const DisparityMap& disp,
                              const std::array<Grid, 3>& image) {
  for (const auto& plane : image)
    if (!plane.same_shape(disp))
      throw ValidationError("disparity and image planes must share dimensions");
  const int h = disp.rows;
  const int w = disp.cols;
  const long long n_terms = static_cast<long long>(h) * (w - 1) +
                            static_cast<long long>(h - 1) * w;
  if (n_terms <= 0)
    throw ValidationError("smoothness loss needs at least one neighbor pair");

  double total = 0.0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c + 1 < w; ++c) {
      const double dd = disp.at(r, c + 1) - disp.at(r, c);
      double g2 = 0.0;
      for (const auto& plane : image) {
        const double di = plane.at(r, c + 1) - plane.at(r, c);
        g2 += di * di;
      }
      total += std::abs(dd) * std::exp(-std::sqrt(g2));
    }
  }
  for (int r = 0; r + 1 < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double dd = disp.at(r + 1, c) - disp.at(r, c);
      double g2 = 0.0;
      for (const auto& plane : image) {
        const double di = plane.at(r + 1, c) - plane.at(r, c);
        g2 += di * di;
      }
      total += std::abs(dd) * std::exp(-std::sqrt(g2));
    }
  }
  return total / static_cast<double>(n_terms);
}

// lambda_0*L_oo + lambda_1*L_do + lambda_2*L_disp + lambda_3*L_s. The two
// cross-entropy terms are externally supplied scalars.
inline double combined_objective(double loss_oo, double loss_do,
                                 double loss_disp, double loss_smooth,
                                 const LossWeights& w) {
  return w.lambda_oo * loss_oo + w.lambda_do * loss_do +
         w.lambda_disp * loss_disp + w.lambda_smooth * loss_smooth;
}

}  // namespace occdepth
