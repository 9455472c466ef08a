#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "occdepth/annotation_io.hpp"
#include "occdepth/error.hpp"
#include "occdepth/order_model.hpp"

namespace occdepth {

// Votes from successive workers for one question, in arrival order.
using VoteStream = std::vector<std::string>;

struct AggregationResult {
  std::string label;
  int count = 0;  // number of workers consulted, >= 2
};

// Stopping rule of the collection protocol: workers are added until two of
// them agree. Returns the first label to reach two occurrences and the
// 1-based position at which that second occurrence appeared.
inline AggregationResult aggregate_votes(const VoteStream& votes) {
  std::unordered_map<std::string, int> seen;
  for (std::size_t i = 0; i < votes.size(); ++i) {
    if (++seen[votes[i]] == 2)
      return {votes[i], static_cast<int>(i + 1)};
  }
  throw ValidationError("vote stream exhausted with no agreeing pair");
}

// Annotation confidence weight w = 2 / count.
inline double weight_from_count(int count) {
  if (count < 2)
    throw ValidationError("count must be >= 2, got " + std::to_string(count));
  return 2.0 / static_cast<double>(count);
}

// Occlusion pair types: no occlusion, unidirectional, bidirectional.
enum class OccType { None = 0, Uni = 1, Bi = 2 };
// Depth pair types as annotated: strict or equal for distinct ranges,
// directed or mutual for overlapping ranges.
enum class DepthType {
  DistinctStrict = 0,
  DistinctEqual = 1,
  OverlapDirected = 2,
  OverlapMutual = 3
};

inline OccType occ_type_of(const PairOrder& p) {
  const OcclusionRelation rel =
      p.occlusion.value_or(OcclusionRelation::None);
  switch (rel) {
    case OcclusionRelation::None:
      return OccType::None;
    case OcclusionRelation::Bidirectional:
      return OccType::Bi;
    default:
      return OccType::Uni;
  }
}

inline DepthType depth_type_of(const DepthRelation& rel) {
  if (rel.range_kind == RangeKind::Distinct)
    return rel.relation == DepthOrder::Equal ? DepthType::DistinctEqual
                                             : DepthType::DistinctStrict;
  return rel.relation == DepthOrder::Equal ? DepthType::OverlapMutual
                                           : DepthType::OverlapDirected;
}

// Raw per-image tallies; merged by component-wise addition before any
// normalization.
struct StatsCounts {
  long long n_images = 0;
  long long n_instances = 0;
  long long n_orders = 0;
  std::map<long long, long long> instances_per_image;
  std::map<int, long long> count_hist;
  std::array<long long, 3> occ_types{};    // indexed by OccType
  std::array<long long, 4> depth_types{};  // indexed by DepthType

  StatsCounts& operator+=(const StatsCounts& o) {
    n_images += o.n_images;
    n_instances += o.n_instances;
    n_orders += o.n_orders;
    for (const auto& [k, v] : o.instances_per_image) instances_per_image[k] += v;
    for (const auto& [k, v] : o.count_hist) count_hist[k] += v;
    for (std::size_t i = 0; i < occ_types.size(); ++i)
      occ_types[i] += o.occ_types[i];
    for (std::size_t i = 0; i < depth_types.size(); ++i)
      depth_types[i] += o.depth_types[i];
    return *this;
  }
};

inline StatsCounts stats_counts_for_image(const ImageAnnotation& ann) {
  StatsCounts c;
  c.n_images = 1;
  c.n_instances = static_cast<long long>(ann.instances.size());
  c.instances_per_image[static_cast<long long>(ann.instances.size())] = 1;
  for (const auto& p : ann.pairs) {
    if (p.occlusion) ++c.n_orders;
    if (p.depth) ++c.n_orders;
    if (p.occlusion_count) ++c.count_hist[*p.occlusion_count];
    if (p.depth_count) ++c.count_hist[*p.depth_count];
    ++c.occ_types[static_cast<std::size_t>(occ_type_of(p))];
    if (p.depth)
      ++c.depth_types[static_cast<std::size_t>(depth_type_of(*p.depth))];
  }
  return c;
}

struct StatsReport {
  StatsCounts counts;
  std::array<double, 3> occ_type_dist{};    // sums to 1 when pairs exist
  std::array<double, 4> depth_type_dist{};  // sums to 1 when depth pairs exist
};

inline StatsReport finalize_stats(const StatsCounts& counts) {
  StatsReport report;
  report.counts = counts;
  long long occ_total = 0;
  for (long long v : counts.occ_types) occ_total += v;
  if (occ_total > 0)
    for (std::size_t i = 0; i < 3; ++i)
      report.occ_type_dist[i] =
          static_cast<double>(counts.occ_types[i]) / occ_total;
  long long depth_total = 0;
  for (long long v : counts.depth_types) depth_total += v;
  if (depth_total > 0)
    for (std::size_t i = 0; i < 4; ++i)
      report.depth_type_dist[i] =
          static_cast<double>(counts.depth_types[i]) / depth_total;
  return report;
}

inline StatsReport dataset_statistics(const DatasetFile& d) {
  StatsCounts total;
  for (const auto& img : d.images) total += stats_counts_for_image(img);
  return finalize_stats(total);
}

// Directional depth categories of a canonical pair, used as conditional-table
// labels: closer/farther keep their direction, equal collapses to one label
// per range kind.
enum class DepthLabel {
  DistinctCloser = 0,
  DistinctFarther = 1,
  DistinctEqual = 2,
  OverlapCloser = 3,
  OverlapFarther = 4,
  OverlapMutual = 5
};

inline constexpr std::size_t kNumOccLabels = 4;    // None, A->B, B->A, A<->B
inline constexpr std::size_t kNumDepthLabels = 6;  // DepthLabel values

inline DepthLabel depth_label_of(const DepthRelation& rel) {
  const bool overlap = rel.range_kind == RangeKind::Overlap;
  switch (rel.relation) {
    case DepthOrder::Closer:
      return overlap ? DepthLabel::OverlapCloser : DepthLabel::DistinctCloser;
    case DepthOrder::Farther:
      return overlap ? DepthLabel::OverlapFarther
                     : DepthLabel::DistinctFarther;
    default:
      return overlap ? DepthLabel::OverlapMutual : DepthLabel::DistinctEqual;
  }
}

inline std::size_t occ_label_of(const PairOrder& p) {
  switch (p.occlusion.value_or(OcclusionRelation::None)) {
    case OcclusionRelation::None:
      return 0;
    case OcclusionRelation::AOccludesB:
      return 1;
    case OcclusionRelation::BOccludesA:
      return 2;
    default:
      return 3;
  }
}

// Conditional-probability matrix; entry [r][c] is P(row label | column label)
// and every column with a nonzero marginal sums to one.
struct ConditionalTable {
  std::vector<std::vector<double>> p;
  std::vector<bool> column_nonzero;
};

// Joint occlusion/depth tallies over pairs carrying a depth annotation. A
// pair without an occlusion entry counts as no-occlusion, which is exactly
// what absence encodes in the annotation format.
struct JointOrderCounts {
  // [occ label][depth label]
  std::array<std::array<long long, kNumDepthLabels>, kNumOccLabels> joint{};

  JointOrderCounts& operator+=(const JointOrderCounts& o) {
    for (std::size_t r = 0; r < kNumOccLabels; ++r)
      for (std::size_t c = 0; c < kNumDepthLabels; ++c)
        joint[r][c] += o.joint[r][c];
    return *this;
  }
};

inline JointOrderCounts joint_counts_for_image(const ImageAnnotation& ann) {
  JointOrderCounts c;
  for (const auto& p : ann.pairs) {
    if (!p.depth) continue;
    const std::size_t occ = occ_label_of(p);
    const std::size_t dep = static_cast<std::size_t>(depth_label_of(*p.depth));
    ++c.joint[occ][dep];
  }
  return c;
}

// Builds P(occlusion | depth) (4 x 6) and P(depth | occlusion) (6 x 4) from
// the joint counts. Zero-marginal columns come out all-zero with their
// column_nonzero flag cleared.
inline std::pair<ConditionalTable, ConditionalTable> conditional_tables_from(
    const JointOrderCounts& counts) {
  ConditionalTable occ_given_depth;
  occ_given_depth.p.assign(kNumOccLabels,
                           std::vector<double>(kNumDepthLabels, 0.0));
  occ_given_depth.column_nonzero.assign(kNumDepthLabels, false);
  for (std::size_t c = 0; c < kNumDepthLabels; ++c) {
    long long col_sum = 0;
    for (std::size_t r = 0; r < kNumOccLabels; ++r)
      col_sum += counts.joint[r][c];
    if (col_sum == 0) continue;
    occ_given_depth.column_nonzero[c] = true;
    for (std::size_t r = 0; r < kNumOccLabels; ++r)
      occ_given_depth.p[r][c] =
          static_cast<double>(counts.joint[r][c]) / col_sum;
  }

  ConditionalTable depth_given_occ;
  depth_given_occ.p.assign(kNumDepthLabels,
                           std::vector<double>(kNumOccLabels, 0.0));
  depth_given_occ.column_nonzero.assign(kNumOccLabels, false);
  for (std::size_t c = 0; c < kNumOccLabels; ++c) {
    long long col_sum = 0;
    for (std::size_t r = 0; r < kNumDepthLabels; ++r)
      col_sum += counts.joint[c][r];
    if (col_sum == 0) continue;
    depth_given_occ.column_nonzero[c] = true;
    for (std::size_t r = 0; r < kNumDepthLabels; ++r)
      depth_given_occ.p[r][c] =
          static_cast<double>(counts.joint[c][r]) / col_sum;
  }
  return {std::move(occ_given_depth), std::move(depth_given_occ)};
}

inline std::pair<ConditionalTable, ConditionalTable> conditional_tables(
    const DatasetFile& d) {
  JointOrderCounts total;
  for (const auto& img : d.images) total += joint_counts_for_image(img);
  return conditional_tables_from(total);
}

// SplitMix64; the documented generator behind every seeded operation.
struct SplitMix64 {
  std::uint64_t state = 0;

  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
};

// Keeps at most `cap` instances. When more are present, `cap` of them are
// chosen by a partial Fisher-Yates shuffle over the id-sorted instance list
// driven by SplitMix64(seed) with modulo-reduced draws; pairs with a dropped
// endpoint are removed. Identity when |instances| <= cap.
inline ImageAnnotation subsample_instances(const ImageAnnotation& ann,
                                           std::size_t cap,
                                           std::uint64_t seed) {
  if (cap < 1) throw ValidationError("subsample cap must be >= 1");
  if (ann.instances.size() <= cap) return ann;

  std::vector<int> ids;
  ids.reserve(ann.instances.size());
  for (const auto& inst : ann.instances) ids.push_back(inst.instance_id);
  std::sort(ids.begin(), ids.end());

  SplitMix64 rng{seed};
  for (std::size_t i = 0; i < cap; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(rng.next() % (ids.size() - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(cap);
  std::sort(ids.begin(), ids.end());

  auto kept = [&ids](int id) {
    return std::binary_search(ids.begin(), ids.end(), id);
  };

  ImageAnnotation out;
  out.image_id = ann.image_id;
  for (const auto& inst : ann.instances)
    if (kept(inst.instance_id)) out.instances.push_back(inst);
  for (const auto& p : ann.pairs)
    if (kept(p.a) && kept(p.b)) out.pairs.push_back(p);
  return out;
}

// Collection-protocol default: at most ten instances per image.
inline ImageAnnotation subsample_instances(const ImageAnnotation& ann,
                                           std::uint64_t seed) {
  return subsample_instances(ann, 10, seed);
}

struct SmallInstanceFlags {
  std::vector<int> flagged;          // area below min_side^2
  std::vector<int> skipped_no_area;  // no area recorded, cannot judge
};

// Collection-time size floor: instances smaller than min_side x min_side
// pixels are flagged, never dropped.
inline SmallInstanceFlags flag_small_instances(
    const std::vector<InstanceRef>& instances, int min_side = 25) {
  SmallInstanceFlags flags;
  const std::int64_t floor_px =
      static_cast<std::int64_t>(min_side) * min_side;
  for (const auto& inst : instances) {
    if (!inst.bbox_area_px)
      flags.skipped_no_area.push_back(inst.instance_id);
    else if (*inst.bbox_area_px < floor_px)
      flags.flagged.push_back(inst.instance_id);
  }
  return flags;
}

}  // namespace occdepth
