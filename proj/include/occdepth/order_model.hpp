#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "occdepth/error.hpp"

namespace occdepth {

// Occlusion relation of an unordered instance pair (a, b).
// Equivalent two-flag encoding (o_ab, o_ba):
//   None=(0,0)  AOccludesB=(1,0)  BOccludesA=(0,1)  Bidirectional=(1,1).
enum class OcclusionRelation { None, AOccludesB, BOccludesA, Bidirectional };

// Depth order of a relative to b. Closer carries signed code +1, Equal 0,
// Farther -1.
enum class DepthOrder { Closer, Equal, Farther };

// Whether the depth ranges of the two instances are disjoint or interleaved.
enum class RangeKind { Distinct, Overlap };

inline int signed_code(DepthOrder d) {
  switch (d) {
    case DepthOrder::Closer:
      return 1;
    case DepthOrder::Equal:
      return 0;
    default:
      return -1;
  }
}

inline bool occludes_forward(OcclusionRelation r) {
  return r == OcclusionRelation::AOccludesB ||
         r == OcclusionRelation::Bidirectional;
}

inline bool occludes_backward(OcclusionRelation r) {
  return r == OcclusionRelation::BOccludesA ||
         r == OcclusionRelation::Bidirectional;
}

// Relation as seen after swapping the roles of a and b.
inline OcclusionRelation flipped(OcclusionRelation r) {
  switch (r) {
    case OcclusionRelation::AOccludesB:
      return OcclusionRelation::BOccludesA;
    case OcclusionRelation::BOccludesA:
      return OcclusionRelation::AOccludesB;
    default:
      return r;  // None and Bidirectional are symmetric
  }
}

inline DepthOrder flipped(DepthOrder d) {
  switch (d) {
    case DepthOrder::Closer:
      return DepthOrder::Farther;
    case DepthOrder::Farther:
      return DepthOrder::Closer;
    default:
      return DepthOrder::Equal;
  }
}

struct DepthRelation {
  DepthOrder relation = DepthOrder::Equal;
  RangeKind range_kind = RangeKind::Distinct;

  friend bool operator==(const DepthRelation&, const DepthRelation&) = default;
};

struct InstanceRef {
  std::int64_t image_id = 0;
  int instance_id = 0;
  std::optional<std::string> class_label;
  std::optional<std::int64_t> bbox_area_px;  // pixel count, > 0 when present
  std::optional<int> bottom_row;  // largest row index of any mask pixel

  friend bool operator==(const InstanceRef&, const InstanceRef&) = default;
};

// One annotated instance pair. Stored canonically with a < b; counts give the
// number of workers consulted before two agreed (always >= 2 when present).
struct PairOrder {
  int a = 0;
  int b = 0;
  std::optional<OcclusionRelation> occlusion;
  std::optional<int> occlusion_count;
  std::optional<DepthRelation> depth;
  std::optional<int> depth_count;

  friend bool operator==(const PairOrder&, const PairOrder&) = default;
};

struct ImageAnnotation {
  std::int64_t image_id = 0;
  std::vector<InstanceRef> instances;  // sorted by instance_id
  std::vector<PairOrder> pairs;        // canonical, sorted by (a, b)

  friend bool operator==(const ImageAnnotation&,
                         const ImageAnnotation&) = default;
};

enum class DepthEdgeTag { StrictDistinct, Equal, OverlapDirected, OverlapMutual };

struct OcclusionEdge {
  int from = 0;  // occluder
  int to = 0;    // occludee

  friend bool operator==(const OcclusionEdge&, const OcclusionEdge&) = default;
};

struct DepthEdge {
  int from = 0;  // closer
  int to = 0;    // farther (peer for Equal / OverlapMutual pairs)
  DepthEdgeTag tag = DepthEdgeTag::StrictDistinct;

  friend bool operator==(const DepthEdge&, const DepthEdge&) = default;
};

// Directed multigraph view of one image's orders. Instances that appear in no
// pair are kept as isolated nodes.
struct OrderGraph {
  std::vector<int> nodes;  // sorted instance ids
  std::vector<OcclusionEdge> occlusion_edges;
  std::vector<DepthEdge> depth_edges;
};

// Returns the pair in canonical storage order (a < b), flipping directional
// relations when the endpoints swap. Symmetric relations are unchanged.
inline PairOrder canonicalize(const PairOrder& pair) {
  if (pair.a == pair.b) {
    throw ValidationError("pair references the same instance twice (" +
                          std::to_string(pair.a) + ")");
  }
  if (pair.a < pair.b) return pair;
  PairOrder out = pair;
  std::swap(out.a, out.b);
  if (out.occlusion) out.occlusion = flipped(*out.occlusion);
  if (out.depth) out.depth->relation = flipped(out.depth->relation);
  return out;
}

inline OrderGraph build_order_graph(const ImageAnnotation& ann) {
  OrderGraph g;
  g.nodes.reserve(ann.instances.size());
  for (const auto& inst : ann.instances) g.nodes.push_back(inst.instance_id);
  std::sort(g.nodes.begin(), g.nodes.end());

  auto known = [&g](int id) {
    return std::binary_search(g.nodes.begin(), g.nodes.end(), id);
  };

  for (const auto& pair : ann.pairs) {
    if (!known(pair.a) || !known(pair.b)) {
      throw ValidationError("pair (" + std::to_string(pair.a) + "," +
                            std::to_string(pair.b) +
                            ") references an undeclared instance");
    }
    if (pair.occlusion) {
      if (occludes_forward(*pair.occlusion))
        g.occlusion_edges.push_back({pair.a, pair.b});
      if (occludes_backward(*pair.occlusion))
        g.occlusion_edges.push_back({pair.b, pair.a});
    }
    if (pair.depth) {
      const bool overlap = pair.depth->range_kind == RangeKind::Overlap;
      switch (pair.depth->relation) {
        case DepthOrder::Closer:
          g.depth_edges.push_back({pair.a, pair.b,
                                   overlap ? DepthEdgeTag::OverlapDirected
                                           : DepthEdgeTag::StrictDistinct});
          break;
        case DepthOrder::Farther:
          g.depth_edges.push_back({pair.b, pair.a,
                                   overlap ? DepthEdgeTag::OverlapDirected
                                           : DepthEdgeTag::StrictDistinct});
          break;
        case DepthOrder::Equal: {
          // Equal depth yields a symmetric tagged edge pair.
          const DepthEdgeTag tag =
              overlap ? DepthEdgeTag::OverlapMutual : DepthEdgeTag::Equal;
          g.depth_edges.push_back({pair.a, pair.b, tag});
          g.depth_edges.push_back({pair.b, pair.a, tag});
          break;
        }
      }
    }
  }
  return g;
}

namespace detail {

struct CycleSearch {
  const std::vector<int>& nodes;
  const std::vector<std::vector<int>>& adj;  // indices into nodes
  std::vector<std::vector<int>>& out;
  std::vector<char> on_path;
  std::vector<int> path;
  int start = 0;

  // Enumerates elementary cycles whose minimal node index is `start`; each
  // cycle is found exactly once by only visiting indices >= start.
  void dfs(int v) {
    on_path[v] = 1;
    path.push_back(v);
    for (int w : adj[v]) {
      if (w < start) continue;
      if (w == start) {
        std::vector<int> cycle;
        cycle.reserve(path.size());
        for (int idx : path) cycle.push_back(nodes[idx]);
        out.push_back(std::move(cycle));
      } else if (!on_path[w]) {
        dfs(w);
      }
    }
    path.pop_back();
    on_path[v] = 0;
  }
};

}  // namespace detail

// Reports every elementary directed cycle among strict-distinct closer edges,
// each as the node sequence starting from its smallest node. An empty result
// means the strict-closer relation is acyclic. Advisory: callers report the
// cycles, they do not reject the annotation.
inline std::vector<std::vector<int>> check_depth_consistency(
    const OrderGraph& g) {
  const int n = static_cast<int>(g.nodes.size());
  auto index_of = [&g](int id) {
    return static_cast<int>(std::lower_bound(g.nodes.begin(), g.nodes.end(),
                                             id) -
                            g.nodes.begin());
  };
  std::vector<std::vector<int>> adj(n);
  for (const auto& e : g.depth_edges) {
    if (e.tag != DepthEdgeTag::StrictDistinct) continue;
    adj[index_of(e.from)].push_back(index_of(e.to));
  }
  for (auto& row : adj) std::sort(row.begin(), row.end());

  std::vector<std::vector<int>> cycles;
  detail::CycleSearch search{g.nodes, adj, cycles, std::vector<char>(n, 0), {},
                             0};
  for (int s = 0; s < n; ++s) {
    search.start = s;
    search.dfs(s);
  }
  std::sort(cycles.begin(), cycles.end());
  return cycles;
}

enum class OcclusionMode { WithBidirectional, WithoutBidirectional };

// Projects a relation into the mode's label set. The without-bidirectional
// mode covers only {None, AOccludesB, BOccludesA}; callers must pre-filter
// bidirectional pairs before evaluating in that mode.
inline OcclusionRelation occlusion_mode_project(OcclusionRelation rel,
                                                OcclusionMode mode) {
  if (mode == OcclusionMode::WithoutBidirectional &&
      rel == OcclusionRelation::Bidirectional) {
    throw ValidationError(
        "bidirectional occlusion is not representable without-bidirectional "
        "mode");
  }
  return rel;
}

}  // namespace occdepth
