#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "occdepth/error.hpp"
#include "occdepth/order_model.hpp"

namespace occdepth {

enum class OrderTokenKind { Occlusion, Depth };

// Result of parsing one order token, already in canonical pair order (a < b).
struct ParsedOrder {
  OrderTokenKind kind = OrderTokenKind::Occlusion;
  int a = 0;
  int b = 0;
  OcclusionRelation occlusion = OcclusionRelation::None;  // Occlusion kind
  DepthOrder depth = DepthOrder::Equal;                   // Depth kind
};

namespace detail {

struct TokenScanner {
  std::string_view text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() &&
           std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
  }

  bool at_end() {
    skip_ws();
    return pos == text.size();
  }

  int read_id() {
    skip_ws();
    const std::size_t start = pos;
    if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos])))
      throw FormatError("expected an instance id", pos);
    long value = 0;
    while (pos < text.size() &&
           std::isdigit(static_cast<unsigned char>(text[pos]))) {
      value = value * 10 + (text[pos] - '0');
      if (value > std::numeric_limits<int>::max())
        throw FormatError("instance id out of range", start);
      ++pos;
    }
    return static_cast<int>(value);
  }

  char read_op(std::string_view allowed) {
    skip_ws();
    if (pos < text.size() && allowed.find(text[pos]) != std::string_view::npos)
      return text[pos++];
    throw FormatError("expected one of \"" + std::string(allowed) + "\"", pos);
  }

  bool try_read(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
};

}  // namespace detail

// Grammar (whitespace around tokens tolerated, ids decimal non-negative):
//   occlusion := id "<" id              first occludes second
//              | id "<" id "&" id "<" id   mirrored ids, mutual occlusion
//   depth     := id "<" id              first closer
//              | id "=" id              equal depth
inline ParsedOrder parse_order_token(OrderTokenKind kind,
                                     std::string_view text) {
  detail::TokenScanner s{text};
  ParsedOrder out;
  out.kind = kind;

  s.skip_ws();
  const std::size_t first_at = s.pos;
  const int first = s.read_id();
  const char op = s.read_op(kind == OrderTokenKind::Occlusion ? "<" : "<=");
  const int second = s.read_id();
  if (first == second)
    throw FormatError("self-pair " + std::to_string(first) + op +
                          std::to_string(second),
                      first_at);

  if (kind == OrderTokenKind::Occlusion && s.try_read('&')) {
    s.skip_ws();
    const std::size_t third_at = s.pos;
    const int third = s.read_id();
    s.read_op("<");
    s.skip_ws();
    const std::size_t fourth_at = s.pos;
    const int fourth = s.read_id();
    if (third != second)
      throw FormatError("bidirectional form must mirror the first pair",
                        third_at);
    if (fourth != first)
      throw FormatError("bidirectional form must mirror the first pair",
                        fourth_at);
    if (!s.at_end()) throw FormatError("trailing characters", s.pos);
    out.a = std::min(first, second);
    out.b = std::max(first, second);
    out.occlusion = OcclusionRelation::Bidirectional;
    return out;
  }

  if (!s.at_end()) throw FormatError("trailing characters", s.pos);

  out.a = std::min(first, second);
  out.b = std::max(first, second);
  if (kind == OrderTokenKind::Occlusion) {
    out.occlusion = first < second ? OcclusionRelation::AOccludesB
                                   : OcclusionRelation::BOccludesA;
  } else if (op == '=') {
    out.depth = DepthOrder::Equal;
  } else {
    out.depth = first < second ? DepthOrder::Closer : DepthOrder::Farther;
  }
  return out;
}

// Canonical token text for a relation over the canonical pair (a, b).
inline std::string occlusion_token(int a, int b, OcclusionRelation rel) {
  switch (rel) {
    case OcclusionRelation::AOccludesB:
      return std::to_string(a) + "<" + std::to_string(b);
    case OcclusionRelation::BOccludesA:
      return std::to_string(b) + "<" + std::to_string(a);
    case OcclusionRelation::Bidirectional:
      return std::to_string(a) + "<" + std::to_string(b) + " & " +
             std::to_string(b) + "<" + std::to_string(a);
    default:
      throw ValidationError(
          "no-occlusion pairs have no token form; omit the entry instead");
  }
}

inline std::string depth_token(int a, int b, DepthOrder order) {
  switch (order) {
    case DepthOrder::Closer:
      return std::to_string(a) + "<" + std::to_string(b);
    case DepthOrder::Farther:
      return std::to_string(b) + "<" + std::to_string(a);
    default:
      return std::to_string(a) + "=" + std::to_string(b);
  }
}

struct DatasetFile {
  std::vector<ImageAnnotation> images;  // sorted by image_id

  friend bool operator==(const DatasetFile&, const DatasetFile&) = default;
};

namespace detail {

using json = nlohmann::ordered_json;

inline std::string idx(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

inline void require_keys(const json& obj, const std::string& path,
                         std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (item.key() == k) ok = true;
    if (!ok) throw ValidationError(path, "unknown key \"" + item.key() + "\"");
  }
}

inline const json& require_field(const json& obj, const std::string& path,
                                 const char* key) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw ValidationError(path, std::string("missing field \"") + key + "\"");
  return *it;
}

inline std::int64_t require_int(const json& v, const std::string& path) {
  if (!v.is_number_integer())
    throw ValidationError(path, "expected an integer");
  return v.get<std::int64_t>();
}

inline int require_instance_id(const json& v, const std::string& path) {
  const std::int64_t id = require_int(v, path);
  if (id < 0 || id > std::numeric_limits<int>::max())
    throw ValidationError(path, "instance id out of range");
  return static_cast<int>(id);
}

inline int require_count(const json& v, const std::string& path) {
  const std::int64_t c = require_int(v, path);
  if (c < 2)
    throw ValidationError(
        path, "count must be >= 2 (two agreeing workers), got " +
                  std::to_string(c));
  return static_cast<int>(c);
}

inline ParsedOrder parse_token_field(OrderTokenKind kind, const json& v,
                                     const std::string& path) {
  if (!v.is_string()) throw ValidationError(path, "expected an order string");
  try {
    return parse_order_token(kind, v.get_ref<const std::string&>());
  } catch (const FormatError& e) {
    throw ValidationError(path, e.what());
  }
}

inline ImageAnnotation parse_image(const json& jimg, const std::string& path,
                                   std::vector<std::string>* warnings) {
  if (!jimg.is_object()) throw ValidationError(path, "expected an object");
  require_keys(jimg, path, {"image_id", "instances", "occlusion", "depth"});

  ImageAnnotation ann;
  ann.image_id = require_int(require_field(jimg, path, "image_id"),
                             path + ".image_id");

  const json& jinst = require_field(jimg, path, "instances");
  if (!jinst.is_array())
    throw ValidationError(path + ".instances", "expected an array");
  for (std::size_t i = 0; i < jinst.size(); ++i) {
    const std::string ipath = idx(path + ".instances", i);
    const json& ji = jinst[i];
    if (!ji.is_object()) throw ValidationError(ipath, "expected an object");
    require_keys(ji, ipath, {"id", "class", "area", "bottom_row"});
    InstanceRef ref;
    ref.image_id = ann.image_id;
    ref.instance_id =
        require_instance_id(require_field(ji, ipath, "id"), ipath + ".id");
    if (auto it = ji.find("class"); it != ji.end()) {
      if (!it->is_string())
        throw ValidationError(ipath + ".class", "expected a string");
      ref.class_label = it->get<std::string>();
    }
    if (auto it = ji.find("area"); it != ji.end()) {
      const std::int64_t area = require_int(*it, ipath + ".area");
      if (area <= 0)
        throw ValidationError(ipath + ".area", "area must be positive");
      ref.bbox_area_px = area;
    }
    if (auto it = ji.find("bottom_row"); it != ji.end()) {
      const std::int64_t row = require_int(*it, ipath + ".bottom_row");
      if (row < 0 || row > std::numeric_limits<int>::max())
        throw ValidationError(ipath + ".bottom_row",
                              "bottom_row must be non-negative");
      ref.bottom_row = static_cast<int>(row);
    }
    ann.instances.push_back(std::move(ref));
  }
  std::sort(ann.instances.begin(), ann.instances.end(),
            [](const InstanceRef& x, const InstanceRef& y) {
              return x.instance_id < y.instance_id;
            });
  for (std::size_t i = 1; i < ann.instances.size(); ++i)
    if (ann.instances[i].instance_id == ann.instances[i - 1].instance_id)
      throw ValidationError(
          path + ".instances",
          "duplicate instance id " +
              std::to_string(ann.instances[i].instance_id));

  auto declared = [&ann](int id) {
    for (const auto& inst : ann.instances)
      if (inst.instance_id == id) return true;
    return false;
  };

  std::map<std::pair<int, int>, PairOrder> pairs;
  auto pair_slot = [&pairs](int a, int b) -> PairOrder& {
    auto [it, inserted] = pairs.try_emplace({a, b});
    if (inserted) {
      it->second.a = a;
      it->second.b = b;
    }
    return it->second;
  };

  const json& jocc = require_field(jimg, path, "occlusion");
  if (!jocc.is_array())
    throw ValidationError(path + ".occlusion", "expected an array");
  for (std::size_t i = 0; i < jocc.size(); ++i) {
    const std::string epath = idx(path + ".occlusion", i);
    const json& je = jocc[i];
    if (!je.is_object()) throw ValidationError(epath, "expected an object");
    require_keys(je, epath, {"order", "count"});
    const ParsedOrder parsed =
        parse_token_field(OrderTokenKind::Occlusion,
                          require_field(je, epath, "order"), epath + ".order");
    if (!declared(parsed.a) || !declared(parsed.b))
      throw ValidationError(epath + ".order", "unknown instance id");
    PairOrder& slot = pair_slot(parsed.a, parsed.b);
    if (slot.occlusion)
      throw ValidationError(epath, "duplicate occlusion order for pair (" +
                                       std::to_string(parsed.a) + "," +
                                       std::to_string(parsed.b) + ")");
    slot.occlusion = parsed.occlusion;
    if (auto it = je.find("count"); it != je.end())
      slot.occlusion_count = require_count(*it, epath + ".count");
  }

  const json& jdep = require_field(jimg, path, "depth");
  if (!jdep.is_array())
    throw ValidationError(path + ".depth", "expected an array");
  for (std::size_t i = 0; i < jdep.size(); ++i) {
    const std::string epath = idx(path + ".depth", i);
    const json& je = jdep[i];
    if (!je.is_object()) throw ValidationError(epath, "expected an object");
    require_keys(je, epath, {"order", "count", "overlap"});
    const ParsedOrder parsed =
        parse_token_field(OrderTokenKind::Depth,
                          require_field(je, epath, "order"), epath + ".order");
    if (!declared(parsed.a) || !declared(parsed.b))
      throw ValidationError(epath + ".order", "unknown instance id");
    PairOrder& slot = pair_slot(parsed.a, parsed.b);
    if (slot.depth)
      throw ValidationError(epath, "duplicate depth order for pair (" +
                                       std::to_string(parsed.a) + "," +
                                       std::to_string(parsed.b) + ")");
    DepthRelation rel;
    rel.relation = parsed.depth;
    rel.range_kind = RangeKind::Distinct;
    if (auto it = je.find("overlap"); it != je.end()) {
      if (!it->is_boolean())
        throw ValidationError(epath + ".overlap", "expected a boolean");
      if (it->get<bool>()) rel.range_kind = RangeKind::Overlap;
    }
    slot.depth = rel;
    if (auto it = je.find("count"); it != je.end())
      slot.depth_count = require_count(*it, epath + ".count");
  }

  ann.pairs.reserve(pairs.size());
  for (auto& [key, pair] : pairs) ann.pairs.push_back(std::move(pair));

  if (warnings) {
    for (const auto& inst : ann.instances) {
      if (inst.bbox_area_px && *inst.bbox_area_px < 625)
        warnings->push_back(
            "image " + std::to_string(ann.image_id) + " instance " +
            std::to_string(inst.instance_id) + ": area " +
            std::to_string(*inst.bbox_area_px) +
            " px is below the 25x25 collection floor");
    }
  }
  return ann;
}

}  // namespace detail

// Parses the canonical annotation schema:
//   {"images":[{"image_id":int,
//               "instances":[{"id":int,"class":str?,"area":int?,"bottom_row":int?}],
//               "occlusion":[{"order":str,"count":int?}],
//               "depth":[{"order":str,"count":int?,"overlap":bool?}]}]}
// Every pair is stored canonically (a < b); counts must be >= 2 when present;
// instances below the 25x25 size floor are reported through `warnings`, never
// dropped. "No occlusion" has no token form: a pair carrying only a depth
// entry is an annotated no-occlusion pair.
inline DatasetFile parse_dataset(std::string_view bytes,
                                 std::vector<std::string>* warnings = nullptr) {
  detail::json root;
  try {
    root = detail::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what(),
                      e.byte > 0 ? e.byte - 1 : 0);
  }
  if (!root.is_object())
    throw ValidationError("$", "expected a top-level object");
  detail::require_keys(root, "$", {"images"});
  const detail::json& jimages = detail::require_field(root, "$", "images");
  if (!jimages.is_array())
    throw ValidationError("images", "expected an array");

  DatasetFile out;
  for (std::size_t i = 0; i < jimages.size(); ++i)
    out.images.push_back(
        detail::parse_image(jimages[i], detail::idx("images", i), warnings));
  std::sort(out.images.begin(), out.images.end(),
            [](const ImageAnnotation& x, const ImageAnnotation& y) {
              return x.image_id < y.image_id;
            });
  for (std::size_t i = 1; i < out.images.size(); ++i)
    if (out.images[i].image_id == out.images[i - 1].image_id)
      throw ValidationError(
          "images",
          "duplicate image_id " + std::to_string(out.images[i].image_id));
  return out;
}

// Deterministic canonical serialization: images sorted by id, instances by id,
// pairs by (a, b); 2-space indentation, LF line endings. Occlusion entries are
// emitted only for occluding relations (an explicit no-occlusion relation has
// no token form and serializes as absence).
inline std::string serialize_dataset(const DatasetFile& d) {
  using detail::json;
  std::vector<const ImageAnnotation*> images;
  images.reserve(d.images.size());
  for (const auto& img : d.images) images.push_back(&img);
  std::sort(images.begin(), images.end(),
            [](const ImageAnnotation* x, const ImageAnnotation* y) {
              return x->image_id < y->image_id;
            });

  json root = json::object();
  root["images"] = json::array();
  for (const ImageAnnotation* img : images) {
    json jimg = json::object();
    jimg["image_id"] = img->image_id;

    std::vector<const InstanceRef*> instances;
    for (const auto& inst : img->instances) instances.push_back(&inst);
    std::sort(instances.begin(), instances.end(),
              [](const InstanceRef* x, const InstanceRef* y) {
                return x->instance_id < y->instance_id;
              });
    jimg["instances"] = json::array();
    for (const InstanceRef* inst : instances) {
      json ji = json::object();
      ji["id"] = inst->instance_id;
      if (inst->class_label) ji["class"] = *inst->class_label;
      if (inst->bbox_area_px) ji["area"] = *inst->bbox_area_px;
      if (inst->bottom_row) ji["bottom_row"] = *inst->bottom_row;
      jimg["instances"].push_back(std::move(ji));
    }

    std::vector<PairOrder> pairs;
    pairs.reserve(img->pairs.size());
    for (const auto& p : img->pairs) pairs.push_back(canonicalize(p));
    std::sort(pairs.begin(), pairs.end(), [](const PairOrder& x,
                                             const PairOrder& y) {
      return std::pair(x.a, x.b) < std::pair(y.a, y.b);
    });

    jimg["occlusion"] = json::array();
    for (const auto& p : pairs) {
      if (!p.occlusion || *p.occlusion == OcclusionRelation::None) continue;
      json je = json::object();
      je["order"] = occlusion_token(p.a, p.b, *p.occlusion);
      if (p.occlusion_count) je["count"] = *p.occlusion_count;
      jimg["occlusion"].push_back(std::move(je));
    }

    jimg["depth"] = json::array();
    for (const auto& p : pairs) {
      if (!p.depth) continue;
      json je = json::object();
      je["order"] = depth_token(p.a, p.b, p.depth->relation);
      if (p.depth_count) je["count"] = *p.depth_count;
      je["overlap"] = p.depth->range_kind == RangeKind::Overlap;
      jimg["depth"].push_back(std::move(je));
    }

    root["images"].push_back(std::move(jimg));
  }
  return root.dump(2) + "\n";
}

}  // namespace occdepth
