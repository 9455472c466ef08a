// occdepth: command-line front end for the instance ordering toolkit.
// Machine-readable results go to stdout, diagnostics to stderr. Exit codes:
// 0 success, 1 validation failure, 2 usage error, 3 I/O or format error.

#include <array>
#include <atomic>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "occdepth/annotation_io.hpp"
#include "occdepth/baselines.hpp"
#include "occdepth/error.hpp"
#include "occdepth/losses.hpp"
#include "occdepth/metrics.hpp"
#include "occdepth/raster_io.hpp"
#include "occdepth/report_io.hpp"
#include "occdepth/stats.hpp"

namespace {

using namespace occdepth;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failure on " + path);
  return std::move(buf).str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failure on " + path);
}

DatasetFile load_annotations(const std::string& path,
                             std::vector<std::string>* warnings = nullptr) {
  return parse_dataset(read_file(path), warnings);
}

// Maps f over [0, n) on `threads` workers and returns results in index order,
// so downstream folds are independent of the thread count.
template <typename T, typename F>
std::vector<T> parallel_map(std::size_t n, int threads, F f) {
  std::vector<T> results(n);
  if (n == 0) return results;
  unsigned int workers =
      threads > 0 ? static_cast<unsigned int>(threads)
                  : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned int>(workers, static_cast<unsigned int>(n));

  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) results[i] = f(i);
    return results;
  }

  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::atomic<std::size_t> cursor{0};
  for (unsigned int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = cursor.fetch_add(1);
        if (i >= n) return;
        try {
          results[i] = f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

// Pairs gt and pred images by id; both files must cover the same image set.
std::vector<std::pair<const ImageAnnotation*, const ImageAnnotation*>>
match_images(const DatasetFile& gt, const DatasetFile& pred) {
  std::map<std::int64_t, const ImageAnnotation*> by_id;
  for (const auto& img : pred.images) by_id[img.image_id] = &img;
  if (by_id.size() != gt.images.size())
    throw ValidationError(
        "ground truth and prediction files cover different image sets");
  std::vector<std::pair<const ImageAnnotation*, const ImageAnnotation*>> out;
  out.reserve(gt.images.size());
  for (const auto& img : gt.images) {
    auto it = by_id.find(img.image_id);
    if (it == by_id.end())
      throw ValidationError("prediction file is missing image " +
                            std::to_string(img.image_id));
    out.push_back({&img, it->second});
  }
  return out;
}

int run_validate(const std::string& path, int threads) {
  std::vector<std::string> warnings;
  const DatasetFile data = load_annotations(path, &warnings);

  struct ImageReport {
    std::vector<std::vector<int>> cycles;
    SmallInstanceFlags flags;
  };
  const auto reports = parallel_map<ImageReport>(
      data.images.size(), threads, [&data](std::size_t i) {
        const ImageAnnotation& img = data.images[i];
        ImageReport r;
        r.cycles = check_depth_consistency(build_order_graph(img));
        r.flags = flag_small_instances(img.instances);
        return r;
      });

  long long n_instances = 0;
  long long n_pairs = 0;
  for (const auto& img : data.images) {
    n_instances += static_cast<long long>(img.instances.size());
    n_pairs += static_cast<long long>(img.pairs.size());
  }
  std::cout << "images: " << data.images.size() << ", instances: "
            << n_instances << ", pairs: " << n_pairs << "\n";

  for (std::size_t i = 0; i < data.images.size(); ++i) {
    const auto& img = data.images[i];
    for (const auto& cycle : reports[i].cycles) {
      std::cout << "image " << img.image_id << ": strict depth cycle";
      for (int node : cycle) std::cout << " " << node;
      std::cout << "\n";
    }
    for (int id : reports[i].flags.flagged)
      std::cout << "image " << img.image_id << ": instance " << id
                << " below 25x25 size floor\n";
    for (int id : reports[i].flags.skipped_no_area)
      std::cerr << "image " << img.image_id << ": instance " << id
                << " has no area, size floor not checked\n";
  }
  std::cout << "schema: ok\n";
  return 0;
}

int run_eval_occ(const std::string& gt_path, const std::string& pred_path,
                 const std::string& mode_name, int threads) {
  const OcclusionMode mode = mode_name == "without-bi"
                                 ? OcclusionMode::WithoutBidirectional
                                 : OcclusionMode::WithBidirectional;
  const DatasetFile gt = load_annotations(gt_path);
  const DatasetFile pred = load_annotations(pred_path);
  const auto matched = match_images(gt, pred);

  const auto partials = parallel_map<OcclusionCounts>(
      matched.size(), threads, [&matched, mode](std::size_t i) {
        return occlusion_counts_for_image(*matched[i].first,
                                          *matched[i].second, mode);
      });
  OcclusionCounts total;
  for (const auto& c : partials) total += c;
  const OcclusionPRF prf = finalize_occlusion(total);

  JsonWriter w;
  w.begin_object();
  w.key("recall").value(prf.recall);
  w.key("precision").value(prf.precision);
  w.key("f1").value(prf.f1);
  w.end_object();
  std::cout << w.take();
  return 0;
}

int run_eval_depth_order(const std::string& gt_path,
                         const std::string& pred_path,
                         const std::string& category, int threads) {
  const DatasetFile gt = load_annotations(gt_path);
  const DatasetFile pred = load_annotations(pred_path);
  const auto matched = match_images(gt, pred);

  using Accums = std::array<WhdrAccum, 3>;  // distinct, overlap, all
  const auto partials = parallel_map<Accums>(
      matched.size(), threads, [&matched](std::size_t i) {
        const auto items =
            whdr_items_for_image(*matched[i].first, *matched[i].second);
        return Accums{whdr_accumulate(items, WhdrCategory::Distinct),
                      whdr_accumulate(items, WhdrCategory::Overlap),
                      whdr_accumulate(items, WhdrCategory::All)};
      });
  Accums total;
  for (const auto& a : partials) {
    total[0] += a[0];
    total[1] += a[1];
    total[2] += a[2];
  }

  JsonWriter w;
  w.begin_object();
  w.key("whdr").begin_object();
  if (category.empty() || category == "distinct")
    w.key("distinct").value(finalize_whdr(total[0]));
  if (category.empty() || category == "overlap")
    w.key("overlap").value(finalize_whdr(total[1]));
  if (category.empty() || category == "all")
    w.key("all").value(finalize_whdr(total[2]));
  w.end_object();
  w.end_object();
  std::cout << w.take();
  return 0;
}

int run_eval_disparity(const std::string& gt_path, const std::string& pred_path,
                       const std::string& valid_path, bool scale) {
  const Grid gt = load_disparity(read_file(gt_path));
  const Grid pred = load_disparity(read_file(pred_path));
  std::vector<Pixel> valid;
  if (valid_path.empty()) {
    valid = valid_from_positive(gt);
  } else {
    const InstanceMask mask = load_mask(read_file(valid_path));
    if (mask.rows != gt.rows || mask.cols != gt.cols)
      throw ValidationError("valid mask dimensions do not match ground truth");
    valid = mask.pixels;
  }
  const DepthMapReport report = depth_map_metrics(gt, pred, valid, scale);

  JsonWriter w;
  w.begin_object();
  w.key("abs_rel").value(report.abs_rel);
  w.key("sq_rel").value(report.sq_rel);
  w.key("rmse_log").value(report.rmse_log);
  w.key("delta1").value(report.delta1);
  w.key("delta2").value(report.delta2);
  w.key("delta3").value(report.delta3);
  w.end_object();
  std::cout << w.take();
  return 0;
}

std::vector<PointPairQuery> parse_queries(const std::string& bytes) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what(),
                      e.byte > 0 ? e.byte - 1 : 0);
  }
  if (!root.is_object() || !root.contains("queries") ||
      !root["queries"].is_array())
    throw ValidationError("queries",
                          "expected {\"queries\":[{\"p1\":[r,c],\"p2\":[r,c],"
                          "\"gt\":\"closer|equal|farther\"}]}");
  std::vector<PointPairQuery> queries;
  for (std::size_t i = 0; i < root["queries"].size(); ++i) {
    const auto& jq = root["queries"][i];
    const std::string path = "queries[" + std::to_string(i) + "]";
    auto point = [&](const char* key) {
      if (!jq.contains(key) || !jq[key].is_array() || jq[key].size() != 2 ||
          !jq[key][0].is_number_integer() || !jq[key][1].is_number_integer())
        throw ValidationError(path, std::string(key) + " must be [row, col]");
      return Pixel{jq[key][0].get<int>(), jq[key][1].get<int>()};
    };
    PointPairQuery q;
    q.p1 = point("p1");
    q.p2 = point("p2");
    if (!jq.contains("gt") || !jq["gt"].is_string())
      throw ValidationError(path, "gt must be closer, equal, or farther");
    const std::string rel = jq["gt"].get<std::string>();
    if (rel == "closer")
      q.gt = DepthOrder::Closer;
    else if (rel == "equal")
      q.gt = DepthOrder::Equal;
    else if (rel == "farther")
      q.gt = DepthOrder::Farther;
    else
      throw ValidationError(path, "gt must be closer, equal, or farther");
    queries.push_back(q);
  }
  return queries;
}

int run_eval_points(const std::string& disp_path,
                    const std::string& queries_path) {
  const Grid disp = load_disparity(read_file(disp_path));
  const auto queries = parse_queries(read_file(queries_path));
  const PointPairResult result = point_pair_eval(disp, queries);

  JsonWriter w;
  w.begin_object();
  w.key("n_correct").value(result.n_correct);
  w.key("n_wrong").value(result.n_wrong);
  w.key("whdr").value(result.whdr);
  w.end_object();
  std::cout << w.take();
  return 0;
}

// Raster layout for disparity-backed baselines:
//   <dir>/disp_<image_id>.pfm           disparity map of the image
//   <dir>/mask_<image_id>_<inst_id>.pgm instance masks
int run_baseline(const std::string& method, const std::string& ann_path,
                 const std::string& raster_dir, double trim, double eq_tol,
                 const std::string& output) {
  const DatasetFile gt = load_annotations(ann_path);
  const bool needs_rasters = method == "disp-mean" || method == "disp-median";
  if (needs_rasters && raster_dir.empty())
    throw ValidationError("method " + method + " needs --rasters");
  const InstanceStat stat =
      method == "disp-mean" ? InstanceStat::Mean : InstanceStat::Median;

  DatasetFile out;
  for (const auto& img : gt.images) {
    ImageAnnotation pred;
    pred.image_id = img.image_id;
    for (const auto& inst : img.instances) {
      InstanceRef ref;
      ref.image_id = img.image_id;
      ref.instance_id = inst.instance_id;
      pred.instances.push_back(ref);
    }

    std::optional<Grid> disp;
    std::map<int, InstanceMask> masks;
    if (needs_rasters) {
      disp = load_disparity(read_file(
          raster_dir + "/disp_" + std::to_string(img.image_id) + ".pfm"));
      for (const auto& inst : img.instances)
        masks[inst.instance_id] = load_mask(read_file(
            raster_dir + "/mask_" + std::to_string(img.image_id) + "_" +
            std::to_string(inst.instance_id) + ".pgm"));
    }
    auto instance_of = [&img](int id) -> const InstanceRef& {
      for (const auto& inst : img.instances)
        if (inst.instance_id == id) return inst;
      throw ValidationError("unknown instance " + std::to_string(id));
    };

    for (const auto& gt_pair : img.pairs) {
      PairOrder p;
      p.a = gt_pair.a;
      p.b = gt_pair.b;
      if (method == "area") {
        const auto& ia = instance_of(gt_pair.a);
        const auto& ib = instance_of(gt_pair.b);
        p.occlusion = predict_occlusion_by_area(ia, ib);
        if (gt_pair.depth)
          p.depth = DepthRelation{predict_depth_by_area(ia, ib),
                                  RangeKind::Distinct};
      } else if (method == "yaxis") {
        const auto& ia = instance_of(gt_pair.a);
        const auto& ib = instance_of(gt_pair.b);
        p.occlusion = predict_occlusion_by_yaxis(ia, ib);
        if (gt_pair.depth)
          p.depth = DepthRelation{predict_depth_by_yaxis(ia, ib),
                                  RangeKind::Distinct};
      } else {
        if (!gt_pair.depth) continue;  // disparity methods predict depth only
        const DepthOrder rel = predict_depth_from_disparity(
            *disp, masks.at(gt_pair.a), masks.at(gt_pair.b), stat,
            TrimSpec{trim}, eq_tol);
        p.depth = DepthRelation{rel, RangeKind::Distinct};
      }
      if ((p.occlusion && *p.occlusion != OcclusionRelation::None) || p.depth)
        pred.pairs.push_back(p);
    }
    out.images.push_back(std::move(pred));
  }

  const std::string bytes = serialize_dataset(out);
  if (output.empty())
    std::cout << bytes;
  else
    write_file(output, bytes);
  return 0;
}

int run_loss_disp(const std::string& disp_path, const std::string& mask_a_path,
                  const std::string& mask_b_path, int direction) {
  const Grid disp = load_disparity(read_file(disp_path));
  const InstanceMask a = load_mask(read_file(mask_a_path));
  const InstanceMask b = load_mask(read_file(mask_b_path));
  std::cout << format6(instance_disparity_loss(disp, a, b, direction)) << "\n";
  return 0;
}

int run_loss_smooth(const std::string& disp_path,
                    const std::array<std::string, 3>& plane_paths) {
  const Grid disp = load_disparity(read_file(disp_path));
  std::array<Grid, 3> planes;
  for (std::size_t i = 0; i < 3; ++i)
    planes[i] = normalized_plane(load_pgm(read_file(plane_paths[i])));
  std::cout << format6(smoothness_loss(disp, planes)) << "\n";
  return 0;
}

int run_loss_combined(double loo, double ldo, double ldisp, double ls,
                      const std::string& preset,
                      const std::vector<double>& weights) {
  LossWeights w;
  if (!weights.empty()) {
    if (weights.size() != 4)
      throw ValidationError("--weights needs exactly four values");
    w = {weights[0], weights[1], weights[2], weights[3]};
  } else if (preset == "d") {
    w = depth_variant_weights();
  } else if (preset == "od") {
    w = joint_variant_weights();
  } else {
    throw ValidationError("choose --preset d|od or give --weights");
  }
  std::cout << format6(combined_objective(loo, ldo, ldisp, ls, w)) << "\n";
  return 0;
}

int run_stats(const std::string& path, int subsample_cap, std::uint64_t seed,
              int threads) {
  DatasetFile data = load_annotations(path);
  if (subsample_cap > 0) {
    // Per-image seed: global seed XOR image id, so every image draws an
    // independent deterministic stream.
    for (auto& img : data.images)
      img = subsample_instances(
          img, static_cast<std::size_t>(subsample_cap),
          seed ^ static_cast<std::uint64_t>(img.image_id));
  }

  struct Partial {
    StatsCounts stats;
    JointOrderCounts joint;
  };
  const auto partials = parallel_map<Partial>(
      data.images.size(), threads, [&data](std::size_t i) {
        return Partial{stats_counts_for_image(data.images[i]),
                       joint_counts_for_image(data.images[i])};
      });
  StatsCounts counts;
  JointOrderCounts joint;
  for (const auto& p : partials) {
    counts += p.stats;
    joint += p.joint;
  }
  const StatsReport report = finalize_stats(counts);
  const auto [occ_given_depth, depth_given_occ] =
      conditional_tables_from(joint);

  for (std::size_t c = 0; c < occ_given_depth.column_nonzero.size(); ++c)
    if (!occ_given_depth.column_nonzero[c])
      std::cerr << "p_occ_given_depth: column " << c
                << " has no pairs, emitted as zeros\n";
  for (std::size_t c = 0; c < depth_given_occ.column_nonzero.size(); ++c)
    if (!depth_given_occ.column_nonzero[c])
      std::cerr << "p_depth_given_occ: column " << c
                << " has no pairs, emitted as zeros\n";

  JsonWriter w;
  w.begin_object();
  w.key("n_images").value(report.counts.n_images);
  w.key("n_instances").value(report.counts.n_instances);
  w.key("n_orders").value(report.counts.n_orders);
  w.key("instances_per_image").begin_object();
  for (const auto& [bin, freq] : report.counts.instances_per_image)
    w.key(std::to_string(bin)).value(freq);
  w.end_object();
  w.key("count_hist").begin_object();
  for (const auto& [bin, freq] : report.counts.count_hist)
    w.key(std::to_string(bin)).value(freq);
  w.end_object();
  w.key("occ_types").begin_object();
  w.key("none").value(report.occ_type_dist[0]);
  w.key("uni").value(report.occ_type_dist[1]);
  w.key("bi").value(report.occ_type_dist[2]);
  w.end_object();
  w.key("depth_types").begin_object();
  w.key("distinct_strict").value(report.depth_type_dist[0]);
  w.key("distinct_equal").value(report.depth_type_dist[1]);
  w.key("overlap_directed").value(report.depth_type_dist[2]);
  w.key("overlap_mutual").value(report.depth_type_dist[3]);
  w.end_object();
  auto emit_matrix = [&w](const ConditionalTable& t) {
    w.begin_array();
    for (const auto& row : t.p) {
      w.begin_array();
      for (double v : row) w.value(v);
      w.end_array();
    }
    w.end_array();
  };
  w.key("p_occ_given_depth");
  emit_matrix(occ_given_depth);
  w.key("p_depth_given_occ");
  emit_matrix(depth_given_occ);
  w.end_object();
  std::cout << w.take();
  return 0;
}

int run_aggregate(const std::string& votes_path) {
  std::istringstream in(read_file(votes_path));
  VoteStream votes;
  std::string token;
  while (in >> token) votes.push_back(token);
  const AggregationResult result = aggregate_votes(votes);
  std::cout << result.label << " " << result.count << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"instance occlusion/depth ordering toolkit"};
  app.require_subcommand(1);
  int exit_code = 0;

  // validate
  auto* validate = app.add_subcommand(
      "validate", "check an annotation file and report depth cycles");
  std::string validate_path;
  int validate_threads = 0;
  validate->add_option("file", validate_path, "annotation file")->required();
  validate->add_option("--threads", validate_threads, "worker threads (0 = auto)");
  validate->callback(
      [&] { exit_code = run_validate(validate_path, validate_threads); });

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate predictions");
  eval->require_subcommand(1);

  auto* eval_occ = eval->add_subcommand("occ", "occlusion recall/precision/F1");
  std::string occ_gt, occ_pred, occ_mode = "with-bi";
  int occ_threads = 0;
  eval_occ->add_option("--gt", occ_gt, "ground-truth annotations")->required();
  eval_occ->add_option("--pred", occ_pred, "predicted annotations")->required();
  eval_occ->add_option("--mode", occ_mode, "with-bi (default) or without-bi")
      ->check(CLI::IsMember({"with-bi", "without-bi"}));
  eval_occ->add_option("--threads", occ_threads, "worker threads (0 = auto)");
  eval_occ->callback([&] {
    exit_code = run_eval_occ(occ_gt, occ_pred, occ_mode, occ_threads);
  });

  auto* eval_depth = eval->add_subcommand("depth-order", "depth-order WHDR");
  std::string depth_gt, depth_pred, depth_category;
  int depth_threads = 0;
  eval_depth->add_option("--gt", depth_gt, "ground-truth annotations")
      ->required();
  eval_depth->add_option("--pred", depth_pred, "predicted annotations")
      ->required();
  eval_depth->add_option("--category", depth_category,
                         "distinct, overlap, or all (default: report all three)")
      ->check(CLI::IsMember({"distinct", "overlap", "all"}));
  eval_depth->add_option("--threads", depth_threads, "worker threads (0 = auto)");
  eval_depth->callback([&] {
    exit_code =
        run_eval_depth_order(depth_gt, depth_pred, depth_category, depth_threads);
  });

  auto* eval_disp = eval->add_subcommand("disparity", "dense disparity metrics");
  std::string disp_gt, disp_pred, disp_valid;
  bool median_scale_flag = false;
  eval_disp->add_option("--gt", disp_gt, "ground-truth PFM")->required();
  eval_disp->add_option("--pred", disp_pred, "predicted PFM")->required();
  eval_disp->add_option("--valid", disp_valid,
                        "PGM mask of valid pixels (default: gt > 0)");
  eval_disp->add_flag("--median-scale", median_scale_flag,
                      "apply per-image median ground-truth scaling");
  eval_disp->callback([&] {
    exit_code =
        run_eval_disparity(disp_gt, disp_pred, disp_valid, median_scale_flag);
  });

  auto* eval_points = eval->add_subcommand("points", "two-point depth orders");
  std::string points_disp, points_queries;
  eval_points->add_option("--disp", points_disp, "disparity PFM")->required();
  eval_points->add_option("--queries", points_queries, "query JSON file")
      ->required();
  eval_points->callback(
      [&] { exit_code = run_eval_points(points_disp, points_queries); });

  // baseline
  auto* baseline = app.add_subcommand("baseline", "non-learned predictors");
  std::string bl_method, bl_ann, bl_rasters, bl_output;
  double bl_trim = 0.05, bl_eq_tol = 0.0;
  baseline->add_option("--method", bl_method, "area, yaxis, disp-mean, disp-median")
      ->required()
      ->check(CLI::IsMember({"area", "yaxis", "disp-mean", "disp-median"}));
  baseline->add_option("--ann", bl_ann, "annotation file (pair universe)")
      ->required();
  baseline->add_option("--rasters", bl_rasters,
                       "directory with disp_<img>.pfm and mask_<img>_<inst>.pgm");
  baseline->add_option("--trim", bl_trim,
                       "tail fraction ignored per side (default 0.05)");
  baseline->add_option("--eq-tol", bl_eq_tol,
                       "relative tolerance for predicting equal depth");
  baseline->add_option("--output", bl_output,
                       "predictions file (default: stdout)");
  baseline->callback([&] {
    exit_code = run_baseline(bl_method, bl_ann, bl_rasters, bl_trim, bl_eq_tol,
                             bl_output);
  });

  // loss
  auto* loss = app.add_subcommand("loss", "ordering-aware loss oracles");
  loss->require_subcommand(1);

  auto* loss_disp = loss->add_subcommand("disp", "instance-wise disparity loss");
  std::string ld_disp, ld_mask_a, ld_mask_b;
  int ld_direction = 1;
  loss_disp->add_option("--disp", ld_disp, "disparity PFM")->required();
  loss_disp->add_option("--mask-a", ld_mask_a, "instance A mask PGM")->required();
  loss_disp->add_option("--mask-b", ld_mask_b, "instance B mask PGM")->required();
  loss_disp->add_option("--direction", ld_direction,
                        "signed depth code of A vs B: 1 closer, -1 farther")
      ->required();
  loss_disp->callback([&] {
    exit_code = run_loss_disp(ld_disp, ld_mask_a, ld_mask_b, ld_direction);
  });

  auto* loss_smooth = loss->add_subcommand("smooth", "edge-aware smoothness");
  std::string ls_disp;
  std::array<std::string, 3> ls_planes;
  loss_smooth->add_option("--disp", ls_disp, "disparity PFM")->required();
  loss_smooth->add_option("--image-r", ls_planes[0], "red plane PGM")->required();
  loss_smooth->add_option("--image-g", ls_planes[1], "green plane PGM")
      ->required();
  loss_smooth->add_option("--image-b", ls_planes[2], "blue plane PGM")
      ->required();
  loss_smooth->callback(
      [&] { exit_code = run_loss_smooth(ls_disp, ls_planes); });

  auto* loss_combined = loss->add_subcommand("combined", "weighted objective");
  double lc_loo = 0.0, lc_ldo = 0.0, lc_ldisp = 0.0, lc_ls = 0.0;
  std::string lc_preset;
  std::vector<double> lc_weights;
  loss_combined->add_option("--loo", lc_loo, "occlusion cross-entropy value")
      ->required();
  loss_combined->add_option("--ldo", lc_ldo, "depth cross-entropy value")
      ->required();
  loss_combined->add_option("--ldisp", lc_ldisp, "instance disparity loss")
      ->required();
  loss_combined->add_option("--ls", lc_ls, "smoothness loss")->required();
  loss_combined->add_option("--preset", lc_preset,
                            "d = {0,1,1,0.1}, od = {1,1,1,0.1}")
      ->check(CLI::IsMember({"d", "od"}));
  loss_combined->add_option("--weights", lc_weights,
                            "four weights overriding the preset")
      ->expected(4);
  loss_combined->callback([&] {
    exit_code = run_loss_combined(lc_loo, lc_ldo, lc_ldisp, lc_ls, lc_preset,
                                  lc_weights);
  });

  // stats
  auto* stats = app.add_subcommand("stats", "dataset statistics and tables");
  std::string stats_path;
  int stats_cap = 0;
  std::uint64_t stats_seed = 0;
  int stats_threads = 0;
  stats->add_option("--input", stats_path, "annotation file")->required();
  stats->add_option("--subsample-cap", stats_cap,
                    "keep at most this many instances per image (0 = all)");
  stats->add_option("--seed", stats_seed, "subsampling seed (default 0)");
  stats->add_option("--threads", stats_threads, "worker threads (0 = auto)");
  stats->callback([&] {
    exit_code = run_stats(stats_path, stats_cap, stats_seed, stats_threads);
  });

  // aggregate
  auto* aggregate = app.add_subcommand(
      "aggregate", "replay the two-agreements vote stopping rule");
  std::string agg_votes;
  aggregate->add_option("--votes", agg_votes,
                        "file of whitespace-separated labels")
      ->required();
  aggregate->callback([&] { exit_code = run_aggregate(agg_votes); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
