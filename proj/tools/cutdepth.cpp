// cutdepth: batch front-end for synthesis, augmentation and evaluation.
//
// Every flag can also be set through an environment variable named
// CUTDEPTH_<FLAG> (upper case, dashes as underscores), e.g. CUTDEPTH_SEED.
// Command-line values win over the environment.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "cutdepth/commands.hpp"

namespace {

using namespace cutdepth;
using namespace cutdepth::cli;

std::string env_name(const std::string& flag) {
  std::string out = "CUTDEPTH_";
  for (char c : flag) out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

template <typename T>
CLI::Option* flag(CLI::App* app, const std::string& name, T& value, const std::string& help) {
  return app->add_option("--" + name, value, help)->envname(env_name(name))->capture_default_str();
}

struct MethodArgs {
  std::string method = "cutdepth";
  double p = 0.75;
  double apply_prob = 1.0;
  std::string fill = "mean";
  std::string depth_norm = "minmax";
  double norm_lo = 0.0;
  double norm_hi = 10.0;
  bool mix_depth = false;

  void add(CLI::App* app) {
    flag(app, "method", method, "none | cutdepth | cutout | random-erasing | cutmix");
    flag(app, "p", p, "maximum paste extent relative to the remaining span, in (0, 1]");
    flag(app, "apply-prob", apply_prob, "probability of augmenting an item");
    flag(app, "fill", fill, "cutout fill: 'mean' or a constant in [0, 1]");
    flag(app, "depth-norm", depth_norm, "depth-to-image mapping: minmax | fixed");
    flag(app, "norm-lo", norm_lo, "fixed normalization lower bound (m)");
    flag(app, "norm-hi", norm_hi, "fixed normalization upper bound (m)");
    app->add_flag("--cutmix-depth", mix_depth, "cutmix also pastes the partner's depth target")
        ->envname(env_name("cutmix-depth"));
  }

  FillMode fill_mode() const {
    if (fill == "mean") return ImageMeanFill{};
    return ConstantFill{std::stod(fill)};
  }

  DepthNormalization norm() const {
    if (depth_norm == "minmax") return PerImageMinMax{};
    if (depth_norm == "fixed") return FixedRange{norm_lo, norm_hi};
    throw ParameterError("unknown depth normalization '" + depth_norm + "'");
  }

  AugmentSpec spec() const {
    AugmentSpec s;
    s.method = parse_method(method);
    s.p = p;
    s.apply_probability = apply_prob;
    s.fill = fill_mode();
    s.depth_norm = norm();
    s.cutmix_mixes_depth = mix_depth;
    s.validate();
    return s;
  }
};

int report(const std::string& command, const CommandResult& result) {
  if (!result.errors.empty()) std::cerr << result.error_summary_json(command) << '\n';
  return result.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CutDepth RGB-D augmentation and evaluation toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string out_dir;
  std::string report_path;
  unsigned workers = 1;
  double min_depth = 1e-3;
  double max_depth = 10.0;

  // synth
  auto* synth = app.add_subcommand("synth", "generate synthetic RGB-D scenes");
  SynthOptions synth_opts;
  flag(synth, "n", synth_opts.count, "number of scenes");
  flag(synth, "width", synth_opts.scene.width, "scene width (px)");
  flag(synth, "height", synth_opts.scene.height, "scene height (px)");
  flag(synth, "boxes", synth_opts.scene.n_boxes, "boxes per scene");
  flag(synth, "depth-lo", synth_opts.scene.depth_lo, "nearest box depth (m)");
  flag(synth, "depth-hi", synth_opts.scene.depth_hi, "background depth (m)");
  flag(synth, "depth-scale", synth_opts.depth_scale, "raw 16-bit units per meter");
  flag(synth, "seed", seed, "master seed");
  flag(synth, "out", out_dir, "output directory")->required();

  // augment
  auto* augment = app.add_subcommand("augment", "augment a dataset manifest");
  AugmentOptions aug_opts;
  MethodArgs aug_method;
  bool baseline = false;
  std::string manifest_path;
  aug_method.add(augment);
  flag(augment, "manifest", manifest_path, "input manifest (JSONL)")->required();
  flag(augment, "seed", seed, "master seed");
  flag(augment, "workers", workers, "worker threads")->check(CLI::PositiveNumber);
  flag(augment, "out", out_dir, "output directory")->required();
  augment->add_flag("--baseline", baseline, "apply flip/rotation/color jitter before the method")
      ->envname(env_name("baseline"));

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate predicted depth against ground truth");
  std::string pred_manifest;
  std::string gt_manifest;
  bool mean_of_images = false;
  std::vector<Index> crop;
  flag(eval, "pred", pred_manifest, "prediction manifest")->required();
  flag(eval, "gt", gt_manifest, "ground-truth manifest")->required();
  flag(eval, "min-depth", min_depth, "lower ground-truth cap (m, exclusive)");
  flag(eval, "max-depth", max_depth, "upper ground-truth cap (m, exclusive)");
  eval->add_option("--crop", crop, "evaluation crop l u w h")->expected(4);
  eval->add_flag("--mean-of-images", mean_of_images,
                 "aggregate as the mean of per-image metrics instead of pooled pixels")
      ->envname(env_name("mean-of-images"));
  flag(eval, "report", report_path, "output CSV")->required();

  // region-stats
  auto* stats = app.add_subcommand("region-stats", "sample paste regions and summarize them");
  RegionStatsOptions stats_opts;
  flag(stats, "width", stats_opts.width, "image width (px)");
  flag(stats, "height", stats_opts.height, "image height (px)");
  flag(stats, "p", stats_opts.p, "region hyperparameter in (0, 1]");
  flag(stats, "n", stats_opts.n_draws, "number of regions");
  flag(stats, "seed", seed, "master seed");
  flag(stats, "report", report_path, "output CSV")->required();

  // distances
  auto* dist = app.add_subcommand("distances", "latent-space distances between feature rows");
  DistancesOptions dist_opts;
  std::string vec_a;
  std::string vec_b;
  flag(dist, "a", vec_a, "first vectors CSV")->required();
  flag(dist, "b", vec_b, "second vectors CSV")->required();
  flag(dist, "report", report_path, "output CSV")->required();

  // edge-report
  auto* edges = app.add_subcommand("edge-report", "edge preservation per augmentation method");
  EdgeReportOptions edge_opts;
  std::vector<std::string> methods{"none", "cutdepth", "cutout", "random-erasing", "cutmix"};
  MethodArgs edge_method;
  edge_method.fill = "0";
  flag(edges, "manifest", manifest_path, "input manifest (JSONL)")->required();
  edges->add_option("--methods", methods, "methods to score")->envname(env_name("methods"));
  flag(edges, "p", edge_method.p, "region hyperparameter in (0, 1]");
  flag(edges, "fill", edge_method.fill, "cutout fill: 'mean' or a constant");
  flag(edges, "threshold", edge_opts.threshold, "Sobel magnitude threshold");
  flag(edges, "seed", seed, "master seed");
  flag(edges, "report", report_path, "output CSV")->required();

  // quality
  auto* quality = app.add_subcommand("quality", "affinity and diversity per method");
  QualityOptions quality_opts;
  std::string loss_csv;
  std::string eval_csv;
  flag(quality, "losses", loss_csv, "training loss CSV (method,step,loss)")->required();
  flag(quality, "evals", eval_csv, "metric CSV (method,clean_metric,aug_metric,orientation)")->required();
  flag(quality, "window", quality_opts.diversity_window, "final losses averaged for diversity");
  flag(quality, "report", report_path, "output CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      synth_opts.seed = seed;
      synth_opts.out_dir = out_dir;
      return report("synth", cmd_synth(synth_opts));
    }
    if (augment->parsed()) {
      aug_opts.manifest = manifest_path;
      aug_opts.spec = aug_method.spec();
      if (baseline) aug_opts.baseline = BaselineSpec{};
      aug_opts.seed = seed;
      aug_opts.workers = workers;
      aug_opts.out_dir = out_dir;
      return report("augment", cmd_augment(aug_opts));
    }
    if (eval->parsed()) {
      EvalOptions opts;
      opts.pred_manifest = pred_manifest;
      opts.gt_manifest = gt_manifest;
      opts.caps = {min_depth, max_depth};
      if (!crop.empty()) opts.crop = Region{crop[0], crop[1], crop[2], crop[3]};
      opts.aggregation = mean_of_images ? Aggregation::kMeanOfImages : Aggregation::kPooledPixels;
      opts.report = report_path;
      return report("eval", cmd_eval(opts));
    }
    if (stats->parsed()) {
      stats_opts.seed = seed;
      stats_opts.report = report_path;
      return report("region-stats", cmd_region_stats(stats_opts));
    }
    if (dist->parsed()) {
      dist_opts.vectors_a = vec_a;
      dist_opts.vectors_b = vec_b;
      dist_opts.report = report_path;
      return report("distances", cmd_distances(dist_opts));
    }
    if (edges->parsed()) {
      edge_opts.manifest = manifest_path;
      edge_opts.methods.clear();
      for (const auto& m : methods) edge_opts.methods.push_back(parse_method(m));
      edge_opts.p = edge_method.p;
      edge_opts.cutout_fill = edge_method.fill_mode();
      edge_opts.seed = seed;
      edge_opts.report = report_path;
      return report("edge-report", cmd_edge_report(edge_opts));
    }
    if (quality->parsed()) {
      quality_opts.loss_csv = loss_csv;
      quality_opts.eval_csv = eval_csv;
      quality_opts.report = report_path;
      return report("quality", cmd_quality(quality_opts));
    }
  } catch (const std::exception& e) {
    CommandResult failed;
    failed.errors.push_back({"", e.what()});
    std::cerr << failed.error_summary_json(app.get_subcommands().front()->get_name()) << '\n';
    return 2;
  }
  return 0;
}
