#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cutdepth/augment.hpp"
#include "cutdepth/dataset_io.hpp"
#include "cutdepth/metrics.hpp"

namespace cutdepth::cli {

/// An item- or row-level failure that did not stop the run.
struct ItemError {
  std::string item;
  std::string message;
};

/// Outcome of a subcommand. exit_code() is 0 iff no item failed.
struct CommandResult {
  std::vector<ItemError> errors;
  std::size_t items = 0;

  int exit_code() const { return errors.empty() ? 0 : 1; }
  /// {"command": ..., "items": n, "errors": [{"item": ..., "message": ...}]}
  std::string error_summary_json(const std::string& command) const;
};

struct SynthOptions {
  std::size_t count = 10;
  SceneSpec scene;
  std::uint64_t seed = 0;
  fs::path out_dir;
  double depth_scale = kDefaultDepthScale;
};

/// Writes scene_NNNNN_rgb.png / scene_NNNNN_depth.png and manifest.jsonl.
/// Scene i uses seed mix_seed(seed, i).
CommandResult cmd_synth(const SynthOptions& options);

struct AugmentOptions {
  fs::path manifest;
  AugmentSpec spec;
  std::optional<BaselineSpec> baseline;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  fs::path out_dir;
};

/// Augments every manifest entry into out_dir with manifest.jsonl and
/// provenance.jsonl. Item i draws from RngStream(mix_seed(seed, i)) in this
/// order: partner draw (cutmix only), baseline draws (if enabled), then the
/// apply() draws. Output bytes do not depend on the worker count.
CommandResult cmd_augment(const AugmentOptions& options);

enum class Aggregation { kPooledPixels, kMeanOfImages };

struct EvalOptions {
  fs::path pred_manifest;
  fs::path gt_manifest;
  DepthCaps caps;
  std::optional<Region> crop;
  Aggregation aggregation = Aggregation::kPooledPixels;
  fs::path report;
};

/// One row per id plus a final "aggregate" row. Throws ParameterError listing
/// ids missing from either manifest.
CommandResult cmd_eval(const EvalOptions& options);

struct RegionStatsOptions {
  Index width = 544;
  Index height = 416;
  double p = 0.75;
  std::size_t n_draws = 1000;
  std::uint64_t seed = 0;
  fs::path report;
};

/// CSV: header "name,l,u,w,h", one row per draw (name = draw index), then
/// summary rows "mean", "min", "max" and "analytic_mean" with
/// E[l] = (W-1)/2, E[u] = (H-1)/2, E[w] ~ W p / 4, E[h] ~ H p / 4.
CommandResult cmd_region_stats(const RegionStatsOptions& options);

struct DistancesOptions {
  fs::path vectors_a;
  fs::path vectors_b;
  fs::path report;
};

/// Row i of each CSV is one feature vector; rows "row_<i>" plus a "mean" row
/// averaged over the rows that succeeded.
CommandResult cmd_distances(const DistancesOptions& options);

struct EdgeReportOptions {
  fs::path manifest;
  std::vector<Method> methods{Method::kNone, Method::kCutDepth, Method::kCutOut,
                              Method::kRandomErasing, Method::kCutMix};
  double p = 0.75;
  std::uint64_t seed = 0;
  double threshold = kDefaultEdgeThreshold;
  FillMode cutout_fill = ConstantFill{0.0};
  DepthNormalization depth_norm = PerImageMinMax{};
  fs::path report;
};

struct EdgeScores {
  Method method = Method::kNone;
  std::vector<double> scores;
  double mean() const;
};

/// Scores every method against the same sampled region per item.
///
/// Item i: RngStream(mix_seed(seed, i)) draws the region (a, b, c, d), then
/// the cutmix partner index among the other items; random erasing uses
/// RngStream(mix_seed(item seed, 0)). CSV header "name,method,score" with one
/// row per item and method followed by per-method "mean" rows.
std::vector<EdgeScores> edge_scores(const Manifest& manifest, const EdgeReportOptions& options,
                                    CommandResult& result);
CommandResult cmd_edge_report(const EdgeReportOptions& options);

struct QualityOptions {
  /// Header "method,step,loss"; series per method in file order.
  fs::path loss_csv;
  /// Header "method,clean_metric,aug_metric,orientation" with orientation
  /// "higher-better" or "lower-better".
  fs::path eval_csv;
  std::size_t diversity_window = kDefaultDiversityWindow;
  fs::path report;
};

/// One row per method, in eval_csv order.
CommandResult cmd_quality(const QualityOptions& options);

/// Picks partner index for item `index` among n items from one draw:
/// j = floor(draw (n - 1)), shifted past `index`. Requires n >= 2.
std::size_t pick_partner(double draw, std::size_t index, std::size_t n);

}  // namespace cutdepth::cli
