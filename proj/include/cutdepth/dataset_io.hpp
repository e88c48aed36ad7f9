#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cutdepth/augment.hpp"
#include "cutdepth/core.hpp"
#include "cutdepth/metrics.hpp"

namespace cutdepth {

namespace fs = std::filesystem;

using RgbImaged = RgbImage<double>;
using DepthMapd = DepthMap<double>;
using SamplePaird = SamplePair<double>;

enum class IoErrorKind {
  kMissingFile,
  kBadFormat,
  kDimensionMismatch,
  kWriteFailed,
  kParse,
};

std::string_view to_string(IoErrorKind kind);

class IoError : public Error {
 public:
  IoError(IoErrorKind kind, const fs::path& path, const std::string& what)
      : Error(std::string(to_string(kind)) + ": " + path.string() + ": " + what),
        kind_(kind),
        path_(path) {}

  IoErrorKind kind() const { return kind_; }
  const fs::path& path() const { return path_; }

 private:
  IoErrorKind kind_;
  fs::path path_;
};

inline constexpr double kDefaultDepthScale = 1000.0;

struct ManifestEntry {
  std::string id;
  /// May be empty for prediction-only manifests.
  fs::path rgb_path;
  fs::path depth_path;
};

/// JSON Lines; one object per entry:
///   {"id": "...", "rgb": "...", "depth": "...", "depth_scale": 1000.0}
/// Relative paths resolve against the manifest's directory. Every line carries
/// the same depth_scale (raw 16-bit value / depth_scale = meters).
struct Manifest {
  std::vector<ManifestEntry> entries;
  double depth_scale = kDefaultDepthScale;

  /// Throws ParameterError on duplicate ids or a non-positive depth_scale.
  void validate() const;
};

/// Reads a manifest; entry paths come back resolved against its directory.
Manifest read_manifest(const fs::path& path);
/// Writes entries verbatim (relative paths stay relative). Deterministic bytes.
void write_manifest(const Manifest& manifest, const fs::path& path);

// PNG codecs. 8-bit RGB for images, 16-bit grayscale for depth.
RgbImaged read_rgb_png(const fs::path& path);
DepthMapd read_depth_png(const fs::path& path, double depth_scale);
void write_rgb_png(const RgbImaged& rgb, const fs::path& path);
void write_depth_png(const DepthMapd& depth, const fs::path& path, double depth_scale);

/// [0,1] -> byte: floor(v * 255 + 0.5).
std::uint8_t quantize_unit(double v);
/// meters -> raw: floor(m * depth_scale + 0.5), clamped to [0, 65535].
std::uint16_t quantize_depth(double meters, double depth_scale);

DepthMapd load_depth(const fs::path& path, double depth_scale);
SamplePaird load_pair(const ManifestEntry& entry, double depth_scale);
void save_pair(const SamplePaird& pair, const fs::path& rgb_path, const fs::path& depth_path,
               double depth_scale);

/// Synthetic desk-scale RGB-D scene.
struct SceneSpec {
  Index width = 64;
  Index height = 48;
  int n_boxes = 4;
  double depth_lo = 1.0;
  double depth_hi = 10.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Boxes at random depths over a background plane at depth_hi.
///
/// Luminance (r+g+b)/3 = 0.8 - 0.6 (d - depth_lo) / (depth_hi - depth_lo), a
/// strictly decreasing function of depth. Each surface (background and boxes)
/// adds a flat zero-sum color tint, so albedo changes hue but never
/// luminance: every depth discontinuity is a luminance edge of 0.6x the
/// fixed-range normalized depth step.
///
/// Draw order: background tint (2 draws), then per box: l, u, w, h, depth,
/// tint (2 draws). Box extents are 1/8 to 1/2 of each image dimension and
/// box depths lie in [depth_lo, depth_lo + 0.9 (depth_hi - depth_lo)).
/// Nearer boxes occlude farther ones.
SamplePaird generate_scene(const SceneSpec& spec);

/// Five-anchor blue -> red colormap over [lo, hi]:
///   t = 0 blue (0,0,1), 0.25 cyan (0,1,1), 0.5 green (0,1,0),
///   0.75 yellow (1,1,0), 1 red (1,0,0); linear between anchors.
/// Depth is clamped to [lo, hi]; invalid (0) pixels are black.
RgbImaged depth_heatmap(const DepthMapd& depth, double lo, double hi);

template <typename Report>
struct NamedReport {
  std::string name;
  Report report;
};

// CSV reports with fixed 6-decimal formatting. Headers:
//   depth:    name,abs_rel,log10,rmse,rmse_log,d1,d2,d3,n_valid
//   distance: name,rmse,mae,cosine
//   quality:  name,affinity,diversity
std::string format_report(std::span<const NamedReport<DepthEvalReport>> reports);
std::string format_report(std::span<const NamedReport<DistanceReport>> reports);
std::string format_report(std::span<const NamedReport<QualityReport>> reports);

template <typename Report>
void write_report(std::span<const NamedReport<Report>> reports, const fs::path& path);

/// Writes text to path, throwing IoError(kWriteFailed) with the path on failure.
void write_text(const fs::path& path, std::string_view text);

/// One JSON object, no trailing newline:
///   {"id":..,"index":..,"seed":..,"method":..,"applied":..,"region":{l,u,w,h}|null,
///    "draws":[..],"fill_draws":..,"partner":..|null}
struct ItemProvenance {
  std::string id;
  std::size_t index = 0;
  std::uint64_t seed = 0;
  ProvenanceRecord record;
  std::optional<std::string> partner;
  std::optional<double> partner_draw;
};
std::string provenance_json(const ItemProvenance& item);

}  // namespace cutdepth
