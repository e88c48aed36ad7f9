#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cutdepth/core.hpp"
#include "cutdepth/rng.hpp"

namespace cutdepth {

/// RGB input paired with its depth target; both share W x H.
template <typename Scalar>
struct SamplePair {
  RgbImage<Scalar> rgb;
  DepthMap<Scalar> depth;

  SamplePair(RgbImage<Scalar> rgb_in, DepthMap<Scalar> depth_in)
      : rgb(std::move(rgb_in)), depth(std::move(depth_in)) {
    if (rgb.width() != depth.width() || rgb.height() != depth.height()) {
      std::ostringstream os;
      os << "rgb is " << rgb.width() << "x" << rgb.height() << " but depth is " << depth.width()
         << "x" << depth.height();
      throw ShapeError(os.str());
    }
  }

  Index width() const { return rgb.width(); }
  Index height() const { return rgb.height(); }

  friend bool operator==(const SamplePair& a, const SamplePair& b) {
    return a.rgb == b.rgb && a.depth == b.depth;
  }
};

enum class Method { kNone, kCutDepth, kCutOut, kRandomErasing, kCutMix };

std::string_view to_string(Method method);
/// Accepts the CLI spellings: none, cutdepth, cutout, random-erasing, cutmix.
Method parse_method(std::string_view name);

/// CutOut fill: per-channel image mean, or a constant.
struct ImageMeanFill {};
struct ConstantFill {
  double value = 0.0;
};
using FillMode = std::variant<ImageMeanFill, ConstantFill>;

struct AugmentSpec {
  Method method = Method::kCutDepth;
  /// Upper bound on the pasted extent relative to the remaining span, in (0, 1].
  double p = 0.75;
  double apply_probability = 1.0;
  FillMode fill = ImageMeanFill{};
  DepthNormalization depth_norm = PerImageMinMax{};
  /// CutMix only: also paste the partner's depth into the target.
  bool cutmix_mixes_depth = false;

  /// Throws ParameterError on p outside (0, 1] or apply_probability outside [0, 1].
  void validate() const;
};

/// Region from explicit draws a, b, c, d in [0, 1]:
///   l = floor(a W), u = floor(b H),
///   w = max(floor((W - l) c p), 1), h = max(floor((H - u) d p), 1).
inline Region region_from_draws(double a, double b, double c, double d, Index width, Index height,
                                double p) {
  if (!(p > 0.0 && p <= 1.0)) throw ParameterError("p must lie in (0, 1]");
  if (width < 1 || height < 1) throw ShapeError("image dimensions must be positive");
  Region r;
  r.l = std::min(static_cast<Index>(std::floor(a * static_cast<double>(width))), width - 1);
  r.u = std::min(static_cast<Index>(std::floor(b * static_cast<double>(height))), height - 1);
  r.w = std::max(static_cast<Index>(std::floor(static_cast<double>(width - r.l) * c * p)), Index{1});
  r.h = std::max(static_cast<Index>(std::floor(static_cast<double>(height - r.u) * d * p)), Index{1});
  return r;
}

/// Draws a, b, c, d (in that order) and builds the paste region.
inline Region sample_region(RngStream& rng, Index width, Index height, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw ParameterError("p must lie in (0, 1]");
  const double a = rng.uniform();
  const double b = rng.uniform();
  const double c = rng.uniform();
  const double d = rng.uniform();
  return region_from_draws(a, b, c, d, width, height, p);
}

/// x' = M x_rgb + (1 - M) replicate(normalize(x_depth)). The depth target is untouched.
template <typename Scalar>
RgbImage<Scalar> cut_depth(const SamplePair<Scalar>& pair, const Region& region,
                           const DepthNormalization& strategy = PerImageMinMax{}) {
  check_region(region, pair.width(), pair.height());
  const Plane<Scalar> norm = normalize_depth(pair.depth, strategy);
  RgbImage<Scalar> out = pair.rgb;
  for (int k = 0; k < 3; ++k) {
    out.channel(k).block(region.u, region.l, region.h, region.w) =
        norm.block(region.u, region.l, region.h, region.w);
  }
  return out;
}

template <typename Scalar>
RgbImage<Scalar> cut_out(const RgbImage<Scalar>& rgb, const Region& region, const FillMode& fill) {
  check_region(region, rgb.width(), rgb.height());
  RgbImage<Scalar> out = rgb;
  for (int k = 0; k < 3; ++k) {
    const Scalar v = std::holds_alternative<ConstantFill>(fill)
                         ? static_cast<Scalar>(std::get<ConstantFill>(fill).value)
                         : rgb.channel(k).mean();
    out.channel(k).block(region.u, region.l, region.h, region.w).setConstant(v);
  }
  return out;
}

/// Fills the region with independent U(0,1) draws, row-major over pixels and
/// channel-minor (r, g, b of one pixel before the next pixel).
template <typename Scalar>
RgbImage<Scalar> random_erasing(const RgbImage<Scalar>& rgb, const Region& region, RngStream& rng) {
  check_region(region, rgb.width(), rgb.height());
  RgbImage<Scalar> out = rgb;
  for (Index y = region.u; y < region.u + region.h; ++y) {
    for (Index x = region.l; x < region.l + region.w; ++x) {
      for (int k = 0; k < 3; ++k) out(y, x, k) = static_cast<Scalar>(rng.uniform());
    }
  }
  return out;
}

/// Region copied from src, everything else from dst.
template <typename Scalar>
RgbImage<Scalar> cut_mix(const RgbImage<Scalar>& dst, const RgbImage<Scalar>& src,
                         const Region& region) {
  if (dst.width() != src.width() || dst.height() != src.height()) {
    throw ShapeError("cutmix source and destination differ in size");
  }
  check_region(region, dst.width(), dst.height());
  RgbImage<Scalar> out = dst;
  for (int k = 0; k < 3; ++k) {
    out.channel(k).block(region.u, region.l, region.h, region.w) =
        src.channel(k).block(region.u, region.l, region.h, region.w);
  }
  return out;
}

/// Mirrors rgb and depth about the vertical axis.
template <typename Scalar>
SamplePair<Scalar> horizontal_flip(const SamplePair<Scalar>& pair) {
  auto flip = [](const Plane<Scalar>& p) -> Plane<Scalar> { return p.rowwise().reverse(); };
  return SamplePair<Scalar>(
      RgbImage<Scalar>(flip(pair.rgb.channel(0)), flip(pair.rgb.channel(1)), flip(pair.rgb.channel(2))),
      DepthMap<Scalar>(flip(pair.depth.values())));
}

/// Closed interval [lo, hi] with 0 < lo <= hi.
struct Interval {
  double lo = 1.0;
  double hi = 1.0;
};

struct ColorJitterRanges {
  Interval gamma{0.9, 1.1};
  Interval brightness{0.9, 1.1};
  Interval channel_gain{0.9, 1.1};
};

struct ColorParams {
  double gamma = 1.0;
  double brightness = 1.0;
  std::array<double, 3> gains{1.0, 1.0, 1.0};
};

/// Draw order: gamma, brightness, gain r, gain g, gain b.
ColorParams draw_color_params(RngStream& rng, const ColorJitterRanges& ranges);

/// clamp(rgb^gamma * brightness * gain_k, 0, 1) per channel k.
template <typename Scalar>
RgbImage<Scalar> color_transform(const RgbImage<Scalar>& rgb, const ColorParams& params) {
  RgbImage<Scalar> out = rgb;
  for (int k = 0; k < 3; ++k) {
    const auto scale = static_cast<Scalar>(params.brightness * params.gains[k]);
    auto& c = out.channel(k);
    if (params.gamma != 1.0) c = c.pow(static_cast<Scalar>(params.gamma));
    c = (c * scale).max(Scalar(0)).min(Scalar(1));
  }
  return out;
}

template <typename Scalar>
RgbImage<Scalar> color_jitter(const RgbImage<Scalar>& rgb, RngStream& rng,
                              const ColorJitterRanges& ranges = {}) {
  return color_transform(rgb, draw_color_params(rng, ranges));
}

inline constexpr double kDefaultMaxRotationDeg = 2.5;

namespace detail {

/// cos/sin with results snapped to exact 0/±1 at multiples of 90 degrees.
inline std::pair<double, double> exact_cos_sin(double angle_deg) {
  const double rad = angle_deg * std::numbers::pi / 180.0;
  double c = std::cos(rad);
  double s = std::sin(rad);
  auto snap = [](double v) {
    if (std::abs(v) < 1e-12) return 0.0;
    if (std::abs(v - 1.0) < 1e-12) return 1.0;
    if (std::abs(v + 1.0) < 1e-12) return -1.0;
    return v;
  };
  return {snap(c), snap(s)};
}

}  // namespace detail

/// Rotates rgb and depth by the same angle (degrees, counter-clockwise on
/// screen) about the image center ((W-1)/2, (H-1)/2).
///
/// Output pixels are inverse-mapped into the input. Depth uses nearest
/// neighbor so only input values (or 0) appear; rgb uses bilinear
/// interpolation. Pixels whose source falls outside the input are 0 in both.
template <typename Scalar>
SamplePair<Scalar> rotate_pair(const SamplePair<Scalar>& pair, double angle_deg,
                               double max_angle_deg = kDefaultMaxRotationDeg) {
  if (!(std::abs(angle_deg) <= max_angle_deg)) {
    throw ParameterError("rotation angle exceeds the configured maximum");
  }
  const Index width = pair.width();
  const Index height = pair.height();
  const auto [cs, sn] = detail::exact_cos_sin(angle_deg);
  const double cx = 0.5 * static_cast<double>(width - 1);
  const double cy = 0.5 * static_cast<double>(height - 1);
  constexpr double kEps = 1e-9;

  RgbImage<Scalar> rgb(width, height);
  DepthMap<Scalar> depth(width, height);
  for (Index y = 0; y < height; ++y) {
    for (Index x = 0; x < width; ++x) {
      // Inverse map; y points down in image coordinates.
      const double dx = static_cast<double>(x) - cx;
      const double dy = static_cast<double>(y) - cy;
      const double sx = cs * dx - sn * dy + cx;
      const double sy = sn * dx + cs * dy + cy;
      if (sx < -kEps || sy < -kEps || sx > static_cast<double>(width - 1) + kEps ||
          sy > static_cast<double>(height - 1) + kEps) {
        continue;
      }
      const double px = std::clamp(sx, 0.0, static_cast<double>(width - 1));
      const double py = std::clamp(sy, 0.0, static_cast<double>(height - 1));

      const auto nx = static_cast<Index>(std::floor(px + 0.5));
      const auto ny = static_cast<Index>(std::floor(py + 0.5));
      depth(y, x) = pair.depth(std::min(ny, height - 1), std::min(nx, width - 1));

      const auto x0 = static_cast<Index>(std::floor(px));
      const auto y0 = static_cast<Index>(std::floor(py));
      const Index x1 = std::min(x0 + 1, width - 1);
      const Index y1 = std::min(y0 + 1, height - 1);
      const auto fx = static_cast<Scalar>(px - static_cast<double>(x0));
      const auto fy = static_cast<Scalar>(py - static_cast<double>(y0));
      for (int k = 0; k < 3; ++k) {
        const auto& c = pair.rgb.channel(k);
        const Scalar top = c(y0, x0) + fx * (c(y0, x1) - c(y0, x0));
        const Scalar bottom = c(y1, x0) + fx * (c(y1, x1) - c(y1, x0));
        rgb(y, x, k) = std::clamp(top + fy * (bottom - top), Scalar(0), Scalar(1));
      }
    }
  }
  return SamplePair<Scalar>(std::move(rgb), std::move(depth));
}

/// Flip, rotation and color jitter used as the always-on training baseline.
struct BaselineSpec {
  double flip_probability = 0.5;
  double max_rotation_deg = kDefaultMaxRotationDeg;
  bool color = true;
  ColorJitterRanges color_ranges;
};

/// Draw order: flip gate, rotation angle, then the color draws.
template <typename Scalar>
SamplePair<Scalar> apply_baseline(const SamplePair<Scalar>& pair, const BaselineSpec& spec,
                                  RngStream& rng) {
  SamplePair<Scalar> out = pair;
  if (rng.uniform() < spec.flip_probability) out = horizontal_flip(out);
  const double angle = rng.uniform(-spec.max_rotation_deg, spec.max_rotation_deg);
  if (spec.max_rotation_deg > 0.0 && angle != 0.0) {
    out = rotate_pair(out, angle, spec.max_rotation_deg);
  }
  if (spec.color) out.rgb = color_jitter(out.rgb, rng, spec.color_ranges);
  return out;
}

/// What apply() did to one item, sufficient to replay it.
struct ProvenanceRecord {
  Method method = Method::kNone;
  bool applied = false;
  std::optional<Region> region;
  /// Scalar draws in consumption order: the gate draw, then a, b, c, d.
  std::vector<double> draws;
  /// Per-pixel draws consumed after the region (random erasing only).
  std::uint64_t fill_draws = 0;
};

template <typename Scalar>
struct AugmentResult {
  SamplePair<Scalar> pair;
  ProvenanceRecord record;
};

/// One gate draw u decides whether to augment (u < apply_probability). When it
/// does, the region is sampled and `spec.method` runs. CutMix needs a
/// partner pair of the same size.
template <typename Scalar>
AugmentResult<Scalar> apply(const SamplePair<Scalar>& pair, const AugmentSpec& spec,
                            RngStream& rng, const SamplePair<Scalar>* partner = nullptr) {
  spec.validate();
  ProvenanceRecord record;
  record.method = spec.method;

  const double gate = rng.uniform();
  record.draws.push_back(gate);
  if (spec.method == Method::kNone || !(gate < spec.apply_probability)) {
    return {pair, record};
  }
  if (spec.method == Method::kCutMix) {
    if (partner == nullptr) throw ParameterError("cutmix requires a partner sample");
    if (partner->width() != pair.width() || partner->height() != pair.height()) {
      throw ShapeError("cutmix partner differs in size");
    }
  }

  // Same draw order as sample_region().
  std::array<double, 4> abcd{};
  for (double& v : abcd) {
    v = rng.uniform();
    record.draws.push_back(v);
  }
  const Region region =
      region_from_draws(abcd[0], abcd[1], abcd[2], abcd[3], pair.width(), pair.height(), spec.p);
  record.applied = true;
  record.region = region;

  SamplePair<Scalar> out = pair;
  switch (spec.method) {
    case Method::kCutDepth:
      out.rgb = cut_depth(pair, region, spec.depth_norm);
      break;
    case Method::kCutOut:
      out.rgb = cut_out(pair.rgb, region, spec.fill);
      break;
    case Method::kRandomErasing: {
      const std::uint64_t start = rng.draws();
      out.rgb = random_erasing(pair.rgb, region, rng);
      record.fill_draws = rng.draws() - start;
      break;
    }
    case Method::kCutMix:
      out.rgb = cut_mix(pair.rgb, partner->rgb, region);
      if (spec.cutmix_mixes_depth) {
        out.depth.values().block(region.u, region.l, region.h, region.w) =
            partner->depth.values().block(region.u, region.l, region.h, region.w);
      }
      break;
    case Method::kNone:
      break;
  }
  return {std::move(out), std::move(record)};
}

}  // namespace cutdepth
