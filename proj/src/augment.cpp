#include "cutdepth/augment.hpp"

#include <string>

namespace cutdepth {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kNone:
      return "none";
    case Method::kCutDepth:
      return "cutdepth";
    case Method::kCutOut:
      return "cutout";
    case Method::kRandomErasing:
      return "random-erasing";
    case Method::kCutMix:
      return "cutmix";
  }
  return "none";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::kNone, Method::kCutDepth, Method::kCutOut, Method::kRandomErasing,
                   Method::kCutMix}) {
    if (to_string(m) == name) return m;
  }
  throw ParameterError("unknown augmentation method '" + std::string(name) + "'");
}

void AugmentSpec::validate() const {
  if (!(p > 0.0 && p <= 1.0)) throw ParameterError("p must lie in (0, 1]");
  if (!(apply_probability >= 0.0 && apply_probability <= 1.0)) {
    throw ParameterError("apply probability must lie in [0, 1]");
  }
  if (const auto* c = std::get_if<ConstantFill>(&fill); c && !(c->value >= 0.0 && c->value <= 1.0)) {
    throw ParameterError("constant fill value must lie in [0, 1]");
  }
  if (const auto* r = std::get_if<FixedRange>(&depth_norm); r && !(r->lo < r->hi)) {
    throw ParameterError("fixed-range depth normalization requires lo < hi");
  }
}

ColorParams draw_color_params(RngStream& rng, const ColorJitterRanges& ranges) {
  for (const Interval* iv : {&ranges.gamma, &ranges.brightness, &ranges.channel_gain}) {
    if (!(iv->lo > 0.0 && iv->lo <= iv->hi)) {
      throw ParameterError("color jitter ranges must be positive intervals");
    }
  }
  ColorParams params;
  params.gamma = rng.uniform(ranges.gamma.lo, ranges.gamma.hi);
  params.brightness = rng.uniform(ranges.brightness.lo, ranges.brightness.hi);
  for (double& g : params.gains) g = rng.uniform(ranges.channel_gain.lo, ranges.channel_gain.hi);
  return params;
}

}  // namespace cutdepth
