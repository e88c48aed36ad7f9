#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <variant>

#include "cutdepth/errors.hpp"

namespace cutdepth {

using Eigen::Index;

/// Single-channel image stored row-major: plane(y, x), rows = height.
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-pixel boolean map (valid-pixel masks, edge maps).
using BinaryMap = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Axis-aligned rectangle: column origin l, row origin u, width w, height h.
struct Region {
  Index l = 0;
  Index u = 0;
  Index w = 1;
  Index h = 1;

  bool fits(Index width, Index height) const {
    return w >= 1 && h >= 1 && l >= 0 && u >= 0 && l + w <= width && u + h <= height;
  }
  bool contains(Index x, Index y) const {
    return x >= l && x < l + w && y >= u && y < u + h;
  }
  Index area() const { return w * h; }

  friend bool operator==(const Region&, const Region&) = default;
};

inline std::string to_string(const Region& r) {
  std::ostringstream os;
  os << "(l=" << r.l << ", u=" << r.u << ", w=" << r.w << ", h=" << r.h << ")";
  return os.str();
}

inline void check_region(const Region& region, Index width, Index height) {
  if (!region.fits(width, height)) {
    std::ostringstream os;
    os << "region " << to_string(region) << " does not fit a " << width << "x" << height
       << " image";
    throw BoundsError(os.str());
  }
}

/// Binary paste mask M: 0 inside the region, 1 elsewhere.
///
/// Stored as the region plus image dimensions; dense() materializes the matrix.
class RegionMask {
 public:
  RegionMask(const Region& region, Index width, Index height)
      : region_(region), width_(width), height_(height) {
    check_region(region, width, height);
  }

  const Region& region() const { return region_; }
  Index width() const { return width_; }
  Index height() const { return height_; }

  int operator()(Index y, Index x) const { return region_.contains(x, y) ? 0 : 1; }

  Index zero_count() const { return region_.area(); }

  template <typename Scalar = double>
  Plane<Scalar> dense() const {
    Plane<Scalar> m = Plane<Scalar>::Ones(height_, width_);
    m.block(region_.u, region_.l, region_.h, region_.w).setZero();
    return m;
  }

 private:
  Region region_;
  Index width_;
  Index height_;
};

inline RegionMask mask_from_region(const Region& region, Index width, Index height) {
  return RegionMask(region, width, height);
}

namespace detail {
inline void check_dims(Index width, Index height) {
  if (width < 1 || height < 1) {
    std::ostringstream os;
    os << "image dimensions must be positive, got " << width << "x" << height;
    throw ShapeError(os.str());
  }
}
}  // namespace detail

/// W x H x 3 image with values in [0, 1].
template <typename Scalar>
class RgbImage {
 public:
  using PlaneType = Plane<Scalar>;

  RgbImage(Index width, Index height) {
    detail::check_dims(width, height);
    for (auto& c : channels_) c = PlaneType::Zero(height, width);
  }

  RgbImage(PlaneType r, PlaneType g, PlaneType b)
      : channels_{std::move(r), std::move(g), std::move(b)} {
    detail::check_dims(channels_[0].cols(), channels_[0].rows());
    for (const auto& c : channels_) {
      if (c.rows() != channels_[0].rows() || c.cols() != channels_[0].cols()) {
        throw ShapeError("rgb channel planes differ in size");
      }
    }
  }

  Index width() const { return channels_[0].cols(); }
  Index height() const { return channels_[0].rows(); }

  PlaneType& channel(int k) { return channels_[k]; }
  const PlaneType& channel(int k) const { return channels_[k]; }

  Scalar& operator()(Index y, Index x, int k) { return channels_[k](y, x); }
  Scalar operator()(Index y, Index x, int k) const { return channels_[k](y, x); }

  /// (r + g + b) / 3.
  PlaneType luminance() const { return (channels_[0] + channels_[1] + channels_[2]) / Scalar(3); }

  bool in_unit_range() const {
    for (const auto& c : channels_) {
      if (!c.isFinite().all() || (c < Scalar(0)).any() || (c > Scalar(1)).any()) return false;
    }
    return true;
  }

  friend bool operator==(const RgbImage& a, const RgbImage& b) {
    if (a.width() != b.width() || a.height() != b.height()) return false;
    for (int k = 0; k < 3; ++k) {
      if ((a.channels_[k] != b.channels_[k]).any()) return false;
    }
    return true;
  }

 private:
  std::array<PlaneType, 3> channels_;
};

/// W x H metric depth in meters; 0 marks an invalid pixel.
template <typename Scalar>
class DepthMap {
 public:
  using PlaneType = Plane<Scalar>;

  DepthMap(Index width, Index height) {
    detail::check_dims(width, height);
    values_ = PlaneType::Zero(height, width);
  }

  explicit DepthMap(PlaneType values) : values_(std::move(values)) {
    detail::check_dims(values_.cols(), values_.rows());
  }

  Index width() const { return values_.cols(); }
  Index height() const { return values_.rows(); }

  PlaneType& values() { return values_; }
  const PlaneType& values() const { return values_; }

  Scalar& operator()(Index y, Index x) { return values_(y, x); }
  Scalar operator()(Index y, Index x) const { return values_(y, x); }

  bool is_valid() const { return values_.isFinite().all() && (values_ >= Scalar(0)).all(); }

  friend bool operator==(const DepthMap& a, const DepthMap& b) {
    return a.width() == b.width() && a.height() == b.height() && (a.values_ == b.values_).all();
  }

 private:
  PlaneType values_;
};

/// Maps the valid depth range of each image onto [0, 1].
struct PerImageMinMax {
  friend bool operator==(const PerImageMinMax&, const PerImageMinMax&) = default;
};

/// Maps [lo, hi] meters onto [0, 1], clamping outside.
struct FixedRange {
  double lo = 0.0;
  double hi = 10.0;
  friend bool operator==(const FixedRange&, const FixedRange&) = default;
};

using DepthNormalization = std::variant<PerImageMinMax, FixedRange>;

/// Depth to [0, 1]. Invalid (0) pixels map to 0 under either strategy.
///
/// PerImageMinMax: (d - min) / (max - min) over pixels with d > 0. A constant
/// image (max == min) maps every pixel to 0. Throws DegenerateInputError when
/// there is no valid pixel.
/// FixedRange: clamp((d - lo) / (hi - lo), 0, 1); requires lo < hi.
template <typename Scalar>
Plane<Scalar> normalize_depth(const DepthMap<Scalar>& depth, const DepthNormalization& strategy) {
  const auto& d = depth.values();
  const auto valid = d > Scalar(0);

  Scalar lo;
  Scalar span;
  bool clamp = false;
  if (std::holds_alternative<FixedRange>(strategy)) {
    const auto& range = std::get<FixedRange>(strategy);
    if (!(range.lo < range.hi) || !std::isfinite(range.lo) || !std::isfinite(range.hi)) {
      throw ParameterError("fixed-range depth normalization requires lo < hi");
    }
    lo = static_cast<Scalar>(range.lo);
    span = static_cast<Scalar>(range.hi - range.lo);
    clamp = true;
  } else {
    if (!valid.any()) {
      throw DegenerateInputError("per-image min/max normalization needs at least one valid pixel");
    }
    const Scalar inf = std::numeric_limits<Scalar>::infinity();
    lo = valid.select(d, inf).minCoeff();
    const Scalar hi = valid.select(d, -inf).maxCoeff();
    span = hi - lo;
    if (span <= Scalar(0)) return Plane<Scalar>::Zero(d.rows(), d.cols());
  }

  Plane<Scalar> out = (d - lo) / span;
  if (clamp) out = out.max(Scalar(0)).min(Scalar(1));
  return valid.select(out, Scalar(0));
}

/// Copies a single plane into all three channels.
template <typename Derived>
RgbImage<typename Derived::Scalar> replicate_channels(const Eigen::ArrayBase<Derived>& plane) {
  using Scalar = typename Derived::Scalar;
  Plane<Scalar> p = plane;
  return RgbImage<Scalar>(p, p, p);
}

}  // namespace cutdepth
