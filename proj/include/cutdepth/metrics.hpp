#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cutdepth/core.hpp"

namespace cutdepth {

/// Standard monocular depth error block.
///
///   abs_rel  = mean |p - g| / g
///   log10    = mean |log10 p - log10 g|
///   rmse     = sqrt(mean (p - g)^2)            [meters]
///   rmse_log = sqrt(mean (ln p - ln g)^2)      natural log
///   dk       = fraction with max(p/g, g/p) < 1.25^k
struct DepthEvalReport {
  double abs_rel = 0.0;
  double log10 = 0.0;
  double rmse = 0.0;
  double rmse_log = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
  std::size_t n_valid = 0;
};

/// Ground-truth caps; pixels count when min_depth < gt < max_depth.
struct DepthCaps {
  double min_depth = 1e-3;
  double max_depth = 10.0;
};

/// 1 where min_depth < gt < max_depth. An optional crop further restricts
/// the mask to a rectangle (not applied by default).
template <typename Scalar>
BinaryMap valid_mask(const DepthMap<Scalar>& gt, const DepthCaps& caps = {},
                     const std::optional<Region>& crop = std::nullopt) {
  if (!(caps.min_depth >= 0.0 && caps.min_depth < caps.max_depth)) {
    throw ParameterError("depth caps require 0 <= min_depth < max_depth");
  }
  const auto& g = gt.values();
  BinaryMap mask = (g > static_cast<Scalar>(caps.min_depth)) && (g < static_cast<Scalar>(caps.max_depth));
  if (crop) {
    check_region(*crop, gt.width(), gt.height());
    BinaryMap keep = BinaryMap::Constant(mask.rows(), mask.cols(), false);
    keep.block(crop->u, crop->l, crop->h, crop->w).setConstant(true);
    mask = mask && keep;
  }
  return mask;
}

/// Accumulates valid (pred, gt) pixel pairs across any number of images and
/// evaluates them as one pool.
class DepthErrorPool {
 public:
  template <typename Scalar>
  void add(const DepthMap<Scalar>& pred, const DepthMap<Scalar>& gt, const BinaryMap& mask) {
    if (pred.width() != gt.width() || pred.height() != gt.height() ||
        mask.cols() != gt.width() || mask.rows() != gt.height()) {
      throw ShapeError("prediction, ground truth and mask must share dimensions");
    }
    for (Index y = 0; y < gt.height(); ++y) {
      for (Index x = 0; x < gt.width(); ++x) {
        if (!mask(y, x)) continue;
        const double p = static_cast<double>(pred(y, x));
        const double g = static_cast<double>(gt(y, x));
        if (!(p > 0.0) || !std::isfinite(p)) {
          throw DomainError("prediction must be positive and finite on valid pixels");
        }
        if (!(g > 0.0) || !std::isfinite(g)) {
          throw DomainError("ground truth must be positive and finite on valid pixels");
        }
        pred_.push_back(p);
        gt_.push_back(g);
      }
    }
  }

  std::size_t size() const { return gt_.size(); }

  /// Throws EmptyEvaluationError when no pixel was added.
  DepthEvalReport report() const;

 private:
  std::vector<double> pred_;
  std::vector<double> gt_;
};

template <typename Scalar>
DepthEvalReport eval_depth(const DepthMap<Scalar>& pred, const DepthMap<Scalar>& gt,
                           const BinaryMap& mask) {
  DepthErrorPool pool;
  pool.add(pred, gt, mask);
  return pool.report();
}

/// Field-wise mean of per-image reports; n_valid is the total.
DepthEvalReport mean_of_reports(std::span<const DepthEvalReport> reports);

/// Latent-space distances; cosine is the similarity a.b / (|a||b|).
struct DistanceReport {
  double rmse = 0.0;
  double mae = 0.0;
  double cosine = 0.0;
};

DistanceReport vector_distance(const Eigen::Ref<const Eigen::VectorXd>& a,
                               const Eigen::Ref<const Eigen::VectorXd>& b);

struct QualityReport {
  double affinity = 0.0;
  double diversity = 0.0;
};

enum class Orientation { kHigherBetter, kLowerBetter };

/// Metric change of a clean-trained model on augmented data, signed so that
/// larger always means a smaller harmful shift.
inline double affinity(double clean_metric, double aug_metric, Orientation orientation) {
  return orientation == Orientation::kHigherBetter ? aug_metric - clean_metric
                                                   : clean_metric - aug_metric;
}

inline constexpr std::size_t kDefaultDiversityWindow = 10;

/// Mean of the last k training losses (the whole series when shorter).
double diversity(std::span<const double> aug_train_losses,
                 std::size_t k = kDefaultDiversityWindow);

inline constexpr double kDefaultEdgeThreshold = 0.1;

/// 3x3 Sobel gradient magnitude >= threshold. Border pixels are never edges.
template <typename Derived>
BinaryMap edge_map(const Eigen::ArrayBase<Derived>& plane, double threshold) {
  if (!(threshold > 0.0)) throw ParameterError("edge threshold must be positive");
  const Index rows = plane.rows();
  const Index cols = plane.cols();
  BinaryMap edges = BinaryMap::Constant(rows, cols, false);
  if (rows < 3 || cols < 3) return edges;

  const Plane<double> p = plane.template cast<double>();
  const Index ir = rows - 2;
  const Index ic = cols - 2;
  auto at = [&](Index dy, Index dx) { return p.block(1 + dy, 1 + dx, ir, ic); };
  const Plane<double> gx = (at(-1, 1) + 2.0 * at(0, 1) + at(1, 1)) - (at(-1, -1) + 2.0 * at(0, -1) + at(1, -1));
  const Plane<double> gy = (at(1, -1) + 2.0 * at(1, 0) + at(1, 1)) - (at(-1, -1) + 2.0 * at(-1, 0) + at(-1, 1));
  edges.block(1, 1, ir, ic) = (gx.square() + gy.square()).sqrt() >= threshold;
  return edges;
}

/// IoU of the luminance edge maps of both images inside the region; 1 when
/// neither has an edge there.
template <typename Scalar>
double edge_preservation_score(const RgbImage<Scalar>& original, const RgbImage<Scalar>& augmented,
                               const Region& region, double threshold = kDefaultEdgeThreshold) {
  if (original.width() != augmented.width() || original.height() != augmented.height()) {
    throw ShapeError("edge preservation needs images of equal size");
  }
  check_region(region, original.width(), original.height());
  const BinaryMap before = edge_map(original.luminance(), threshold);
  const BinaryMap after = edge_map(augmented.luminance(), threshold);
  const auto a = before.block(region.u, region.l, region.h, region.w);
  const auto b = after.block(region.u, region.l, region.h, region.w);
  const auto uni = (a || b).count();
  if (uni == 0) return 1.0;
  return static_cast<double>((a && b).count()) / static_cast<double>(uni);
}

}  // namespace cutdepth
