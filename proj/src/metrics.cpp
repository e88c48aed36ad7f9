#include "cutdepth/metrics.hpp"

#include <algorithm>

namespace cutdepth {

DepthEvalReport DepthErrorPool::report() const {
  if (gt_.empty()) throw EmptyEvaluationError("no valid pixels to evaluate");

  const auto n = static_cast<Index>(gt_.size());
  const Eigen::Map<const Eigen::ArrayXd> p(pred_.data(), n);
  const Eigen::Map<const Eigen::ArrayXd> g(gt_.data(), n);

  const Eigen::ArrayXd diff = p - g;
  const Eigen::ArrayXd log_diff = p.log() - g.log();
  const Eigen::ArrayXd ratio = (p / g).max(g / p);

  DepthEvalReport r;
  r.n_valid = gt_.size();
  r.abs_rel = (diff.abs() / g).mean();
  r.log10 = (p.log10() - g.log10()).abs().mean();
  r.rmse = std::sqrt(diff.square().mean());
  r.rmse_log = std::sqrt(log_diff.square().mean());
  const double denom = static_cast<double>(n);
  r.d1 = static_cast<double>((ratio < 1.25).count()) / denom;
  r.d2 = static_cast<double>((ratio < 1.25 * 1.25).count()) / denom;
  r.d3 = static_cast<double>((ratio < 1.25 * 1.25 * 1.25).count()) / denom;
  return r;
}

DepthEvalReport mean_of_reports(std::span<const DepthEvalReport> reports) {
  if (reports.empty()) throw EmptyEvaluationError("no reports to average");
  DepthEvalReport m;
  for (const auto& r : reports) {
    m.abs_rel += r.abs_rel;
    m.log10 += r.log10;
    m.rmse += r.rmse;
    m.rmse_log += r.rmse_log;
    m.d1 += r.d1;
    m.d2 += r.d2;
    m.d3 += r.d3;
    m.n_valid += r.n_valid;
  }
  const auto n = static_cast<double>(reports.size());
  m.abs_rel /= n;
  m.log10 /= n;
  m.rmse /= n;
  m.rmse_log /= n;
  m.d1 /= n;
  m.d2 /= n;
  m.d3 /= n;
  return m;
}

DistanceReport vector_distance(const Eigen::Ref<const Eigen::VectorXd>& a,
                               const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() == 0 || a.size() != b.size()) {
    throw ShapeError("distance vectors must have equal nonzero length");
  }
  const double na = a.norm();
  const double nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0)) throw DomainError("cosine similarity needs nonzero vectors");

  const Eigen::ArrayXd diff = (a - b).array();
  DistanceReport r;
  r.rmse = std::sqrt(diff.square().mean());
  r.mae = diff.abs().mean();
  r.cosine = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
  return r;
}

double diversity(std::span<const double> aug_train_losses, std::size_t k) {
  if (aug_train_losses.empty()) throw DegenerateInputError("diversity needs a nonempty loss series");
  if (k == 0) throw ParameterError("diversity window must be at least 1");
  const std::size_t n = std::min(k, aug_train_losses.size());
  const auto tail = aug_train_losses.last(n);
  double sum = 0.0;
  for (double v : tail) sum += v;
  return sum / static_cast<double>(n);
}

}  // namespace cutdepth
