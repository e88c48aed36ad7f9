// Acceptance runner. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cutdepth/commands.hpp"

using namespace cutdepth;

namespace {

// Regression bound for criterion 5, frozen from the first validated run.
constexpr double kEdgeMarginCutMix = 0.0;
constexpr double kEdgeMarginCutOut = 0.11;

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

RgbImaged random_rgb(RngStream& rng, Index w, Index h) {
  RgbImaged img(w, h);
  for (int k = 0; k < 3; ++k) {
    for (Index i = 0; i < w * h; ++i) img.channel(k).data()[i] = rng.uniform();
  }
  return img;
}

DepthMapd random_depth(RngStream& rng, Index w, Index h, double lo, double hi) {
  DepthMapd d(w, h);
  for (Index i = 0; i < w * h; ++i) d.values().data()[i] = rng.uniform(lo, hi);
  return d;
}

bool rel_close(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max(std::fabs(b), 1e-300) || a == b;
}

Outcome criterion1() {
  Outcome o;
  RngStream rng(101);
  {
    const SamplePaird pair(random_rgb(rng, 17, 11), random_depth(rng, 17, 11, 0.5, 9.0));
    const auto out = cut_depth(pair, Region{0, 0, 17, 11});
    o.require(out == replicate_channels(normalize_depth(pair.depth, PerImageMinMax{})),
              "full-region output differs from replicated normalized depth");

    AugmentSpec spec;
    spec.apply_probability = 0.0;
    const auto skipped = apply(pair, spec, rng);
    o.require(!skipped.record.applied && skipped.pair == pair, "apply_probability 0 changed the input");
  }
  for (int t = 0; t < 10000 && o.ok; ++t) {
    const Index w = 1 + static_cast<Index>(rng.uniform() * 24);
    const Index h = 1 + static_cast<Index>(rng.uniform() * 24);
    const SamplePaird pair(random_rgb(rng, w, h), random_depth(rng, w, h, 0.5, 9.0));
    const Region r = sample_region(rng, w, h, 0.25 + 0.75 * rng.uniform());
    const auto out = cut_depth(pair, r);
    const Plane<double> norm = normalize_depth(pair.depth, PerImageMinMax{});
    for (Index y = 0; y < h; ++y) {
      for (Index x = 0; x < w; ++x) {
        for (int k = 0; k < 3; ++k) {
          const double expect = r.contains(x, y) ? norm(y, x) : pair.rgb(y, x, k);
          if (out(y, x, k) != expect) {
            o.require(false, "locality violated in " + to_string(r));
          }
        }
      }
    }
  }
  return o;
}

Outcome criterion2() {
  Outcome o;
  const Index W = 544, H = 416;
  for (double p : {0.25, 0.5, 0.75, 1.0}) {
    RngStream rng(mix_seed(202, static_cast<std::uint64_t>(p * 100)));
    double sum_w = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const Region r = sample_region(rng, W, H, p);
      if (!r.fits(W, H) || r.w < 1 || r.h < 1) {
        o.require(false, "illegal region " + to_string(r));
        return o;
      }
      sum_w += static_cast<double>(r.w);
    }
    const double mean = sum_w / n;
    const double expect = W * p / 4.0;
    std::ostringstream os;
    os << "p=" << p << " mean w " << mean << " vs " << expect;
    o.require(std::fabs(mean - expect) <= 0.02 * expect, os.str());
  }
  return o;
}

struct ScalarMetrics {
  double abs_rel = 0, log10 = 0, rmse = 0, rmse_log = 0, d1 = 0, d2 = 0, d3 = 0;
  std::size_t n = 0;
};

ScalarMetrics scalar_oracle(const DepthMapd& pred, const DepthMapd& gt) {
  ScalarMetrics m;
  double sq = 0, sq_log = 0;
  for (Index y = 0; y < gt.height(); ++y) {
    for (Index x = 0; x < gt.width(); ++x) {
      const double g = gt(y, x);
      const double p = pred(y, x);
      if (!(g > 1e-3 && g < 10.0)) continue;
      m.abs_rel += std::fabs(p - g) / g;
      m.log10 += std::fabs(std::log10(p) - std::log10(g));
      sq += (p - g) * (p - g);
      sq_log += (std::log(p) - std::log(g)) * (std::log(p) - std::log(g));
      const double ratio = std::max(p / g, g / p);
      m.d1 += ratio < 1.25;
      m.d2 += ratio < 1.25 * 1.25;
      m.d3 += ratio < 1.25 * 1.25 * 1.25;
      ++m.n;
    }
  }
  const double n = static_cast<double>(m.n);
  m.abs_rel /= n;
  m.log10 /= n;
  m.rmse = std::sqrt(sq / n);
  m.rmse_log = std::sqrt(sq_log / n);
  m.d1 /= n;
  m.d2 /= n;
  m.d3 /= n;
  return m;
}

Outcome criterion3() {
  Outcome o;
  RngStream rng(303);
  int checked = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto gt = random_depth(rng, 8, 8, 0.2, 12.0);
    const auto pred = random_depth(rng, 8, 8, 0.3, 11.0);
    const BinaryMap mask = valid_mask(gt);
    if (!mask.any()) continue;
    ++checked;
    const auto r = eval_depth(pred, gt, mask);
    const auto s = scalar_oracle(pred, gt);
    o.require(rel_close(r.abs_rel, s.abs_rel, 1e-12) && rel_close(r.log10, s.log10, 1e-12) &&
                  rel_close(r.rmse, s.rmse, 1e-12) && rel_close(r.rmse_log, s.rmse_log, 1e-12) &&
                  r.d1 == s.d1 && r.d2 == s.d2 && r.d3 == s.d3 && r.n_valid == s.n,
              "instance " + std::to_string(t) + " disagrees with the scalar oracle");
  }
  o.require(checked > 900, "too few instances with valid pixels");

  const DepthMapd pred(Plane<double>::Constant(1, 1, 2.0));
  const DepthMapd gt(Plane<double>::Constant(1, 1, 1.0));
  const auto r = eval_depth(pred, gt, BinaryMap::Constant(1, 1, true));
  o.require(r.abs_rel == 1.0 && r.rmse == 1.0 && std::fabs(r.log10 - 0.30103) < 5e-6 &&
                std::fabs(r.rmse_log - 0.69315) < 5e-6 && r.d1 == 0 && r.d2 == 0 && r.d3 == 0,
            "single-pixel values differ");
  return o;
}

Outcome criterion4() {
  Outcome o;
  RngStream rng(404);
  for (int t = 0; t < 1000 && o.ok; ++t) {
    const auto gt = random_depth(rng, 8, 8, 0.5, 5.0);
    const auto pred = random_depth(rng, 8, 8, 0.5, 5.0);
    const BinaryMap mask = BinaryMap::Constant(8, 8, true);
    const auto base = eval_depth(pred, gt, mask);
    o.require(base.d1 <= base.d2 && base.d2 <= base.d3, "threshold accuracies not monotone");

    const auto same = eval_depth(gt, gt, mask);
    o.require(same.abs_rel == 0 && same.log10 == 0 && same.rmse == 0 && same.rmse_log == 0 &&
                  same.d1 == 1 && same.d2 == 1 && same.d3 == 1,
              "identity case not exact");

    for (double c : {0.5, 2.0, 10.0}) {
      const DepthMapd sp(Plane<double>(pred.values() * c));
      const DepthMapd sg(Plane<double>(gt.values() * c));
      const auto s = eval_depth(sp, sg, mask);
      o.require(rel_close(s.abs_rel, base.abs_rel, 1e-12) && rel_close(s.log10, base.log10, 1e-12) &&
                    rel_close(s.rmse_log, base.rmse_log, 1e-12) &&
                    rel_close(s.rmse, c * base.rmse, 1e-12) && s.d1 == base.d1 && s.d2 == base.d2 &&
                    s.d3 == base.d3,
                "scale property fails for c=" + std::to_string(c));
    }
  }
  return o;
}

Outcome criterion5(double& cutdepth_mean, double& cutmix_mean, double& cutout_mean) {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "cutdepth_acceptance_edges";
  fs::remove_all(dir);
  cli::SynthOptions synth;
  synth.count = 100;
  synth.seed = 505;
  synth.out_dir = dir;
  cli::cmd_synth(synth);

  cli::EdgeReportOptions opts;
  opts.manifest = dir / "manifest.jsonl";
  opts.methods = {Method::kCutDepth, Method::kCutMix, Method::kCutOut};
  opts.seed = 505;
  cli::CommandResult result;
  const auto scores = cli::edge_scores(read_manifest(opts.manifest), opts, result);
  fs::remove_all(dir);
  o.require(result.errors.empty(), "edge scoring reported item errors");

  std::map<Method, double> mean;
  for (const auto& s : scores) mean[s.method] = s.mean();
  cutdepth_mean = mean[Method::kCutDepth];
  cutmix_mean = mean[Method::kCutMix];
  cutout_mean = mean[Method::kCutOut];
  o.require(cutdepth_mean - cutmix_mean > kEdgeMarginCutMix, "cutdepth does not beat cutmix by the frozen margin");
  o.require(cutdepth_mean - cutout_mean > kEdgeMarginCutOut, "cutdepth does not beat cutout by the frozen margin");
  return o;
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), dir).string()] = ss.str();
  }
  return out;
}

Outcome criterion6() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "cutdepth_acceptance_determinism";
  fs::remove_all(dir);
  cli::SynthOptions synth;
  synth.count = 50;
  synth.seed = 606;
  synth.out_dir = dir / "in";
  cli::cmd_synth(synth);

  std::map<std::string, std::string> reference;
  int run = 0;
  for (int repeat = 0; repeat < 2; ++repeat) {
    for (unsigned workers : {1u, 4u, 8u}) {
      cli::AugmentOptions opts;
      opts.manifest = dir / "in" / "manifest.jsonl";
      opts.seed = 606;
      opts.workers = workers;
      opts.spec.apply_probability = 0.8;
      opts.baseline = BaselineSpec{};
      opts.out_dir = dir / ("out" + std::to_string(run++));
      const auto result = cli::cmd_augment(opts);
      o.require(result.errors.empty(), "augment reported item errors");
      const auto tree = read_tree(opts.out_dir);
      o.require(tree.size() == 2 * 50 + 2, "unexpected output file count");
      if (reference.empty()) {
        reference = tree;
      } else {
        o.require(tree == reference, "tree differs for workers=" + std::to_string(workers) +
                                         " run " + std::to_string(repeat + 1));
      }
    }
  }
  fs::remove_all(dir);
  return o;
}

Outcome criterion7() {
  Outcome o;
  Eigen::VectorXd a(2), b(2);
  a << 1, 0;
  b << 0, 1;
  const auto r = vector_distance(a, b);
  o.require(std::fabs(r.rmse - 1) <= 1e-12 && std::fabs(r.mae - 1) <= 1e-12 && std::fabs(r.cosine) <= 1e-12,
            "(1,0) vs (0,1) hand case");
  const auto s = vector_distance(a, a);
  o.require(std::fabs(s.rmse) <= 1e-12 && std::fabs(s.mae) <= 1e-12 && std::fabs(s.cosine - 1) <= 1e-12,
            "a vs a hand case");

  RngStream rng(707);
  for (int t = 0; t < 10000; ++t) {
    const Index n = 1 + static_cast<Index>(rng.uniform() * 64);
    Eigen::VectorXd x(n), y(n);
    for (Index i = 0; i < n; ++i) {
      x(i) = rng.uniform(-5.0, 5.0);
      y(i) = rng.uniform(-5.0, 5.0);
    }
    const auto d = vector_distance(x, y);
    if (d.rmse < d.mae * (1 - 1e-12)) {
      o.require(false, "rmse < mae on pair " + std::to_string(t));
      break;
    }
  }
  return o;
}

Outcome criterion8() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "cutdepth_acceptance_io";
  fs::remove_all(dir);
  fs::create_directories(dir);
  RngStream rng(808);
  const double scale = kDefaultDepthScale;
  double worst_rgb = 0, worst_depth = 0;
  for (int t = 0; t < 100; ++t) {
    const Index w = 1 + static_cast<Index>(rng.uniform() * 40);
    const Index h = 1 + static_cast<Index>(rng.uniform() * 40);
    const SamplePaird pair(random_rgb(rng, w, h), random_depth(rng, w, h, 0.0, 60.0));
    ManifestEntry entry{"p" + std::to_string(t), dir / "rgb.png", dir / "depth.png"};
    save_pair(pair, entry.rgb_path, entry.depth_path, scale);
    const auto back = load_pair(entry, scale);
    for (int k = 0; k < 3; ++k) {
      worst_rgb = std::max(worst_rgb, (back.rgb.channel(k) - pair.rgb.channel(k)).abs().maxCoeff());
    }
    worst_depth = std::max(worst_depth, (back.depth.values() - pair.depth.values()).abs().maxCoeff());
  }
  fs::remove_all(dir);
  o.require(worst_rgb <= 1.0 / 510.0 + 1e-12, "rgb error " + std::to_string(worst_rgb));
  o.require(worst_depth <= 0.5 / scale + 1e-12, "depth error " + std::to_string(worst_depth));
  return o;
}

}  // namespace

int main() {
  using Clock = std::chrono::steady_clock;
  int failures = 0;
  auto run = [&](int id, const char* name, double budget_s, const std::function<Outcome()>& fn) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (budget_s > 0 && secs > budget_s) {
      o.require(false, "exceeded time budget of " + std::to_string(budget_s) + " s");
    }
    failures += !o.ok;
    std::printf("%s criterion %d: %s (%.2f s)%s%s\n", o.ok ? "PASS" : "FAIL", id, name, secs,
                o.detail.empty() ? "" : " - ", o.detail.c_str());
  };

  double cd = 0, cm = 0, co = 0;
  run(1, "cutdepth output equals the masked blend", 10, criterion1);
  run(2, "region sampler legality and mean width", 5, criterion2);
  run(3, "depth metrics match a scalar oracle", 5, criterion3);
  run(4, "depth metric invariants", 0, criterion4);
  run(5, "edge preservation ordering", 60, [&] { return criterion5(cd, cm, co); });
  std::printf("  edge means: cutdepth %.6f cutmix %.6f cutout %.6f\n", cd, cm, co);
  run(6, "augment output independent of workers and runs", 30, criterion6);
  run(7, "vector distances", 0, criterion7);
  run(8, "png round trip error bounds", 0, criterion8);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
