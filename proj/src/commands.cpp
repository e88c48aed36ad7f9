#include "cutdepth/commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace cutdepth::cli {

std::string CommandResult::error_summary_json(const std::string& command) const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["items"] = items;
  j["errors"] = nlohmann::ordered_json::array();
  for (const auto& e : errors) j["errors"].push_back({{"item", e.item}, {"message", e.message}});
  return j.dump();
}

std::size_t pick_partner(double draw, std::size_t index, std::size_t n) {
  if (n < 2) throw ParameterError("a partner needs at least two items");
  auto j = static_cast<std::size_t>(std::floor(draw * static_cast<double>(n - 1)));
  j = std::min(j, n - 2);
  return j >= index ? j + 1 : j;
}

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(IoErrorKind::kWriteFailed, dir, ec.message());
}

std::string scene_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%05zu", i);
  return buf;
}

/// Runs fn(i) for i in [0, n) on `workers` threads; items are claimed from a
/// shared counter, and each fn(i) writes only its own slot.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct CsvLine {
  std::size_t line_no;
  std::vector<std::string> fields;
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<CsvLine> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(IoErrorKind::kMissingFile, path, "cannot open");
  std::vector<CsvLine> lines;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    lines.push_back({no, split_csv(line)});
  }
  return lines;
}

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (errno != 0 || end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

IoError parse_error(const fs::path& path, std::size_t line_no, const std::string& what) {
  return IoError(IoErrorKind::kParse, path, "line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

CommandResult cmd_synth(const SynthOptions& options) {
  options.scene.validate();
  ensure_dir(options.out_dir);
  CommandResult result;
  Manifest manifest;
  manifest.depth_scale = options.depth_scale;
  for (std::size_t i = 0; i < options.count; ++i) {
    const std::string id = scene_id(i);
    SceneSpec spec = options.scene;
    spec.seed = mix_seed(options.seed, i);
    const SamplePaird pair = generate_scene(spec);
    ManifestEntry e{id, id + "_rgb.png", id + "_depth.png"};
    save_pair(pair, options.out_dir / e.rgb_path, options.out_dir / e.depth_path, options.depth_scale);
    manifest.entries.push_back(std::move(e));
  }
  result.items = options.count;
  write_manifest(manifest, options.out_dir / "manifest.jsonl");
  return result;
}

CommandResult cmd_augment(const AugmentOptions& options) {
  options.spec.validate();
  if (options.workers < 1) throw ParameterError("worker count must be at least 1");
  const Manifest in = read_manifest(options.manifest);
  ensure_dir(options.out_dir);

  const std::size_t n = in.entries.size();
  struct Slot {
    std::optional<ManifestEntry> entry;
    std::string provenance;
    std::optional<std::string> error;
  };
  std::vector<Slot> slots(n);

  parallel_for(n, options.workers, [&](std::size_t i) {
    const ManifestEntry& src = in.entries[i];
    Slot& slot = slots[i];
    try {
      ItemProvenance prov;
      prov.id = src.id;
      prov.index = i;
      prov.seed = mix_seed(options.seed, i);
      RngStream rng(prov.seed);

      SamplePaird pair = load_pair(src, in.depth_scale);
      std::optional<SamplePaird> partner;
      if (options.spec.method == Method::kCutMix) {
        const double draw = rng.uniform();
        const std::size_t j = pick_partner(draw, i, n);
        partner = load_pair(in.entries[j], in.depth_scale);
        prov.partner = in.entries[j].id;
        prov.partner_draw = draw;
      }
      if (options.baseline) pair = apply_baseline(pair, *options.baseline, rng);

      auto [out, record] = apply(pair, options.spec, rng, partner ? &*partner : nullptr);
      prov.record = std::move(record);

      ManifestEntry dst{src.id, src.id + "_rgb.png", src.id + "_depth.png"};
      save_pair(out, options.out_dir / dst.rgb_path, options.out_dir / dst.depth_path, in.depth_scale);
      slot.entry = std::move(dst);
      slot.provenance = provenance_json(prov);
    } catch (const std::exception& e) {
      slot.error = e.what();
    }
  });

  CommandResult result;
  result.items = n;
  Manifest out;
  out.depth_scale = in.depth_scale;
  std::string provenance;
  for (std::size_t i = 0; i < n; ++i) {
    if (slots[i].error) {
      result.errors.push_back({in.entries[i].id, *slots[i].error});
      continue;
    }
    out.entries.push_back(*slots[i].entry);
    provenance += slots[i].provenance;
    provenance += '\n';
  }
  write_manifest(out, options.out_dir / "manifest.jsonl");
  write_text(options.out_dir / "provenance.jsonl", provenance);
  return result;
}

CommandResult cmd_eval(const EvalOptions& options) {
  const Manifest pred = read_manifest(options.pred_manifest);
  const Manifest gt = read_manifest(options.gt_manifest);

  std::map<std::string, const ManifestEntry*> pred_by_id;
  for (const auto& e : pred.entries) pred_by_id[e.id] = &e;
  std::set<std::string> gt_ids;
  std::vector<std::string> offenders;
  for (const auto& e : gt.entries) {
    gt_ids.insert(e.id);
    if (!pred_by_id.count(e.id)) offenders.push_back(e.id + " (no prediction)");
  }
  for (const auto& e : pred.entries) {
    if (!gt_ids.count(e.id)) offenders.push_back(e.id + " (no ground truth)");
  }
  if (!offenders.empty()) {
    std::string msg = "prediction and ground-truth ids differ:";
    for (const auto& o : offenders) msg += " " + o;
    throw ParameterError(msg);
  }

  CommandResult result;
  result.items = gt.entries.size();
  std::vector<NamedReport<DepthEvalReport>> rows;
  std::vector<DepthEvalReport> per_image;
  DepthErrorPool pool;
  for (const auto& g : gt.entries) {
    try {
      const DepthMapd gt_depth = load_depth(g.depth_path, gt.depth_scale);
      const DepthMapd pred_depth = load_depth(pred_by_id.at(g.id)->depth_path, pred.depth_scale);
      if (gt_depth.width() != pred_depth.width() || gt_depth.height() != pred_depth.height()) {
        throw ShapeError("prediction and ground truth differ in size");
      }
      const BinaryMap mask = valid_mask(gt_depth, options.caps, options.crop);
      DepthErrorPool item;
      item.add(pred_depth, gt_depth, mask);
      const DepthEvalReport r = item.report();
      pool.add(pred_depth, gt_depth, mask);
      per_image.push_back(r);
      rows.push_back({g.id, r});
    } catch (const std::exception& e) {
      result.errors.push_back({g.id, e.what()});
    }
  }
  if (rows.empty()) return result;
  const DepthEvalReport aggregate =
      options.aggregation == Aggregation::kPooledPixels ? pool.report() : mean_of_reports(per_image);
  rows.push_back({"aggregate", aggregate});
  write_report<DepthEvalReport>(rows, options.report);
  return result;
}

CommandResult cmd_region_stats(const RegionStatsOptions& options) {
  if (!(options.p > 0.0 && options.p <= 1.0)) throw ParameterError("p must lie in (0, 1]");
  if (options.width < 1 || options.height < 1) throw ParameterError("dimensions must be positive");
  RngStream rng(options.seed);
  std::string out = "name,l,u,w,h\n";
  std::array<double, 4> sum{};
  std::array<Index, 4> lo;
  std::array<Index, 4> hi;
  lo.fill(std::numeric_limits<Index>::max());
  hi.fill(std::numeric_limits<Index>::min());
  CommandResult result;
  result.items = options.n_draws;
  for (std::size_t i = 0; i < options.n_draws; ++i) {
    const Region r = sample_region(rng, options.width, options.height, options.p);
    if (!r.fits(options.width, options.height)) {
      result.errors.push_back({std::to_string(i), "region " + to_string(r) + " out of bounds"});
    }
    const std::array<Index, 4> v{r.l, r.u, r.w, r.h};
    out += std::to_string(i);
    for (int k = 0; k < 4; ++k) {
      out += ',' + std::to_string(v[k]);
      sum[k] += static_cast<double>(v[k]);
      lo[k] = std::min(lo[k], v[k]);
      hi[k] = std::max(hi[k], v[k]);
    }
    out += '\n';
  }
  auto row = [&out](const char* name, const std::array<double, 4>& v) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%.6f\n", name, v[0], v[1], v[2], v[3]);
    out += buf;
  };
  if (options.n_draws > 0) {
    const auto n = static_cast<double>(options.n_draws);
    row("mean", {sum[0] / n, sum[1] / n, sum[2] / n, sum[3] / n});
    row("min", {double(lo[0]), double(lo[1]), double(lo[2]), double(lo[3])});
    row("max", {double(hi[0]), double(hi[1]), double(hi[2]), double(hi[3])});
  }
  const auto W = static_cast<double>(options.width);
  const auto H = static_cast<double>(options.height);
  row("analytic_mean", {(W - 1.0) / 2.0, (H - 1.0) / 2.0, W * options.p / 4.0, H * options.p / 4.0});
  write_text(options.report, out);
  return result;
}

CommandResult cmd_distances(const DistancesOptions& options) {
  auto load = [](const fs::path& path) {
    std::vector<std::pair<std::size_t, Eigen::VectorXd>> rows;
    const auto lines = read_csv(path);
    for (std::size_t k = 0; k < lines.size(); ++k) {
      const auto& line = lines[k];
      Eigen::VectorXd v(static_cast<Index>(line.fields.size()));
      bool numeric = true;
      for (std::size_t c = 0; c < line.fields.size(); ++c) {
        const auto d = parse_double(line.fields[c]);
        if (!d) {
          numeric = false;
          break;
        }
        v[static_cast<Index>(c)] = *d;
      }
      if (!numeric) {
        if (k == 0) continue;  // header
        throw parse_error(path, line.line_no, "non-numeric field");
      }
      rows.emplace_back(line.line_no, std::move(v));
    }
    return rows;
  };
  const auto a = load(options.vectors_a);
  const auto b = load(options.vectors_b);
  if (a.size() != b.size()) {
    throw ShapeError("vector files differ in row count (" + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + ")");
  }
  CommandResult result;
  result.items = a.size();
  std::vector<NamedReport<DistanceReport>> rows;
  DistanceReport mean;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].second.size() != b[i].second.size()) {
      throw ShapeError("row " + std::to_string(i) + " differs in width");
    }
    const std::string name = "row_" + std::to_string(i);
    try {
      const DistanceReport r = vector_distance(a[i].second, b[i].second);
      mean.rmse += r.rmse;
      mean.mae += r.mae;
      mean.cosine += r.cosine;
      rows.push_back({name, r});
    } catch (const Error& e) {
      result.errors.push_back({name, e.what()});
    }
  }
  if (rows.empty()) return result;
  const auto n = static_cast<double>(rows.size());
  mean.rmse /= n;
  mean.mae /= n;
  mean.cosine /= n;
  rows.push_back({"mean", mean});
  write_report<DistanceReport>(rows, options.report);
  return result;
}

double EdgeScores::mean() const {
  if (scores.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double v : scores) s += v;
  return s / static_cast<double>(scores.size());
}

std::vector<EdgeScores> edge_scores(const Manifest& manifest, const EdgeReportOptions& options,
                                    CommandResult& result) {
  if (!(options.p > 0.0 && options.p <= 1.0)) throw ParameterError("p must lie in (0, 1]");
  const std::size_t n = manifest.entries.size();
  std::vector<std::optional<SamplePaird>> pairs(n);
  for (std::size_t i = 0; i < n; ++i) {
    try {
      pairs[i] = load_pair(manifest.entries[i], manifest.depth_scale);
    } catch (const std::exception& e) {
      result.errors.push_back({manifest.entries[i].id, e.what()});
    }
  }

  std::vector<EdgeScores> out;
  for (Method m : options.methods) out.push_back({m, {}});
  result.items = n;

  for (std::size_t i = 0; i < n; ++i) {
    if (!pairs[i]) continue;
    const SamplePaird& pair = *pairs[i];
    const std::uint64_t item_seed = mix_seed(options.seed, i);
    RngStream rng(item_seed);
    const Region region = sample_region(rng, pair.width(), pair.height(), options.p);
    std::optional<std::size_t> partner;
    if (n >= 2) partner = pick_partner(rng.uniform(), i, n);

    for (auto& scores : out) {
      const std::string item = manifest.entries[i].id + "/" + std::string(to_string(scores.method));
      try {
        RgbImaged aug = pair.rgb;
        switch (scores.method) {
          case Method::kNone:
            break;
          case Method::kCutDepth:
            aug = cut_depth(pair, region, options.depth_norm);
            break;
          case Method::kCutOut:
            aug = cut_out(pair.rgb, region, options.cutout_fill);
            break;
          case Method::kRandomErasing: {
            RngStream erase(mix_seed(item_seed, 0));
            aug = random_erasing(pair.rgb, region, erase);
            break;
          }
          case Method::kCutMix:
            if (!partner || !pairs[*partner]) throw ParameterError("no usable cutmix partner");
            aug = cut_mix(pair.rgb, pairs[*partner]->rgb, region);
            break;
        }
        scores.scores.push_back(edge_preservation_score(pair.rgb, aug, region, options.threshold));
      } catch (const std::exception& e) {
        result.errors.push_back({item, e.what()});
      }
    }
  }
  return out;
}

CommandResult cmd_edge_report(const EdgeReportOptions& options) {
  const Manifest manifest = read_manifest(options.manifest);
  CommandResult result;
  const auto scores = edge_scores(manifest, options, result);

  std::string out = "name,method,score\n";
  char buf[64];
  // Per-item rows in manifest order, methods in option order.
  std::vector<std::size_t> cursor(scores.size(), 0);
  std::set<std::string> failed;
  for (const auto& e : result.errors) failed.insert(e.item);
  for (const auto& entry : manifest.entries) {
    for (std::size_t m = 0; m < scores.size(); ++m) {
      const std::string name(to_string(scores[m].method));
      if (failed.count(entry.id) || failed.count(entry.id + "/" + name)) continue;
      std::snprintf(buf, sizeof(buf), "%.6f", scores[m].scores[cursor[m]++]);
      out += entry.id + "," + name + "," + buf + "\n";
    }
  }
  for (const auto& s : scores) {
    std::snprintf(buf, sizeof(buf), "%.6f", s.mean());
    out += "mean," + std::string(to_string(s.method)) + "," + buf + "\n";
  }
  write_text(options.report, out);
  return result;
}

CommandResult cmd_quality(const QualityOptions& options) {
  const auto loss_lines = read_csv(options.loss_csv);
  const auto eval_lines = read_csv(options.eval_csv);

  auto expect_header = [](const fs::path& path, const std::vector<CsvLine>& lines,
                          const std::vector<std::string>& header) {
    if (lines.empty()) throw parse_error(path, 1, "missing header");
    if (lines.front().fields != header) {
      std::string h;
      for (const auto& f : header) h += (h.empty() ? "" : ",") + f;
      throw parse_error(path, lines.front().line_no, "expected header '" + h + "'");
    }
  };
  expect_header(options.loss_csv, loss_lines, {"method", "step", "loss"});
  expect_header(options.eval_csv, eval_lines, {"method", "clean_metric", "aug_metric", "orientation"});

  std::map<std::string, std::vector<double>> losses;
  for (std::size_t k = 1; k < loss_lines.size(); ++k) {
    const auto& l = loss_lines[k];
    if (l.fields.size() != 3) throw parse_error(options.loss_csv, l.line_no, "expected 3 fields");
    if (!parse_double(l.fields[1])) throw parse_error(options.loss_csv, l.line_no, "bad step");
    const auto v = parse_double(l.fields[2]);
    if (!v) throw parse_error(options.loss_csv, l.line_no, "bad loss value");
    losses[l.fields[0]].push_back(*v);
  }

  CommandResult result;
  std::vector<NamedReport<QualityReport>> rows;
  for (std::size_t k = 1; k < eval_lines.size(); ++k) {
    const auto& l = eval_lines[k];
    if (l.fields.size() != 4) throw parse_error(options.eval_csv, l.line_no, "expected 4 fields");
    const auto clean = parse_double(l.fields[1]);
    const auto aug = parse_double(l.fields[2]);
    if (!clean || !aug) throw parse_error(options.eval_csv, l.line_no, "bad metric value");
    Orientation o;
    if (l.fields[3] == "higher-better") {
      o = Orientation::kHigherBetter;
    } else if (l.fields[3] == "lower-better") {
      o = Orientation::kLowerBetter;
    } else {
      throw parse_error(options.eval_csv, l.line_no, "orientation must be higher-better or lower-better");
    }
    ++result.items;
    const auto it = losses.find(l.fields[0]);
    if (it == losses.end()) {
      result.errors.push_back({l.fields[0], "no loss series for method"});
      continue;
    }
    rows.push_back({l.fields[0], {affinity(*clean, *aug, o), diversity(it->second, options.diversity_window)}});
  }
  if (!rows.empty()) write_report<QualityReport>(rows, options.report);
  return result;
}

}  // namespace cutdepth::cli
