#include "cutdepth/dataset_io.hpp"

#include <png.h>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

namespace cutdepth {

std::string_view to_string(IoErrorKind kind) {
  switch (kind) {
    case IoErrorKind::kMissingFile:
      return "missing file";
    case IoErrorKind::kBadFormat:
      return "bad format";
    case IoErrorKind::kDimensionMismatch:
      return "dimension mismatch";
    case IoErrorKind::kWriteFailed:
      return "write failed";
    case IoErrorKind::kParse:
      return "parse error";
  }
  return "io error";
}

void Manifest::validate() const {
  if (!(depth_scale > 0.0) || !std::isfinite(depth_scale)) {
    throw ParameterError("manifest depth_scale must be positive");
  }
  std::set<std::string> seen;
  for (const auto& e : entries) {
    if (!seen.insert(e.id).second) throw ParameterError("duplicate manifest id '" + e.id + "'");
  }
}

Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(IoErrorKind::kMissingFile, path, "cannot open manifest");
  const fs::path base = path.parent_path();

  Manifest manifest;
  std::optional<double> scale;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& what) {
      return IoError(IoErrorKind::kParse, path, "line " + std::to_string(line_no) + ": " + what);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw fail(e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("depth") ||
        !j["depth"].is_string()) {
      throw fail("entry needs string fields 'id' and 'depth'");
    }
    ManifestEntry e;
    e.id = j["id"].get<std::string>();
    auto resolve = [&](const std::string& p) -> fs::path {
      if (p.empty()) return {};
      fs::path fp(p);
      return fp.is_absolute() ? fp : base / fp;
    };
    e.depth_path = resolve(j["depth"].get<std::string>());
    if (j.contains("rgb")) {
      if (!j["rgb"].is_string()) throw fail("'rgb' must be a string");
      e.rgb_path = resolve(j["rgb"].get<std::string>());
    }
    if (j.contains("depth_scale")) {
      if (!j["depth_scale"].is_number()) throw fail("'depth_scale' must be a number");
      const double s = j["depth_scale"].get<double>();
      if (scale && *scale != s) throw fail("depth_scale differs from earlier entries");
      scale = s;
    }
    manifest.entries.push_back(std::move(e));
  }
  manifest.depth_scale = scale.value_or(kDefaultDepthScale);
  try {
    manifest.validate();
  } catch (const ParameterError& e) {
    throw IoError(IoErrorKind::kParse, path, e.what());
  }
  return manifest;
}

void write_manifest(const Manifest& manifest, const fs::path& path) {
  manifest.validate();
  std::string text;
  for (const auto& e : manifest.entries) {
    nlohmann::ordered_json j;
    j["id"] = e.id;
    j["rgb"] = e.rgb_path.generic_string();
    j["depth"] = e.depth_path.generic_string();
    j["depth_scale"] = manifest.depth_scale;
    text += j.dump();
    text += '\n';
  }
  write_text(path, text);
}

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(IoErrorKind::kWriteFailed, path, "cannot open for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError(IoErrorKind::kWriteFailed, path, "write failed");
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct PngRaster {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int color_type = 0;
  std::vector<png_byte> data;
  std::size_t row_bytes = 0;
};

[[noreturn]] void png_error_fn(png_structp png, png_const_charp) { std::longjmp(png_jmpbuf(png), 1); }
void png_warning_fn(png_structp, png_const_charp) {}

PngRaster read_png(const fs::path& path) {
  if (!fs::exists(path)) throw IoError(IoErrorKind::kMissingFile, path, "file not found");
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IoError(IoErrorKind::kMissingFile, path, "cannot open");

  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw IoError(IoErrorKind::kBadFormat, path, "not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(IoErrorKind::kBadFormat, path, "libpng initialization failed");
  }
  PngRaster raster;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(IoErrorKind::kBadFormat, path, "corrupt PNG data");
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  raster.width = png_get_image_width(png, info);
  raster.height = png_get_image_height(png, info);
  raster.bit_depth = png_get_bit_depth(png, info);
  raster.color_type = png_get_color_type(png, info);
  raster.row_bytes = png_get_rowbytes(png, info);
  if (png_get_interlace_type(png, info) != PNG_INTERLACE_NONE) png_set_interlace_handling(png);
  png_read_update_info(png, info);
  raster.row_bytes = png_get_rowbytes(png, info);
  raster.data.resize(raster.row_bytes * raster.height);
  rows.resize(raster.height);
  for (png_uint_32 y = 0; y < raster.height; ++y) rows[y] = raster.data.data() + y * raster.row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return raster;
}

void write_png(const fs::path& path, png_uint_32 width, png_uint_32 height, int bit_depth,
               int color_type, const std::vector<png_byte>& data, std::size_t row_bytes) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw IoError(IoErrorKind::kWriteFailed, path, "cannot open for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError(IoErrorKind::kWriteFailed, path, "libpng initialization failed");
  }
  std::vector<png_bytep> rows(height);
  for (png_uint_32 y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(data.data() + y * row_bytes);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError(IoErrorKind::kWriteFailed, path, "libpng write failed");
  }
  png_init_io(png, file.get());
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0) throw IoError(IoErrorKind::kWriteFailed, path, "flush failed");
}

}  // namespace

std::uint8_t quantize_unit(double v) {
  const double clamped = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::floor(clamped * 255.0 + 0.5));
}

std::uint16_t quantize_depth(double meters, double depth_scale) {
  const double raw = std::floor(std::max(meters, 0.0) * depth_scale + 0.5);
  return static_cast<std::uint16_t>(std::min(raw, 65535.0));
}

RgbImaged read_rgb_png(const fs::path& path) {
  const PngRaster r = read_png(path);
  if (r.color_type != PNG_COLOR_TYPE_RGB || r.bit_depth != 8) {
    throw IoError(IoErrorKind::kBadFormat, path, "expected an 8-bit 3-channel RGB PNG");
  }
  RgbImaged img(static_cast<Index>(r.width), static_cast<Index>(r.height));
  for (Index y = 0; y < img.height(); ++y) {
    const png_byte* row = r.data.data() + static_cast<std::size_t>(y) * r.row_bytes;
    for (Index x = 0; x < img.width(); ++x) {
      for (int k = 0; k < 3; ++k) img(y, x, k) = row[3 * x + k] / 255.0;
    }
  }
  return img;
}

DepthMapd read_depth_png(const fs::path& path, double depth_scale) {
  if (!(depth_scale > 0.0)) throw ParameterError("depth_scale must be positive");
  const PngRaster r = read_png(path);
  if (r.color_type != PNG_COLOR_TYPE_GRAY || r.bit_depth != 16) {
    throw IoError(IoErrorKind::kBadFormat, path, "expected a 16-bit single-channel PNG");
  }
  DepthMapd depth(static_cast<Index>(r.width), static_cast<Index>(r.height));
  for (Index y = 0; y < depth.height(); ++y) {
    const png_byte* row = r.data.data() + static_cast<std::size_t>(y) * r.row_bytes;
    for (Index x = 0; x < depth.width(); ++x) {
      const unsigned raw = (static_cast<unsigned>(row[2 * x]) << 8) | row[2 * x + 1];
      depth(y, x) = static_cast<double>(raw) / depth_scale;
    }
  }
  return depth;
}

void write_rgb_png(const RgbImaged& rgb, const fs::path& path) {
  const auto w = static_cast<std::size_t>(rgb.width());
  const auto h = static_cast<std::size_t>(rgb.height());
  std::vector<png_byte> data(w * h * 3);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (int k = 0; k < 3; ++k) {
        data[(y * w + x) * 3 + k] =
            quantize_unit(rgb(static_cast<Index>(y), static_cast<Index>(x), k));
      }
    }
  }
  write_png(path, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8, PNG_COLOR_TYPE_RGB,
            data, w * 3);
}

void write_depth_png(const DepthMapd& depth, const fs::path& path, double depth_scale) {
  if (!(depth_scale > 0.0)) throw ParameterError("depth_scale must be positive");
  const auto w = static_cast<std::size_t>(depth.width());
  const auto h = static_cast<std::size_t>(depth.height());
  std::vector<png_byte> data(w * h * 2);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::uint16_t raw =
          quantize_depth(depth(static_cast<Index>(y), static_cast<Index>(x)), depth_scale);
      data[(y * w + x) * 2] = static_cast<png_byte>(raw >> 8);
      data[(y * w + x) * 2 + 1] = static_cast<png_byte>(raw & 0xFF);
    }
  }
  write_png(path, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 16,
            PNG_COLOR_TYPE_GRAY, data, w * 2);
}

DepthMapd load_depth(const fs::path& path, double depth_scale) {
  return read_depth_png(path, depth_scale);
}

SamplePaird load_pair(const ManifestEntry& entry, double depth_scale) {
  if (entry.rgb_path.empty()) {
    throw IoError(IoErrorKind::kMissingFile, entry.rgb_path, "entry '" + entry.id + "' has no rgb path");
  }
  RgbImaged rgb = read_rgb_png(entry.rgb_path);
  DepthMapd depth = read_depth_png(entry.depth_path, depth_scale);
  if (rgb.width() != depth.width() || rgb.height() != depth.height()) {
    std::ostringstream os;
    os << "rgb " << rgb.width() << "x" << rgb.height() << " vs depth " << depth.width() << "x"
       << depth.height();
    throw IoError(IoErrorKind::kDimensionMismatch, entry.depth_path, os.str());
  }
  return SamplePaird(std::move(rgb), std::move(depth));
}

void save_pair(const SamplePaird& pair, const fs::path& rgb_path, const fs::path& depth_path,
               double depth_scale) {
  write_rgb_png(pair.rgb, rgb_path);
  write_depth_png(pair.depth, depth_path, depth_scale);
}

void SceneSpec::validate() const {
  if (width < 1 || height < 1) throw ParameterError("scene dimensions must be positive");
  if (n_boxes < 1) throw ParameterError("scene needs at least one box");
  if (!(depth_lo > 0.0 && depth_lo < depth_hi) || !std::isfinite(depth_hi)) {
    throw ParameterError("scene depth range must be a positive interval");
  }
}

SamplePaird generate_scene(const SceneSpec& spec) {
  spec.validate();
  RngStream rng(spec.seed);
  const Index W = spec.width;
  const Index H = spec.height;
  const double span = spec.depth_hi - spec.depth_lo;

  // Zero-sum tint: (t0, t1, -(t0 + t1)) with t0, t1 in [-0.1, 0.1].
  auto draw_tint = [&rng]() {
    const double t0 = rng.uniform(-0.1, 0.1);
    const double t1 = rng.uniform(-0.1, 0.1);
    return std::array<double, 3>{t0, t1, -(t0 + t1)};
  };

  Plane<double> depth = Plane<double>::Constant(H, W, spec.depth_hi);
  Eigen::Array<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> owner =
      Eigen::Array<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(H, W);
  std::vector<std::array<double, 3>> tints{draw_tint()};

  auto extent = [](Index dim, double draw) {
    const double frac = 0.125 + 0.375 * draw;
    return std::clamp(static_cast<Index>(std::floor(static_cast<double>(dim) * frac)), Index{1}, dim);
  };

  for (int b = 0; b < spec.n_boxes; ++b) {
    const double dl = rng.uniform();
    const double du = rng.uniform();
    const Index w = extent(W, rng.uniform());
    const Index h = extent(H, rng.uniform());
    const double z = spec.depth_lo + 0.9 * span * rng.uniform();
    tints.push_back(draw_tint());
    const Index l = std::min(static_cast<Index>(std::floor(dl * static_cast<double>(W - w + 1))), W - w);
    const Index u = std::min(static_cast<Index>(std::floor(du * static_cast<double>(H - h + 1))), H - h);
    for (Index y = u; y < u + h; ++y) {
      for (Index x = l; x < l + w; ++x) {
        if (z < depth(y, x)) {
          depth(y, x) = z;
          owner(y, x) = b + 1;
        }
      }
    }
  }

  RgbImaged rgb(W, H);
  for (Index y = 0; y < H; ++y) {
    for (Index x = 0; x < W; ++x) {
      const double lum = 0.8 - 0.6 * (depth(y, x) - spec.depth_lo) / span;
      const auto& tint = tints[static_cast<std::size_t>(owner(y, x))];
      for (int k = 0; k < 3; ++k) rgb(y, x, k) = lum + tint[k];
    }
  }
  return SamplePaird(std::move(rgb), DepthMapd(std::move(depth)));
}

RgbImaged depth_heatmap(const DepthMapd& depth, double lo, double hi) {
  if (!(lo < hi)) throw ParameterError("heatmap range requires lo < hi");
  static constexpr std::array<std::array<double, 3>, 5> kAnchors{{
      {0.0, 0.0, 1.0},
      {0.0, 1.0, 1.0},
      {0.0, 1.0, 0.0},
      {1.0, 1.0, 0.0},
      {1.0, 0.0, 0.0},
  }};
  RgbImaged out(depth.width(), depth.height());
  for (Index y = 0; y < depth.height(); ++y) {
    for (Index x = 0; x < depth.width(); ++x) {
      const double d = depth(y, x);
      if (!(d > 0.0)) continue;
      const double t = std::clamp((d - lo) / (hi - lo), 0.0, 1.0) * 4.0;
      const auto seg = std::min(static_cast<std::size_t>(t), std::size_t{3});
      const double f = t - static_cast<double>(seg);
      for (int k = 0; k < 3; ++k) {
        out(y, x, k) = kAnchors[seg][k] + f * (kAnchors[seg + 1][k] - kAnchors[seg][k]);
      }
    }
  }
  return out;
}

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

template <typename Report, typename RowFn>
std::string format_rows(std::span<const NamedReport<Report>> reports, std::string_view header,
                        RowFn row) {
  std::string out(header);
  out += '\n';
  for (const auto& r : reports) {
    out += r.name;
    row(out, r.report);
    out += '\n';
  }
  return out;
}

}  // namespace

std::string format_report(std::span<const NamedReport<DepthEvalReport>> reports) {
  return format_rows(reports, "name,abs_rel,log10,rmse,rmse_log,d1,d2,d3,n_valid",
                     [](std::string& out, const DepthEvalReport& r) {
                       for (double v : {r.abs_rel, r.log10, r.rmse, r.rmse_log, r.d1, r.d2, r.d3}) {
                         out += ',' + fixed6(v);
                       }
                       out += ',' + std::to_string(r.n_valid);
                     });
}

std::string format_report(std::span<const NamedReport<DistanceReport>> reports) {
  return format_rows(reports, "name,rmse,mae,cosine", [](std::string& out, const DistanceReport& r) {
    for (double v : {r.rmse, r.mae, r.cosine}) out += ',' + fixed6(v);
  });
}

std::string format_report(std::span<const NamedReport<QualityReport>> reports) {
  return format_rows(reports, "name,affinity,diversity", [](std::string& out, const QualityReport& r) {
    for (double v : {r.affinity, r.diversity}) out += ',' + fixed6(v);
  });
}

template <typename Report>
void write_report(std::span<const NamedReport<Report>> reports, const fs::path& path) {
  if (reports.empty()) throw ParameterError("refusing to write an empty report");
  write_text(path, format_report(reports));
}

template void write_report(std::span<const NamedReport<DepthEvalReport>>, const fs::path&);
template void write_report(std::span<const NamedReport<DistanceReport>>, const fs::path&);
template void write_report(std::span<const NamedReport<QualityReport>>, const fs::path&);

std::string provenance_json(const ItemProvenance& item) {
  nlohmann::ordered_json j;
  j["id"] = item.id;
  j["index"] = item.index;
  j["seed"] = item.seed;
  j["method"] = std::string(to_string(item.record.method));
  j["applied"] = item.record.applied;
  if (item.record.region) {
    const Region& r = *item.record.region;
    j["region"] = {{"l", r.l}, {"u", r.u}, {"w", r.w}, {"h", r.h}};
  } else {
    j["region"] = nullptr;
  }
  j["draws"] = item.record.draws;
  j["fill_draws"] = item.record.fill_draws;
  j["partner"] = item.partner ? nlohmann::ordered_json(*item.partner) : nlohmann::ordered_json(nullptr);
  if (item.partner_draw) j["partner_draw"] = *item.partner_draw;
  return j.dump();
}

}  // namespace cutdepth
