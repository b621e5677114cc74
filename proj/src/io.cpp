#include "lfdepth/io.hpp"

#include <fmt/format.h>
#include <png.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

#include "lfdepth/errors.hpp"

namespace lfd {

using nlohmann::json;

namespace {

// Exactly one integer conversion, nothing else but literal text and %%.
void validate_frame_pattern(const std::string& pattern) {
  int conversions = 0;
  for (size_t i = 0; i < pattern.size(); ++i) {
    if (pattern[i] != '%') continue;
    if (i + 1 < pattern.size() && pattern[i + 1] == '%') {
      ++i;
      continue;
    }
    size_t j = i + 1;
    while (j < pattern.size() && (pattern[j] == '0' || std::isdigit(pattern[j]))) ++j;
    if (j >= pattern.size() || pattern[j] != 'd') {
      throw IoError(fmt::format("frame_pattern '{}' must use a single %d-style index", pattern));
    }
    ++conversions;
    i = j;
  }
  if (conversions != 1) {
    throw IoError(fmt::format("frame_pattern '{}' must contain exactly one index conversion", pattern));
  }
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw IoError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return j;
}

template <typename T>
T require_field(const json& j, const char* key, const std::filesystem::path& path) {
  if (!j.contains(key)) {
    throw IoError(fmt::format("{}: missing field '{}'", path.string(), key));
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw IoError(fmt::format("{}: field '{}': {}", path.string(), key, e.what()));
  }
}

struct PngReadCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* fp = nullptr;
  ~PngReadCloser() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

struct PngWriteCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* fp = nullptr;
  ~PngWriteCloser() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

}  // namespace

std::string Manifest::frame_name(int u, int v) const {
  char buf[512];
  std::snprintf(buf, sizeof(buf), frame_pattern.c_str(), frame_index(u, v));
  return std::string(buf);
}

Manifest read_manifest(const std::filesystem::path& path) {
  json j = load_json(path);
  Manifest m;
  m.name = j.value("name", path.parent_path().filename().string());
  m.width = require_field<int>(j, "width", path);
  m.height = require_field<int>(j, "height", path);
  m.views_u = require_field<int>(j, "views_u", path);
  m.views_v = require_field<int>(j, "views_v", path);
  m.frame_pattern = require_field<std::string>(j, "frame_pattern", path);
  m.disparity_min = j.value("disparity_min", -2.0f);
  m.disparity_max = j.value("disparity_max", 2.0f);
  std::string order = j.value("index_order", "row_major");
  if (order != "row_major" && order != "column_major") {
    throw IoError(fmt::format("{}: index_order must be row_major or column_major", path.string()));
  }
  m.row_major = order == "row_major";
  if (j.contains("crop_views_u")) m.crop_views_u = j.at("crop_views_u").get<int>();
  if (j.contains("crop_views_v")) m.crop_views_v = j.at("crop_views_v").get<int>();

  if (m.width <= 0 || m.height <= 0) {
    throw IoError(fmt::format("{}: width/height must be positive", path.string()));
  }
  auto check_odd = [&](const char* field, int v) {
    if (v < 3 || v % 2 == 0) {
      throw IoError(fmt::format("{}: {} must be odd and >= 3, got {}", path.string(), field, v));
    }
  };
  check_odd("views_u", m.views_u);
  check_odd("views_v", m.views_v);
  if (m.crop_views_u) check_odd("crop_views_u", *m.crop_views_u);
  if (m.crop_views_v) check_odd("crop_views_v", *m.crop_views_v);
  if (m.crop_views_u && *m.crop_views_u > m.views_u) {
    throw IoError(fmt::format("{}: crop_views_u exceeds views_u", path.string()));
  }
  if (m.crop_views_v && *m.crop_views_v > m.views_v) {
    throw IoError(fmt::format("{}: crop_views_v exceeds views_v", path.string()));
  }
  validate_frame_pattern(m.frame_pattern);
  return m;
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  json j{{"name", m.name},
         {"width", m.width},
         {"height", m.height},
         {"views_u", m.views_u},
         {"views_v", m.views_v},
         {"frame_pattern", m.frame_pattern},
         {"disparity_min", m.disparity_min},
         {"disparity_max", m.disparity_max},
         {"index_order", m.row_major ? "row_major" : "column_major"}};
  if (m.crop_views_u) j["crop_views_u"] = *m.crop_views_u;
  if (m.crop_views_v) j["crop_views_v"] = *m.crop_views_v;
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
  out << j.dump(2) << "\n";
}

LightField load_lightfield(const std::filesystem::path& manifest_path) {
  Manifest m = read_manifest(manifest_path);
  const std::filesystem::path dir = manifest_path.parent_path();

  std::vector<ColorImage> views;
  views.reserve(static_cast<size_t>(m.views_u) * m.views_v);
  for (int u = 0; u < m.views_u; ++u) {
    for (int v = 0; v < m.views_v; ++v) {
      const std::filesystem::path frame = dir / m.frame_name(u, v);
      if (!std::filesystem::exists(frame)) {
        throw IoError(fmt::format("missing frame {} (view u={} v={}, index {})", frame.string(),
                                  u, v, m.frame_index(u, v)));
      }
      ColorImage img = read_png(frame);
      if (img.rows != m.height || img.cols != m.width) {
        throw IoError(fmt::format("{}: is {}x{}, manifest says {}x{}", frame.string(), img.cols,
                                  img.rows, m.width, m.height));
      }
      views.push_back(std::move(img));
    }
  }

  int out_u = m.crop_views_u.value_or(m.views_u);
  int out_v = m.crop_views_v.value_or(m.views_v);
  if (out_u != m.views_u || out_v != m.views_v) {
    const int off_u = (m.views_u - out_u) / 2;
    const int off_v = (m.views_v - out_v) / 2;
    std::vector<ColorImage> cropped;
    cropped.reserve(static_cast<size_t>(out_u) * out_v);
    for (int u = 0; u < out_u; ++u) {
      for (int v = 0; v < out_v; ++v) {
        cropped.push_back(std::move(views[static_cast<size_t>(u + off_u) * m.views_v + v + off_v]));
      }
    }
    views = std::move(cropped);
  }
  return make_lightfield(std::move(views), out_u, out_v, m.name, m.disparity_min, m.disparity_max);
}

void save_lightfield(const std::filesystem::path& dir, const LightField& lf,
                     const std::string& frame_pattern) {
  validate_frame_pattern(frame_pattern);
  std::filesystem::create_directories(dir);
  Manifest m;
  m.name = lf.name;
  m.width = lf.width;
  m.height = lf.height;
  m.views_u = lf.views_u;
  m.views_v = lf.views_v;
  m.frame_pattern = frame_pattern;
  m.disparity_min = lf.disparity_min;
  m.disparity_max = lf.disparity_max;
  for (int u = 0; u < lf.views_u; ++u) {
    for (int v = 0; v < lf.views_v; ++v) {
      write_png(dir / m.frame_name(u, v), lf.view(u, v));
    }
  }
  write_manifest(dir / "manifest.json", m);
}

ColorImage read_png(const std::filesystem::path& path) {
  PngReadCloser c;
  c.fp = std::fopen(path.string().c_str(), "rb");
  if (!c.fp) throw IoError(fmt::format("cannot open {}", path.string()));
  png_byte header[8];
  if (std::fread(header, 1, 8, c.fp) != 8 || png_sig_cmp(header, 0, 8) != 0) {
    throw IoError(fmt::format("{}: not a PNG file", path.string()));
  }
  c.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  c.info = png_create_info_struct(c.png);
  if (!c.png || !c.info) throw IoError("png init failed");
  if (setjmp(png_jmpbuf(c.png))) {
    throw IoError(fmt::format("{}: png decode failed", path.string()));
  }
  png_init_io(c.png, c.fp);
  png_set_sig_bytes(c.png, 8);
  png_read_info(c.png, c.info);

  png_set_expand(c.png);            // palette/gray/low-bit to 8-bit
  png_set_strip_16(c.png);
  png_set_strip_alpha(c.png);
  png_set_gray_to_rgb(c.png);
  png_read_update_info(c.png, c.info);

  const int w = static_cast<int>(png_get_image_width(c.png, c.info));
  const int h = static_cast<int>(png_get_image_height(c.png, c.info));
  if (png_get_channels(c.png, c.info) != 3) {
    throw IoError(fmt::format("{}: expected 3 channels after expansion", path.string()));
  }
  std::vector<png_byte> rowbuf(static_cast<size_t>(w) * 3);
  ColorImage img(h, w);
  for (int y = 0; y < h; ++y) {
    png_read_row(c.png, rowbuf.data(), nullptr);
    for (int x = 0; x < w; ++x) {
      img.at(y, x) = {rowbuf[3 * x] / 255.0f, rowbuf[3 * x + 1] / 255.0f, rowbuf[3 * x + 2] / 255.0f};
    }
  }
  png_read_end(c.png, nullptr);
  return img;
}

void write_png(const std::filesystem::path& path, const ColorImage& img) {
  PngWriteCloser c;
  c.fp = std::fopen(path.string().c_str(), "wb");
  if (!c.fp) throw IoError(fmt::format("cannot write {}", path.string()));
  c.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  c.info = png_create_info_struct(c.png);
  if (!c.png || !c.info) throw IoError("png init failed");
  if (setjmp(png_jmpbuf(c.png))) {
    throw IoError(fmt::format("{}: png encode failed", path.string()));
  }
  png_init_io(c.png, c.fp);
  png_set_IHDR(c.png, c.info, img.cols, img.rows, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(c.png, c.info);
  std::vector<png_byte> rowbuf(static_cast<size_t>(img.cols) * 3);
  auto quantize = [](float v) {
    v = std::clamp(v, 0.0f, 1.0f);
    return static_cast<png_byte>(std::lround(v * 255.0f));
  };
  for (int y = 0; y < img.rows; ++y) {
    for (int x = 0; x < img.cols; ++x) {
      const Vec3f& p = img.at(y, x);
      rowbuf[3 * x] = quantize(p[0]);
      rowbuf[3 * x + 1] = quantize(p[1]);
      rowbuf[3 * x + 2] = quantize(p[2]);
    }
    png_write_row(c.png, rowbuf.data());
  }
  png_write_end(c.png, c.info);
}

namespace {

void byteswap_floats(std::vector<float>& vals) {
  for (float& f : vals) {
    uint32_t u;
    std::memcpy(&u, &f, 4);
    u = __builtin_bswap32(u);
    std::memcpy(&f, &u, 4);
  }
}

}  // namespace

DepthMap read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  std::string magic;
  in >> magic;
  if (magic == "PF") throw IoError(fmt::format("{}: color PFM not supported", path.string()));
  if (magic != "Pf") throw IoError(fmt::format("{}: bad PFM magic '{}'", path.string(), magic));
  int w = 0, h = 0;
  double scale = 0.0;
  in >> w >> h >> scale;
  if (!in || w <= 0 || h <= 0 || scale == 0.0) {
    throw IoError(fmt::format("{}: malformed PFM header", path.string()));
  }
  in.get();  // the single whitespace byte after the scale line
  std::vector<float> vals(static_cast<size_t>(w) * h);
  in.read(reinterpret_cast<char*>(vals.data()), static_cast<std::streamsize>(vals.size() * 4));
  if (in.gcount() != static_cast<std::streamsize>(vals.size() * 4)) {
    throw IoError(fmt::format("{}: truncated PFM payload", path.string()));
  }
  const bool file_little = scale < 0.0;
  if (file_little != (std::endian::native == std::endian::little)) byteswap_floats(vals);

  DepthMap map(h, w);
  for (int y = 0; y < h; ++y) {
    const float* row = vals.data() + static_cast<size_t>(h - 1 - y) * w;  // bottom-to-top
    for (int x = 0; x < w; ++x) {
      if (std::isnan(row[x])) {
        map.clear(y, x);
      } else {
        map.set(y, x, row[x]);
      }
    }
  }
  return map;
}

void write_pfm(const std::filesystem::path& path, const DepthMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
  const bool little = std::endian::native == std::endian::little;
  out << "Pf\n" << map.cols() << " " << map.rows() << "\n" << (little ? "-1.0" : "1.0") << "\n";
  std::vector<float> row(map.cols());
  for (int y = map.rows() - 1; y >= 0; --y) {
    for (int x = 0; x < map.cols(); ++x) {
      row[x] = map.valid_at(y, x) ? map.at(y, x) : std::numeric_limits<float>::quiet_NaN();
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
  }
  if (!out) throw IoError(fmt::format("write failed for {}", path.string()));
}

}  // namespace lfd
