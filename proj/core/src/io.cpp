#include "smpi/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string_view>

#include "png_codec.hpp"

namespace smpi {
namespace fs = std::filesystem;

namespace {

constexpr std::array<char, 4> kFloatLayerMagic{'S', 'M', 'P', 'F'};
constexpr std::array<char, 4> kDepthMagic{'S', 'M', 'P', 'D'};
constexpr std::uint32_t kBinaryVersion = 1;

// ---- text helpers ----------------------------------------------------------

template <typename T>
std::string format_number(T value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

// ---- little-endian binary helpers -----------------------------------------

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<char, sizeof(T)> bytes{};
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), bytes.size());
}

template <typename T>
bool read_le(std::istream& in, T& value) {
  std::array<char, sizeof(T)> bytes{};
  if (!in.read(bytes.data(), bytes.size())) return false;
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  std::memcpy(&value, bytes.data(), sizeof(T));
  return true;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return in;
}

// ---- 8-bit conversion ------------------------------------------------------

std::uint8_t to_byte(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0F, 1.0F) * 255.0F));
}

float from_byte(std::uint8_t b) { return static_cast<float>(b) / 255.0F; }

detail::Image8 rgba_image(const Raster<Rgb>& color, const Raster<float>& alpha) {
  detail::Image8 img{color.width(), color.height(), 4, {}};
  img.data.reserve(color.size() * 4);
  for (std::size_t i = 0; i < color.size(); ++i) {
    const Rgb& c = color.pixels()[i];
    img.data.push_back(to_byte(c.r));
    img.data.push_back(to_byte(c.g));
    img.data.push_back(to_byte(c.b));
    img.data.push_back(to_byte(alpha.pixels()[i]));
  }
  return img;
}

void split_rgba(const detail::Image8& img, Raster<Rgb>& color, Raster<float>& alpha) {
  const Resolution res{img.height, img.width};
  color = Raster<Rgb>(res);
  alpha = Raster<float>(res, 0.0F);
  for (std::size_t i = 0; i < res.pixel_count(); ++i) {
    const std::uint8_t* px = img.data.data() + 4 * i;
    color.pixels()[i] = Rgb{from_byte(px[0]), from_byte(px[1]), from_byte(px[2])};
    alpha.pixels()[i] = from_byte(px[3]);
  }
}

// ---- float32 layer sidecar -------------------------------------------------

void write_float_layer(const RgbaLayer& layer, const fs::path& path) {
  std::ofstream out = open_out(path);
  out.write(kFloatLayerMagic.data(), kFloatLayerMagic.size());
  write_le(out, kBinaryVersion);
  write_le(out, static_cast<std::uint32_t>(layer.alpha.height()));
  write_le(out, static_cast<std::uint32_t>(layer.alpha.width()));
  write_le(out, std::uint32_t{4});
  for (std::size_t i = 0; i < layer.alpha.size(); ++i) {
    const Rgb& c = layer.color.pixels()[i];
    write_le(out, c.r);
    write_le(out, c.g);
    write_le(out, c.b);
    write_le(out, layer.alpha.pixels()[i]);
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

RgbaLayer read_float_layer(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::array<char, 4> magic{};
  std::uint32_t version = 0;
  std::uint32_t h = 0;
  std::uint32_t w = 0;
  std::uint32_t channels = 0;
  if (!in.read(magic.data(), magic.size()) || magic != kFloatLayerMagic ||
      !read_le(in, version) || !read_le(in, h) || !read_le(in, w) || !read_le(in, channels)) {
    throw Error(ErrorCode::kCorruptManifest, path.string() + " is not a float layer file");
  }
  if (version != kBinaryVersion) {
    throw Error(ErrorCode::kVersionMismatch, path.string() + " has an unknown layer version");
  }
  if (channels != 4 || h > 1U << 16 || w > 1U << 16) {
    throw Error(ErrorCode::kCorruptManifest, path.string() + " has an unexpected layout");
  }
  const Resolution res{static_cast<int>(h), static_cast<int>(w)};
  RgbaLayer layer{Raster<Rgb>(res), Raster<float>(res, 0.0F)};
  for (std::size_t i = 0; i < res.pixel_count(); ++i) {
    Rgb& c = layer.color.pixels()[i];
    if (!read_le(in, c.r) || !read_le(in, c.g) || !read_le(in, c.b) ||
        !read_le(in, layer.alpha.pixels()[i])) {
      throw Error(ErrorCode::kCorruptManifest, path.string() + " is truncated");
    }
  }
  return layer;
}

std::string layer_name(std::size_t index, const char* suffix) {
  std::string digits = std::to_string(index);
  if (digits.size() < 3) digits.insert(0, 3 - digits.size(), '0');
  return "layer_" + digits + suffix;
}

// ---- manifest parsing ------------------------------------------------------

class ManifestReader {
 public:
  explicit ManifestReader(const fs::path& path) : path_(path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kCorruptManifest, "missing manifest " + path.string());
    std::string line;
    while (std::getline(in, line)) {
      auto tokens = split(line);
      if (tokens.empty() || tokens.front().starts_with('#')) continue;
      lines_.emplace_back(line, std::vector<std::string>(tokens.begin(), tokens.end()));
    }
  }

  const std::vector<std::string>& next(std::string_view key, std::size_t values) {
    if (cursor_ >= lines_.size()) fail("unexpected end, expected '" + std::string(key) + "'");
    const auto& tokens = lines_[cursor_++].second;
    if (tokens.front() != key) fail("expected '" + std::string(key) + "', got '" + tokens.front() + "'");
    if (values != 0 && tokens.size() != values + 1) fail("wrong field count for '" + std::string(key) + "'");
    return tokens;
  }

  template <typename T>
  T number(const std::string& token) {
    T v{};
    if (!parse_number(token, v)) fail("bad number '" + token + "'");
    return v;
  }

  bool done() const { return cursor_ == lines_.size(); }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kCorruptManifest, path_.string() + ": " + what);
  }

 private:
  fs::path path_;
  std::vector<std::pair<std::string, std::vector<std::string>>> lines_;
  std::size_t cursor_ = 0;
};

Camera parse_camera_tokens(std::span<const std::string_view> t, Resolution res) {
  std::array<double, 16> v{};
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!parse_number(t[i], v[i])) {
      throw Error(ErrorCode::kParseError, "bad number '" + std::string(t[i]) + "'");
    }
  }
  RigidTransform pose;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) pose.rotation(r, c) = v[4 + r * 4 + c];
    pose.translation[r] = v[4 + r * 4 + 3];
  }
  return Camera(Intrinsics{v[0], v[1], v[2], v[3]}, pose, res);
}

}  // namespace

// ---- S-MPI container -------------------------------------------------------

void save_smpi(const SMPI& smpi, const fs::path& dir, LayerPrecision precision) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());

  const Camera& cam = smpi.reference_camera();
  const Intrinsics& k = cam.intrinsics();
  std::ostringstream m;
  m << "smpi " << kSmpiFormatVersion << '\n';
  m << "resolution " << cam.resolution().height << ' ' << cam.resolution().width << '\n';
  m << "intrinsics " << format_number(k.fx) << ' ' << format_number(k.fy) << ' '
    << format_number(k.cx) << ' ' << format_number(k.cy) << '\n';
  m << "rotation";
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m << ' ' << format_number(cam.pose().rotation(r, c));
  }
  m << "\ntranslation";
  for (int i = 0; i < 3; ++i) m << ' ' << format_number(cam.pose().translation[i]);
  m << "\nprecision " << (precision == LayerPrecision::kFloat32 ? "float32" : "8bit") << '\n';
  m << "proxies " << smpi.size() << '\n';
  for (std::size_t i = 0; i < smpi.size(); ++i) {
    const Proxy& p = smpi.proxy(i);
    const std::string png = layer_name(i, ".png");
    m << "proxy " << i << ' '
      << (p.structure() == StructureClass::kPlanar ? "planar" : "nonplanar");
    for (int j = 0; j < 3; ++j) m << ' ' << format_number(p.plane().normal()[j]);
    m << ' ' << format_number(p.plane().offset()) << ' ' << format_number(p.mask_threshold()) << ' '
      << png;
    detail::write_png8(dir / png, rgba_image(p.color(), p.alpha()));
    if (precision == LayerPrecision::kFloat32) {
      const std::string sidecar = layer_name(i, ".rgba.f32");
      write_float_layer(p.layer(), dir / sidecar);
      m << ' ' << sidecar;
    }
    m << '\n';
  }
  std::ofstream out = open_out(dir / kManifestName);
  out << m.str();
  if (!out) throw Error(ErrorCode::kIo, "failed writing manifest in " + dir.string());
}

SMPI load_smpi(const fs::path& dir) {
  ManifestReader reader(dir / kManifestName);
  const auto& header = reader.next("smpi", 1);
  const int version = reader.number<int>(header[1]);
  if (version != kSmpiFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "container version " + header[1] + ", expected " + std::to_string(kSmpiFormatVersion));
  }
  const auto& res_tokens = reader.next("resolution", 2);
  const Resolution res{reader.number<int>(res_tokens[1]), reader.number<int>(res_tokens[2])};
  const auto& k_tokens = reader.next("intrinsics", 4);
  const Intrinsics k{reader.number<double>(k_tokens[1]), reader.number<double>(k_tokens[2]),
                     reader.number<double>(k_tokens[3]), reader.number<double>(k_tokens[4])};
  RigidTransform pose;
  const auto& r_tokens = reader.next("rotation", 9);
  for (int i = 0; i < 9; ++i) pose.rotation(i / 3, i % 3) = reader.number<double>(r_tokens[1 + i]);
  const auto& t_tokens = reader.next("translation", 3);
  for (int i = 0; i < 3; ++i) pose.translation[i] = reader.number<double>(t_tokens[1 + i]);
  const auto& p_tokens = reader.next("precision", 1);
  if (p_tokens[1] != "8bit" && p_tokens[1] != "float32") reader.fail("unknown precision " + p_tokens[1]);
  const auto count = reader.number<std::size_t>(reader.next("proxies", 1)[1]);

  std::optional<Camera> camera;
  try {
    camera.emplace(k, pose, res);
  } catch (const Error& e) {
    reader.fail(e.what());
  }

  std::vector<Proxy> proxies;
  proxies.reserve(std::min<std::size_t>(count, 4096));
  for (std::size_t i = 0; i < count; ++i) {
    const auto& t = reader.next("proxy", 0);
    if (t.size() != 9 && t.size() != 10) reader.fail("wrong field count for proxy");
    if (reader.number<std::size_t>(t[1]) != i) reader.fail("proxies out of order");
    StructureClass structure = StructureClass::kPlanar;
    if (t[2] == "nonplanar") {
      structure = StructureClass::kNonPlanar;
    } else if (t[2] != "planar") {
      reader.fail("unknown structure class " + t[2]);
    }
    const Vec3 n(reader.number<double>(t[3]), reader.number<double>(t[4]), reader.number<double>(t[5]));
    const double d = reader.number<double>(t[6]);
    const float threshold = reader.number<float>(t[7]);

    RgbaLayer layer;
    const fs::path layer_path = dir / (t.size() == 10 ? t[9] : t[8]);
    if (!fs::exists(layer_path)) throw MissingLayerError(i, layer_path.string());
    if (t.size() == 10) {
      layer = read_float_layer(layer_path);
    } else {
      split_rgba(detail::read_png8(layer_path, 4), layer.color, layer.alpha);
    }
    if (layer.alpha.resolution() != res) reader.fail("layer " + std::to_string(i) + " has the wrong size");
    try {
      proxies.emplace_back(normalize_plane(n, d), structure, std::move(layer.color),
                           std::move(layer.alpha), threshold);
    } catch (const Error& e) {
      reader.fail("proxy " + std::to_string(i) + ": " + e.what());
    }
  }
  if (!reader.done()) reader.fail("trailing content");
  try {
    return SMPI(std::move(proxies), *camera);
  } catch (const Error& e) {
    reader.fail(e.what());
  }
}

SMPI quantize_layers(const SMPI& smpi) {
  std::vector<Proxy> proxies;
  proxies.reserve(smpi.size());
  for (const Proxy& p : smpi.proxies()) {
    RgbaLayer layer;
    split_rgba(rgba_image(p.color(), p.alpha()), layer.color, layer.alpha);
    proxies.emplace_back(p.plane(), p.structure(), std::move(layer.color), std::move(layer.alpha),
                         p.mask_threshold());
  }
  return SMPI(std::move(proxies), smpi.reference_camera());
}

// ---- depth -----------------------------------------------------------------

DepthFormat depth_format_for(const fs::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".png") return DepthFormat::kMillimeter16;
  if (ext == ".depth") return DepthFormat::kFloat64;
  throw Error(ErrorCode::kUnsupportedFormat, "unknown depth file type '" + ext + "'");
}

void save_depth(const DepthMap& depth, const fs::path& path) {
  save_depth(depth, path, depth_format_for(path));
}

void save_depth(const DepthMap& depth, const fs::path& path, DepthFormat format) {
  const Raster<double>& d = depth.depth;
  if (format == DepthFormat::kMillimeter16) {
    detail::Image16 img{d.width(), d.height(), std::vector<std::uint16_t>(d.size(), 0)};
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double v = d.pixels()[i];
      if (!DepthMap::is_valid(v)) continue;
      const double mm = std::round(v * 1000.0);
      if (mm > 65535.0) {
        throw Error(ErrorCode::kUnsupportedFormat, "depth beyond 65.535 m cannot be stored in millimeters");
      }
      img.data[i] = static_cast<std::uint16_t>(mm);
    }
    detail::write_png16_gray(path, img);
    return;
  }
  std::ofstream out = open_out(path);
  out.write(kDepthMagic.data(), kDepthMagic.size());
  write_le(out, kBinaryVersion);
  write_le(out, static_cast<std::uint32_t>(d.height()));
  write_le(out, static_cast<std::uint32_t>(d.width()));
  for (const double v : d.pixels()) write_le(out, v);
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

DepthMap load_depth(const fs::path& path) {
  if (depth_format_for(path) == DepthFormat::kMillimeter16) {
    const detail::Image16 img = detail::read_png16_gray(path);
    DepthMap out{Raster<double>(Resolution{img.height, img.width}, kInvalidDepth)};
    for (std::size_t i = 0; i < img.data.size(); ++i) {
      if (img.data[i] != 0) out.depth.pixels()[i] = img.data[i] / 1000.0;
    }
    return out;
  }
  std::ifstream in = open_in(path);
  std::array<char, 4> magic{};
  std::uint32_t version = 0;
  std::uint32_t h = 0;
  std::uint32_t w = 0;
  if (!in.read(magic.data(), magic.size()) || magic != kDepthMagic || !read_le(in, version) ||
      !read_le(in, h) || !read_le(in, w) || h > 1U << 16 || w > 1U << 16) {
    throw Error(ErrorCode::kUnsupportedFormat, path.string() + " is not a float depth file");
  }
  if (version != kBinaryVersion) {
    throw Error(ErrorCode::kVersionMismatch, path.string() + " has an unknown depth version");
  }
  DepthMap out{Raster<double>(Resolution{static_cast<int>(h), static_cast<int>(w)}, kInvalidDepth)};
  for (double& v : out.depth.pixels()) {
    if (!read_le(in, v)) throw Error(ErrorCode::kUnsupportedFormat, path.string() + " is truncated");
  }
  return out;
}

// ---- images ----------------------------------------------------------------

void save_image(const Raster<Rgb>& image, const fs::path& path) {
  detail::Image8 img{image.width(), image.height(), 3, {}};
  img.data.reserve(image.size() * 3);
  for (const Rgb& c : image.pixels()) {
    img.data.push_back(to_byte(c.r));
    img.data.push_back(to_byte(c.g));
    img.data.push_back(to_byte(c.b));
  }
  detail::write_png8(path, img);
}

Raster<Rgb> load_image(const fs::path& path) {
  const detail::Image8 img = detail::read_png8(path, 3);
  Raster<Rgb> out(Resolution{img.height, img.width});
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint8_t* px = img.data.data() + 3 * i;
    out.pixels()[i] = Rgb{from_byte(px[0]), from_byte(px[1]), from_byte(px[2])};
  }
  return out;
}

void save_render(const ImageBuffer& render, const fs::path& path) {
  if (!same_shape(render.pixels, render.confidence)) {
    throw Error(ErrorCode::kDimensionMismatch, "render color and confidence differ in size");
  }
  detail::write_png8(path, rgba_image(render.pixels, render.confidence));
}

ImageBuffer load_render(const fs::path& path) {
  ImageBuffer out;
  split_rgba(detail::read_png8(path, 4), out.pixels, out.confidence);
  return out;
}

void save_mask(const Mask& mask, const fs::path& path) {
  detail::Image8 img{mask.width(), mask.height(), 1, {}};
  img.data.reserve(mask.size());
  for (const std::uint8_t m : mask.pixels()) img.data.push_back(m ? 255 : 0);
  detail::write_png8(path, img);
}

Mask load_mask(const fs::path& path) {
  const detail::Image8 img = detail::read_png8(path, 1);
  Mask out(Resolution{img.height, img.width}, 0);
  for (std::size_t i = 0; i < out.size(); ++i) out.pixels()[i] = img.data[i] >= 128 ? 1 : 0;
  return out;
}

void save_labels(const LabelRaster& labels, const fs::path& path) {
  detail::Image16 img{labels.width(), labels.height(), {}};
  img.data.reserve(labels.size());
  for (const std::int32_t l : labels.pixels()) {
    if (l < -1 || l > 65534) throw Error(ErrorCode::kUnsupportedFormat, "label out of 16-bit range");
    img.data.push_back(static_cast<std::uint16_t>(l + 1));
  }
  detail::write_png16_gray(path, img);
}

LabelRaster load_labels(const fs::path& path) {
  const detail::Image16 img = detail::read_png16_gray(path);
  LabelRaster out(Resolution{img.height, img.width}, -1);
  for (std::size_t i = 0; i < out.size(); ++i) out.pixels()[i] = static_cast<std::int32_t>(img.data[i]) - 1;
  return out;
}

// ---- trajectories ----------------------------------------------------------

std::vector<Camera> parse_trajectory(std::istream& in, Resolution resolution) {
  std::vector<Camera> cameras;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split(line);
    if (tokens.empty() || tokens.front().starts_with('#')) continue;
    if (tokens.size() != 16) {
      throw ParseError(line_no, "expected 16 numbers, found " + std::to_string(tokens.size()));
    }
    try {
      cameras.push_back(parse_camera_tokens(tokens, resolution));
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return cameras;
}

std::vector<Camera> load_trajectory(const fs::path& path, Resolution resolution) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return parse_trajectory(in, resolution);
}

std::string format_camera(const Camera& camera) {
  const Intrinsics& k = camera.intrinsics();
  std::string s = format_number(k.fx) + ' ' + format_number(k.fy) + ' ' + format_number(k.cx) +
                  ' ' + format_number(k.cy);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) s += ' ' + format_number(camera.pose().rotation(r, c));
    s += ' ' + format_number(camera.pose().translation[r]);
  }
  return s;
}

void save_trajectory(std::span<const Camera> cameras, const fs::path& path) {
  std::ofstream out = open_out(path);
  for (const Camera& c : cameras) out << format_camera(c) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

}  // namespace smpi
