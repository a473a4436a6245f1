#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "smpi/core.hpp"
#include "smpi/synth.hpp"

namespace smpi {

inline constexpr int kSmpiFormatVersion = 1;
inline constexpr const char* kManifestName = "manifest.txt";

enum class LayerPrecision {
  k8Bit,     // RGBA PNG per proxy
  kFloat32,  // PNG plus a lossless float32 RGBA sidecar
};

/// Writes an S-MPI container directory: a plain-text manifest and one layer
/// file per proxy. Manifest numbers round-trip bit-exactly.
void save_smpi(const SMPI& smpi, const std::filesystem::path& dir,
               LayerPrecision precision = LayerPrecision::k8Bit);

/// Throws Error(kVersionMismatch), Error(kCorruptManifest) or
/// MissingLayerError.
[[nodiscard]] SMPI load_smpi(const std::filesystem::path& dir);

/// The S-MPI an 8-bit save/load cycle produces: colors and alphas rounded
/// to multiples of 1/255.
[[nodiscard]] SMPI quantize_layers(const SMPI& smpi);

enum class DepthFormat {
  kMillimeter16,  // 16-bit grayscale PNG, round(depth * 1000), 0 = invalid
  kFloat64,       // raw little-endian doubles behind a small header
};

/// ".png" selects kMillimeter16, ".depth" kFloat64; anything else throws
/// Error(kUnsupportedFormat).
[[nodiscard]] DepthFormat depth_format_for(const std::filesystem::path& path);

void save_depth(const DepthMap& depth, const std::filesystem::path& path, DepthFormat format);
void save_depth(const DepthMap& depth, const std::filesystem::path& path);
[[nodiscard]] DepthMap load_depth(const std::filesystem::path& path);

void save_image(const Raster<Rgb>& image, const std::filesystem::path& path);
[[nodiscard]] Raster<Rgb> load_image(const std::filesystem::path& path);

/// Renders are stored as RGBA PNG with the confidence in the alpha channel.
void save_render(const ImageBuffer& render, const std::filesystem::path& path);
[[nodiscard]] ImageBuffer load_render(const std::filesystem::path& path);

void save_mask(const Mask& mask, const std::filesystem::path& path);
[[nodiscard]] Mask load_mask(const std::filesystem::path& path);

/// Labels in [-1, 65534] stored shifted by one in a 16-bit PNG.
void save_labels(const LabelRaster& labels, const std::filesystem::path& path);
[[nodiscard]] LabelRaster load_labels(const std::filesystem::path& path);

/// One camera per line: "fx fy cx cy" followed by the row-major 3x4
/// world-to-camera matrix [R | t]. Blank lines and '#' comments are skipped.
/// Throws ParseError carrying the 1-based line number.
[[nodiscard]] std::vector<Camera> parse_trajectory(std::istream& in,
                                                   Resolution resolution = kDefaultResolution);
[[nodiscard]] std::vector<Camera> load_trajectory(const std::filesystem::path& path,
                                                  Resolution resolution = kDefaultResolution);
[[nodiscard]] std::string format_camera(const Camera& camera);
void save_trajectory(std::span<const Camera> cameras, const std::filesystem::path& path);

}  // namespace smpi
