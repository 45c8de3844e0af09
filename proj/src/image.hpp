#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ecsflow {

// Intensities in [0, 1], row-major.
struct GrayscaleImage {
  int width = 0;
  int height = 0;
  std::vector<double> intensity;

  double at(int row, int col) const { return intensity[static_cast<size_t>(row) * width + col]; }
  double& at(int row, int col) { return intensity[static_cast<size_t>(row) * width + col]; }
};

// Interleaved RGB in [0, 1].
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<double> rgb;  // 3 * width * height
};

// mask true = black = gas phase
struct BinaryImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> mask;

  bool at(int row, int col) const { return mask[static_cast<size_t>(row) * width + col] != 0; }
  void set(int row, int col, bool v) { mask[static_cast<size_t>(row) * width + col] = v ? 1 : 0; }
};

// Fractional crop rectangle, all coordinates in [0, 1].
struct CropBox {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 1.0;
  double y1 = 1.0;
};

struct LoadedImage {
  bool is_color = false;
  GrayscaleImage gray;
  RgbImage color;
};

GrayscaleImage to_grayscale(const RgbImage& rgb);

// black iff intensity < tau (set invert to flip the comparison for
// facilities where the gas phase images brighter than the liquid)
BinaryImage threshold_fixed(const GrayscaleImage& img, double tau, bool invert = false);

// Otsu on a 256-bin histogram of [0,1] intensities; returns the binary
// image and the threshold actually applied.
struct OtsuResult {
  BinaryImage binary;
  double tau = 0.0;
};
OtsuResult threshold_otsu(const GrayscaleImage& img, bool invert = false);

// Crops images wider than min_width to the fractional box; narrower
// images pass through untouched.
GrayscaleImage adaptive_crop(const GrayscaleImage& img, int min_width, const CropBox& box);

// Aspect-preserving box-filter resampling to target_width columns.
GrayscaleImage downsample(const GrayscaleImage& img, int target_width);

// Picks indices round(j * stride_seconds * fps), j = 0,1,..., dropping
// duplicates, until the list is exhausted.
std::vector<std::filesystem::path> sample_frames(const std::vector<std::filesystem::path>& frame_paths,
                                                 double stride_seconds, double fps);

// PNG / JPEG / PGM / PPM decoding. Color inputs are kept as RGB so the
// caller decides when to collapse channels.
LoadedImage load_image(const std::filesystem::path& path);
GrayscaleImage load_grayscale(const std::filesystem::path& path);

void write_pgm(const std::filesystem::path& path, const GrayscaleImage& img);
void write_pgm(const std::filesystem::path& path, const BinaryImage& img);

}  // namespace ecsflow
