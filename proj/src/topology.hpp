#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "image.hpp"

namespace ecsflow {

// Odd-row-offset ("brick wall") hexagonal lattice: odd rows sit half a
// cell to the right, every interior cell has the 6-neighborhood
// {E, W, NE, NW, SE, SW}.
struct BinaryHexImage {
  int rows = 0;
  int cols = 0;
  std::vector<uint8_t> occupancy;  // true = black

  bool at(int row, int col) const { return occupancy[static_cast<size_t>(row) * cols + col] != 0; }
  void set(int row, int col, bool v) { occupancy[static_cast<size_t>(row) * cols + col] = v ? 1 : 0; }
  size_t count_black() const;
};

enum class Phase { black, white };

// chi(s, t) surface: frames x scales. Integer-valued until
// normalize_columns maps each column to [0, 1].
struct EcsMatrix {
  Eigen::MatrixXd values;  // T x S
  bool normalized = false;

  int frames() const { return static_cast<int>(values.rows()); }
  int scales() const { return static_cast<int>(values.cols()); }
};

// Keeps alternating columns per row, odd rows offset by one column.
BinaryHexImage to_hex(const BinaryImage& binary);

// s successive one-step dilations of the black set.
BinaryHexImage dilate_hex(const BinaryHexImage& hex, int s);
BinaryHexImage dilate_hex_once(const BinaryHexImage& hex);

// Hoshen-Kopelman union-find count of 6-connected components.
int count_components(const BinaryHexImage& hex, Phase phase);

// chi = N_black - N_white
int euler_char(const BinaryHexImage& hex);

EcsMatrix ecs_matrix(const std::vector<BinaryHexImage>& frames, int scales);

// Per-column min-max to [0, 1]; constant columns map to zeros.
EcsMatrix normalize_columns(const EcsMatrix& e);

struct AlignmentResult {
  int offset = 0;      // best k
  double distance = 0; // per-frame-averaged L1 at the best offset
};

// min over k in [-k_max, k_max] of the per-frame-averaged L1 difference
// between a(t + k, :) and b(t, :) over the overlapping frames. Offsets
// with empty overlap are skipped.
AlignmentResult ecs_l1_alignment(const EcsMatrix& a, const EcsMatrix& b, int k_max);

// Aligns every matrix to the first one (best L1 offset) and averages
// element-wise over the common overlap.
EcsMatrix align_and_average(const std::vector<EcsMatrix>& positions, int k_max);

// cache CSV: header scale_0..scale_{S-1}, one integer row per frame
void write_ecs_csv(const std::filesystem::path& path, const EcsMatrix& e);
EcsMatrix read_ecs_csv(const std::filesystem::path& path);

}  // namespace ecsflow
