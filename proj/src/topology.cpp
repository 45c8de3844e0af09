#include "topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "errors.hpp"
#include "fsutil.hpp"

namespace ecsflow {

size_t BinaryHexImage::count_black() const {
  size_t n = 0;
  for (const uint8_t v : occupancy) n += v != 0;
  return n;
}

// Neighbor column offsets for (row parity, direction); row offsets are
// {0, 0, -1, -1, +1, +1} for {E, W, NE, NW, SE, SW}.
static const int kRowOff[6] = {0, 0, -1, -1, 1, 1};
static const int kColOffEven[6] = {1, -1, 0, -1, 0, -1};
static const int kColOffOdd[6] = {1, -1, 1, 0, 1, 0};

static inline const int* col_offsets(int row) { return (row & 1) ? kColOffOdd : kColOffEven; }

BinaryHexImage to_hex(const BinaryImage& binary) {
  if (binary.width < 2 || binary.height < 2)
    throw DataError("to_hex: image must be at least 2x2");
  BinaryHexImage hex;
  hex.rows = binary.height;
  hex.cols = binary.width / 2;
  hex.occupancy.assign(static_cast<size_t>(hex.rows) * hex.cols, 0);
  for (int r = 0; r < hex.rows; ++r) {
    const int shift = r & 1;
    for (int c = 0; c < hex.cols; ++c) hex.set(r, c, binary.at(r, 2 * c + shift));
  }
  return hex;
}

BinaryHexImage dilate_hex_once(const BinaryHexImage& hex) {
  BinaryHexImage out = hex;
  for (int r = 0; r < hex.rows; ++r) {
    const int* coff = col_offsets(r);
    for (int c = 0; c < hex.cols; ++c) {
      if (hex.at(r, c)) continue;
      for (int d = 0; d < 6; ++d) {
        const int nr = r + kRowOff[d];
        const int nc = c + coff[d];
        if (nr < 0 || nr >= hex.rows || nc < 0 || nc >= hex.cols) continue;
        if (hex.at(nr, nc)) {
          out.set(r, c, true);
          break;
        }
      }
    }
  }
  return out;
}

BinaryHexImage dilate_hex(const BinaryHexImage& hex, int s) {
  if (s < 0) throw ConfigError("dilate_hex: scale must be >= 0");
  BinaryHexImage out = hex;
  for (int i = 0; i < s; ++i) out = dilate_hex_once(out);
  return out;
}

namespace {

// union-find with path compression and union by size
class UnionFind {
public:
  explicit UnionFind(size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  int find(int x) {
    int root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const int next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

private:
  std::vector<int> parent_;
  std::vector<int> size_;
};

}  // namespace

int count_components(const BinaryHexImage& hex, Phase phase) {
  const bool want = phase == Phase::black;
  const size_t n = hex.occupancy.size();
  if (n == 0) return 0;
  UnionFind uf(n);
  // single raster pass: link to the already-visited W, NW, NE neighbors
  for (int r = 0; r < hex.rows; ++r) {
    const int* coff = col_offsets(r);
    for (int c = 0; c < hex.cols; ++c) {
      if (hex.at(r, c) != want) continue;
      const int idx = r * hex.cols + c;
      if (c > 0 && hex.at(r, c - 1) == want) uf.unite(idx, idx - 1);
      if (r > 0) {
        for (const int d : {2, 3}) {  // NE, NW
          const int nc = c + coff[d];
          if (nc >= 0 && nc < hex.cols && hex.at(r - 1, nc) == want)
            uf.unite(idx, (r - 1) * hex.cols + nc);
        }
      }
    }
  }
  // re-resolve labels, then count distinct roots
  int count = 0;
  std::vector<uint8_t> seen(n, 0);
  for (int r = 0; r < hex.rows; ++r)
    for (int c = 0; c < hex.cols; ++c) {
      if (hex.at(r, c) != want) continue;
      const int root = uf.find(r * hex.cols + c);
      if (!seen[root]) {
        seen[root] = 1;
        ++count;
      }
    }
  return count;
}

int euler_char(const BinaryHexImage& hex) {
  return count_components(hex, Phase::black) - count_components(hex, Phase::white);
}

EcsMatrix ecs_matrix(const std::vector<BinaryHexImage>& frames, int scales) {
  if (frames.empty()) throw DataError("ecs_matrix: empty frame list");
  if (scales < 1) throw ConfigError("ecs_matrix: scale count must be >= 1");
  EcsMatrix e;
  e.values.resize(static_cast<Eigen::Index>(frames.size()), scales);
  for (size_t t = 0; t < frames.size(); ++t) {
    BinaryHexImage current = frames[t];
    for (int s = 0; s < scales; ++s) {
      e.values(static_cast<Eigen::Index>(t), s) = euler_char(current);
      if (s + 1 < scales) current = dilate_hex_once(current);
    }
  }
  return e;
}

EcsMatrix normalize_columns(const EcsMatrix& e) {
  if (e.frames() < 1) throw DataError("normalize_columns: empty matrix");
  EcsMatrix out = e;
  for (int s = 0; s < e.scales(); ++s) {
    const double lo = e.values.col(s).minCoeff();
    const double hi = e.values.col(s).maxCoeff();
    if (hi - lo < std::numeric_limits<double>::min()) {
      out.values.col(s).setZero();
    } else {
      out.values.col(s) = (e.values.col(s).array() - lo) / (hi - lo);
    }
  }
  out.normalized = true;
  return out;
}

AlignmentResult ecs_l1_alignment(const EcsMatrix& a, const EcsMatrix& b, int k_max) {
  if (a.scales() != b.scales()) throw DataError("ecs_l1_alignment: scale counts differ");
  if (k_max < 0) throw ConfigError("ecs_l1_alignment: k_max must be >= 0");
  const int ta = a.frames(), tb = b.frames();
  AlignmentResult best;
  best.distance = std::numeric_limits<double>::infinity();
  for (int k = -k_max; k <= k_max; ++k) {
    const int lo = std::max(0, -k);
    const int hi = std::min(tb - 1, ta - 1 - k);
    if (hi < lo) continue;
    double sum = 0.0;
    for (int t = lo; t <= hi; ++t)
      sum += (a.values.row(t + k) - b.values.row(t)).cwiseAbs().sum();
    const double d = sum / static_cast<double>(hi - lo + 1);
    if (d < best.distance) {
      best.distance = d;
      best.offset = k;
    }
  }
  if (!std::isfinite(best.distance))
    throw DataError("ecs_l1_alignment: no offset with a non-empty overlap");
  return best;
}

EcsMatrix align_and_average(const std::vector<EcsMatrix>& positions, int k_max) {
  if (positions.empty()) throw DataError("align_and_average: no matrices");
  if (positions.size() == 1) return positions[0];

  const EcsMatrix& ref = positions[0];
  std::vector<int> offsets(positions.size(), 0);
  int lo = 0, hi = ref.frames() - 1;
  for (size_t i = 1; i < positions.size(); ++i) {
    if (positions[i].scales() != ref.scales())
      throw DataError("align_and_average: scale counts differ");
    offsets[i] = ecs_l1_alignment(ref, positions[i], k_max).offset;
    lo = std::max(lo, offsets[i]);
    hi = std::min(hi, positions[i].frames() - 1 + offsets[i]);
  }
  if (hi < lo) throw DataError("align_and_average: aligned overlap is empty");

  EcsMatrix out;
  out.values.setZero(hi - lo + 1, ref.scales());
  out.normalized = ref.normalized;
  for (int u = lo; u <= hi; ++u) {
    Eigen::RowVectorXd acc = ref.values.row(u);
    for (size_t i = 1; i < positions.size(); ++i) acc += positions[i].values.row(u - offsets[i]);
    out.values.row(u - lo) = acc / static_cast<double>(positions.size());
  }
  return out;
}

void write_ecs_csv(const std::filesystem::path& path, const EcsMatrix& e) {
  std::ostringstream out;
  for (int s = 0; s < e.scales(); ++s) out << (s ? "," : "") << "scale_" << s;
  out << "\n";
  for (int t = 0; t < e.frames(); ++t) {
    for (int s = 0; s < e.scales(); ++s) {
      if (s) out << ",";
      out << static_cast<long long>(std::llround(e.values(t, s)));
    }
    out << "\n";
  }
  atomic_write_text(path, out.str());
}

EcsMatrix read_ecs_csv(const std::filesystem::path& path) {
  const auto rows = read_csv(path);
  if (rows.size() < 2 || rows[0].empty() || rows[0][0].rfind("scale_", 0) != 0)
    throw DataError("malformed ecs csv: " + path.string());
  const size_t scales = rows[0].size();
  EcsMatrix e;
  e.values.resize(static_cast<Eigen::Index>(rows.size() - 1), static_cast<Eigen::Index>(scales));
  for (size_t t = 1; t < rows.size(); ++t) {
    if (rows[t].size() != scales) throw DataError("ragged ecs csv row in " + path.string());
    for (size_t s = 0; s < scales; ++s) e.values(static_cast<Eigen::Index>(t - 1), static_cast<Eigen::Index>(s)) = std::stod(rows[t][s]);
  }
  return e;
}

}  // namespace ecsflow
