#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "brickgen/error.hpp"

namespace brickgen {

/// Discretized build volume. Lengths are in studs (X, Y) and layers (Z).
struct GridWorld {
  int H = 20;
  int W = 20;
  int D = 20;
  double stud_pitch_mm = 8.0;
  double layer_height_mm = 9.6;

  bool contains(int x, int y, int z) const {
    return x >= 0 && y >= 0 && z >= 0 && x < H && y < W && z < D;
  }
  std::size_t cell_count() const {
    return static_cast<std::size_t>(H) * W * D;
  }
  friend bool operator==(const GridWorld&, const GridWorld&) = default;
};

/// Brick footprint: h studs along X, w studs along Y. The order encodes orientation.
struct BrickDims {
  int h = 1;
  int w = 1;

  int area() const { return h * w; }
  BrickDims rotated() const { return {w, h}; }
  friend auto operator<=>(const BrickDims&, const BrickDims&) = default;
};

struct Voxel {
  int x = 0;
  int y = 0;
  int z = 0;
  friend auto operator<=>(const Voxel&, const Voxel&) = default;
};

/// One 1-unit-tall axis-aligned brick; (x, y, z) is the stud closest to the origin.
struct Brick {
  BrickDims dims;
  int x = 0;
  int y = 0;
  int z = 0;

  int x_end() const { return x + dims.h; }
  int y_end() const { return y + dims.w; }
  int area() const { return dims.area(); }
  bool covers(int vx, int vy, int vz) const {
    return vz == z && vx >= x && vx < x_end() && vy >= y && vy < y_end();
  }
  friend auto operator<=>(const Brick&, const Brick&) = default;
};

struct BrickStructure {
  GridWorld grid;
  std::vector<Brick> bricks;

  std::size_t size() const { return bricks.size(); }
  bool empty() const { return bricks.empty(); }
  friend bool operator==(const BrickStructure&, const BrickStructure&) = default;
};

struct PartInfo {
  BrickDims canonical;      // orientation rendered with the identity matrix
  std::string ldraw_part;   // e.g. "3001"
};

/// Data-driven brick catalogue. The standard library holds the eight canonical
/// bricks; each canonical entry admits both 90-degree orientations.
class BrickLibrary {
 public:
  BrickLibrary() = default;
  explicit BrickLibrary(std::vector<PartInfo> parts);

  static const BrickLibrary& standard();
  /// CSV rows: canonical_h,canonical_w,ldraw_part_id (a header row is allowed).
  static BrickLibrary from_csv(std::istream& in);
  static BrickLibrary from_csv_file(const std::filesystem::path& path);

  bool contains(BrickDims dims) const;
  /// Part entry whose canonical dims equal `dims` or its rotation.
  const PartInfo* part_for(BrickDims dims) const;
  std::span<const PartInfo> parts() const { return parts_; }
  /// All admissible oriented footprints, deduplicated, sorted by descending area then (h, w).
  std::span<const BrickDims> oriented() const { return oriented_; }

 private:
  std::vector<PartInfo> parts_;
  std::vector<BrickDims> oriented_;
};

Brick new_brick(BrickDims dims, int x, int y, int z, const GridWorld& grid,
                const BrickLibrary& library = BrickLibrary::standard());

std::vector<Voxel> brick_voxels(const Brick& brick);

/// Sort key for raster-scan order: layer, then row (y), then column (x).
bool raster_less(const Brick& a, const Brick& b);
void sort_raster(BrickStructure& s);

}  // namespace brickgen
