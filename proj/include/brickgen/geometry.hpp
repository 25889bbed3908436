#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "brickgen/core.hpp"
#include "brickgen/textio.hpp"

namespace brickgen {

/// H x W x D boolean occupancy, stored x-fastest (index = x + H*(y + W*z)).
class VoxelGrid {
 public:
  VoxelGrid() = default;
  VoxelGrid(int H, int W, int D);
  explicit VoxelGrid(const GridWorld& g) : VoxelGrid(g.H, g.W, g.D) {}

  int H() const { return H_; }
  int W() const { return W_; }
  int D() const { return D_; }
  std::size_t size() const { return bits_.size(); }

  bool in_bounds(int x, int y, int z) const {
    return x >= 0 && y >= 0 && z >= 0 && x < H_ && y < W_ && z < D_;
  }
  std::size_t index(int x, int y, int z) const {
    return static_cast<std::size_t>(x) + static_cast<std::size_t>(H_) * (y + static_cast<std::size_t>(W_) * z);
  }
  Voxel voxel_at(std::size_t idx) const;
  bool get(int x, int y, int z) const { return in_bounds(x, y, z) && bits_[index(x, y, z)] != 0; }
  bool get(std::size_t idx) const { return bits_[idx] != 0; }
  void set(int x, int y, int z, bool v = true) { bits_[index(x, y, z)] = v ? 1 : 0; }
  void set(std::size_t idx, bool v = true) { bits_[idx] = v ? 1 : 0; }

  std::size_t count() const;
  bool empty() const { return count() == 0; }
  std::vector<Voxel> occupied() const;
  bool same_dims(const VoxelGrid& o) const { return H_ == o.H_ && W_ == o.W_ && D_ == o.D_; }

  friend bool operator==(const VoxelGrid&, const VoxelGrid&) = default;

 private:
  int H_ = 0, W_ = 0, D_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Voxel owner map (brick index or -1), used for collision and contact queries.
class OccupancyMap {
 public:
  explicit OccupancyMap(const GridWorld& grid);
  /// Throws CollisionError(first, second) on the first overlapping pair.
  static OccupancyMap build(const BrickStructure& s);

  int owner(int x, int y, int z) const;
  /// Index of the first existing brick overlapping `b`, or -1.
  int first_overlap(const Brick& b) const;
  void place(const Brick& b, int index);
  void remove(const Brick& b);
  const GridWorld& grid() const { return grid_; }

 private:
  GridWorld grid_;
  std::vector<int> owner_;
};

VoxelGrid occupancy_grid(const BrickStructure& s);

enum class InvalidKind { malformed, not_in_library, out_of_bounds, collision };
const char* to_string(InvalidKind k);

struct ValidityResult {
  bool valid = true;
  std::optional<InvalidKind> kind;
  std::optional<std::pair<int, int>> colliding;  // (existing brick, proposed index)

  static ValidityResult ok() { return {}; }
  static ValidityResult fail(InvalidKind k) { return {false, k, std::nullopt}; }
};

/// Runs grammar, library, bounds, then collision checks and reports the first failure.
ValidityResult check_brick_validity(std::string_view line, const BrickStructure& s,
                                    ParseOptions opts = {},
                                    const BrickLibrary& library = BrickLibrary::standard());
ValidityResult check_brick_validity(const RawBrick& raw, const BrickStructure& s,
                                    const BrickLibrary& library = BrickLibrary::standard());
/// Incremental variant against a prebuilt occupancy map of `s`.
ValidityResult check_brick_validity(const RawBrick& raw, const OccupancyMap& occ, int proposed_index,
                                    const BrickLibrary& library = BrickLibrary::standard());

inline constexpr int kBaseplate = -1;

struct Stud {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Stud&, const Stud&) = default;
};

struct Connection {
  int upper = 0;
  int lower = kBaseplate;
  std::vector<Stud> knobs;  // stud columns shared by upper's bottom and lower's top
};

/// Sorted by (upper, lower). Requires a collision-free structure.
std::vector<Connection> connections(const BrickStructure& s);

/// Same-layer face contact between brick `a` (negative side) and `b` (positive side).
struct SideContact {
  int a = 0;
  int b = 0;
  Axis axis = Axis::x;
  std::vector<Voxel> cells;  // voxels of `a` whose +axis face touches `b`
};
std::vector<SideContact> side_contacts(const BrickStructure& s);

/// Components of the stud-connection graph; the baseplate joins nothing.
std::vector<std::vector<int>> connected_components(const BrickStructure& s);

// Meshes --------------------------------------------------------------------

struct Mesh {
  std::vector<std::array<double, 3>> vertices;
  std::vector<std::array<int, 3>> triangles;
};

/// ASCII OBJ subset: `v` and `f` records; polygons are fan-triangulated.
Mesh load_obj(std::istream& in);
Mesh load_obj_file(const std::filesystem::path& path);

/// Uniformly scales the mesh into the grid (centered in X/Y, resting on z=0),
/// marks every voxel whose box intersects a triangle, then fills the interior.
VoxelGrid voxelize_mesh(const Mesh& mesh, const GridWorld& grid);

/// Exact triangle / axis-aligned box overlap (separating axis test).
bool triangle_box_overlap(const std::array<double, 3>& center, const std::array<double, 3>& half,
                          const std::array<std::array<double, 3>, 3>& tri);

/// Fills cavities not reachable from the padded exterior through 6-connected empty cells.
VoxelGrid fill_interior(const VoxelGrid& surface);

// Distances -----------------------------------------------------------------

/// Squared Euclidean distance from every cell to the nearest occupied cell of `g`.
std::vector<double> squared_distance_field(const VoxelGrid& g);

/// Sum over both directions of nearest-neighbour Euclidean distances between occupied voxel centers.
double chamfer_distance(const VoxelGrid& a, const VoxelGrid& b);

// Voxel files ---------------------------------------------------------------

void write_voxels_rle(std::ostream& out, const VoxelGrid& g);
void write_voxels_raw(std::ostream& out, const VoxelGrid& g);
VoxelGrid read_voxels(std::istream& in);  // detects the format from its magic
VoxelGrid load_voxels(const std::filesystem::path& path);
void save_voxels(const std::filesystem::path& path, const VoxelGrid& g, bool raw = false);

/// Loads a grid from a voxel file, or voxelizes an `.obj` mesh into `grid`.
VoxelGrid load_shape(const std::filesystem::path& path, const GridWorld& grid);

}  // namespace brickgen
