#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "brickgen/core.hpp"

namespace brickgen {

/// Face order: -x, +x, -y, +y, -z (bottom), +z (top).
enum class Face : int { neg_x = 0, pos_x, neg_y, pos_y, neg_z, pos_z };
inline constexpr int kFaceCount = 6;

/// Bricks whose every boundary face abuts an occupied voxel. The baseplate is not cover.
std::vector<int> occluded_bricks(const BrickStructure& s);

struct VoxelFaces {
  Voxel voxel;
  int brick = 0;
  std::vector<Face> faces;  // ascending
};

/// Every occupied voxel in raster order (z, y, x) with its visible faces. A face
/// is visible when the neighbouring cell is empty and inside the grid or above
/// it; with `baseplate_covers`, bottom faces at z = 0 are hidden.
std::vector<VoxelFaces> visible_faces(const BrickStructure& s, bool baseplate_covers = true);

struct AtlasRegion {
  Voxel voxel;
  Face face = Face::neg_x;
  int brick = 0;
  int x = 0, y = 0;  // top-left pixel
  int size = 0;
};

struct AtlasOptions {
  int cell = 16;
  int columns = 64;
  int max_height = 1 << 15;  // pixels
};

struct FaceAtlas {
  int width = 0;
  int height = 0;
  int cell = 16;
  std::vector<AtlasRegion> regions;  // voxel raster order, then face index

  nlohmann::json to_json() const;
};

/// One cell per visible face, packed row-major. Rows are added as needed;
/// Error(atlas_overflow) when the height would exceed `max_height`.
FaceAtlas build_face_atlas(const BrickStructure& s, const AtlasOptions& opts = {}, bool baseplate_covers = true);

/// 8-bit sRGB raster, row-major, three bytes per pixel.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Image() = default;
  Image(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0) {}
  std::uint8_t* at(int x, int y) { return &rgb[(static_cast<std::size_t>(y) * width + x) * 3]; }
  const std::uint8_t* at(int x, int y) const { return &rgb[(static_cast<std::size_t>(y) * width + x) * 3]; }
};

Image read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& img);

using Rgb = std::array<double, 3>;  // 0..255

/// Mean colour per brick; nullopt for bricks with no visible voxel (occluded).
/// Throws Error(dimension_mismatch) if the image is not atlas-sized.
std::vector<std::optional<Rgb>> aggregate_colors(const BrickStructure& s, const Image& texture,
                                                 const FaceAtlas& atlas);

struct PaletteEntry {
  int id = 0;
  std::string name;
  std::array<std::uint8_t, 3> rgb{};
};

class Palette {
 public:
  Palette() = default;
  explicit Palette(std::vector<PaletteEntry> entries);

  /// CSV rows `id,name,hex` (hex as RRGGBB or #RRGGBB); a header row is allowed.
  static Palette from_csv(std::istream& in);
  static Palette from_csv_file(const std::filesystem::path& path);

  const std::vector<PaletteEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<PaletteEntry> entries_;  // ascending id
};

std::array<double, 3> srgb_to_lab(const Rgb& rgb);

/// Nearest entry in CIELAB (D65); ties go to the lowest id.
const PaletteEntry& snap_to_palette(const Rgb& rgb, const Palette& palette);

/// LDraw colour code per brick; occluded bricks get the inherit code 16.
std::vector<int> brick_color_codes(const BrickStructure& s, const Image& texture, const FaceAtlas& atlas,
                                   const Palette& palette);

}  // namespace brickgen
