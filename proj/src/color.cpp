#include "brickgen/color.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <png.h>

#include "brickgen/geometry.hpp"
#include "brickgen/textio.hpp"

namespace brickgen {

namespace {

constexpr int kStep[kFaceCount][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};

bool occupied(const OccupancyMap& occ, int x, int y, int z) {
  return occ.grid().contains(x, y, z) && occ.owner(x, y, z) >= 0;
}

}  // namespace

std::vector<int> occluded_bricks(const BrickStructure& s) {
  const OccupancyMap occ = OccupancyMap::build(s);
  std::vector<int> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Brick& b = s.bricks[i];
    bool covered = true;
    for (const Voxel& v : brick_voxels(b)) {
      for (const auto& d : kStep) {
        int nx = v.x + d[0], ny = v.y + d[1], nz = v.z + d[2];
        if (b.covers(nx, ny, nz)) continue;
        if (!occupied(occ, nx, ny, nz)) {
          covered = false;
          break;
        }
      }
      if (!covered) break;
    }
    if (covered) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<VoxelFaces> visible_faces(const BrickStructure& s, bool baseplate_covers) {
  const OccupancyMap occ = OccupancyMap::build(s);
  const GridWorld& g = s.grid;
  std::vector<VoxelFaces> out;
  for (int z = 0; z < g.D; ++z)
    for (int y = 0; y < g.W; ++y)
      for (int x = 0; x < g.H; ++x) {
        int owner = occ.owner(x, y, z);
        if (owner < 0) continue;
        VoxelFaces vf{{x, y, z}, owner, {}};
        for (int f = 0; f < kFaceCount; ++f) {
          int nx = x + kStep[f][0], ny = y + kStep[f][1], nz = z + kStep[f][2];
          if (nz < 0 && baseplate_covers) continue;
          if (!occupied(occ, nx, ny, nz)) vf.faces.push_back(static_cast<Face>(f));
        }
        out.push_back(std::move(vf));
      }
  return out;
}

nlohmann::json FaceAtlas::to_json() const {
  nlohmann::json regs = nlohmann::json::array();
  for (const auto& r : regions) {
    regs.push_back({{"voxel", {r.voxel.x, r.voxel.y, r.voxel.z}},
                    {"face", static_cast<int>(r.face)},
                    {"brick", r.brick},
                    {"x", r.x},
                    {"y", r.y},
                    {"size", r.size}});
  }
  return {{"width", width}, {"height", height}, {"cell", cell}, {"regions", regs}};
}

FaceAtlas build_face_atlas(const BrickStructure& s, const AtlasOptions& opts, bool baseplate_covers) {
  if (opts.cell < 1 || opts.columns < 1) throw Error(ErrorCode::precondition, "atlas cell and columns must be positive");
  FaceAtlas atlas;
  atlas.cell = opts.cell;
  std::size_t k = 0;
  for (const VoxelFaces& vf : visible_faces(s, baseplate_covers)) {
    for (Face f : vf.faces) {
      int col = static_cast<int>(k % opts.columns);
      int row = static_cast<int>(k / opts.columns);
      atlas.regions.push_back({vf.voxel, f, vf.brick, col * opts.cell, row * opts.cell, opts.cell});
      ++k;
    }
  }
  if (k == 0) return atlas;
  const long rows = static_cast<long>((k + opts.columns - 1) / opts.columns);
  if (rows * opts.cell > opts.max_height) {
    throw Error(ErrorCode::atlas_overflow, std::to_string(k) + " faces do not fit an atlas of height " +
                                              std::to_string(opts.max_height));
  }
  atlas.width = static_cast<int>(std::min<std::size_t>(k, opts.columns)) * opts.cell;
  atlas.height = static_cast<int>(rows) * opts.cell;
  return atlas;
}

// PNG -----------------------------------------------------------------------

Image read_png(const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.string().c_str())) {
    throw Error(ErrorCode::io, "cannot read PNG " + path.string() + ": " + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  Image out(static_cast<int>(img.width), static_cast<int>(img.height));
  if (!png_image_finish_read(&img, nullptr, out.rgb.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    throw Error(ErrorCode::io, "cannot decode PNG " + path.string() + ": " + msg);
  }
  return out;
}

void write_png(const std::filesystem::path& path, const Image& src) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(src.width);
  img.height = static_cast<png_uint_32>(src.height);
  img.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.string().c_str(), 0, src.rgb.data(), 0, nullptr)) {
    throw Error(ErrorCode::io, "cannot write PNG " + path.string() + ": " + img.message);
  }
}

// Aggregation ---------------------------------------------------------------

std::vector<std::optional<Rgb>> aggregate_colors(const BrickStructure& s, const Image& texture,
                                                 const FaceAtlas& atlas) {
  if (texture.width != atlas.width || texture.height != atlas.height) {
    throw Error(ErrorCode::dimension_mismatch,
                "texture is " + std::to_string(texture.width) + "x" + std::to_string(texture.height) +
                    ", atlas is " + std::to_string(atlas.width) + "x" + std::to_string(atlas.height));
  }
  // Face means, grouped by voxel (regions are voxel-major).
  std::vector<Rgb> sum(s.size(), Rgb{0, 0, 0});
  std::vector<int> voxels(s.size(), 0);
  std::size_t i = 0;
  while (i < atlas.regions.size()) {
    const AtlasRegion& first = atlas.regions[i];
    Rgb vsum{0, 0, 0};
    int faces = 0;
    for (; i < atlas.regions.size() && atlas.regions[i].voxel == first.voxel; ++i) {
      const AtlasRegion& r = atlas.regions[i];
      Rgb fsum{0, 0, 0};
      for (int y = r.y; y < r.y + r.size; ++y)
        for (int x = r.x; x < r.x + r.size; ++x) {
          const std::uint8_t* p = texture.at(x, y);
          for (int c = 0; c < 3; ++c) fsum[c] += p[c];
        }
      const double n = static_cast<double>(r.size) * r.size;
      for (int c = 0; c < 3; ++c) vsum[c] += fsum[c] / n;
      ++faces;
    }
    if (first.brick < 0 || static_cast<std::size_t>(first.brick) >= s.size()) {
      throw Error(ErrorCode::dimension_mismatch, "atlas refers to a brick outside the structure");
    }
    for (int c = 0; c < 3; ++c) sum[first.brick][c] += vsum[c] / faces;
    ++voxels[first.brick];
  }
  std::vector<std::optional<Rgb>> out(s.size());
  for (std::size_t b = 0; b < s.size(); ++b) {
    if (voxels[b] == 0) continue;
    out[b] = Rgb{sum[b][0] / voxels[b], sum[b][1] / voxels[b], sum[b][2] / voxels[b]};
  }
  return out;
}

// Palette -------------------------------------------------------------------

Palette::Palette(std::vector<PaletteEntry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw Error(ErrorCode::schema_violation, "palette is empty");
  std::sort(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (entries_[i].id == entries_[i - 1].id) {
      throw Error(ErrorCode::schema_violation, "duplicate palette id " + std::to_string(entries_[i].id));
    }
  }
}

Palette Palette::from_csv(std::istream& in) {
  std::vector<PaletteEntry> entries;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string id, name, hex;
    if (!std::getline(ss, id, ',') || !std::getline(ss, name, ',') || !std::getline(ss, hex)) {
      throw LineError(ErrorCode::schema_violation, n, "expected id,name,hex");
    }
    if (n == 1 && id == "id") continue;
    if (!hex.empty() && hex[0] == '#') hex.erase(0, 1);
    PaletteEntry e;
    try {
      std::size_t used = 0;
      e.id = std::stoi(id, &used);
      if (used != id.size() || hex.size() != 6 || hex.find_first_not_of("0123456789abcdefABCDEF") != std::string::npos) {
        throw std::invalid_argument("bad field");
      }
    } catch (const std::exception&) {
      throw LineError(ErrorCode::schema_violation, n, "bad palette row: " + line);
    }
    for (int c = 0; c < 3; ++c) e.rgb[c] = static_cast<std::uint8_t>(std::stoi(hex.substr(2 * c, 2), nullptr, 16));
    e.name = name;
    entries.push_back(std::move(e));
  }
  return Palette(std::move(entries));
}

Palette Palette::from_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open palette " + path.string());
  return from_csv(in);
}

std::array<double, 3> srgb_to_lab(const Rgb& rgb) {
  double lin[3];
  for (int c = 0; c < 3; ++c) {
    double v = rgb[c] / 255.0;
    lin[c] = v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
  }
  const double X = 0.4124564 * lin[0] + 0.3575761 * lin[1] + 0.1804375 * lin[2];
  const double Y = 0.2126729 * lin[0] + 0.7151522 * lin[1] + 0.0721750 * lin[2];
  const double Z = 0.0193339 * lin[0] + 0.1191920 * lin[1] + 0.9503041 * lin[2];
  auto f = [](double t) {
    constexpr double e = 216.0 / 24389.0, k = 24389.0 / 27.0;
    return t > e ? std::cbrt(t) : (k * t + 16.0) / 116.0;
  };
  const double fx = f(X / 0.95047), fy = f(Y / 1.0), fz = f(Z / 1.08883);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

const PaletteEntry& snap_to_palette(const Rgb& rgb, const Palette& palette) {
  if (palette.empty()) throw Error(ErrorCode::precondition, "palette is empty");
  const auto lab = srgb_to_lab(rgb);
  const PaletteEntry* best = nullptr;
  double best_d = 0;
  for (const auto& e : palette.entries()) {  // ascending id, strict < keeps the lowest on ties
    const auto p = srgb_to_lab({double(e.rgb[0]), double(e.rgb[1]), double(e.rgb[2])});
    double d = 0;
    for (int c = 0; c < 3; ++c) d += (lab[c] - p[c]) * (lab[c] - p[c]);
    if (!best || d < best_d) {
      best = &e;
      best_d = d;
    }
  }
  return *best;
}

std::vector<int> brick_color_codes(const BrickStructure& s, const Image& texture, const FaceAtlas& atlas,
                                   const Palette& palette) {
  std::vector<int> codes;
  for (const auto& c : aggregate_colors(s, texture, atlas)) {
    codes.push_back(c ? snap_to_palette(*c, palette).id : kLDrawInheritColor);
  }
  return codes;
}

}  // namespace brickgen
