#include "brickgen/core.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>

namespace brickgen {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::dimension_not_in_library: return "DimensionNotInLibrary";
    case ErrorCode::out_of_bounds: return "OutOfBounds";
    case ErrorCode::malformed_line: return "MalformedLine";
    case ErrorCode::collision: return "Collision";
    case ErrorCode::empty_caption: return "EmptyCaption";
    case ErrorCode::unknown_part: return "UnknownPart";
    case ErrorCode::schema_violation: return "SchemaViolation";
    case ErrorCode::empty_mesh: return "EmptyMesh";
    case ErrorCode::degenerate_extent: return "DegenerateExtent";
    case ErrorCode::empty_grid: return "EmptyGrid";
    case ErrorCode::solver_failure: return "SolverFailure";
    case ErrorCode::unfillable_voxel: return "UnfillableVoxel";
    case ErrorCode::no_weak_region: return "NoWeakRegion";
    case ErrorCode::precondition: return "PreconditionViolation";
    case ErrorCode::transport: return "TransportError";
    case ErrorCode::auth: return "AuthError";
    case ErrorCode::rate_limited: return "RateLimited";
    case ErrorCode::malformed_caption_response: return "MalformedCaptionResponse";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::atlas_overflow: return "AtlasOverflow";
    case ErrorCode::empty_input: return "EmptyInput";
    case ErrorCode::empty_train_set: return "EmptyTrainSet";
    case ErrorCode::io: return "IoError";
  }
  return "Unknown";
}

BrickLibrary::BrickLibrary(std::vector<PartInfo> parts) : parts_(std::move(parts)) {
  for (const auto& p : parts_) {
    if (p.canonical.h < 1 || p.canonical.w < 1) {
      throw Error(ErrorCode::schema_violation, "brick library: non-positive dimensions");
    }
    oriented_.push_back(p.canonical);
    oriented_.push_back(p.canonical.rotated());
  }
  std::sort(oriented_.begin(), oriented_.end(), [](BrickDims a, BrickDims b) {
    if (a.area() != b.area()) return a.area() > b.area();
    return a < b;
  });
  oriented_.erase(std::unique(oriented_.begin(), oriented_.end()), oriented_.end());
}

const BrickLibrary& BrickLibrary::standard() {
  static const BrickLibrary library({
      {{1, 1}, "3005"},
      {{2, 1}, "3004"},
      {{4, 1}, "3010"},
      {{6, 1}, "3009"},
      {{8, 1}, "3008"},
      {{2, 2}, "3003"},
      {{4, 2}, "3001"},
      {{6, 2}, "2456"},
  });
  return library;
}

BrickLibrary BrickLibrary::from_csv(std::istream& in) {
  std::vector<PartInfo> parts;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::stringstream row(line);
    std::string h, w, id;
    if (!std::getline(row, h, ',') || !std::getline(row, w, ',') || !std::getline(row, id)) {
      throw LineError(ErrorCode::schema_violation, line_no, "expected canonical_h,canonical_w,ldraw_part_id");
    }
    if (h == "canonical_h") continue;
    try {
      parts.push_back({{std::stoi(h), std::stoi(w)}, id});
    } catch (const std::logic_error&) {
      throw LineError(ErrorCode::schema_violation, line_no, "non-integer brick dimension");
    }
  }
  if (parts.empty()) throw Error(ErrorCode::schema_violation, "brick library manifest is empty");
  return BrickLibrary(std::move(parts));
}

BrickLibrary BrickLibrary::from_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open brick library manifest " + path.string());
  return from_csv(in);
}

bool BrickLibrary::contains(BrickDims dims) const {
  return std::find(oriented_.begin(), oriented_.end(), dims) != oriented_.end();
}

const PartInfo* BrickLibrary::part_for(BrickDims dims) const {
  for (const auto& p : parts_) {
    if (p.canonical == dims || p.canonical.rotated() == dims) return &p;
  }
  return nullptr;
}

Brick new_brick(BrickDims dims, int x, int y, int z, const GridWorld& grid,
                const BrickLibrary& library) {
  if (!library.contains(dims)) {
    throw Error(ErrorCode::dimension_not_in_library,
                std::to_string(dims.h) + "x" + std::to_string(dims.w) + " is not in the brick library");
  }
  if (x < 0 || x + dims.h > grid.H) {
    throw OutOfBoundsError(Axis::x, "brick exceeds grid along X");
  }
  if (y < 0 || y + dims.w > grid.W) {
    throw OutOfBoundsError(Axis::y, "brick exceeds grid along Y");
  }
  if (z < 0 || z >= grid.D) {
    throw OutOfBoundsError(Axis::z, "brick exceeds grid along Z");
  }
  return Brick{dims, x, y, z};
}

std::vector<Voxel> brick_voxels(const Brick& brick) {
  std::vector<Voxel> out;
  out.reserve(static_cast<std::size_t>(brick.area()));
  for (int j = 0; j < brick.dims.w; ++j) {
    for (int i = 0; i < brick.dims.h; ++i) {
      out.push_back({brick.x + i, brick.y + j, brick.z});
    }
  }
  return out;
}

bool raster_less(const Brick& a, const Brick& b) {
  if (a.z != b.z) return a.z < b.z;
  if (a.y != b.y) return a.y < b.y;
  if (a.x != b.x) return a.x < b.x;
  return a.dims < b.dims;
}

void sort_raster(BrickStructure& s) {
  std::stable_sort(s.bricks.begin(), s.bricks.end(), raster_less);
}

}  // namespace brickgen
