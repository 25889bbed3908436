#include "brickgen/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace brickgen {

// VoxelGrid -------------------------------------------------------------------

VoxelGrid::VoxelGrid(int H, int W, int D) : H_(H), W_(W), D_(D) {
  if (H < 1 || W < 1 || D < 1) throw Error(ErrorCode::degenerate_extent, "voxel grid dims must be >= 1");
  bits_.assign(static_cast<std::size_t>(H) * W * D, 0);
}

Voxel VoxelGrid::voxel_at(std::size_t idx) const {
  const auto hw = static_cast<std::size_t>(H_) * W_;
  return {static_cast<int>(idx % H_), static_cast<int>((idx % hw) / H_), static_cast<int>(idx / hw)};
}

std::size_t VoxelGrid::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<Voxel> VoxelGrid::occupied() const {
  std::vector<Voxel> out;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) out.push_back(voxel_at(i));
  }
  return out;
}

// Occupancy -------------------------------------------------------------------

OccupancyMap::OccupancyMap(const GridWorld& grid) : grid_(grid), owner_(grid.cell_count(), -1) {}

OccupancyMap OccupancyMap::build(const BrickStructure& s) {
  OccupancyMap occ(s.grid);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Brick& b = s.bricks[i];
    int hit = occ.first_overlap(b);
    if (hit >= 0) {
      throw CollisionError(hit, static_cast<int>(i),
                           "bricks " + std::to_string(hit) + " and " + std::to_string(i) + " overlap");
    }
    occ.place(b, static_cast<int>(i));
  }
  return occ;
}

int OccupancyMap::owner(int x, int y, int z) const {
  if (!grid_.contains(x, y, z)) return -1;
  return owner_[static_cast<std::size_t>(x) + static_cast<std::size_t>(grid_.H) * (y + static_cast<std::size_t>(grid_.W) * z)];
}

int OccupancyMap::first_overlap(const Brick& b) const {
  int best = -1;
  for (int j = b.y; j < b.y_end(); ++j) {
    for (int i = b.x; i < b.x_end(); ++i) {
      int o = owner(i, j, b.z);
      if (o >= 0 && (best < 0 || o < best)) best = o;
    }
  }
  return best;
}

void OccupancyMap::place(const Brick& b, int index) {
  for (const auto& v : brick_voxels(b)) {
    owner_[static_cast<std::size_t>(v.x) + static_cast<std::size_t>(grid_.H) * (v.y + static_cast<std::size_t>(grid_.W) * v.z)] = index;
  }
}

void OccupancyMap::remove(const Brick& b) { place(b, -1); }

VoxelGrid occupancy_grid(const BrickStructure& s) {
  auto occ = OccupancyMap::build(s);  // throws on collision
  (void)occ;
  VoxelGrid g(s.grid);
  for (const auto& b : s.bricks) {
    for (const auto& v : brick_voxels(b)) g.set(v.x, v.y, v.z);
  }
  return g;
}

const char* to_string(InvalidKind k) {
  switch (k) {
    case InvalidKind::malformed: return "Malformed";
    case InvalidKind::not_in_library: return "NotInLibrary";
    case InvalidKind::out_of_bounds: return "OutOfBounds";
    case InvalidKind::collision: return "Collision";
  }
  return "Unknown";
}

ValidityResult check_brick_validity(const RawBrick& raw, const OccupancyMap& occ, int proposed_index,
                                    const BrickLibrary& library) {
  const BrickDims dims{raw.h, raw.w};
  if (!library.contains(dims)) return ValidityResult::fail(InvalidKind::not_in_library);
  const GridWorld& g = occ.grid();
  if (raw.x < 0 || raw.y < 0 || raw.z < 0 || raw.x + raw.h > g.H || raw.y + raw.w > g.W || raw.z >= g.D) {
    return ValidityResult::fail(InvalidKind::out_of_bounds);
  }
  Brick b{dims, raw.x, raw.y, raw.z};
  int hit = occ.first_overlap(b);
  if (hit >= 0) {
    ValidityResult r = ValidityResult::fail(InvalidKind::collision);
    r.colliding = std::make_pair(hit, proposed_index);
    return r;
  }
  return ValidityResult::ok();
}

ValidityResult check_brick_validity(const RawBrick& raw, const BrickStructure& s,
                                    const BrickLibrary& library) {
  OccupancyMap occ(s.grid);
  for (std::size_t i = 0; i < s.size(); ++i) occ.place(s.bricks[i], static_cast<int>(i));
  return check_brick_validity(raw, occ, static_cast<int>(s.size()), library);
}

ValidityResult check_brick_validity(std::string_view line, const BrickStructure& s, ParseOptions opts,
                                    const BrickLibrary& library) {
  auto raw = match_brick_line(line, opts);
  if (!raw) return ValidityResult::fail(InvalidKind::malformed);
  return check_brick_validity(*raw, s, library);
}

// Connections -------------------------------------------------------------------

std::vector<Connection> connections(const BrickStructure& s) {
  OccupancyMap occ(s.grid);
  for (std::size_t i = 0; i < s.size(); ++i) occ.place(s.bricks[i], static_cast<int>(i));
  std::vector<Connection> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Brick& b = s.bricks[i];
    if (b.z == 0) {
      Connection c{static_cast<int>(i), kBaseplate, {}};
      for (int y = b.y; y < b.y_end(); ++y)
        for (int x = b.x; x < b.x_end(); ++x) c.knobs.push_back({x, y});
      out.push_back(std::move(c));
      continue;
    }
    std::map<int, std::vector<Stud>> below;
    for (int y = b.y; y < b.y_end(); ++y) {
      for (int x = b.x; x < b.x_end(); ++x) {
        int o = occ.owner(x, y, b.z - 1);
        if (o >= 0) below[o].push_back({x, y});
      }
    }
    for (auto& [lower, knobs] : below) {
      out.push_back({static_cast<int>(i), lower, std::move(knobs)});
    }
  }
  return out;
}

std::vector<SideContact> side_contacts(const BrickStructure& s) {
  OccupancyMap occ(s.grid);
  for (std::size_t i = 0; i < s.size(); ++i) occ.place(s.bricks[i], static_cast<int>(i));
  std::vector<SideContact> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Brick& b = s.bricks[i];
    std::map<int, SideContact> by_x, by_y;
    for (int y = b.y; y < b.y_end(); ++y) {
      int o = occ.owner(b.x_end(), y, b.z);
      if (o >= 0) {
        auto& c = by_x[o];
        c.a = static_cast<int>(i);
        c.b = o;
        c.axis = Axis::x;
        c.cells.push_back({b.x_end() - 1, y, b.z});
      }
    }
    for (int x = b.x; x < b.x_end(); ++x) {
      int o = occ.owner(x, b.y_end(), b.z);
      if (o >= 0) {
        auto& c = by_y[o];
        c.a = static_cast<int>(i);
        c.b = o;
        c.axis = Axis::y;
        c.cells.push_back({x, b.y_end() - 1, b.z});
      }
    }
    for (auto& [_, c] : by_x) out.push_back(std::move(c));
    for (auto& [_, c] : by_y) out.push_back(std::move(c));
  }
  return out;
}

std::vector<std::vector<int>> connected_components(const BrickStructure& s) {
  std::vector<int> parent(s.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& c : connections(s)) {
    if (c.lower == kBaseplate) continue;
    int a = find(c.upper), b = find(c.lower);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::map<int, std::vector<int>> groups;
  for (std::size_t i = 0; i < s.size(); ++i) groups[find(static_cast<int>(i))].push_back(static_cast<int>(i));
  std::vector<std::vector<int>> out;
  for (auto& [_, g] : groups) out.push_back(std::move(g));
  return out;
}

// Meshes -------------------------------------------------------------------------

Mesh load_obj(std::istream& in) {
  Mesh m;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    if (tag == "v") {
      std::array<double, 3> v{};
      if (!(ss >> v[0] >> v[1] >> v[2])) throw LineError(ErrorCode::schema_violation, line_no, "bad vertex");
      for (double c : v) {
        if (!std::isfinite(c)) throw LineError(ErrorCode::schema_violation, line_no, "non-finite vertex");
      }
      m.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ss >> tok) {
        int i = 0;
        try {
          i = std::stoi(tok.substr(0, tok.find('/')));
        } catch (const std::logic_error&) {
          throw LineError(ErrorCode::schema_violation, line_no, "bad face index");
        }
        int n = static_cast<int>(m.vertices.size());
        int resolved = i > 0 ? i - 1 : n + i;
        if (i == 0 || resolved < 0 || resolved >= n) {
          throw LineError(ErrorCode::schema_violation, line_no, "face index out of range");
        }
        idx.push_back(resolved);
      }
      if (idx.size() < 3) throw LineError(ErrorCode::schema_violation, line_no, "face with < 3 vertices");
      for (std::size_t k = 1; k + 1 < idx.size(); ++k) m.triangles.push_back({idx[0], idx[k], idx[k + 1]});
    }
  }
  return m;
}

Mesh load_obj_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open mesh " + path.string());
  return load_obj(in);
}

namespace {

using Vec3 = std::array<double, 3>;

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

}  // namespace

bool triangle_box_overlap(const Vec3& center, const Vec3& half, const std::array<Vec3, 3>& tri) {
  const Vec3 v0 = sub(tri[0], center), v1 = sub(tri[1], center), v2 = sub(tri[2], center);
  const Vec3 edges[3] = {sub(v1, v0), sub(v2, v1), sub(v0, v2)};
  auto separated = [&](const Vec3& axis) {
    double p0 = dot(v0, axis), p1 = dot(v1, axis), p2 = dot(v2, axis);
    double r = half[0] * std::abs(axis[0]) + half[1] * std::abs(axis[1]) + half[2] * std::abs(axis[2]);
    double lo = std::min({p0, p1, p2}), hi = std::max({p0, p1, p2});
    return lo > r || hi < -r;
  };
  for (int k = 0; k < 3; ++k) {
    Vec3 axis{0, 0, 0};
    axis[k] = 1.0;
    if (separated(axis)) return false;
  }
  Vec3 n = cross(edges[0], edges[1]);
  if (dot(n, n) > 0 && separated(n)) return false;
  for (const auto& e : edges) {
    for (int k = 0; k < 3; ++k) {
      Vec3 u{0, 0, 0};
      u[k] = 1.0;
      Vec3 axis = cross(u, e);
      if (dot(axis, axis) > 1e-24 && separated(axis)) return false;
    }
  }
  return true;
}

VoxelGrid fill_interior(const VoxelGrid& surface) {
  const int H = surface.H() + 2, W = surface.W() + 2, D = surface.D() + 2;
  auto pidx = [&](int x, int y, int z) {
    return static_cast<std::size_t>(x) + static_cast<std::size_t>(H) * (y + static_cast<std::size_t>(W) * z);
  };
  std::vector<std::uint8_t> outside(static_cast<std::size_t>(H) * W * D, 0);
  std::deque<std::array<int, 3>> queue;
  outside[pidx(0, 0, 0)] = 1;
  queue.push_back({0, 0, 0});
  static const int nb[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  while (!queue.empty()) {
    auto [x, y, z] = queue.front();
    queue.pop_front();
    for (const auto& d : nb) {
      int nx = x + d[0], ny = y + d[1], nz = z + d[2];
      if (nx < 0 || ny < 0 || nz < 0 || nx >= H || ny >= W || nz >= D) continue;
      auto k = pidx(nx, ny, nz);
      if (outside[k]) continue;
      if (surface.get(nx - 1, ny - 1, nz - 1)) continue;
      outside[k] = 1;
      queue.push_back({nx, ny, nz});
    }
  }
  VoxelGrid solid(surface.H(), surface.W(), surface.D());
  for (int z = 0; z < surface.D(); ++z)
    for (int y = 0; y < surface.W(); ++y)
      for (int x = 0; x < surface.H(); ++x)
        if (!outside[pidx(x + 1, y + 1, z + 1)]) solid.set(x, y, z);
  return solid;
}

VoxelGrid voxelize_mesh(const Mesh& mesh, const GridWorld& grid) {
  if (mesh.triangles.empty() || mesh.vertices.empty()) throw Error(ErrorCode::empty_mesh, "mesh has no triangles");
  Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()};
  Vec3 hi{-lo[0], -lo[1], -lo[2]};
  for (const auto& t : mesh.triangles) {
    for (int k : t) {
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], mesh.vertices[k][a]);
        hi[a] = std::max(hi[a], mesh.vertices[k][a]);
      }
    }
  }
  const double dims[3] = {static_cast<double>(grid.H), static_cast<double>(grid.W), static_cast<double>(grid.D)};
  double scale = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    double ext = hi[a] - lo[a];
    if (ext > 0) scale = std::min(scale, dims[a] / ext);
  }
  if (!std::isfinite(scale)) throw Error(ErrorCode::degenerate_extent, "mesh has zero extent");
  // Shrink slightly so faces never sit exactly on the grid boundary planes.
  constexpr double kShrink = 1e-6;
  scale *= 1.0 - kShrink;
  const double cx = 0.5 * (lo[0] + hi[0]), cy = 0.5 * (lo[1] + hi[1]);
  const double z_lift = 0.5 * kShrink * dims[2];
  auto map = [&](const Vec3& v) -> Vec3 {
    return {(v[0] - cx) * scale + 0.5 * dims[0], (v[1] - cy) * scale + 0.5 * dims[1],
            (v[2] - lo[2]) * scale + z_lift};
  };

  VoxelGrid surface(grid);
  const Vec3 half{0.5, 0.5, 0.5};
  for (const auto& t : mesh.triangles) {
    std::array<Vec3, 3> tri{map(mesh.vertices[t[0]]), map(mesh.vertices[t[1]]), map(mesh.vertices[t[2]])};
    int lo_i[3], hi_i[3];
    const int limits[3] = {grid.H, grid.W, grid.D};
    for (int a = 0; a < 3; ++a) {
      double mn = std::min({tri[0][a], tri[1][a], tri[2][a]});
      double mx = std::max({tri[0][a], tri[1][a], tri[2][a]});
      lo_i[a] = std::clamp(static_cast<int>(std::floor(mn)), 0, limits[a] - 1);
      hi_i[a] = std::clamp(static_cast<int>(std::floor(mx)), 0, limits[a] - 1);
    }
    for (int z = lo_i[2]; z <= hi_i[2]; ++z)
      for (int y = lo_i[1]; y <= hi_i[1]; ++y)
        for (int x = lo_i[0]; x <= hi_i[0]; ++x) {
          if (surface.get(x, y, z)) continue;
          if (triangle_box_overlap({x + 0.5, y + 0.5, z + 0.5}, half, tri)) surface.set(x, y, z);
        }
  }
  return fill_interior(surface);
}

// Distances --------------------------------------------------------------------

namespace {

// Felzenszwalb-Huttenlocher 1-D squared distance transform over `f` (in place).
void edt_1d(std::vector<double>& f, std::vector<double>& d, std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  constexpr double inf = std::numeric_limits<double>::infinity();
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == inf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      continue;
    }
    auto meet = [&](int p) { return ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p); };
    double s = meet(v[k]);
    while (s <= z[k]) {  // z[0] is -inf, so k never drops below 0
      --k;
      s = meet(v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  if (k < 0) {
    std::fill(d.begin(), d.begin() + n, inf);
  } else {
    int j = 0;
    for (int q = 0; q < n; ++q) {
      while (z[j + 1] < q) ++j;
      double dq = q - v[j];
      d[q] = dq * dq + f[v[j]];
    }
  }
  std::copy(d.begin(), d.begin() + n, f.begin());
}

}  // namespace

std::vector<double> squared_distance_field(const VoxelGrid& g) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const int H = g.H(), W = g.W(), D = g.D();
  std::vector<double> field(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) field[i] = g.get(i) ? 0.0 : inf;
  const int n = std::max({H, W, D});
  std::vector<double> line(n), d(n), z(n + 1);
  std::vector<int> v(n);
  auto pass = [&](int len, auto&& at) {
    line.resize(len);
    for (int q = 0; q < len; ++q) line[q] = field[at(q)];
    edt_1d(line, d, v, z);
    for (int q = 0; q < len; ++q) field[at(q)] = line[q];
  };
  for (int zz = 0; zz < D; ++zz)
    for (int y = 0; y < W; ++y) pass(H, [&](int q) { return g.index(q, y, zz); });
  for (int zz = 0; zz < D; ++zz)
    for (int x = 0; x < H; ++x) pass(W, [&](int q) { return g.index(x, q, zz); });
  for (int y = 0; y < W; ++y)
    for (int x = 0; x < H; ++x) pass(D, [&](int q) { return g.index(x, y, q); });
  return field;
}

double chamfer_distance(const VoxelGrid& a, const VoxelGrid& b) {
  if (!a.same_dims(b)) throw Error(ErrorCode::dimension_mismatch, "chamfer: grid dimensions differ");
  if (a.empty() || b.empty()) throw Error(ErrorCode::empty_grid, "chamfer: empty grid");
  const auto da = squared_distance_field(a);
  const auto db = squared_distance_field(b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.get(i)) sum += std::sqrt(db[i]);
    if (b.get(i)) sum += std::sqrt(da[i]);
  }
  return sum;
}

// Voxel files -------------------------------------------------------------------

void write_voxels_rle(std::ostream& out, const VoxelGrid& g) {
  out << "BGRLE1 " << g.H() << ' ' << g.W() << ' ' << g.D() << '\n';
  std::uint8_t current = 0;
  std::size_t run = 0;
  int on_line = 0;
  auto emit = [&](std::size_t r) {
    out << r;
    if (++on_line == 20) {
      out << '\n';
      on_line = 0;
    } else {
      out << ' ';
    }
  };
  for (std::size_t i = 0; i < g.size(); ++i) {
    std::uint8_t bit = g.get(i) ? 1 : 0;
    if (bit != current) {
      emit(run);
      run = 0;
      current = bit;
    }
    ++run;
  }
  emit(run);
  out << '\n';
}

void write_voxels_raw(std::ostream& out, const VoxelGrid& g) {
  out << "BGVOX1 " << g.H() << ' ' << g.W() << ' ' << g.D() << '\n';
  std::vector<char> bytes((g.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.get(i)) bytes[i / 8] = static_cast<char>(bytes[i / 8] | (1 << (i % 8)));
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

VoxelGrid read_voxels(std::istream& in) {
  std::string magic;
  int H = 0, W = 0, D = 0;
  if (!(in >> magic >> H >> W >> D)) throw Error(ErrorCode::schema_violation, "voxel file: bad header");
  if (H < 1 || W < 1 || D < 1 || H > 4096 || W > 4096 || D > 4096) {
    throw Error(ErrorCode::schema_violation, "voxel file: bad dimensions");
  }
  VoxelGrid g(H, W, D);
  if (magic == "BGRLE1") {
    std::size_t pos = 0;
    std::size_t run = 0;
    bool bit = false;
    while (in >> run) {
      if (pos + run > g.size()) throw Error(ErrorCode::schema_violation, "voxel file: runs overflow grid");
      if (bit) {
        for (std::size_t k = 0; k < run; ++k) g.set(pos + k);
      }
      pos += run;
      bit = !bit;
    }
    if (pos != g.size()) throw Error(ErrorCode::schema_violation, "voxel file: runs do not cover grid");
  } else if (magic == "BGVOX1") {
    in.get();  // the newline after the header
    std::vector<char> bytes((g.size() + 7) / 8);
    if (!in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
      throw Error(ErrorCode::schema_violation, "voxel file: truncated bitset");
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (bytes[i / 8] & (1 << (i % 8))) g.set(i);
    }
  } else {
    throw Error(ErrorCode::schema_violation, "voxel file: unknown magic '" + magic + "'");
  }
  return g;
}

VoxelGrid load_voxels(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open voxel file " + path.string());
  return read_voxels(in);
}

void save_voxels(const std::filesystem::path& path, const VoxelGrid& g, bool raw) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write voxel file " + path.string());
  if (raw) {
    write_voxels_raw(out, g);
  } else {
    write_voxels_rle(out, g);
  }
}

VoxelGrid load_shape(const std::filesystem::path& path, const GridWorld& grid) {
  if (path.extension() == ".obj") return voxelize_mesh(load_obj_file(path), grid);
  return load_voxels(path);
}

}  // namespace brickgen
