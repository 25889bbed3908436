#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>

#include "brickgen/geometry.hpp"
#include "oracles/brute_geometry.hpp"

using namespace brickgen;

namespace {
const GridWorld kGrid{};
const std::string T(kTimes);

VoxelGrid random_grid(std::mt19937_64& rng, int H, int W, int D, double p) {
  VoxelGrid g(H, W, D);
  std::bernoulli_distribution on(p);
  for (std::size_t i = 0; i < g.size(); ++i) g.set(i, on(rng));
  return g;
}

Mesh cube_mesh(double lo, double hi) {
  Mesh m;
  for (int k = 0; k < 8; ++k) m.vertices.push_back({k & 1 ? hi : lo, k & 2 ? hi : lo, k & 4 ? hi : lo});
  const int quads[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  for (const auto& q : quads) {
    m.triangles.push_back({q[0], q[1], q[2]});
    m.triangles.push_back({q[0], q[2], q[3]});
  }
  return m;
}

// Same placement the voxelizer documents: uniform fit, centred in X/Y, resting on z = 0.
Mesh placed(const Mesh& in, const GridWorld& g) {
  std::array<double, 3> lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  for (const auto& v : in.vertices)
    for (int a = 0; a < 3; ++a) lo[a] = std::min(lo[a], v[a]), hi[a] = std::max(hi[a], v[a]);
  const double dims[3] = {double(g.H), double(g.W), double(g.D)};
  double s = 1e300;
  for (int a = 0; a < 3; ++a)
    if (hi[a] > lo[a]) s = std::min(s, dims[a] / (hi[a] - lo[a]));
  Mesh out = in;
  for (auto& v : out.vertices) {
    v = {(v[0] - 0.5 * (lo[0] + hi[0])) * s + 0.5 * dims[0], (v[1] - 0.5 * (lo[1] + hi[1])) * s + 0.5 * dims[1],
         (v[2] - lo[2]) * s};
  }
  return out;
}
}  // namespace

TEST(Occupancy, Examples) {
  BrickStructure one{kGrid, {{{2, 4}, 0, 0, 0}}};
  EXPECT_EQ(occupancy_grid(one).count(), 8u);
  BrickStructure clash{kGrid, {{{2, 4}, 0, 0, 0}, {{1, 1}, 1, 1, 0}}};
  try {
    OccupancyMap::build(clash);
    FAIL();
  } catch (const CollisionError& e) {
    EXPECT_EQ(e.first(), 0);
    EXPECT_EQ(e.second(), 1);
  }
  BrickStructure two{kGrid, {{{2, 4}, 0, 0, 0}, {{2, 4}, 0, 0, 1}}};
  EXPECT_EQ(occupancy_grid(two).count(), 16u);
}

TEST(Validity, Examples) {
  BrickStructure base{kGrid, {{{2, 2}, 0, 0, 0}}};
  EXPECT_TRUE(check_brick_validity("1" + T + "2 (0,0,1)", base).valid);
  EXPECT_TRUE(check_brick_validity("1" + T + "2 (0,0,5)", base).valid);
  auto oob = check_brick_validity("6" + T + "2 (18,0,0)", base);
  EXPECT_FALSE(oob.valid);
  EXPECT_EQ(oob.kind, InvalidKind::out_of_bounds);
  auto lib = check_brick_validity("3" + T + "3 (5,5,0)", base);
  EXPECT_EQ(lib.kind, InvalidKind::not_in_library);
  auto bad = check_brick_validity("nonsense", base);
  EXPECT_EQ(bad.kind, InvalidKind::malformed);
  auto col = check_brick_validity("1" + T + "1 (1,1,0)", base);
  EXPECT_EQ(col.kind, InvalidKind::collision);
  ASSERT_TRUE(col.colliding.has_value());
  EXPECT_EQ(col.colliding->first, 0);
  EXPECT_EQ(col.colliding->second, 1);
}

TEST(Validity, IncrementalMatchesFullCheck) {
  std::mt19937_64 rng(3);
  auto dims = BrickLibrary::standard().oriented();
  BrickStructure s{kGrid, {}};
  OccupancyMap occ(kGrid);
  for (int i = 0; i < 2000; ++i) {
    BrickDims d = dims[rng() % dims.size()];
    RawBrick raw{d.h, d.w, static_cast<int>(rng() % 22) - 1, static_cast<int>(rng() % 22) - 1,
                 static_cast<int>(rng() % 4)};
    auto full = check_brick_validity(raw, s);
    auto inc = check_brick_validity(raw, occ, static_cast<int>(s.size()));
    ASSERT_EQ(full.valid, inc.valid);
    ASSERT_EQ(full.kind, inc.kind);
    if (full.valid) {
      Brick b{d, raw.x, raw.y, raw.z};
      occ.place(b, static_cast<int>(s.size()));
      s.bricks.push_back(b);
    }
  }
  EXPECT_NO_THROW(OccupancyMap::build(s));
}

TEST(Connections, Examples) {
  auto c1 = connections({kGrid, {{{2, 4}, 0, 0, 0}}});
  ASSERT_EQ(c1.size(), 1u);
  EXPECT_EQ(c1[0].lower, kBaseplate);
  EXPECT_EQ(c1[0].knobs.size(), 8u);

  auto c2 = connections({kGrid, {{{1, 1}, 0, 0, 0}, {{1, 4}, 0, 0, 1}}});
  ASSERT_EQ(c2.size(), 2u);
  EXPECT_EQ(c2[1].upper, 1);
  EXPECT_EQ(c2[1].lower, 0);
  EXPECT_EQ(c2[1].knobs, (std::vector<Stud>{{0, 0}}));

  EXPECT_TRUE(connections({kGrid, {{{1, 4}, 0, 0, 1}}}).empty());
}

TEST(Components, Examples) {
  EXPECT_EQ(connected_components({kGrid, {{{2, 2}, 0, 0, 0}, {{2, 2}, 0, 0, 1}}}).size(), 1u);
  EXPECT_EQ(connected_components({kGrid, {{{2, 2}, 0, 0, 0}, {{2, 2}, 10, 10, 0}}}).size(), 2u);
  // U: two posts bridged by a beam
  EXPECT_EQ(connected_components({kGrid, {{{1, 1}, 0, 0, 0}, {{1, 1}, 5, 0, 0}, {{6, 1}, 0, 0, 1}}}).size(), 1u);
}

TEST(SideContacts, FaceNeighbours) {
  auto sc = side_contacts({kGrid, {{{1, 2}, 0, 0, 0}, {{1, 2}, 1, 0, 0}, {{1, 1}, 0, 2, 0}}});
  ASSERT_EQ(sc.size(), 2u);
  int x_contacts = 0;
  for (const auto& c : sc) {
    if (c.axis == Axis::x) {
      ++x_contacts;
      EXPECT_EQ(c.cells.size(), 2u);
    } else {
      EXPECT_EQ(c.cells.size(), 1u);
    }
  }
  EXPECT_EQ(x_contacts, 1);
}

TEST(Voxelize, EmptyMeshThrows) {
  try {
    voxelize_mesh({}, kGrid);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::empty_mesh);
  }
}

TEST(Voxelize, UnitCubeFillsInscribedCube) {
  auto g = voxelize_mesh(cube_mesh(0, 1), kGrid);
  EXPECT_EQ(g.count(), 8000u);
  GridWorld wide{30, 20, 20};
  auto w = voxelize_mesh(cube_mesh(0, 1), wide);
  EXPECT_EQ(w.count(), 8000u);
  EXPECT_FALSE(w.get(4, 0, 0));
  EXPECT_TRUE(w.get(5, 0, 0));
  EXPECT_TRUE(w.get(24, 19, 19));
  EXPECT_FALSE(w.get(25, 0, 0));
}

TEST(Voxelize, SingleTriangleHasNoInterior) {
  Mesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0.5}};
  m.triangles = {{0, 1, 2}};
  auto g = voxelize_mesh(m, kGrid);
  Mesh p = placed(m, kGrid);
  std::array<std::array<double, 3>, 3> tri{p.vertices[0], p.vertices[1], p.vertices[2]};
  ASSERT_GT(g.count(), 0u);
  for (const auto& v : g.occupied()) {
    EXPECT_TRUE(triangle_box_overlap({v.x + 0.5, v.y + 0.5, v.z + 0.5}, {0.5 + 1e-6, 0.5 + 1e-6, 0.5 + 1e-6}, tri));
  }
}

TEST(Voxelize, TriangleBoxOverlapAgreesWithSampling) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0), b(0.0, 1.0);
  for (int trial = 0; trial < 3000; ++trial) {
    std::array<std::array<double, 3>, 3> tri;
    for (auto& v : tri) v = {u(rng), u(rng), u(rng)};
    bool sampled = false;
    for (int k = 0; k < 400 && !sampled; ++k) {
      double a = b(rng), c = b(rng);
      if (a + c > 1) a = 1 - a, c = 1 - c;
      std::array<double, 3> p;
      for (int i = 0; i < 3; ++i) p[i] = tri[0][i] + a * (tri[1][i] - tri[0][i]) + c * (tri[2][i] - tri[0][i]);
      sampled = std::abs(p[0]) < 0.5 && std::abs(p[1]) < 0.5 && std::abs(p[2]) < 0.5;
    }
    // A sampled interior point proves overlap; the converse is not checkable by sampling.
    if (sampled) ASSERT_TRUE(triangle_box_overlap({0, 0, 0}, {0.5, 0.5, 0.5}, tri));
    bool vertex_inside = false;
    for (const auto& v : tri) vertex_inside |= std::abs(v[0]) < 0.5 && std::abs(v[1]) < 0.5 && std::abs(v[2]) < 0.5;
    if (vertex_inside) ASSERT_TRUE(triangle_box_overlap({0, 0, 0}, {0.5, 0.5, 0.5}, tri));
  }
}

TEST(Voxelize, BundledMeshesAgreeWithPointInMesh) {
  for (const auto& e : std::filesystem::directory_iterator(std::filesystem::path(BRICKGEN_DATA_DIR) / "meshes")) {
    Mesh m = load_obj_file(e.path());
    auto g = voxelize_mesh(m, kGrid);
    Mesh p = placed(m, kGrid);
    std::size_t inside = 0;
    for (int z = 0; z < kGrid.D; ++z)
      for (int y = 0; y < kGrid.W; ++y)
        for (int x = 0; x < kGrid.H; ++x) {
          bool in = oracle::point_in_mesh(p, {x + 0.5, y + 0.5, z + 0.5});
          inside += in;
          if (in) ASSERT_TRUE(g.get(x, y, z)) << e.path() << " " << x << "," << y << "," << z;
          if (g.get(x, y, z) && !in) {
            // Occupied but outside: must be a surface voxel.
            bool touches = false;
            for (const auto& t : p.triangles) {
              if (triangle_box_overlap({x + 0.5, y + 0.5, z + 0.5}, {0.5 + 1e-6, 0.5 + 1e-6, 0.5 + 1e-6},
                                       {p.vertices[t[0]], p.vertices[t[1]], p.vertices[t[2]]})) {
                touches = true;
                break;
              }
            }
            ASSERT_TRUE(touches) << e.path() << " " << x << "," << y << "," << z;
          }
        }
    EXPECT_GT(inside, 0u) << e.path();
  }
}

TEST(FillInterior, HollowBoxIsFilled) {
  VoxelGrid shell(5, 5, 5);
  for (int z = 0; z < 5; ++z)
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 5; ++x)
        if (x == 0 || y == 0 || z == 0 || x == 4 || y == 4 || z == 4) shell.set(x, y, z);
  EXPECT_EQ(fill_interior(shell).count(), 125u);
  shell.set(0, 2, 2, false);  // opening
  EXPECT_EQ(fill_interior(shell).count(), 97u);  // 98 shell cells minus the opening; cavity drains
}

TEST(Chamfer, Examples) {
  VoxelGrid a(4, 4, 4), b(4, 4, 4);
  a.set(0, 0, 0);
  EXPECT_DOUBLE_EQ(chamfer_distance(a, a), 0.0);
  b.set(1, 0, 0);
  EXPECT_DOUBLE_EQ(chamfer_distance(a, b), 2.0);
}

TEST(Chamfer, MatchesBruteForceAndIsSymmetric) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    int H = 1 + rng() % 9, W = 1 + rng() % 9, D = 1 + rng() % 9;
    auto a = random_grid(rng, H, W, D, 0.15);
    auto b = random_grid(rng, H, W, D, 0.15);
    if (a.empty() || b.empty()) continue;
    double ref = oracle::brute_chamfer(a, b);
    ASSERT_NEAR(chamfer_distance(a, b), ref, 1e-9 * (1 + ref));
    ASSERT_NEAR(chamfer_distance(b, a), chamfer_distance(a, b), 1e-9 * (1 + ref));
    ASSERT_EQ(chamfer_distance(a, b) == 0.0, a == b);
  }
}

TEST(Chamfer, DistanceFieldMatchesBruteForce) {
  std::mt19937_64 rng(9);
  auto g = random_grid(rng, 7, 6, 5, 0.05);
  g.set(3, 3, 3);
  auto df = squared_distance_field(g);
  auto occ = g.occupied();
  for (std::size_t i = 0; i < g.size(); ++i) {
    Voxel v = g.voxel_at(i);
    double best = 1e300;
    for (const auto& o : occ) {
      double dx = v.x - o.x, dy = v.y - o.y, dz = v.z - o.z;
      best = std::min(best, dx * dx + dy * dy + dz * dz);
    }
    ASSERT_DOUBLE_EQ(df[i], best);
  }
}

TEST(VoxelFiles, RoundTripBothFormats) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = random_grid(rng, 1 + rng() % 20, 1 + rng() % 20, 1 + rng() % 20, 0.3);
    for (bool raw : {false, true}) {
      std::stringstream ss;
      raw ? write_voxels_raw(ss, g) : write_voxels_rle(ss, g);
      ASSERT_EQ(read_voxels(ss), g);
    }
  }
}

TEST(Obj, FanTriangulation) {
  std::istringstream in("# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\nf 1/1/1 2/2/2 3/3/3\n");
  Mesh m = load_obj(in);
  EXPECT_EQ(m.vertices.size(), 4u);
  EXPECT_EQ(m.triangles.size(), 3u);
}
