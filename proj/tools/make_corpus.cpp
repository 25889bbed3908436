// Writes the bundled shape corpus: procedural voxel shapes plus a few
// triangle meshes that are voxelized on the way in.
//
//   make_corpus <data-dir>   -> <data-dir>/corpus/*.rle, <data-dir>/meshes/*.obj

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "brickgen/geometry.hpp"

using namespace brickgen;
namespace fs = std::filesystem;

namespace {

constexpr int N = 20;

VoxelGrid grid() { return VoxelGrid(N, N, N); }

void box(VoxelGrid& g, int x0, int y0, int z0, int x1, int y1, int z1, bool v = true) {
  for (int z = z0; z < z1; ++z)
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x)
        if (g.in_bounds(x, y, z)) g.set(x, y, z, v);
}

// Disc of radius r around (cx, cy) in voxel-center coordinates.
void disc(VoxelGrid& g, double cx, double cy, double r, int z0, int z1, bool v = true) {
  for (int z = z0; z < z1; ++z)
    for (int y = 0; y < N; ++y)
      for (int x = 0; x < N; ++x) {
        double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
        if (dx * dx + dy * dy <= r * r) g.set(x, y, z, v);
      }
}

VoxelGrid chair() {
  auto g = grid();
  box(g, 5, 5, 0, 7, 7, 5);
  box(g, 13, 5, 0, 15, 7, 5);
  box(g, 5, 13, 0, 7, 15, 5);
  box(g, 13, 13, 0, 15, 15, 5);
  box(g, 5, 5, 5, 15, 15, 7);
  box(g, 5, 13, 7, 15, 15, 16);
  return g;
}

VoxelGrid table() {
  auto g = grid();
  for (int x : {3, 15})
    for (int y : {4, 14}) box(g, x, y, 0, x + 2, y + 2, 7);
  box(g, 2, 3, 7, 18, 17, 9);
  return g;
}

VoxelGrid bench() {
  auto g = grid();
  box(g, 2, 8, 0, 4, 12, 4);
  box(g, 16, 8, 0, 18, 12, 4);
  box(g, 1, 8, 4, 19, 12, 6);
  return g;
}

VoxelGrid stool() {
  auto g = grid();
  box(g, 6, 6, 0, 8, 8, 6);
  box(g, 12, 6, 0, 14, 8, 6);
  box(g, 9, 12, 0, 11, 14, 6);
  disc(g, 10, 10, 6, 6, 8);
  return g;
}

VoxelGrid sofa() {
  auto g = grid();
  box(g, 2, 6, 0, 18, 14, 4);
  box(g, 2, 12, 4, 18, 14, 9);
  box(g, 2, 6, 4, 4, 12, 6);
  box(g, 16, 6, 4, 18, 12, 6);
  return g;
}

VoxelGrid bed() {
  auto g = grid();
  box(g, 4, 1, 0, 16, 19, 3);
  box(g, 4, 1, 3, 16, 3, 8);
  box(g, 4, 17, 3, 16, 19, 5);
  return g;
}

VoxelGrid tower() {
  auto g = grid();
  box(g, 8, 8, 0, 12, 12, 18);
  box(g, 7, 7, 18, 13, 13, 20);
  return g;
}

VoxelGrid arch() {
  auto g = grid();
  box(g, 3, 8, 0, 6, 12, 9);
  box(g, 14, 8, 0, 17, 12, 9);
  box(g, 3, 8, 9, 17, 12, 12);
  return g;
}

VoxelGrid stairs() {
  auto g = grid();
  for (int s = 0; s < 8; ++s) box(g, 2 + 2 * s, 4, 0, 18, 16, s + 1);
  return g;
}

VoxelGrid mug() {
  auto g = grid();
  disc(g, 9, 10, 5.5, 0, 11);
  disc(g, 9, 10, 3.5, 1, 11, false);
  box(g, 14, 9, 2, 17, 11, 4);
  box(g, 15, 9, 4, 17, 11, 8);
  box(g, 14, 9, 8, 17, 11, 10);
  return g;
}

VoxelGrid car() {
  auto g = grid();
  for (int x : {3, 14})
    for (int y : {5, 13}) box(g, x, y, 0, x + 3, y + 2, 2);
  box(g, 2, 5, 2, 18, 15, 5);
  box(g, 6, 6, 5, 14, 14, 8);
  return g;
}

VoxelGrid boat() {
  auto g = grid();
  box(g, 6, 8, 0, 14, 12, 1);
  box(g, 4, 7, 1, 16, 13, 2);
  box(g, 2, 6, 2, 18, 14, 4);
  box(g, 9, 9, 4, 11, 11, 14);
  box(g, 11, 9, 6, 16, 11, 12);
  return g;
}

VoxelGrid house() {
  auto g = grid();
  box(g, 3, 3, 0, 17, 17, 8);
  box(g, 5, 5, 0, 15, 15, 8, false);
  box(g, 8, 3, 0, 11, 5, 5, false);
  for (int s = 0; s < 6; ++s) box(g, 3, 2 + s, 8 + s, 17, 18 - s, 9 + s);
  return g;
}

VoxelGrid bookshelf() {
  auto g = grid();
  box(g, 2, 8, 0, 18, 12, 18);
  box(g, 4, 8, 2, 16, 11, 6, false);
  box(g, 4, 8, 8, 16, 11, 11, false);
  box(g, 4, 8, 13, 16, 11, 16, false);
  return g;
}

VoxelGrid desk() {
  auto g = grid();
  box(g, 2, 2, 0, 8, 10, 7);
  box(g, 15, 2, 0, 17, 4, 7);
  box(g, 15, 8, 0, 17, 10, 7);
  box(g, 2, 2, 7, 18, 10, 9);
  box(g, 2, 10, 7, 8, 18, 9);
  box(g, 2, 16, 0, 4, 18, 7);
  box(g, 6, 16, 0, 8, 18, 7);
  return g;
}

VoxelGrid lamp() {
  auto g = grid();
  disc(g, 10, 10, 4, 0, 2);
  box(g, 9, 9, 2, 11, 11, 12);
  for (int s = 0; s < 5; ++s) disc(g, 10, 10, 2.5 + s * 0.9, 12 + s, 13 + s);
  return g;
}

// Meshes -------------------------------------------------------------------

struct MeshBuilder {
  Mesh m;
  int v(double x, double y, double z) {
    m.vertices.push_back({x, y, z});
    return static_cast<int>(m.vertices.size()) - 1;
  }
  void tri(int a, int b, int c) { m.triangles.push_back({a, b, c}); }
  void quad(int a, int b, int c, int d) {
    tri(a, b, c);
    tri(a, c, d);
  }
};

// Surface of revolution about +Z from a profile of (radius, height) pairs,
// closed at both ends.
Mesh lathe(const std::vector<std::pair<double, double>>& profile, int segments) {
  MeshBuilder b;
  const double tau = 2.0 * std::numbers::pi;
  std::vector<std::vector<int>> rings;
  for (auto [r, h] : profile) {
    std::vector<int> ring;
    for (int s = 0; s < segments; ++s) {
      double a = tau * s / segments;
      ring.push_back(b.v(r * std::cos(a), r * std::sin(a), h));
    }
    rings.push_back(ring);
  }
  for (std::size_t i = 0; i + 1 < rings.size(); ++i)
    for (int s = 0; s < segments; ++s) {
      int t = (s + 1) % segments;
      b.quad(rings[i][s], rings[i][t], rings[i + 1][t], rings[i + 1][s]);
    }
  int bottom = b.v(0, 0, profile.front().second);
  int top = b.v(0, 0, profile.back().second);
  for (int s = 0; s < segments; ++s) {
    int t = (s + 1) % segments;
    b.tri(bottom, rings.front()[t], rings.front()[s]);
    b.tri(top, rings.back()[s], rings.back()[t]);
  }
  return b.m;
}

Mesh pyramid() {
  MeshBuilder b;
  int p0 = b.v(-1, -1, 0), p1 = b.v(1, -1, 0), p2 = b.v(1, 1, 0), p3 = b.v(-1, 1, 0);
  int apex = b.v(0, 0, 1.1);
  b.quad(p0, p3, p2, p1);
  b.tri(p0, p1, apex);
  b.tri(p1, p2, apex);
  b.tri(p2, p3, apex);
  b.tri(p3, p0, apex);
  return b.m;
}

Mesh bottle() {
  return lathe({{3.0, 0}, {3.0, 6}, {2.6, 7}, {1.4, 8.5}, {1.2, 10}, {1.3, 10.5}}, 32);
}

Mesh vase() {
  return lathe({{2.0, 0}, {3.5, 2}, {4.0, 4}, {3.2, 7}, {2.0, 9}, {2.6, 11}}, 32);
}

Mesh cone() { return lathe({{4.0, 0}, {3.0, 2}, {0.4, 9}}, 32); }

Mesh dome() {
  std::vector<std::pair<double, double>> p{{5.0, 0}};
  for (int i = 1; i <= 8; ++i) {
    double a = (std::numbers::pi / 2) * i / 8.0;
    p.emplace_back(std::max(5.0 * std::cos(a), 0.3), 5.0 * std::sin(a));
  }
  return lathe(p, 40);
}

void write_obj(const fs::path& path, const Mesh& m) {
  std::ofstream out(path);
  out.precision(9);
  out << "# generated by make_corpus\n";
  for (const auto& v : m.vertices) out << "v " << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
  for (const auto& t : m.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_corpus <data-dir>\n";
    return 1;
  }
  const fs::path root = argv[1];
  fs::create_directories(root / "corpus");
  fs::create_directories(root / "meshes");

  const std::vector<std::pair<std::string, std::function<VoxelGrid()>>> shapes = {
      {"chair", chair},   {"table", table}, {"bench", bench}, {"stool", stool},   {"sofa", sofa},
      {"bed", bed},       {"tower", tower}, {"arch", arch},   {"stairs", stairs}, {"mug", mug},
      {"car", car},       {"boat", boat},   {"house", house}, {"bookshelf", bookshelf},
      {"desk", desk},     {"lamp", lamp},
  };
  for (const auto& [name, make] : shapes) save_voxels(root / "corpus" / (name + ".rle"), make());

  const std::vector<std::pair<std::string, Mesh>> meshes = {
      {"pyramid", pyramid()}, {"bottle", bottle()}, {"vase", vase()}, {"cone", cone()}, {"dome", dome()},
  };
  const GridWorld world{};
  for (const auto& [name, mesh] : meshes) {
    write_obj(root / "meshes" / (name + ".obj"), mesh);
    if (name == "dome") continue;  // kept as a mesh-only sample
    save_voxels(root / "corpus" / (name + ".rle"), voxelize_mesh(mesh, world));
  }
  std::cout << "wrote corpus to " << root << '\n';
  return 0;
}
