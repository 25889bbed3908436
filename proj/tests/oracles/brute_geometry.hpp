#pragma once

// Exhaustive references for voxel distances and mesh inclusion.

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "brickgen/geometry.hpp"

namespace oracle {

inline double brute_chamfer(const brickgen::VoxelGrid& a, const brickgen::VoxelGrid& b) {
  const auto pa = a.occupied();
  const auto pb = b.occupied();
  auto one_side = [](const std::vector<brickgen::Voxel>& from, const std::vector<brickgen::Voxel>& to) {
    double sum = 0;
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to) {
        double dx = p.x - q.x, dy = p.y - q.y, dz = p.z - q.z;
        best = std::min(best, std::sqrt(dx * dx + dy * dy + dz * dz));
      }
      sum += best;
    }
    return sum;
  };
  return one_side(pa, pb) + one_side(pb, pa);
}

// Crossing-number test along a slightly skewed ray, for closed meshes.
inline bool point_in_mesh(const brickgen::Mesh& m, const std::array<double, 3>& p) {
  const std::array<double, 3> dir{1.0, 0.000123457, 0.000234568};
  int hits = 0;
  for (const auto& t : m.triangles) {
    const auto& v0 = m.vertices[t[0]];
    const auto& v1 = m.vertices[t[1]];
    const auto& v2 = m.vertices[t[2]];
    std::array<double, 3> e1{v1[0] - v0[0], v1[1] - v0[1], v1[2] - v0[2]};
    std::array<double, 3> e2{v2[0] - v0[0], v2[1] - v0[1], v2[2] - v0[2]};
    std::array<double, 3> h{dir[1] * e2[2] - dir[2] * e2[1], dir[2] * e2[0] - dir[0] * e2[2], dir[0] * e2[1] - dir[1] * e2[0]};
    double a = e1[0] * h[0] + e1[1] * h[1] + e1[2] * h[2];
    if (std::abs(a) < 1e-14) continue;
    double f = 1.0 / a;
    std::array<double, 3> s{p[0] - v0[0], p[1] - v0[1], p[2] - v0[2]};
    double u = f * (s[0] * h[0] + s[1] * h[1] + s[2] * h[2]);
    if (u < 0.0 || u > 1.0) continue;
    std::array<double, 3> q{s[1] * e1[2] - s[2] * e1[1], s[2] * e1[0] - s[0] * e1[2], s[0] * e1[1] - s[1] * e1[0]};
    double v = f * (dir[0] * q[0] + dir[1] * q[1] + dir[2] * q[2]);
    if (v < 0.0 || u + v > 1.0) continue;
    double t_hit = f * (e2[0] * q[0] + e2[1] * q[1] + e2[2] * q[2]);
    if (t_hit > 1e-12) ++hits;
  }
  return hits % 2 == 1;
}

}  // namespace oracle
