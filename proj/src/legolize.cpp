#include "brickgen/legolize.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <set>

namespace brickgen {

namespace {

using Key = std::array<int, 4>;

struct UnionFind {
  std::vector<int> parent;
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
  int add() {
    parent.push_back(static_cast<int>(parent.size()));
    return parent.back();
  }
};

bool is_long_x(BrickDims d) { return d.h > d.w; }

// Owners of the cells directly below (dz = -1) or above (dz = +1) the footprint.
std::vector<int> touching(const OccupancyMap& occ, const Brick& b, int dz) {
  std::vector<int> out;
  const int z = b.z + dz;
  if (z < 0 || z >= occ.grid().D) return out;
  for (int x = b.x; x < b.x_end(); ++x) {
    for (int y = b.y; y < b.y_end(); ++y) {
      int o = occ.owner(x, y, z);
      if (o >= 0) out.push_back(o);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool fits_open(const VoxelGrid& open, const Brick& b) {
  if (b.x_end() > open.H() || b.y_end() > open.W()) return false;
  for (int x = b.x; x < b.x_end(); ++x) {
    for (int y = b.y; y < b.y_end(); ++y) {
      if (!open.get(x, y, b.z)) return false;
    }
  }
  return true;
}

// Keeps the best-keyed candidates.
struct Best {
  std::vector<Brick> bricks;
  Key key{};
  void offer(const Brick& b, const Key& k) {
    if (bricks.empty() || k > key) {
      bricks.assign(1, b);
      key = k;
    } else if (k == key) {
      bricks.push_back(b);
    }
  }
};

// Fills every voxel of `todo` (cells not yet owned in `occ`), layer by layer.
// Anchored mode only tries bricks whose origin is the lowest-index open cell;
// otherwise every placement inside the open cells of the layer competes.
template <class KeyFn, class Placed>
void fill(const VoxelGrid& todo, BrickStructure& s, OccupancyMap& occ, Rng& rng, const BrickLibrary& library,
          bool anchored, KeyFn key_of, Placed on_placed) {
  const GridWorld& g = s.grid;
  VoxelGrid open = todo;
  auto place = [&](const Best& best, int x, int y, int z) {
    if (best.bricks.empty()) {
      throw Error(ErrorCode::unfillable_voxel, "no library brick fits voxel (" + std::to_string(x) + "," +
                                                   std::to_string(y) + "," + std::to_string(z) + ")");
    }
    const Brick chosen = best.bricks.size() == 1 ? best.bricks.front() : best.bricks[pick(rng, best.bricks.size())];
    const int index = static_cast<int>(s.bricks.size());
    s.bricks.push_back(chosen);
    occ.place(chosen, index);
    for (int cx = chosen.x; cx < chosen.x_end(); ++cx) {
      for (int cy = chosen.y; cy < chosen.y_end(); ++cy) open.set(cx, cy, z, false);
    }
    on_placed(chosen, index);
  };
  for (int z = 0; z < g.D; ++z) {
    if (anchored) {
      for (int y = 0; y < g.W; ++y) {
        for (int x = 0; x < g.H; ++x) {
          if (!open.get(x, y, z)) continue;
          Best best;
          for (BrickDims d : library.oriented()) {
            Brick b{d, x, y, z};
            if (fits_open(open, b)) best.offer(b, key_of(b));
          }
          place(best, x, y, z);
        }
      }
      continue;
    }
    for (;;) {
      Best best;
      int fx = -1, fy = -1;
      for (int y = 0; y < g.W; ++y) {
        for (int x = 0; x < g.H; ++x) {
          if (!open.get(x, y, z)) continue;
          if (fx < 0) fx = x, fy = y;
          for (BrickDims d : library.oriented()) {
            Brick b{d, x, y, z};
            if (fits_open(open, b)) best.offer(b, key_of(b));
          }
        }
      }
      if (fx < 0) break;
      place(best, fx, fy, z);
    }
  }
}

}  // namespace

BrickStructure greedy_fill(const VoxelGrid& grid, Rng& rng, const BrickLibrary& library) {
  if (grid.empty()) throw Error(ErrorCode::empty_grid, "voxel grid is empty");
  BrickStructure s{GridWorld{grid.H(), grid.W(), grid.D()}, {}};
  OccupancyMap occ(s.grid);
  auto key = [&](const Brick& b) {
    int supported = 0;
    if (b.z == 0) {
      supported = b.area();
    } else {
      for (int x = b.x; x < b.x_end(); ++x) {
        for (int y = b.y; y < b.y_end(); ++y) supported += occ.owner(x, y, b.z - 1) >= 0;
      }
    }
    const std::vector<int> below = touching(occ, b, -1);
    bool opposite = false;
    if (b.dims.h != b.dims.w) {
      for (int i : below) {
        BrickDims d = s.bricks[i].dims;
        if (d.h != d.w && is_long_x(d) != is_long_x(b.dims)) opposite = true;
      }
    }
    return Key{supported > 0 && supported < b.area(), below.size() >= 2, b.area(), opposite};
  };
  fill(grid, s, occ, rng, library, true, key, [](const Brick&, int) {});
  sort_raster(s);
  return s;
}

std::vector<std::vector<int>> brick_adjacency(const BrickStructure& s) {
  std::vector<std::set<int>> adj(s.size());
  for (const auto& c : connections(s)) {
    if (c.lower < 0) continue;
    adj[c.upper].insert(c.lower);
    adj[c.lower].insert(c.upper);
  }
  for (const auto& sc : side_contacts(s)) {
    adj[sc.a].insert(sc.b);
    adj[sc.b].insert(sc.a);
  }
  std::vector<std::vector<int>> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i].assign(adj[i].begin(), adj[i].end());
  return out;
}

std::vector<int> find_weak_region(const BrickStructure& s, const StabilityReport& report, Rng& rng,
                                  const LegolizeConfig& cfg) {
  const std::size_t n = s.size();
  std::vector<char> weak(n, 0);
  bool any = false;
  for (std::size_t i = 0; i < n && i < report.scores.size(); ++i) {
    if (report.scores[i] <= cfg.weak_threshold) weak[i] = 1, any = true;
  }
  if (!any) throw Error(ErrorCode::no_weak_region, "no weak bricks");

  const auto adj = brick_adjacency(s);
  // Components of weak bricks, discovered in index order.
  std::vector<int> comp(n, -1);
  std::vector<std::vector<int>> comps;
  for (std::size_t i = 0; i < n; ++i) {
    if (!weak[i] || comp[i] >= 0) continue;
    const int id = static_cast<int>(comps.size());
    comps.emplace_back();
    std::vector<int> stack{static_cast<int>(i)};
    comp[i] = id;
    while (!stack.empty()) {
      int a = stack.back();
      stack.pop_back();
      comps[id].push_back(a);
      for (int b : adj[a]) {
        if (weak[b] && comp[b] < 0) {
          comp[b] = id;
          stack.push_back(b);
        }
      }
    }
  }
  std::vector<int> region = comps[pick(rng, comps.size())];
  std::vector<char> in(n, 0);
  for (int a : region) in[a] = 1;
  std::vector<int> frontier = region;
  for (int hop = 0; hop < cfg.radius; ++hop) {
    std::vector<int> next;
    for (int a : frontier) {
      for (int b : adj[a]) {
        if (!in[b]) {
          in[b] = 1;
          next.push_back(b);
        }
      }
    }
    region.insert(region.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  std::sort(region.begin(), region.end());
  return region;
}

BrickStructure rebuild_region(const BrickStructure& s, const std::vector<int>& region, Rng& rng,
                              const BrickLibrary& library) {
  if (region.empty()) throw Error(ErrorCode::precondition, "rebuild region is empty");
  std::vector<char> drop(s.size(), 0);
  for (int i : region) {
    if (i < 0 || static_cast<std::size_t>(i) >= s.size()) {
      throw Error(ErrorCode::precondition, "region index out of range");
    }
    drop[i] = 1;
  }
  BrickStructure out{s.grid, {}};
  VoxelGrid freed(s.grid);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!drop[i]) {
      out.bricks.push_back(s.bricks[i]);
      continue;
    }
    for (const auto& v : brick_voxels(s.bricks[i])) freed.set(v.x, v.y, v.z);
  }
  OccupancyMap occ = OccupancyMap::build(out);

  UnionFind uf;
  for (std::size_t i = 0; i < out.size(); ++i) uf.add();
  for (const auto& c : connections(out)) {
    if (c.lower >= 0) uf.unite(c.upper, c.lower);
  }

  auto neighbours = [&](const Brick& b) {
    std::vector<int> t = touching(occ, b, -1);
    std::vector<int> above = touching(occ, b, +1);
    t.insert(t.end(), above.begin(), above.end());
    return t;
  };
  auto key = [&](const Brick& b) {
    std::vector<int> roots;
    for (int i : neighbours(b)) roots.push_back(uf.find(i));
    std::sort(roots.begin(), roots.end());
    const int distinct = static_cast<int>(std::unique(roots.begin(), roots.end()) - roots.begin());
    return Key{distinct, b.area(), 0, 0};
  };
  auto placed = [&](const Brick& b, int index) {
    uf.add();
    for (int i : neighbours(b)) {
      if (i != index) uf.unite(index, i);
    }
  };
  fill(freed, out, occ, rng, library, false, key, placed);
  sort_raster(out);
  return out;
}

namespace {

// Higher is better: min score, then fewer unstable bricks, then mean score.
bool better(const StabilityReport& a, const StabilityReport& b) {
  if (a.min_score() != b.min_score()) return a.min_score() > b.min_score();
  if (a.unstable.size() != b.unstable.size()) return a.unstable.size() < b.unstable.size();
  return a.mean_score() > b.mean_score();
}

}  // namespace

LegolizeResult legolize(const VoxelGrid& grid, const PhysicalParams& params, const LegolizeConfig& cfg,
                        const BrickLibrary& library) {
  if (cfg.max_iterations < 1) throw Error(ErrorCode::precondition, "max_iterations must be >= 1");
  Rng rng(cfg.seed);
  BrickStructure s = greedy_fill(grid, rng, library);
  LegolizeResult best;
  bool have_best = false;
  int stall = 0;  // rounds since the best iterate last improved
  for (int it = 0;; ++it) {
    StabilityReport report = analyze(s, params);
    if (!have_best || better(report, best.report)) {
      best = {s, report, it, report.stable};
      have_best = true;
      stall = 0;
    } else {
      ++stall;
    }
    if (report.stable) return {std::move(s), std::move(report), it, true};
    if (it >= cfg.max_iterations) break;
    LegolizeConfig round = cfg;
    round.radius = cfg.radius + stall;
    const std::vector<int> region = find_weak_region(s, report, rng, round);
    s = rebuild_region(s, region, rng, library);
  }
  best.iterations = cfg.max_iterations;
  best.converged = false;
  return best;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k) {
  // splitmix64 step
  std::uint64_t z = seed + (k + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<LegolizeResult> generate_variants(const VoxelGrid& grid, const PhysicalParams& params,
                                              const LegolizeConfig& cfg, const BrickLibrary& library) {
  if (cfg.variants < 1) throw Error(ErrorCode::precondition, "variants must be >= 1");
  std::vector<LegolizeResult> out;
  std::set<std::vector<Brick>> seen;
  for (int k = 0; k < cfg.variants; ++k) {
    LegolizeConfig c = cfg;
    c.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(k));
    LegolizeResult r = legolize(grid, params, c, library);
    std::vector<Brick> key = r.structure.bricks;
    std::sort(key.begin(), key.end());
    if (seen.insert(std::move(key)).second) out.push_back(std::move(r));
  }
  return out;
}

}  // namespace brickgen
