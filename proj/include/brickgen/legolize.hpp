#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "brickgen/core.hpp"
#include "brickgen/geometry.hpp"
#include "brickgen/stability.hpp"

namespace brickgen {

using Rng = std::mt19937_64;

struct LegolizeConfig {
  std::uint64_t seed = 0;
  int max_iterations = 20;  // delete-and-rebuild rounds
  int variants = 2;
  int radius = 1;           // weak-region expansion, in adjacency hops
  double weak_threshold = 0.0;  // bricks with s_i <= threshold count as weak
};

struct LegolizeResult {
  BrickStructure structure;
  StabilityReport report;
  int iterations = 0;
  bool converged = false;
};

/// Uniform pick in [0, n) from one raw draw.
inline std::size_t pick(Rng& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

/// Layer-by-layer greedy cover of `grid`. Output is in raster order.
BrickStructure greedy_fill(const VoxelGrid& grid, Rng& rng,
                           const BrickLibrary& library = BrickLibrary::standard());

/// Brick adjacency used for weak regions: stud connections plus same-layer face contact.
std::vector<std::vector<int>> brick_adjacency(const BrickStructure& s);

/// One randomly chosen component of weak bricks, grown by `cfg.radius` hops. Sorted.
/// Throws Error(no_weak_region) when no brick is weak.
std::vector<int> find_weak_region(const BrickStructure& s, const StabilityReport& report, Rng& rng,
                                  const LegolizeConfig& cfg = {});

/// Removes `region` and refills its voxels greedily. Output is in raster order.
BrickStructure rebuild_region(const BrickStructure& s, const std::vector<int>& region, Rng& rng,
                              const BrickLibrary& library = BrickLibrary::standard());

LegolizeResult legolize(const VoxelGrid& grid, const PhysicalParams& params = {},
                        const LegolizeConfig& cfg = {},
                        const BrickLibrary& library = BrickLibrary::standard());

/// `cfg.variants` runs with derived seeds; layouts with identical brick sets are dropped.
std::vector<LegolizeResult> generate_variants(const VoxelGrid& grid, const PhysicalParams& params = {},
                                              const LegolizeConfig& cfg = {},
                                              const BrickLibrary& library = BrickLibrary::standard());

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k);

}  // namespace brickgen
