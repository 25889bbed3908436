#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "brickgen/legolize.hpp"

using namespace brickgen;

namespace {
const GridWorld kGrid{};

VoxelGrid box(int x0, int y0, int z0, int h, int w, int d, VoxelGrid g = VoxelGrid(kGrid)) {
  for (int z = z0; z < z0 + d; ++z)
    for (int y = y0; y < y0 + w; ++y)
      for (int x = x0; x < x0 + h; ++x) g.set(x, y, z);
  return g;
}

void expect_exact_cover(const BrickStructure& s, const VoxelGrid& target) {
  EXPECT_NO_THROW(OccupancyMap::build(s));
  EXPECT_EQ(occupancy_grid(s), target);
  for (const auto& b : s.bricks) EXPECT_TRUE(BrickLibrary::standard().contains(b.dims));
}

StabilityReport report_with(std::vector<double> scores) {
  StabilityReport r;
  r.scores = std::move(scores);
  for (std::size_t i = 0; i < r.scores.size(); ++i)
    if (r.scores[i] <= 0) r.unstable.push_back(static_cast<int>(i));
  r.stable = r.unstable.empty();
  return r;
}

std::set<Brick> brick_set(const BrickStructure& s) { return {s.bricks.begin(), s.bricks.end()}; }
}  // namespace

TEST(GreedyFill, Examples) {
  Rng rng(0);
  auto slab = greedy_fill(box(0, 0, 0, 2, 4, 1), rng);
  ASSERT_EQ(slab.size(), 1u);
  EXPECT_EQ(slab.bricks[0].dims, (BrickDims{2, 4}));

  auto unit = greedy_fill(box(3, 3, 3, 1, 1, 1), rng);
  ASSERT_EQ(unit.size(), 1u);
  EXPECT_EQ(unit.bricks[0], (Brick{{1, 1}, 3, 3, 3}));

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng r(seed);
    auto row = greedy_fill(box(0, 0, 0, 1, 5, 1), r);
    ASSERT_EQ(row.size(), 2u);
    std::multiset<int> areas{row.bricks[0].area(), row.bricks[1].area()};
    EXPECT_EQ(areas, (std::multiset<int>{1, 4}));
  }
}

TEST(GreedyFill, ConservesVoxelsOnCorpus) {
  for (const auto& e : std::filesystem::directory_iterator(std::filesystem::path(BRICKGEN_DATA_DIR) / "corpus")) {
    auto g = load_voxels(e.path());
    for (std::uint64_t seed : {0u, 1u, 2u}) {
      Rng rng(seed);
      auto s = greedy_fill(g, rng);
      expect_exact_cover(s, g);
      auto sorted = s;
      sort_raster(sorted);
      EXPECT_EQ(sorted.bricks, s.bricks) << "raster order";
    }
  }
}

TEST(GreedyFill, SeedsGiveDistinctLayouts) {
  auto slab = box(0, 0, 0, 6, 6, 3);
  std::set<std::set<Brick>> layouts;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    layouts.insert(brick_set(greedy_fill(slab, rng)));
  }
  EXPECT_GE(layouts.size(), 2u);
}

TEST(WeakRegion, Examples) {
  Rng rng(0);
  BrickStructure single{kGrid, {{{1, 2}, 5, 5, 4}}};
  EXPECT_EQ(find_weak_region(single, report_with({0.0}), rng), std::vector<int>{0});

  BrickStructure ok{kGrid, {{{2, 2}, 0, 0, 0}}};
  try {
    find_weak_region(ok, report_with({1.0}), rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::no_weak_region);
  }
}

TEST(WeakRegion, EachClusterReachableAcrossSeeds) {
  BrickStructure s{kGrid, {{{1, 1}, 0, 0, 5}, {{1, 1}, 10, 10, 5}}};
  auto report = report_with({0.0, 0.0});
  std::set<std::vector<int>> seen;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    auto r = find_weak_region(s, report, rng);
    ASSERT_EQ(r.size(), 1u);
    seen.insert(r);
  }
  EXPECT_EQ(seen.size(), 2u);
}

TEST(WeakRegion, RadiusAddsNeighbours) {
  BrickStructure s{kGrid, {{{2, 2}, 0, 0, 0}, {{2, 2}, 0, 0, 1}, {{2, 2}, 0, 0, 2}, {{2, 2}, 0, 0, 3}}};
  Rng rng(0);
  LegolizeConfig cfg;
  cfg.radius = 1;
  EXPECT_EQ(find_weak_region(s, report_with({1, 1, 1, 0}), rng, cfg), (std::vector<int>{2, 3}));
  cfg.radius = 2;
  EXPECT_EQ(find_weak_region(s, report_with({1, 1, 1, 0}), rng, cfg), (std::vector<int>{1, 2, 3}));
}

TEST(Rebuild, ConservesFootprint) {
  BrickStructure s{kGrid, {{{2, 4}, 0, 0, 0}, {{2, 4}, 2, 0, 0}, {{2, 4}, 1, 0, 1}}};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    auto out = rebuild_region(s, {2}, rng);
    expect_exact_cover(out, occupancy_grid(s));
  }
}

TEST(Rebuild, PrefersBridgeAcrossComponents) {
  // Two posts joined only through the removed layer-1 row; a 4x1 spans both.
  BrickStructure s{kGrid,
                   {{{1, 1}, 0, 0, 0}, {{1, 1}, 3, 0, 0}, {{1, 1}, 0, 0, 1}, {{2, 1}, 1, 0, 1}, {{1, 1}, 3, 0, 1}}};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    auto out = rebuild_region(s, {2, 3, 4}, rng);
    expect_exact_cover(out, occupancy_grid(s));
    int layer1 = 0;
    for (const auto& b : out.bricks)
      if (b.z == 1) {
        ++layer1;
        EXPECT_EQ(b, (Brick{{4, 1}, 0, 0, 1}));
      }
    EXPECT_EQ(layer1, 1);
  }
}

TEST(Legolize, CubeConvergesImmediately) {
  auto r = legolize(box(0, 0, 0, 4, 4, 4));
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_TRUE(r.report.stable);
}

TEST(Legolize, FloatingIslandNeverConverges) {
  auto g = box(0, 0, 0, 4, 4, 2);
  g = box(10, 10, 5, 2, 2, 1, g);
  LegolizeConfig cfg;
  cfg.max_iterations = 5;
  auto r = legolize(g, {}, cfg);
  EXPECT_FALSE(r.converged);
  EXPECT_FALSE(r.report.stable);
  expect_exact_cover(r.structure, g);
}

TEST(Legolize, Deterministic) {
  auto g = load_voxels(std::filesystem::path(BRICKGEN_DATA_DIR) / "corpus" / "chair.rle");
  LegolizeConfig cfg;
  cfg.seed = 42;
  auto a = legolize(g, {}, cfg);
  auto b = legolize(g, {}, cfg);
  EXPECT_EQ(a.structure, b.structure);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.report.scores, b.report.scores);
}

TEST(Legolize, RepairsOverhang) {
  // Ledge over empty space: a row of 1x1s cannot hold it, interlocking can.
  auto g = box(0, 0, 0, 2, 4, 1);
  g = box(0, 0, 1, 4, 4, 1, g);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    LegolizeConfig cfg;
    cfg.seed = seed;
    auto r = legolize(g, {}, cfg);
    EXPECT_TRUE(r.converged) << seed;
    expect_exact_cover(r.structure, g);
    EXPECT_GT(r.report.min_score(), 0.0);
  }
}

TEST(Variants, CountAndDistinctness) {
  auto g = load_voxels(std::filesystem::path(BRICKGEN_DATA_DIR) / "corpus" / "table.rle");
  LegolizeConfig one;
  one.variants = 1;
  EXPECT_EQ(generate_variants(g, {}, one).size(), 1u);
  LegolizeConfig two;
  two.variants = 2;
  auto v = generate_variants(g, {}, two);
  ASSERT_GE(v.size(), 1u);
  ASSERT_LE(v.size(), 2u);
  if (v.size() == 2) EXPECT_NE(brick_set(v[0].structure), brick_set(v[1].structure));
}
