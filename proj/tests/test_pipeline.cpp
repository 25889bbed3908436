#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "brickgen/pipeline.hpp"
#include "mock_chat.hpp"
#include "oracles/brute_geometry.hpp"

using namespace brickgen;
using testing_support::MockChatServer;

namespace {
const GridWorld kGrid{};

VoxelGrid box(int x0, int y0, int z0, int h, int w, int d, VoxelGrid g = VoxelGrid(kGrid)) {
  for (int z = z0; z < z0 + d; ++z)
    for (int y = y0; y < y0 + w; ++y)
      for (int x = x0; x < x0 + h; ++x) g.set(x, y, z);
  return g;
}

EvalItem item(bool valid, bool stable, std::vector<double> scores) { return {valid, stable, std::move(scores)}; }

VoxelGrid random_grid(std::mt19937_64& rng, int n, double p) {
  VoxelGrid g(n, n, n);
  std::bernoulli_distribution on(p);
  for (std::size_t i = 0; i < g.size(); ++i) g.set(i, on(rng));
  if (g.empty()) g.set(0, 0, 0);
  return g;
}

class FixedCaptioner : public CaptionProvider {
 public:
  explicit FixedCaptioner(int n) : n_(n) {}
  std::vector<std::string> captions(const CaptionInput&, const std::string& category) override {
    std::vector<std::string> out;
    for (int k = 0; k < n_; ++k) out.push_back("a " + category + " " + std::to_string(k));
    return out;
  }

 private:
  int n_;
};
}  // namespace

TEST(Metrics, Example) {
  auto m = compute_metrics({item(true, true, {1.0, 1.0}), item(true, false, {0.8, 0.0}), item(false, false, {})});
  EXPECT_EQ(m.total, 3u);
  EXPECT_NEAR(m.percent_valid, 66.7, 0.05);
  EXPECT_NEAR(m.percent_stable, 33.3, 0.05);
  EXPECT_NEAR(m.percent_stable_of_valid, 50.0, 1e-12);
  ASSERT_TRUE(m.mean_stability.has_value());
  EXPECT_NEAR(*m.mean_stability, 0.7, 1e-12);
  EXPECT_NEAR(*m.min_stability, 0.5, 1e-12);
}

TEST(Metrics, AllInvalidIsNotApplicable) {
  auto m = compute_metrics({item(false, false, {}), item(false, false, {})});
  EXPECT_EQ(m.percent_valid, 0.0);
  EXPECT_FALSE(m.mean_stability.has_value());
  EXPECT_FALSE(m.min_stability.has_value());
  auto j = m.to_json();
  EXPECT_EQ(j["mean_stability"], "N/A");
  EXPECT_EQ(j["min_stability"], "N/A");
}

TEST(Metrics, AllStable) {
  auto m = compute_metrics({item(true, true, {1.0}), item(true, true, {0.9, 1.0})});
  EXPECT_EQ(m.percent_valid, 100.0);
  EXPECT_EQ(m.percent_stable, 100.0);
}

TEST(Metrics, EmptyInputThrows) {
  try {
    compute_metrics({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::empty_input);
  }
}

TEST(Metrics, MatchesRecount) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<EvalItem> items(1 + rng() % 20);
    for (auto& it : items) {
      it.valid = rng() % 4 != 0;
      if (!it.valid) continue;
      it.scores.resize(rng() % 6);
      for (auto& s : it.scores) s = rng() % 3 == 0 ? 0.0 : u(rng);
      it.stable = std::all_of(it.scores.begin(), it.scores.end(), [](double s) { return s > 0; });
    }
    std::size_t valid = 0, stable = 0;
    double mean_sum = 0, min_sum = 0;
    for (const auto& it : items) {
      if (!it.valid) continue;
      ++valid;
      stable += it.stable;
      double mean = 1, mn = 1;
      if (!it.scores.empty()) {
        mean = std::accumulate(it.scores.begin(), it.scores.end(), 0.0) / it.scores.size();
        mn = *std::min_element(it.scores.begin(), it.scores.end());
      }
      mean_sum += mean;
      min_sum += mn;
    }
    auto m = compute_metrics(items);
    ASSERT_EQ(m.valid, valid);
    ASSERT_EQ(m.stable, stable);
    ASSERT_DOUBLE_EQ(m.percent_valid, 100.0 * valid / items.size());
    ASSERT_DOUBLE_EQ(m.percent_stable, 100.0 * stable / items.size());
    ASSERT_EQ(m.mean_stability.has_value(), valid > 0);
    if (valid) {
      ASSERT_NEAR(*m.mean_stability, mean_sum / valid, 1e-12);
      ASSERT_NEAR(*m.min_stability, min_sum / valid, 1e-12);
    }
  }
}

TEST(Metrics, FromText) {
  const std::string T(kTimes);
  EXPECT_FALSE(EvalItem::from_text("garbage", kGrid).valid);
  EXPECT_FALSE(EvalItem::from_text("2" + T + "2 (0,0,0)\n1" + T + "1 (1,1,0)\n", kGrid).valid);
  auto ok = EvalItem::from_text("2" + T + "2 (0,0,0)\n2" + T + "2 (0,0,1)\n", kGrid);
  EXPECT_TRUE(ok.valid);
  EXPECT_TRUE(ok.stable);
  auto floating = EvalItem::from_text("2" + T + "2 (0,0,3)\n", kGrid);
  EXPECT_TRUE(floating.valid);
  EXPECT_FALSE(floating.stable);
}

TEST(Novelty, Identity) {
  std::mt19937_64 rng(1);
  std::vector<VoxelGrid> train;
  for (int k = 0; k < 5; ++k) train.push_back(random_grid(rng, 8, 0.2));
  auto r = novelty_report(train[3], train, {"a", "b", "c", "d", "e"});
  EXPECT_EQ(r.distance, 0.0);
  EXPECT_EQ(r.index, 3u);
  EXPECT_EQ(r.id, "d");
}

TEST(Novelty, ShiftedLayerCostsTwoPerVoxel) {
  VoxelGrid layer = box(2, 2, 0, 4, 3, 1, VoxelGrid(10, 10, 10));
  VoxelGrid up = box(2, 2, 1, 4, 3, 1, VoxelGrid(10, 10, 10));
  EXPECT_DOUBLE_EQ(chamfer_distance(layer, up), 2.0 * 12);
  auto r = novelty_report(up, {layer});
  EXPECT_DOUBLE_EQ(r.distance, 24.0);
}

TEST(Novelty, TieGoesToLowestIndex) {
  VoxelGrid a(6, 6, 6), left(6, 6, 6), right(6, 6, 6);
  a.set(3, 3, 3);
  left.set(2, 3, 3);
  right.set(4, 3, 3);
  auto r = novelty_report(a, {right, left, right});
  EXPECT_EQ(r.index, 0u);
  EXPECT_DOUBLE_EQ(r.distance, 2.0);
}

TEST(Novelty, AgreesWithExhaustiveScan) {
  std::mt19937_64 rng(12);
  for (int round = 0; round < 3; ++round) {
    std::vector<VoxelGrid> train;
    for (int k = 0; k < 500; ++k) train.push_back(random_grid(rng, 6, 0.1 + 0.3 * (k % 3) / 3.0));
    auto q = random_grid(rng, 6, 0.2);
    double best = 1e300;
    std::size_t best_k = 0;
    for (std::size_t k = 0; k < train.size(); ++k) {
      double d = oracle::brute_chamfer(q, train[k]);
      if (d < best - 1e-9) best = d, best_k = k;
    }
    auto r = novelty_report(q, train);
    EXPECT_EQ(r.index, best_k);
    EXPECT_NEAR(r.distance, best, 1e-9);
  }
}

TEST(Novelty, EmptyTrainSet) {
  try {
    novelty_report(box(0, 0, 0, 1, 1, 1), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::empty_train_set);
  }
}

TEST(Captions, PromptSubstitutesCategory) {
  auto p = caption_prompt("chair");
  EXPECT_EQ(p.find("{CATEGORY_NAME}"), std::string::npos);
  EXPECT_NE(p.find("category of chair."), std::string::npos);
  EXPECT_NE(p.find("4. Omits color and texture information"), std::string::npos);
  EXPECT_NE(p.find("\"chair\""), std::string::npos);
}

TEST(Captions, OfflineGivesFive) {
  OfflineCaptioner c;
  auto caps = c.captions({box(0, 0, 0, 4, 6, 10), {}}, "table");
  ASSERT_EQ(caps.size(), 5u);
  for (const auto& s : caps) EXPECT_NE(s.find("table"), std::string::npos);
  EXPECT_LT(caps.front().size(), caps.back().size());
  EXPECT_NE(caps[1].find("6 by 4"), std::string::npos);
}

TEST(Captions, RemoteFiveAndFourLines) {
  int lines = 5;
  MockChatServer server([&](const nlohmann::json&) {
    std::string text;
    for (int k = 0; k < lines; ++k) text += "caption " + std::to_string(k) + "\n";
    return std::make_pair(200, text);
  });
  EndpointConfig cfg;
  cfg.base_url = server.url();
  RemoteCaptioner c(cfg);
  auto caps = c.captions({box(0, 0, 0, 2, 2, 2), {"\x89PNG fake"}}, "mug");
  EXPECT_EQ(caps.size(), 5u);
  auto req = server.requests().at(0);
  auto content = req["messages"][0]["content"];
  EXPECT_EQ(content[0]["type"], "text");
  EXPECT_EQ(content[1]["image_url"]["url"].get<std::string>().rfind("data:image/png;base64,", 0), 0u);

  lines = 4;
  try {
    c.captions({box(0, 0, 0, 2, 2, 2), {}}, "mug");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::malformed_caption_response);
  }
}

TEST(Dataset, StableCubeAndUnsalvageableShape) {
  std::vector<ShapeSource> shapes;
  shapes.push_back({"cube", "block", {}, box(0, 0, 0, 4, 4, 4)});
  VoxelGrid island = box(0, 0, 0, 2, 2, 1);
  island = box(8, 8, 6, 2, 2, 1, island);
  shapes.push_back({"island", "junk", {}, island});
  shapes.push_back({"missing", "none", "/nonexistent/shape.rle", std::nullopt});

  DatasetConfig cfg;
  cfg.legolize.variants = 2;
  cfg.legolize.max_iterations = 3;
  OfflineCaptioner cap;
  std::vector<DatasetRecord> records;
  auto sum = build_dataset(shapes, cap, cfg, [&](const DatasetRecord& r) { records.push_back(r); });
  EXPECT_EQ(sum.objects_in, 3);
  EXPECT_EQ(sum.objects_failed, 1);
  EXPECT_EQ(sum.objects_with_stable, 1);
  ASSERT_GE(records.size(), 1u);
  ASSERT_LE(records.size(), 2u);
  for (const auto& r : records) {
    EXPECT_EQ(r.object_id, "cube");
    EXPECT_EQ(r.captions.size(), 5u);
    for (double s : r.stability_scores) EXPECT_GT(s, 0.0);
    auto again = analyze(parse_structure(r.bricks, kGrid));
    EXPECT_TRUE(again.stable);
  }
  EXPECT_EQ(sum.records, static_cast<int>(records.size()));
  std::stringstream ss;
  DatasetWriter w(ss, DatasetMode::stable_only);
  for (const auto& r : records) EXPECT_NO_THROW(w.write(r));
}

TEST(Dataset, TokenCapDropsLongRecords) {
  std::vector<ShapeSource> shapes{{"slab", "plate", {}, box(0, 0, 0, 8, 8, 2)}};
  DatasetConfig cfg;
  cfg.token_cap = 50;
  OfflineCaptioner cap;
  int emitted = 0;
  auto sum = build_dataset(shapes, cap, cfg, [&](const DatasetRecord&) { ++emitted; });
  EXPECT_EQ(emitted, 0);
  EXPECT_GT(sum.dropped_token_cap, 0);
}

TEST(Dataset, CaptionerFailureIsIsolated) {
  std::vector<ShapeSource> shapes{{"a", "cube", {}, box(0, 0, 0, 2, 2, 2)}};
  FixedCaptioner four(4);
  DatasetConfig cfg;
  int emitted = 0;
  auto sum = build_dataset(shapes, four, cfg, [&](const DatasetRecord&) { ++emitted; });
  EXPECT_EQ(emitted, 0);
  EXPECT_EQ(sum.objects_failed, 1);
  EXPECT_EQ(sum.errors.size(), 1u);
}

TEST(Dataset, WorkerCountDoesNotChangeOutput) {
  std::vector<ShapeSource> shapes;
  for (const char* name : {"chair", "table", "stool", "bench"})
    shapes.push_back({name, name, std::filesystem::path(BRICKGEN_DATA_DIR) / "corpus" / (std::string(name) + ".rle"),
                      std::nullopt});
  OfflineCaptioner cap;
  auto run = [&](int workers) {
    DatasetConfig cfg;
    cfg.workers = workers;
    std::ostringstream os;
    DatasetWriter w(os);
    build_dataset(shapes, cap, cfg, [&](const DatasetRecord& r) { w.write(r); });
    return os.str();
  };
  EXPECT_EQ(run(1), run(4));
}

TEST(Tokens, Approximation) {
  EXPECT_EQ(approx_tokens(""), 0);
  EXPECT_EQ(approx_tokens("abcd"), 1);
  EXPECT_EQ(approx_tokens("abcde"), 2);
}
