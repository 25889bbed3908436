#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "brickgen/chat.hpp"
#include "brickgen/geometry.hpp"
#include "brickgen/legolize.hpp"
#include "brickgen/stability.hpp"
#include "brickgen/textio.hpp"

namespace brickgen {

// Captions ------------------------------------------------------------------

/// What a captioner may look at. Renders are PNG bytes produced elsewhere.
struct CaptionInput {
  VoxelGrid shape;
  std::vector<std::string> renders;
};

inline constexpr int kCaptionCount = 5;

class CaptionProvider {
 public:
  virtual ~CaptionProvider() = default;
  /// Exactly five captions, coarse to fine.
  virtual std::vector<std::string> captions(const CaptionInput& input, const std::string& category) = 0;
};

/// Template captions from the category name and bounding-box statistics.
class OfflineCaptioner : public CaptionProvider {
 public:
  std::vector<std::string> captions(const CaptionInput& input, const std::string& category) override;
};

/// Captioning prompt with the category substituted.
std::string caption_prompt(const std::string& category);

/// Parses a completion into non-empty lines; Error(malformed_caption_response) unless there are five.
std::vector<std::string> parse_captions(const std::string& completion);

/// Vision chat endpoint: caption prompt plus any renders as image parts.
class RemoteCaptioner : public CaptionProvider {
 public:
  explicit RemoteCaptioner(EndpointConfig cfg) : client_(std::move(cfg)) {}
  std::vector<std::string> captions(const CaptionInput& input, const std::string& category) override;
  ChatClient& client() { return client_; }

 private:
  ChatClient client_;
};

// Dataset -------------------------------------------------------------------

struct ShapeSource {
  std::string id;
  std::string category;
  std::filesystem::path path;          // voxel file or .obj mesh; ignored when `grid` is set
  std::optional<VoxelGrid> grid;
};

struct DatasetConfig {
  GridWorld grid;
  PhysicalParams physics;
  LegolizeConfig legolize;
  int token_cap = 4096;  // approximated as bytes / 4 of system + user prompt + bricks
  int workers = 1;
};

struct DatasetSummary {
  int objects_in = 0;
  int objects_failed = 0;
  int objects_with_stable = 0;
  int variants = 0;
  int variants_stable = 0;
  int dropped_token_cap = 0;
  int records = 0;
  std::vector<std::string> errors;  // "id: message"

  double stable_fraction() const { return variants ? double(variants_stable) / variants : 0.0; }
  nlohmann::json to_json() const;
};

int approx_tokens(const std::string& text);

/// Legolizes every shape into variants, keeps the stable ones, captions them and
/// hands records to `emit` in input order. Per-shape failures are recorded and skipped.
DatasetSummary build_dataset(const std::vector<ShapeSource>& shapes, CaptionProvider& captioner,
                             const DatasetConfig& cfg, const std::function<void(const DatasetRecord&)>& emit,
                             const BrickLibrary& library = BrickLibrary::standard());

// Metrics -------------------------------------------------------------------

struct EvalItem {
  bool valid = false;
  bool stable = false;
  std::vector<double> scores;  // per brick, meaningful only when valid

  /// Analyzes brick text; unparsable or invalid text gives an invalid item.
  static EvalItem from_text(const std::string& bricks, const GridWorld& grid, const PhysicalParams& p = {});
};

struct MetricsReport {
  std::size_t total = 0;
  std::size_t valid = 0;
  std::size_t stable = 0;
  double percent_valid = 0;
  double percent_stable = 0;            // of all items
  double percent_stable_of_valid = 0;   // of valid items; 0 when none are valid
  std::optional<double> mean_stability; // per-structure mean, averaged over valid items
  std::optional<double> min_stability;  // per-structure min, averaged over valid items

  nlohmann::json to_json() const;
};

/// Error(empty_input) on an empty list.
MetricsReport compute_metrics(const std::vector<EvalItem>& items);

// Novelty -------------------------------------------------------------------

struct NoveltyResult {
  std::size_t index = 0;
  std::string id;
  double distance = 0.0;
};

/// Exact nearest neighbour by chamfer distance; ties go to the lowest index.
/// Error(empty_train_set) when `train` is empty.
NoveltyResult novelty_report(const VoxelGrid& query, const std::vector<VoxelGrid>& train,
                             const std::vector<std::string>& ids = {});
NoveltyResult novelty_report(const BrickStructure& query, const std::vector<DatasetRecord>& train);

}  // namespace brickgen
