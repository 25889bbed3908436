#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "brickgen/chat.hpp"
#include "brickgen/core.hpp"
#include "brickgen/geometry.hpp"
#include "brickgen/legolize.hpp"
#include "brickgen/stability.hpp"
#include "brickgen/textio.hpp"

namespace brickgen {

struct GenerationConfig {
  double temperature = 0.6;
  double temperature_step = 0.01;  // per draw repeating an already rejected line
  int max_rejections = 30;         // invalid draws per brick
  int max_rollbacks = 100;
  GridWorld grid;
  PhysicalParams physics;
  ParseOptions parse;
};

/// What a generator sees: the instruction prompt and the bricks accepted so far.
struct GenerationContext {
  const InstructionPrompt& prompt;
  std::string partial;  // serialized bricks, one line each

  /// Prompt text followed by the partial structure (user message, newline, bricks).
  std::string text() const { return prompt.user + "\n" + partial; }
};

/// Produces one brick line per call; nullopt (or a blank line) ends the structure.
class BrickGenerator {
 public:
  virtual ~BrickGenerator() = default;
  virtual std::optional<std::string> next_line(const GenerationContext& ctx, double temperature) = 0;
};

struct Sample {
  enum class Kind { brick, end, exhausted };
  Kind kind = Kind::end;
  Brick brick;
  int rejections = 0;
  double temperature = 0.0;  // temperature of the last draw
};

class TraceLog;

/// Draws until a valid brick, the end signal, or `max_rejections` invalid draws.
Sample rejection_sample(BrickGenerator& gen, const InstructionPrompt& prompt, const BrickStructure& s,
                        const GenerationConfig& cfg, TraceLog* trace = nullptr,
                        const BrickLibrary& library = BrickLibrary::standard());

/// Prefix before the first unstable brick. Throws Error(precondition) on a stable report.
BrickStructure rollback(const BrickStructure& s, const StabilityReport& report);

enum class GenerationFlag { stable, rollback_exhausted };
const char* to_string(GenerationFlag f);

struct GenerationResult {
  BrickStructure structure;
  StabilityReport report;
  int rollbacks = 0;
  std::vector<int> rejections;  // per accepted brick, in acceptance order
  GenerationFlag flag = GenerationFlag::stable;
  int forced_ends = 0;          // rejection loops that ran out of draws
  double wall_seconds = 0.0;
};

/// JSONL session log: draws, rejections with reasons, rollbacks with the unstable set.
class TraceLog {
 public:
  explicit TraceLog(std::ostream& out) : out_(out) {}
  void write(const nlohmann::json& event);

 private:
  std::ostream& out_;
};

GenerationResult generate_structure(BrickGenerator& gen, const std::string& caption,
                                    const GenerationConfig& cfg = {}, TraceLog* trace = nullptr,
                                    const BrickLibrary& library = BrickLibrary::standard());

// Generators ----------------------------------------------------------------

/// Emits a fixed list of draws, then ends forever. nullopt entries are end signals.
class ScriptedGenerator : public BrickGenerator {
 public:
  explicit ScriptedGenerator(std::vector<std::optional<std::string>> script) : script_(std::move(script)) {}
  /// Draws recorded in a session trace, in order.
  static ScriptedGenerator from_trace(std::istream& trace);

  std::optional<std::string> next_line(const GenerationContext& ctx, double temperature) override;

  const std::vector<double>& temperatures() const { return temperatures_; }
  const std::vector<std::string>& contexts() const { return contexts_; }
  std::size_t position() const { return pos_; }

 private:
  std::vector<std::optional<std::string>> script_;
  std::size_t pos_ = 0;
  std::vector<double> temperatures_;
  std::vector<std::string> contexts_;
};

/// Plays back a legolized layout of a target shape in raster order. When the
/// caller rolls bricks back, the lost voxels are refilled with a fresh layout.
class GreedyFillGenerator : public BrickGenerator {
 public:
  GreedyFillGenerator(VoxelGrid target, std::uint64_t seed, const PhysicalParams& params = {},
                      LegolizeConfig legolize_cfg = {}, const BrickLibrary& library = BrickLibrary::standard());

  std::optional<std::string> next_line(const GenerationContext& ctx, double temperature) override;
  const BrickStructure& plan() const { return plan_; }
  int replans() const { return replans_; }

 private:
  VoxelGrid target_;
  const BrickLibrary& library_;
  Rng rng_;
  BrickStructure plan_;
  std::size_t emitted_ = 0;
  int replans_ = 0;
};

/// Chat-completions backed generator: instruction prompt as the user message,
/// partial structure as an assistant prefix, stop at newline.
class EndpointGenerator : public BrickGenerator {
 public:
  explicit EndpointGenerator(EndpointConfig cfg) : client_(std::move(cfg)) {}

  std::optional<std::string> next_line(const GenerationContext& ctx, double temperature) override;
  ChatClient& client() { return client_; }

 private:
  ChatClient client_;
};

}  // namespace brickgen
