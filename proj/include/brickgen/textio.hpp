#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "brickgen/core.hpp"

namespace brickgen {

/// UTF-8 multiplication sign used between the two brick dimensions.
inline constexpr std::string_view kTimes = "\xC3\x97";

struct ParseOptions {
  bool lenient = false;  // also accept ASCII 'x' / 'X' as the dimension separator
};

/// Grammar only: `<int>×<int> (<int>,<int>,<int>)`. Returns nullopt on any violation.
struct RawBrick {
  int h = 0, w = 0, x = 0, y = 0, z = 0;
};
std::optional<RawBrick> match_brick_line(std::string_view line, ParseOptions opts = {});

Brick parse_brick_line(std::string_view line, const GridWorld& grid, ParseOptions opts = {},
                       const BrickLibrary& library = BrickLibrary::standard());

std::string format_brick(const Brick& b);
std::string serialize_structure(const BrickStructure& s);
/// Stops at the first blank line (end-of-structure marker) or end of text.
BrickStructure parse_structure(std::string_view text, const GridWorld& grid, ParseOptions opts = {},
                               const BrickLibrary& library = BrickLibrary::standard());

struct InstructionPrompt {
  std::string system;
  std::string user;
};
InstructionPrompt build_instruction_prompt(const std::string& caption,
                                           const BrickLibrary& library = BrickLibrary::standard());

// LDraw export ---------------------------------------------------------------

inline constexpr int kLDrawDefaultColor = 7;
inline constexpr int kLDrawInheritColor = 16;

struct LDrawLine {
  int color = kLDrawDefaultColor;
  int x = 0, y = 0, z = 0;  // LDU
  int rotation[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  std::string part;  // "3001.dat"

  std::string to_string() const;
};

struct LDrawDocument {
  std::vector<std::string> header;
  std::vector<LDrawLine> lines;

  std::string to_string() const;
};

LDrawDocument export_ldraw(const BrickStructure& s, const std::vector<int>* colors = nullptr,
                           const BrickLibrary& library = BrickLibrary::standard(),
                           const std::string& title = "brickgen model");

/// Minimal OBJ of per-brick cuboids, for debugging only.
std::string export_obj(const BrickStructure& s);

// Dataset records ------------------------------------------------------------

struct DatasetRecord {
  std::string object_id;
  std::string category;
  std::vector<std::string> captions;
  std::string bricks;
  std::vector<double> stability_scores;
  int variant_index = 0;
  nlohmann::json extra = nlohmann::json::object();  // unknown fields, preserved

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

enum class DatasetMode {
  any,
  stable_only,  // writer rejects records with a non-positive score
};

nlohmann::json to_json(const DatasetRecord& r);
/// Throws LineError(schema_violation) with `line` on schema problems.
DatasetRecord record_from_json(const nlohmann::json& j, int line = 1);

class DatasetWriter {
 public:
  DatasetWriter(std::ostream& out, DatasetMode mode = DatasetMode::any) : out_(out), mode_(mode) {}
  void write(const DatasetRecord& r);
  std::size_t written() const { return written_; }

 private:
  std::ostream& out_;
  DatasetMode mode_;
  std::size_t written_ = 0;
};

class DatasetReader {
 public:
  explicit DatasetReader(std::istream& in) : in_(in) {}
  std::optional<DatasetRecord> next();
  int line() const { return line_; }

 private:
  std::istream& in_;
  int line_ = 0;
};

std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path);
void write_dataset(const std::filesystem::path& path, const std::vector<DatasetRecord>& records,
                   DatasetMode mode = DatasetMode::any);

}  // namespace brickgen
