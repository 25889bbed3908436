#include "brickgen/textio.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace brickgen {

namespace {

// Canonical non-negative decimal: no sign, no leading zeros, at most 6 digits.
bool take_int(std::string_view& s, int& out) {
  std::size_t n = 0;
  while (n < s.size() && s[n] >= '0' && s[n] <= '9') ++n;
  if (n == 0 || n > 6) return false;
  if (n > 1 && s[0] == '0') return false;
  std::from_chars(s.data(), s.data() + n, out);
  s.remove_prefix(n);
  return true;
}

bool take(std::string_view& s, std::string_view lit) {
  if (s.substr(0, lit.size()) != lit) return false;
  s.remove_prefix(lit.size());
  return true;
}

}  // namespace

std::optional<RawBrick> match_brick_line(std::string_view s, ParseOptions opts) {
  RawBrick r;
  if (!take_int(s, r.h)) return std::nullopt;
  if (!take(s, kTimes)) {
    if (!opts.lenient || !(take(s, "x") || take(s, "X"))) return std::nullopt;
  }
  if (!take_int(s, r.w)) return std::nullopt;
  if (!take(s, " (")) return std::nullopt;
  if (!take_int(s, r.x) || !take(s, ",")) return std::nullopt;
  if (!take_int(s, r.y) || !take(s, ",")) return std::nullopt;
  if (!take_int(s, r.z) || !take(s, ")")) return std::nullopt;
  if (!s.empty()) return std::nullopt;
  return r;
}

Brick parse_brick_line(std::string_view line, const GridWorld& grid, ParseOptions opts,
                       const BrickLibrary& library) {
  auto raw = match_brick_line(line, opts);
  if (!raw) {
    throw Error(ErrorCode::malformed_line, "malformed brick line: \"" + std::string(line) + "\"");
  }
  return new_brick({raw->h, raw->w}, raw->x, raw->y, raw->z, grid, library);
}

std::string format_brick(const Brick& b) {
  std::string out;
  out.reserve(24);
  out += std::to_string(b.dims.h);
  out += kTimes;
  out += std::to_string(b.dims.w);
  out += " (";
  out += std::to_string(b.x);
  out += ',';
  out += std::to_string(b.y);
  out += ',';
  out += std::to_string(b.z);
  out += ')';
  return out;
}

std::string serialize_structure(const BrickStructure& s) {
  std::string out;
  for (const auto& b : s.bricks) {
    out += format_brick(b);
    out += '\n';
  }
  return out;
}

BrickStructure parse_structure(std::string_view text, const GridWorld& grid, ParseOptions opts,
                               const BrickLibrary& library) {
  BrickStructure s{grid, {}};
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) break;
    try {
      s.bricks.push_back(parse_brick_line(line, grid, opts, library));
    } catch (const Error& e) {
      throw LineError(e.code(), line_no, e.what());
    }
  }
  return s;
}

InstructionPrompt build_instruction_prompt(const std::string& caption, const BrickLibrary& library) {
  if (caption.empty()) throw Error(ErrorCode::empty_caption, "caption is empty");
  // Allowed-dimension list follows the catalogue order, each canonical brick
  // listed short-side-first followed by its rotation.
  std::string dims;
  auto append = [&dims](BrickDims d) {
    if (!dims.empty()) dims += ", ";
    dims += std::to_string(d.h) + std::string(kTimes) + std::to_string(d.w);
  };
  for (const auto& part : library.parts()) {
    BrickDims a = part.canonical.h <= part.canonical.w ? part.canonical : part.canonical.rotated();
    append(a);
    if (a.h != a.w) append(a.rotated());
  }
  InstructionPrompt p;
  p.system = "You are a helpful assistant.";
  p.user =
      "Create a LEGO model of the input. Format your response as a list of bricks: "
      "<brick dimensions> <brick position>, where the brick position is (x,y,z).\n"
      "Allowed brick dimensions are " + dims + ".\n"
      "All bricks are 1 unit tall.\n"
      "\n"
      "### Input:\n" + caption;
  return p;
}

// LDraw ---------------------------------------------------------------------

std::string LDrawLine::to_string() const {
  std::ostringstream os;
  os << "1 " << color << ' ' << x << ' ' << y << ' ' << z;
  for (int v : rotation) os << ' ' << v;
  os << ' ' << part;
  return os.str();
}

std::string LDrawDocument::to_string() const {
  std::string out;
  for (const auto& h : header) {
    out += h;
    out += "\r\n";
  }
  for (const auto& l : lines) {
    out += l.to_string();
    out += "\r\n";
  }
  return out;
}

LDrawDocument export_ldraw(const BrickStructure& s, const std::vector<int>* colors,
                           const BrickLibrary& library, const std::string& title) {
  if (colors && colors->size() != s.size()) {
    throw Error(ErrorCode::dimension_mismatch, "color list length differs from brick count");
  }
  LDrawDocument doc;
  doc.header = {"0 " + title, "0 Name: model.ldr", "0 Author: brickgen"};
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Brick& b = s.bricks[i];
    const PartInfo* part = library.part_for(b.dims);
    if (!part) {
      throw Error(ErrorCode::unknown_part, "no LDraw part for " + format_brick(b));
    }
    LDrawLine l;
    l.color = colors ? (*colors)[i] : kLDrawDefaultColor;
    // Stud pitch is 20 LDU, brick height 24 LDU; LDraw -Y points up and a
    // brick's origin sits at its top face.
    l.x = 20 * b.x + 10 * b.dims.h;
    l.z = 20 * b.y + 10 * b.dims.w;
    l.y = -(b.z + 1) * 24;
    if (b.dims != part->canonical) {
      const int rot[9] = {0, 0, 1, 0, 1, 0, -1, 0, 0};
      std::copy(std::begin(rot), std::end(rot), l.rotation);
    }
    l.part = part->ldraw_part + ".dat";
    doc.lines.push_back(l);
  }
  return doc;
}

std::string export_obj(const BrickStructure& s) {
  std::ostringstream os;
  os << "# brickgen cuboid export\n";
  int base = 1;
  for (const auto& b : s.bricks) {
    const double x0 = b.x, x1 = b.x_end(), y0 = b.y, y1 = b.y_end(), z0 = b.z, z1 = b.z + 1;
    for (int k = 0; k < 8; ++k) {
      os << "v " << ((k & 1) ? x1 : x0) << ' ' << ((k & 2) ? y1 : y0) << ' ' << ((k & 4) ? z1 : z0)
         << '\n';
    }
    static const int quads[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4},
                                    {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
    for (const auto& q : quads) {
      os << "f " << base + q[0] << ' ' << base + q[1] << ' ' << base + q[2] << ' ' << base + q[3]
         << '\n';
    }
    base += 8;
  }
  return os.str();
}

// Dataset -------------------------------------------------------------------

nlohmann::json to_json(const DatasetRecord& r) {
  nlohmann::json j = r.extra;
  j["object_id"] = r.object_id;
  j["category"] = r.category;
  j["captions"] = r.captions;
  j["bricks"] = r.bricks;
  j["stability_scores"] = r.stability_scores;
  j["variant_index"] = r.variant_index;
  return j;
}

DatasetRecord record_from_json(const nlohmann::json& j, int line) {
  auto fail = [line](const std::string& msg) -> DatasetRecord {
    throw LineError(ErrorCode::schema_violation, line, msg);
  };
  if (!j.is_object()) return fail("record is not a JSON object");
  auto require = [&](const char* key, bool ok) {
    if (!j.contains(key)) fail(std::string("missing field '") + key + "'");
    if (!ok) fail(std::string("field '") + key + "' has the wrong type");
  };
  require("object_id", j.contains("object_id") && j["object_id"].is_string());
  require("category", j.contains("category") && j["category"].is_string());
  require("captions", j.contains("captions") && j["captions"].is_array());
  require("bricks", j.contains("bricks") && j["bricks"].is_string());
  require("stability_scores", j.contains("stability_scores") && j["stability_scores"].is_array());
  require("variant_index", j.contains("variant_index") && j["variant_index"].is_number_integer());

  DatasetRecord r;
  r.object_id = j["object_id"].get<std::string>();
  r.category = j["category"].get<std::string>();
  for (const auto& c : j["captions"]) {
    if (!c.is_string()) fail("captions must be strings");
    r.captions.push_back(c.get<std::string>());
  }
  if (r.captions.size() != 5) {
    fail("expected 5 captions, got " + std::to_string(r.captions.size()));
  }
  r.bricks = j["bricks"].get<std::string>();
  for (const auto& v : j["stability_scores"]) {
    if (!v.is_number()) fail("stability_scores must be numbers");
    r.stability_scores.push_back(v.get<double>());
  }
  std::size_t lines = 0;
  for (std::size_t pos = 0; pos < r.bricks.size();) {
    auto nl = r.bricks.find('\n', pos);
    if (nl == std::string::npos) nl = r.bricks.size();
    if (nl > pos) ++lines;
    pos = nl + 1;
  }
  if (lines != r.stability_scores.size()) {
    fail("stability_scores length " + std::to_string(r.stability_scores.size()) +
         " differs from brick count " + std::to_string(lines));
  }
  r.variant_index = j["variant_index"].get<int>();
  for (auto it = j.begin(); it != j.end(); ++it) {
    static const char* known[] = {"object_id", "category", "captions",
                                  "bricks", "stability_scores", "variant_index"};
    bool is_known = false;
    for (const char* k : known) is_known = is_known || it.key() == k;
    if (!is_known) r.extra[it.key()] = it.value();
  }
  return r;
}

void DatasetWriter::write(const DatasetRecord& r) {
  // Validate through the reader path so both sides share one schema.
  record_from_json(to_json(r), static_cast<int>(written_) + 1);
  if (mode_ == DatasetMode::stable_only) {
    for (double s : r.stability_scores) {
      if (!(s > 0.0)) {
        throw Error(ErrorCode::schema_violation,
                    "record " + r.object_id + " has a non-positive stability score");
      }
    }
  }
  out_ << to_json(r).dump() << '\n';
  ++written_;
}

std::optional<DatasetRecord> DatasetReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw LineError(ErrorCode::schema_violation, line_, e.what());
    }
    return record_from_json(j, line_);
  }
  return std::nullopt;
}

std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open dataset " + path.string());
  DatasetReader reader(in);
  std::vector<DatasetRecord> out;
  while (auto r = reader.next()) out.push_back(std::move(*r));
  return out;
}

void write_dataset(const std::filesystem::path& path, const std::vector<DatasetRecord>& records,
                   DatasetMode mode) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write dataset " + path.string());
  DatasetWriter writer(out, mode);
  for (const auto& r : records) writer.write(r);
}

}  // namespace brickgen
