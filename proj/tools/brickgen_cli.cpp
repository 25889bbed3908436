// brickgen command line.
//
// Exit codes: 0 ok, 1 invalid input, 2 unstable (analyze --strict), 3 transport failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "brickgen/color.hpp"
#include "brickgen/generate.hpp"
#include "brickgen/geometry.hpp"
#include "brickgen/legolize.hpp"
#include "brickgen/pipeline.hpp"
#include "brickgen/stability.hpp"
#include "brickgen/textio.hpp"

using namespace brickgen;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kOk = 0, kInvalid = 1, kUnstable = 2, kTransport = 3;

#ifndef BRICKGEN_DATA_DIR
#define BRICKGEN_DATA_DIR "data"
#endif

struct Globals {
  std::uint64_t seed = 0;
  bool json = false;
  int grid = 20;
  std::string library;
};

struct Context {
  Globals g;
  std::unique_ptr<BrickLibrary> owned;

  const BrickLibrary& library() {
    if (g.library.empty()) return BrickLibrary::standard();
    if (!owned) owned = std::make_unique<BrickLibrary>(BrickLibrary::from_csv_file(g.library));
    return *owned;
  }
  GridWorld grid() const { return GridWorld{g.grid, g.grid, g.grid}; }
};

std::string read_text(const std::string& path) {
  if (path == "-") {
    std::stringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  out << text;
}

void print(const Context& ctx, const json& j, const std::string& text) {
  if (ctx.g.json) {
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << text;
  }
}

std::string report_text(const StabilityReport& r) {
  std::ostringstream os;
  os << (r.stable ? "stable" : "unstable") << "  bricks " << r.scores.size();
  if (!r.scores.empty()) os << "  min " << r.min_score() << "  mean " << r.mean_score();
  os << "  solve " << r.solve_seconds << " s\n";
  if (!r.unstable.empty()) {
    os << "unstable:";
    for (int i : r.unstable) os << ' ' << i;
    os << '\n';
  }
  return os.str();
}

PhysicalParams physics_from(double friction) {
  PhysicalParams p;
  p.friction_capacity = friction;
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  Context ctx;
  CLI::App app{"brick structure analysis, legolization and generation"};
  app.set_config("--config", "", "TOML configuration file");
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", ctx.g.seed, "random seed")->capture_default_str();
  app.add_flag("--json", ctx.g.json, "machine-readable output");
  app.add_option("--grid", ctx.g.grid, "grid edge length")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--library", ctx.g.library, "brick library CSV (default: built-in)");

  double friction = 0.98;
  app.add_option("--friction", friction, "friction capacity F_T in newtons")->capture_default_str();

  // validate ------------------------------------------------------------------
  auto* validate = app.add_subcommand("validate", "check a brick text file");
  std::string validate_in;
  bool lenient = false;
  validate->add_option("input", validate_in, "brick text file or -")->required();
  validate->add_flag("--lenient", lenient, "accept x as the dimension separator");
  validate->callback([&] {
    std::string text = read_text(validate_in);
    BrickStructure s = parse_structure(text, ctx.grid(), {.lenient = lenient}, ctx.library());
    (void)OccupancyMap::build(s);
    print(ctx, {{"valid", true}, {"bricks", s.size()}}, "valid, " + std::to_string(s.size()) + " bricks\n");
  });

  // analyze -------------------------------------------------------------------
  auto* analyze_cmd = app.add_subcommand("analyze", "stability analysis of a brick text file");
  std::string analyze_in, lp_dump;
  bool strict = false, buildability = false;
  analyze_cmd->add_option("input", analyze_in, "brick text file or -")->required();
  analyze_cmd->add_flag("--strict", strict, "exit 2 if unstable");
  analyze_cmd->add_flag("--buildability", buildability, "also report the first unstable prefix");
  analyze_cmd->add_option("--lp-dump", lp_dump, "write the program in CPLEX LP format");
  int analyze_exit = kOk;
  analyze_cmd->callback([&] {
    BrickStructure s = parse_structure(read_text(analyze_in), ctx.grid(), {}, ctx.library());
    SolveOptions so;
    std::ofstream dump;
    if (!lp_dump.empty()) {
      dump.open(lp_dump);
      so.lp_dump = &dump;
    }
    const PhysicalParams p = physics_from(friction);
    StabilityReport r = analyze(s, p, so);
    json j = to_json(r);
    std::string text = report_text(r);
    if (buildability) {
      auto k = check_buildability(s, p);
      j["first_unstable_prefix"] = k ? json(*k) : json(nullptr);
      text += k ? "first unstable prefix: " + std::to_string(*k) + " bricks\n" : "every prefix is stable\n";
    }
    print(ctx, j, text);
    if (strict && !r.stable) analyze_exit = kUnstable;
  });

  // legolize ------------------------------------------------------------------
  auto* lego = app.add_subcommand("legolize", "convert a voxel shape or OBJ mesh to a stable brick layout");
  std::string lego_in, lego_out, lego_report;
  LegolizeConfig lcfg;
  lego->add_option("input", lego_in, "voxel file (.rle/.raw) or .obj mesh")->required();
  lego->add_option("-o,--out", lego_out, "brick text output (default stdout)");
  lego->add_option("--report", lego_report, "stability JSON output");
  lego->add_option("--max-iterations", lcfg.max_iterations)->capture_default_str();
  lego->add_option("--radius", lcfg.radius)->capture_default_str();
  lego->add_option("--weak-threshold", lcfg.weak_threshold)->capture_default_str();
  lego->add_option("--variants", lcfg.variants, "emit this many variants (files get a .N suffix)");
  bool lego_variants = false;
  lego->callback([&] {
    lego_variants = lego->count("--variants") > 0;
    lcfg.seed = ctx.g.seed;
    const VoxelGrid grid = load_shape(lego_in, ctx.grid());
    const PhysicalParams p = physics_from(friction);
    std::vector<LegolizeResult> results;
    if (lego_variants) {
      results = generate_variants(grid, p, lcfg, ctx.library());
    } else {
      results.push_back(legolize(grid, p, lcfg, ctx.library()));
    }
    json summary = json::array();
    for (std::size_t k = 0; k < results.size(); ++k) {
      const auto& r = results[k];
      std::string suffix = results.size() > 1 ? "." + std::to_string(k) : "";
      if (!lego_out.empty()) write_text(lego_out + suffix, serialize_structure(r.structure));
      json j = to_json(r.report);
      j["iterations"] = r.iterations;
      j["converged"] = r.converged;
      j["bricks"] = r.structure.size();
      if (!lego_report.empty()) write_text(lego_report + suffix, j.dump(2) + "\n");
      summary.push_back(j);
      if (lego_out.empty() && !ctx.g.json) std::cout << serialize_structure(r.structure) << '\n';
      if (!lego_out.empty() && !ctx.g.json) {
        std::cerr << "variant " << k << ": " << r.structure.size() << " bricks, "
                  << (r.converged ? "converged" : "not converged") << " after " << r.iterations
                  << " iterations, min score " << r.report.min_score() << '\n';
      }
    }
    if (ctx.g.json) std::cout << (results.size() == 1 ? summary[0] : summary).dump(2) << '\n';
  });

  // generate ------------------------------------------------------------------
  auto* gen = app.add_subcommand("generate", "autoregressive generation with rejection sampling and rollback");
  std::string caption, gen_out, gen_ldr, gen_trace, replay, greedy_shape;
  EndpointConfig ecfg;
  GenerationConfig gcfg;
  bool no_prefix = false;
  gen->add_option("-p,--prompt", caption, "caption to build from")->required();
  gen->add_option("-o,--out", gen_out, "brick text output (default stdout)");
  gen->add_option("--ldr", gen_ldr, "LDraw output");
  gen->add_option("--trace", gen_trace, "JSONL session trace");
  auto* src_replay = gen->add_option("--replay", replay, "replay the draws of a trace file");
  auto* src_greedy = gen->add_option("--greedy", greedy_shape, "play back a legolized shape");
  gen->add_option("--endpoint", ecfg.base_url, "chat-completions base URL")->capture_default_str();
  gen->add_option("--model", ecfg.model)->capture_default_str();
  gen->add_option("--api-key-env", ecfg.api_key_env, "environment variable holding the API key")->capture_default_str();
  gen->add_option("--max-retries", ecfg.max_retries)->capture_default_str();
  gen->add_option("--timeout", ecfg.read_timeout_s, "read timeout in seconds")->capture_default_str();
  gen->add_flag("--no-assistant-prefix", no_prefix, "append the partial structure to the user message");
  gen->add_option("--temperature", gcfg.temperature)->capture_default_str();
  gen->add_option("--max-rejections", gcfg.max_rejections)->capture_default_str();
  gen->add_option("--max-rollbacks", gcfg.max_rollbacks)->capture_default_str();
  src_replay->excludes(src_greedy);
  gen->callback([&] {
    gcfg.grid = ctx.grid();
    gcfg.physics = physics_from(friction);
    ecfg.assistant_prefix = !no_prefix;
    std::unique_ptr<BrickGenerator> generator;
    if (!replay.empty()) {
      std::ifstream in(replay);
      if (!in) throw Error(ErrorCode::io, "cannot open " + replay);
      generator = std::make_unique<ScriptedGenerator>(ScriptedGenerator::from_trace(in));
    } else if (!greedy_shape.empty()) {
      generator = std::make_unique<GreedyFillGenerator>(load_shape(greedy_shape, gcfg.grid), ctx.g.seed,
                                                        gcfg.physics, LegolizeConfig{}, ctx.library());
    } else {
      generator = std::make_unique<EndpointGenerator>(ecfg);
    }
    std::ofstream trace_file;
    std::unique_ptr<TraceLog> trace;
    if (!gen_trace.empty()) {
      trace_file.open(gen_trace, std::ios::binary);
      if (!trace_file) throw Error(ErrorCode::io, "cannot write " + gen_trace);
      trace = std::make_unique<TraceLog>(trace_file);
    }
    GenerationResult r = generate_structure(*generator, caption, gcfg, trace.get(), ctx.library());
    const std::string text = serialize_structure(r.structure);
    if (!gen_out.empty()) write_text(gen_out, text);
    if (!gen_ldr.empty()) write_text(gen_ldr, export_ldraw(r.structure, nullptr, ctx.library(), caption).to_string());
    json j = to_json(r.report);
    j["flag"] = to_string(r.flag);
    j["rollbacks"] = r.rollbacks;
    j["rejections"] = r.rejections;
    j["forced_ends"] = r.forced_ends;
    j["wall_seconds"] = r.wall_seconds;
    j["bricks"] = r.structure.size();
    if (ctx.g.json) {
      std::cout << j.dump(2) << '\n';
    } else {
      if (gen_out.empty()) std::cout << text;
      std::cerr << to_string(r.flag) << ": " << r.structure.size() << " bricks, " << r.rollbacks << " rollbacks\n";
    }
  });

  // dataset build -------------------------------------------------------------
  auto* dataset = app.add_subcommand("dataset", "dataset construction");
  dataset->require_subcommand(1);
  auto* build = dataset->add_subcommand("build", "legolize shapes into captioned, stable records");
  std::string manifest, ds_out, captioner_kind = "offline";
  DatasetConfig dcfg;
  EndpointConfig cap_endpoint;
  cap_endpoint.max_tokens = 1024;
  build->add_option("manifest", manifest,
                    "CSV with id,category,path rows, or a directory of shapes (category = file stem)")
      ->required();
  build->add_option("-o,--out", ds_out, "JSONL output")->required();
  build->add_option("--captioner", captioner_kind)->check(CLI::IsMember({"offline", "remote"}))->capture_default_str();
  build->add_option("--variants", dcfg.legolize.variants)->capture_default_str();
  build->add_option("--max-iterations", dcfg.legolize.max_iterations)->capture_default_str();
  build->add_option("--token-cap", dcfg.token_cap)->capture_default_str();
  build->add_option("--workers", dcfg.workers)->capture_default_str();
  build->add_option("--endpoint", cap_endpoint.base_url, "caption endpoint base URL");
  build->add_option("--model", cap_endpoint.model, "caption model");
  build->add_option("--api-key-env", cap_endpoint.api_key_env)->capture_default_str();
  build->callback([&] {
    dcfg.grid = ctx.grid();
    dcfg.physics = physics_from(friction);
    dcfg.legolize.seed = ctx.g.seed;
    std::vector<ShapeSource> shapes;
    if (fs::is_directory(manifest)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(manifest)) {
        if (e.is_regular_file()) files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) shapes.push_back({f.stem().string(), f.stem().string(), f, std::nullopt});
    } else {
      std::istringstream in(read_text(manifest));
      std::string line;
      int n = 0;
      const fs::path base = fs::path(manifest).parent_path();
      while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
        if (f.size() != 3) throw LineError(ErrorCode::schema_violation, n, "expected id,category,path");
        if (n == 1 && f[0] == "id") continue;
        fs::path p = f[2];
        if (p.is_relative()) p = base / p;
        shapes.push_back({f[0], f[1], p, std::nullopt});
      }
    }
    std::unique_ptr<CaptionProvider> captioner;
    if (captioner_kind == "remote") {
      captioner = std::make_unique<RemoteCaptioner>(cap_endpoint);
    } else {
      captioner = std::make_unique<OfflineCaptioner>();
    }
    std::ofstream out(ds_out, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write " + ds_out);
    DatasetWriter writer(out, DatasetMode::stable_only);
    DatasetSummary sum = build_dataset(shapes, *captioner, dcfg, [&](const DatasetRecord& r) { writer.write(r); },
                                       ctx.library());
    std::ostringstream os;
    os << sum.objects_in << " objects, " << sum.objects_with_stable << " with a stable layout, " << sum.records
       << " records (" << sum.variants_stable << "/" << sum.variants << " variants stable, "
       << sum.dropped_token_cap << " over the token cap, " << sum.objects_failed << " failed)\n";
    for (const auto& e : sum.errors) os << "  " << e << '\n';
    print(ctx, sum.to_json(), os.str());
  });

  // metrics -------------------------------------------------------------------
  auto* metrics = app.add_subcommand("metrics", "validity and stability statistics over generated results");
  std::vector<std::string> metric_inputs;
  metrics->add_option("inputs", metric_inputs,
                      "JSONL files (objects with a \"bricks\" field) and/or brick text files")
      ->required();
  metrics->callback([&] {
    const PhysicalParams p = physics_from(friction);
    std::vector<EvalItem> items;
    for (const auto& path : metric_inputs) {
      if (fs::path(path).extension() == ".jsonl") {
        std::istringstream in(read_text(path));
        std::string line;
        int n = 0;
        while (std::getline(in, line)) {
          ++n;
          if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
          json j = json::parse(line, nullptr, false);
          if (j.is_discarded() || !j.contains("bricks") || !j["bricks"].is_string()) {
            throw LineError(ErrorCode::schema_violation, n, path + ": expected an object with a \"bricks\" string");
          }
          items.push_back(EvalItem::from_text(j["bricks"].get<std::string>(), ctx.grid(), p));
        }
      } else {
        items.push_back(EvalItem::from_text(read_text(path), ctx.grid(), p));
      }
    }
    MetricsReport m = compute_metrics(items);
    auto fmt = [](const std::optional<double>& v) {
      if (!v) return std::string("N/A");
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", *v);
      return std::string(buf);
    };
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "items %zu  valid %.1f%%  stable %.1f%% (%.1f%% of valid)  mean stability %s  min stability %s\n",
                  m.total, m.percent_valid, m.percent_stable, m.percent_stable_of_valid,
                  fmt(m.mean_stability).c_str(), fmt(m.min_stability).c_str());
    print(ctx, m.to_json(), buf);
  });

  // novelty -------------------------------------------------------------------
  auto* novelty = app.add_subcommand("novelty", "nearest training structure by chamfer distance");
  std::string nov_query, nov_train;
  novelty->add_option("query", nov_query, "brick text file")->required();
  novelty->add_option("--train", nov_train, "dataset JSONL")->required();
  novelty->callback([&] {
    BrickStructure q = parse_structure(read_text(nov_query), ctx.grid(), {}, ctx.library());
    NoveltyResult r = novelty_report(q, read_dataset(nov_train));
    print(ctx, {{"index", r.index}, {"id", r.id}, {"distance", r.distance}},
          "nearest " + r.id + " (record " + std::to_string(r.index) + "), chamfer " + std::to_string(r.distance) + "\n");
  });

  // export --------------------------------------------------------------------
  auto* exp = app.add_subcommand("export", "write a brick text file as LDraw or OBJ");
  std::string exp_in, exp_out, exp_format = "ldr", exp_colors, exp_title = "brickgen model";
  exp->add_option("input", exp_in, "brick text file or -")->required();
  exp->add_option("-o,--out", exp_out, "output file (default stdout)");
  exp->add_option("--format", exp_format)->check(CLI::IsMember({"ldr", "obj"}))->capture_default_str();
  exp->add_option("--colors", exp_colors, "JSON array of LDraw colour codes, one per brick");
  exp->add_option("--title", exp_title)->capture_default_str();
  exp->callback([&] {
    BrickStructure s = parse_structure(read_text(exp_in), ctx.grid(), {}, ctx.library());
    if (exp_format == "obj") {
      write_text(exp_out, export_obj(s));
      return;
    }
    std::vector<int> colors;
    if (!exp_colors.empty()) {
      json j = json::parse(read_text(exp_colors), nullptr, false);
      if (j.is_object() && j.contains("colors")) j = j["colors"];
      if (!j.is_array()) throw Error(ErrorCode::schema_violation, exp_colors + ": expected a JSON array");
      colors = j.get<std::vector<int>>();
      if (colors.size() != s.size()) throw Error(ErrorCode::schema_violation, "colour count does not match brick count");
    }
    write_text(exp_out, export_ldraw(s, colors.empty() ? nullptr : &colors, ctx.library(), exp_title).to_string());
  });

  // color ---------------------------------------------------------------------
  auto* color = app.add_subcommand("color", "face atlas and per-brick colours from a texture");
  std::string col_in, col_texture, col_palette = std::string(BRICKGEN_DATA_DIR) + "/palette.csv";
  std::string col_atlas, col_ldr, col_out;
  int cell = 16;
  color->add_option("input", col_in, "brick text file")->required();
  color->add_option("--texture", col_texture, "PNG laid out like the atlas");
  color->add_option("--palette", col_palette, "palette CSV (id,name,hex)")->capture_default_str();
  color->add_option("--atlas", col_atlas, "write the atlas layout (JSON) and a grey template PNG next to it");
  color->add_option("--cell", cell, "atlas cell size in pixels")->capture_default_str();
  color->add_option("--ldr", col_ldr, "coloured LDraw output");
  color->add_option("-o,--out", col_out, "per-brick colour codes (JSON)");
  color->callback([&] {
    BrickStructure s = parse_structure(read_text(col_in), ctx.grid(), {}, ctx.library());
    AtlasOptions ao;
    ao.cell = cell;
    FaceAtlas atlas = build_face_atlas(s, ao);
    if (!col_atlas.empty()) {
      write_text(col_atlas, atlas.to_json().dump() + "\n");
      Image blank(atlas.width, atlas.height);
      std::fill(blank.rgb.begin(), blank.rgb.end(), 128);
      if (atlas.width > 0) write_png(fs::path(col_atlas).replace_extension(".png"), blank);
    }
    const std::vector<int> occluded = occluded_bricks(s);
    json j{{"faces", atlas.regions.size()}, {"width", atlas.width}, {"height", atlas.height}, {"occluded", occluded}};
    if (!col_texture.empty()) {
      const Palette palette = Palette::from_csv_file(col_palette);
      const std::vector<int> codes = brick_color_codes(s, read_png(col_texture), atlas, palette);
      j["colors"] = codes;
      if (!col_out.empty()) write_text(col_out, json{{"colors", codes}}.dump() + "\n");
      if (!col_ldr.empty()) write_text(col_ldr, export_ldraw(s, &codes, ctx.library()).to_string());
    } else if (!col_ldr.empty() || !col_out.empty()) {
      throw Error(ErrorCode::precondition, "--ldr and --out need --texture");
    }
    std::ostringstream os;
    os << atlas.regions.size() << " visible faces, atlas " << atlas.width << "x" << atlas.height << ", "
       << occluded.size() << " occluded bricks\n";
    if (j.contains("colors")) {
      os << "colors:";
      for (int c : j["colors"]) os << ' ' << c;
      os << '\n';
    }
    print(ctx, j, os.str());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInvalid;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::transport:
      case ErrorCode::auth:
      case ErrorCode::rate_limited:
        return kTransport;
      default:
        return kInvalid;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return analyze_exit;
}
