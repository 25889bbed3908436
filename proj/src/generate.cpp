#include "brickgen/generate.hpp"

#include <algorithm>
#include <chrono>
#include <istream>
#include <ostream>
#include <set>

namespace brickgen {

const char* to_string(GenerationFlag f) {
  switch (f) {
    case GenerationFlag::stable: return "stable";
    case GenerationFlag::rollback_exhausted: return "rollback_exhausted";
  }
  return "unknown";
}

void TraceLog::write(const nlohmann::json& event) {
  out_ << event.dump() << '\n';
  out_.flush();
}

namespace {

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; });
}

}  // namespace

Sample rejection_sample(BrickGenerator& gen, const InstructionPrompt& prompt, const BrickStructure& s,
                        const GenerationConfig& cfg, TraceLog* trace, const BrickLibrary& library) {
  OccupancyMap occ(s.grid);
  for (std::size_t i = 0; i < s.size(); ++i) occ.place(s.bricks[i], static_cast<int>(i));
  const GenerationContext ctx{prompt, serialize_structure(s)};
  const int index = static_cast<int>(s.size());

  Sample out;
  double temperature = cfg.temperature;
  std::set<std::string> rejected;
  while (out.rejections < cfg.max_rejections) {
    out.temperature = temperature;
    std::optional<std::string> line = gen.next_line(ctx, temperature);
    if (!line || is_blank(*line)) {
      if (trace) trace->write({{"event", "draw"}, {"brick", index}, {"line", nullptr}, {"temperature", temperature}});
      out.kind = Sample::Kind::end;
      return out;
    }
    ValidityResult v;
    std::optional<RawBrick> raw = match_brick_line(*line, cfg.parse);
    if (!raw) {
      v = ValidityResult::fail(InvalidKind::malformed);
    } else {
      v = check_brick_validity(*raw, occ, index, library);
    }
    if (trace) {
      nlohmann::json e{{"event", "draw"}, {"brick", index}, {"line", *line}, {"temperature", temperature}};
      if (!v.valid) e["rejected"] = to_string(*v.kind);
      trace->write(e);
    }
    if (v.valid) {
      out.kind = Sample::Kind::brick;
      out.brick = Brick{{raw->h, raw->w}, raw->x, raw->y, raw->z};
      return out;
    }
    ++out.rejections;
    if (!rejected.insert(*line).second) temperature += cfg.temperature_step;
  }
  out.kind = Sample::Kind::exhausted;
  return out;
}

BrickStructure rollback(const BrickStructure& s, const StabilityReport& report) {
  if (report.stable || report.unstable.empty()) {
    throw Error(ErrorCode::precondition, "rollback needs an unstable report");
  }
  const int first = report.unstable.front();
  BrickStructure prefix{s.grid, {}};
  prefix.bricks.assign(s.bricks.begin(), s.bricks.begin() + std::min<std::size_t>(first, s.size()));
  return prefix;
}

GenerationResult generate_structure(BrickGenerator& gen, const std::string& caption, const GenerationConfig& cfg,
                                    TraceLog* trace, const BrickLibrary& library) {
  if (caption.empty()) throw Error(ErrorCode::empty_caption, "prompt is empty");
  if (cfg.temperature <= 0 || cfg.max_rejections < 1 || cfg.max_rollbacks < 1) {
    throw Error(ErrorCode::precondition, "generation config out of range");
  }
  const auto start = std::chrono::steady_clock::now();
  const InstructionPrompt prompt = build_instruction_prompt(caption, library);
  if (trace) trace->write({{"event", "start"}, {"caption", caption}});

  GenerationResult r;
  r.structure.grid = cfg.grid;
  for (;;) {
    for (;;) {
      Sample smp = rejection_sample(gen, prompt, r.structure, cfg, trace, library);
      if (smp.kind == Sample::Kind::brick) {
        r.structure.bricks.push_back(smp.brick);
        r.rejections.push_back(smp.rejections);
        continue;
      }
      if (smp.kind == Sample::Kind::exhausted) {
        ++r.forced_ends;
        if (trace) trace->write({{"event", "exhausted"}, {"brick", r.structure.size()}});
      }
      break;
    }
    r.report = analyze(r.structure, cfg.physics);
    if (trace) {
      trace->write({{"event", "analyze"}, {"bricks", r.structure.size()}, {"stable", r.report.stable},
                    {"unstable", r.report.unstable}});
    }
    if (r.report.stable) {
      r.flag = GenerationFlag::stable;
      break;
    }
    if (r.rollbacks >= cfg.max_rollbacks) {
      r.flag = GenerationFlag::rollback_exhausted;
      break;
    }
    ++r.rollbacks;
    while (!r.report.stable) {
      const int first = r.report.unstable.front();
      r.structure = rollback(r.structure, r.report);
      r.rejections.resize(r.structure.size());
      r.report = analyze(r.structure, cfg.physics);
      if (trace) {
        trace->write({{"event", "rollback"}, {"first_unstable", first}, {"kept", r.structure.size()},
                      {"stable", r.report.stable}});
      }
    }
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (trace) {
    trace->write({{"event", "done"}, {"flag", to_string(r.flag)}, {"bricks", r.structure.size()},
                  {"rollbacks", r.rollbacks}});
  }
  return r;
}

// ScriptedGenerator ---------------------------------------------------------

ScriptedGenerator ScriptedGenerator::from_trace(std::istream& in) {
  std::vector<std::optional<std::string>> script;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (is_blank(line)) continue;
    nlohmann::json e = nlohmann::json::parse(line, nullptr, false);
    if (e.is_discarded() || !e.is_object()) throw LineError(ErrorCode::schema_violation, n, "trace line is not a JSON object");
    if (e.value("event", "") != "draw") continue;
    const auto it = e.find("line");
    if (it == e.end()) throw LineError(ErrorCode::schema_violation, n, "draw event without a line");
    if (it->is_null()) {
      script.emplace_back(std::nullopt);
    } else {
      script.emplace_back(it->get<std::string>());
    }
  }
  return ScriptedGenerator(std::move(script));
}

std::optional<std::string> ScriptedGenerator::next_line(const GenerationContext& ctx, double temperature) {
  temperatures_.push_back(temperature);
  contexts_.push_back(ctx.text());
  if (pos_ >= script_.size()) return std::nullopt;
  return script_[pos_++];
}

// GreedyFillGenerator -------------------------------------------------------

GreedyFillGenerator::GreedyFillGenerator(VoxelGrid target, std::uint64_t seed, const PhysicalParams& params,
                                         LegolizeConfig legolize_cfg, const BrickLibrary& library)
    : target_(std::move(target)), library_(library), rng_(derive_seed(seed, 0x9e11)) {
  legolize_cfg.seed = seed;
  plan_ = legolize(target_, params, legolize_cfg, library_).structure;
}

std::optional<std::string> GreedyFillGenerator::next_line(const GenerationContext& ctx, double) {
  const BrickStructure partial = parse_structure(ctx.partial, plan_.grid, {.lenient = true}, library_);
  if (partial.size() < emitted_) {
    // Rolled back: keep what survived, refill the rest of the shape.
    std::set<Brick> kept(partial.bricks.begin(), partial.bricks.end());
    std::vector<int> lost;
    for (std::size_t i = 0; i < plan_.size(); ++i) {
      if (!kept.count(plan_.bricks[i])) lost.push_back(static_cast<int>(i));
    }
    BrickStructure next = partial;
    if (!lost.empty()) {
      BrickStructure refilled = rebuild_region(plan_, lost, rng_, library_);
      std::vector<Brick> fresh;
      for (const Brick& b : refilled.bricks) {
        if (!kept.count(b)) fresh.push_back(b);
      }
      std::sort(fresh.begin(), fresh.end(), raster_less);
      next.bricks.insert(next.bricks.end(), fresh.begin(), fresh.end());
    }
    plan_ = std::move(next);
    ++replans_;
  }
  emitted_ = partial.size();
  if (emitted_ >= plan_.size()) return std::nullopt;
  if (!std::equal(partial.bricks.begin(), partial.bricks.end(), plan_.bricks.begin())) {
    // The caller diverged from the plan; stop rather than guess.
    return std::nullopt;
  }
  ++emitted_;
  return format_brick(plan_.bricks[emitted_ - 1]);
}

// EndpointGenerator ---------------------------------------------------------

std::optional<std::string> EndpointGenerator::next_line(const GenerationContext& ctx, double temperature) {
  const EndpointConfig& cfg = client_.config();
  nlohmann::json messages = nlohmann::json::array();
  messages.push_back({{"role", "system"}, {"content", ctx.prompt.system}});
  if (cfg.assistant_prefix) {
    messages.push_back({{"role", "user"}, {"content", ctx.prompt.user}});
    if (!ctx.partial.empty()) messages.push_back({{"role", "assistant"}, {"content", ctx.partial}});
  } else {
    messages.push_back({{"role", "user"}, {"content", ctx.text()}});
  }
  nlohmann::json body{{"messages", messages},
                      {"temperature", temperature},
                      {"stop", nlohmann::json::array({"\n"})},
                      {"max_tokens", cfg.max_tokens}};
  std::string text = client_.complete(std::move(body));
  auto nl = text.find('\n');
  if (nl != std::string::npos) text.resize(nl);
  while (!text.empty() && (text.back() == '\r' || text.back() == ' ')) text.pop_back();
  if (text.empty()) return std::nullopt;
  return text;
}

}  // namespace brickgen
