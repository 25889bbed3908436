#include "brickgen/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace brickgen {

namespace {

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

const char* const kCaptionTemplate =
    "This is a rendering of a 3D object built with LEGO bricks with 24 different views. "
    "The object belongs to the category of {CATEGORY_NAME}. "
    "You will generate five different captions for this {CATEGORY_NAME} that:\n"
    "\n"
    "1. Describes the core object/subject and its key geometric features\n"
    "\n"
    "2. Focuses on structure, geometry, and layout information\n"
    "\n"
    "3. Uses confident, concrete, and declarative language\n"
    "\n"
    "4. Omits color and texture information\n"
    "\n"
    "5. Excludes medium-related terms (model, render, design)\n"
    "\n"
    "6. Do not describe or reference each view individually.\n"
    "\n"
    "7. Focus on form over function. Describe the physical appearance of components rather than their "
    "purpose.\n"
    "\n"
    "8. Describe components in detail, including size, shape, and position relative to other components.\n"
    "\n"
    "9. The five captions should be from coarse to fine, with the first one being the most coarse-grained "
    "(e.g., a general description of the object, within 10 words) and the last one being the most "
    "fine-grained (e.g., a detailed description of the object, within 50 words). The five captions should "
    "be different from each other. Do not include any ordering numbers (e.g., 1, a, etc.).\n"
    "\n"
    "10. Describe the object using the category name \"{CATEGORY_NAME}\" or synonyms of the category name "
    "\"{CATEGORY_NAME}\".";

struct Extent {
  int x0 = 0, x1 = -1, y0 = 0, y1 = -1, z0 = 0, z1 = -1;
  std::size_t count = 0;
  int sx() const { return x1 - x0 + 1; }
  int sy() const { return y1 - y0 + 1; }
  int sz() const { return z1 - z0 + 1; }
};

Extent extent_of(const VoxelGrid& g) {
  Extent e;
  for (const Voxel& v : g.occupied()) {
    if (e.count++ == 0) {
      e.x0 = e.x1 = v.x;
      e.y0 = e.y1 = v.y;
      e.z0 = e.z1 = v.z;
      continue;
    }
    e.x0 = std::min(e.x0, v.x), e.x1 = std::max(e.x1, v.x);
    e.y0 = std::min(e.y0, v.y), e.y1 = std::max(e.y1, v.y);
    e.z0 = std::min(e.z0, v.z), e.z1 = std::max(e.z1, v.z);
  }
  return e;
}

}  // namespace

// Captions ------------------------------------------------------------------

std::string caption_prompt(const std::string& category) {
  return replace_all(kCaptionTemplate, "{CATEGORY_NAME}", category);
}

std::vector<std::string> parse_captions(const std::string& completion) {
  std::vector<std::string> out;
  std::istringstream in(completion);
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t\r");
    out.push_back(line.substr(b, e - b + 1));
  }
  if (out.size() != kCaptionCount) {
    throw Error(ErrorCode::malformed_caption_response,
                "expected " + std::to_string(kCaptionCount) + " captions, got " + std::to_string(out.size()));
  }
  return out;
}

std::vector<std::string> OfflineCaptioner::captions(const CaptionInput& input, const std::string& category) {
  const Extent e = extent_of(input.shape);
  if (e.count == 0) throw Error(ErrorCode::empty_grid, "cannot caption an empty shape");
  const int footprint_long = std::max(e.sx(), e.sy());
  const int footprint_short = std::min(e.sx(), e.sy());
  const char* build = e.sz() > 1.5 * footprint_long ? "tall"
                      : 2 * e.sz() < footprint_short ? "low, flat"
                                                     : "compact";
  const double fill = 100.0 * e.count / (double(e.sx()) * e.sy() * e.sz());

  // Widest and narrowest layers by occupied cells.
  std::vector<int> layer(input.shape.D(), 0);
  for (const Voxel& v : input.shape.occupied()) ++layer[v.z];
  int widest = e.z0, narrowest = e.z0;
  for (int z = e.z0; z <= e.z1; ++z) {
    if (layer[z] > layer[widest]) widest = z;
    if (layer[z] < layer[narrowest]) narrowest = z;
  }
  auto pos = [&](int z) {
    double t = e.sz() > 1 ? double(z - e.z0) / (e.sz() - 1) : 0.0;
    return t < 1.0 / 3 ? "bottom" : t < 2.0 / 3 ? "middle" : "top";
  };
  char fill_text[32];
  std::snprintf(fill_text, sizeof fill_text, "%.0f", fill);

  std::vector<std::string> out;
  out.push_back("A " + std::string(build) + " " + category + ".");
  out.push_back("A " + std::string(build) + " " + category + " with a " + std::to_string(footprint_long) + " by " +
                std::to_string(footprint_short) + " footprint.");
  out.push_back("A " + category + " " + std::to_string(e.sz()) + " layers tall on a " + std::to_string(e.sx()) +
                " by " + std::to_string(e.sy()) + " base, filling about " + fill_text + " percent of its bounds.");
  out.push_back("A " + category + " spanning " + std::to_string(e.sx()) + " by " + std::to_string(e.sy()) + " by " +
                std::to_string(e.sz()) + " units, widest near the " + pos(widest) + " with " +
                std::to_string(layer[widest]) + " cells in one layer.");
  out.push_back("A " + std::string(build) + " " + category + " of " + std::to_string(e.count) + " cells, " +
                std::to_string(e.sx()) + " by " + std::to_string(e.sy()) + " at its widest extent and " +
                std::to_string(e.sz()) + " layers high; its " + pos(widest) + " layer is broadest at " +
                std::to_string(layer[widest]) + " cells and its " + pos(narrowest) + " layer narrowest at " +
                std::to_string(layer[narrowest]) + ".");
  return out;
}

std::vector<std::string> RemoteCaptioner::captions(const CaptionInput& input, const std::string& category) {
  nlohmann::json content = nlohmann::json::array();
  content.push_back({{"type", "text"}, {"text", caption_prompt(category)}});
  for (const auto& png : input.renders) {
    content.push_back(
        {{"type", "image_url"}, {"image_url", {{"url", "data:image/png;base64," + base64_encode(png)}}}});
  }
  nlohmann::json body{{"messages", nlohmann::json::array({{{"role", "user"}, {"content", content}}})}};
  return parse_captions(client_.complete(std::move(body)));
}

// Dataset -------------------------------------------------------------------

nlohmann::json DatasetSummary::to_json() const {
  return {{"objects_in", objects_in},
          {"objects_failed", objects_failed},
          {"objects_with_stable", objects_with_stable},
          {"variants", variants},
          {"variants_stable", variants_stable},
          {"stable_fraction", stable_fraction()},
          {"dropped_token_cap", dropped_token_cap},
          {"records", records},
          {"errors", errors}};
}

int approx_tokens(const std::string& text) { return static_cast<int>((text.size() + 3) / 4); }

DatasetSummary build_dataset(const std::vector<ShapeSource>& shapes, CaptionProvider& captioner,
                             const DatasetConfig& cfg, const std::function<void(const DatasetRecord&)>& emit,
                             const BrickLibrary& library) {
  if (shapes.empty()) throw Error(ErrorCode::empty_input, "no shapes given");
  struct Outcome {
    VoxelGrid grid;
    std::vector<LegolizeResult> variants;
    std::string error;
  };
  std::vector<Outcome> outcomes(shapes.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next++) < shapes.size();) {
      const ShapeSource& src = shapes[i];
      try {
        outcomes[i].grid = src.grid ? *src.grid : load_shape(src.path, cfg.grid);
        LegolizeConfig lc = cfg.legolize;
        lc.seed = derive_seed(cfg.legolize.seed, i);
        outcomes[i].variants = generate_variants(outcomes[i].grid, cfg.physics, lc, library);
      } catch (const std::exception& e) {
        outcomes[i].error = e.what();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(cfg.workers, static_cast<int>(shapes.size())));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  DatasetSummary sum;
  sum.objects_in = static_cast<int>(shapes.size());
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const ShapeSource& src = shapes[i];
    Outcome& out = outcomes[i];
    if (!out.error.empty()) {
      ++sum.objects_failed;
      sum.errors.push_back(src.id + ": " + out.error);
      continue;
    }
    sum.variants += static_cast<int>(out.variants.size());
    std::vector<const LegolizeResult*> stable;
    for (const auto& v : out.variants) {
      if (v.report.stable) stable.push_back(&v);
    }
    sum.variants_stable += static_cast<int>(stable.size());
    if (stable.empty()) continue;
    ++sum.objects_with_stable;

    std::vector<std::string> captions;
    try {
      captions = captioner.captions({out.grid, {}}, src.category);
      if (captions.size() != kCaptionCount) {
        throw Error(ErrorCode::malformed_caption_response, "captioner returned " + std::to_string(captions.size()));
      }
    } catch (const std::exception& e) {
      ++sum.objects_failed;
      sum.errors.push_back(src.id + ": " + e.what());
      continue;
    }
    std::size_t longest = 0;
    for (std::size_t c = 1; c < captions.size(); ++c) {
      if (captions[c].size() > captions[longest].size()) longest = c;
    }
    const InstructionPrompt prompt = build_instruction_prompt(captions[longest], library);
    for (std::size_t k = 0; k < out.variants.size(); ++k) {
      const LegolizeResult& v = out.variants[k];
      if (!v.report.stable) continue;
      DatasetRecord rec;
      rec.object_id = src.id;
      rec.category = src.category;
      rec.captions = captions;
      rec.bricks = serialize_structure(v.structure);
      rec.stability_scores = v.report.scores;
      rec.variant_index = static_cast<int>(k);
      if (approx_tokens(prompt.system + prompt.user + rec.bricks) > cfg.token_cap) {
        ++sum.dropped_token_cap;
        continue;
      }
      emit(rec);
      ++sum.records;
    }
  }
  return sum;
}

// Metrics -------------------------------------------------------------------

EvalItem EvalItem::from_text(const std::string& bricks, const GridWorld& grid, const PhysicalParams& p) {
  EvalItem item;
  BrickStructure s;
  try {
    s = parse_structure(bricks, grid);
    (void)OccupancyMap::build(s);
  } catch (const Error&) {
    return item;
  }
  item.valid = true;
  const StabilityReport r = analyze(s, p);
  item.stable = r.stable;
  item.scores = r.scores;
  return item;
}

nlohmann::json MetricsReport::to_json() const {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json("N/A"); };
  return {{"total", total},
          {"valid", valid},
          {"stable", stable},
          {"percent_valid", percent_valid},
          {"percent_stable", percent_stable},
          {"percent_stable_of_valid", percent_stable_of_valid},
          {"mean_stability", opt(mean_stability)},
          {"min_stability", opt(min_stability)}};
}

MetricsReport compute_metrics(const std::vector<EvalItem>& items) {
  if (items.empty()) throw Error(ErrorCode::empty_input, "no results to score");
  MetricsReport m;
  m.total = items.size();
  double mean_sum = 0, min_sum = 0;
  for (const EvalItem& it : items) {
    if (!it.valid) continue;
    ++m.valid;
    if (it.stable) ++m.stable;
    double mean = 1.0, mn = 1.0;
    if (!it.scores.empty()) {
      double s = 0;
      mn = it.scores.front();
      for (double v : it.scores) {
        s += v;
        mn = std::min(mn, v);
      }
      mean = s / it.scores.size();
    }
    mean_sum += mean;
    min_sum += mn;
  }
  m.percent_valid = 100.0 * m.valid / m.total;
  m.percent_stable = 100.0 * m.stable / m.total;
  if (m.valid > 0) {
    m.percent_stable_of_valid = 100.0 * m.stable / m.valid;
    m.mean_stability = mean_sum / m.valid;
    m.min_stability = min_sum / m.valid;
  }
  return m;
}

// Novelty -------------------------------------------------------------------

NoveltyResult novelty_report(const VoxelGrid& query, const std::vector<VoxelGrid>& train,
                             const std::vector<std::string>& ids) {
  if (train.empty()) throw Error(ErrorCode::empty_train_set, "training set is empty");
  if (query.empty()) throw Error(ErrorCode::empty_grid, "query shape is empty");
  const std::vector<double> dq = squared_distance_field(query);

  NoveltyResult best;
  best.distance = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t k = 0; k < train.size(); ++k) {
    const VoxelGrid& t = train[k];
    if (!t.same_dims(query)) throw Error(ErrorCode::dimension_mismatch, "training grid " + std::to_string(k) + " differs in size");
    if (t.empty()) continue;
    // Every voxel outside the other shape is at least one unit away.
    std::size_t sym = 0;
    for (std::size_t i = 0; i < t.size(); ++i) sym += t.get(i) != query.get(i);
    if (found && static_cast<double>(sym) >= best.distance) continue;

    const std::vector<double> dt = squared_distance_field(t);
    double d = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (query.get(i)) d += std::sqrt(dt[i]);
      if (t.get(i)) d += std::sqrt(dq[i]);
    }
    if (!found || d < best.distance) {
      found = true;
      best.index = k;
      best.distance = d;
    }
  }
  if (!found) throw Error(ErrorCode::empty_train_set, "training set has no non-empty shape");
  best.id = best.index < ids.size() ? ids[best.index] : std::to_string(best.index);
  return best;
}

NoveltyResult novelty_report(const BrickStructure& query, const std::vector<DatasetRecord>& train) {
  std::vector<VoxelGrid> grids;
  std::vector<std::string> ids;
  grids.reserve(train.size());
  for (const DatasetRecord& r : train) {
    grids.push_back(occupancy_grid(parse_structure(r.bricks, query.grid)));
    ids.push_back(r.object_id + "#" + std::to_string(r.variant_index));
  }
  return novelty_report(occupancy_grid(query), grids, ids);
}

}  // namespace brickgen
