#include "cosmoforge/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cosmoforge/classdist.hpp"
#include "cosmoforge/detect.hpp"
#include "cosmoforge/digest.hpp"
#include "cosmoforge/error.hpp"
#include "cosmoforge/fid.hpp"
#include "cosmoforge/image_io.hpp"
#include "cosmoforge/mosaic.hpp"
#include "cosmoforge/parallel.hpp"
#include "cosmoforge/prep.hpp"
#include "cosmoforge/prng.hpp"
#include "cosmoforge/ssim.hpp"

namespace cosmoforge::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::vector<std::pair<std::string, std::string>> parse_config(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return std::string{};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidFlag,
                  "config line " + std::to_string(line_no) + " is not 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key.starts_with("--")) key.erase(0, 2);
    if (key.empty()) {
      throw Error(ErrorCode::InvalidFlag, "config line " + std::to_string(line_no) + " has no key");
    }
    entries.emplace_back(std::move(key), std::move(value));
  }
  return entries;
}

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  std::string config;
  std::string run_record;
};

struct Context {
  const Globals& globals;
  std::ostream& out;
  json record;
  fs::path default_record;

  std::size_t workers() const { return resolve_workers(globals.workers); }

  void add_input(const fs::path& path) {
    record["inputs"].push_back({{"path", path.generic_string()}, {"sha256", sha256_file(path)}});
  }
  void add_inputs(const std::vector<fs::path>& paths) {
    std::vector<std::string> digests(paths.size());
    parallel_for(paths.size(), workers(),
                 [&](std::size_t i) { digests[i] = sha256_file(paths[i]); });
    for (std::size_t i = 0; i < paths.size(); ++i) {
      record["inputs"].push_back({{"path", paths[i].generic_string()}, {"sha256", digests[i]}});
    }
  }
  void add_output(const fs::path& path) {
    record["outputs"].push_back({{"path", path.generic_string()}, {"sha256", sha256_file(path)}});
  }
};

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

bool has_image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<fs::path> list_images(const fs::path& dir) {
  auto files = list_candidates(dir);
  std::erase_if(files, [](const fs::path& p) { return !has_image_extension(p); });
  if (files.empty()) throw Error(ErrorCode::EmptyInput, "no PNG/JPEG files in " + dir.string());
  return files;
}

std::vector<LabeledImage> load_labeled(const std::vector<fs::path>& files, std::size_t workers) {
  std::vector<std::optional<Raster>> images(files.size());
  parallel_for(files.size(), workers, [&](std::size_t i) { images[i] = read_image(files[i]); });
  std::vector<LabeledImage> out;
  out.reserve(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    out.push_back({files[i].filename().generic_string(), std::move(*images[i])});
  }
  return out;
}

// ---------------------------------------------------------------- prep

struct PrepArgs {
  std::string input;
  std::string output;
  std::size_t target_side = 256;
  std::size_t min_side = 128;
  double jitter_prob = 0.0;
  double jitter_shift = 30.0;
};

void add_prep(CLI::App& app, PrepArgs& a) {
  auto* sub = app.add_subcommand("prep", "Crop, resize and index a directory of raw images");
  sub->add_option("--input", a.input, "Directory of source images")->required();
  sub->add_option("--output", a.output, "Output directory for PNGs and manifest.json")->required();
  sub->add_option("--target-side", a.target_side, "Output side length in pixels")
      ->check(CLI::Range(std::size_t{16}, std::size_t{1} << 20));
  sub->add_option("--min-side", a.min_side, "Discard images whose shorter side is below this")
      ->check(CLI::PositiveNumber);
  sub->add_option("--hue-jitter-prob", a.jitter_prob, "Probability of hue augmentation per image")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--hue-max-shift", a.jitter_shift, "Maximum hue shift in degrees")
      ->check(CLI::Range(0.0, 180.0));
}

int run_prep(Context& ctx, const PrepArgs& a) {
  PrepOptions options;
  options.target_side = a.target_side;
  options.min_side = a.min_side;
  options.hue_jitter_probability = a.jitter_prob;
  options.hue_jitter_max_shift_deg = a.jitter_shift;
  options.seed = ctx.globals.seed;
  options.workers = ctx.workers();
  ctx.default_record = fs::path(a.output) / "run-record.json";

  const auto candidates = list_candidates(a.input);
  ctx.add_inputs(candidates);
  const auto manifest = prepare_dataset(a.input, a.output, options);

  std::size_t kept = 0, small = 0, malformed = 0;
  for (const auto& e : manifest) {
    if (e.status == PrepStatus::Kept) {
      ++kept;
      ctx.record["outputs"].push_back({{"path", *e.output_path}, {"sha256", *e.sha256}});
    } else if (e.status == PrepStatus::DiscardedSmall) {
      ++small;
    } else {
      ++malformed;
    }
  }
  ctx.add_output(fs::path(a.output) / options.manifest_name);
  ctx.record["result"] = {{"kept", kept}, {"discarded_small", small},
                          {"discarded_malformed", malformed}};
  ctx.out << "kept " << kept << ", discarded_small " << small << ", discarded_malformed "
          << malformed << "\n";
  return 0;
}

// ---------------------------------------------------------------- mosaic

struct MosaicArgs {
  std::string tiles;
  std::string blanks;
  std::string blank_candidates;
  std::size_t blank_count = 10;
  double blank_max_luma = 10.0;
  std::optional<double> blank_weight;
  std::size_t count = 25000;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t tile_side = 256;
  double scale_min = 0.5;
  double scale_max = 1.0;
  std::string plan;
  std::string plan_out;
  std::string out;
  std::size_t strip_threshold = 16384;
  bool plan_only = false;
};

void add_mosaic(CLI::App& app, MosaicArgs& a) {
  auto* sub = app.add_subcommand("mosaic", "Plan and render a seeded wide-view tile mosaic");
  sub->add_option("--tiles", a.tiles, "Directory of galaxy tiles");
  sub->add_option("--blanks", a.blanks, "Directory of blank (near-black) tiles");
  sub->add_option("--blank-candidates", a.blank_candidates,
                  "Directory to pick the darkest blank tiles from");
  sub->add_option("--blank-count", a.blank_count, "Number of blanks to pick from candidates");
  sub->add_option("--blank-max-luma", a.blank_max_luma, "Maximum mean luma of a blank tile")
      ->check(CLI::Range(0.0, 255.0));
  sub->add_option("--blank-weight", a.blank_weight,
                  "Probability a cell is blank (default 10/3010 when blanks exist, else 0)")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--count", a.count, "Target tile count; grid is ceil(sqrt(T)) columns")
      ->check(CLI::PositiveNumber);
  sub->add_option("--rows", a.rows, "Grid rows (overrides --count together with --cols)");
  sub->add_option("--cols", a.cols, "Grid columns (overrides --count together with --rows)");
  sub->add_option("--tile-side", a.tile_side, "Cell side in pixels")->check(CLI::PositiveNumber);
  sub->add_option("--scale-min", a.scale_min, "Lower bound of the tile scale")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--scale-max", a.scale_max, "Upper bound of the tile scale")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--plan", a.plan, "Render an existing plan JSON instead of planning");
  sub->add_option("--plan-out", a.plan_out, "Where to write the plan (default <out>.plan.json)");
  sub->add_option("--out", a.out, "Output PNG, or strip directory for large mosaics")->required();
  sub->add_option("--strip-threshold", a.strip_threshold,
                  "Write row strips when a side exceeds this many pixels");
  sub->add_flag("--plan-only", a.plan_only, "Write the plan without rendering");
}

int run_mosaic(Context& ctx, const MosaicArgs& a) {
  ctx.default_record = a.out + ".run.json";
  MosaicPlan plan;
  if (!a.plan.empty()) {
    ctx.add_input(a.plan);
    const Bytes text = read_file(a.plan);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MalformedJson, std::string("mosaic plan: ") + e.what());
    }
    plan = plan_from_json(j);
  } else {
    if (a.tiles.empty()) throw Error(ErrorCode::InvalidFlag, "mosaic needs --tiles or --plan");
    TilePool pool;
    const auto tiles = list_images(a.tiles);
    ctx.add_inputs(tiles);
    for (const auto& t : tiles) pool.galaxy_tiles.push_back(t.generic_string());
    if (!a.blanks.empty()) {
      const auto blanks = list_images(a.blanks);
      ctx.add_inputs(blanks);
      for (const auto& b : blanks) pool.blank_tiles.push_back(b.generic_string());
    } else if (!a.blank_candidates.empty()) {
      const auto candidates = list_images(a.blank_candidates);
      ctx.add_inputs(candidates);
      std::vector<Raster> rasters;
      for (const auto& c : candidates) rasters.push_back(read_image(c));
      for (const std::size_t id : select_blanks(rasters, a.blank_max_luma, a.blank_count)) {
        pool.blank_tiles.push_back(candidates[id].generic_string());
      }
    }
    pool.blank_weight = a.blank_weight.value_or(pool.blank_tiles.empty() ? 0.0 : kDefaultBlankWeight);
    GridShape grid = grid_for_count(a.count);
    if (a.rows > 0 || a.cols > 0) {
      if (a.rows == 0 || a.cols == 0) {
        throw Error(ErrorCode::InvalidFlag, "--rows and --cols must be given together");
      }
      grid = {a.rows, a.cols};
    }
    plan = plan_mosaic(pool, grid.rows, grid.cols, a.tile_side, {a.scale_min, a.scale_max},
                       ctx.globals.seed);
  }

  const fs::path plan_path = a.plan_out.empty() ? fs::path(a.out + ".plan.json") : fs::path(a.plan_out);
  if (a.plan.empty() || !a.plan_out.empty()) {
    write_text(plan_path, plan_to_json(plan).dump(2) + "\n");
    ctx.add_output(plan_path);
  }
  ctx.record["result"] = {{"rows", plan.rows}, {"cols", plan.cols}, {"tile_side", plan.tile_side},
                          {"cells", plan.entries.size()}};
  if (a.plan_only) {
    ctx.out << "planned " << plan.rows << "x" << plan.cols << " cells -> "
            << plan_path.generic_string() << "\n";
    return 0;
  }

  const TileLoader loader = [](const std::string& source) { return read_image(source); };
  const MosaicOutput output = write_mosaic(plan, loader, a.out, ctx.workers(), a.strip_threshold);
  for (const auto& f : output.files) ctx.add_output(f);
  ctx.record["result"]["width"] = output.width;
  ctx.record["result"]["height"] = output.height;
  ctx.record["result"]["strips"] = output.strips;
  ctx.out << "mosaic " << output.width << "x" << output.height << " ("
          << plan.rows << "x" << plan.cols << " cells) -> " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------- ssim-search

struct SsimArgs {
  std::string queries;
  std::string references;
  std::size_t k = 5;
  double threshold = kDefaultMemorizationThreshold;
  std::size_t sample = 0;
  std::string report;
  std::string contact_sheet;
  std::size_t cell_side = 128;
};

void add_ssim(CLI::App& app, SsimArgs& a) {
  auto* sub = app.add_subcommand("ssim-search", "Top-k SSIM search of generated images against a training set");
  sub->add_option("--queries", a.queries, "Directory of generated (query) images")->required();
  sub->add_option("--references", a.references, "Directory of training (reference) images")->required();
  sub->add_option("--k", a.k, "Matches reported per query")->check(CLI::PositiveNumber);
  sub->add_option("--threshold", a.threshold, "Memorization threshold on SSIM")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--sample", a.sample, "Randomly sample this many queries (0 = all)");
  sub->add_option("--report", a.report, "Report JSON path")->required();
  sub->add_option("--contact-sheet", a.contact_sheet, "Optional contact sheet PNG");
  sub->add_option("--cell-side", a.cell_side, "Contact sheet cell side")->check(CLI::PositiveNumber);
}

std::vector<fs::path> sample_paths(std::vector<fs::path> paths, std::size_t n, std::uint64_t seed) {
  if (n == 0 || n >= paths.size()) return paths;
  Prng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.bounded(paths.size() - i));
    std::swap(paths[i], paths[j]);
  }
  paths.resize(n);
  std::sort(paths.begin(), paths.end());
  return paths;
}

int run_ssim(Context& ctx, const SsimArgs& a) {
  if (!(a.threshold > 0.0)) throw Error(ErrorCode::InvalidParameter, "threshold must be in (0, 1]");
  ctx.default_record = a.report + ".run.json";
  const auto query_files = sample_paths(list_images(a.queries), a.sample, ctx.globals.seed);
  const auto ref_files = list_images(a.references);
  ctx.add_inputs(query_files);
  ctx.add_inputs(ref_files);
  const auto queries = load_labeled(query_files, ctx.workers());
  const auto references = load_labeled(ref_files, ctx.workers());

  SearchOptions options;
  options.k = a.k;
  options.threshold = a.threshold;
  options.workers = ctx.workers();
  const SimilarityReport report = topk_similar(queries, references, options);
  const auto flagged = memorization_audit(report, a.threshold);

  json j = report_to_json(report);
  j["seed"] = ctx.globals.seed;
  auto flagged_json = json::array();
  for (const auto& f : flagged) {
    flagged_json.push_back({{"query", f.query}, {"reference", f.reference}, {"ssim", f.score}});
  }
  j["flagged"] = std::move(flagged_json);
  write_text(a.report, j.dump(2) + "\n");
  ctx.add_output(a.report);
  if (!a.contact_sheet.empty()) {
    write_png(a.contact_sheet, contact_sheet(queries, references, report, a.cell_side));
    ctx.add_output(a.contact_sheet);
  }

  double best = -1.0;
  for (const auto& q : report.queries) best = std::max(best, q.matches.front().score);
  ctx.record["result"] = {{"queries", report.queries.size()}, {"references", references.size()},
                          {"max_ssim", best}, {"flagged", flagged.size()}};
  ctx.out << report.queries.size() << " queries x " << references.size()
          << " references, max ssim " << best << ", flagged " << flagged.size() << "\n";
  return 0;
}

// ---------------------------------------------------------------- fid

struct FidArgs {
  std::string features_a;
  std::string features_b;
  std::string images_a;
  std::string images_b;
  std::string save_a;
  std::string save_b;
  std::string out;
};

void add_fid(CLI::App& app, FidArgs& a) {
  auto* sub = app.add_subcommand("fid", "Frechet distance between two feature sets");
  auto* fa = sub->add_option("--features-a", a.features_a, "FEMB feature file for set A");
  auto* fb = sub->add_option("--features-b", a.features_b, "FEMB feature file for set B");
  auto* ia = sub->add_option("--images-a", a.images_a, "Image directory for set A (builtin features)");
  auto* ib = sub->add_option("--images-b", a.images_b, "Image directory for set B (builtin features)");
  fa->excludes(ia);
  fb->excludes(ib);
  sub->add_option("--save-features-a", a.save_a, "Write set A features as FEMB");
  sub->add_option("--save-features-b", a.save_b, "Write set B features as FEMB");
  sub->add_option("--out", a.out, "Result JSON path");
}

FeatureSet features_from_directory(const fs::path& dir, const std::string& label,
                                   Context& ctx) {
  const auto files = list_images(dir);
  ctx.add_inputs(files);
  std::vector<float> values(files.size() * kBuiltinFeatureDim);
  parallel_for(files.size(), ctx.workers(), [&](std::size_t i) {
    const auto f = builtin_features(read_image(files[i]));
    for (std::size_t j = 0; j < f.size(); ++j) {
      values[i * kBuiltinFeatureDim + j] = static_cast<float>(f[j]);
    }
  });
  return FeatureSet(kBuiltinFeatureDim, std::move(values), label);
}

FeatureSet resolve_features(const std::string& file, const std::string& dir,
                            const std::string& label, Context& ctx) {
  if (!file.empty()) {
    ctx.add_input(file);
    return load_features(file);
  }
  if (!dir.empty()) return features_from_directory(dir, label, ctx);
  throw Error(ErrorCode::InvalidFlag, "fid needs --features-" + label + " or --images-" + label);
}

int run_fid(Context& ctx, const FidArgs& a) {
  ctx.default_record = (a.out.empty() ? std::string("cosmoforge-fid") : a.out) + ".run.json";
  const FeatureSet fa = resolve_features(a.features_a, a.images_a, "a", ctx);
  const FeatureSet fb = resolve_features(a.features_b, a.images_b, "b", ctx);
  if (fa.dim() != fb.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "feature sets differ in dimension: " +
                                                  std::to_string(fa.dim()) + " vs " +
                                                  std::to_string(fb.dim()));
  }
  if (!a.save_a.empty()) {
    save_features(fa, a.save_a);
    ctx.add_output(a.save_a);
  }
  if (!a.save_b.empty()) {
    save_features(fb, a.save_b);
    ctx.add_output(a.save_b);
  }
  const double d2 = frechet_distance(fit_gaussian(fa, ctx.workers()), fit_gaussian(fb, ctx.workers()));
  json result = {{"fid", d2}, {"dim", fa.dim()}, {"count_a", fa.count()},
                 {"count_b", fb.count()}, {"label_a", fa.label()}, {"label_b", fb.label()}};
  if (!a.out.empty()) {
    write_text(a.out, result.dump(2) + "\n");
    ctx.add_output(a.out);
  }
  ctx.record["result"] = result;
  char line[64];
  std::snprintf(line, sizeof line, "d2 = %.6f\n", d2);
  ctx.out << line;
  return 0;
}

// ---------------------------------------------------------------- classdist

struct ClassdistArgs {
  std::string labels;
  std::string labels_b;
  std::vector<std::uint64_t> counts;
  std::vector<std::uint64_t> counts_b;
  std::string name_a = "training";
  std::string name_b = "generated";
  std::string out;
};

void add_classdist(CLI::App& app, ClassdistArgs& a) {
  auto* sub = app.add_subcommand("classdist", "Class distribution table and divergence");
  auto* la = sub->add_option("--labels", a.labels, "Labels CSV (id,class) for set A");
  auto* lb = sub->add_option("--labels-b", a.labels_b, "Labels CSV for set B");
  auto* ca = sub->add_option("--counts", a.counts, "spiral,elliptical,irregular counts for set A")
                 ->delimiter(',')->expected(3);
  auto* cb = sub->add_option("--counts-b", a.counts_b, "spiral,elliptical,irregular counts for set B")
                 ->delimiter(',')->expected(3);
  la->excludes(ca);
  lb->excludes(cb);
  sub->add_option("--name-a", a.name_a, "Row name for set A");
  sub->add_option("--name-b", a.name_b, "Row name for set B");
  sub->add_option("--out", a.out, "Result JSON path");
}

std::optional<ClassDistribution> resolve_distribution(const std::string& labels,
                                                      const std::vector<std::uint64_t>& counts,
                                                      Context& ctx) {
  if (!labels.empty()) {
    ctx.add_input(labels);
    return tally(load_labels_csv(labels));
  }
  if (!counts.empty()) return ClassDistribution({counts[0], counts[1], counts[2]});
  return std::nullopt;
}

int run_classdist(Context& ctx, const ClassdistArgs& a) {
  ctx.default_record = (a.out.empty() ? std::string("cosmoforge-classdist") : a.out) + ".run.json";
  const auto da = resolve_distribution(a.labels, a.counts, ctx);
  if (!da) throw Error(ErrorCode::InvalidFlag, "classdist needs --labels or --counts");
  const auto db = resolve_distribution(a.labels_b, a.counts_b, ctx);

  std::vector<std::pair<std::string, ClassDistribution>> rows{{a.name_a, *da}};
  if (db) rows.emplace_back(a.name_b, *db);
  ctx.out << render_table(rows);

  json result;
  result[a.name_a] = distribution_to_json(*da);
  if (db) {
    result[a.name_b] = distribution_to_json(*db);
    const Comparison cmp = compare(*da, *db);
    result["tvd"] = cmp.tvd;
    result["chi2"] = cmp.chi2 ? json(*cmp.chi2) : json(nullptr);
    char line[128];
    if (cmp.chi2) {
      std::snprintf(line, sizeof line, "tvd = %.4f  chi2 = %.4f\n", cmp.tvd, *cmp.chi2);
    } else {
      std::snprintf(line, sizeof line, "tvd = %.4f  chi2 = undefined (zero expected count)\n",
                    cmp.tvd);
    }
    ctx.out << line;
  }
  if (!a.out.empty()) {
    write_text(a.out, result.dump(2) + "\n");
    ctx.add_output(a.out);
  }
  ctx.record["result"] = result;
  return 0;
}

// ---------------------------------------------------------------- overlay

struct OverlayArgs {
  std::string image;
  std::string detections;
  std::string image_id;
  double min_score = 0.5;
  std::string out;
};

void add_overlay(CLI::App& app, OverlayArgs& a) {
  auto* sub = app.add_subcommand("overlay", "Draw detection boxes onto an image");
  sub->add_option("--image", a.image, "Image to annotate")->required();
  sub->add_option("--detections", a.detections, "Detections JSON")->required();
  sub->add_option("--image-id", a.image_id, "Detection entry to use (default: image file name)");
  sub->add_option("--min-score", a.min_score, "Minimum box score to draw");
  sub->add_option("--out", a.out, "Output PNG")->required();
}

int run_overlay(Context& ctx, const OverlayArgs& a) {
  ctx.default_record = a.out + ".run.json";
  ctx.add_input(a.image);
  ctx.add_input(a.detections);
  const Raster image = read_image(a.image);
  const DetectionSet set = load_detections(a.detections);
  const std::string id = a.image_id.empty() ? fs::path(a.image).filename().generic_string() : a.image_id;
  const std::vector<Box>* boxes = find_boxes(set, id);
  if (!boxes && set.size() == 1 && a.image_id.empty()) boxes = &set.front().boxes;
  const std::vector<Box> none;
  const OverlayResult result = overlay(image, boxes ? *boxes : none, a.min_score);
  write_png(a.out, result.image);
  ctx.add_output(a.out);
  ctx.record["result"] = {{"image_id", id}, {"boxes", boxes ? boxes->size() : 0},
                          {"drawn", result.drawn}};
  ctx.out << "drawn " << result.drawn << " of " << (boxes ? boxes->size() : 0) << " boxes\n";
  return 0;
}

// ---------------------------------------------------------------- driver

const std::vector<std::string> kSubcommands = {"prep", "mosaic", "ssim-search",
                                               "fid", "classdist", "overlay"};
const std::vector<std::string> kUnrecorded = {"--help", "--config", "--run-record"};

void print_error(std::ostream& err, std::string_view code, const std::string& message) {
  err << json{{"error", code}, {"message", message}}.dump() << "\n";
}

// Extracts --config from argv and appends "--key=value" for every config key
// not already given as a flag.
std::vector<std::string> apply_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].starts_with("--config=")) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  const Bytes bytes = read_file(path);
  const auto entries = parse_config(std::string(bytes.begin(), bytes.end()));
  for (const auto& [key, value] : entries) {
    const std::string flag = "--" + key;
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.starts_with(flag + "=");
    });
    if (!given) args.push_back(flag + "=" + value);
  }
  return args;
}

std::string option_value(const CLI::Option* opt) {
  if (opt->count() > 0) {
    std::string joined;
    for (const auto& r : opt->results()) {
      if (!joined.empty()) joined += ",";
      joined += r;
    }
    return joined;
  }
  return opt->get_default_str();
}

void record_options(const CLI::App* app, json& params, json& argv) {
  for (const CLI::Option* opt : app->get_options()) {
    const std::string name = opt->get_name(false, true);
    if (!name.starts_with("--")) continue;
    if (std::find(kUnrecorded.begin(), kUnrecorded.end(), name) != kUnrecorded.end()) continue;
    const std::string value = option_value(opt);
    if (value.empty()) continue;
    params[name.substr(2)] = value;
    argv.push_back(name + "=" + value);
  }
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  try {
    args = apply_config(raw_args);
  } catch (const Error& e) {
    print_error(err, to_string(e.code()), e.what());
    return 2;
  }

  CLI::App app{"Galaxy image pipeline: dataset prep, mosaics and generation metrics", "cosmoforge"};
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);

  Globals globals;
  app.add_option("--seed", globals.seed, "Seed for every randomized step (never wall-clock)");
  app.add_option("--workers", globals.workers, "Worker threads; 0 = all hardware threads")
      ->envname(kWorkersEnv);
  app.add_option("--config", globals.config, "Flat 'key = value' file of default flags");
  app.add_option("--run-record", globals.run_record, "Where to write the JSON run record");

  PrepArgs prep;
  MosaicArgs mosaic;
  SsimArgs ssim_args;
  FidArgs fid;
  ClassdistArgs classdist;
  OverlayArgs overlay_args;
  add_prep(app, prep);
  add_mosaic(app, mosaic);
  add_ssim(app, ssim_args);
  add_fid(app, fid);
  add_classdist(app, classdist);
  add_overlay(app, overlay_args);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    const bool unknown_sub =
        !args.empty() && !args.front().starts_with("-") &&
        std::find(kSubcommands.begin(), kSubcommands.end(), args.front()) == kSubcommands.end();
    print_error(err, unknown_sub ? "UnknownSubcommand" : "InvalidFlag", e.what());
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  Context ctx{globals, out, json::object(), {}};
  ctx.record["tool"] = "cosmoforge";
  ctx.record["version"] = kVersion;
  ctx.record["subcommand"] = name;
  ctx.record["seed"] = globals.seed;
  ctx.record["workers"] = ctx.workers();
  json params = json::object();
  json argv = json::array({name});
  record_options(sub, params, argv);
  record_options(&app, params, argv);
  ctx.record["parameters"] = params;
  ctx.record["argv"] = argv;
  ctx.record["inputs"] = json::array();
  ctx.record["outputs"] = json::array();

  try {
    int code = 0;
    if (name == "prep") code = run_prep(ctx, prep);
    else if (name == "mosaic") code = run_mosaic(ctx, mosaic);
    else if (name == "ssim-search") code = run_ssim(ctx, ssim_args);
    else if (name == "fid") code = run_fid(ctx, fid);
    else if (name == "classdist") code = run_classdist(ctx, classdist);
    else if (name == "overlay") code = run_overlay(ctx, overlay_args);
    const fs::path record_path =
        globals.run_record.empty() ? ctx.default_record : fs::path(globals.run_record);
    write_text(record_path, ctx.record.dump(2) + "\n");
    return code;
  } catch (const Error& e) {
    print_error(err, to_string(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error(err, "IoError", e.what());
    return 1;
  }
}

}  // namespace cosmoforge::cli
