#include "cosmoforge/mosaic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <tuple>

#include "cosmoforge/error.hpp"
#include "cosmoforge/image_io.hpp"
#include "cosmoforge/parallel.hpp"
#include "cosmoforge/prng.hpp"

namespace cosmoforge {

namespace fs = std::filesystem;

GridShape grid_for_count(std::size_t tile_count) {
  if (tile_count == 0) {
    throw Error(ErrorCode::EmptyPool, "mosaic needs at least one cell");
  }
  auto cols = static_cast<std::size_t>(std::sqrt(static_cast<double>(tile_count)));
  while (cols * cols < tile_count) ++cols;
  while (cols > 1 && (cols - 1) * (cols - 1) >= tile_count) --cols;
  return {(tile_count + cols - 1) / cols, cols};
}

MosaicPlan plan_mosaic(const TilePool& pool, std::size_t rows, std::size_t cols,
                       std::size_t tile_side, ScaleRange scale,
                       std::uint64_t seed) {
  if (rows == 0 || cols == 0) {
    throw Error(ErrorCode::EmptyPool, "mosaic grid has no cells");
  }
  if (pool.galaxy_tiles.empty()) {
    throw Error(ErrorCode::EmptyPool, "tile pool has no galaxy tiles");
  }
  if (!(pool.blank_weight >= 0.0 && pool.blank_weight <= 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "blank weight must be in [0, 1]");
  }
  if (pool.blank_weight > 0.0 && pool.blank_tiles.empty()) {
    throw Error(ErrorCode::EmptyPool,
                "blank weight is positive but the pool has no blank tiles");
  }
  if (!(scale.lo > 0.0 && scale.lo <= scale.hi && scale.hi <= 1.0)) {
    throw Error(ErrorCode::InvalidScaleRange, "scale range must satisfy 0 < lo <= hi <= 1");
  }
  if (tile_side == 0) {
    throw Error(ErrorCode::ZeroDimension, "tile side must be >= 1");
  }

  MosaicPlan plan{seed, rows, cols, tile_side, {}};
  plan.entries.reserve(rows * cols);
  Prng rng(seed);
  for (std::size_t row = 0; row < rows; ++row) {
    for (std::size_t col = 0; col < cols; ++col) {
      const bool blank = rng.bernoulli(pool.blank_weight);
      const auto& sub_pool = blank ? pool.blank_tiles : pool.galaxy_tiles;
      const std::string& source = sub_pool[rng.bounded(sub_pool.size())];
      const Rotation rotation(static_cast<int>(rng.bounded(4)));
      const double s = rng.uniform(scale.lo, scale.hi);
      if (blank) {
        plan.entries.push_back({row, col, source, Rotation(0), 1.0});
      } else {
        plan.entries.push_back({row, col, source, rotation, s});
      }
    }
  }
  return plan;
}

std::size_t scaled_side(double scale, std::size_t tile_side) {
  const double side = std::floor(scale * static_cast<double>(tile_side) + 0.5);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(side, 1.0)), 1,
                                 tile_side);
}

TileCache::TileCache(const MosaicPlan& plan, const TileLoader& loader,
                     std::size_t workers) {
  for (const auto& e : plan.entries) sources_.push_back(e.source);
  std::sort(sources_.begin(), sources_.end());
  sources_.erase(std::unique(sources_.begin(), sources_.end()), sources_.end());

  std::vector<std::optional<Raster>> loaded(sources_.size());
  parallel_for(sources_.size(), workers, [&](std::size_t i) {
    Raster tile = [&] {
      try {
        return loader(sources_[i]);
      } catch (const Error& e) {
        throw Error(ErrorCode::MissingTile,
                    "cannot load tile " + sources_[i] + ": " + e.what());
      }
    }();
    if (tile.width() != tile.height()) {
      throw Error(ErrorCode::NonSquareTile, "tile is not square: " + sources_[i]);
    }
    loaded[i] = std::move(tile);
  });
  tiles_.reserve(loaded.size());
  for (auto& t : loaded) tiles_.push_back(std::move(*t));
}

const Raster& TileCache::get(const std::string& source) const {
  const auto it = std::lower_bound(sources_.begin(), sources_.end(), source);
  if (it == sources_.end() || *it != source) {
    throw Error(ErrorCode::MissingTile, "tile not in cache: " + source);
  }
  return tiles_[static_cast<std::size_t>(it - sources_.begin())];
}

Raster render_strip(const MosaicPlan& plan, const TileCache& tiles,
                    std::size_t row) {
  const std::size_t side = plan.tile_side;
  Raster strip(plan.cols * side, side, Rgb{0, 0, 0});
  for (std::size_t col = 0; col < plan.cols; ++col) {
    const MosaicEntry& e = plan.entries[row * plan.cols + col];
    const std::size_t s = scaled_side(e.scale, side);
    const Raster tile = rotate(resize_bilinear(tiles.get(e.source), s, s), e.rotation);
    const std::size_t x0 = col * side + (side - s) / 2;
    const std::size_t y0 = (side - s) / 2;
    for (std::size_t y = 0; y < s; ++y) {
      const auto src = tile.row(y);
      std::copy(src.begin(), src.end(), strip.row(y0 + y).begin() + x0);
    }
  }
  return strip;
}

namespace {

void check_plan_shape(const MosaicPlan& plan) {
  if (plan.rows == 0 || plan.cols == 0 || plan.tile_side == 0 ||
      plan.entries.size() != plan.rows * plan.cols) {
    throw Error(ErrorCode::InvalidParameter, "mosaic plan shape is inconsistent");
  }
}

// Renders strips in batches of `workers` rows and hands each finished strip
// to `sink` in row order.
template <typename Sink>
void render_rows(const MosaicPlan& plan, const TileLoader& loader,
                 std::size_t workers, Sink&& sink) {
  check_plan_shape(plan);
  workers = resolve_workers(workers);
  const TileCache tiles(plan, loader, workers);
  std::vector<std::optional<Raster>> batch;
  for (std::size_t first = 0; first < plan.rows; first += workers) {
    const std::size_t count = std::min(workers, plan.rows - first);
    batch.assign(count, std::nullopt);
    parallel_for(count, workers, [&](std::size_t i) {
      batch[i] = render_strip(plan, tiles, first + i);
    });
    for (std::size_t i = 0; i < count; ++i) sink(first + i, *batch[i]);
  }
}

std::string strip_name(std::size_t row) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "strip_%06zu.png", row);
  return buf;
}

}  // namespace

Raster render_mosaic(const MosaicPlan& plan, const TileLoader& loader,
                     std::size_t workers) {
  check_plan_shape(plan);
  Raster out(plan.cols * plan.tile_side, plan.rows * plan.tile_side);
  render_rows(plan, loader, workers, [&](std::size_t row, const Raster& strip) {
    std::copy(strip.pixels().begin(), strip.pixels().end(),
              out.row(row * plan.tile_side).begin());
  });
  return out;
}

MosaicOutput write_mosaic(const MosaicPlan& plan, const TileLoader& loader,
                          const fs::path& out, std::size_t workers,
                          std::size_t strip_threshold) {
  check_plan_shape(plan);
  MosaicOutput result;
  result.width = plan.cols * plan.tile_side;
  result.height = plan.rows * plan.tile_side;
  result.strips = result.width > strip_threshold || result.height > strip_threshold;

  if (!result.strips) {
    PngStreamWriter writer(out, result.width, result.height);
    render_rows(plan, loader, workers, [&](std::size_t, const Raster& strip) {
      for (std::size_t y = 0; y < strip.height(); ++y) writer.write_row(strip.row(y));
    });
    writer.finish();
    result.files.push_back(out);
    return result;
  }

  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + out.string());
  auto index = nlohmann::ordered_json::object();
  index["width"] = result.width;
  index["height"] = result.height;
  index["tile_side"] = plan.tile_side;
  index["rows"] = plan.rows;
  index["cols"] = plan.cols;
  index["strips"] = nlohmann::ordered_json::array();
  render_rows(plan, loader, workers, [&](std::size_t row, const Raster& strip) {
    const fs::path file = out / strip_name(row);
    write_png(file, strip);
    result.files.push_back(file);
    index["strips"].push_back({{"file", strip_name(row)},
                               {"row", row},
                               {"y", row * plan.tile_side},
                               {"height", plan.tile_side}});
  });
  const std::string text = index.dump(2) + "\n";
  const fs::path index_path = out / "index.json";
  write_file(index_path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
  result.files.push_back(index_path);
  return result;
}

std::vector<std::size_t> select_blanks(const std::vector<Raster>& candidates,
                                       double max_mean_luma, std::size_t k) {
  if (k > candidates.size()) {
    throw Error(ErrorCode::NotEnoughBlanks, "k exceeds the number of candidates");
  }
  std::vector<std::pair<double, std::size_t>> qualifying;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double mean = mean_luma(candidates[i]);
    if (mean <= max_mean_luma) qualifying.emplace_back(mean, i);
  }
  if (qualifying.size() < k) {
    throw Error(ErrorCode::NotEnoughBlanks,
                "only " + std::to_string(qualifying.size()) + " of " +
                    std::to_string(candidates.size()) +
                    " candidates are dark enough, need " + std::to_string(k));
  }
  std::sort(qualifying.begin(), qualifying.end());
  std::vector<std::size_t> ids;
  ids.reserve(k);
  for (std::size_t i = 0; i < k; ++i) ids.push_back(qualifying[i].second);
  return ids;
}

nlohmann::ordered_json plan_to_json(const MosaicPlan& plan) {
  nlohmann::ordered_json j;
  j["seed"] = plan.seed;
  j["rows"] = plan.rows;
  j["cols"] = plan.cols;
  j["tile_side"] = plan.tile_side;
  auto entries = nlohmann::ordered_json::array();
  for (const auto& e : plan.entries) {
    nlohmann::ordered_json item;
    item["row"] = e.row;
    item["col"] = e.col;
    item["source"] = e.source;
    item["rotation"] = e.rotation.quarter_turns();
    item["scale"] = e.scale;
    entries.push_back(std::move(item));
  }
  j["entries"] = std::move(entries);
  return j;
}

MosaicPlan plan_from_json(const nlohmann::json& j) {
  MosaicPlan plan;
  try {
    plan.seed = j.at("seed").get<std::uint64_t>();
    plan.rows = j.at("rows").get<std::size_t>();
    plan.cols = j.at("cols").get<std::size_t>();
    plan.tile_side = j.at("tile_side").get<std::size_t>();
    for (const auto& item : j.at("entries")) {
      const int turns = item.at("rotation").get<int>();
      if (turns < 0 || turns > 3) {
        throw Error(ErrorCode::MalformedJson, "rotation must be in {0,1,2,3}");
      }
      plan.entries.push_back({item.at("row").get<std::size_t>(),
                              item.at("col").get<std::size_t>(),
                              item.at("source").get<std::string>(),
                              Rotation(turns), item.at("scale").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedJson, std::string("mosaic plan: ") + e.what());
  }
  if (plan.rows == 0 || plan.cols == 0 || plan.tile_side == 0 ||
      plan.entries.size() != plan.rows * plan.cols) {
    throw Error(ErrorCode::MalformedJson, "mosaic plan: entry count != rows * cols");
  }
  std::vector<bool> seen(plan.rows * plan.cols, false);
  for (const auto& e : plan.entries) {
    if (e.row >= plan.rows || e.col >= plan.cols || seen[e.row * plan.cols + e.col]) {
      throw Error(ErrorCode::MalformedJson, "mosaic plan: cell repeated or out of range");
    }
    if (!(e.scale > 0.0 && e.scale <= 1.0)) {
      throw Error(ErrorCode::MalformedJson, "mosaic plan: scale outside (0, 1]");
    }
    seen[e.row * plan.cols + e.col] = true;
  }
  std::sort(plan.entries.begin(), plan.entries.end(),
            [](const MosaicEntry& a, const MosaicEntry& b) {
              return std::tie(a.row, a.col) < std::tie(b.row, b.col);
            });
  return plan;
}

}  // namespace cosmoforge
