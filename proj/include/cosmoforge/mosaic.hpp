#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cosmoforge/raster.hpp"

namespace cosmoforge {

// Default blank weight mirrors a pool of 3000 galaxies plus 10 blanks.
inline constexpr double kDefaultBlankWeight = 10.0 / 3010.0;

struct TilePool {
  std::vector<std::string> galaxy_tiles;
  std::vector<std::string> blank_tiles;
  double blank_weight = kDefaultBlankWeight;
};

struct ScaleRange {
  double lo = 0.5;
  double hi = 1.0;
};

struct MosaicEntry {
  std::size_t row = 0;
  std::size_t col = 0;
  std::string source;
  Rotation rotation;
  double scale = 1.0;

  friend bool operator==(const MosaicEntry&, const MosaicEntry&) = default;
};

struct MosaicPlan {
  std::uint64_t seed = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t tile_side = 0;
  std::vector<MosaicEntry> entries;  // row-major

  friend bool operator==(const MosaicPlan&, const MosaicPlan&) = default;
};

struct GridShape {
  std::size_t rows;
  std::size_t cols;
};

// Smallest near-square grid holding `tile_count` cells:
// cols = ceil(sqrt(T)), rows = ceil(T / cols).
GridShape grid_for_count(std::size_t tile_count);

// Per cell, in row-major order, draws from one Prng stream:
//   1. blank vs galaxy, Bernoulli(blank_weight)
//   2. index into the chosen sub-pool, uniform with replacement
//   3. rotation, uniform in {0, 1, 2, 3}
//   4. scale, uniform in [lo, hi]
// Blank cells keep rotation 0 and scale 1 but still consume draws 3 and 4.
MosaicPlan plan_mosaic(const TilePool& pool, std::size_t rows, std::size_t cols,
                       std::size_t tile_side, ScaleRange scale,
                       std::uint64_t seed);

// Side of a tile drawn at `scale` inside a cell of `tile_side`.
std::size_t scaled_side(double scale, std::size_t tile_side);

using TileLoader = std::function<Raster(const std::string& source)>;

// Loads each distinct source once; throws MissingTile / NonSquareTile.
class TileCache {
 public:
  TileCache(const MosaicPlan& plan, const TileLoader& loader,
            std::size_t workers);
  const Raster& get(const std::string& source) const;

 private:
  std::vector<std::string> sources_;
  std::vector<Raster> tiles_;
};

// Renders one tile-row (tile_side pixel rows) of the mosaic.
Raster render_strip(const MosaicPlan& plan, const TileCache& tiles,
                    std::size_t row);

Raster render_mosaic(const MosaicPlan& plan, const TileLoader& loader,
                     std::size_t workers = 1);

struct MosaicOutput {
  bool strips = false;  // true when written as a strip directory
  std::vector<std::filesystem::path> files;
  std::size_t width = 0;
  std::size_t height = 0;
};

// Streams the mosaic to disk one tile-row at a time. When either dimension
// exceeds `strip_threshold`, `out` becomes a directory holding
// strip_<row>.png files and index.json; otherwise `out` is a single PNG.
MosaicOutput write_mosaic(const MosaicPlan& plan, const TileLoader& loader,
                          const std::filesystem::path& out,
                          std::size_t workers = 1,
                          std::size_t strip_threshold = 16384);

// Ids (indices into `candidates`) of the k darkest candidates whose mean luma
// is <= max_mean_luma; ties resolve to the lower index.
std::vector<std::size_t> select_blanks(const std::vector<Raster>& candidates,
                                       double max_mean_luma, std::size_t k);

nlohmann::ordered_json plan_to_json(const MosaicPlan& plan);
MosaicPlan plan_from_json(const nlohmann::json& j);

}  // namespace cosmoforge
