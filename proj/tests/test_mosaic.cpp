#include <doctest.h>

#include <map>
#include <set>

#include "cosmoforge/error.hpp"
#include "cosmoforge/image_io.hpp"
#include "cosmoforge/mosaic.hpp"
#include "test_support.hpp"

using namespace cosmoforge;
using cosmoforge::testing::random_raster;
using cosmoforge::testing::scratch_dir;

namespace {

TileLoader map_loader(std::map<std::string, Raster> tiles) {
  return [tiles = std::move(tiles)](const std::string& id) {
    auto it = tiles.find(id);
    if (it == tiles.end()) throw Error(ErrorCode::IoError, "no tile " + id);
    return it->second;
  };
}

MosaicPlan uniform_plan(std::size_t rows, std::size_t cols, std::size_t side, double scale) {
  MosaicPlan plan{0, rows, cols, side, {}};
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      plan.entries.push_back({r, c, "white", Rotation(static_cast<int>((r + c) % 4)), scale});
  return plan;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::IoError;
}

}  // namespace

TEST_SUITE("mosaic") {
  TEST_CASE("grid_for_count") {
    CHECK(grid_for_count(25000).rows == 158);
    CHECK(grid_for_count(25000).cols == 159);
    CHECK(grid_for_count(1).rows == 1);
    CHECK(grid_for_count(1).cols == 1);
    CHECK(grid_for_count(2500).rows == 50);
    CHECK(grid_for_count(5).cols == 3);
    CHECK(grid_for_count(5).rows == 2);
    CHECK(code_of([] { grid_for_count(0); }) == ErrorCode::EmptyPool);
  }

  TEST_CASE("plan_mosaic basic cases") {
    TilePool pool{{"g"}, {}, 0.0};
    const MosaicPlan plan = plan_mosaic(pool, 2, 2, 16, {1.0, 1.0}, 5);
    REQUIRE(plan.entries.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(plan.entries[i].source == "g");
      CHECK(plan.entries[i].scale == 1.0);
      CHECK(plan.entries[i].row == i / 2);
      CHECK(plan.entries[i].col == i % 2);
    }
    CHECK(plan == plan_mosaic(pool, 2, 2, 16, {1.0, 1.0}, 5));

    CHECK(code_of([&] { plan_mosaic(pool, 0, 0, 16, {}, 1); }) == ErrorCode::EmptyPool);
    CHECK(code_of([&] { plan_mosaic(pool, 3, 0, 16, {}, 1); }) == ErrorCode::EmptyPool);
    CHECK(code_of([&] { plan_mosaic(TilePool{{}, {}, 0.0}, 2, 2, 16, {}, 1); }) ==
          ErrorCode::EmptyPool);
    CHECK(code_of([&] { plan_mosaic(pool, 2, 2, 16, {0.9, 0.5}, 1); }) ==
          ErrorCode::InvalidScaleRange);
    CHECK(code_of([&] { plan_mosaic(pool, 2, 2, 16, {0.0, 0.5}, 1); }) ==
          ErrorCode::InvalidScaleRange);
  }

  TEST_CASE("plan draws stay within the pool and scale range") {
    TilePool pool{{"a", "b", "c"}, {"blank"}, 0.2};
    const MosaicPlan plan = plan_mosaic(pool, 30, 30, 32, {0.5, 1.0}, 77);
    std::set<int> turns;
    for (const auto& e : plan.entries) {
      if (e.source == "blank") {
        CHECK(e.scale == 1.0);
        CHECK(e.rotation == Rotation(0));
        continue;
      }
      CHECK((e.source == "a" || e.source == "b" || e.source == "c"));
      CHECK(e.scale >= 0.5);
      CHECK(e.scale < 1.0);
      turns.insert(e.rotation.quarter_turns());
    }
    CHECK(turns.size() == 4);
    CHECK(plan != plan_mosaic(pool, 30, 30, 32, {0.5, 1.0}, 78));
  }

  TEST_CASE("blank fraction converges to blank_weight") {
    TilePool pool{{"g1", "g2"}, {"b1", "b2"}, 0.1};
    const MosaicPlan plan = plan_mosaic(pool, 100, 100, 8, {}, 2024);
    std::size_t blanks = 0;
    for (const auto& e : plan.entries)
      if (e.source[0] == 'b') ++blanks;
    const double fraction = static_cast<double>(blanks) / 10000.0;
    CHECK(std::abs(fraction - 0.1) <= 0.02);

    TilePool none{{"g"}, {"b"}, 0.0};
    for (const auto& e : plan_mosaic(none, 20, 20, 8, {}, 1).entries) CHECK(e.source == "g");
  }

  TEST_CASE("scaled_side") {
    CHECK(scaled_side(0.5, 256) == 128);
    CHECK(scaled_side(0.5, 5) == 3);  // 2.5 rounds half up
    CHECK(scaled_side(1.0, 64) == 64);
    CHECK(scaled_side(0.001, 64) == 1);
  }

  TEST_CASE("1x1 plan at scale 1 equals the resized tile") {
    Prng rng(4);
    const Raster tile = random_raster(rng, 40, 40);
    MosaicPlan plan{0, 1, 1, 16, {{0, 0, "t", Rotation(0), 1.0}}};
    const Raster out = render_mosaic(plan, map_loader({{"t", tile}}));
    CHECK(out == resize_bilinear(tile, 16, 16));
  }

  TEST_CASE("2x2 white tile at scale 0.5 gives centered squares") {
    // tile_side 10: s = 5, offset floor(5/2) = 2, so each cell has white
    // pixels at local [2,7) in both axes.
    const MosaicPlan plan = uniform_plan(2, 2, 10, 0.5);
    const Raster out = render_mosaic(plan, map_loader({{"white", Raster(3, 3, Rgb{255, 255, 255})}}));
    REQUIRE(out.width() == 20);
    REQUIRE(out.height() == 20);
    for (std::size_t y = 0; y < 20; ++y)
      for (std::size_t x = 0; x < 20; ++x) {
        const std::size_t lx = x % 10, ly = y % 10;
        const bool inside = lx >= 2 && lx < 7 && ly >= 2 && ly < 7;
        CAPTURE(x);
        CAPTURE(y);
        CHECK(out.at(x, y) == (inside ? Rgb{255, 255, 255} : Rgb{0, 0, 0}));
      }
  }

  TEST_CASE("uniform colour tiles and rectangle disjointness") {
    TilePool pool{{"white"}, {}, 0.0};
    const MosaicPlan plan = plan_mosaic(pool, 6, 7, 12, {0.3, 1.0}, 8);
    const Rgb colour{40, 180, 90};
    const Raster out = render_mosaic(plan, map_loader({{"white", Raster(12, 12, colour)}}));
    std::size_t lit = 0;
    for (const Rgb p : out.pixels()) {
      if (p == Rgb{0, 0, 0}) continue;
      REQUIRE(p == colour);
      ++lit;
    }
    std::size_t expected = 0;
    for (const auto& e : plan.entries) {
      const auto s = scaled_side(e.scale, 12);
      expected += s * s;
      // Each rectangle sits inside its own cell, so cells cannot overlap.
      const std::size_t off = (12 - s) / 2;
      CHECK(off + s <= 12);
    }
    CHECK(lit == expected);
  }

  TEST_CASE("rendering is independent of worker count") {
    Prng rng(12);
    std::map<std::string, Raster> tiles;
    TilePool pool;
    for (int i = 0; i < 5; ++i) {
      const std::string id = "t" + std::to_string(i);
      tiles.insert_or_assign(id, random_raster(rng, 24, 24));
      pool.galaxy_tiles.push_back(id);
    }
    tiles.insert_or_assign("blank", Raster(24, 24, Rgb{1, 1, 1}));
    pool.blank_tiles = {"blank"};
    pool.blank_weight = 0.1;
    const MosaicPlan plan = plan_mosaic(pool, 9, 11, 24, {}, 31);
    const auto loader = map_loader(tiles);
    const Raster one = render_mosaic(plan, loader, 1);
    CHECK(one == render_mosaic(plan, loader, 4));

    const auto dir = scratch_dir("mosaic_workers");
    write_mosaic(plan, loader, dir / "a.png", 1);
    write_mosaic(plan, loader, dir / "b.png", 3);
    CHECK(read_file(dir / "a.png") == read_file(dir / "b.png"));
    CHECK(read_image(dir / "a.png") == one);
  }

  TEST_CASE("strip output for large mosaics") {
    const MosaicPlan plan = uniform_plan(3, 2, 8, 1.0);
    const auto loader = map_loader({{"white", Raster(8, 8, Rgb{9, 9, 9})}});
    const auto dir = scratch_dir("mosaic_strips");
    const MosaicOutput o = write_mosaic(plan, loader, dir / "big", 2, 16);
    CHECK(o.strips);
    CHECK(o.width == 16);
    CHECK(o.height == 24);
    REQUIRE(o.files.size() == 4);  // three strips plus index.json
    const auto index = nlohmann::json::parse(read_file(dir / "big" / "index.json"));
    CHECK(index["strips"].size() == 3);
    CHECK(index["strips"][1]["y"] == 8);
    const Raster full = render_mosaic(plan, loader);
    const Raster strip1 = read_image(dir / "big" / "strip_000001.png");
    REQUIRE(strip1.height() == 8);
    for (std::size_t x = 0; x < 16; ++x) CHECK(strip1.at(x, 0) == full.at(x, 8));
  }

  TEST_CASE("tile errors") {
    MosaicPlan plan{0, 1, 1, 8, {{0, 0, "missing", Rotation(0), 1.0}}};
    CHECK(code_of([&] { render_mosaic(plan, map_loader({})); }) == ErrorCode::MissingTile);
    MosaicPlan wide{0, 1, 1, 8, {{0, 0, "w", Rotation(0), 1.0}}};
    CHECK(code_of([&] { render_mosaic(wide, map_loader({{"w", Raster(4, 3)}})); }) ==
          ErrorCode::NonSquareTile);
  }

  TEST_CASE("select_blanks") {
    const std::vector<Raster> candidates = {Raster(4, 4, Rgb{3, 3, 3}), Raster(4, 4, Rgb{7, 7, 7}),
                                            Raster(4, 4, Rgb{12, 12, 12})};
    CHECK(select_blanks(candidates, 10.0, 2) == std::vector<std::size_t>{0, 1});

    const std::vector<Raster> mixed = {Raster(2, 2, Rgb{255, 255, 255}), Raster(2, 2, Rgb{5, 5, 5}),
                                       Raster(2, 2, Rgb{0, 0, 0})};
    CHECK(select_blanks(mixed, 10.0, 1) == std::vector<std::size_t>{2});
    CHECK(select_blanks(mixed, 10.0, 2) == std::vector<std::size_t>{2, 1});
    CHECK(code_of([&] { select_blanks(mixed, 10.0, 3); }) == ErrorCode::NotEnoughBlanks);
  }

  TEST_CASE("plan json round trip") {
    TilePool pool{{"a/b.png", "c.png"}, {"blank.png"}, 0.3};
    const MosaicPlan plan = plan_mosaic(pool, 4, 5, 32, {0.5, 1.0}, 123);
    const auto text = plan_to_json(plan).dump();
    CHECK(plan_from_json(nlohmann::json::parse(text)) == plan);
    CHECK(code_of([] { plan_from_json(nlohmann::json::parse("{\"rows\": 1}")); }) ==
          ErrorCode::MalformedJson);
  }
}
