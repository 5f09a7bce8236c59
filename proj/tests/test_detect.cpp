#include <doctest.h>

#include "cosmoforge/detect.hpp"
#include "cosmoforge/error.hpp"
#include "test_support.hpp"

using namespace cosmoforge;

namespace {

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

TEST_SUITE("detect") {
  TEST_CASE("parse_detections") {
    CHECK(parse_detections("[]").empty());
    const auto set = parse_detections(
        R"([{"image": "a.png", "boxes": [{"x":0,"y":0,"w":10,"h":10,"score":0.9,"label":"galaxy"}]},
            {"image": "b.png", "boxes": []}])");
    REQUIRE(set.size() == 2);
    REQUIRE(set[0].boxes.size() == 1);
    CHECK(set[0].boxes[0] == Box{0, 0, 10, 10, 0.9, "galaxy"});
    REQUIRE(find_boxes(set, "b.png"));
    CHECK(find_boxes(set, "b.png")->empty());
    CHECK(find_boxes(set, "c.png") == nullptr);

    CHECK(code_of([] {
            parse_detections(R"([{"image":"a","boxes":[{"x":0,"y":0,"w":-5,"h":3,"score":0.5,"label":"g"}]}])");
          }) == ErrorCode::NegativeDimension);
    CHECK(code_of([] { parse_detections("{not json"); }) == ErrorCode::MalformedJson);
    CHECK(code_of([] { parse_detections(R"({"image":"a"})"); }) == ErrorCode::MalformedJson);
    CHECK(code_of([] {
            parse_detections(R"([{"image":"a","boxes":[{"x":0,"y":0,"w":1,"h":1,"score":1.5,"label":"g"}]}])");
          }) == ErrorCode::MalformedJson);
  }

  TEST_CASE("overlay min_score above 1 draws nothing") {
    Prng rng(81);
    const Raster img = cosmoforge::testing::random_raster(rng, 20, 20);
    const auto result = overlay(img, {{2, 2, 5, 5, 1.0, "g"}}, 1.1);
    CHECK(result.drawn == 0);
    CHECK(result.image == img);
  }

  TEST_CASE("box on the border keeps a 2-px edge inside the image") {
    // Box [15, 25) x [0, 10) on a 20x20 image is clipped to x in [15, 20):
    // the left edge columns 15-16 and the top/bottom rows 0-1 and 8-9 are
    // painted; the right edge (23-24) falls outside.
    const Raster img(20, 20, Rgb{0, 0, 0});
    const auto result = overlay(img, {{15, 0, 10, 10, 0.8, "g"}}, 0.5);
    CHECK(result.drawn == 1);
    for (std::size_t y = 0; y < 20; ++y)
      for (std::size_t x = 0; x < 20; ++x) {
        const bool in_box = x >= 15 && y < 10;
        const bool edge = in_box && (x <= 16 || y <= 1 || y >= 8);
        CAPTURE(x);
        CAPTURE(y);
        CHECK(result.image.at(x, y) == (edge ? kOverlayColor : Rgb{0, 0, 0}));
      }
  }

  TEST_CASE("fractional boxes use floor and ceil") {
    const Raster img(10, 10, Rgb{5, 5, 5});
    const auto result = overlay(img, {{1.5, 1.5, 5.2, 5.2, 0.9, "g"}}, 0.0);
    // Extent [1, 7) in both axes.
    CHECK(result.image.at(1, 1) == kOverlayColor);
    CHECK(result.image.at(6, 6) == kOverlayColor);
    CHECK(result.image.at(7, 7) == Rgb{5, 5, 5});
    CHECK(result.image.at(3, 3) == Rgb{5, 5, 5});
  }

  TEST_CASE("box fully outside is counted but draws nothing") {
    const Raster img(8, 8, Rgb{1, 2, 3});
    const auto result = overlay(img, {{50, 50, 4, 4, 0.9, "g"}}, 0.5);
    CHECK(result.drawn == 1);
    CHECK(result.image == img);
  }

  TEST_CASE("overlay properties") {
    Prng rng(82);
    for (int trial = 0; trial < 50; ++trial) {
      const Raster img = cosmoforge::testing::random_raster(rng, 32, 24);
      std::vector<Box> boxes;
      for (int i = 0; i < 6; ++i)
        boxes.push_back({rng.uniform(-10, 35), rng.uniform(-10, 30), rng.uniform(0.5, 20),
                         rng.uniform(0.5, 20), rng.uniform(), "g"});
      const auto result = overlay(img, boxes, 0.3);
      // Pixels changed only on drawn borders.
      for (std::size_t y = 0; y < 24; ++y)
        for (std::size_t x = 0; x < 32; ++x) {
          if (result.image.at(x, y) == img.at(x, y)) continue;
          bool on_border = false;
          for (const auto& b : boxes) {
            if (b.score < 0.3) continue;
            const double x0 = std::floor(b.x), x1 = std::ceil(b.x + b.w);
            const double y0 = std::floor(b.y), y1 = std::ceil(b.y + b.h);
            const double px = static_cast<double>(x), py = static_cast<double>(y);
            if (px < x0 || px >= x1 || py < y0 || py >= y1) continue;
            if (px < x0 + 2 || px >= x1 - 2 || py < y0 + 2 || py >= y1 - 2) on_border = true;
          }
          REQUIRE(on_border);
        }
      std::size_t last = boxes.size() + 1;
      for (double t = 0.0; t <= 1.0; t += 0.1) {
        const std::size_t n = overlay(img, boxes, t).drawn;
        REQUIRE(n <= last);
        last = n;
      }
    }
  }
}
