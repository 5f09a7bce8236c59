#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cosmoforge/raster.hpp"

namespace cosmoforge {

// Pixel units, top-left origin, x to the right, y down.
struct Box {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  double score = 0.0;
  std::string label;

  friend bool operator==(const Box&, const Box&) = default;
};

struct ImageDetections {
  std::string image;
  std::vector<Box> boxes;

  friend bool operator==(const ImageDetections&, const ImageDetections&) = default;
};

using DetectionSet = std::vector<ImageDetections>;

// Detections JSON: [{"image": id, "boxes": [{"x","y","w","h","score","label"}]}]
DetectionSet parse_detections(std::string_view json_text);
DetectionSet load_detections(const std::filesystem::path& path);

// Boxes for `image`, or nullptr when the set has no entry for it.
const std::vector<Box>* find_boxes(const DetectionSet& set, std::string_view image);

inline constexpr Rgb kOverlayColor{0, 255, 0};
inline constexpr std::size_t kOverlayThickness = 2;

struct OverlayResult {
  Raster image;
  std::size_t drawn = 0;  // boxes with score >= min_score
};

// Draws a 2-px green outline just inside each box with score >= min_score,
// clipped to the image. Box pixels span [floor(x), ceil(x + w)) horizontally
// and likewise vertically.
OverlayResult overlay(const Raster& r, const std::vector<Box>& boxes, double min_score);

}  // namespace cosmoforge
