#include "cosmoforge/detect.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "cosmoforge/error.hpp"
#include "cosmoforge/image_io.hpp"

namespace cosmoforge {

DetectionSet parse_detections(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedJson, std::string("detections: ") + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::MalformedJson, "detections: top level must be an array");

  DetectionSet set;
  try {
    for (const auto& item : doc) {
      ImageDetections entry;
      entry.image = item.at("image").is_string() ? item.at("image").get<std::string>()
                                                 : item.at("image").dump();
      for (const auto& b : item.at("boxes")) {
        Box box;
        box.x = b.at("x").get<double>();
        box.y = b.at("y").get<double>();
        box.w = b.at("w").get<double>();
        box.h = b.at("h").get<double>();
        box.score = b.at("score").get<double>();
        box.label = b.value("label", std::string{});
        if (!(box.w > 0.0) || !(box.h > 0.0)) {
          throw Error(ErrorCode::NegativeDimension,
                      "detections: box in " + entry.image + " has non-positive size");
        }
        if (!(box.score >= 0.0 && box.score <= 1.0)) {
          throw Error(ErrorCode::MalformedJson,
                      "detections: score outside [0, 1] in " + entry.image);
        }
        if (!std::isfinite(box.x) || !std::isfinite(box.y) || !std::isfinite(box.w) ||
            !std::isfinite(box.h)) {
          throw Error(ErrorCode::MalformedJson, "detections: non-finite coordinate");
        }
        entry.boxes.push_back(std::move(box));
      }
      set.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedJson, std::string("detections: ") + e.what());
  }
  return set;
}

DetectionSet load_detections(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  return parse_detections({reinterpret_cast<const char*>(bytes.data()), bytes.size()});
}

const std::vector<Box>* find_boxes(const DetectionSet& set, std::string_view image) {
  for (const auto& entry : set) {
    if (entry.image == image) return &entry.boxes;
  }
  return nullptr;
}

OverlayResult overlay(const Raster& r, const std::vector<Box>& boxes, double min_score) {
  OverlayResult result{r, 0};
  const auto width = static_cast<long long>(r.width());
  const auto height = static_cast<long long>(r.height());
  const auto t = static_cast<long long>(kOverlayThickness);
  for (const Box& box : boxes) {
    if (box.score < min_score) continue;
    ++result.drawn;
    // Inclusive pixel bounds of the box.
    const auto left = static_cast<long long>(std::floor(box.x));
    const auto top = static_cast<long long>(std::floor(box.y));
    const auto right = static_cast<long long>(std::ceil(box.x + box.w)) - 1;
    const auto bottom = static_cast<long long>(std::ceil(box.y + box.h)) - 1;
    const long long x0 = std::max(left, 0LL);
    const long long y0 = std::max(top, 0LL);
    const long long x1 = std::min(right, width - 1);
    const long long y1 = std::min(bottom, height - 1);
    for (long long y = y0; y <= y1; ++y) {
      const bool edge_row = y - top < t || bottom - y < t;
      for (long long x = x0; x <= x1; ++x) {
        if (edge_row || x - left < t || right - x < t) {
          result.image.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) =
              kOverlayColor;
        }
      }
    }
  }
  return result;
}

}  // namespace cosmoforge
