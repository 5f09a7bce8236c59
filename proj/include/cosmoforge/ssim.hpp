#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cosmoforge/raster.hpp"

namespace cosmoforge {

struct SsimParams {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;

  double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
  double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }
};

// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
std::vector<double> gaussian_taps(const SsimParams& p);

// Per-image quantities that do not depend on the other image of a pair:
// pixel values plus the windowed mean and windowed mean of squares over every
// valid (unpadded) window position.
class SsimImage {
 public:
  SsimImage(const GrayRaster& image, const SsimParams& params);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }

 private:
  friend double ssim(const SsimImage& a, const SsimImage& b, const SsimParams& p);

  std::size_t width_;
  std::size_t height_;
  std::vector<double> pixels_;
  std::vector<double> mean_;
  std::vector<double> mean_sq_;
};

// Mean SSIM over all valid window positions. Throws DimensionMismatch or
// TooSmall (either side shorter than the window).
double ssim(const GrayRaster& a, const GrayRaster& b, const SsimParams& p = {});
double ssim(const SsimImage& a, const SsimImage& b, const SsimParams& p = {});

struct LabeledImage {
  std::string id;
  Raster image;
};

struct SimilarityMatch {
  std::string reference;
  double score = 0.0;

  friend bool operator==(const SimilarityMatch&, const SimilarityMatch&) = default;
};

struct QueryMatches {
  std::string query;
  std::vector<SimilarityMatch> matches;  // score non-increasing, ties by id
  bool memorized = false;                // top score >= threshold

  friend bool operator==(const QueryMatches&, const QueryMatches&) = default;
};

struct SimilarityReport {
  std::size_t k = 0;
  double threshold = 0.0;
  std::vector<QueryMatches> queries;

  friend bool operator==(const SimilarityReport&, const SimilarityReport&) = default;
};

inline constexpr double kDefaultMemorizationThreshold = 0.95;

struct SearchOptions {
  std::size_t k = 5;
  double threshold = kDefaultMemorizationThreshold;
  SsimParams params;
  std::size_t workers = 1;
};

// Exact top-k references per query by grayscale SSIM. References whose size
// differs from a query are resized to that query's size first.
SimilarityReport topk_similar(std::span<const LabeledImage> queries,
                              std::span<const LabeledImage> references,
                              const SearchOptions& options = {});

struct FlaggedPair {
  std::string query;
  std::string reference;
  double score = 0.0;

  friend bool operator==(const FlaggedPair&, const FlaggedPair&) = default;
};

// Every reported pair with score >= threshold; threshold must be in (0, 1].
std::vector<FlaggedPair> memorization_audit(const SimilarityReport& report,
                                            double threshold);

nlohmann::ordered_json report_to_json(const SimilarityReport& report);

// Grid with the queries on the first row and their matches below, one column
// per query; every cell is cell_side x cell_side.
Raster contact_sheet(std::span<const LabeledImage> queries,
                     std::span<const LabeledImage> references,
                     const SimilarityReport& report, std::size_t cell_side);

}  // namespace cosmoforge
