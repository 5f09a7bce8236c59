#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cosmoforge/linalg.hpp"
#include "cosmoforge/raster.hpp"

namespace cosmoforge {

// N x D feature matrix, row-major float32, tagged with where it came from.
class FeatureSet {
 public:
  FeatureSet(std::size_t dim, std::vector<float> values, std::string label);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t count() const noexcept { return values_.size() / dim_; }
  const std::string& label() const noexcept { return label_; }
  std::span<const float> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<const float> values() const noexcept { return values_; }

  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;

 private:
  std::size_t dim_;
  std::vector<float> values_;
  std::string label_;
};

struct GaussianStats {
  std::vector<double> mu;
  Matrix sigma;
};

// Rows per reduction block; fixed so sums do not depend on the worker count.
inline constexpr std::size_t kFitBlockRows = 512;

// Column mean and unbiased covariance (divisor N - 1), symmetrized. A single
// vector yields a zero covariance and a warning.
GaussianStats fit_gaussian(const FeatureSet& features, std::size_t workers = 1);

inline constexpr double kSingularEigenvalue = 1e-10;
inline constexpr double kDiagonalJitter = 1e-6;

// Squared Frechet distance between two Gaussians:
//   |mu1 - mu2|^2 + Tr(S1 + S2 - 2 sqrt(S1^1/2 S2 S1^1/2)).
// If either covariance has an eigenvalue below kSingularEigenvalue, both get
// kDiagonalJitter added to their diagonals first (with a warning).
double frechet_distance(const GaussianStats& a, const GaussianStats& b);

inline constexpr std::size_t kBuiltinFeatureDim = 112;

// 8x8 bilinear grayscale thumbnail scaled to [0, 1] (64 values) followed by
// per-channel 16-bin histograms normalized to sum 1 (3 x 16 values).
std::vector<double> builtin_features(const Raster& r);

FeatureSet builtin_feature_set(std::span<const Raster> images, std::string label,
                               std::size_t workers = 1);

// Binary little-endian container:
//   "FEMB" | u16 version=1 | u32 dim | u64 count | u16 label_len | label |
//   count * dim float32, row-major.
void save_features(const FeatureSet& features, const std::filesystem::path& path);
FeatureSet load_features(const std::filesystem::path& path);

std::vector<std::uint8_t> serialize_features(const FeatureSet& features);
FeatureSet parse_features(std::span<const std::uint8_t> bytes);

}  // namespace cosmoforge
