#include "cosmoforge/fid.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <optional>

#include "cosmoforge/error.hpp"
#include "cosmoforge/image_io.hpp"
#include "cosmoforge/parallel.hpp"

namespace cosmoforge {

FeatureSet::FeatureSet(std::size_t dim, std::vector<float> values, std::string label)
    : dim_(dim), values_(std::move(values)), label_(std::move(label)) {
  if (dim_ == 0) throw Error(ErrorCode::DimMismatch, "feature dimension must be >= 1");
  if (values_.size() % dim_ != 0) {
    throw Error(ErrorCode::DimMismatch, "feature buffer is not a multiple of dim");
  }
  if (values_.empty()) throw Error(ErrorCode::EmptyFeatureSet, "feature set is empty");
  if (label_.size() > 0xffff) {
    throw Error(ErrorCode::InvalidParameter, "feature label longer than 65535 bytes");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error(ErrorCode::NonFiniteFeature,
                  "non-finite feature at row " + std::to_string(i / dim_) +
                      ", column " + std::to_string(i % dim_));
    }
  }
}

namespace {

// Binary-counter pairwise reduction: leaves are pushed in a fixed order and
// merged whenever two partials of equal height meet, so the summation tree
// depends only on the number of leaves.
class PairwiseSum {
 public:
  void push(std::vector<double> leaf) {
    std::size_t height = 0;
    while (!stack_.empty() && stack_.back().height == height) {
      add_into(stack_.back().values, leaf);
      stack_.pop_back();
      ++height;
    }
    stack_.push_back({height, std::move(leaf)});
  }

  std::vector<double> total() && {
    std::vector<double> acc = std::move(stack_.back().values);
    stack_.pop_back();
    while (!stack_.empty()) {
      add_into(stack_.back().values, acc);
      stack_.pop_back();
    }
    return acc;
  }

 private:
  static void add_into(const std::vector<double>& left, std::vector<double>& right) {
    for (std::size_t i = 0; i < right.size(); ++i) right[i] = left[i] + right[i];
  }

  struct Node {
    std::size_t height;
    std::vector<double> values;
  };
  std::vector<Node> stack_;
};

// Computes block partials in parallel batches and feeds them to the reducer in
// block order.
template <typename BlockFn>
std::vector<double> reduce_blocks(std::size_t rows, std::size_t workers,
                                  BlockFn&& block_fn) {
  const std::size_t blocks = (rows + kFitBlockRows - 1) / kFitBlockRows;
  const std::size_t batch = std::max<std::size_t>(resolve_workers(workers), 1);
  PairwiseSum sum;
  std::vector<std::vector<double>> partials;
  for (std::size_t first = 0; first < blocks; first += batch) {
    const std::size_t count = std::min(batch, blocks - first);
    partials.assign(count, {});
    parallel_for(count, workers, [&](std::size_t i) {
      const std::size_t begin = (first + i) * kFitBlockRows;
      partials[i] = block_fn(begin, std::min(begin + kFitBlockRows, rows));
    });
    for (auto& p : partials) sum.push(std::move(p));
  }
  return std::move(sum).total();
}

}  // namespace

GaussianStats fit_gaussian(const FeatureSet& features, std::size_t workers) {
  const std::size_t n = features.count();
  const std::size_t d = features.dim();

  const std::vector<double> sums =
      reduce_blocks(n, workers, [&](std::size_t begin, std::size_t end) {
        std::vector<double> acc(d, 0.0);
        for (std::size_t r = begin; r < end; ++r) {
          const auto row = features.row(r);
          for (std::size_t j = 0; j < d; ++j) acc[j] += row[j];
        }
        return acc;
      });
  GaussianStats stats{std::vector<double>(d), Matrix(d, d)};
  for (std::size_t j = 0; j < d; ++j) stats.mu[j] = sums[j] / static_cast<double>(n);

  if (n == 1) {
    warn("fit_gaussian: single feature vector, covariance set to zero");
    return stats;
  }

  // Upper triangle, row-major, of the centered scatter matrix.
  const std::vector<double> scatter =
      reduce_blocks(n, workers, [&](std::size_t begin, std::size_t end) {
        std::vector<double> acc(d * (d + 1) / 2, 0.0);
        std::vector<double> centered(d);
        for (std::size_t r = begin; r < end; ++r) {
          const auto row = features.row(r);
          for (std::size_t j = 0; j < d; ++j) centered[j] = row[j] - stats.mu[j];
          std::size_t k = 0;
          for (std::size_t i = 0; i < d; ++i) {
            const double ci = centered[i];
            for (std::size_t j = i; j < d; ++j) acc[k++] += ci * centered[j];
          }
        }
        return acc;
      });
  const double divisor = static_cast<double>(n - 1);
  std::size_t k = 0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      const double v = scatter[k++] / divisor;
      stats.sigma(i, j) = v;
      stats.sigma(j, i) = v;
    }
  }
  return stats;
}

namespace {

void check_stats(const GaussianStats& g, std::size_t d) {
  if (g.mu.size() != d || g.sigma.rows() != d || g.sigma.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch, "Gaussian statistics have mismatched dimensions");
  }
}

void add_diagonal(Matrix& m, double value) {
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += value;
}

}  // namespace

double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
  const std::size_t d = a.mu.size();
  check_stats(a, d);
  check_stats(b, d);
  if (d == 0) throw Error(ErrorCode::DimensionMismatch, "empty Gaussian statistics");

  double mean_term = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double diff = a.mu[i] - b.mu[i];
    mean_term += diff * diff;
  }

  Matrix sigma_a = a.sigma;
  Matrix sigma_b = b.sigma;
  SymmetricEigen eig_a = eigen_symmetric(sigma_a);
  const SymmetricEigen eig_b = eigen_symmetric(sigma_b);
  if (eig_a.values.front() < kSingularEigenvalue ||
      eig_b.values.front() < kSingularEigenvalue) {
    warn("frechet_distance: near-singular covariance, adding 1e-6 to diagonals");
    add_diagonal(sigma_a, kDiagonalJitter);
    add_diagonal(sigma_b, kDiagonalJitter);
    for (double& lambda : eig_a.values) lambda += kDiagonalJitter;
  }

  std::vector<double> roots(d);
  for (std::size_t i = 0; i < d; ++i) roots[i] = std::sqrt(std::max(eig_a.values[i], 0.0));
  const Matrix root_a = reconstruct(eig_a, roots);

  Matrix inner = root_a * sigma_b * root_a;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      const double mean = 0.5 * (inner(i, j) + inner(j, i));
      inner(i, j) = mean;
      inner(j, i) = mean;
    }
  }
  // Tr(sqrt(M)) is the sum of the square roots of M's eigenvalues.
  double trace_root = 0.0;
  for (const double lambda : eigen_symmetric(inner).values) {
    trace_root += std::sqrt(std::max(lambda, 0.0));
  }

  const double d2 = mean_term + sigma_a.trace() + sigma_b.trace() - 2.0 * trace_root;
  return std::max(d2, 0.0);
}

std::vector<double> builtin_features(const Raster& r) {
  std::vector<double> out;
  out.reserve(kBuiltinFeatureDim);
  const GrayRaster thumb = resize_bilinear(to_grayscale(r), 8, 8);
  for (const std::uint8_t v : thumb.pixels()) out.push_back(v / 255.0);

  std::array<std::array<std::uint64_t, 16>, 3> hist{};
  for (const Rgb p : r.pixels()) {
    ++hist[0][p.r >> 4];
    ++hist[1][p.g >> 4];
    ++hist[2][p.b >> 4];
  }
  const double total = static_cast<double>(r.size());
  for (const auto& channel : hist) {
    for (const std::uint64_t c : channel) {
      out.push_back(static_cast<double>(c) / total);
    }
  }
  return out;
}

FeatureSet builtin_feature_set(std::span<const Raster> images, std::string label,
                               std::size_t workers) {
  if (images.empty()) throw Error(ErrorCode::EmptyFeatureSet, "no images to embed");
  std::vector<float> values(images.size() * kBuiltinFeatureDim);
  parallel_for(images.size(), workers, [&](std::size_t i) {
    const auto f = builtin_features(images[i]);
    for (std::size_t j = 0; j < f.size(); ++j) {
      values[i * kBuiltinFeatureDim + j] = static_cast<float>(f[j]);
    }
  });
  return FeatureSet(kBuiltinFeatureDim, std::move(values), std::move(label));
}

namespace {

constexpr char kMagic[4] = {'F', 'E', 'M', 'B'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
  }
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get_le(const char* what) {
    need(sizeof(T), what);
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(static_cast<T>(bytes_[pos_ + i]) << (8 * i));
    }
    pos_ += sizeof(T);
    return value;
  }

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    need(n, what);
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw Error(ErrorCode::TruncatedFile, std::string("feature file truncated in ") + what);
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_features(const FeatureSet& features) {
  std::vector<std::uint8_t> out;
  out.reserve(20 + features.label().size() + features.values().size() * 4);
  out.insert(out.end(), kMagic, kMagic + 4);
  put_le<std::uint16_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(features.dim()));
  put_le<std::uint64_t>(out, features.count());
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(features.label().size()));
  out.insert(out.end(), features.label().begin(), features.label().end());
  for (const float v : features.values()) put_le(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

FeatureSet parse_features(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::BadMagic, "feature file does not start with FEMB");
  }
  Reader in(bytes.subspan(4));
  const auto version = in.get_le<std::uint16_t>("version");
  if (version != kVersion) {
    throw Error(ErrorCode::BadMagic,
                "unsupported feature file version " + std::to_string(version));
  }
  const auto dim = in.get_le<std::uint32_t>("dim");
  const auto count = in.get_le<std::uint64_t>("count");
  const auto label_len = in.get_le<std::uint16_t>("label length");
  const auto label = in.take(label_len, "label");
  if (dim == 0) throw Error(ErrorCode::DimMismatch, "feature file declares dim 0");
  if (count == 0) throw Error(ErrorCode::EmptyFeatureSet, "feature file declares count 0");
  if (count > in.remaining() / 4 / dim) {
    throw Error(ErrorCode::TruncatedFile, "feature payload shorter than count * dim");
  }
  const std::size_t n = static_cast<std::size_t>(count) * dim;
  if (in.remaining() != n * 4) {
    throw Error(ErrorCode::DimMismatch, "feature payload longer than count * dim");
  }
  std::vector<float> values(n);
  for (float& v : values) v = std::bit_cast<float>(in.get_le<std::uint32_t>("payload"));
  return FeatureSet(dim, std::move(values), std::string(label.begin(), label.end()));
}

void save_features(const FeatureSet& features, const std::filesystem::path& path) {
  write_file(path, serialize_features(features));
}

FeatureSet load_features(const std::filesystem::path& path) {
  return parse_features(read_file(path));
}

}  // namespace cosmoforge
