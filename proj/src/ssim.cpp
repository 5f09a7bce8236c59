#include "cosmoforge/ssim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <unordered_map>

#include "cosmoforge/error.hpp"
#include "cosmoforge/parallel.hpp"

namespace cosmoforge {

namespace {

void validate(const SsimParams& p) {
  if (p.window == 0 || p.window % 2 == 0) {
    throw Error(ErrorCode::InvalidParameter, "SSIM window must be odd and >= 1");
  }
  if (!(p.sigma > 0.0)) throw Error(ErrorCode::InvalidParameter, "SSIM sigma must be > 0");
  if (!(p.c1() > 0.0 && p.c2() > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "SSIM stabilizers C1, C2 must be > 0");
  }
}

// Separable "valid" filtering: output is (w - win + 1) x (h - win + 1).
std::vector<double> filter_valid(const std::vector<double>& src, std::size_t w,
                                 std::size_t h, const std::vector<double>& taps) {
  const std::size_t win = taps.size();
  const std::size_t ow = w - win + 1;
  const std::size_t oh = h - win + 1;
  std::vector<double> horizontal(ow * h);
  for (std::size_t y = 0; y < h; ++y) {
    const double* row = src.data() + y * w;
    double* out = horizontal.data() + y * ow;
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < win; ++k) acc += taps[k] * row[x + k];
      out[x] = acc;
    }
  }
  std::vector<double> out(ow * oh, 0.0);
  for (std::size_t y = 0; y < oh; ++y) {
    double* dst = out.data() + y * ow;
    for (std::size_t k = 0; k < win; ++k) {
      const double t = taps[k];
      const double* src_row = horizontal.data() + (y + k) * ow;
      for (std::size_t x = 0; x < ow; ++x) dst[x] += t * src_row[x];
    }
  }
  return out;
}

}  // namespace

std::vector<double> gaussian_taps(const SsimParams& p) {
  validate(p);
  const auto radius = static_cast<double>(p.window / 2);
  std::vector<double> taps(p.window);
  for (std::size_t i = 0; i < p.window; ++i) {
    const double x = static_cast<double>(i) - radius;
    taps[i] = std::exp(-(x * x) / (2.0 * p.sigma * p.sigma));
  }
  const double sum = std::accumulate(taps.begin(), taps.end(), 0.0);
  for (double& t : taps) t /= sum;
  return taps;
}

SsimImage::SsimImage(const GrayRaster& image, const SsimParams& params)
    : width_(image.width()), height_(image.height()) {
  validate(params);
  if (width_ < params.window || height_ < params.window) {
    throw Error(ErrorCode::TooSmall, "image smaller than the SSIM window");
  }
  pixels_.assign(image.pixels().begin(), image.pixels().end());
  std::vector<double> squares(pixels_.size());
  std::transform(pixels_.begin(), pixels_.end(), squares.begin(),
                 [](double v) { return v * v; });
  const auto taps = gaussian_taps(params);
  mean_ = filter_valid(pixels_, width_, height_, taps);
  mean_sq_ = filter_valid(squares, width_, height_, taps);
}

double ssim(const SsimImage& a, const SsimImage& b, const SsimParams& p) {
  if (a.width_ != b.width_ || a.height_ != b.height_) {
    throw Error(ErrorCode::DimensionMismatch, "SSIM inputs differ in size");
  }
  std::vector<double> products(a.pixels_.size());
  for (std::size_t i = 0; i < products.size(); ++i) products[i] = a.pixels_[i] * b.pixels_[i];
  const auto cross = filter_valid(products, a.width_, a.height_, gaussian_taps(p));

  const double c1 = p.c1();
  const double c2 = p.c2();
  double total = 0.0;
  for (std::size_t i = 0; i < cross.size(); ++i) {
    const double mu_a = a.mean_[i];
    const double mu_b = b.mean_[i];
    const double mu_ab = mu_a * mu_b;
    const double var_a = a.mean_sq_[i] - mu_a * mu_a;
    const double var_b = b.mean_sq_[i] - mu_b * mu_b;
    const double cov = cross[i] - mu_ab;
    const double num = (2.0 * mu_ab + c1) * (2.0 * cov + c2);
    const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
    total += num / den;
  }
  return total / static_cast<double>(cross.size());
}

double ssim(const GrayRaster& a, const GrayRaster& b, const SsimParams& p) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorCode::DimensionMismatch, "SSIM inputs differ in size");
  }
  return ssim(SsimImage(a, p), SsimImage(b, p), p);
}

namespace {

using Size = std::pair<std::size_t, std::size_t>;

Size size_of(const Raster& r) { return {r.width(), r.height()}; }

}  // namespace

SimilarityReport topk_similar(std::span<const LabeledImage> queries,
                              std::span<const LabeledImage> references,
                              const SearchOptions& options) {
  if (references.empty()) throw Error(ErrorCode::EmptyReferences, "no reference images");
  if (options.k == 0) throw Error(ErrorCode::InvalidParameter, "k must be >= 1");
  validate(options.params);

  std::vector<std::optional<SsimImage>> query_stats(queries.size());
  parallel_for(queries.size(), options.workers, [&](std::size_t i) {
    query_stats[i].emplace(to_grayscale(queries[i].image), options.params);
  });

  // Reference statistics per distinct query size.
  std::map<Size, std::size_t> size_slot;
  for (const auto& q : queries) size_slot.emplace(size_of(q.image), 0);
  std::size_t slot = 0;
  for (auto& [size, s] : size_slot) s = slot++;
  std::vector<std::vector<std::optional<SsimImage>>> ref_stats(
      size_slot.size(), std::vector<std::optional<SsimImage>>(references.size()));
  std::vector<std::pair<Size, std::size_t>> ref_jobs;
  for (const auto& [size, s] : size_slot)
    for (std::size_t r = 0; r < references.size(); ++r) ref_jobs.push_back({size, r});
  parallel_for(ref_jobs.size(), options.workers, [&](std::size_t j) {
    const auto [size, r] = ref_jobs[j];
    const Raster& image = references[r].image;
    const GrayRaster gray = size_of(image) == size
                                ? to_grayscale(image)
                                : to_grayscale(resize_bilinear(image, size.first, size.second));
    ref_stats[size_slot.at(size)][r].emplace(gray, options.params);
  });

  const std::size_t nq = queries.size();
  const std::size_t nr = references.size();
  std::vector<double> scores(nq * nr);
  parallel_for(nq * nr, options.workers, [&](std::size_t pair) {
    const std::size_t q = pair / nr;
    const std::size_t r = pair % nr;
    const std::size_t s = size_slot.at(size_of(queries[q].image));
    scores[pair] = ssim(*query_stats[q], *ref_stats[s][r], options.params);
  });

  SimilarityReport report{std::min(options.k, nr), options.threshold, {}};
  std::vector<std::size_t> order(nr);
  for (std::size_t q = 0; q < nq; ++q) {
    const double* row = scores.data() + q * nr;
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(report.k),
                      order.end(), [&](std::size_t a, std::size_t b) {
                        if (row[a] != row[b]) return row[a] > row[b];
                        if (references[a].id != references[b].id) {
                          return references[a].id < references[b].id;
                        }
                        return a < b;
                      });
    QueryMatches result{queries[q].id, {}, false};
    for (std::size_t i = 0; i < report.k; ++i) {
      result.matches.push_back({references[order[i]].id, row[order[i]]});
    }
    result.memorized = result.matches.front().score >= options.threshold;
    report.queries.push_back(std::move(result));
  }
  return report;
}

std::vector<FlaggedPair> memorization_audit(const SimilarityReport& report,
                                            double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "memorization threshold must be in (0, 1]");
  }
  std::vector<FlaggedPair> flagged;
  for (const auto& q : report.queries) {
    for (const auto& m : q.matches) {
      if (m.score >= threshold) flagged.push_back({q.query, m.reference, m.score});
    }
  }
  return flagged;
}

nlohmann::ordered_json report_to_json(const SimilarityReport& report) {
  nlohmann::ordered_json j;
  j["k"] = report.k;
  j["threshold"] = report.threshold;
  auto queries = nlohmann::ordered_json::array();
  for (const auto& q : report.queries) {
    nlohmann::ordered_json item;
    item["query"] = q.query;
    item["memorized"] = q.memorized;
    auto matches = nlohmann::ordered_json::array();
    for (const auto& m : q.matches) {
      matches.push_back({{"reference", m.reference}, {"ssim", m.score}});
    }
    item["matches"] = std::move(matches);
    queries.push_back(std::move(item));
  }
  j["queries"] = std::move(queries);
  return j;
}

Raster contact_sheet(std::span<const LabeledImage> queries,
                     std::span<const LabeledImage> references,
                     const SimilarityReport& report, std::size_t cell_side) {
  if (report.queries.empty()) {
    throw Error(ErrorCode::InvalidParameter, "contact sheet needs at least one query");
  }
  std::unordered_map<std::string, const Raster*> query_by_id;
  std::unordered_map<std::string, const Raster*> ref_by_id;
  for (const auto& q : queries) query_by_id.emplace(q.id, &q.image);
  for (const auto& r : references) ref_by_id.emplace(r.id, &r.image);

  Raster sheet(report.queries.size() * cell_side, (report.k + 1) * cell_side);
  auto paste = [&](const Raster* image, std::size_t col, std::size_t row) {
    if (!image) return;
    const Raster cell = resize_bilinear(*image, cell_side, cell_side);
    for (std::size_t y = 0; y < cell_side; ++y) {
      const auto src = cell.row(y);
      std::copy(src.begin(), src.end(),
                sheet.row(row * cell_side + y).begin() +
                    static_cast<std::ptrdiff_t>(col * cell_side));
    }
  };
  for (std::size_t c = 0; c < report.queries.size(); ++c) {
    const auto& q = report.queries[c];
    const auto qi = query_by_id.find(q.query);
    paste(qi == query_by_id.end() ? nullptr : qi->second, c, 0);
    for (std::size_t m = 0; m < q.matches.size(); ++m) {
      const auto ri = ref_by_id.find(q.matches[m].reference);
      paste(ri == ref_by_id.end() ? nullptr : ri->second, c, m + 1);
    }
  }
  return sheet;
}

}  // namespace cosmoforge
