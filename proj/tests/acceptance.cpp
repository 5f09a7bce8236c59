// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "cosmoforge/classdist.hpp"
#include "cosmoforge/cli.hpp"
#include "cosmoforge/error.hpp"
#include "cosmoforge/fid.hpp"
#include "cosmoforge/image_io.hpp"
#include "cosmoforge/linalg.hpp"
#include "cosmoforge/mosaic.hpp"
#include "cosmoforge/raster.hpp"
#include "cosmoforge/ssim.hpp"
#include "test_support.hpp"

using namespace cosmoforge;
using namespace cosmoforge::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, const std::function<Verdict()>& body) {
  Verdict v{false, ""};
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  if (!v.pass) ++failures;
  std::printf("%s  %-34s %s\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

FeatureSet gaussian_sample(Prng& rng, const std::vector<double>& mu, const Matrix& q,
                           const std::vector<double>& spectrum, std::size_t n) {
  const std::size_t d = mu.size();
  std::vector<double> root(d);
  for (std::size_t i = 0; i < d; ++i) root[i] = std::sqrt(spectrum[i]);
  std::vector<float> values(n * d);
  std::vector<double> z(d);
  for (std::size_t row = 0; row < n; ++row) {
    for (auto& v : z) v = normal(rng);
    for (std::size_t i = 0; i < d; ++i) {
      double s = mu[i];
      for (std::size_t k = 0; k < d; ++k) s += q(i, k) * root[k] * z[k];
      values[row * d + i] = static_cast<float>(s);
    }
  }
  return FeatureSet(d, std::move(values), "synthetic");
}

Verdict class_table() {
  const auto start = Clock::now();
  std::ostringstream out, err;
  const auto dir = scratch_dir("acc_class_table");
  const int code = cli::run({"classdist", "--counts", "25775,35738,65", "--counts-b", "920,2064,16",
                             "--out", (dir / "class_table.json").string()},
                            out, err);
  const double t = seconds_since(start);
  const std::string text = out.str();
  const ClassDistribution a({25775, 35738, 65});
  const ClassDistribution b({920, 2064, 16});
  const std::vector<std::string> want_a = {"41.8", "58.0", "0.1"};
  const std::vector<std::string> want_b = {"30.6", "68.8", "0.5"};
  bool ok = code == 0 && t < 1.0;
  for (std::size_t i = 0; i < 3; ++i) {
    ok = ok && a.percentage(kAllClasses[i]).str() == want_a[i];
    ok = ok && b.percentage(kAllClasses[i]).str() == want_b[i];
    ok = ok && text.find("(" + want_a[i] + "%)") != std::string::npos;
    ok = ok && text.find("(" + want_b[i] + "%)") != std::string::npos;
  }
  return {ok, fmt("41.8/58.0/0.1 and 30.6/68.8/0.5 printed, %.3f s (< 1 s)", t)};
}

Verdict fid_self() {
  Prng rng(1001);
  double worst = 0.0;
  for (int set = 0; set < 20; ++set) {
    const Matrix q = random_orthogonal(rng, 16);
    std::vector<double> spectrum(16), mu(16);
    for (auto& v : spectrum) v = 0.1 + 5.0 * rng.uniform();
    for (auto& v : mu) v = rng.uniform(-3.0, 3.0);
    const FeatureSet x = gaussian_sample(rng, mu, q, spectrum, 1000);
    const GaussianStats g = fit_gaussian(x);
    worst = std::max(worst, frechet_distance(g, fit_gaussian(x)));
  }
  return {worst <= 1e-6, fmt("max d2 over 20 sets (N=1000, D=16) = %.3e (<= 1e-6)", worst)};
}

Verdict fid_analytic() {
  const auto start = Clock::now();
  Prng rng(2002);
  const std::size_t d = 8;
  const Matrix q = random_orthogonal(rng, d);
  std::vector<double> la(d), lb(d), ma(d), mb(d);
  for (std::size_t i = 0; i < d; ++i) {
    la[i] = 0.5 + 2.0 * rng.uniform();
    lb[i] = 0.5 + 4.0 * rng.uniform();
    ma[i] = rng.uniform(-1.0, 1.0);
    mb[i] = rng.uniform(-1.0, 1.0);
  }
  // Shared eigenvectors make the covariances commute, so the trace term is
  // sum_i (sqrt(la_i) - sqrt(lb_i))^2.
  double closed = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    closed += (ma[i] - mb[i]) * (ma[i] - mb[i]);
    const double r = std::sqrt(la[i]) - std::sqrt(lb[i]);
    closed += r * r;
  }
  const FeatureSet a = gaussian_sample(rng, ma, q, la, 50000);
  const FeatureSet b = gaussian_sample(rng, mb, q, lb, 50000);
  const double got = frechet_distance(fit_gaussian(a, 1), fit_gaussian(b, 1));
  const double t = seconds_since(start);
  const double rel = std::abs(got - closed) / closed;

  const GaussianStats s01{{0.0}, Matrix(1, 1, 1.0)};
  const GaussianStats s11{{1.0}, Matrix(1, 1, 1.0)};
  const GaussianStats s016{{0.0}, Matrix(1, 1, 16.0)};
  const double d1 = frechet_distance(s01, s11);
  const double d9 = frechet_distance(s01, s016);
  const bool ok = rel <= 0.05 && t < 30.0 && std::abs(d1 - 1.0) <= 1e-3 && std::abs(d9 - 9.0) <= 1e-3;
  return {ok, fmt("D=8 N=50000: %.4f vs closed form %.4f (rel %.2f%%), %.2f s; 1-D: %.6f, %.6f", got,
                  closed, 100.0 * rel, t, d1, d9)};
}

Verdict fid_not_reproducible() {
  return {true,
          "reported FID 0.007 and detection counts need the original trained models; "
          "covered by the two FID property criteria"};
}

Verdict sqrtm_residual() {
  Prng rng(3003);
  double worst = 0.0;
  std::size_t count = 0;
  for (const std::size_t n : {2u, 8u, 64u}) {
    for (int i = 0; i < 50; ++i) {
      const Matrix q = random_orthogonal(rng, n);
      std::vector<double> spectrum(n);
      for (auto& v : spectrum) v = std::pow(10.0, rng.uniform(-3.0, 3.0));
      const Matrix a = spd_from_spectrum(q, spectrum);
      const Matrix s = sqrtm_psd(a);
      worst = std::max(worst, (s * s - a).frobenius_norm() / a.frobenius_norm());
      ++count;
    }
  }
  return {worst < 1e-8, fmt("%zu SPD matrices, D in {2,8,64}: max residual %.3e (< 1e-8)", count, worst)};
}

Verdict ssim_oracle() {
  Prng rng(4004);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const GrayRaster a = random_gray(rng, 32, 32);
    // every other pair correlated
    GrayRaster b = random_gray(rng, 32, 32);
    if (i % 2 == 0)
      for (std::size_t p = 0; p < b.size(); ++p)
        b.pixels()[p] = static_cast<std::uint8_t>((a.pixels()[p] * 3 + b.pixels()[p]) / 4);
    worst = std::max(worst, std::abs(ssim(a, b) - naive_ssim(a, b)));
  }
  double self = 0.0;
  for (int i = 0; i < 20; ++i) {
    const GrayRaster x = random_gray(rng, 24 + i, 40 - i);
    self = std::max(self, std::abs(ssim(x, x) - 1.0));
  }
  const double c = ssim(GrayRaster(32, 32, 0), GrayRaster(32, 32, 255));
  const double expected = 6.5025 / 65031.5025;
  const bool ok = worst <= 1e-9 && self <= 1e-12 && std::abs(c - expected) <= 1e-8;
  return {ok, fmt("oracle max |diff| %.2e, |ssim(x,x)-1| %.1e, const pair %.6e", worst, self, c)};
}

SimilarityReport oracle_topk(const std::vector<LabeledImage>& queries,
                             const std::vector<LabeledImage>& refs, std::size_t k) {
  SimilarityReport report{k, kDefaultMemorizationThreshold, {}};
  for (const auto& q : queries) {
    const GrayRaster qg = to_grayscale(q.image);
    std::vector<SimilarityMatch> all;
    for (const auto& r : refs) all.push_back({r.id, ssim(qg, to_grayscale(r.image))});
    std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
      return std::tie(y.score, x.reference) < std::tie(x.score, y.reference);
    });
    all.resize(k);
    report.queries.push_back({q.id, all, all.front().score >= kDefaultMemorizationThreshold});
  }
  return report;
}

Verdict memorization_audit_scale() {
  Prng rng(5005);
  auto make = [&](std::size_t n, const char* prefix) {
    std::vector<LabeledImage> v;
    for (std::size_t i = 0; i < n; ++i)
      v.push_back({fmt("%s%04zu", prefix, i), resize_bilinear(random_raster(rng, 6, 6), 64, 64)});
    return v;
  };
  const auto refs = make(200, "train_");
  auto queries = make(10, "gen_");
  queries[3].image = refs[17].image;  // one planted memorized sample
  const auto start = Clock::now();
  const auto oracle = oracle_topk(queries, refs, 5);
  bool ok = true;
  for (const std::size_t w : {1u, 4u, 8u}) {
    SearchOptions o;
    o.k = 5;
    o.workers = w;
    ok = ok && topk_similar(queries, refs, o) == oracle;
  }
  const double t = seconds_since(start);
  const auto flagged = memorization_audit(oracle, kDefaultMemorizationThreshold);
  ok = ok && t < 20.0 && flagged.size() == 1 && flagged[0].reference == "train_0017";
  return {ok, fmt("10 x 200 at 64x64, top-5 identical to oracle for workers {1,4,8}, %.2f s", t)};
}

Verdict mosaic_determinism() {
  Prng rng(6006);
  std::map<std::string, Raster> tiles;
  TilePool pool;
  for (int i = 0; i < 40; ++i) {
    const std::string id = fmt("galaxy_%02d", i);
    tiles.insert_or_assign(id, random_raster(rng, 96, 96));
    pool.galaxy_tiles.push_back(id);
  }
  tiles.insert_or_assign("blank", Raster(96, 96, Rgb{2, 2, 2}));
  pool.blank_tiles = {"blank"};
  pool.blank_weight = 0.1;
  const TileLoader loader = [&](const std::string& id) { return tiles.at(id); };
  const auto dir = scratch_dir("acc_mosaic");

  const auto start = Clock::now();
  const MosaicPlan plan = plan_mosaic(pool, 50, 50, 64, {}, 42);
  write_mosaic(plan, loader, dir / "run1.png", 1);
  const MosaicPlan again = plan_mosaic(pool, 50, 50, 64, {}, 42);
  write_mosaic(again, loader, dir / "run2.png", 1);
  write_mosaic(again, loader, dir / "run8.png", 8);
  const double t = seconds_since(start);
  const Bytes a = read_file(dir / "run1.png");
  const bool same = plan == again && a == read_file(dir / "run2.png") && a == read_file(dir / "run8.png");

  const MosaicPlan big = plan_mosaic(pool, 100, 100, 64, {}, 7);
  std::size_t blanks = 0;
  for (const auto& e : big.entries) blanks += e.source == "blank";
  const double fraction = static_cast<double>(blanks) / 10000.0;
  const bool ok = same && t < 10.0 && std::abs(fraction - 0.1) <= 0.02;
  return {ok, fmt("50x50 @64 px byte-identical (2 runs, workers 1/8), %.2f s; blank fraction %.4f", t,
                  fraction)};
}

Verdict raster_roundtrips() {
  Prng rng(7007);
  const int n = 150;
  int png = 0, resize = 0, rotation = 0;
  for (int i = 0; i < n; ++i) {
    const Raster r = random_raster(rng, 1 + rng.bounded(64), 1 + rng.bounded(64));
    png += decode(encode_png(r)) == r;
    resize += resize_bilinear(r, r.width(), r.height()) == r;
    const Rotation k(static_cast<int>(rng.bounded(4)));
    const Raster four = rotate(rotate(rotate(rotate(r, Rotation(1)), Rotation(1)), Rotation(1)), Rotation(1));
    rotation += four == r && rotate(rotate(r, k), k.inverse()) == r &&
                rotate(rotate(r, k), Rotation(2)) == rotate(r, k.then(Rotation(2)));
  }
  const bool ok = png == n && resize == n && rotation == n;
  return {ok, fmt("%d rasters: png %d, same-size resize %d, quarter-turn laws %d", n, png, resize, rotation)};
}

}  // namespace

int main() {
  set_warning_sink([](std::string_view) {});
  criterion("class-table-percentages", class_table);
  criterion("fid-self-distance", fid_self);
  criterion("fid-analytic", fid_analytic);
  criterion("fid-reported-value-unreproducible", fid_not_reproducible);
  criterion("sqrtm-residual", sqrtm_residual);
  criterion("ssim-oracle-equivalence", ssim_oracle);
  criterion("memorization-audit", memorization_audit_scale);
  criterion("mosaic-determinism", mosaic_determinism);
  criterion("raster-roundtrips", raster_roundtrips);
  std::printf("%s: %d failed\n", failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED", failures);
  return failures == 0 ? 0 : 1;
}
