#include "cosmoforge/raster.hpp"

#include <algorithm>
#include <cmath>

#include "cosmoforge/error.hpp"
#include "cosmoforge/prng.hpp"

namespace cosmoforge {

template <typename Pixel>
Image<Pixel>::Image(std::size_t width, std::size_t height, Pixel fill)
    : width_(width), height_(height) {
  if (width == 0 || height == 0) {
    throw Error(ErrorCode::ZeroDimension, "image dimensions must be >= 1");
  }
  pixels_.assign(width * height, fill);
}

template <typename Pixel>
Image<Pixel>::Image(std::size_t width, std::size_t height,
                    std::vector<Pixel> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width == 0 || height == 0) {
    throw Error(ErrorCode::ZeroDimension, "image dimensions must be >= 1");
  }
  if (pixels_.size() != width * height) {
    throw Error(ErrorCode::InvalidParameter,
                "pixel buffer length does not match width * height");
  }
}

template class Image<Rgb>;
template class Image<std::uint8_t>;

std::uint8_t to_channel(double value) noexcept {
  const double rounded = std::floor(value + 0.5);
  if (!(rounded > 0.0)) return 0;
  if (rounded >= 255.0) return 255;
  return static_cast<std::uint8_t>(rounded);
}

Raster center_square_crop(const Raster& r) {
  const std::size_t side = std::min(r.width(), r.height());
  const std::size_t x0 = (r.width() - side) / 2;
  const std::size_t y0 = (r.height() - side) / 2;
  Raster out(side, side);
  for (std::size_t y = 0; y < side; ++y) {
    const auto src = r.row(y0 + y).subspan(x0, side);
    std::copy(src.begin(), src.end(), out.row(y).begin());
  }
  return out;
}

namespace {

struct Tap {
  std::size_t i0;
  std::size_t i1;
  double frac;
};

// Source taps for every destination index along one axis.
std::vector<Tap> bilinear_taps(std::size_t in, std::size_t out) {
  std::vector<Tap> taps(out);
  const double ratio = static_cast<double>(in) / static_cast<double>(out);
  const double max_coord = static_cast<double>(in - 1);
  for (std::size_t d = 0; d < out; ++d) {
    double s = (static_cast<double>(d) + 0.5) * ratio - 0.5;
    s = std::clamp(s, 0.0, max_coord);
    const auto i0 = static_cast<std::size_t>(std::floor(s));
    taps[d] = {i0, std::min(i0 + 1, in - 1), s - static_cast<double>(i0)};
  }
  return taps;
}

inline double lerp2(double p00, double p10, double p01, double p11,
                    double fx, double fy) {
  const double top = p00 + (p10 - p00) * fx;
  const double bottom = p01 + (p11 - p01) * fx;
  return top + (bottom - top) * fy;
}

}  // namespace

Raster resize_bilinear(const Raster& r, std::size_t out_w, std::size_t out_h) {
  if (out_w == 0 || out_h == 0) {
    throw Error(ErrorCode::ZeroDimension, "resize target must be >= 1x1");
  }
  if (out_w == r.width() && out_h == r.height()) return r;
  const auto xs = bilinear_taps(r.width(), out_w);
  const auto ys = bilinear_taps(r.height(), out_h);
  Raster out(out_w, out_h);
  for (std::size_t y = 0; y < out_h; ++y) {
    const Tap ty = ys[y];
    for (std::size_t x = 0; x < out_w; ++x) {
      const Tap tx = xs[x];
      const Rgb a = r.at(tx.i0, ty.i0);
      const Rgb b = r.at(tx.i1, ty.i0);
      const Rgb c = r.at(tx.i0, ty.i1);
      const Rgb d = r.at(tx.i1, ty.i1);
      out.at(x, y) = {
          to_channel(lerp2(a.r, b.r, c.r, d.r, tx.frac, ty.frac)),
          to_channel(lerp2(a.g, b.g, c.g, d.g, tx.frac, ty.frac)),
          to_channel(lerp2(a.b, b.b, c.b, d.b, tx.frac, ty.frac)),
      };
    }
  }
  return out;
}

GrayRaster resize_bilinear(const GrayRaster& r, std::size_t out_w,
                           std::size_t out_h) {
  if (out_w == 0 || out_h == 0) {
    throw Error(ErrorCode::ZeroDimension, "resize target must be >= 1x1");
  }
  if (out_w == r.width() && out_h == r.height()) return r;
  const auto xs = bilinear_taps(r.width(), out_w);
  const auto ys = bilinear_taps(r.height(), out_h);
  GrayRaster out(out_w, out_h);
  for (std::size_t y = 0; y < out_h; ++y) {
    const Tap ty = ys[y];
    for (std::size_t x = 0; x < out_w; ++x) {
      const Tap tx = xs[x];
      out.at(x, y) = to_channel(lerp2(r.at(tx.i0, ty.i0), r.at(tx.i1, ty.i0),
                                      r.at(tx.i0, ty.i1), r.at(tx.i1, ty.i1),
                                      tx.frac, ty.frac));
    }
  }
  return out;
}

Raster rotate(const Raster& r, Rotation rot) {
  const std::size_t w = r.width();
  const std::size_t h = r.height();
  switch (rot.quarter_turns()) {
    case 1: {
      Raster out(h, w);
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) out.at(h - 1 - y, x) = r.at(x, y);
      return out;
    }
    case 2: {
      Raster out(w, h);
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
          out.at(w - 1 - x, h - 1 - y) = r.at(x, y);
      return out;
    }
    case 3: {
      Raster out(h, w);
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) out.at(y, w - 1 - x) = r.at(x, y);
      return out;
    }
    default:
      return r;
  }
}

std::uint8_t luma(Rgb p) noexcept {
  return to_channel(0.299 * p.r + 0.587 * p.g + 0.114 * p.b);
}

GrayRaster to_grayscale(const Raster& r) {
  GrayRaster out(r.width(), r.height());
  std::transform(r.pixels().begin(), r.pixels().end(), out.pixels().begin(),
                 luma);
  return out;
}

double mean_luma(const Raster& r) {
  std::uint64_t sum = 0;
  for (const Rgb p : r.pixels()) sum += luma(p);
  return static_cast<double>(sum) / static_cast<double>(r.size());
}

Rgb rotate_hue(Rgb p, double shift_deg) noexcept {
  const int hi = std::max({p.r, p.g, p.b});
  const int lo = std::min({p.r, p.g, p.b});
  if (hi == lo) return p;
  const double span = hi - lo;

  // Hue in sextants [0, 6).
  double h;
  if (hi == p.r) {
    h = (p.g - p.b) / span;
  } else if (hi == p.g) {
    h = 2.0 + (p.b - p.r) / span;
  } else {
    h = 4.0 + (p.r - p.g) / span;
  }
  h = std::fmod(h + shift_deg / 60.0, 6.0);
  if (h < 0.0) h += 6.0;
  if (h >= 6.0) h = 0.0;

  // Rotation keeps value (max) and saturation, hence the min channel too;
  // only the middle channel is recomputed.
  const int sextant = static_cast<int>(h);
  const double f = h - sextant;
  const auto max_c = static_cast<std::uint8_t>(hi);
  const auto min_c = static_cast<std::uint8_t>(lo);
  const std::uint8_t rising = to_channel(lo + span * f);
  const std::uint8_t falling = to_channel(lo + span * (1.0 - f));
  switch (sextant) {
    case 0: return {max_c, rising, min_c};
    case 1: return {falling, max_c, min_c};
    case 2: return {min_c, max_c, rising};
    case 3: return {min_c, falling, max_c};
    case 4: return {rising, min_c, max_c};
    default: return {max_c, min_c, falling};
  }
}

Raster hue_jitter(const Raster& r, std::uint64_t seed,
                  const HueJitterParams& params) {
  if (!(params.probability >= 0.0 && params.probability <= 1.0)) {
    throw Error(ErrorCode::InvalidParameter,
                "hue jitter probability must be in [0, 1]");
  }
  if (!(params.max_shift_deg >= 0.0 && params.max_shift_deg <= 180.0)) {
    throw Error(ErrorCode::InvalidParameter,
                "hue jitter max shift must be in [0, 180] degrees");
  }
  Prng rng(seed);
  if (rng.uniform() >= params.probability) return r;
  const double shift = rng.uniform(-params.max_shift_deg, params.max_shift_deg);
  Raster out = r;
  for (Rgb& p : out.pixels()) p = rotate_hue(p, shift);
  return out;
}

}  // namespace cosmoforge
