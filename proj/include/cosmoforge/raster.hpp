#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cosmoforge {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// 8-bit image, row-major. Dimensions are always >= 1 and the pixel buffer
// always holds exactly width * height entries.
template <typename Pixel>
class Image {
 public:
  Image(std::size_t width, std::size_t height, Pixel fill = Pixel{});
  Image(std::size_t width, std::size_t height, std::vector<Pixel> pixels);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }

  Pixel& at(std::size_t x, std::size_t y) { return pixels_[y * width_ + x]; }
  const Pixel& at(std::size_t x, std::size_t y) const {
    return pixels_[y * width_ + x];
  }

  std::span<Pixel> row(std::size_t y) {
    return {pixels_.data() + y * width_, width_};
  }
  std::span<const Pixel> row(std::size_t y) const {
    return {pixels_.data() + y * width_, width_};
  }

  std::span<Pixel> pixels() noexcept { return pixels_; }
  std::span<const Pixel> pixels() const noexcept { return pixels_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<Pixel> pixels_;
};

using Raster = Image<Rgb>;
using GrayRaster = Image<std::uint8_t>;

extern template class Image<Rgb>;
extern template class Image<std::uint8_t>;

// Clockwise quarter turns, always normalized into {0, 1, 2, 3}.
class Rotation {
 public:
  constexpr Rotation() = default;
  constexpr explicit Rotation(int quarter_turns)
      : turns_(((quarter_turns % 4) + 4) % 4) {}

  constexpr int quarter_turns() const noexcept { return turns_; }
  constexpr Rotation then(Rotation next) const {
    return Rotation(turns_ + next.turns_);
  }
  constexpr Rotation inverse() const { return Rotation(4 - turns_); }

  friend constexpr bool operator==(Rotation, Rotation) = default;

 private:
  int turns_ = 0;
};

// Round half up and clamp into [0, 255].
std::uint8_t to_channel(double value) noexcept;

Raster center_square_crop(const Raster& r);

// Half-pixel-center bilinear sampling; resizing to the same size is the
// identity.
Raster resize_bilinear(const Raster& r, std::size_t out_w, std::size_t out_h);
GrayRaster resize_bilinear(const GrayRaster& r, std::size_t out_w,
                           std::size_t out_h);

Raster rotate(const Raster& r, Rotation rot);

// Rec. 601 luma.
std::uint8_t luma(Rgb p) noexcept;
GrayRaster to_grayscale(const Raster& r);
double mean_luma(const Raster& r);

struct HueJitterParams {
  double probability = 0.25;
  double max_shift_deg = 30.0;
};

// With probability `probability`, rotates the hue of every pixel by a shift
// drawn uniformly from [-max_shift_deg, max_shift_deg]. Both draws come from
// one Prng stream seeded with `seed`.
Raster hue_jitter(const Raster& r, std::uint64_t seed,
                  const HueJitterParams& params = {});

// Hue rotation of a single pixel; achromatic pixels are returned unchanged.
Rgb rotate_hue(Rgb p, double shift_deg) noexcept;

}  // namespace cosmoforge
