#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "cosmoforge/raster.hpp"

namespace cosmoforge {

using Bytes = std::vector<std::uint8_t>;

enum class ImageFormat { Png, Jpeg, Unknown };

ImageFormat sniff_format(std::span<const std::uint8_t> bytes) noexcept;

// Decodes a PNG (any bit depth / color type, reduced to 8-bit RGB) or a
// baseline JPEG.
Raster decode(std::span<const std::uint8_t> bytes);

// Lossless PNG with fixed compression settings, so equal rasters always encode
// to equal bytes.
Bytes encode_png(const Raster& r);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes);

Raster read_image(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Raster& r);

// Row-at-a-time RGB PNG encoder. Used for outputs too large to hold as one
// Raster. Rows must be written top to bottom; finish() flushes the stream.
class PngStreamWriter {
 public:
  PngStreamWriter(const std::filesystem::path& path, std::size_t width,
                  std::size_t height);
  ~PngStreamWriter();

  PngStreamWriter(const PngStreamWriter&) = delete;
  PngStreamWriter& operator=(const PngStreamWriter&) = delete;

  void write_row(std::span<const Rgb> row);
  void finish();

 private:
  struct State;
  std::unique_ptr<State> state_;
};

}  // namespace cosmoforge
