#include "cosmoforge/image_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
// jpeglib.h needs FILE and size_t declared first.
#include <jpeglib.h>

#include <cstring>
#include <fstream>
#include <string>

#include "cosmoforge/error.hpp"

namespace cosmoforge {

namespace fs = std::filesystem;

ImageFormat sniff_format(std::span<const std::uint8_t> bytes) noexcept {
  static constexpr std::uint8_t kPng[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPng, 8) == 0) {
    return ImageFormat::Png;
  }
  if (bytes.size() >= 3 && bytes[0] == 0xff && bytes[1] == 0xd8 &&
      bytes[2] == 0xff) {
    return ImageFormat::Jpeg;
  }
  return ImageFormat::Unknown;
}

namespace {

Raster decode_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::MalformedFile,
                std::string("png: ") + image.message);
  }
  if (image.width == 0 || image.height == 0) {
    png_image_free(&image);
    throw Error(ErrorCode::ZeroDimension, "png: zero-sized image");
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<Rgb> pixels(static_cast<std::size_t>(image.width) * image.height);
  static_assert(sizeof(Rgb) == 3);
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    throw Error(ErrorCode::MalformedFile,
                std::string("png: ") + image.message);
  }
  return Raster(image.width, image.height, std::move(pixels));
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void jpeg_silent(j_common_ptr) {}

// Returns false and leaves `message` filled on libjpeg failure. No objects
// with destructors live in this frame, so longjmp out of libjpeg is safe.
bool decode_jpeg_raw(std::span<const std::uint8_t> bytes,
                     std::vector<Rgb>& pixels, unsigned& width,
                     unsigned& height, char* message) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.output_message = jpeg_silent;
  if (setjmp(err.jump)) {
    std::strncpy(message, err.message, JMSG_LENGTH_MAX);
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  width = cinfo.output_width;
  height = cinfo.output_height;
  if (width == 0 || height == 0 || cinfo.output_components != 3) {
    std::strncpy(message, "unexpected output geometry", JMSG_LENGTH_MAX);
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  pixels.resize(static_cast<std::size_t>(width) * height);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = reinterpret_cast<JSAMPROW>(
        pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * width);
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

Raster decode_jpeg(std::span<const std::uint8_t> bytes) {
  std::vector<Rgb> pixels;
  unsigned width = 0;
  unsigned height = 0;
  char message[JMSG_LENGTH_MAX] = {};
  if (!decode_jpeg_raw(bytes, pixels, width, height, message)) {
    throw Error(ErrorCode::MalformedFile, std::string("jpeg: ") + message);
  }
  return Raster(width, height, std::move(pixels));
}

// Destination for the classic libpng write API: either a byte buffer or a
// stdio file.
struct PngSink {
  Bytes* buffer = nullptr;
  std::FILE* file = nullptr;
  bool io_failed = false;
};

struct PngErrorContext {
  char message[256] = {};
};

void png_write_callback(png_structp png, png_bytep data, png_size_t length) {
  auto* sink = static_cast<PngSink*>(png_get_io_ptr(png));
  if (sink->buffer) {
    sink->buffer->insert(sink->buffer->end(), data, data + length);
  } else if (std::fwrite(data, 1, length, sink->file) != length) {
    sink->io_failed = true;
    png_error(png, "short write");
  }
}

void png_flush_callback(png_structp png) {
  auto* sink = static_cast<PngSink*>(png_get_io_ptr(png));
  if (sink->file) std::fflush(sink->file);
}

void png_error_callback(png_structp png, png_const_charp message) {
  auto* ctx = static_cast<PngErrorContext*>(png_get_error_ptr(png));
  std::snprintf(ctx->message, sizeof ctx->message, "%s", message);
  png_longjmp(png, 1);
}

void png_warning_callback(png_structp, png_const_charp) {}

struct PngEncoder {
  PngSink sink;
  PngErrorContext error;
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t rows_written = 0;
  bool finished = false;

  ~PngEncoder() {
    if (png) png_destroy_write_struct(&png, &info);
    if (sink.file) std::fclose(sink.file);
  }

  [[noreturn]] void fail() const {
    throw Error(ErrorCode::IoError, std::string("png write: ") + error.message);
  }

  bool begin() {
    if (setjmp(png_jmpbuf(png))) return false;
    png_set_write_fn(png, &sink, png_write_callback, png_flush_callback);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width),
                 static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_ALL_FILTERS);
    png_write_info(png, info);
    return true;
  }

  bool row(const Rgb* data) {
    if (setjmp(png_jmpbuf(png))) return false;
    png_write_row(png, reinterpret_cast<png_const_bytep>(data));
    return true;
  }

  bool end() {
    if (setjmp(png_jmpbuf(png))) return false;
    png_write_end(png, nullptr);
    return true;
  }

  void open(std::size_t w, std::size_t h) {
    if (w == 0 || h == 0) {
      throw Error(ErrorCode::ZeroDimension, "png write: zero-sized image");
    }
    if (w > PNG_UINT_31_MAX || h > PNG_UINT_31_MAX) {
      throw Error(ErrorCode::InvalidParameter, "png write: image too large");
    }
    width = w;
    height = h;
    png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error,
                                  png_error_callback, png_warning_callback);
    if (!png) throw Error(ErrorCode::IoError, "png write: out of memory");
    info = png_create_info_struct(png);
    if (!info) throw Error(ErrorCode::IoError, "png write: out of memory");
    if (!begin()) fail();
  }
};

}  // namespace

struct PngStreamWriter::State : PngEncoder {};

PngStreamWriter::PngStreamWriter(const fs::path& path, std::size_t width,
                                 std::size_t height)
    : state_(std::make_unique<State>()) {
  state_->sink.file = std::fopen(path.c_str(), "wb");
  if (!state_->sink.file) {
    throw Error(ErrorCode::IoError, "cannot open for writing: " + path.string());
  }
  state_->open(width, height);
}

PngStreamWriter::~PngStreamWriter() = default;

void PngStreamWriter::write_row(std::span<const Rgb> row) {
  if (state_->finished || state_->rows_written >= state_->height) {
    throw Error(ErrorCode::InvalidParameter, "png write: too many rows");
  }
  if (row.size() != state_->width) {
    throw Error(ErrorCode::DimensionMismatch, "png write: row width mismatch");
  }
  if (!state_->row(row.data())) state_->fail();
  ++state_->rows_written;
}

void PngStreamWriter::finish() {
  if (state_->finished) return;
  if (state_->rows_written != state_->height) {
    throw Error(ErrorCode::InvalidParameter, "png write: missing rows");
  }
  if (!state_->end()) state_->fail();
  state_->finished = true;
  const bool close_failed = std::fclose(state_->sink.file) != 0;
  state_->sink.file = nullptr;
  if (close_failed || state_->sink.io_failed) {
    throw Error(ErrorCode::IoError, "png write: close failed");
  }
}

Raster decode(std::span<const std::uint8_t> bytes) {
  switch (sniff_format(bytes)) {
    case ImageFormat::Png: return decode_png(bytes);
    case ImageFormat::Jpeg: return decode_jpeg(bytes);
    case ImageFormat::Unknown: break;
  }
  throw Error(ErrorCode::UnsupportedFormat, "not a PNG or JPEG stream");
}

Bytes encode_png(const Raster& r) {
  Bytes out;
  PngEncoder state;
  state.sink.buffer = &out;
  state.open(r.width(), r.height());
  for (std::size_t y = 0; y < r.height(); ++y) {
    if (!state.row(r.row(y).data())) state.fail();
  }
  if (!state.end()) state.fail();
  return out;
}

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open: " + path.string());
  Bytes bytes((std::istreambuf_iterator<char>(in)),
              std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::IoError, "read failed: " + path.string());
  return bytes;
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot open for writing: " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

Raster read_image(const fs::path& path) { return decode(read_file(path)); }

void write_png(const fs::path& path, const Raster& r) {
  write_file(path, encode_png(r));
}

}  // namespace cosmoforge
