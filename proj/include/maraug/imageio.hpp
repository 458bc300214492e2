#pragma once

// PNG/JPEG decoding to 8-bit RGB and deterministic PNG encoding.

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "maraug/error.hpp"
#include "maraug/pixelops.hpp"

namespace maraug {

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  return FilePtr(std::fopen(path.c_str(), mode));
}

inline ImageBuffer decode_png(std::FILE* fp, const std::string& name) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(ErrorCode::DecodeFailure, "png_create_read_struct failed", name);
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorCode::DecodeFailure, "png_create_info_struct failed", name);
  }
  // Locals written after setjmp live on the heap so their values stay
  // well-defined when libpng longjmps back here.
  auto pixels = std::make_unique<std::vector<std::uint8_t>>();
  auto rows = std::make_unique<std::vector<png_bytep>>();
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::DecodeFailure, "corrupt PNG stream", name);
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);
  if (png_get_rowbytes(png, info) != static_cast<png_size_t>(width) * 3) {
    png_error(png, "unexpected row layout");
  }
  pixels->resize(static_cast<std::size_t>(width) * height * 3);
  rows->resize(height);
  for (png_uint_32 y = 0; y < height; ++y) {
    (*rows)[y] = pixels->data() + static_cast<std::size_t>(y) * width * 3;
  }
  png_read_image(png, rows->data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  return ImageBuffer(width, height, std::move(*pixels));
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// libjpeg reports truncated or corrupt entropy data as warnings and keeps
// going with gray fill; treat those as decode failures.
inline void jpeg_emit_message(j_common_ptr cinfo, int msg_level) {
  if (msg_level < 0) jpeg_error_exit(cinfo);
}

inline ImageBuffer decode_jpeg(std::FILE* fp, const std::string& name) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.emit_message = jpeg_emit_message;
  err.message[0] = '\0';
  auto pixels = std::make_unique<std::vector<std::uint8_t>>();
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw Error(ErrorCode::DecodeFailure, std::string("corrupt JPEG stream: ") + err.message, name);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, fp);
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  const std::size_t stride = static_cast<std::size_t>(cinfo.output_width) * 3;
  pixels->resize(stride * cinfo.output_height);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = pixels->data() + cinfo.output_scanline * stride;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  const std::size_t w = cinfo.output_width;
  const std::size_t h = cinfo.output_height;
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return ImageBuffer(w, h, std::move(*pixels));
}

}  // namespace detail

/// Decode a PNG or JPEG file (sniffed by signature) into 8-bit RGB.
inline ImageBuffer read_image(const std::filesystem::path& path) {
  const std::string name = path.string();
  auto fp = detail::open_file(path, "rb");
  if (!fp) throw Error(ErrorCode::MissingSource, "cannot open image", name);
  unsigned char sig[8] = {};
  const std::size_t got = std::fread(sig, 1, sizeof sig, fp.get());
  std::rewind(fp.get());
  if (got == 8 && png_sig_cmp(sig, 0, 8) == 0) return detail::decode_png(fp.get(), name);
  if (got >= 3 && sig[0] == 0xFF && sig[1] == 0xD8 && sig[2] == 0xFF) {
    return detail::decode_jpeg(fp.get(), name);
  }
  throw Error(ErrorCode::DecodeFailure, "not a PNG or JPEG file", name);
}

/// PNG compression level used for augmented outputs. Output bytes depend
/// only on pixels and this level (no timestamps or text chunks).
inline constexpr int kPngCompressionLevel = 3;

inline void write_png(const std::filesystem::path& path, const ImageBuffer& img) {
  const std::string name = path.string();
  if (img.empty()) throw Error(ErrorCode::WriteFailure, "empty image", name);
  auto fp = detail::open_file(path, "wb");
  if (!fp) throw Error(ErrorCode::WriteFailure, "cannot open for writing", name);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(ErrorCode::WriteFailure, "png_create_write_struct failed", name);
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorCode::WriteFailure, "png_create_info_struct failed", name);
  }
  auto rows = std::make_unique<std::vector<png_bytep>>(img.height());
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::WriteFailure, "PNG encoding failed", name);
  }
  png_init_io(png, fp.get());
  png_set_compression_level(png, kPngCompressionLevel);
  png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_SUB);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()),
               static_cast<png_uint_32>(img.height()), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_BASE, PNG_FILTER_TYPE_BASE);
  png_write_info(png, info);
  auto* base = const_cast<std::uint8_t*>(img.data().data());
  for (std::size_t y = 0; y < img.height(); ++y) (*rows)[y] = base + y * img.width() * 3;
  png_write_image(png, rows->data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(fp.get()) != 0 || std::ferror(fp.get())) {
    throw Error(ErrorCode::WriteFailure, "write error", name);
  }
}

}  // namespace maraug
