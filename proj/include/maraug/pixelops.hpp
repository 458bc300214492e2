#pragma once

// Pixel-level primitives on 8-bit RGB rasters. Each primitive evaluates its
// formula in double precision and quantizes once, at the end, with
// half-away-from-zero rounding and clamping to [0, 255].

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "maraug/error.hpp"

namespace maraug {

struct RgbColor {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const RgbColor&, const RgbColor&) = default;
};

inline constexpr RgbColor kWhite{255, 255, 255};

/// Per-channel multiplicative gains, in R, G, B order.
using ChannelGains = std::array<double, 3>;

/// Owned row-major RGB raster.
class ImageBuffer {
 public:
  ImageBuffer() = default;

  ImageBuffer(std::size_t width, std::size_t height, RgbColor fill = {})
      : width_(width), height_(height), data_(checked_size(width, height)) {
    for (std::size_t i = 0; i < data_.size(); i += 3) {
      data_[i] = fill.r;
      data_[i + 1] = fill.g;
      data_[i + 2] = fill.b;
    }
  }

  ImageBuffer(std::size_t width, std::size_t height,
              std::vector<std::uint8_t> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != checked_size(width, height)) {
      throw Error(ErrorCode::DimensionMismatch,
                  "pixel buffer holds " + std::to_string(data_.size()) +
                      " bytes, expected " +
                      std::to_string(width * height * 3));
    }
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return width_ * height_; }
  bool empty() const noexcept { return data_.empty(); }

  std::span<std::uint8_t> data() noexcept { return data_; }
  std::span<const std::uint8_t> data() const noexcept { return data_; }

  RgbColor at(std::size_t x, std::size_t y) const {
    const std::size_t i = offset(x, y);
    return {data_[i], data_[i + 1], data_[i + 2]};
  }

  void set(std::size_t x, std::size_t y, RgbColor c) {
    const std::size_t i = offset(x, y);
    data_[i] = c.r;
    data_[i + 1] = c.g;
    data_[i + 2] = c.b;
  }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  static std::size_t checked_size(std::size_t width, std::size_t height) {
    if (width == 0 || height == 0) {
      throw Error(ErrorCode::InvalidArgument,
                  "image dimensions must be positive, got " +
                      std::to_string(width) + "x" + std::to_string(height));
    }
    return width * height * 3;
  }

  std::size_t offset(std::size_t x, std::size_t y) const {
    if (x >= width_ || y >= height_) {
      throw Error(ErrorCode::OutOfRange, "pixel (" + std::to_string(x) + "," +
                                             std::to_string(y) +
                                             ") outside image");
    }
    return (y * width_ + x) * 3;
  }

  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Per-pixel coverage mask painted with a single gray level.
struct AlphaTexture {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> alpha;  // row-major, each in [0, 1]
  std::uint8_t value = 255;

  AlphaTexture() = default;
  AlphaTexture(std::size_t w, std::size_t h, std::uint8_t v)
      : width(w), height(h), alpha(w * h, 0.0), value(v) {}

  double& at(std::size_t x, std::size_t y) { return alpha[y * width + x]; }
  double at(std::size_t x, std::size_t y) const { return alpha[y * width + x]; }

  friend bool operator==(const AlphaTexture&, const AlphaTexture&) = default;
};

/// Round half away from zero, then clamp into the 8-bit range.
inline std::uint8_t quantize(double v) noexcept {
  const double r = std::round(v);
  if (!(r > 0.0)) return 0;  // also maps NaN to 0
  if (r >= 255.0) return 255;
  return static_cast<std::uint8_t>(r);
}

namespace detail {

inline void require_fraction(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(what) + " must lie in [0,1], got " +
                    std::to_string(v));
  }
}

inline void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(what) + " must be finite and >= 0, got " +
                    std::to_string(v));
  }
}

// A primitive whose output channel depends only on the input channel value
// can be tabulated: 3 x 256 entries replace a multiply-round per byte.
using ChannelLut = std::array<std::array<std::uint8_t, 256>, 3>;

template <typename F>
ChannelLut make_lut(F&& channel_fn) {
  ChannelLut lut{};
  for (int c = 0; c < 3; ++c) {
    for (int v = 0; v < 256; ++v) {
      lut[c][v] = quantize(channel_fn(c, static_cast<double>(v)));
    }
  }
  return lut;
}

inline ImageBuffer apply_lut(const ImageBuffer& img, const ChannelLut& lut) {
  ImageBuffer out = img;
  auto px = out.data();
  for (std::size_t i = 0; i < px.size(); i += 3) {
    px[i] = lut[0][px[i]];
    px[i + 1] = lut[1][px[i + 1]];
    px[i + 2] = lut[2][px[i + 2]];
  }
  return out;
}

inline double channel_of(RgbColor c, int channel) {
  return channel == 0 ? c.r : channel == 1 ? c.g : c.b;
}

}  // namespace detail

/// out = (1 - alpha) * in + alpha * layer, per channel.
inline ImageBuffer blend_with_layer(const ImageBuffer& img, RgbColor layer,
                                    double alpha) {
  detail::require_fraction(alpha, "blend alpha");
  return detail::apply_lut(img, detail::make_lut([&](int c, double v) {
                             return (1.0 - alpha) * v +
                                    alpha * detail::channel_of(layer, c);
                           }));
}

inline ImageBuffer adjust_brightness(const ImageBuffer& img, double factor) {
  detail::require_nonnegative(factor, "brightness factor");
  return detail::apply_lut(
      img, detail::make_lut([&](int, double v) { return v * factor; }));
}

/// Contrast about a fixed mid-gray pivot of 128.
inline ImageBuffer adjust_contrast(const ImageBuffer& img, double factor) {
  detail::require_nonnegative(factor, "contrast factor");
  return detail::apply_lut(img, detail::make_lut([&](int, double v) {
                             return (v - 128.0) * factor + 128.0;
                           }));
}

inline ImageBuffer apply_channel_gains(const ImageBuffer& img,
                                       const ChannelGains& gains) {
  for (double g : gains) detail::require_nonnegative(g, "channel gain");
  return detail::apply_lut(img, detail::make_lut([&](int c, double v) {
                             return v * gains[static_cast<std::size_t>(c)];
                           }));
}

/// Alpha-composite a gray texture over the image, pixel by pixel.
inline ImageBuffer overlay_texture(const ImageBuffer& img,
                                   const AlphaTexture& tex) {
  if (tex.width != img.width() || tex.height != img.height() ||
      tex.alpha.size() != img.pixel_count()) {
    throw Error(ErrorCode::DimensionMismatch,
                "texture " + std::to_string(tex.width) + "x" +
                    std::to_string(tex.height) + " vs image " +
                    std::to_string(img.width()) + "x" +
                    std::to_string(img.height()));
  }
  ImageBuffer out = img;
  auto px = out.data();
  const double value = tex.value;
  for (std::size_t p = 0; p < tex.alpha.size(); ++p) {
    const double a = tex.alpha[p];
    if (a == 0.0) continue;
    detail::require_fraction(a, "texture alpha");
    for (std::size_t c = 0; c < 3; ++c) {
      std::uint8_t& ch = px[p * 3 + c];
      ch = quantize((1.0 - a) * ch + a * value);
    }
  }
  return out;
}

}  // namespace maraug
