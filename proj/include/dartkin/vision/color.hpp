#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "dartkin/vision/image.hpp"

namespace dartkin::vision {

/// Hue on the half-degree scale [0, 180]; saturation and value in [0, 255].
struct Hsv {
  std::uint8_t h = 0, s = 0, v = 0;
};

inline Hsv rgb_to_hsv(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
  const int r = r8, g = g8, b = b8;
  const int v = std::max({r, g, b});
  const int mn = std::min({r, g, b});
  const int diff = v - mn;
  Hsv out;
  out.v = static_cast<std::uint8_t>(v);
  out.s = v == 0 ? 0 : static_cast<std::uint8_t>(std::lround(255.0 * diff / v));
  if (diff == 0) return out;
  double h;
  if (v == r) {
    h = 60.0 * (g - b) / diff;
  } else if (v == g) {
    h = 120.0 + 60.0 * (b - r) / diff;
  } else {
    h = 240.0 + 60.0 * (r - g) / diff;
  }
  if (h < 0) h += 360.0;
  out.h = static_cast<std::uint8_t>(std::lround(h / 2.0));
  return out;
}

struct HsvImage {
  int width = 0;
  int height = 0;
  std::vector<Hsv> pixels;
};

inline HsvImage rgb_to_hsv(const Image& img) {
  HsvImage out{img.width, img.height, {}};
  out.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    out.pixels[i] = rgb_to_hsv(img.pixels[3 * i], img.pixels[3 * i + 1], img.pixels[3 * i + 2]);
  }
  return out;
}

/// Inclusive bounds per channel. A hue interval that wraps past 180 is
/// written as two ranges.
struct HsvRange {
  int h_lo = 0, h_hi = 180;
  int s_lo = 0, s_hi = 255;
  int v_lo = 0, v_hi = 255;

  void validate() const {
    if (h_lo < 0 || h_hi > 180 || s_lo < 0 || s_hi > 255 || v_lo < 0 || v_hi > 255 || h_lo > h_hi || s_lo > s_hi || v_lo > v_hi) {
      fail(ErrorCode::InvalidArgument, "HSV range bounds out of order or out of scale");
    }
  }

  bool contains(const Hsv& p) const {
    return p.h >= h_lo && p.h <= h_hi && p.s >= s_lo && p.s <= s_hi && p.v >= v_lo && p.v <= v_hi;
  }
};

inline constexpr HsvRange kRedLow{0, 10, 60, 255, 40, 255};
inline constexpr HsvRange kRedHigh{168, 180, 40, 255, 160, 255};
// Upper hue bound clamped to the 180 scale.
inline constexpr HsvRange kBlack{50, 180, 50, 200, 0, 70};

inline Mask mask_by_ranges(const HsvImage& hsv, std::span<const HsvRange> ranges) {
  if (ranges.empty()) fail(ErrorCode::InvalidArgument, "mask_by_ranges: no ranges");
  for (const auto& r : ranges) r.validate();
  Mask m(hsv.width, hsv.height);
  for (std::size_t i = 0; i < hsv.pixels.size(); ++i) {
    for (const auto& r : ranges) {
      if (r.contains(hsv.pixels[i])) {
        m.bits[i] = 1;
        break;
      }
    }
  }
  return m;
}

inline Mask red_mask(const HsvImage& hsv) {
  const HsvRange ranges[] = {kRedLow, kRedHigh};
  return mask_by_ranges(hsv, ranges);
}

inline Mask black_mask(const HsvImage& hsv) {
  const HsvRange ranges[] = {kBlack};
  return mask_by_ranges(hsv, ranges);
}

}  // namespace dartkin::vision
