#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "dartkin/vision/image.hpp"

namespace dartkin::vision {

/// Structuring element as a list of offsets from its anchor.
struct Kernel {
  int width = 1;
  int height = 1;
  std::vector<std::pair<int, int>> offsets;  // (dx, dy)
};

/// Ellipse inscribed in a w x h box, anchored at (w/2, h/2); same
/// rasterisation as the common OpenCV construction.
inline Kernel ellipse_kernel(int w, int h) {
  if (w < 1 || h < 1) fail(ErrorCode::InvalidArgument, "kernel dimensions must be at least 1");
  Kernel k{w, h, {}};
  const int r = h / 2, c = w / 2;
  const double inv_r2 = r > 0 ? 1.0 / (static_cast<double>(r) * r) : 0.0;
  for (int i = 0; i < h; ++i) {
    const int dy = i - r;
    int j1 = 0, j2 = 0;
    if (std::abs(dy) <= r) {
      const int dx = static_cast<int>(std::lround(c * std::sqrt((static_cast<double>(r) * r - dy * dy) * inv_r2)));
      j1 = std::max(c - dx, 0);
      j2 = std::min(c + dx + 1, w);
    }
    if (r == 0) {
      j1 = 0;
      j2 = w;
    }
    for (int j = j1; j < j2; ++j) k.offsets.emplace_back(j - c, i - r);
  }
  return k;
}

/// out(p) = 1 if any in(p - k) is set. Outside the image counts as unset.
inline Mask dilate(const Mask& in, const Kernel& k) {
  Mask out(in.width, in.height);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      if (!in.at(x, y)) continue;
      for (auto [dx, dy] : k.offsets) {
        const int u = x + dx, v = y + dy;
        if (out.contains(u, v)) out.at(u, v) = 1;
      }
    }
  }
  return out;
}

/// out(p) = 1 if every in(p + k) inside the image is set.
inline Mask erode(const Mask& in, const Kernel& k) {
  Mask out(in.width, in.height);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      bool all = true;
      for (auto [dx, dy] : k.offsets) {
        const int u = x + dx, v = y + dy;
        if (in.contains(u, v) && !in.at(u, v)) {
          all = false;
          break;
        }
      }
      out.at(x, y) = all ? 1 : 0;
    }
  }
  return out;
}

inline Mask morph_close(const Mask& in, const Kernel& k, int iterations = 1) {
  Mask m = in;
  for (int i = 0; i < iterations; ++i) {
    Mask next = erode(dilate(m, k), k);
    if (next == m) break;
    m = std::move(next);
  }
  return m;
}

inline Mask morph_close(const Mask& in, int kw, int kh, int iterations = 1) { return morph_close(in, ellipse_kernel(kw, kh), iterations); }

}  // namespace dartkin::vision
