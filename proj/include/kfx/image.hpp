#pragma once

// Frame representation and the preprocessing chain: BGR bytes -> HSV unit
// floats -> bilinear resize -> plane-separated 3x64x64 tensor in [0,1].

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace kfx {

// Interleaved B,G,R bytes, row-major.
struct RawFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // 3 * width * height

  RawFrame() = default;
  RawFrame(int w, int h)
      : width(w), height(h),
        pixels(static_cast<std::size_t>(w) * h * 3, 0) {
    if (w < 1 || h < 1) throw std::invalid_argument("frame dims must be >= 1");
  }
  std::uint8_t* px(int x, int y) {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  const std::uint8_t* px(int x, int y) const {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
};

// Planar float image, `channels` planes of h*w each.
struct PlaneImage {
  int channels = 0;
  int width = 0;
  int height = 0;
  std::vector<float> data;  // channels * height * width

  PlaneImage() = default;
  PlaneImage(int c, int w, int h)
      : channels(c), width(w), height(h),
        data(static_cast<std::size_t>(c) * w * h, 0.f) {}
  float* plane(int c) {
    return data.data() + static_cast<std::size_t>(c) * width * height;
  }
  const float* plane(int c) const {
    return data.data() + static_cast<std::size_t>(c) * width * height;
  }
};

// One preprocessed frame: H,S,V planes, every value in [0,1].
struct FrameTensor {
  int channels = 3;
  int width = 0;
  int height = 0;
  int source_index = -1;
  std::vector<float> data;  // channels * height * width
};

// Hexcone BGR -> HSV on unit-scaled channels. v = max, s = (max-min)/max
// (0 when max is 0), h = hue angle / 360 with h = 0 for achromatic pixels.
// Ties in the max channel resolve in R, G, B precedence order.
inline std::array<float, 3> bgr_to_hsv(std::uint8_t b8, std::uint8_t g8,
                                       std::uint8_t r8) {
  const double b = b8 / 255.0, g = g8 / 255.0, r = r8 / 255.0;
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  const double v = mx;
  const double s = mx > 0.0 ? delta / mx : 0.0;
  double h = 0.0;
  if (delta > 0.0) {
    if (mx == r) {
      h = 60.0 * ((g - b) / delta);
      if (h < 0.0) h += 360.0;
    } else if (mx == g) {
      h = 60.0 * (2.0 + (b - r) / delta);
    } else {
      h = 60.0 * (4.0 + (r - g) / delta);
    }
    if (h >= 360.0) h -= 360.0;
  }
  return {static_cast<float>(h / 360.0), static_cast<float>(s),
          static_cast<float>(v)};
}

// Inverse hexcone conversion, used by the synthetic generator and as the
// reference direction for round-trip checks.
inline std::array<std::uint8_t, 3> hsv_to_bgr(double h, double s, double v) {
  double r, g, b;
  if (s <= 0.0) {
    r = g = b = v;
  } else {
    double hh = h - std::floor(h);  // wrap into [0,1)
    hh *= 6.0;
    const int i = std::min(5, static_cast<int>(hh));
    const double f = hh - i;
    const double p = v * (1.0 - s);
    const double q = v * (1.0 - s * f);
    const double t = v * (1.0 - s * (1.0 - f));
    switch (i) {
      case 0: r = v; g = t; b = p; break;
      case 1: r = q; g = v; b = p; break;
      case 2: r = p; g = v; b = t; break;
      case 3: r = p; g = q; b = v; break;
      case 4: r = t; g = p; b = v; break;
      default: r = v; g = p; b = q; break;
    }
  }
  auto to_byte = [](double x) {
    return static_cast<std::uint8_t>(
        std::lround(std::clamp(x, 0.0, 1.0) * 255.0));
  };
  return {to_byte(b), to_byte(g), to_byte(r)};
}

// Bilinear resize with pixel-center sampling: source coordinate for output
// index i is (i + 0.5) * src/dst - 0.5, clamped to the border. Channels are
// interpolated independently; an identity-size resize reproduces the input.
inline PlaneImage resize_bilinear(const PlaneImage& src, int out_w,
                                  int out_h) {
  if (out_w < 1 || out_h < 1)
    throw std::invalid_argument("resize: target dims must be >= 1");
  PlaneImage dst(src.channels, out_w, out_h);
  const double sx = static_cast<double>(src.width) / out_w;
  const double sy = static_cast<double>(src.height) / out_h;
  for (int c = 0; c < src.channels; ++c) {
    const float* in = src.plane(c);
    float* out = dst.plane(c);
    for (int y = 0; y < out_h; ++y) {
      double fy = (y + 0.5) * sy - 0.5;
      fy = std::clamp(fy, 0.0, static_cast<double>(src.height - 1));
      const int y0 = static_cast<int>(fy);
      const int y1 = std::min(y0 + 1, src.height - 1);
      const double dy = fy - y0;
      for (int x = 0; x < out_w; ++x) {
        double fx = (x + 0.5) * sx - 0.5;
        fx = std::clamp(fx, 0.0, static_cast<double>(src.width - 1));
        const int x0 = static_cast<int>(fx);
        const int x1 = std::min(x0 + 1, src.width - 1);
        const double dx = fx - x0;
        const double v00 = in[static_cast<std::size_t>(y0) * src.width + x0];
        const double v01 = in[static_cast<std::size_t>(y0) * src.width + x1];
        const double v10 = in[static_cast<std::size_t>(y1) * src.width + x0];
        const double v11 = in[static_cast<std::size_t>(y1) * src.width + x1];
        out[static_cast<std::size_t>(y) * out_w + x] = static_cast<float>(
            v00 * (1 - dx) * (1 - dy) + v01 * dx * (1 - dy) +
            v10 * (1 - dx) * dy + v11 * dx * dy);
      }
    }
  }
  return dst;
}

// Full chain: per-pixel HSV conversion first, then resize. Interpolating hue
// across the 0/1 wrap can smear the boundary between a red region and its
// neighbours; accepted as a property of this ordering.
inline FrameTensor preprocess_frame(const RawFrame& raw, int out_size = 64) {
  PlaneImage hsv(3, raw.width, raw.height);
  const std::size_t n = static_cast<std::size_t>(raw.width) * raw.height;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* p = raw.pixels.data() + i * 3;
    const auto c = bgr_to_hsv(p[0], p[1], p[2]);
    hsv.plane(0)[i] = c[0];
    hsv.plane(1)[i] = c[1];
    hsv.plane(2)[i] = c[2];
  }
  PlaneImage small = resize_bilinear(hsv, out_size, out_size);
  FrameTensor t;
  t.channels = 3;
  t.width = out_size;
  t.height = out_size;
  t.data = std::move(small.data);
  return t;
}

}  // namespace kfx
