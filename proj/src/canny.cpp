#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "occond/occlusion.hpp"

namespace occond::occlusion {

namespace {

float clamped(const FloatMap& img, int r, int c) {
  r = std::clamp(r, 0, img.height() - 1);
  c = std::clamp(c, 0, img.width() - 1);
  return img.at(r, c);
}

}  // namespace

FloatMap gaussian_blur_5x5(const FloatMap& image, double sigma) {
  std::array<double, 5> kernel{};
  double sum = 0.0;
  for (int k = -2; k <= 2; ++k) {
    kernel[k + 2] = std::exp(-(k * k) / (2.0 * sigma * sigma));
    sum += kernel[k + 2];
  }
  for (auto& k : kernel) k /= sum;

  const int h = image.height();
  const int w = image.width();
  FloatMap horizontal(h, w, 1, 0.0f);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int k = -2; k <= 2; ++k) acc += kernel[k + 2] * clamped(image, r, c + k);
      horizontal.at(r, c) = static_cast<float>(acc);
    }
  }
  FloatMap out(h, w, 1, 0.0f);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int k = -2; k <= 2; ++k) acc += kernel[k + 2] * clamped(horizontal, r + k, c);
      out.at(r, c) = static_cast<float>(acc);
    }
  }
  return out;
}

BinaryMap canny_on_image(const FloatMap& input, double low, double high) {
  const FloatMap image = gaussian_blur_5x5(input, kCannySigma);
  const int h = image.height();
  const int w = image.width();

  FloatMap magnitude(h, w, 1, 0.0f);
  std::vector<std::uint8_t> sector(image.pixel_count(), 0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const auto p = [&](int dr, int dc) {
        return static_cast<double>(clamped(image, r + dr, c + dc));
      };
      const double gx = (p(-1, 1) + 2 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2 * p(0, -1) + p(1, -1));
      const double gy = (p(1, -1) + 2 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2 * p(-1, 0) + p(-1, 1));
      magnitude.at(r, c) = static_cast<float>(std::abs(gx) + std::abs(gy));
      double angle = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
      if (angle < 0.0) angle += 180.0;
      // 0: horizontal gradient, 1: down-right diagonal, 2: vertical, 3: down-left
      sector[static_cast<std::size_t>(r) * w + c] =
          angle < 22.5 || angle >= 157.5 ? 0 : angle < 67.5 ? 1 : angle < 112.5 ? 2 : 3;
    }
  }

  constexpr std::array<std::array<int, 2>, 4> step = {{{0, 1}, {1, 1}, {1, 0}, {1, -1}}};
  const auto mag_or_zero = [&](int r, int c) {
    return magnitude.in_bounds(r, c) ? magnitude.at(r, c) : 0.0f;
  };
  FloatMap thin(h, w, 1, 0.0f);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const float m = magnitude.at(r, c);
      if (!(m > low)) continue;
      const auto [dr, dc] = step[sector[static_cast<std::size_t>(r) * w + c]];
      // Strict on the negative side, inclusive on the positive side, so a
      // plateau two pixels wide keeps exactly one.
      if (m > mag_or_zero(r - dr, c - dc) && m >= mag_or_zero(r + dr, c + dc)) {
        thin.at(r, c) = m;
      }
    }
  }

  BinaryMap edges(h, w, 1, 0);
  std::vector<int> stack;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (thin.at(r, c) > high && !edges.at(r, c)) {
        edges.at(r, c) = 1;
        stack.push_back(r * w + c);
      }
    }
  }
  while (!stack.empty()) {
    const int p = stack.back();
    stack.pop_back();
    const int r = p / w;
    const int c = p % w;
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        const int nr = r + dr;
        const int nc = c + dc;
        if (!edges.in_bounds(nr, nc) || edges.at(nr, nc)) continue;
        if (thin.at(nr, nc) > low) {
          edges.at(nr, nc) = 1;
          stack.push_back(nr * w + nc);
        }
      }
    }
  }
  return edges;
}

}  // namespace occond::occlusion
