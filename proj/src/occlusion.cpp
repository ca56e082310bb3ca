#include "occond/occlusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "occond/error.hpp"

namespace occond::occlusion {

MaskParams default_mask_params(int height, int width) {
  const double ratio = static_cast<double>(height) * width / kReferenceArea;
  MaskParams p;
  p.area_min = static_cast<int>(std::lround(kDefaultAreaMin * ratio));
  p.dilation_radius = static_cast<int>(std::lround(kDefaultDilationRadius * std::sqrt(ratio)));
  return p;
}

std::string to_string(EdgeMethod method) {
  return method == EdgeMethod::kCanny ? "canny" : "gradient";
}

EdgeMethod parse_edge_method(const std::string& name) {
  if (name == "canny") return EdgeMethod::kCanny;
  if (name == "gradient") return EdgeMethod::kGradient;
  throw ValidationError("edge_method", "expected 'canny' or 'gradient', got '" + name + "'");
}

OcclusionMask occlusion_mask(const CountMap& count) {
  OcclusionMask out;
  out.mask = BinaryMap(count.height(), count.width(), 1, 0);
  for (std::size_t i = 0; i < count.size(); ++i) {
    out.mask[i] = count[i] > kSurfaceThreshold ? 1 : 0;
  }
  return out;
}

BinaryMap filter_small_components(const BinaryMap& mask, int area_min) {
  if (area_min < 0) {
    throw ValidationError("area_min", "must be >= 0");
  }
  BinaryMap out = mask;
  if (area_min <= 1) {
    return out;
  }
  const int h = mask.height();
  const int w = mask.width();
  std::vector<std::uint8_t> seen(mask.pixel_count(), 0);
  std::vector<int> component;
  std::vector<int> stack;
  for (int start = 0; start < h * w; ++start) {
    if (!mask[start] || seen[start]) continue;
    component.clear();
    stack.assign(1, start);
    seen[start] = 1;
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      component.push_back(p);
      const int r = p / w;
      const int c = p % w;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int nr = r + dr;
          const int nc = c + dc;
          if ((dr == 0 && dc == 0) || !mask.in_bounds(nr, nc)) continue;
          const int q = nr * w + nc;
          if (mask[q] && !seen[q]) {
            seen[q] = 1;
            stack.push_back(q);
          }
        }
      }
    }
    if (static_cast<int>(component.size()) < area_min) {
      for (int p : component) out[p] = 0;
    }
  }
  return out;
}

BinaryMap dilate(const BinaryMap& mask, int radius) {
  if (radius < 0) {
    throw ValidationError("dilation_radius", "must be >= 0");
  }
  if (radius == 0) {
    return mask;
  }
  std::vector<std::pair<int, int>> disk;
  for (int dr = -radius; dr <= radius; ++dr) {
    for (int dc = -radius; dc <= radius; ++dc) {
      if (dr * dr + dc * dc <= radius * radius) disk.emplace_back(dr, dc);
    }
  }
  BinaryMap out(mask.height(), mask.width(), 1, 0);
  for (int r = 0; r < mask.height(); ++r) {
    for (int c = 0; c < mask.width(); ++c) {
      if (!mask.at(r, c)) continue;
      for (const auto& [dr, dc] : disk) {
        if (out.in_bounds(r + dr, c + dc)) out.at(r + dr, c + dc) = 1;
      }
    }
  }
  return out;
}

OcclusionMask refine_mask(const OcclusionMask& raw, int area_min, int radius) {
  OcclusionMask out;
  out.mask = dilate(filter_small_components(raw.mask, area_min), radius);
  out.params = {area_min, radius};
  return out;
}

OcclusionMask refine_mask(const OcclusionMask& raw, const MaskParams& params) {
  return refine_mask(raw, params.area_min, params.dilation_radius);
}

FloatMap fill_missing_depth(const FloatMap& depth, float fill) {
  FloatMap out = depth;
  for (auto& d : out.storage()) {
    if (!std::isfinite(d)) d = fill;
  }
  return out;
}

EdgeMap depth_edges(const FloatMap& depth, double tau, float missing_depth) {
  if (!(tau > 0.0)) {
    throw ValidationError("tau", "edge threshold must be > 0");
  }
  const FloatMap filled = fill_missing_depth(depth, missing_depth);
  const int h = depth.height();
  const int w = depth.width();
  EdgeMap out;
  out.method = EdgeMethod::kGradient;
  out.params.tau = tau;
  out.edges = BinaryMap(h, w, 1, 0);

  const auto derivative = [](double prev, double here, double next, bool has_prev,
                             bool has_next) {
    if (has_prev && has_next) return (next - prev) / 2.0;
    if (has_next) return next - here;
    if (has_prev) return here - prev;
    return 0.0;
  };

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!std::isfinite(depth.at(r, c))) continue;
      const double here = filled.at(r, c);
      const bool left = c > 0, right = c + 1 < w, up = r > 0, down = r + 1 < h;
      const double gx = derivative(left ? filled.at(r, c - 1) : 0.0, here,
                                   right ? filled.at(r, c + 1) : 0.0, left, right);
      const double gy = derivative(up ? filled.at(r - 1, c) : 0.0, here,
                                   down ? filled.at(r + 1, c) : 0.0, up, down);
      if (std::abs(gx) + std::abs(gy) > tau) out.edges.at(r, c) = 1;
    }
  }
  return out;
}

EdgeMap canny_edges(const FloatMap& depth, double low, double high, float missing_depth) {
  if (!(low > 0.0 && low <= high)) {
    throw ValidationError("canny", "thresholds must satisfy 0 < low <= high");
  }
  const FloatMap filled = fill_missing_depth(depth, missing_depth);
  float lo = std::numeric_limits<float>::infinity();
  float hi = -std::numeric_limits<float>::infinity();
  for (float d : filled.storage()) {
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  FloatMap scaled(depth.height(), depth.width(), 1, 0.0f);
  if (hi > lo) {
    const double scale = 255.0 / (static_cast<double>(hi) - lo);
    for (std::size_t i = 0; i < filled.size(); ++i) {
      scaled[i] = static_cast<float>((static_cast<double>(filled[i]) - lo) * scale);
    }
  }
  EdgeMap out;
  out.method = EdgeMethod::kCanny;
  out.params.canny_low = low;
  out.params.canny_high = high;
  out.edges = canny_on_image(scaled, low, high);
  return out;
}

EdgeMap masked_edges(const EdgeMap& edges, const OcclusionMask& mask) {
  if (!edges.edges.same_extent(mask.mask)) {
    throw DimensionError("mask", "edge map " + edges.edges.shape_string() +
                                     " and mask " + mask.mask.shape_string() + " differ");
  }
  EdgeMap out = edges;
  for (std::size_t i = 0; i < out.edges.size(); ++i) {
    out.edges[i] = (edges.edges[i] && mask.mask[i]) ? 1 : 0;
  }
  return out;
}

}  // namespace occond::occlusion
