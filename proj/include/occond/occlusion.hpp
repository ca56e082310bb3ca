#pragma once

#include <string>

#include "occond/grid.hpp"

namespace occond::occlusion {

/// Pixels whose ray crosses more than this many surfaces are occluded.
inline constexpr std::uint32_t kSurfaceThreshold = 2;

inline constexpr int kReferenceArea = 1024 * 1024;
inline constexpr int kDefaultAreaMin = 50;         // at 1024 x 1024
inline constexpr int kDefaultDilationRadius = 3;   // at 1024 x 1024
inline constexpr double kDefaultCannyLow = 5.0;
inline constexpr double kDefaultCannyHigh = 15.0;
inline constexpr double kCannySigma = 1.0;

struct MaskParams {
  int area_min = 0;
  int dilation_radius = 0;

  bool operator==(const MaskParams&) const = default;
};

/// Defaults scaled to the image: area_min with pixel count, radius with
/// the linear size.
MaskParams default_mask_params(int height, int width);

struct OcclusionMask {
  BinaryMap mask;  // values in {0, 1}
  MaskParams params;
};

enum class EdgeMethod { kGradient, kCanny };

std::string to_string(EdgeMethod method);
EdgeMethod parse_edge_method(const std::string& name);

struct EdgeParams {
  double tau = 0.0;
  double canny_low = kDefaultCannyLow;
  double canny_high = kDefaultCannyHigh;
};

struct EdgeMap {
  BinaryMap edges;  // values in {0, 1}
  EdgeMethod method = EdgeMethod::kCanny;
  EdgeParams params;
};

/// mask = (count > 2), elementwise.
OcclusionMask occlusion_mask(const CountMap& count);

/// Drops 8-connected components with fewer than area_min pixels.
BinaryMap filter_small_components(const BinaryMap& mask, int area_min);

/// Sets every pixel within Euclidean distance <= radius of a set pixel.
BinaryMap dilate(const BinaryMap& mask, int radius);

/// filter_small_components followed by dilate.
OcclusionMask refine_mask(const OcclusionMask& raw, int area_min, int radius);
OcclusionMask refine_mask(const OcclusionMask& raw, const MaskParams& params);

/// Depth with no-hit pixels replaced by `fill` (normally the depth clip).
FloatMap fill_missing_depth(const FloatMap& depth, float fill);

/// |dd/dx| + |dd/dy| > tau on finite-depth pixels. Central differences in the
/// interior, one-sided at the image border; no-hit neighbours read as
/// `missing_depth`.
EdgeMap depth_edges(const FloatMap& depth, double tau, float missing_depth = 5.0f);

/// Canny on the depth map affinely rescaled to [0, 255]: 5x5 Gaussian
/// (sigma 1), Sobel, non-maximum suppression, hysteresis on the L1
/// gradient magnitude.
EdgeMap canny_edges(const FloatMap& depth, double low, double high,
                    float missing_depth = 5.0f);

/// Canny stages on an already-scaled single-channel image.
FloatMap gaussian_blur_5x5(const FloatMap& image, double sigma);
BinaryMap canny_on_image(const FloatMap& image, double low, double high);

EdgeMap masked_edges(const EdgeMap& edges, const OcclusionMask& mask);

}  // namespace occond::occlusion
