#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "occond/json_io.hpp"
#include "occond/occlusion.hpp"
#include "occond/raster.hpp"

namespace occond::bundle {

/// Gradient-method threshold on |dd/dx| + |dd/dy|, meters per pixel.
inline constexpr double kDefaultTau = 0.1;

struct BundleOptions {
  std::optional<int> width;   // both or neither; rescales the intrinsics
  std::optional<int> height;
  std::optional<int> area_min;         // default: scaled from 50 px at 1024^2
  std::optional<int> dilation_radius;  // default: scaled from 3 px at 1024^2
  occlusion::EdgeMethod edge_method = occlusion::EdgeMethod::kCanny;
  double tau = kDefaultTau;
  double canny_low = occlusion::kDefaultCannyLow;
  double canny_high = occlusion::kDefaultCannyHigh;
  std::optional<double> depth_clip;
  bool normal_png = false;
  int threads = 0;  // never affects output bytes
};

struct Bundle {
  scene::Camera camera;  // after size / depth-clip overrides
  raster::RasterResult raster;
  occlusion::OcclusionMask raw_mask;
  occlusion::OcclusionMask mask;
  occlusion::EdgeMap edges;
  occlusion::EdgeMap masked;
};

/// Rasterizes and derives the occlusion artifacts without touching disk.
/// Throws ValidationError for inconsistent scenes or parameters.
Bundle compute_bundle(const scene::SceneSpec& spec, const body::BodyModel& model,
                      const BundleOptions& options = {});

inline constexpr const char* kDepthFile = "depth.pfm";
inline constexpr const char* kNormalFile = "normal.pfm";
inline constexpr const char* kCountFile = "count.png";
inline constexpr const char* kMaskFile = "mask.png";
inline constexpr const char* kEdgesFile = "edges.png";
inline constexpr const char* kMaskedEdgesFile = "masked_edges.png";
inline constexpr const char* kNormalVisFile = "normal_vis.png";
inline constexpr const char* kManifestFile = "manifest.json";

/// Writes the six raster files (seven with normal_png) and manifest.json,
/// and returns the manifest.
io::json render_bundle(const scene::SceneSpec& spec, const body::BodyModel& model,
                       const std::filesystem::path& out_dir, const BundleOptions& options = {});

/// Re-hashes every file listed in the manifest. Returns one message per
/// problem; empty means the bundle is intact.
std::vector<std::string> verify_bundle(const std::filesystem::path& dir);

/// Four side-by-side RGB panels: depth (near is bright), normal, mask
/// tinted red over depth, edges (white) with masked edges in red.
Grid<std::uint8_t> make_preview(const std::filesystem::path& bundle_dir);

}  // namespace occond::bundle
