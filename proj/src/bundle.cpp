#include "occond/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "occond/error.hpp"
#include "occond/hashing.hpp"
#include "occond/image_io.hpp"

namespace occond::bundle {

namespace fs = std::filesystem;
using io::json;

namespace {

void check_options(const BundleOptions& o) {
  if (o.width.has_value() != o.height.has_value()) {
    throw ValidationError("size", "width and height must be given together");
  }
  if (o.width && (*o.width < 1 || *o.height < 1)) {
    throw ValidationError("size", "width and height must be >= 1");
  }
  if (o.area_min && *o.area_min < 0) throw ValidationError("area_min", "must be >= 0");
  if (o.dilation_radius && *o.dilation_radius < 0) {
    throw ValidationError("dilation_radius", "must be >= 0");
  }
  if (!(o.tau > 0.0) || !std::isfinite(o.tau)) throw ValidationError("tau", "must be > 0");
  if (!(o.canny_low > 0.0) || !(o.canny_low <= o.canny_high) || !std::isfinite(o.canny_high)) {
    throw ValidationError("canny", "thresholds must satisfy 0 < low <= high");
  }
  if (o.depth_clip && !std::isfinite(*o.depth_clip)) {
    throw ValidationError("depth_clip", "must be finite");
  }
}

json files_entry(const fs::path& dir, const std::string& name) {
  const auto bytes = io::read_file(dir / name);
  return {{"sha256", io::sha256_hex(bytes)}, {"bytes", bytes.size()}};
}

}  // namespace

Bundle compute_bundle(const scene::SceneSpec& spec, const body::BodyModel& model,
                      const BundleOptions& options) {
  check_options(options);
  scene::SceneSpec adjusted = spec;
  if (options.width) adjusted.camera = scene::resized(spec.camera, *options.width, *options.height);
  if (options.depth_clip) adjusted.camera.depth_clip = *options.depth_clip;

  Bundle out;
  out.camera = adjusted.camera;
  raster::RasterOptions ropts;
  ropts.threads = options.threads;
  out.raster = raster::rasterize(adjusted, model, ropts);

  const auto& cam = adjusted.camera;
  occlusion::MaskParams params = occlusion::default_mask_params(cam.height, cam.width);
  if (options.area_min) params.area_min = *options.area_min;
  if (options.dilation_radius) params.dilation_radius = *options.dilation_radius;

  out.raw_mask = occlusion::occlusion_mask(out.raster.buffers.count);
  out.mask = occlusion::refine_mask(out.raw_mask, params);

  const auto clip = static_cast<float>(cam.depth_clip);
  if (options.edge_method == occlusion::EdgeMethod::kCanny) {
    out.edges = occlusion::canny_edges(out.raster.buffers.depth, options.canny_low,
                                       options.canny_high, clip);
  } else {
    out.edges = occlusion::depth_edges(out.raster.buffers.depth, options.tau, clip);
  }
  out.masked = occlusion::masked_edges(out.edges, out.mask);
  return out;
}

json render_bundle(const scene::SceneSpec& spec, const body::BodyModel& model,
                   const fs::path& out_dir, const BundleOptions& options) {
  const Bundle b = compute_bundle(spec, model, options);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir.string(), "cannot create directory: " + ec.message());

  const auto& buf = b.raster.buffers;
  io::write_pfm(out_dir / kDepthFile, buf.depth);
  io::write_pfm(out_dir / kNormalFile, buf.normal);
  io::write_count_png(out_dir / kCountFile, buf.count);
  io::write_mask_png(out_dir / kMaskFile, b.mask.mask);
  io::write_mask_png(out_dir / kEdgesFile, b.edges.edges);
  io::write_mask_png(out_dir / kMaskedEdgesFile, b.masked.edges);
  if (options.normal_png) io::write_png8(out_dir / kNormalVisFile, io::normal_to_rgb(buf.normal));

  std::vector<std::string> names = {kDepthFile, kNormalFile, kCountFile,
                                    kMaskFile,  kEdgesFile,  kMaskedEdgesFile};
  if (options.normal_png) names.push_back(kNormalVisFile);
  json files = json::object();
  for (const auto& n : names) files[n] = files_entry(out_dir, n);

  const auto& cam = b.camera;
  const auto& d = b.raster.diagnostics;
  std::size_t occluded = 0, edge_pixels = 0, masked_pixels = 0;
  for (auto v : b.mask.mask.storage()) occluded += v;
  for (auto v : b.edges.edges.storage()) edge_pixels += v;
  for (auto v : b.masked.edges.storage()) masked_pixels += v;

  json manifest = {
      {"version", io::kBundleSchema},
      {"inputs",
       {{"model_ref", spec.model_ref},
        {"scene_sha256", io::sha256_hex(io::scene_to_json(spec).dump())},
        {"model_sha256", io::sha256_hex(io::serialize_body_model(model))},
        {"humans", spec.humans.size()}}},
      {"camera", io::camera_to_json(cam)},
      {"parameters",
       {{"width", cam.width},
        {"height", cam.height},
        {"near", cam.near},
        {"depth_clip", cam.depth_clip},
        {"occlusion_threshold", occlusion::kSurfaceThreshold},
        {"area_min", b.mask.params.area_min},
        {"dilation_radius", b.mask.params.dilation_radius},
        {"edge_method", occlusion::to_string(options.edge_method)},
        {"tau", options.tau},
        {"canny_low", options.canny_low},
        {"canny_high", options.canny_high},
        {"canny_sigma", occlusion::kCannySigma},
        {"normal_png", options.normal_png}}},
      {"conventions",
       {{"depth", "camera-space z in meters, +inf where no hit in (near, depth_clip]"},
        {"normal", "unit flat camera-space normal facing the camera, zero where no hit"},
        {"count", "triangle hits per pixel-center ray with near < t <= depth_clip, 16-bit"},
        {"pfm", "little-endian, rows bottom-up"},
        {"masks", "8-bit, 0 or 255"}}},
      {"files", files},
      {"diagnostics",
       {{"triangles", d.triangles},
        {"degenerate_triangles", d.degenerate_triangles},
        {"culled_triangles", d.culled_triangles},
        {"near_straddling_triangles", d.near_straddling},
        {"occluded_pixels", occluded},
        {"edge_pixels", edge_pixels},
        {"masked_edge_pixels", masked_pixels}}},
  };
  io::write_text(out_dir / kManifestFile, manifest.dump(2) + "\n");
  return manifest;
}

std::vector<std::string> verify_bundle(const fs::path& dir) {
  std::vector<std::string> problems;
  const json manifest = io::load_json(dir / kManifestFile);
  if (manifest.value("version", std::string()) != io::kBundleSchema) {
    problems.push_back("manifest.json: unexpected version");
  }
  const auto it = manifest.find("files");
  if (it == manifest.end() || !it->is_object()) {
    problems.push_back("manifest.json: missing files table");
    return problems;
  }
  for (const auto& [name, entry] : it->items()) {
    const fs::path p = dir / name;
    if (!fs::exists(p)) {
      problems.push_back(name + ": missing");
      continue;
    }
    if (io::sha256_file(p) != entry.value("sha256", std::string())) {
      problems.push_back(name + ": sha256 mismatch");
    }
    if (fs::file_size(p) != entry.value("bytes", std::uint64_t{0})) {
      problems.push_back(name + ": size mismatch");
    }
  }
  return problems;
}

Grid<std::uint8_t> make_preview(const fs::path& dir) {
  const FloatMap depth = io::read_pfm(dir / kDepthFile);
  const FloatMap normal = io::read_pfm(dir / kNormalFile);
  const BinaryMap mask = io::read_mask_png(dir / kMaskFile);
  const BinaryMap edges = io::read_mask_png(dir / kEdgesFile);
  const BinaryMap masked = io::read_mask_png(dir / kMaskedEdgesFile);
  const int h = depth.height(), w = depth.width();
  for (const auto* g : {&mask, &edges, &masked}) {
    if (!g->same_extent(depth)) throw DimensionError("bundle images disagree in size");
  }
  if (!normal.same_extent(depth) || normal.channels() != 3) {
    throw DimensionError("normal.pfm does not match depth.pfm");
  }

  float lo = std::numeric_limits<float>::infinity(), hi = -lo;
  for (float v : depth.storage()) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  Grid<std::uint8_t> gray(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const float v = depth.at(r, c);
      if (!std::isfinite(v)) continue;
      const double t = hi > lo ? (hi - v) / static_cast<double>(hi - lo) : 1.0;
      gray.at(r, c) = static_cast<std::uint8_t>(std::lround(55.0 + 200.0 * t));
    }
  }
  const auto normal_rgb = io::normal_to_rgb(normal);

  Grid<std::uint8_t> out(h, 4 * w, 3);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::uint8_t g = gray.at(r, c);
      for (int k = 0; k < 3; ++k) {
        out.at(r, c, k) = g;
        out.at(r, w + c, k) = normal_rgb.at(r, c, k);
      }
      if (mask.at(r, c)) {
        out.at(r, 2 * w + c, 0) = 255;
        out.at(r, 2 * w + c, 1) = g / 2;
        out.at(r, 2 * w + c, 2) = g / 2;
      } else {
        for (int k = 0; k < 3; ++k) out.at(r, 2 * w + c, k) = g;
      }
      if (masked.at(r, c)) {
        out.at(r, 3 * w + c, 0) = 255;
      } else if (edges.at(r, c)) {
        for (int k = 0; k < 3; ++k) out.at(r, 3 * w + c, k) = 255;
      }
    }
  }
  return out;
}

}  // namespace occond::bundle
