#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "occond/bodymodel.hpp"
#include "occond/grid.hpp"
#include "occond/scene.hpp"

namespace occond::raster {

using body::Face;
using body::Vec3;

/// Indexed triangles. Triangles that share an edge must share the vertex
/// indices of that edge for the shared-edge tie rule to apply.
struct TriangleSoup {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
};

/// Concatenates meshes in order; face indices are offset accordingly.
TriangleSoup merge_meshes(const std::vector<body::PosedMesh>& meshes);

/// depth: H x W, meters, +inf where nothing was hit within (near, depth_clip].
/// normal: H x W x 3, unit camera-space normal of the nearest hit facing the
/// camera, zero where nothing was hit.
/// count: H x W, triangle intersections with near < t <= depth_clip.
struct RasterBuffers {
  FloatMap depth;
  FloatMap normal;
  CountMap count;
};

struct RasterDiagnostics {
  std::size_t triangles = 0;
  std::size_t degenerate_triangles = 0;
  std::size_t culled_triangles = 0;     // entirely outside (near, depth_clip]
  std::size_t near_straddling = 0;      // tested against every pixel
};

struct RasterOptions {
  int threads = 0;  // 0: OCCOND_THREADS, else hardware concurrency
  int tile_size = 16;
  bool accelerate = true;
};

struct RasterResult {
  RasterBuffers buffers;
  RasterDiagnostics diagnostics;
};

/// Poses every human, merges them, and casts one ray per pixel center.
/// Output is bitwise identical for any thread count.
RasterResult rasterize(const scene::SceneSpec& spec, const body::BodyModel& model,
                       const RasterOptions& options = {});

RasterResult rasterize_soup(const TriangleSoup& world_soup, const scene::Camera& camera,
                            const RasterOptions& options = {});

struct PixelTrace {
  std::uint32_t count = 0;
  double depth;      // +inf if no counted hit
  Vec3 normal;       // zero if no counted hit
  std::int64_t nearest_face = -1;
};

/// Unaccelerated single-pixel query with the same counting semantics as
/// rasterize(): every triangle is tested.
PixelTrace trace_pixel(const TriangleSoup& world_soup, const scene::Camera& camera, int row,
                       int col);

std::uint32_t ray_face_count(const TriangleSoup& world_soup, const scene::Camera& camera, int row,
                             int col);

}  // namespace occond::raster
