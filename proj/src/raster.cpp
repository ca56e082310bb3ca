#include "occond/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "occond/error.hpp"
#include "occond/threading.hpp"

namespace occond::raster {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Edge bits follow the edge function that vanishes on them:
// bit 0 -> edge (b, c), bit 1 -> edge (c, a), bit 2 -> edge (a, b).
// Vertex bits: bit 0 -> a, bit 1 -> b, bit 2 -> c.
struct PreparedTriangle {
  Vec3 a, b, c;
  Vec3 normal;
  std::uint8_t owned_edges = 0;
  std::uint8_t owned_vertices = 0;
  bool degenerate = false;
  bool culled = false;
  bool full_image = false;
  int row0 = 0, row1 = -1, col0 = 0, col1 = -1;  // inclusive pixel bounds
};

struct Ray {
  Vec3 dir;
  int kx, ky, kz;
  double sx, sy, sz;

  explicit Ray(const Vec3& d) : dir(d) {
    const Vec3 ad = d.cwiseAbs();
    kz = ad.x() > ad.y() ? (ad.x() > ad.z() ? 0 : 2) : (ad.y() > ad.z() ? 1 : 2);
    kx = (kz + 1) % 3;
    ky = (kx + 1) % 3;
    if (d[kz] < 0.0) std::swap(kx, ky);
    sx = d[kx] / d[kz];
    sy = d[ky] / d[kz];
    sz = 1.0 / d[kz];
  }
};

// Watertight ray/triangle test (shear-and-scale to ray space), ray origin at
// the camera center. Returns false for misses and for edge or vertex hits
// owned by a different triangle.
bool intersect(const Ray& r, const PreparedTriangle& tri, double& t_out) {
  const double ax = tri.a[r.kx] - r.sx * tri.a[r.kz];
  const double ay = tri.a[r.ky] - r.sy * tri.a[r.kz];
  const double bx = tri.b[r.kx] - r.sx * tri.b[r.kz];
  const double by = tri.b[r.ky] - r.sy * tri.b[r.kz];
  const double cx = tri.c[r.kx] - r.sx * tri.c[r.kz];
  const double cy = tri.c[r.ky] - r.sy * tri.c[r.kz];

  const double u = cx * by - cy * bx;
  const double v = ax * cy - ay * cx;
  const double w = bx * ay - by * ax;
  if ((u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0)) {
    return false;
  }
  const double det = u + v + w;
  if (det == 0.0) {
    return false;
  }

  const int zeros = (u == 0.0) + (v == 0.0) + (w == 0.0);
  if (zeros == 1) {
    const int edge = u == 0.0 ? 0 : (v == 0.0 ? 1 : 2);
    if (!(tri.owned_edges & (1u << edge))) return false;
  } else if (zeros == 2) {
    const int vertex = u != 0.0 ? 0 : (v != 0.0 ? 1 : 2);
    if (!(tri.owned_vertices & (1u << vertex))) return false;
  }

  const double az = r.sz * tri.a[r.kz];
  const double bz = r.sz * tri.b[r.kz];
  const double cz = r.sz * tri.c[r.kz];
  t_out = (u * az + v * bz + w * cz) / det;
  return true;
}

std::uint64_t edge_key(std::uint32_t p, std::uint32_t q) {
  if (p > q) std::swap(p, q);
  return (static_cast<std::uint64_t>(p) << 32) | q;
}

struct PreparedSoup {
  std::vector<PreparedTriangle> triangles;
  RasterDiagnostics diagnostics;
};

PreparedSoup prepare(const TriangleSoup& soup, const scene::Camera& camera) {
  PreparedSoup out;
  out.diagnostics.triangles = soup.faces.size();

  std::vector<Vec3> cam_vertices(soup.vertices.size());
  for (std::size_t i = 0; i < soup.vertices.size(); ++i) {
    cam_vertices[i] = camera.to_camera(soup.vertices[i]);
  }

  out.triangles.resize(soup.faces.size());
  std::unordered_map<std::uint64_t, std::uint32_t> edge_owner;
  std::unordered_map<std::uint32_t, std::uint32_t> vertex_owner;
  for (std::size_t t = 0; t < soup.faces.size(); ++t) {
    const Face& f = soup.faces[t];
    for (auto idx : f) {
      if (idx >= soup.vertices.size()) {
        throw ValidationError("faces[" + std::to_string(t) + "]", "vertex index out of range");
      }
    }
    auto& tri = out.triangles[t];
    tri.a = cam_vertices[f[0]];
    tri.b = cam_vertices[f[1]];
    tri.c = cam_vertices[f[2]];
    const Vec3 n = (tri.b - tri.a).cross(tri.c - tri.a);
    if (n.x() == 0.0 && n.y() == 0.0 && n.z() == 0.0) {
      tri.degenerate = true;
      ++out.diagnostics.degenerate_triangles;
      continue;
    }
    tri.normal = n.normalized();

    const auto index = static_cast<std::uint32_t>(t);
    // Faces are visited in ascending order, so the first claim is the lowest index.
    edge_owner.try_emplace(edge_key(f[1], f[2]), index);
    edge_owner.try_emplace(edge_key(f[2], f[0]), index);
    edge_owner.try_emplace(edge_key(f[0], f[1]), index);
    for (auto idx : f) vertex_owner.try_emplace(idx, index);

    const double zmin = std::min({tri.a.z(), tri.b.z(), tri.c.z()});
    const double zmax = std::max({tri.a.z(), tri.b.z(), tri.c.z()});
    if (zmax <= camera.near || zmin > camera.depth_clip) {
      tri.culled = true;
      ++out.diagnostics.culled_triangles;
      continue;
    }
    if (zmin <= camera.near) {
      tri.full_image = true;
      ++out.diagnostics.near_straddling;
      tri.row0 = 0;
      tri.row1 = camera.height - 1;
      tri.col0 = 0;
      tri.col1 = camera.width - 1;
      continue;
    }
    double umin = kInf, umax = -kInf, vmin = kInf, vmax = -kInf;
    for (const Vec3* p : {&tri.a, &tri.b, &tri.c}) {
      const double u = camera.fx * p->x() / p->z() + camera.cx;
      const double v = camera.fy * p->y() / p->z() + camera.cy;
      umin = std::min(umin, u);
      umax = std::max(umax, u);
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
    // Pixel centers sit at index + 0.5; one pixel of padding absorbs rounding.
    const auto lo = [](double x) { return static_cast<long long>(std::floor(x - 0.5)) - 1; };
    const auto hi = [](double x) { return static_cast<long long>(std::ceil(x - 0.5)) + 1; };
    tri.col0 = static_cast<int>(std::clamp<long long>(lo(umin), 0, camera.width));
    tri.col1 = static_cast<int>(std::clamp<long long>(hi(umax), -1, camera.width - 1));
    tri.row0 = static_cast<int>(std::clamp<long long>(lo(vmin), 0, camera.height));
    tri.row1 = static_cast<int>(std::clamp<long long>(hi(vmax), -1, camera.height - 1));
  }

  for (std::size_t t = 0; t < soup.faces.size(); ++t) {
    auto& tri = out.triangles[t];
    if (tri.degenerate) continue;
    const Face& f = soup.faces[t];
    const auto index = static_cast<std::uint32_t>(t);
    if (edge_owner.at(edge_key(f[1], f[2])) == index) tri.owned_edges |= 1u;
    if (edge_owner.at(edge_key(f[2], f[0])) == index) tri.owned_edges |= 2u;
    if (edge_owner.at(edge_key(f[0], f[1])) == index) tri.owned_edges |= 4u;
    for (int k = 0; k < 3; ++k) {
      if (vertex_owner.at(f[k]) == index) tri.owned_vertices |= (1u << k);
    }
  }
  return out;
}

struct Accumulator {
  std::uint32_t count = 0;
  double depth = kInf;
  std::int64_t face = -1;

  void add(const Ray& ray, const PreparedTriangle& tri, std::int64_t index,
           const scene::Camera& camera) {
    double t = 0.0;
    if (!intersect(ray, tri, t)) return;
    if (!(t > camera.near && t <= camera.depth_clip)) return;
    ++count;
    // Triangles arrive in ascending index order: strict < keeps the lowest index on ties.
    if (t < depth) {
      depth = t;
      face = index;
    }
  }
};

Vec3 facing_normal(const PreparedTriangle& tri, const Vec3& dir) {
  return tri.normal.dot(dir) > 0.0 ? Vec3(-tri.normal) : tri.normal;
}

void store(RasterBuffers& buf, int row, int col, const Accumulator& acc,
           const PreparedSoup& prepared, const Vec3& dir) {
  buf.count.at(row, col) = acc.count;
  if (acc.face < 0) return;
  buf.depth.at(row, col) = static_cast<float>(acc.depth);
  const Vec3 n = facing_normal(prepared.triangles[acc.face], dir);
  for (int k = 0; k < 3; ++k) buf.normal.at(row, col, k) = static_cast<float>(n[k]);
}

}  // namespace

TriangleSoup merge_meshes(const std::vector<body::PosedMesh>& meshes) {
  TriangleSoup soup;
  for (const auto& mesh : meshes) {
    const auto offset = static_cast<std::uint32_t>(soup.vertices.size());
    soup.vertices.insert(soup.vertices.end(), mesh.vertices.begin(), mesh.vertices.end());
    for (const auto& f : mesh.faces) {
      soup.faces.push_back({f[0] + offset, f[1] + offset, f[2] + offset});
    }
  }
  return soup;
}

RasterResult rasterize_soup(const TriangleSoup& world_soup, const scene::Camera& camera,
                            const RasterOptions& options) {
  const PreparedSoup prepared = prepare(world_soup, camera);
  const int width = camera.width;
  const int height = camera.height;

  RasterResult result;
  result.diagnostics = prepared.diagnostics;
  auto& buf = result.buffers;
  buf.depth = FloatMap(height, width, 1, std::numeric_limits<float>::infinity());
  buf.normal = FloatMap(height, width, 3, 0.0f);
  buf.count = CountMap(height, width, 1, 0u);

  const int threads = resolve_thread_count(options.threads);
  const auto& tris = prepared.triangles;

  if (!options.accelerate) {
    parallel_for(height, threads, [&](int row) {
      for (int col = 0; col < width; ++col) {
        const Ray ray(camera.pixel_ray(row, col));
        Accumulator acc;
        for (std::size_t t = 0; t < tris.size(); ++t) {
          if (tris[t].degenerate || tris[t].culled) continue;
          acc.add(ray, tris[t], static_cast<std::int64_t>(t), camera);
        }
        store(buf, row, col, acc, prepared, ray.dir);
      }
    });
    return result;
  }

  const int tile = std::max(1, options.tile_size);
  const int tiles_x = (width + tile - 1) / tile;
  const int tiles_y = (height + tile - 1) / tile;
  std::vector<std::vector<std::uint32_t>> bins(static_cast<std::size_t>(tiles_x) * tiles_y);
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const auto& tri = tris[t];
    if (tri.degenerate || tri.culled || tri.row0 > tri.row1 || tri.col0 > tri.col1) continue;
    for (int ty = tri.row0 / tile; ty <= tri.row1 / tile; ++ty) {
      for (int tx = tri.col0 / tile; tx <= tri.col1 / tile; ++tx) {
        bins[static_cast<std::size_t>(ty) * tiles_x + tx].push_back(static_cast<std::uint32_t>(t));
      }
    }
  }

  parallel_for(tiles_x * tiles_y, threads, [&](int tile_index) {
    const auto& bin = bins[tile_index];
    const int r0 = (tile_index / tiles_x) * tile;
    const int c0 = (tile_index % tiles_x) * tile;
    const int r1 = std::min(r0 + tile, height);
    const int c1 = std::min(c0 + tile, width);
    for (int row = r0; row < r1; ++row) {
      for (int col = c0; col < c1; ++col) {
        const Ray ray(camera.pixel_ray(row, col));
        Accumulator acc;
        for (const auto t : bin) {
          const auto& tri = tris[t];
          if (row < tri.row0 || row > tri.row1 || col < tri.col0 || col > tri.col1) continue;
          acc.add(ray, tri, t, camera);
        }
        store(buf, row, col, acc, prepared, ray.dir);
      }
    }
  });
  return result;
}

RasterResult rasterize(const scene::SceneSpec& spec, const body::BodyModel& model,
                       const RasterOptions& options) {
  scene::validate_scene(spec, model);
  return rasterize_soup(merge_meshes(scene::pose_humans(spec, model)), spec.camera, options);
}

PixelTrace trace_pixel(const TriangleSoup& world_soup, const scene::Camera& camera, int row,
                       int col) {
  if (row < 0 || row >= camera.height || col < 0 || col >= camera.width) {
    throw ValidationError("pixel", "pixel (" + std::to_string(row) + ", " + std::to_string(col) +
                                       ") outside the image");
  }
  const PreparedSoup prepared = prepare(world_soup, camera);
  const Ray ray(camera.pixel_ray(row, col));
  Accumulator acc;
  for (std::size_t t = 0; t < prepared.triangles.size(); ++t) {
    const auto& tri = prepared.triangles[t];
    if (tri.degenerate) continue;
    acc.add(ray, tri, static_cast<std::int64_t>(t), camera);
  }
  PixelTrace out;
  out.count = acc.count;
  out.depth = acc.depth;
  out.nearest_face = acc.face;
  out.normal = acc.face >= 0 ? facing_normal(prepared.triangles[acc.face], ray.dir)
                             : Vec3(Vec3::Zero());
  return out;
}

std::uint32_t ray_face_count(const TriangleSoup& world_soup, const scene::Camera& camera, int row,
                             int col) {
  return trace_pixel(world_soup, camera, row, col).count;
}

}  // namespace occond::raster
