// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Each check is independent; an exception fails only its criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "brute_force.hpp"
#include "generators.hpp"
#include "occond/bodymodel.hpp"
#include "occond/guidance.hpp"
#include "occond/image_io.hpp"
#include "occond/metrics.hpp"
#include "occond/occlusion.hpp"
#include "occond/raster.hpp"
#include "occond/scene.hpp"
#include "occond/shapectl.hpp"

using namespace occond;
using guidance::PredictionField;
using guidance::WeightMask;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

const body::BodyModel& model() {
  static const auto m = body::make_fixture_body("capsule-person", 1);
  return m;
}

bool bitwise_equal(const FloatMap& a, const FloatMap& b) {
  return a.same_shape(b) &&
         std::memcmp(a.storage().data(), b.storage().data(), a.size() * sizeof(float)) == 0;
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

Outcome rasterizer_oracle() {
  testing::Rng rng(20240101);
  raster::RasterOptions opts;
  opts.threads = 1;
  std::size_t checked = 0, grazing = 0, mismatched = 0;
  const auto start = Clock::now();
  for (int trial = 0; trial < 100; ++trial) {
    const auto spec = testing::random_scene(rng, model(), 2, 64, 64);
    const auto soup = raster::merge_meshes(scene::pose_humans(spec, model()));
    const auto res = raster::rasterize_soup(soup, spec.camera, opts);
    const auto oracle = testing::oracle_image(soup, spec.camera);
    for (int r = 0; r < 64; ++r) {
      for (int c = 0; c < 64; ++c) {
        const auto& o = oracle.at(r, c);
        if (o.grazing) {
          ++grazing;
          continue;
        }
        ++checked;
        const float d = res.buffers.depth.at(r, c);
        const bool depth_ok = std::isinf(o.depth)
                                  ? std::isinf(d)
                                  : std::abs(double(d) - o.depth) <= 1e-6 * std::max(1.0, o.depth);
        if (res.buffers.count.at(r, c) != o.count || !depth_ok) ++mismatched;
      }
    }
  }
  const double elapsed = seconds_since(start);
  return {mismatched == 0 && elapsed < 60.0,
          fmt("%.0f non-grazing pixels, %.0f mismatched, %.2f s", double(checked), double(mismatched),
              elapsed) +
              " (" + std::to_string(grazing) + " grazing skipped)"};
}

Outcome mask_exactness() {
  testing::Rng rng(2);
  std::size_t bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const int h = testing::uniform_int(rng, 1, 48), w = testing::uniform_int(rng, 1, 48);
    const auto count = testing::random_counts(rng, h, w, 8);
    const auto m = occlusion::occlusion_mask(count);
    for (std::size_t k = 0; k < count.size(); ++k) bad += (m.mask[k] != 0) != (count[k] > 2);
  }
  return {bad == 0, std::to_string(bad) + " differing pixels over 1000 buffers"};
}

Outcome watertight_parity() {
  testing::Rng rng(3);
  std::size_t covered = 0, even = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto spec = testing::random_scene(rng, model(), 1, 64, 64);
    const auto soup = raster::merge_meshes(scene::pose_humans(spec, model()));
    const auto res = raster::rasterize_soup(soup, spec.camera);
    const auto oracle = testing::oracle_image(soup, spec.camera);
    for (int r = 0; r < 64; ++r) {
      for (int c = 0; c < 64; ++c) {
        const auto n = res.buffers.count.at(r, c);
        if (oracle.at(r, c).grazing || n == 0) continue;
        ++covered;
        even += n % 2 == 0;
      }
    }
  }
  const double frac = covered ? double(even) / double(covered) : 0.0;
  return {covered > 0 && frac >= 0.999,
          fmt("%.0f of %.0f covered pixels even (%.5f)", double(even), double(covered), frac)};
}

Outcome cfg_properties() {
  testing::Rng rng(4);
  int fails[4] = {0, 0, 0, 0};
  for (int i = 0; i < 200; ++i) {
    const auto u = testing::random_field(rng, 16, 16, 4);
    const auto c = testing::random_field(rng, 16, 16, 4);
    const auto m = testing::random_weights(rng, 16, 16, i % 2 == 0);
    const guidance::GuidanceParams p{testing::uniform(rng, 0, 10), testing::uniform(rng, 0, 10)};

    fails[0] += !bitwise_equal(guidance::occ_cfg(u, c, WeightMask(16, 16, 1, 0.0f), p),
                               guidance::uniform_cfg(u, c, p.k_base));
    fails[1] += !bitwise_equal(guidance::occ_cfg(u, u, m, p), u);
    fails[2] += !bitwise_equal(guidance::occ_cfg(u, c, m, {1.0, 1.0}), c);

    const auto a = guidance::occ_cfg(u, c, m, p);
    const auto b = guidance::occ_cfg(u, c, m, {p.k_base, testing::uniform(rng, -5, 15)});
    bool local = true;
    for (int r = 0; r < 16; ++r) {
      for (int col = 0; col < 16; ++col) {
        if (m.at(r, col) != 0.0f) continue;
        for (int k = 0; k < 4; ++k) {
          float x = a.at(r, col, k), y = b.at(r, col, k);
          local = local && std::memcmp(&x, &y, sizeof x) == 0;
        }
      }
    }
    fails[3] += !local;
  }
  std::ostringstream s;
  s << "failures over 200 fields: (a) " << fails[0] << " (b) " << fails[1] << " (c) " << fails[2]
    << " (d) " << fails[3];
  return {fails[0] + fails[1] + fails[2] + fails[3] == 0, s.str()};
}

Outcome residual_reference() {
  testing::Rng rng(5);
  std::size_t bad = 0, total = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int h = testing::uniform_int(rng, 1, 12), w = testing::uniform_int(rng, 1, 12), ch = 4;
    const int ids = testing::uniform_int(rng, 0, 3);
    const auto base = testing::random_field(rng, h, w, ch);
    const auto sc = testing::random_field(rng, h, w, ch);
    const auto occ = testing::random_field(rng, h, w, ch);
    const auto m = testing::random_weights(rng, h, w, trial % 2 == 0);
    std::vector<FloatMap> id_fields, faces;
    for (int i = 0; i < ids; ++i) {
      id_fields.push_back(testing::random_field(rng, h, w, ch));
      faces.push_back(testing::random_weights(rng, h, w, true));
    }
    const auto got = guidance::compose_residuals(
        base, guidance::occlusion_aware_residuals(sc, occ, m, id_fields, faces));
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        // The complement is itself a float weight mask.
        const double mv = m.at(r, c), inv = 1.0f - m.at(r, c);
        for (int k = 0; k < ch; ++k) {
          double acc = base.at(r, c, k);
          acc += 0.8 * (inv * sc.at(r, c, k));
          acc += 0.8 * (mv * occ.at(r, c, k));
          for (int i = 0; i < ids; ++i) acc += 0.8 * (double(faces[i].at(r, c)) * id_fields[i].at(r, c, k));
          ++total;
          bad += got.at(r, c, k) != static_cast<float>(acc);
        }
      }
    }
  }
  return {bad == 0, std::to_string(bad) + " of " + std::to_string(total) + " values differ"};
}

Outcome shape_control() {
  testing::Rng rng(6);
  bool endpoints = true;
  for (int i = 0; i < 100; ++i) {
    const auto a = testing::random_beta(rng, 10, 3.0), b = testing::random_beta(rng, 10, 3.0);
    endpoints = endpoints && shapectl::blend_shapes(a, b, 1.0) == a && shapectl::blend_shapes(a, b, 0.0) == b;
  }
  const auto full = body::make_fixture_body("capsule-person");
  const auto rest = body::PoseSpec::identity(full.joint_count());
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const auto b1 = testing::random_beta(rng, 10), b2 = testing::random_beta(rng, 10);
    const auto m1 = body::build_posed_mesh(full, b1, rest);
    const auto m2 = body::build_posed_mesh(full, b2, rest);
    const auto mid = body::build_posed_mesh(full, shapectl::blend_shapes(b1, b2, 0.5), rest);
    for (std::size_t v = 0; v < mid.vertices.size(); ++v) {
      worst = std::max(worst, (mid.vertices[v] - 0.5 * (m1.vertices[v] + m2.vertices[v])).norm());
    }
  }
  return {endpoints && worst <= 1e-5,
          std::string("endpoints ") + (endpoints ? "exact" : "inexact") + fmt(", midpoint deviation %.3g m", worst)};
}

metrics::Keypoints2D line_pose(double u0, double v0) {
  metrics::Keypoints2D k;
  k.scale = 1000.0;
  for (int j = 0; j < 5; ++j) k.points.push_back({u0 + 10.0 * j, v0 + 3.0 * j, 1});
  return k;
}

Outcome metric_oracles() {
  using namespace metrics;
  std::vector<std::string> failed;
  auto expect = [&](bool ok, const char* what) {
    if (!ok) failed.push_back(what);
  };

  // Image 0: identical (1) and anti-parallel (clamped to 0). Image 1: one
  // orthogonal pair (0). Two-level mean: (0.5 + 0) / 2.
  Embedding e0(512, 0.0), e1(512, 0.0), en(512, 0.0);
  e0[0] = 1.0;
  e1[1] = 1.0;
  en[0] = -1.0;
  expect(s_face({{{e0, e0}, {e0, en}}, {{e0, e1}}}).value == 0.25, "s_face clamp and averaging");

  // Plain cosine keeps the sign: (1 + -1 + -1) / 3 in one image, 1 in the other.
  const std::vector<double> x{1, 0}, y{-1, 0};
  expect(std::abs(s_body({{{x, x}, {x, y}, {y, x}}, {{y, y}}}).value - (1.0 / 3.0)) < 1e-15,
         "s_body two-level mean");

  // Root-aligned: joint 1 is off by 5 mm, joint 0 by 0 after alignment.
  const JointSet3D t{{{0, 0, 0}, {100, 0, 0}}, 0};
  const JointSet3D p{{{7, 7, 7}, {107, 12, 7}}, 0};
  expect(mpjpe_pair(t, p) == 2.5, "mpjpe 2.5 mm fixture");

  // Two targets, one exact prediction and one far away: 1 / max(2, 2).
  const auto a0 = line_pose(0, 0), a1 = line_pose(300, 0);
  expect(ap_at_oks({a0, a1}, {a0, line_pose(900, 500)}).ap == 0.5, "ap fixture");

  EvalDataset data;
  testing::Rng rng(7);
  for (int i = 0; i < 4; ++i) {
    EvalImage img;
    img.id = "img" + std::to_string(i);
    for (int h = 0; h <= i % 3; ++h) {
      EvalHuman human;
      human.betas = testing::random_beta(rng, 10).betas;
      human.embedding = testing::random_beta(rng, 512).betas;
      human.joints3d_mm = std::vector<Vec3>{{1000.0 * h, 0, 0}, {1000.0 * h + 80, 300, 5}};
      human.keypoints2d = line_pose(200.0 * h, 40);
      img.reference.push_back(human);
    }
    img.generated = img.reference;
    data.images.push_back(img);
  }
  const auto r = evaluate(data, {});
  expect(r.s_face->value == 1.0 && r.s_body->value == 1.0 && r.mpjpe->mpjpe_mm == 0.0 &&
             r.ap->ap == 1.0,
         "self-vs-self");

  std::string detail = "self-vs-self " + fmt("(%.3f, %.3f, %.3f", r.s_face->value, r.s_body->value,
                                             r.mpjpe->mpjpe_mm) +
                       fmt(", %.3f)", r.ap->ap);
  for (const auto& f : failed) detail += "; failed: " + f;
  return {failed.empty(), detail};
}

int run(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome cli_determinism() {
  const fs::path dir = fs::temp_directory_path() / ("occond-accept-" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  const std::string cli = OCCOND_CLI_PATH;
  const auto scene = (dir / "scene.json").string();
  Outcome out{true, ""};
  if (run(cli + " fixture scene --size 256x256 --out " + scene + " >/dev/null 2>&1") != 0) {
    out = {false, "could not write the fixture scene"};
  }
  for (int threads : {1, 4, 8}) {
    if (!out.pass) break;
    const auto bundle = (dir / ("t" + std::to_string(threads))).string();
    const std::string cmd = "OCCOND_THREADS=" + std::to_string(threads) + " " + cli + " render --scene " +
                            scene + " --out " + bundle + " >/dev/null 2>&1";
    if (run(cmd) != 0) out = {false, "render failed with " + std::to_string(threads) + " threads"};
  }
  std::size_t files = 0;
  if (out.pass) {
    for (const auto& entry : fs::directory_iterator(dir / "t1")) {
      const auto name = entry.path().filename();
      const auto ref = io::read_text(entry.path());
      for (const char* other : {"t4", "t8"}) {
        if (!fs::exists(dir / other / name) || io::read_text(dir / other / name) != ref) {
          out = {false, name.string() + " differs in " + other};
        }
      }
      ++files;
    }
    if (out.pass) out.detail = std::to_string(files) + " files identical across 1, 4 and 8 threads";
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  return out;
}

Outcome trace_locality() {
  testing::Rng rng(9);
  const int h = 16, w = 16, ch = 4;
  const auto init = testing::random_field(rng, h, w, ch, -1, 1);
  WeightMask mask(h, w);
  for (int r = 4; r < 11; ++r) {
    for (int c = 3; c < 12; ++c) mask.at(r, c) = 1.0f;
  }
  // Pixelwise affine predictor; the conditional branch adds a constant pull.
  const guidance::Predictor predictor = [](int, const PredictionField& x) {
    PredictionField u = x, c = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
      u[i] = 0.9f * x[i];
      c[i] = 0.9f * x[i] + 0.1f * (1.0f + x[i]);
    }
    return std::make_pair(u, c);
  };
  const auto occ = guidance::run_guidance_trace(predictor, init, 30, mask, {3.0, 5.0}, true);
  const auto uni = guidance::run_guidance_trace(predictor, init, 30, WeightMask(h, w), {3.0, 3.0}, true);
  bool outside_equal = true, inside_larger = true;
  for (int s = 0; s < 30; ++s) {
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        if (mask.at(r, c) != 0.0f) continue;
        for (int k = 0; k < ch; ++k) {
          float a = occ.fields[s].at(r, c, k), b = uni.fields[s].at(r, c, k);
          outside_equal = outside_equal && std::memcmp(&a, &b, sizeof a) == 0;
        }
      }
    }
    inside_larger = inside_larger && *occ.steps[s].inside_mean_abs >= *occ.steps[s].outside_mean_abs;
  }
  const auto& last = occ.steps.back();
  return {outside_equal && inside_larger,
          std::string("outside ") + (outside_equal ? "bitwise equal" : "differs") +
              fmt(", final inside/outside mean |x| %.3f / %.3f", *last.inside_mean_abs,
                  *last.outside_mean_abs)};
}

Outcome render_performance() {
  const auto full = body::make_fixture_body("capsule-person");
  const auto spec = scene::make_fixture_scene(full, 512, 512);
  raster::rasterize(spec, full);  // warm up
  double best = 1e9;
  std::size_t triangles = 0;
  for (int i = 0; i < 3; ++i) {
    const auto start = Clock::now();
    const auto res = raster::rasterize(spec, full);
    best = std::min(best, seconds_since(start));
    triangles = res.diagnostics.triangles;
  }
  return {best < 1.0, fmt("%.0f triangles, best of 3: %.3f s", double(triangles), best)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"rasterizer matches the brute-force oracle", rasterizer_oracle},
      {"occlusion mask equals count > 2", mask_exactness},
      {"watertight bodies give even counts", watertight_parity},
      {"occlusion-aware CFG properties", cfg_properties},
      {"residual composition matches the elementwise reference", residual_reference},
      {"shape blending endpoints and midpoint", shape_control},
      {"metric fixtures and self-vs-self", metric_oracles},
      {"render bundles identical across thread counts", cli_determinism},
      {"guidance trace locality", trace_locality},
      {"512x512 two-body render under 1 s", render_performance},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s criterion %zu: %s (%s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
