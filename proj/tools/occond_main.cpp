// occond command-line tool. Exit codes: 0 success, 1 validation, 2 I/O.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "occond/bundle.hpp"
#include "occond/error.hpp"
#include "occond/guidance.hpp"
#include "occond/image_io.hpp"
#include "occond/json_io.hpp"
#include "occond/metrics.hpp"
#include "occond/shapectl.hpp"

namespace fs = std::filesystem;
using occond::io::json;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct Size {
  int width = 0;
  int height = 0;
};

Size parse_size(const std::string& text) {
  const auto x = text.find_first_of("xX");
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    std::size_t used_w = 0, used_h = 0;
    Size s{std::stoi(text.substr(0, x), &used_w), std::stoi(text.substr(x + 1), &used_h)};
    if (used_w != x || used_h != text.size() - x - 1) throw std::invalid_argument(text);
    if (s.width < 1 || s.height < 1) throw std::invalid_argument(text);
    return s;
  } catch (const std::exception&) {
    throw occond::ValidationError("--size", "expected WxH with positive integers, got '" + text + "'");
  }
}

void warn(const std::string& message) { std::cerr << "warning: " << message << "\n"; }

// ---- render ----------------------------------------------------------------

struct RenderArgs {
  std::string scene;
  std::string model;
  std::string out;
  std::string size;
  std::optional<int> area_min;
  std::optional<int> dilation;
  std::string edge_method = "canny";
  double canny_low = occond::occlusion::kDefaultCannyLow;
  double canny_high = occond::occlusion::kDefaultCannyHigh;
  double tau = occond::bundle::kDefaultTau;
  std::optional<double> depth_clip;
  bool normal_png = false;
};

int cmd_render(const RenderArgs& a) {
  const fs::path scene_path(a.scene);
  const auto spec = occond::io::load_scene(scene_path);
  const auto model = a.model.empty()
                         ? occond::io::resolve_model_ref(spec.model_ref, scene_path.parent_path())
                         : occond::io::resolve_model_ref(a.model, fs::current_path());
  occond::bundle::BundleOptions opts;
  if (!a.size.empty()) {
    const auto s = parse_size(a.size);
    opts.width = s.width;
    opts.height = s.height;
  }
  opts.area_min = a.area_min;
  opts.dilation_radius = a.dilation;
  opts.edge_method = occond::occlusion::parse_edge_method(a.edge_method);
  opts.canny_low = a.canny_low;
  opts.canny_high = a.canny_high;
  opts.tau = a.tau;
  opts.depth_clip = a.depth_clip;
  opts.normal_png = a.normal_png;
  const json manifest = occond::bundle::render_bundle(spec, model, a.out, opts);
  const auto& d = manifest["diagnostics"];
  std::cout << "wrote " << manifest["files"].size() + 1 << " files to " << a.out << " ("
            << d["triangles"].get<std::size_t>() << " triangles, "
            << d["occluded_pixels"].get<std::size_t>() << " occluded pixels)\n";
  if (d["degenerate_triangles"].get<std::size_t>() > 0) {
    warn(std::to_string(d["degenerate_triangles"].get<std::size_t>()) +
         " degenerate triangles skipped");
  }
  return 0;
}

// ---- occcfg ----------------------------------------------------------------

struct OccCfgArgs {
  std::string uncond;
  std::string cond;
  std::string mask;
  double k_base = occond::guidance::kDefaultBaseScale;
  double k_occ = occond::guidance::kDefaultOccludedScale;
  std::string out;
};

occond::FloatMap load_weight_mask(const fs::path& path) {
  if (path.extension() == ".pfm") {
    auto m = occond::io::read_pfm(path);
    if (m.channels() != 1) throw occond::ValidationError("--mask", "mask PFM must have 1 channel");
    return m;
  }
  return occond::io::read_weight_png(path);
}

int cmd_occcfg(const OccCfgArgs& a) {
  const auto uncond = occond::io::read_pfm(a.uncond);
  const auto cond = occond::io::read_pfm(a.cond);
  const auto mask = load_weight_mask(a.mask);
  if (!uncond.same_shape(cond)) {
    throw occond::DimensionError("--cond", "shape " + cond.shape_string() +
                                               " does not match --uncond " + uncond.shape_string());
  }
  if (!mask.same_extent(uncond)) {
    throw occond::DimensionError("--mask", "size " + mask.shape_string() +
                                               " does not match --uncond " + uncond.shape_string());
  }
  for (float v : mask.storage()) {
    if (!(v >= 0.0f && v <= 1.0f)) throw occond::ValidationError("--mask", "weights must lie in [0, 1]");
  }
  const occond::guidance::GuidanceParams params{a.k_base, a.k_occ};
  const auto out = occond::guidance::occ_cfg(uncond, cond, mask, params);
  char header[128];
  std::snprintf(header, sizeof header, "k_base=%.17g k_occ=%.17g", a.k_base, a.k_occ);
  occond::io::write_pfm(a.out, out, {header});
  return 0;
}

// ---- shape -----------------------------------------------------------------

occond::body::ShapeVector load_shape(const std::string& path) {
  return occond::io::shape_from_json(occond::io::load_json(path), "");
}

int cmd_shape_lerp(const std::string& pa, const std::string& pb, double gamma,
                   const std::string& out) {
  if (!std::isfinite(gamma)) throw occond::ValidationError("--gamma", "must be finite");
  const auto blended = occond::shapectl::blend_shapes(load_shape(pa), load_shape(pb), gamma);
  if (occond::shapectl::is_far_extrapolation(gamma)) {
    warn("|gamma| > 2 extrapolates far beyond the reference shapes");
  }
  occond::io::write_text(out, occond::io::shape_to_json(blended).dump() + "\n");
  return 0;
}

int cmd_shape_cosine(const std::string& pa, const std::string& pb) {
  std::cout << json({{"cosine", occond::shapectl::shape_distance(load_shape(pa), load_shape(pb))}})
            << "\n";
  return 0;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string annotations;
  std::vector<std::string> metrics = {"all"};
  std::optional<double> sigma;
  double oks_threshold = occond::metrics::kDefaultOksThreshold;
  bool absolute = false;
  int root_joint = occond::metrics::kDefaultRootJoint;
  std::string out;
};

int cmd_eval(const EvalArgs& a) {
  const auto dataset = occond::io::eval_dataset_from_json(occond::io::load_json(a.annotations));
  occond::metrics::EvalOptions opts;
  opts.metrics.clear();
  for (const auto& m : a.metrics) {
    if (m == "all") {
      opts.metrics = {occond::metrics::Metric::kFace, occond::metrics::Metric::kBody,
                      occond::metrics::Metric::kMpjpe, occond::metrics::Metric::kAp};
      break;
    }
    opts.metrics.push_back(occond::metrics::parse_metric(m));
  }
  if (a.sigma) {
    if (!(*a.sigma > 0.0)) throw occond::ValidationError("--sigma", "must be > 0");
    opts.ap.default_sigma = *a.sigma;
  }
  if (!(a.oks_threshold >= 0.0 && a.oks_threshold <= 1.0)) {
    throw occond::ValidationError("--oks-threshold", "must lie in [0, 1]");
  }
  opts.ap.threshold = a.oks_threshold;
  opts.mpjpe.root_align = !a.absolute;
  opts.mpjpe.root_joint = a.root_joint;
  const auto report = occond::metrics::evaluate(dataset, opts);
  for (const auto& w : report.warnings) warn(w);
  const std::string text = occond::io::report_to_json(report).dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    occond::io::write_text(a.out, text);
  }
  return 0;
}

// ---- preview / verify / fixture ------------------------------------------------

int cmd_preview(const std::string& bundle_dir, const std::string& out) {
  if (!fs::is_directory(bundle_dir)) throw occond::IoError(bundle_dir, "not a directory");
  occond::io::write_png8(out, occond::bundle::make_preview(bundle_dir));
  return 0;
}

int cmd_verify(const std::string& bundle_dir) {
  const auto problems = occond::bundle::verify_bundle(bundle_dir);
  for (const auto& p : problems) std::cerr << p << "\n";
  if (!problems.empty()) return kExitValidation;
  std::cout << "ok\n";
  return 0;
}

int cmd_fixture_body(const std::string& preset, int detail, const std::string& out) {
  occond::io::save_body_model(out, occond::body::make_fixture_body(preset, detail));
  return 0;
}

int cmd_fixture_scene(const std::string& size, const std::string& out) {
  const Size s = parse_size(size);
  const auto model = occond::body::make_fixture_body("capsule-person");
  occond::io::save_scene(out, occond::scene::make_fixture_scene(model, s.width, s.height));
  return 0;
}

void report_error(bool as_json, const char* kind, const std::string& path, const std::string& message) {
  if (as_json) {
    std::cerr << json({{"error", kind}, {"path", path}, {"message", message}}).dump() << "\n";
  } else {
    std::cerr << "error: " << message << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Occlusion-aware conditioning toolkit"};
  app.require_subcommand(1);
  bool json_errors = false;
  app.add_flag("--json-errors", json_errors, "Print errors to stderr as JSON");

  RenderArgs render;
  auto* r = app.add_subcommand("render", "Render a conditioning bundle from a scene");
  r->add_option("--scene", render.scene, "Scene JSON")->required();
  r->add_option("--model", render.model, "Body model JSON or fixture:<preset> (default: scene model_ref)");
  r->add_option("--out", render.out, "Output directory")->required();
  r->add_option("--size", render.size, "Output size WxH (rescales intrinsics)");
  r->add_option("--area-min", render.area_min, "Minimum occlusion component area, pixels");
  r->add_option("--dilation", render.dilation, "Mask dilation radius, pixels");
  r->add_option("--edge-method", render.edge_method, "canny or gradient")->capture_default_str();
  r->add_option("--canny-low", render.canny_low)->capture_default_str();
  r->add_option("--canny-high", render.canny_high)->capture_default_str();
  r->add_option("--tau", render.tau, "Gradient edge threshold, meters per pixel")->capture_default_str();
  r->add_option("--depth-clip", render.depth_clip, "Maximum retained depth, meters (default: scene)");
  r->add_flag("--normal-png", render.normal_png, "Also write normal_vis.png");

  OccCfgArgs occ;
  auto* o = app.add_subcommand("occcfg", "Apply occlusion-aware guidance to PFM predictions");
  o->add_option("--uncond", occ.uncond)->required();
  o->add_option("--cond", occ.cond)->required();
  o->add_option("--mask", occ.mask, "Mask PNG (scaled to [0,1]) or 1-channel PFM")->required();
  o->add_option("--k-base", occ.k_base)->capture_default_str();
  o->add_option("--k-occ", occ.k_occ)->capture_default_str();
  o->add_option("--out", occ.out)->required();

  auto* shape = app.add_subcommand("shape", "Body shape control");
  shape->require_subcommand(1);
  std::string shape_a, shape_b, shape_out;
  double gamma = 0.5;
  auto* lerp = shape->add_subcommand("lerp", "gamma * a + (1 - gamma) * b");
  lerp->add_option("--a", shape_a)->required();
  lerp->add_option("--b", shape_b)->required();
  lerp->add_option("--gamma", gamma)->required();
  lerp->add_option("--out", shape_out)->required();
  auto* cosine = shape->add_subcommand("cosine", "Cosine similarity of two shape files");
  cosine->add_option("--a", shape_a)->required();
  cosine->add_option("--b", shape_b)->required();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate geometry metrics on annotations");
  e->add_option("--annotations", ev.annotations)->required();
  e->add_option("--metric", ev.metrics, "face, body, mpjpe, ap or all (repeatable)")
      ->check(CLI::IsMember({"face", "body", "mpjpe", "ap", "all"}));
  e->add_option("--sigma", ev.sigma, "Uniform OKS sigma (default 0.05)");
  e->add_option("--oks-threshold", ev.oks_threshold)->capture_default_str();
  e->add_flag("--absolute", ev.absolute, "MPJPE without root alignment");
  e->add_option("--root-joint", ev.root_joint)->capture_default_str();
  e->add_option("--out", ev.out, "Report path (default: stdout)");

  std::string bundle_dir, preview_out;
  auto* p = app.add_subcommand("preview", "Four-panel PNG of a bundle");
  p->add_option("--bundle", bundle_dir)->required();
  p->add_option("--out", preview_out)->required();

  auto* v = app.add_subcommand("verify", "Check bundle file hashes against its manifest");
  v->add_option("--bundle", bundle_dir)->required();

  auto* fixture = app.add_subcommand("fixture", "Write procedural fixtures");
  fixture->require_subcommand(1);
  std::string fixture_out, preset = "capsule-person", fixture_size = "512x512";
  int detail = 2;
  auto* fb = fixture->add_subcommand("body", "Body model JSON");
  fb->add_option("--preset", preset)->capture_default_str();
  fb->add_option("--detail", detail)->capture_default_str();
  fb->add_option("--out", fixture_out)->required();
  auto* fs_cmd = fixture->add_subcommand("scene", "Two-human scene JSON");
  fs_cmd->add_option("--size", fixture_size)->capture_default_str();
  fs_cmd->add_option("--out", fixture_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*r) return cmd_render(render);
    if (*o) return cmd_occcfg(occ);
    if (*lerp) return cmd_shape_lerp(shape_a, shape_b, gamma, shape_out);
    if (*cosine) return cmd_shape_cosine(shape_a, shape_b);
    if (*e) return cmd_eval(ev);
    if (*p) return cmd_preview(bundle_dir, preview_out);
    if (*v) return cmd_verify(bundle_dir);
    if (*fb) return cmd_fixture_body(preset, detail, fixture_out);
    if (*fs_cmd) return cmd_fixture_scene(fixture_size, fixture_out);
  } catch (const occond::IoError& err) {
    report_error(json_errors, "io", err.path(), err.what());
    return kExitIo;
  } catch (const occond::ValidationError& err) {
    report_error(json_errors, "validation", err.path(), err.what());
    return kExitValidation;
  } catch (const occond::Error& err) {
    report_error(json_errors, "validation", "", err.what());
    return kExitValidation;
  }
  return kExitValidation;
}
