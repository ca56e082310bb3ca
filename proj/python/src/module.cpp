#include <cstring>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "occond/bodymodel.hpp"
#include "occond/bundle.hpp"
#include "occond/error.hpp"
#include "occond/guidance.hpp"
#include "occond/json_io.hpp"
#include "occond/metrics.hpp"
#include "occond/occlusion.hpp"
#include "occond/raster.hpp"
#include "occond/shapectl.hpp"

namespace py = pybind11;
using namespace occond;

namespace {

template <typename T>
using Array = py::array_t<T, py::array::c_style | py::array::forcecast>;

// Accepts (H, W) or (H, W, C).
template <typename T>
Grid<T> to_grid(const Array<T>& a, const char* name) {
  if (a.ndim() != 2 && a.ndim() != 3) {
    throw DimensionError(std::string(name) + " must be 2-D or 3-D", name);
  }
  Grid<T> g(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)),
            a.ndim() == 3 ? static_cast<int>(a.shape(2)) : 1);
  std::memcpy(g.storage().data(), a.data(), g.size() * sizeof(T));
  return g;
}

template <typename T>
py::array_t<T> to_array(const Grid<T>& g, bool squeeze = true) {
  std::vector<py::ssize_t> shape{g.height(), g.width()};
  if (!squeeze || g.channels() != 1) shape.push_back(g.channels());
  py::array_t<T> out(shape);
  std::memcpy(out.mutable_data(), g.storage().data(), g.size() * sizeof(T));
  return out;
}

bundle::BundleOptions bundle_options(std::optional<std::pair<int, int>> size, std::optional<int> area_min,
                                     std::optional<int> dilation, const std::string& edge_method,
                                     double tau, double canny_low, double canny_high,
                                     std::optional<double> depth_clip) {
  bundle::BundleOptions o;
  if (size) {
    o.width = size->first;
    o.height = size->second;
  }
  o.area_min = area_min;
  o.dilation_radius = dilation;
  o.edge_method = occlusion::parse_edge_method(edge_method);
  o.tau = tau;
  o.canny_low = canny_low;
  o.canny_high = canny_high;
  o.depth_clip = depth_clip;
  return o;
}

}  // namespace

PYBIND11_MODULE(_occond, m) {
  m.doc() = "Occlusion-aware conditioning core";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  auto validation = py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", validation.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  m.def(
      "occ_cfg",
      [](const Array<float>& uncond, const Array<float>& cond, const Array<float>& mask, double k_base,
         double k_occ) {
        return to_array(guidance::occ_cfg(to_grid(uncond, "uncond"), to_grid(cond, "cond"),
                                          to_grid(mask, "mask"), {k_base, k_occ}),
                        uncond.ndim() == 2);
      },
      py::arg("uncond"), py::arg("cond"), py::arg("mask"), py::arg("k_base") = 3.0,
      py::arg("k_occ") = 5.0);

  m.def(
      "uniform_cfg",
      [](const Array<float>& uncond, const Array<float>& cond, double k) {
        return to_array(guidance::uniform_cfg(to_grid(uncond, "uncond"), to_grid(cond, "cond"), k),
                        uncond.ndim() == 2);
      },
      py::arg("uncond"), py::arg("cond"), py::arg("k"));

  m.def(
      "compose_residuals",
      [](const Array<float>& base, const std::vector<std::tuple<Array<float>, Array<float>, double>>& terms) {
        std::vector<guidance::ResidualSpec> specs;
        for (const auto& [field, mask, scale] : terms) {
          specs.push_back({to_grid(field, "field"), to_grid(mask, "mask"), scale});
        }
        return to_array(guidance::compose_residuals(to_grid(base, "base"), specs), base.ndim() == 2);
      },
      py::arg("base"), py::arg("residuals"),
      "Each residual is (field, mask, scale); terms are added in order.");

  m.def(
      "occlusion_mask",
      [](const Array<std::uint32_t>& count) {
        return to_array(occlusion::occlusion_mask(to_grid(count, "count")).mask);
      },
      py::arg("count"));

  m.def(
      "refine_mask",
      [](const Array<std::uint8_t>& mask, int area_min, int radius) {
        occlusion::OcclusionMask raw{to_grid(mask, "mask"), {}};
        return to_array(occlusion::refine_mask(raw, area_min, radius).mask);
      },
      py::arg("mask"), py::arg("area_min"), py::arg("radius"));

  m.def(
      "blend_shapes",
      [](const std::vector<double>& a, const std::vector<double>& b, double gamma) {
        return shapectl::blend_shapes({a}, {b}, gamma).betas;
      },
      py::arg("beta1"), py::arg("beta2"), py::arg("gamma"));

  m.def(
      "shape_distance",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        return shapectl::shape_distance({a}, {b});
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "fixture_scene_json",
      [](int width, int height) {
        const auto model = body::make_fixture_body("capsule-person");
        return io::scene_to_json(scene::make_fixture_scene(model, width, height)).dump();
      },
      py::arg("width") = 512, py::arg("height") = 512);

  m.def(
      "rasterize",
      [](const std::string& scene_json, const std::string& model_ref, int threads) {
        const auto spec = io::scene_from_json(io::parse_json(scene_json, "scene"));
        const auto model = io::resolve_model_ref(model_ref.empty() ? spec.model_ref : model_ref, ".");
        raster::RasterOptions opts;
        opts.threads = threads;
        const auto res = raster::rasterize(spec, model, opts);
        return py::make_tuple(to_array(res.buffers.depth), to_array(res.buffers.normal, false),
                              to_array(res.buffers.count));
      },
      py::arg("scene_json"), py::arg("model_ref") = "", py::arg("threads") = 0,
      "Returns (depth, normal, count) arrays.");

  m.def(
      "render_bundle",
      [](const std::string& scene_json, const std::filesystem::path& out, const std::string& model_ref,
         std::optional<std::pair<int, int>> size, std::optional<int> area_min, std::optional<int> dilation,
         const std::string& edge_method, double tau, double canny_low, double canny_high,
         std::optional<double> depth_clip) {
        const auto spec = io::scene_from_json(io::parse_json(scene_json, "scene"));
        const auto model = io::resolve_model_ref(model_ref.empty() ? spec.model_ref : model_ref, ".");
        return bundle::render_bundle(spec, model, out,
                                     bundle_options(size, area_min, dilation, edge_method, tau,
                                                    canny_low, canny_high, depth_clip))
            .dump();
      },
      py::arg("scene_json"), py::arg("out"), py::arg("model_ref") = "", py::arg("size") = py::none(),
      py::arg("area_min") = py::none(), py::arg("dilation_radius") = py::none(),
      py::arg("edge_method") = "canny", py::arg("tau") = bundle::kDefaultTau,
      py::arg("canny_low") = occlusion::kDefaultCannyLow,
      py::arg("canny_high") = occlusion::kDefaultCannyHigh, py::arg("depth_clip") = py::none(),
      "Writes a bundle directory and returns the manifest as JSON text.");

  m.def("verify_bundle", &bundle::verify_bundle, py::arg("bundle_dir"));

  m.def(
      "evaluate",
      [](const std::string& annotations_json, const std::vector<std::string>& metric_names) {
        metrics::EvalOptions opts;
        if (!metric_names.empty()) {
          opts.metrics.clear();
          for (const auto& n : metric_names) opts.metrics.push_back(metrics::parse_metric(n));
        }
        const auto data = io::eval_dataset_from_json(io::parse_json(annotations_json, "annotations"));
        return io::report_to_json(metrics::evaluate(data, opts)).dump();
      },
      py::arg("annotations_json"), py::arg("metrics") = std::vector<std::string>{},
      "Returns the metric report as JSON text.");
}
