#include "occond/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "occond/error.hpp"

namespace occond::guidance {

namespace {

void require_same_shape(const FloatMap& a, const FloatMap& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(what, "shape " + b.shape_string() + " does not match " +
                                   a.shape_string());
  }
}

void require_mask_extent(const FloatMap& field, const WeightMask& mask, const std::string& what) {
  if (mask.channels() != 1 || !field.same_extent(mask)) {
    throw DimensionError(what, "mask " + mask.shape_string() + " does not match field " +
                                   field.shape_string());
  }
}

}  // namespace

PredictionField occ_cfg(const PredictionField& eps_uncond, const PredictionField& eps_cond,
                        const WeightMask& mask, const GuidanceParams& params) {
  require_same_shape(eps_uncond, eps_cond, "eps_cond");
  require_mask_extent(eps_uncond, mask, "mask");
  if (!std::isfinite(params.k_base) || !std::isfinite(params.k_occ)) {
    throw ValidationError("params", "guidance scales must be finite");
  }
  PredictionField out(eps_uncond.height(), eps_uncond.width(), eps_uncond.channels());
  const int channels = eps_uncond.channels();
  for (std::size_t p = 0; p < mask.size(); ++p) {
    const double m = mask[p];
    const double scale = params.k_occ * m + params.k_base * (1.0 - m);
    for (int ch = 0; ch < channels; ++ch) {
      const std::size_t i = p * channels + ch;
      const double u = eps_uncond[i];
      const double c = eps_cond[i];
      out[i] = static_cast<float>(u + scale * (c - u));
    }
  }
  return out;
}

PredictionField uniform_cfg(const PredictionField& eps_uncond, const PredictionField& eps_cond,
                            double scale) {
  require_same_shape(eps_uncond, eps_cond, "eps_cond");
  PredictionField out(eps_uncond.height(), eps_uncond.width(), eps_uncond.channels());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double u = eps_uncond[i];
    const double c = eps_cond[i];
    out[i] = static_cast<float>(u + scale * (c - u));
  }
  return out;
}

FeatureField compose_residuals(const FeatureField& base, const std::vector<ResidualSpec>& residuals) {
  for (std::size_t r = 0; r < residuals.size(); ++r) {
    const std::string where = "residuals[" + std::to_string(r) + "]";
    if (!base.same_shape(residuals[r].field)) {
      throw DimensionError(where + ".field", "shape " + residuals[r].field.shape_string() +
                                                 " does not match base " + base.shape_string());
    }
    require_mask_extent(base, residuals[r].mask, where + ".mask");
  }
  const int channels = base.channels();
  FeatureField out(base.height(), base.width(), channels);
  for (std::size_t p = 0; p < base.pixel_count(); ++p) {
    for (int ch = 0; ch < channels; ++ch) {
      const std::size_t i = p * channels + ch;
      double acc = base[i];
      for (const auto& res : residuals) {
        acc += res.scale * (static_cast<double>(res.mask[p]) * res.field[i]);
      }
      out[i] = static_cast<float>(acc);
    }
  }
  return out;
}

WeightMask complement(const WeightMask& mask) {
  WeightMask out = mask;
  for (auto& m : out.storage()) m = static_cast<float>(1.0 - m);
  return out;
}

std::vector<ResidualSpec> occlusion_aware_residuals(const FloatMap& structure_residual,
                                                    const FloatMap& occlusion_residual,
                                                    const WeightMask& occlusion_mask,
                                                    const std::vector<FloatMap>& identity_residuals,
                                                    const std::vector<WeightMask>& face_masks,
                                                    const ConditioningScales& scales) {
  if (identity_residuals.size() != face_masks.size()) {
    throw DimensionError("face_masks", "expected one face mask per identity residual");
  }
  std::vector<ResidualSpec> out;
  out.push_back({structure_residual, complement(occlusion_mask), scales.structure});
  out.push_back({occlusion_residual, occlusion_mask, scales.occlusion});
  for (std::size_t i = 0; i < identity_residuals.size(); ++i) {
    out.push_back({identity_residuals[i], face_masks[i], scales.identity});
  }
  return out;
}

template <typename T>
Grid<T> resize_nearest(const Grid<T>& src, int height, int width) {
  if (height < 1 || width < 1) {
    throw DimensionError("target", "target size must be at least 1x1");
  }
  Grid<T> out(height, width, src.channels());
  if (src.pixel_count() == 0) {
    return out;
  }
  for (int r = 0; r < height; ++r) {
    const int sr = std::min(src.height() - 1,
                            static_cast<int>((static_cast<long long>(2 * r + 1) * src.height()) /
                                             (2LL * height)));
    for (int c = 0; c < width; ++c) {
      const int sc = std::min(src.width() - 1,
                              static_cast<int>((static_cast<long long>(2 * c + 1) * src.width()) /
                                               (2LL * width)));
      for (int ch = 0; ch < src.channels(); ++ch) out.at(r, c, ch) = src.at(sr, sc, ch);
    }
  }
  return out;
}

template Grid<float> resize_nearest(const Grid<float>&, int, int);
template Grid<std::uint8_t> resize_nearest(const Grid<std::uint8_t>&, int, int);

WeightMask resize_mask(const WeightMask& mask, int height, int width) {
  if (mask.channels() != 1) {
    throw DimensionError("mask", "mask must have one channel");
  }
  return resize_nearest(mask, height, width);
}

FloatMap resize_field(const FloatMap& field, int height, int width) {
  return resize_nearest(field, height, width);
}

WeightMask to_weights(const BinaryMap& mask) {
  WeightMask out(mask.height(), mask.width(), 1, 0.0f);
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] ? 1.0f : 0.0f;
  return out;
}

GuidanceTrace run_guidance_trace(const Predictor& predictor, const PredictionField& initial,
                                 int steps, const WeightMask& mask, const GuidanceParams& params,
                                 bool keep_fields) {
  if (steps < 1) {
    throw ValidationError("steps", "must be >= 1");
  }
  require_mask_extent(initial, mask, "mask");
  GuidanceTrace trace;
  PredictionField field = initial;
  const int channels = field.channels();
  for (int step = 0; step < steps; ++step) {
    const auto [uncond, cond] = predictor(step, field);
    field = occ_cfg(uncond, cond, mask, params);

    double inside = 0.0, outside = 0.0;
    std::size_t n_inside = 0, n_outside = 0;
    for (std::size_t p = 0; p < mask.size(); ++p) {
      const bool in = mask[p] > 0.5f;
      for (int ch = 0; ch < channels; ++ch) {
        const float v = field[p * channels + ch];
        if (!std::isfinite(v)) {
          throw Error("guidance trace produced a non-finite value at step " +
                      std::to_string(step));
        }
        (in ? inside : outside) += std::abs(static_cast<double>(v));
        ++(in ? n_inside : n_outside);
      }
    }
    TraceStep rec;
    rec.step = step;
    if (n_inside > 0) rec.inside_mean_abs = inside / static_cast<double>(n_inside);
    if (n_outside > 0) rec.outside_mean_abs = outside / static_cast<double>(n_outside);
    trace.steps.push_back(rec);
    if (keep_fields) trace.fields.push_back(field);
  }
  trace.final_field = std::move(field);
  return trace;
}

}  // namespace occond::guidance
