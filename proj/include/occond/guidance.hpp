#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "occond/grid.hpp"

namespace occond::guidance {

/// H x W x C prediction (noise estimate) or feature map.
using PredictionField = FloatMap;
using FeatureField = FloatMap;

/// Single-channel per-pixel weights in [0, 1]; broadcast across channels.
using WeightMask = FloatMap;

inline constexpr double kDefaultBaseScale = 3.0;
inline constexpr double kDefaultOccludedScale = 5.0;
inline constexpr double kDefaultConditioningScale = 0.8;
inline constexpr int kDefaultSteps = 30;

struct GuidanceParams {
  double k_base = kDefaultBaseScale;
  double k_occ = kDefaultOccludedScale;
};

/// eps_uncond + (k_occ * M + k_base * (1 - M)) * (eps_cond - eps_uncond),
/// evaluated in double precision and rounded once to float.
PredictionField occ_cfg(const PredictionField& eps_uncond, const PredictionField& eps_cond,
                        const WeightMask& mask, const GuidanceParams& params);

/// Spatially uniform guidance, eps_uncond + k * (eps_cond - eps_uncond).
PredictionField uniform_cfg(const PredictionField& eps_uncond, const PredictionField& eps_cond,
                            double scale);

struct ResidualSpec {
  FloatMap field;   // H x W x C
  WeightMask mask;  // H x W
  double scale = kDefaultConditioningScale;
};

/// base + sum_r scale_r * (mask_r * field_r). Terms are accumulated in
/// double precision in list order; the result is rounded once.
FeatureField compose_residuals(const FeatureField& base, const std::vector<ResidualSpec>& residuals);

/// Residual list for the occlusion-aware composition: structure residual
/// under (1 - M_occ), occlusion residual under M_occ, one identity residual
/// per face mask.
struct ConditioningScales {
  double structure = kDefaultConditioningScale;
  double occlusion = kDefaultConditioningScale;
  double identity = kDefaultConditioningScale;
};

std::vector<ResidualSpec> occlusion_aware_residuals(const FloatMap& structure_residual,
                                                    const FloatMap& occlusion_residual,
                                                    const WeightMask& occlusion_mask,
                                                    const std::vector<FloatMap>& identity_residuals,
                                                    const std::vector<WeightMask>& face_masks,
                                                    const ConditioningScales& scales = {});

WeightMask complement(const WeightMask& mask);

/// Nearest-neighbour resampling: source index floor((i + 0.5) * src / dst).
template <typename T>
Grid<T> resize_nearest(const Grid<T>& src, int height, int width);

WeightMask resize_mask(const WeightMask& mask, int height, int width);
FloatMap resize_field(const FloatMap& field, int height, int width);

/// Binary map (0/1) to weights.
WeightMask to_weights(const BinaryMap& mask);

/// Returns (eps_uncond, eps_cond) for a step and the current field.
using Predictor =
    std::function<std::pair<PredictionField, PredictionField>(int step, const PredictionField&)>;

struct TraceStep {
  int step = 0;
  std::optional<double> inside_mean_abs;   // absent for an empty mask
  std::optional<double> outside_mean_abs;  // absent for a full mask
};

struct GuidanceTrace {
  std::vector<TraceStep> steps;
  PredictionField final_field;
  std::vector<PredictionField> fields;  // per step, when requested
};

/// Iterates field <- occ_cfg(predictor(step, field)) and records the mean
/// absolute value inside and outside the mask (mask > 0.5 is inside).
GuidanceTrace run_guidance_trace(const Predictor& predictor, const PredictionField& initial,
                                 int steps, const WeightMask& mask, const GuidanceParams& params,
                                 bool keep_fields = false);

}  // namespace occond::guidance
