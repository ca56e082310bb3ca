#pragma once

#include "occond/bodymodel.hpp"

namespace occond::shapectl {

using body::ShapeVector;

/// |gamma| above this extrapolates far outside the basis' plausible range.
inline constexpr double kExtrapolationWarning = 2.0;

/// gamma * beta1 + (1 - gamma) * beta2. gamma outside [0, 1] extrapolates;
/// no clamping is applied.
ShapeVector blend_shapes(const ShapeVector& beta1, const ShapeVector& beta2, double gamma);

bool is_far_extrapolation(double gamma);

/// Cosine similarity in [-1, 1]; throws for a zero vector.
double shape_distance(const ShapeVector& a, const ShapeVector& b);

/// Cosine of two raw vectors; shared by the shape and metric code.
double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace occond::shapectl
