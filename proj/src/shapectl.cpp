#include "occond/shapectl.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "occond/error.hpp"

namespace occond::shapectl {

ShapeVector blend_shapes(const ShapeVector& beta1, const ShapeVector& beta2, double gamma) {
  if (beta1.size() != beta2.size()) {
    throw DimensionError("beta2", "length " + std::to_string(beta2.size()) +
                                      " does not match beta1 length " +
                                      std::to_string(beta1.size()));
  }
  if (!std::isfinite(gamma)) {
    throw ValidationError("gamma", "must be finite");
  }
  ShapeVector out;
  out.betas.resize(beta1.size());
  for (std::size_t k = 0; k < beta1.size(); ++k) {
    out.betas[k] = gamma * beta1.betas[k] + (1.0 - gamma) * beta2.betas[k];
  }
  return out;
}

bool is_far_extrapolation(double gamma) { return std::abs(gamma) > kExtrapolationWarning; }

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw DimensionError("length mismatch: " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw ValidationError("", "cosine similarity is undefined for a zero vector");
  }
  // sqrt(na * nb) is exactly na when a == b, so self-similarity is exactly 1.
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

double shape_distance(const ShapeVector& a, const ShapeVector& b) {
  return cosine_similarity(a.betas, b.betas);
}

}  // namespace occond::shapectl
