#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "occond/bodymodel.hpp"

namespace occond::metrics {

using body::Vec3;

inline constexpr std::size_t kFaceEmbeddingSize = 512;
inline constexpr double kDefaultSigma = 0.05;
inline constexpr double kDefaultOksThreshold = 0.5;
inline constexpr int kDefaultRootJoint = 0;

using Embedding = std::vector<double>;

/// A reference/generated pair per human, grouped per image.
template <typename T>
using ImagePairs = std::vector<std::vector<std::pair<T, T>>>;

/// Mean over images of the per-image mean over humans.
struct TwoLevelMean {
  double value = 0.0;
  std::vector<double> per_image;
};

/// Non-negative cosine similarity of face embeddings (max(0, cos)).
TwoLevelMean s_face(const ImagePairs<Embedding>& images);

/// Plain cosine similarity of shape vectors; negative values pass through.
TwoLevelMean s_body(const ImagePairs<std::vector<double>>& images);

struct JointSet3D {
  std::vector<Vec3> joints;  // millimeters
  int human_id = -1;
};

struct Keypoint2D {
  double u = 0.0;
  double v = 0.0;
  int visible = 1;
};

struct Keypoints2D {
  std::vector<Keypoint2D> points;
  double scale = 1.0;  // object area proxy, pixels^2
};

struct Matching {
  std::vector<std::pair<int, int>> pairs;  // (target, prediction), ascending target
  std::vector<int> unmatched_targets;
  std::vector<int> unmatched_predictions;
};

/// Greedy mutual-nearest pairing on root-joint distance; ties go to the
/// lower (target, prediction) index.
Matching match_humans_3d(const std::vector<JointSet3D>& targets,
                         const std::vector<JointSet3D>& predictions,
                         int root_joint = kDefaultRootJoint);

/// Greedy pairing on descending OKS with the same tie rule.
Matching match_humans_2d(const std::vector<Keypoints2D>& targets,
                         const std::vector<Keypoints2D>& predictions,
                         std::span<const double> sigmas);

struct MpjpeOptions {
  int root_joint = kDefaultRootJoint;
  bool root_align = true;
};

/// Mean Euclidean joint error of one matched pair, in millimeters.
double mpjpe_pair(const JointSet3D& target, const JointSet3D& prediction,
                  const MpjpeOptions& options = {});

struct MpjpeResult {
  double mpjpe_mm = 0.0;
  std::vector<std::optional<double>> per_image;  // nullopt: nothing matched
  std::size_t matched = 0;
  std::size_t unmatched = 0;
};

/// Humans are matched per image, then averaged per image and over images.
MpjpeResult mpjpe(const std::vector<std::vector<JointSet3D>>& targets,
                  const std::vector<std::vector<JointSet3D>>& predictions,
                  const MpjpeOptions& options = {});

/// Sum over target-visible keypoints of exp(-d^2 / (2 scale sigma^2)),
/// divided by the visible count. Zero when nothing is visible.
double oks(const Keypoints2D& target, const Keypoints2D& prediction,
           std::span<const double> sigmas);

struct ApOptions {
  double threshold = kDefaultOksThreshold;
  std::vector<double> sigmas;  // empty: default_sigma for every keypoint
  double default_sigma = kDefaultSigma;

  std::vector<double> sigmas_for(std::size_t keypoint_count) const;
};

struct ApImage {
  std::size_t true_positives = 0;
  std::size_t denominator = 0;  // max(#targets, #predictions)
  double ap = 0.0;
  bool both_empty = false;
};

/// Single-threshold AP: TP / max(#targets, #predictions) after greedy
/// OKS matching. Both lists empty yields 1.0 (flagged).
ApImage ap_at_oks(const std::vector<Keypoints2D>& targets,
                  const std::vector<Keypoints2D>& predictions, const ApOptions& options = {});

struct ApResult {
  double ap = 0.0;
  std::vector<ApImage> per_image;
};

/// Pools true positives and denominators over images.
ApResult ap_at_oks(const std::vector<std::vector<Keypoints2D>>& targets,
                   const std::vector<std::vector<Keypoints2D>>& predictions,
                   const ApOptions& options = {});

// ---- annotation files and reports ---------------------------------------

struct EvalHuman {
  std::optional<std::vector<double>> betas;
  std::optional<Embedding> embedding;
  std::optional<std::vector<Vec3>> joints3d_mm;
  std::optional<Keypoints2D> keypoints2d;
};

struct EvalImage {
  std::string id;
  std::vector<EvalHuman> reference;
  std::vector<EvalHuman> generated;
};

struct EvalDataset {
  std::vector<EvalImage> images;
};

enum class Metric { kFace, kBody, kMpjpe, kAp };

std::string to_string(Metric metric);
Metric parse_metric(const std::string& name);

struct EvalOptions {
  std::vector<Metric> metrics = {Metric::kFace, Metric::kBody, Metric::kMpjpe, Metric::kAp};
  MpjpeOptions mpjpe;
  ApOptions ap;
};

struct MetricReport {
  std::optional<TwoLevelMean> s_face;
  std::optional<TwoLevelMean> s_body;
  std::optional<MpjpeResult> mpjpe;
  std::optional<ApResult> ap;
  std::vector<std::string> image_ids;
  std::vector<std::string> warnings;
  EvalOptions options;
};

/// Validates the fields each requested metric needs (errors carry paths
/// such as "images[0].generated[1].embedding") and computes the report.
MetricReport evaluate(const EvalDataset& dataset, const EvalOptions& options);

}  // namespace occond::metrics
