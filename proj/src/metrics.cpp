#include "occond/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "occond/error.hpp"
#include "occond/shapectl.hpp"

namespace occond::metrics {

namespace {

std::string pair_path(std::size_t image, std::size_t human) {
  return "images[" + std::to_string(image) + "].pairs[" + std::to_string(human) + "]";
}

template <typename T, typename Score>
TwoLevelMean two_level_mean(const ImagePairs<T>& images, Score score) {
  TwoLevelMean out;
  if (images.empty()) {
    throw ValidationError("images", "no images to average over");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].empty()) {
      throw ValidationError("images[" + std::to_string(i) + "]", "image has no humans");
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < images[i].size(); ++j) {
      sum += score(images[i][j].first, images[i][j].second, i, j);
    }
    const double mean = sum / static_cast<double>(images[i].size());
    out.per_image.push_back(mean);
    total += mean;
  }
  out.value = total / static_cast<double>(images.size());
  return out;
}

double checked_cosine(const std::vector<double>& a, const std::vector<double>& b,
                      std::size_t image, std::size_t human) {
  try {
    return shapectl::cosine_similarity(a, b);
  } catch (const ValidationError& e) {
    throw ValidationError(pair_path(image, human), e.what());
  }
}

// Greedy selection over a score matrix (higher is better).
Matching greedy_match(const std::vector<std::vector<double>>& score, std::size_t n_targets,
                      std::size_t n_preds) {
  struct Candidate {
    double score;
    int target;
    int pred;
  };
  std::vector<Candidate> candidates;
  for (std::size_t t = 0; t < n_targets; ++t) {
    for (std::size_t p = 0; p < n_preds; ++p) {
      candidates.push_back({score[t][p], static_cast<int>(t), static_cast<int>(p)});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return std::tie(a.target, a.pred) < std::tie(b.target, b.pred);
  });
  std::vector<bool> t_used(n_targets, false), p_used(n_preds, false);
  Matching out;
  for (const auto& c : candidates) {
    if (t_used[c.target] || p_used[c.pred]) continue;
    t_used[c.target] = p_used[c.pred] = true;
    out.pairs.emplace_back(c.target, c.pred);
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  for (std::size_t t = 0; t < n_targets; ++t) {
    if (!t_used[t]) out.unmatched_targets.push_back(static_cast<int>(t));
  }
  for (std::size_t p = 0; p < n_preds; ++p) {
    if (!p_used[p]) out.unmatched_predictions.push_back(static_cast<int>(p));
  }
  return out;
}

const Vec3& root_of(const JointSet3D& set, int root_joint) {
  if (root_joint < 0 || static_cast<std::size_t>(root_joint) >= set.joints.size()) {
    throw ValidationError("root_joint", "root joint " + std::to_string(root_joint) +
                                            " outside joint set of size " +
                                            std::to_string(set.joints.size()));
  }
  return set.joints[root_joint];
}

}  // namespace

TwoLevelMean s_face(const ImagePairs<Embedding>& images) {
  return two_level_mean(images, [](const Embedding& ref, const Embedding& gen, std::size_t i,
                                   std::size_t j) {
    return std::max(0.0, checked_cosine(ref, gen, i, j));
  });
}

TwoLevelMean s_body(const ImagePairs<std::vector<double>>& images) {
  return two_level_mean(images, [](const std::vector<double>& ref, const std::vector<double>& gen,
                                   std::size_t i, std::size_t j) {
    return checked_cosine(ref, gen, i, j);
  });
}

Matching match_humans_3d(const std::vector<JointSet3D>& targets,
                         const std::vector<JointSet3D>& predictions, int root_joint) {
  std::vector<std::vector<double>> score(targets.size(), std::vector<double>(predictions.size()));
  for (std::size_t t = 0; t < targets.size(); ++t) {
    for (std::size_t p = 0; p < predictions.size(); ++p) {
      score[t][p] = -(root_of(targets[t], root_joint) - root_of(predictions[p], root_joint)).norm();
    }
  }
  return greedy_match(score, targets.size(), predictions.size());
}

Matching match_humans_2d(const std::vector<Keypoints2D>& targets,
                         const std::vector<Keypoints2D>& predictions,
                         std::span<const double> sigmas) {
  std::vector<std::vector<double>> score(targets.size(), std::vector<double>(predictions.size()));
  for (std::size_t t = 0; t < targets.size(); ++t) {
    for (std::size_t p = 0; p < predictions.size(); ++p) {
      score[t][p] = oks(targets[t], predictions[p], sigmas);
    }
  }
  return greedy_match(score, targets.size(), predictions.size());
}

double mpjpe_pair(const JointSet3D& target, const JointSet3D& prediction,
                  const MpjpeOptions& options) {
  if (target.joints.size() != prediction.joints.size() || target.joints.empty()) {
    throw DimensionError("joints", "joint sets differ in size (" +
                                       std::to_string(target.joints.size()) + " vs " +
                                       std::to_string(prediction.joints.size()) + ")");
  }
  Vec3 t_root = Vec3::Zero();
  Vec3 p_root = Vec3::Zero();
  if (options.root_align) {
    t_root = root_of(target, options.root_joint);
    p_root = root_of(prediction, options.root_joint);
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < target.joints.size(); ++j) {
    sum += ((target.joints[j] - t_root) - (prediction.joints[j] - p_root)).norm();
  }
  return sum / static_cast<double>(target.joints.size());
}

MpjpeResult mpjpe(const std::vector<std::vector<JointSet3D>>& targets,
                  const std::vector<std::vector<JointSet3D>>& predictions,
                  const MpjpeOptions& options) {
  if (targets.size() != predictions.size()) {
    throw DimensionError("images", "target and prediction image counts differ");
  }
  MpjpeResult out;
  double total = 0.0;
  std::size_t scored_images = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto match = match_humans_3d(targets[i], predictions[i], options.root_joint);
    out.unmatched += match.unmatched_targets.size() + match.unmatched_predictions.size();
    if (match.pairs.empty()) {
      out.per_image.emplace_back(std::nullopt);
      continue;
    }
    double sum = 0.0;
    for (const auto& [t, p] : match.pairs) {
      sum += mpjpe_pair(targets[i][t], predictions[i][p], options);
    }
    const double mean = sum / static_cast<double>(match.pairs.size());
    out.per_image.emplace_back(mean);
    out.matched += match.pairs.size();
    total += mean;
    ++scored_images;
  }
  out.mpjpe_mm = scored_images > 0 ? total / static_cast<double>(scored_images) : 0.0;
  return out;
}

double oks(const Keypoints2D& target, const Keypoints2D& prediction,
           std::span<const double> sigmas) {
  if (target.points.size() != prediction.points.size()) {
    throw DimensionError("keypoints", "keypoint counts differ");
  }
  if (sigmas.size() != target.points.size()) {
    throw DimensionError("sigmas", "expected one sigma per keypoint");
  }
  if (!(target.scale > 0.0)) {
    throw ValidationError("scale", "target scale must be > 0");
  }
  double sum = 0.0;
  int visible = 0;
  for (std::size_t j = 0; j < target.points.size(); ++j) {
    if (!target.points[j].visible) continue;
    const double du = target.points[j].u - prediction.points[j].u;
    const double dv = target.points[j].v - prediction.points[j].v;
    sum += std::exp(-(du * du + dv * dv) / (2.0 * target.scale * sigmas[j] * sigmas[j]));
    ++visible;
  }
  return visible > 0 ? sum / visible : 0.0;
}

std::vector<double> ApOptions::sigmas_for(std::size_t keypoint_count) const {
  if (sigmas.empty()) {
    return std::vector<double>(keypoint_count, default_sigma);
  }
  if (sigmas.size() != keypoint_count) {
    throw DimensionError("sigmas", "expected " + std::to_string(keypoint_count) + " sigmas");
  }
  return sigmas;
}

ApImage ap_at_oks(const std::vector<Keypoints2D>& targets,
                  const std::vector<Keypoints2D>& predictions, const ApOptions& options) {
  ApImage out;
  out.denominator = std::max(targets.size(), predictions.size());
  if (targets.empty() && predictions.empty()) {
    out.both_empty = true;
    out.ap = 1.0;
    return out;
  }
  if (targets.empty() || predictions.empty()) {
    return out;
  }
  const auto sigmas = options.sigmas_for(targets.front().points.size());
  const auto match = match_humans_2d(targets, predictions, sigmas);
  for (const auto& [t, p] : match.pairs) {
    if (oks(targets[t], predictions[p], sigmas) >= options.threshold) ++out.true_positives;
  }
  out.ap = static_cast<double>(out.true_positives) / static_cast<double>(out.denominator);
  return out;
}

ApResult ap_at_oks(const std::vector<std::vector<Keypoints2D>>& targets,
                   const std::vector<std::vector<Keypoints2D>>& predictions,
                   const ApOptions& options) {
  if (targets.size() != predictions.size()) {
    throw DimensionError("images", "target and prediction image counts differ");
  }
  ApResult out;
  std::size_t tp = 0, denom = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    out.per_image.push_back(ap_at_oks(targets[i], predictions[i], options));
    tp += out.per_image.back().true_positives;
    denom += out.per_image.back().denominator;
  }
  out.ap = denom > 0 ? static_cast<double>(tp) / static_cast<double>(denom) : 1.0;
  return out;
}

std::string to_string(Metric metric) {
  switch (metric) {
    case Metric::kFace: return "face";
    case Metric::kBody: return "body";
    case Metric::kMpjpe: return "mpjpe";
    case Metric::kAp: return "ap";
  }
  return "unknown";
}

Metric parse_metric(const std::string& name) {
  if (name == "face") return Metric::kFace;
  if (name == "body") return Metric::kBody;
  if (name == "mpjpe") return Metric::kMpjpe;
  if (name == "ap") return Metric::kAp;
  throw ValidationError("metric", "unknown metric '" + name + "'");
}

namespace {

std::string human_path(std::size_t image, const char* side, std::size_t human) {
  return "images[" + std::to_string(image) + "]." + side + "[" + std::to_string(human) + "]";
}

template <typename T>
const T& require_field(const std::optional<T>& field, const std::string& path) {
  if (!field) {
    throw ValidationError(path, "missing required field");
  }
  return *field;
}

template <typename T, typename Getter>
ImagePairs<T> paired(const EvalDataset& data, const char* field, Getter get) {
  ImagePairs<T> out;
  for (std::size_t i = 0; i < data.images.size(); ++i) {
    const auto& img = data.images[i];
    if (img.reference.size() != img.generated.size()) {
      throw ValidationError("images[" + std::to_string(i) + "]",
                            "reference and generated human counts differ for paired metric");
    }
    auto& pairs = out.emplace_back();
    for (std::size_t j = 0; j < img.reference.size(); ++j) {
      const auto& ref = require_field(get(img.reference[j]),
                                      human_path(i, "reference", j) + "." + field);
      const auto& gen = require_field(get(img.generated[j]),
                                      human_path(i, "generated", j) + "." + field);
      pairs.emplace_back(ref, gen);
    }
  }
  return out;
}

}  // namespace

MetricReport evaluate(const EvalDataset& dataset, const EvalOptions& options) {
  MetricReport report;
  report.options = options;
  for (const auto& img : dataset.images) report.image_ids.push_back(img.id);

  for (const Metric metric : options.metrics) {
    switch (metric) {
      case Metric::kFace: {
        auto pairs = paired<Embedding>(dataset, "embedding",
                                       [](const EvalHuman& h) -> const auto& { return h.embedding; });
        for (std::size_t i = 0; i < pairs.size(); ++i) {
          for (std::size_t j = 0; j < pairs[i].size(); ++j) {
            const bool ref_ok = pairs[i][j].first.size() == kFaceEmbeddingSize;
            if (!ref_ok || pairs[i][j].second.size() != kFaceEmbeddingSize) {
              throw ValidationError(
                  human_path(i, ref_ok ? "generated" : "reference", j) + ".embedding",
                  "face embeddings must have 512 entries");
            }
          }
        }
        report.s_face = s_face(pairs);
        break;
      }
      case Metric::kBody:
        report.s_body = s_body(paired<std::vector<double>>(
            dataset, "betas", [](const EvalHuman& h) -> const auto& { return h.betas; }));
        break;
      case Metric::kMpjpe: {
        std::vector<std::vector<JointSet3D>> targets, preds;
        for (std::size_t i = 0; i < dataset.images.size(); ++i) {
          const auto& img = dataset.images[i];
          auto& t = targets.emplace_back();
          auto& p = preds.emplace_back();
          for (std::size_t j = 0; j < img.reference.size(); ++j) {
            t.push_back({require_field(img.reference[j].joints3d_mm,
                                       human_path(i, "reference", j) + ".joints3d_mm"),
                         static_cast<int>(j)});
          }
          for (std::size_t j = 0; j < img.generated.size(); ++j) {
            p.push_back({require_field(img.generated[j].joints3d_mm,
                                       human_path(i, "generated", j) + ".joints3d_mm"),
                         static_cast<int>(j)});
          }
        }
        report.mpjpe = mpjpe(targets, preds, options.mpjpe);
        if (report.mpjpe->unmatched > 0) {
          report.warnings.push_back(std::to_string(report.mpjpe->unmatched) +
                                    " unmatched humans excluded from MPJPE");
        }
        break;
      }
      case Metric::kAp: {
        std::vector<std::vector<Keypoints2D>> targets, preds;
        for (std::size_t i = 0; i < dataset.images.size(); ++i) {
          const auto& img = dataset.images[i];
          auto& t = targets.emplace_back();
          auto& p = preds.emplace_back();
          for (std::size_t j = 0; j < img.reference.size(); ++j) {
            t.push_back(require_field(img.reference[j].keypoints2d,
                                      human_path(i, "reference", j) + ".keypoints2d"));
          }
          for (std::size_t j = 0; j < img.generated.size(); ++j) {
            p.push_back(require_field(img.generated[j].keypoints2d,
                                      human_path(i, "generated", j) + ".keypoints2d"));
          }
        }
        report.ap = ap_at_oks(targets, preds, options.ap);
        for (std::size_t i = 0; i < report.ap->per_image.size(); ++i) {
          if (report.ap->per_image[i].both_empty) {
            report.warnings.push_back("images[" + std::to_string(i) +
                                      "] has no targets and no predictions; AP taken as 1");
          }
        }
        break;
      }
    }
  }
  return report;
}

}  // namespace occond::metrics
