#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "occond/bodymodel.hpp"
#include "occond/metrics.hpp"
#include "occond/scene.hpp"

namespace occond::io {

using nlohmann::json;

inline constexpr const char* kBodySchema = "occond-body/1";
inline constexpr const char* kSceneSchema = "occond-scene/1";
inline constexpr const char* kEvalSchema = "occond-eval/1";
inline constexpr const char* kBundleSchema = "occond-bundle/1";
inline constexpr const char* kFixturePrefix = "fixture:";

/// Parses text as JSON; syntax errors become ValidationError naming `source`.
json parse_json(const std::string& text, const std::string& source);
json load_json(const std::filesystem::path& path);

json body_model_to_json(const body::BodyModel& model);
body::BodyModel body_model_from_json(const json& doc);
body::BodyModel load_body_model(const std::filesystem::path& path);
void save_body_model(const std::filesystem::path& path, const body::BodyModel& model);
/// Canonical text form; identical models give identical bytes.
std::string serialize_body_model(const body::BodyModel& model);

/// "fixture:capsule-person" or "fixture:capsule-person@<detail>" builds the
/// procedural body; anything else is a file path, resolved against
/// `base_dir` when relative.
body::BodyModel resolve_model_ref(const std::string& ref, const std::filesystem::path& base_dir);

json camera_to_json(const scene::Camera& camera);
scene::Camera camera_from_json(const json& doc, const std::string& path);

json scene_to_json(const scene::SceneSpec& spec);
scene::SceneSpec scene_from_json(const json& doc);
scene::SceneSpec load_scene(const std::filesystem::path& path);
void save_scene(const std::filesystem::path& path, const scene::SceneSpec& spec);

/// {"betas": [...]}
body::ShapeVector shape_from_json(const json& doc, const std::string& path = "");
json shape_to_json(const body::ShapeVector& shape);

metrics::EvalDataset eval_dataset_from_json(const json& doc);
json eval_dataset_to_json(const metrics::EvalDataset& dataset);
json report_to_json(const metrics::MetricReport& report);

}  // namespace occond::io
