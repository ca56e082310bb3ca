#include "occond/scene.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "occond/error.hpp"

namespace occond::scene {

namespace {

std::string human_path(std::size_t i, const std::string& field) {
  return "humans[" + std::to_string(i) + "]." + field;
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

std::optional<Projection> project(const Camera& camera, const Vec3& world_point) {
  const Vec3 p = camera.to_camera(world_point);
  if (!(p.z() > camera.near)) {
    return std::nullopt;
  }
  return Projection{camera.fx * p.x() / p.z() + camera.cx, camera.fy * p.y() / p.z() + camera.cy,
                    p.z()};
}

std::vector<Violation> find_violations(const SceneSpec& spec, const body::BodyModel& model) {
  std::vector<Violation> out;
  const auto& cam = spec.camera;
  if (!(finite(cam.fx) && cam.fx > 0.0)) out.push_back({"camera.fx", "must be > 0"});
  if (!(finite(cam.fy) && cam.fy > 0.0)) out.push_back({"camera.fy", "must be > 0"});
  if (!finite(cam.cx)) out.push_back({"camera.cx", "must be finite"});
  if (!finite(cam.cy)) out.push_back({"camera.cy", "must be finite"});
  if (cam.width < 1) out.push_back({"camera.width", "must be >= 1"});
  if (cam.height < 1) out.push_back({"camera.height", "must be >= 1"});
  if (!cam.rotation.allFinite()) out.push_back({"camera.rotation", "must be finite"});
  if (!cam.translation.allFinite()) out.push_back({"camera.translation", "must be finite"});
  if (!(finite(cam.near) && cam.near > 0.0)) out.push_back({"camera.near", "must be > 0"});
  if (!(finite(cam.depth_clip) && cam.depth_clip > cam.near)) {
    out.push_back({"camera.depth_clip", "must exceed camera.near"});
  }

  if (spec.humans.empty()) {
    out.push_back({"humans", "scene must contain at least one human"});
  }
  for (std::size_t i = 0; i < spec.humans.size(); ++i) {
    const auto& h = spec.humans[i];
    if (h.beta.size() != model.shape_count()) {
      out.push_back({human_path(i, "beta"), "expected " + std::to_string(model.shape_count()) +
                                                " coefficients, got " +
                                                std::to_string(h.beta.size())});
    }
    for (std::size_t k = 0; k < h.beta.size(); ++k) {
      if (!finite(h.beta.betas[k])) {
        out.push_back({human_path(i, "beta[" + std::to_string(k) + "]"), "must be finite"});
      }
    }
    if (!h.pose.root_translation.allFinite()) {
      out.push_back({human_path(i, "pose.root_translation"), "must be finite"});
    }
    if (h.pose.joint_rotations.size() != model.joint_count()) {
      out.push_back({human_path(i, "pose.joint_rotations"),
                     "expected " + std::to_string(model.joint_count()) + " rotations, got " +
                         std::to_string(h.pose.joint_rotations.size())});
    }
    for (std::size_t j = 0; j < h.pose.joint_rotations.size(); ++j) {
      if (!h.pose.joint_rotations[j].allFinite()) {
        out.push_back(
            {human_path(i, "pose.joint_rotations[" + std::to_string(j) + "]"), "must be finite"});
      }
    }
    if (h.face_landmarks) {
      for (std::size_t k = 0; k < h.face_landmarks->size(); ++k) {
        if (!(*h.face_landmarks)[k].allFinite()) {
          out.push_back({human_path(i, "face_landmarks[" + std::to_string(k) + "]"),
                         "must be finite"});
        }
      }
    }
  }
  return out;
}

const SceneSpec& validate_scene(const SceneSpec& spec, const body::BodyModel& model) {
  const auto violations = find_violations(spec, model);
  if (violations.empty()) {
    return spec;
  }
  std::ostringstream msg;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i > 0) msg << "; ";
    msg << violations[i].path << ": " << violations[i].message;
  }
  throw ValidationError(violations.front().path, msg.str());
}

std::vector<body::PosedMesh> pose_humans(const SceneSpec& spec, const body::BodyModel& model) {
  std::vector<body::PosedMesh> out;
  out.reserve(spec.humans.size());
  for (const auto& h : spec.humans) {
    out.push_back(body::build_posed_mesh(model, h.beta, h.pose));
  }
  return out;
}

Camera resized(const Camera& camera, int width, int height) {
  Camera out = camera;
  const double sx = static_cast<double>(width) / camera.width;
  const double sy = static_cast<double>(height) / camera.height;
  out.fx *= sx;
  out.cx *= sx;
  out.fy *= sy;
  out.cy *= sy;
  out.width = width;
  out.height = height;
  return out;
}

Camera default_camera(int width, int height, double distance) {
  Camera cam;
  cam.width = width;
  cam.height = height;
  cam.fx = cam.fy = 1.4 * std::min(width, height);
  cam.cx = width / 2.0;
  cam.cy = height / 2.0;
  // 180 degrees about x: world y-up becomes image y-down, world -z is forward.
  cam.rotation = body::axis_angle_to_matrix(Vec3(std::numbers::pi, 0.0, 0.0));
  cam.translation = Vec3(0.0, 0.9, distance);
  return cam;
}

SceneSpec make_fixture_scene(const body::BodyModel& model, int width, int height) {
  SceneSpec spec;
  spec.camera = default_camera(width, height);
  spec.model_ref = "fixture:capsule-person";

  const auto joints = model.joint_count();
  const auto shapes = model.shape_count();

  HumanSpec left;
  left.beta.betas.assign(shapes, 0.0);
  left.pose = body::PoseSpec::identity(joints);
  left.pose.root_translation = Vec3(-0.22, 0.0, 0.0);
  if (shapes > 1) left.beta.betas[1] = 0.5;
  if (joints > 4) {
    // left arm swings forward and across the partner's chest
    left.pose.joint_rotations[4] = Vec3(0.0, -0.9, 0.0);
  }

  HumanSpec right;
  right.beta.betas.assign(shapes, 0.0);
  right.pose = body::PoseSpec::identity(joints);
  right.pose.root_translation = Vec3(0.25, 0.0, -0.35);
  if (shapes > 0) right.beta.betas[0] = -0.3;
  if (joints > 7) {
    right.pose.joint_rotations[7] = Vec3(0.0, 0.6, 0.3);
  }
  if (joints > 13) {
    right.pose.joint_rotations[13] = Vec3(-0.4, 0.0, 0.0);
  }

  spec.humans = {left, right};
  return spec;
}

}  // namespace occond::scene
