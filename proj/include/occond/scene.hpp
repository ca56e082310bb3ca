#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "occond/bodymodel.hpp"

namespace occond::scene {

using body::Mat3;
using body::Vec3;

/// Pinhole camera without lens distortion. Pixel (row, col) has its center
/// at (u, v) = (col + 0.5, row + 0.5); rays are cast through pixel centers.
struct Camera {
  double fx = 500.0;
  double fy = 500.0;
  double cx = 256.0;
  double cy = 256.0;
  int width = 512;
  int height = 512;
  Mat3 rotation = Mat3::Identity();  // world -> camera
  Vec3 translation = Vec3::Zero();   // world -> camera
  double near = 0.01;
  double depth_clip = 5.0;

  Vec3 to_camera(const Vec3& world) const { return rotation * world + translation; }

  /// Camera-space direction through the center of pixel (row, col),
  /// normalized so that its z component is 1.
  Vec3 pixel_ray(int row, int col) const {
    return {(col + 0.5 - cx) / fx, (row + 0.5 - cy) / fy, 1.0};
  }
};

struct Projection {
  double u;
  double v;
  double depth;
};

/// std::nullopt marks a point at or behind the near plane.
std::optional<Projection> project(const Camera& camera, const Vec3& world_point);

struct HumanSpec {
  body::ShapeVector beta;
  body::PoseSpec pose;
  std::optional<std::array<Eigen::Vector2d, 5>> face_landmarks;
};

struct SceneSpec {
  Camera camera;
  std::vector<HumanSpec> humans;
  std::string model_ref;
};

struct Violation {
  std::string path;
  std::string message;
};

/// Every broken invariant, each with a path into the scene document.
std::vector<Violation> find_violations(const SceneSpec& spec, const body::BodyModel& model);

/// Throws ValidationError (listing all violations) unless the scene is valid.
const SceneSpec& validate_scene(const SceneSpec& spec, const body::BodyModel& model);

/// Posed meshes of all humans, in world coordinates.
std::vector<body::PosedMesh> pose_humans(const SceneSpec& spec, const body::BodyModel& model);

/// Rescales intrinsics for a new image size.
Camera resized(const Camera& camera, int width, int height);

/// Two overlapping capsule-people facing the camera, arms crossing.
SceneSpec make_fixture_scene(const body::BodyModel& model, int width = 512, int height = 512);

/// Camera looking down world -z with image y pointing down world -y,
/// placed so a standing body at `distance` meters is centered.
Camera default_camera(int width, int height, double distance = 3.5);

}  // namespace occond::scene
