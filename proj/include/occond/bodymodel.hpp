#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace occond::body {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Face = std::array<std::uint32_t, 3>;

inline constexpr int kRootParent = -1;
inline constexpr int kDefaultShapeCount = 10;

struct SkinWeight {
  int joint = 0;
  double weight = 0.0;

  bool operator==(const SkinWeight&) const = default;
};

/// Minimal SMPL-style parametric body: template mesh, linear shape
/// blendshapes and a linear-blend-skinned kinematic tree.
///
/// `joint_shape_basis` carries the per-joint displacement of each shape
/// component (what SMPL obtains by regressing joints from shaped
/// vertices). It may be empty, in which case joints do not move with beta.
struct BodyModel {
  std::vector<Vec3> vertices_template;
  std::vector<Face> faces;
  std::vector<std::vector<Vec3>> shape_basis;        // K x V
  std::vector<std::vector<Vec3>> joint_shape_basis;  // K x J, or empty
  std::vector<Vec3> joints_rest;
  std::vector<int> parents;
  std::vector<std::vector<SkinWeight>> skin_weights;  // V entries
  std::vector<std::string> joint_names;                // optional

  std::size_t vertex_count() const noexcept { return vertices_template.size(); }
  std::size_t joint_count() const noexcept { return joints_rest.size(); }
  std::size_t shape_count() const noexcept { return shape_basis.size(); }

  /// Throws ValidationError describing the first broken invariant.
  void validate() const;
};

struct ShapeVector {
  std::vector<double> betas;

  std::size_t size() const noexcept { return betas.size(); }
  bool operator==(const ShapeVector&) const = default;
};

struct PoseSpec {
  Vec3 root_translation = Vec3::Zero();
  std::vector<Vec3> joint_rotations;  // axis-angle, radians

  static PoseSpec identity(std::size_t joint_count) {
    PoseSpec pose;
    pose.joint_rotations.assign(joint_count, Vec3::Zero());
    return pose;
  }
};

struct PosedMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
};

/// Rodrigues' formula; returns the exact identity for a zero vector.
Mat3 axis_angle_to_matrix(const Vec3& axis_angle);
Vec3 matrix_to_axis_angle(const Mat3& rotation);

std::vector<Vec3> apply_shape(const BodyModel& model, const ShapeVector& beta);

/// Rest-pose joint locations for the given shape.
std::vector<Vec3> shaped_joints(const BodyModel& model, const ShapeVector& beta);

PosedMesh pose_mesh(const BodyModel& model, const std::vector<Vec3>& shaped_vertices,
                    const std::vector<Vec3>& shaped_joint_positions, const PoseSpec& pose);

/// Convenience overload using the model's rest joints (zero shape).
PosedMesh pose_mesh(const BodyModel& model, const std::vector<Vec3>& shaped_vertices,
                    const PoseSpec& pose);

/// Shape and pose in one call.
PosedMesh build_posed_mesh(const BodyModel& model, const ShapeVector& beta, const PoseSpec& pose);

std::vector<Vec3> joint_positions(const BodyModel& model, const ShapeVector& beta,
                                  const PoseSpec& pose);

/// Procedural watertight test body. Only "capsule-person" is known;
/// detail ranges over 1..3 (about 1.5k, 1.9k and 2.5k triangles).
BodyModel make_fixture_body(const std::string& preset, int detail = 2);

/// Edge-incidence check: every undirected edge is used by exactly two faces.
bool is_watertight(const std::vector<Face>& faces);

}  // namespace occond::body
