#include "occond/bodymodel.hpp"

#include <cmath>
#include <map>
#include <string>
#include <utility>

#include <Eigen/Geometry>

#include "occond/error.hpp"

namespace occond::body {

namespace {

constexpr double kWeightSumTolerance = 1e-6;

std::string indexed(const std::string& field, std::size_t i) {
  return field + "[" + std::to_string(i) + "]";
}

void check_beta(const BodyModel& model, const ShapeVector& beta) {
  if (beta.size() != model.shape_count()) {
    throw DimensionError("beta", "shape dimension mismatch: got " + std::to_string(beta.size()) +
                                     ", model has " + std::to_string(model.shape_count()));
  }
}

void check_pose(const BodyModel& model, const PoseSpec& pose) {
  if (pose.joint_rotations.size() != model.joint_count()) {
    throw DimensionError("pose.joint_rotations",
                         "pose dimension mismatch: got " +
                             std::to_string(pose.joint_rotations.size()) + " rotations, model has " +
                             std::to_string(model.joint_count()) + " joints");
  }
  if (!pose.root_translation.allFinite()) {
    throw ValidationError("pose.root_translation", "non-finite translation");
  }
  for (std::size_t j = 0; j < pose.joint_rotations.size(); ++j) {
    if (!pose.joint_rotations[j].allFinite()) {
      throw ValidationError(indexed("pose.joint_rotations", j), "non-finite rotation");
    }
  }
}

// Per-joint world rotation and the displacement of the joint origin from
// its rest position. Storing (R - I) and a displacement, rather than full
// affine transforms, keeps the identity pose exact.
struct JointState {
  Mat3 rotation_minus_identity;
  Vec3 displacement;
};

std::vector<JointState> forward_kinematics(const BodyModel& model,
                                           const std::vector<Vec3>& rest_joints,
                                           const PoseSpec& pose) {
  const std::size_t joint_count = model.joint_count();
  std::vector<Mat3> world(joint_count);
  std::vector<JointState> states(joint_count);
  for (std::size_t j = 0; j < joint_count; ++j) {
    const Mat3 local = axis_angle_to_matrix(pose.joint_rotations[j]);
    const int parent = model.parents[j];
    if (parent == kRootParent) {
      world[j] = local;
      states[j].displacement = Vec3::Zero();
    } else {
      world[j] = world[parent] * local;
      const Vec3 bone = rest_joints[j] - rest_joints[parent];
      states[j].displacement =
          states[parent].displacement + states[parent].rotation_minus_identity * bone;
    }
    states[j].rotation_minus_identity = world[j] - Mat3::Identity();
  }
  return states;
}

}  // namespace

void BodyModel::validate() const {
  const std::size_t vcount = vertex_count();
  const std::size_t jcount = joint_count();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (auto idx : faces[f]) {
      if (idx >= vcount) {
        throw ValidationError(indexed("faces", f), "vertex index " + std::to_string(idx) +
                                                       " out of range");
      }
    }
  }
  if (parents.size() != jcount) {
    throw ValidationError("parents", "expected " + std::to_string(jcount) + " entries");
  }
  for (std::size_t j = 0; j < jcount; ++j) {
    const int p = parents[j];
    if (p != kRootParent && (p < 0 || static_cast<std::size_t>(p) >= j)) {
      throw ValidationError(indexed("parents", j),
                            "parent must precede its child or be " + std::to_string(kRootParent));
    }
  }
  if (jcount > 0 && parents[0] != kRootParent) {
    throw ValidationError("parents[0]", "first joint must be the root");
  }
  for (std::size_t k = 0; k < shape_basis.size(); ++k) {
    if (shape_basis[k].size() != vcount) {
      throw ValidationError(indexed("shape_basis", k),
                            "expected one offset per vertex (" + std::to_string(vcount) + ")");
    }
  }
  if (!joint_shape_basis.empty()) {
    if (joint_shape_basis.size() != shape_basis.size()) {
      throw ValidationError("joint_shape_basis", "must have as many entries as shape_basis");
    }
    for (std::size_t k = 0; k < joint_shape_basis.size(); ++k) {
      if (joint_shape_basis[k].size() != jcount) {
        throw ValidationError(indexed("joint_shape_basis", k),
                              "expected one offset per joint (" + std::to_string(jcount) + ")");
      }
    }
  }
  if (skin_weights.size() != vcount) {
    throw ValidationError("skin_weights", "expected one entry per vertex");
  }
  for (std::size_t v = 0; v < vcount; ++v) {
    double sum = 0.0;
    for (const auto& sw : skin_weights[v]) {
      if (sw.joint < 0 || static_cast<std::size_t>(sw.joint) >= jcount) {
        throw ValidationError(indexed("skin_weights", v), "joint index out of range");
      }
      if (!(sw.weight >= 0.0)) {
        throw ValidationError(indexed("skin_weights", v), "negative weight");
      }
      sum += sw.weight;
    }
    if (std::abs(sum - 1.0) > kWeightSumTolerance) {
      throw ValidationError(indexed("skin_weights", v),
                            "weights sum to " + std::to_string(sum) + ", expected 1");
    }
  }
  if (!joint_names.empty() && joint_names.size() != jcount) {
    throw ValidationError("joint_names", "expected one name per joint");
  }
}

Mat3 axis_angle_to_matrix(const Vec3& axis_angle) {
  const double angle = axis_angle.norm();
  if (angle == 0.0) {
    return Mat3::Identity();
  }
  return Eigen::AngleAxisd(angle, axis_angle / angle).toRotationMatrix();
}

Vec3 matrix_to_axis_angle(const Mat3& rotation) {
  const Eigen::AngleAxisd aa(rotation);
  return aa.axis() * aa.angle();
}

std::vector<Vec3> apply_shape(const BodyModel& model, const ShapeVector& beta) {
  check_beta(model, beta);
  std::vector<Vec3> out = model.vertices_template;
  for (std::size_t k = 0; k < beta.size(); ++k) {
    const double b = beta.betas[k];
    if (b == 0.0) {
      continue;
    }
    const auto& basis = model.shape_basis[k];
    for (std::size_t v = 0; v < out.size(); ++v) {
      out[v] += b * basis[v];
    }
  }
  return out;
}

std::vector<Vec3> shaped_joints(const BodyModel& model, const ShapeVector& beta) {
  check_beta(model, beta);
  std::vector<Vec3> out = model.joints_rest;
  if (model.joint_shape_basis.empty()) {
    return out;
  }
  for (std::size_t k = 0; k < beta.size(); ++k) {
    const double b = beta.betas[k];
    if (b == 0.0) {
      continue;
    }
    for (std::size_t j = 0; j < out.size(); ++j) {
      out[j] += b * model.joint_shape_basis[k][j];
    }
  }
  return out;
}

PosedMesh pose_mesh(const BodyModel& model, const std::vector<Vec3>& shaped_vertices,
                    const std::vector<Vec3>& shaped_joint_positions, const PoseSpec& pose) {
  check_pose(model, pose);
  if (shaped_vertices.size() != model.vertex_count()) {
    throw DimensionError("vertices", "vertex count mismatch: got " +
                                         std::to_string(shaped_vertices.size()) + ", model has " +
                                         std::to_string(model.vertex_count()));
  }
  if (shaped_joint_positions.size() != model.joint_count()) {
    throw DimensionError("joints", "joint count mismatch");
  }
  const auto states = forward_kinematics(model, shaped_joint_positions, pose);

  PosedMesh mesh;
  mesh.faces = model.faces;
  mesh.vertices.resize(shaped_vertices.size());
  for (std::size_t v = 0; v < shaped_vertices.size(); ++v) {
    const Vec3& rest = shaped_vertices[v];
    Vec3 offset = Vec3::Zero();
    for (const auto& sw : model.skin_weights[v]) {
      const auto& st = states[sw.joint];
      offset += sw.weight * (st.rotation_minus_identity * (rest - shaped_joint_positions[sw.joint]) +
                             st.displacement);
    }
    mesh.vertices[v] = rest + offset + pose.root_translation;
  }
  return mesh;
}

PosedMesh pose_mesh(const BodyModel& model, const std::vector<Vec3>& shaped_vertices,
                    const PoseSpec& pose) {
  return pose_mesh(model, shaped_vertices, model.joints_rest, pose);
}

PosedMesh build_posed_mesh(const BodyModel& model, const ShapeVector& beta, const PoseSpec& pose) {
  return pose_mesh(model, apply_shape(model, beta), shaped_joints(model, beta), pose);
}

std::vector<Vec3> joint_positions(const BodyModel& model, const ShapeVector& beta,
                                  const PoseSpec& pose) {
  check_pose(model, pose);
  const auto rest = shaped_joints(model, beta);
  const auto states = forward_kinematics(model, rest, pose);
  std::vector<Vec3> out(rest.size());
  for (std::size_t j = 0; j < rest.size(); ++j) {
    out[j] = rest[j] + states[j].displacement + pose.root_translation;
  }
  return out;
}

bool is_watertight(const std::vector<Face>& faces) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> incidence;
  for (const auto& f : faces) {
    for (int e = 0; e < 3; ++e) {
      auto a = f[e];
      auto b = f[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      ++incidence[{a, b}];
    }
  }
  for (const auto& [edge, n] : incidence) {
    if (n != 2) return false;
  }
  return !faces.empty();
}

}  // namespace occond::body
