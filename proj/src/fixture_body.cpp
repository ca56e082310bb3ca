#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "occond/bodymodel.hpp"
#include "occond/error.hpp"

namespace occond::body {

namespace {

enum class Group { kTorso, kShoulderBar, kUpperTorso, kBelly, kHead, kArm, kLeg };

struct Capsule {
  Vec3 a;
  Vec3 b;
  double radius;
  int joint;
  Group group;
};

struct Resolution {
  int segments;
  int hemisphere_rings;
};

// Y-up, meters, feet on y = 0, facing +z. Arms in T-pose along x.
const std::vector<std::pair<std::string, Vec3>> kJoints = {
    {"pelvis", {0.0, 0.95, 0.0}},         //  0
    {"spine", {0.0, 1.25, 0.0}},          //  1
    {"neck", {0.0, 1.50, 0.0}},           //  2
    {"head", {0.0, 1.65, 0.0}},           //  3
    {"left_shoulder", {0.18, 1.45, 0.0}}, //  4
    {"left_elbow", {0.45, 1.45, 0.0}},    //  5
    {"left_wrist", {0.70, 1.45, 0.0}},    //  6
    {"right_shoulder", {-0.18, 1.45, 0.0}},
    {"right_elbow", {-0.45, 1.45, 0.0}},
    {"right_wrist", {-0.70, 1.45, 0.0}},
    {"left_hip", {0.10, 0.92, 0.0}},      // 10
    {"left_knee", {0.10, 0.50, 0.0}},
    {"left_ankle", {0.10, 0.08, 0.0}},
    {"right_hip", {-0.10, 0.92, 0.0}},
    {"right_knee", {-0.10, 0.50, 0.0}},
    {"right_ankle", {-0.10, 0.08, 0.0}},
};
const std::vector<int> kParents = {-1, 0, 1, 2, 1, 4, 5, 1, 7, 8, 0, 10, 11, 0, 13, 14};

constexpr double kShoulderX = 0.18;
constexpr double kArmReach = 0.52;  // shoulder to wrist
constexpr double kHipY = 0.92;
constexpr double kLegReach = 0.84;  // hip to ankle
constexpr double kSpineY = 1.25;
constexpr double kTorsoSpan = 0.25;  // spine to neck

std::vector<Capsule> capsules() {
  const auto j = [](int i) { return kJoints[i].second; };
  return {
      {j(13), j(10), 0.09, 0, Group::kTorso},
      {j(0), j(1), 0.13, 0, Group::kBelly},
      {j(1), j(2), 0.14, 1, Group::kUpperTorso},
      {j(7), j(4), 0.06, 1, Group::kShoulderBar},
      {{0.0, 1.56, 0.0}, {0.0, 1.72, 0.0}, 0.10, 2, Group::kHead},
      {j(4), j(5), 0.05, 4, Group::kArm},
      {j(5), j(6), 0.04, 5, Group::kArm},
      {j(7), j(8), 0.05, 7, Group::kArm},
      {j(8), j(9), 0.04, 8, Group::kArm},
      {j(10), j(11), 0.07, 10, Group::kLeg},
      {j(11), j(12), 0.05, 11, Group::kLeg},
      {j(13), j(14), 0.07, 13, Group::kLeg},
      {j(14), j(15), 0.05, 14, Group::kLeg},
  };
}

Resolution resolution_for(int detail) {
  switch (detail) {
    case 1: return {10, 3};
    case 2: return {12, 3};
    case 3: return {16, 3};
    default:
      throw ValidationError("detail", "detail level must be 1, 2 or 3, got " +
                                          std::to_string(detail));
  }
}

Vec3 closest_on_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return a + t * ab;
}

double sign_of(double x) { return x < 0.0 ? -1.0 : 1.0; }

// Displacement of component k for a point belonging to `cap`.
Vec3 shape_offset(int k, const Vec3& p, const Capsule& cap) {
  const Vec3 radial = p - closest_on_segment(p, cap.a, cap.b);
  const bool torso_like = cap.group == Group::kTorso || cap.group == Group::kBelly ||
                          cap.group == Group::kUpperTorso || cap.group == Group::kShoulderBar;
  switch (k) {
    case 0:  // overall scale about the floor origin
      return 0.1 * p;
    case 1:
      return torso_like ? Vec3(0.2 * radial) : Vec3::Zero();
    case 2:
      return cap.group == Group::kArm ? Vec3(0.2 * radial) : Vec3::Zero();
    case 3:
      return cap.group == Group::kLeg ? Vec3(0.2 * radial) : Vec3::Zero();
    case 4:
      return cap.group == Group::kHead ? Vec3(0.2 * radial) : Vec3::Zero();
    case 5:  // shoulder width
      if (cap.group == Group::kShoulderBar) {
        return {0.05 * std::clamp(p.x() / kShoulderX, -1.0, 1.0), 0.0, 0.0};
      }
      return cap.group == Group::kArm ? Vec3(0.05 * sign_of(p.x()), 0.0, 0.0) : Vec3::Zero();
    case 6:  // arm length
      if (cap.group != Group::kArm) return Vec3::Zero();
      return {sign_of(p.x()) * 0.1 * std::clamp(std::abs(p.x()) - kShoulderX, 0.0, kArmReach),
              0.0, 0.0};
    case 7:  // leg length
      if (cap.group != Group::kLeg) return Vec3::Zero();
      return {0.0, -0.1 * std::clamp(kHipY - p.y(), 0.0, kLegReach), 0.0};
    case 8:  // torso length
      switch (cap.group) {
        case Group::kUpperTorso:
          return {0.0, 0.1 * std::clamp(p.y() - kSpineY, 0.0, kTorsoSpan), 0.0};
        case Group::kShoulderBar:
        case Group::kArm:
          return {0.0, 0.1 * (kJoints[4].second.y() - kSpineY), 0.0};
        case Group::kHead:
          return {0.0, 0.1 * kTorsoSpan, 0.0};
        default:
          return Vec3::Zero();
      }
    case 9:  // belly
      return cap.group == Group::kBelly ? Vec3(0.0, 0.0, 0.3 * std::max(0.0, radial.z()))
                                        : Vec3::Zero();
    default:
      return Vec3::Zero();
  }
}

Vec3 joint_shape_offset(int k, int joint) {
  const Vec3& p = kJoints[joint].second;
  const bool arm = (joint >= 4 && joint <= 9);
  const bool leg = joint >= 10;
  switch (k) {
    case 0:
      return 0.1 * p;
    case 5:
      return arm ? Vec3(0.05 * sign_of(p.x()), 0.0, 0.0) : Vec3::Zero();
    case 6:
      return arm ? Vec3(sign_of(p.x()) * 0.1 * (std::abs(p.x()) - kShoulderX), 0.0, 0.0)
                 : Vec3::Zero();
    case 7:
      return leg ? Vec3(0.0, -0.1 * (kHipY - p.y()), 0.0) : Vec3::Zero();
    case 8:
      if (arm) return {0.0, 0.1 * (kJoints[4].second.y() - kSpineY), 0.0};
      if (joint == 2 || joint == 3) return {0.0, 0.1 * kTorsoSpan, 0.0};
      return Vec3::Zero();
    default:
      return Vec3::Zero();
  }
}

// Appends a closed, outward-oriented capsule mesh.
void append_capsule(BodyModel& model, const Capsule& cap, const Resolution& res,
                    std::vector<int>& owner, int capsule_index) {
  const Vec3 axis = (cap.b - cap.a).normalized();
  const Vec3 helper = std::abs(axis.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 u = axis.cross(helper).normalized();
  const Vec3 w = axis.cross(u);  // (u, w, axis) right-handed

  const auto base = static_cast<std::uint32_t>(model.vertices_template.size());
  const auto add = [&](const Vec3& p) {
    model.vertices_template.push_back(p);
    model.skin_weights.push_back({{cap.joint, 1.0}});
    owner.push_back(capsule_index);
  };

  const int seg = res.segments;
  const int hemi = res.hemisphere_rings;
  const double quarter = std::numbers::pi / 2.0;

  add(cap.a - cap.radius * axis);
  std::vector<std::pair<Vec3, double>> rings;  // (center, ring radius)
  for (int k = 1; k <= hemi; ++k) {
    const double phi = -quarter + k * quarter / hemi;
    rings.emplace_back(cap.a + cap.radius * std::sin(phi) * axis, cap.radius * std::cos(phi));
  }
  for (int k = 0; k < hemi; ++k) {
    const double phi = k * quarter / hemi;
    rings.emplace_back(cap.b + cap.radius * std::sin(phi) * axis, cap.radius * std::cos(phi));
  }
  for (const auto& [center, radius] : rings) {
    for (int s = 0; s < seg; ++s) {
      const double theta = 2.0 * std::numbers::pi * s / seg;
      add(center + radius * (std::cos(theta) * u + std::sin(theta) * w));
    }
  }
  add(cap.b + cap.radius * axis);

  const auto ring_count = static_cast<std::uint32_t>(rings.size());
  const std::uint32_t pole_a = base;
  const std::uint32_t pole_b = base + 1 + ring_count * seg;
  const auto at = [&](std::uint32_t ring, int s) {
    return base + 1 + ring * seg + static_cast<std::uint32_t>(s % seg);
  };
  for (int s = 0; s < seg; ++s) {
    model.faces.push_back({pole_a, at(0, s + 1), at(0, s)});
  }
  for (std::uint32_t r = 0; r + 1 < ring_count; ++r) {
    for (int s = 0; s < seg; ++s) {
      model.faces.push_back({at(r, s), at(r, s + 1), at(r + 1, s + 1)});
      model.faces.push_back({at(r, s), at(r + 1, s + 1), at(r + 1, s)});
    }
  }
  for (int s = 0; s < seg; ++s) {
    model.faces.push_back({at(ring_count - 1, s), at(ring_count - 1, s + 1), pole_b});
  }
}

}  // namespace

BodyModel make_fixture_body(const std::string& preset, int detail) {
  if (preset != "capsule-person") {
    throw ValidationError("preset", "unknown fixture preset '" + preset + "'");
  }
  const Resolution res = resolution_for(detail);
  const auto caps = capsules();

  BodyModel model;
  for (const auto& [name, pos] : kJoints) {
    model.joint_names.push_back(name);
    model.joints_rest.push_back(pos);
  }
  model.parents = kParents;

  std::vector<int> owner;
  for (std::size_t c = 0; c < caps.size(); ++c) {
    append_capsule(model, caps[c], res, owner, static_cast<int>(c));
  }

  model.shape_basis.assign(kDefaultShapeCount, std::vector<Vec3>(model.vertex_count()));
  model.joint_shape_basis.assign(kDefaultShapeCount, std::vector<Vec3>(model.joint_count()));
  for (int k = 0; k < kDefaultShapeCount; ++k) {
    for (std::size_t v = 0; v < model.vertex_count(); ++v) {
      model.shape_basis[k][v] = shape_offset(k, model.vertices_template[v], caps[owner[v]]);
    }
    for (std::size_t j = 0; j < model.joint_count(); ++j) {
      model.joint_shape_basis[k][j] = joint_shape_offset(k, static_cast<int>(j));
    }
  }
  return model;
}

}  // namespace occond::body
