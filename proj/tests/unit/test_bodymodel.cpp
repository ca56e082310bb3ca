#include <cmath>
#include <map>
#include <numbers>
#include <utility>

#include "doctest.h"
#include "generators.hpp"
#include "occond/bodymodel.hpp"
#include "occond/error.hpp"
#include "occond/json_io.hpp"

using namespace occond;
using namespace occond::body;

namespace {

const BodyModel& fixture() {
  static const BodyModel m = make_fixture_body("capsule-person");
  return m;
}

// Independent edge-incidence count: every undirected edge used exactly twice.
bool edges_used_twice(const std::vector<Face>& faces) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> uses;
  for (const auto& f : faces) {
    for (int k = 0; k < 3; ++k) {
      std::uint32_t a = f[k], b = f[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      ++uses[{a, b}];
    }
  }
  for (const auto& [edge, n] : uses) {
    if (n != 2) return false;
  }
  return !uses.empty();
}

Mat3 rot_z(double angle) {
  Mat3 r;
  r << std::cos(angle), -std::sin(angle), 0, std::sin(angle), std::cos(angle), 0, 0, 0, 1;
  return r;
}

// Two-joint chain with one vertex per joint, for hand-checkable kinematics.
BodyModel chain_model() {
  BodyModel m;
  m.vertices_template = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.faces = {{0, 1, 2}};
  m.shape_basis = {{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}};
  m.joints_rest = {{0, 0, 0}, {1, 0, 0}};
  m.parents = {-1, 0};
  m.skin_weights = {{{0, 1.0}}, {{1, 1.0}}, {{0, 1.0}}};
  return m;
}

}  // namespace

TEST_SUITE("bodymodel") {

TEST_CASE("fixture satisfies the model invariants") {
  const auto& m = fixture();
  CHECK_NOTHROW(m.validate());
  CHECK(m.joint_count() >= 14);
  CHECK(m.faces.size() >= 1000);
  CHECK(m.faces.size() <= 3000);
  CHECK(m.shape_count() == 10);
  for (const auto& ws : m.skin_weights) {
    double sum = 0.0;
    for (const auto& w : ws) {
      CHECK(w.weight >= 0.0);
      sum += w.weight;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-6);
  }
}

TEST_CASE("fixture mesh is watertight by edge incidence") {
  for (int detail = 1; detail <= 3; ++detail) {
    const auto m = make_fixture_body("capsule-person", detail);
    CHECK(edges_used_twice(m.faces));
    CHECK(is_watertight(m.faces));
  }
}

TEST_CASE("is_watertight rejects an open mesh") {
  auto faces = fixture().faces;
  faces.pop_back();
  CHECK_FALSE(is_watertight(faces));
  CHECK_FALSE(edges_used_twice(faces));
}

TEST_CASE("fixture generation is deterministic") {
  const auto a = io::serialize_body_model(make_fixture_body("capsule-person", 2));
  const auto b = io::serialize_body_model(make_fixture_body("capsule-person", 2));
  CHECK(a == b);
  CHECK(a != io::serialize_body_model(make_fixture_body("capsule-person", 1)));
}

TEST_CASE("unknown preset is rejected") {
  CHECK_THROWS_AS(make_fixture_body("stick-figure"), ValidationError);
}

TEST_CASE("apply_shape: zero beta returns the template exactly") {
  const auto& m = fixture();
  ShapeVector zero{std::vector<double>(m.shape_count(), 0.0)};
  CHECK(apply_shape(m, zero) == m.vertices_template);
}

TEST_CASE("apply_shape matches an elementwise-sum oracle") {
  const auto& m = fixture();
  ShapeVector unit{std::vector<double>(m.shape_count(), 0.0)};
  unit.betas[0] = 1.0;
  const auto shaped = apply_shape(m, unit);
  for (int axis = 0; axis < 3; ++axis) {
    CHECK(shaped[0][axis] == m.vertices_template[0][axis] + m.shape_basis[0][0][axis]);
  }

  testing::Rng rng(7);
  const auto beta = testing::random_beta(rng, m.shape_count(), 2.0);
  const auto got = apply_shape(m, beta);
  for (std::size_t v = 0; v < m.vertex_count(); v += 17) {
    for (int axis = 0; axis < 3; ++axis) {
      double expect = m.vertices_template[v][axis];
      for (std::size_t k = 0; k < m.shape_count(); ++k) {
        expect += beta.betas[k] * m.shape_basis[k][v][axis];
      }
      CHECK(got[v][axis] == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("apply_shape is linear in beta") {
  const auto& m = fixture();
  testing::Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const auto beta = testing::random_beta(rng, m.shape_count());
    const double a = testing::uniform(rng, -3, 3);
    ShapeVector scaled = beta;
    for (auto& b : scaled.betas) b *= a;
    const auto s1 = apply_shape(m, beta);
    const auto sa = apply_shape(m, scaled);
    for (std::size_t v = 0; v < m.vertex_count(); ++v) {
      const Vec3 lhs = sa[v] - m.vertices_template[v];
      const Vec3 rhs = a * (s1[v] - m.vertices_template[v]);
      REQUIRE((lhs - rhs).norm() <= 1e-12);
    }
  }
}

TEST_CASE("shape dimension mismatch names the field") {
  const auto& m = fixture();
  ShapeVector nine{std::vector<double>(9, 0.0)};
  try {
    apply_shape(m, nine);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    CHECK(e.path() == "beta");
  }
}

TEST_CASE("identity pose is a fixed point") {
  const auto& m = fixture();
  testing::Rng rng(3);
  const auto beta = testing::random_beta(rng, m.shape_count());
  const auto shaped = apply_shape(m, beta);
  const auto posed = pose_mesh(m, shaped, shaped_joints(m, beta), PoseSpec::identity(m.joint_count()));
  CHECK(posed.vertices == shaped);
  CHECK(posed.faces == m.faces);
}

TEST_CASE("root translation shifts every vertex and joint") {
  const auto& m = fixture();
  auto pose = PoseSpec::identity(m.joint_count());
  pose.root_translation = {1, 2, 3};
  ShapeVector zero{std::vector<double>(m.shape_count(), 0.0)};
  const auto posed = build_posed_mesh(m, zero, pose);
  for (std::size_t v = 0; v < m.vertex_count(); ++v) {
    CHECK(posed.vertices[v] == m.vertices_template[v] + Vec3(1, 2, 3));
  }
  const auto joints = joint_positions(m, zero, pose);
  for (std::size_t j = 0; j < m.joint_count(); ++j) {
    CHECK(joints[j] == m.joints_rest[j] + Vec3(1, 2, 3));
  }
  CHECK(joint_positions(m, zero, PoseSpec::identity(m.joint_count())) == m.joints_rest);
}

TEST_CASE("rigid root rotation matches a direct rotation oracle") {
  auto m = fixture();
  for (auto& ws : m.skin_weights) ws = {{0, 1.0}};
  auto pose = PoseSpec::identity(m.joint_count());
  const Vec3 aa(0.3, -1.1, 0.4);
  pose.joint_rotations[0] = aa;
  const Mat3 r = Eigen::AngleAxisd(aa.norm(), aa.normalized()).toRotationMatrix();
  const Vec3 root = m.joints_rest[0];
  const auto posed = pose_mesh(m, m.vertices_template, pose);
  for (std::size_t v = 0; v < m.vertex_count(); ++v) {
    const Vec3 expect = r * (m.vertices_template[v] - root) + root;
    REQUIRE((posed.vertices[v] - expect).norm() <= 1e-12);
  }
}

TEST_CASE("chain child joint rotated 90 degrees about z at the parent") {
  const auto m = chain_model();
  auto pose = PoseSpec::identity(2);
  pose.joint_rotations[0] = {0, 0, std::numbers::pi / 2};
  const auto joints = joint_positions(m, ShapeVector{{0.0}}, pose);
  // (1, 0, 0) about the origin by +90 degrees -> (0, 1, 0).
  CHECK(joints[1].x() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::abs(joints[1].x()) <= 1e-15);
  CHECK(joints[1].y() == doctest::Approx(1.0));
  CHECK(joints[1].z() == 0.0);
  const auto posed = pose_mesh(m, m.vertices_template, pose);
  CHECK((posed.vertices[2] - Vec3(-1, 0, 0)).norm() <= 1e-15);
}

TEST_CASE("rotations compose child after parent") {
  const auto m = chain_model();
  auto pose = PoseSpec::identity(2);
  pose.joint_rotations[0] = {0, 0, std::numbers::pi / 2};
  pose.joint_rotations[1] = {0, 0, std::numbers::pi / 2};
  BodyModel longer = m;
  longer.vertices_template[1] = {2, 0, 0};  // one unit beyond joint 1
  const auto posed = pose_mesh(longer, longer.vertices_template, pose);
  // Joint 1 moves to (0,1,0); the vertex offset (1,0,0) turns by 180 degrees.
  CHECK((posed.vertices[1] - Vec3(-1, 1, 0)).norm() <= 1e-12);
}

TEST_CASE("axis-angle round trip and exact identity") {
  CHECK(axis_angle_to_matrix(Vec3::Zero()) == Mat3::Identity());
  testing::Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    Vec3 aa(testing::uniform(rng, -1, 1), testing::uniform(rng, -1, 1), testing::uniform(rng, -1, 1));
    aa = aa.normalized() * testing::uniform(rng, 1e-3, std::numbers::pi - 1e-3);
    const Mat3 r = axis_angle_to_matrix(aa);
    const Mat3 ref = Eigen::AngleAxisd(aa.norm(), aa.normalized()).toRotationMatrix();
    REQUIRE((r - ref).norm() <= 1e-12);
    REQUIRE((matrix_to_axis_angle(r) - aa).norm() <= 1e-9);
  }
  const Mat3 z90 = rot_z(std::numbers::pi / 2);
  CHECK((axis_angle_to_matrix({0, 0, std::numbers::pi / 2}) - z90).norm() <= 1e-15);
}

TEST_CASE("global rotation equivariance") {
  const auto& m = fixture();
  testing::Rng rng(19);
  for (int trial = 0; trial < 5; ++trial) {
    const auto beta = testing::random_beta(rng, m.shape_count());
    auto pose = testing::random_pose(rng, m.joint_count(), 0.7);
    pose.root_translation = {0.1, -0.2, 0.3};
    const Vec3 extra(testing::uniform(rng, -1, 1), testing::uniform(rng, -1, 1), 0.2);
    const Mat3 r_extra = axis_angle_to_matrix(extra);
    const Vec3 root = shaped_joints(m, beta)[0];

    auto rotated_pose = pose;
    rotated_pose.joint_rotations[0] =
        matrix_to_axis_angle(r_extra * axis_angle_to_matrix(pose.joint_rotations[0]));
    rotated_pose.root_translation = r_extra * (root + pose.root_translation) - root;

    const auto a = build_posed_mesh(m, beta, pose);
    const auto b = build_posed_mesh(m, beta, rotated_pose);
    double worst = 0.0;
    for (std::size_t v = 0; v < m.vertex_count(); ++v) {
      worst = std::max(worst, (r_extra * a.vertices[v] - b.vertices[v]).norm());
    }
    CHECK(worst <= 1e-5);
  }
}

TEST_CASE("pose dimension mismatch names the field") {
  const auto& m = fixture();
  auto pose = PoseSpec::identity(m.joint_count() - 1);
  try {
    pose_mesh(m, m.vertices_template, pose);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    CHECK(e.path() == "pose.joint_rotations");
  }
}

TEST_CASE("validate catches broken invariants") {
  auto m = chain_model();
  CHECK_NOTHROW(m.validate());
  auto bad_face = m;
  bad_face.faces[0][2] = 3;
  CHECK_THROWS_AS(bad_face.validate(), ValidationError);
  auto bad_parent = m;
  bad_parent.parents[1] = 1;
  CHECK_THROWS_AS(bad_parent.validate(), ValidationError);
  auto bad_weights = m;
  bad_weights.skin_weights[0] = {{0, 0.5}, {1, 0.4}};
  CHECK_THROWS_AS(bad_weights.validate(), ValidationError);
  auto negative = m;
  negative.skin_weights[0] = {{0, 1.5}, {1, -0.5}};
  CHECK_THROWS_AS(negative.validate(), ValidationError);
  auto short_basis = m;
  short_basis.shape_basis[0].pop_back();
  CHECK_THROWS_AS(short_basis.validate(), ValidationError);
}

}  // TEST_SUITE
