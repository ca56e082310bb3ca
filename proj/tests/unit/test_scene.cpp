#include <cmath>
#include <functional>
#include <limits>

#include "doctest.h"
#include "generators.hpp"
#include "occond/error.hpp"
#include "occond/json_io.hpp"
#include "occond/scene.hpp"

using namespace occond;
using namespace occond::scene;

namespace {

const body::BodyModel& model() {
  static const auto m = body::make_fixture_body("capsule-person");
  return m;
}

Camera simple_camera() {
  Camera c;
  c.fx = c.fy = 100;
  c.cx = c.cy = 50;
  c.width = c.height = 100;
  return c;
}

bool has_path(const std::vector<Violation>& vs, const std::string& path) {
  for (const auto& v : vs) {
    if (v.path == path) return true;
  }
  return false;
}

}  // namespace

TEST_SUITE("scene") {

TEST_CASE("project: on-axis and off-axis points") {
  const auto cam = simple_camera();
  auto p = project(cam, {0, 0, 2});
  REQUIRE(p);
  CHECK(p->u == 50.0);
  CHECK(p->v == 50.0);
  CHECK(p->depth == 2.0);
  p = project(cam, {1, 0, 2});
  REQUIRE(p);
  CHECK(p->u == 100.0);  // 100 * (1/2) + 50
  CHECK(p->v == 50.0);
  CHECK(p->depth == 2.0);
}

TEST_CASE("project: points at or behind the near plane are marked") {
  const auto cam = simple_camera();
  CHECK_FALSE(project(cam, {0, 0, 0}));
  CHECK_FALSE(project(cam, {0, 0, -1}));
  CHECK_FALSE(project(cam, {0, 0, cam.near}));
  CHECK(project(cam, {0, 0, 0.02}));
}

TEST_CASE("project is scale consistent") {
  const auto cam = simple_camera();
  testing::Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const double x = testing::uniform(rng, -1, 1), y = testing::uniform(rng, -1, 1);
    const double z = testing::uniform(rng, 0.5, 4);
    const auto a = project(cam, {x, y, z});
    const auto b = project(cam, {2 * x, 2 * y, z});
    CHECK((b->u - cam.cx) == doctest::Approx(2 * (a->u - cam.cx)));
    CHECK((b->v - cam.cy) == doctest::Approx(2 * (a->v - cam.cy)));
  }
}

TEST_CASE("project applies the extrinsic") {
  auto cam = simple_camera();
  cam.translation = {0, 0, 3};
  const auto p = project(cam, {0, 0, -1});
  REQUIRE(p);
  CHECK(p->depth == 2.0);
}

TEST_CASE("fixture scene validates") {
  const auto spec = make_fixture_scene(model());
  CHECK(spec.humans.size() == 2);
  CHECK(find_violations(spec, model()).empty());
  CHECK_NOTHROW(validate_scene(spec, model()));
}

TEST_CASE("short beta is reported at humans[0].beta") {
  auto spec = make_fixture_scene(model());
  spec.humans[0].beta.betas.resize(9);
  const auto vs = find_violations(spec, model());
  CHECK(has_path(vs, "humans[0].beta"));
  try {
    validate_scene(spec, model());
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("humans[0].beta") != std::string::npos);
  }
}

TEST_CASE("empty human list is rejected") {
  auto spec = make_fixture_scene(model());
  spec.humans.clear();
  CHECK(has_path(find_violations(spec, model()), "humans"));
  CHECK_THROWS_AS(validate_scene(spec, model()), ValidationError);
}

// Single-field corruptions: every one must be caught, and the path must
// name the corrupted field.
TEST_CASE("single-field corruption fuzzing") {
  const auto good = make_fixture_scene(model());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  testing::Rng rng(99);

  struct Corruption {
    std::string path;
    std::function<void(SceneSpec&)> apply;
  };
  std::vector<Corruption> corruptions = {
      {"camera.fx", [](SceneSpec& s) { s.camera.fx = 0; }},
      {"camera.fx", [&](SceneSpec& s) { s.camera.fx = nan; }},
      {"camera.fy", [](SceneSpec& s) { s.camera.fy = -1; }},
      {"camera.cx", [&](SceneSpec& s) { s.camera.cx = inf; }},
      {"camera.cy", [&](SceneSpec& s) { s.camera.cy = nan; }},
      {"camera.width", [](SceneSpec& s) { s.camera.width = 0; }},
      {"camera.height", [](SceneSpec& s) { s.camera.height = -3; }},
      {"camera.near", [](SceneSpec& s) { s.camera.near = 0; }},
      {"camera.depth_clip", [](SceneSpec& s) { s.camera.depth_clip = s.camera.near; }},
      {"camera.translation", [&](SceneSpec& s) { s.camera.translation.x() = nan; }},
      {"camera.rotation", [&](SceneSpec& s) { s.camera.rotation(1, 1) = inf; }},
      {"humans[1].beta", [](SceneSpec& s) { s.humans[1].beta.betas.push_back(0); }},
      {"humans[0].beta", [&](SceneSpec& s) { s.humans[0].beta.betas[3] = nan; }},
      {"humans[1].pose.joint_rotations", [](SceneSpec& s) { s.humans[1].pose.joint_rotations.pop_back(); }},
      {"humans[0].pose.joint_rotations", [&](SceneSpec& s) { s.humans[0].pose.joint_rotations[2].y() = inf; }},
      {"humans[1].pose.root_translation", [&](SceneSpec& s) { s.humans[1].pose.root_translation.z() = nan; }},
      {"humans[0].face_landmarks", [&](SceneSpec& s) {
         std::array<Eigen::Vector2d, 5> lm;
         for (auto& p : lm) p = {10, 10};
         lm[4].x() = nan;
         s.humans[0].face_landmarks = lm;
       }},
  };
  for (const auto& c : corruptions) {
    CAPTURE(c.path);
    auto spec = good;
    c.apply(spec);
    const auto vs = find_violations(spec, model());
    REQUIRE_FALSE(vs.empty());
    bool named = false;
    for (const auto& v : vs) named = named || v.path.rfind(c.path, 0) == 0;
    CHECK(named);
  }

  // Random single-number perturbations that keep the value valid are accepted.
  for (int i = 0; i < 50; ++i) {
    auto spec = good;
    auto& h = spec.humans[testing::uniform_int(rng, 0, 1)];
    h.beta.betas[testing::uniform_int(rng, 0, 9)] = testing::uniform(rng, -3, 3);
    h.pose.joint_rotations[testing::uniform_int(rng, 0, 15)] = {testing::uniform(rng, -2, 2), 0, 0};
    CHECK(find_violations(spec, model()).empty());
  }
}

TEST_CASE("scene JSON round trip") {
  auto spec = make_fixture_scene(model(), 96, 64);
  std::array<Eigen::Vector2d, 5> lm;
  for (int i = 0; i < 5; ++i) lm[i] = {10.0 + i, 20.5};
  spec.humans[1].face_landmarks = lm;
  const auto back = io::scene_from_json(io::scene_to_json(spec));
  CHECK(io::scene_to_json(back) == io::scene_to_json(spec));
  CHECK(back.camera.rotation == spec.camera.rotation);
  CHECK(back.humans[1].face_landmarks->at(3).x() == 13.0);
}

TEST_CASE("scene JSON errors carry document paths") {
  auto doc = io::scene_to_json(make_fixture_scene(model()));
  SUBCASE("wrong landmark count") {
    doc["humans"][0]["face_landmarks"] = io::json::array({{1, 2}, {3, 4}});
    try {
      io::scene_from_json(doc);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(e.path() == "humans[0].face_landmarks");
    }
  }
  SUBCASE("missing camera field") {
    doc["camera"].erase("fx");
    try {
      io::scene_from_json(doc);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(e.path() == "camera.fx");
    }
  }
  SUBCASE("wrong type") {
    doc["humans"][1]["beta"][2] = "tall";
    try {
      io::scene_from_json(doc);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(e.path() == "humans[1].beta[2]");
    }
  }
  SUBCASE("wrong version") {
    doc["version"] = "occond-scene/0";
    CHECK_THROWS_AS(io::scene_from_json(doc), ValidationError);
  }
}

TEST_CASE("axis-angle camera rotation is accepted") {
  auto doc = io::scene_to_json(make_fixture_scene(model()));
  doc["camera"]["rotation"] = {3.141592653589793, 0.0, 0.0};
  const auto spec = io::scene_from_json(doc);
  CHECK(spec.camera.rotation(1, 1) == doctest::Approx(-1.0));
}

TEST_CASE("resized scales intrinsics with the image") {
  const auto cam = default_camera(512, 512);
  const auto half = resized(cam, 256, 256);
  CHECK(half.fx == cam.fx / 2);
  CHECK(half.cx == cam.cx / 2);
  CHECK(half.width == 256);
}

}  // TEST_SUITE
