#include "occond/json_io.hpp"

#include <cmath>
#include <optional>

#include "occond/error.hpp"
#include "occond/image_io.hpp"

namespace occond::io {

namespace {

// A JSON value together with its location in the document, so every
// schema error can name the offending field.
class Node {
 public:
  Node(const json& value, std::string path) : value_(&value), path_(std::move(path)) {}

  const json& value() const { return *value_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& message) const { throw ValidationError(path_, message); }

  std::string child_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  std::optional<Node> find(const std::string& key) const {
    require_object();
    const auto it = value_->find(key);
    if (it == value_->end() || it->is_null()) return std::nullopt;
    return Node(*it, child_path(key));
  }

  Node at(const std::string& key) const {
    auto n = find(key);
    if (!n) throw ValidationError(child_path(key), "missing required field");
    return *n;
  }

  std::size_t size() const { return require_array().size(); }

  Node operator[](std::size_t i) const {
    return Node(require_array()[i], path_ + "[" + std::to_string(i) + "]");
  }

  double number() const {
    if (!value_->is_number()) fail("expected a number");
    const double v = value_->get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }

  int integer() const {
    if (!value_->is_number_integer()) fail("expected an integer");
    return value_->get<int>();
  }

  std::string string() const {
    if (!value_->is_string()) fail("expected a string");
    return value_->get<std::string>();
  }

  std::vector<double> numbers() const {
    std::vector<double> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back((*this)[i].number());
    return out;
  }

  std::vector<double> numbers(std::size_t expected) const {
    if (size() != expected) {
      fail("expected " + std::to_string(expected) + " values, got " + std::to_string(size()));
    }
    return numbers();
  }

  body::Vec3 vec3() const {
    const auto v = numbers(3);
    return {v[0], v[1], v[2]};
  }

  std::vector<body::Vec3> vec3_list() const {
    std::vector<body::Vec3> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back((*this)[i].vec3());
    return out;
  }

  void require_object() const {
    if (!value_->is_object()) fail("expected an object");
  }

  const json& require_array() const {
    if (!value_->is_array()) fail("expected an array");
    return *value_;
  }

  void expect_version(const char* schema) const {
    const auto v = at("version").string();
    if (v != schema) {
      throw ValidationError(child_path("version"),
                            "expected '" + std::string(schema) + "', got '" + v + "'");
    }
  }

 private:
  const json* value_;
  std::string path_;
};

json vec3_json(const body::Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json vec3_list_json(const std::vector<body::Vec3>& vs) {
  json out = json::array();
  for (const auto& v : vs) out.push_back(vec3_json(v));
  return out;
}

body::PoseSpec pose_from_json(const Node& node) {
  body::PoseSpec pose;
  if (auto t = node.find("root_translation")) pose.root_translation = t->vec3();
  pose.joint_rotations = node.at("joint_rotations").vec3_list();
  return pose;
}

json pose_to_json(const body::PoseSpec& pose) {
  return {{"root_translation", vec3_json(pose.root_translation)},
          {"joint_rotations", vec3_list_json(pose.joint_rotations)}};
}

}  // namespace

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(source, std::string("invalid JSON: ") + e.what());
  }
}

json load_json(const std::filesystem::path& path) {
  return parse_json(read_text(path), path.string());
}

// ---- body model ---------------------------------------------------------

json body_model_to_json(const body::BodyModel& model) {
  json faces = json::array();
  for (const auto& f : model.faces) faces.push_back(json::array({f[0], f[1], f[2]}));
  json basis = json::array();
  for (const auto& b : model.shape_basis) basis.push_back(vec3_list_json(b));
  json skin = json::array();
  for (const auto& ws : model.skin_weights) {
    json entry = json::array();
    for (const auto& w : ws) entry.push_back(json::array({w.joint, w.weight}));
    skin.push_back(std::move(entry));
  }
  json doc = {
      {"version", kBodySchema},
      {"units", "meters"},
      {"vertices", vec3_list_json(model.vertices_template)},
      {"faces", std::move(faces)},
      {"shape_basis", std::move(basis)},
      {"joints_rest", vec3_list_json(model.joints_rest)},
      {"parents", model.parents},
      {"skin_weights", std::move(skin)},
  };
  if (!model.joint_shape_basis.empty()) {
    json jb = json::array();
    for (const auto& b : model.joint_shape_basis) jb.push_back(vec3_list_json(b));
    doc["joint_shape_basis"] = std::move(jb);
  }
  if (!model.joint_names.empty()) doc["joint_names"] = model.joint_names;
  return doc;
}

body::BodyModel body_model_from_json(const json& doc) {
  const Node root(doc, "");
  root.expect_version(kBodySchema);
  body::BodyModel model;
  model.vertices_template = root.at("vertices").vec3_list();

  const Node faces = root.at("faces");
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const Node f = faces[i];
    if (f.size() != 3) f.fail("expected 3 vertex indices");
    body::Face face{};
    for (std::size_t k = 0; k < 3; ++k) {
      const int idx = f[k].integer();
      if (idx < 0) f[k].fail("negative vertex index");
      face[k] = static_cast<std::uint32_t>(idx);
    }
    model.faces.push_back(face);
  }

  const Node basis = root.at("shape_basis");
  for (std::size_t k = 0; k < basis.size(); ++k) model.shape_basis.push_back(basis[k].vec3_list());
  if (auto jb = root.find("joint_shape_basis")) {
    for (std::size_t k = 0; k < jb->size(); ++k) {
      model.joint_shape_basis.push_back((*jb)[k].vec3_list());
    }
  }
  model.joints_rest = root.at("joints_rest").vec3_list();

  const Node parents = root.at("parents");
  for (std::size_t j = 0; j < parents.size(); ++j) model.parents.push_back(parents[j].integer());

  const Node skin = root.at("skin_weights");
  for (std::size_t v = 0; v < skin.size(); ++v) {
    std::vector<body::SkinWeight> ws;
    const Node entry = skin[v];
    for (std::size_t i = 0; i < entry.size(); ++i) {
      const Node pair = entry[i];
      if (pair.size() != 2) pair.fail("expected [joint, weight]");
      ws.push_back({pair[0].integer(), pair[1].number()});
    }
    model.skin_weights.push_back(std::move(ws));
  }
  if (auto names = root.find("joint_names")) {
    for (std::size_t j = 0; j < names->size(); ++j) {
      model.joint_names.push_back((*names)[j].string());
    }
  }
  model.validate();
  return model;
}

std::string serialize_body_model(const body::BodyModel& model) {
  return body_model_to_json(model).dump() + "\n";
}

void save_body_model(const std::filesystem::path& path, const body::BodyModel& model) {
  write_text(path, serialize_body_model(model));
}

body::BodyModel load_body_model(const std::filesystem::path& path) {
  return body_model_from_json(load_json(path));
}

body::BodyModel resolve_model_ref(const std::string& ref, const std::filesystem::path& base_dir) {
  const std::string prefix = kFixturePrefix;
  if (ref.rfind(prefix, 0) == 0) {
    std::string preset = ref.substr(prefix.size());
    int detail = 2;
    if (const auto at = preset.find('@'); at != std::string::npos) {
      try {
        detail = std::stoi(preset.substr(at + 1));
      } catch (const std::exception&) {
        throw ValidationError("model_ref", "bad detail level in '" + ref + "'");
      }
      preset = preset.substr(0, at);
    }
    return body::make_fixture_body(preset, detail);
  }
  std::filesystem::path p(ref);
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  return load_body_model(p);
}

// ---- scene --------------------------------------------------------------

json camera_to_json(const scene::Camera& c) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r) rot.push_back(json::array({c.rotation(r, 0), c.rotation(r, 1), c.rotation(r, 2)}));
  return {{"fx", c.fx},         {"fy", c.fy},         {"cx", c.cx},
          {"cy", c.cy},         {"width", c.width},   {"height", c.height},
          {"rotation", rot},    {"translation", vec3_json(c.translation)},
          {"near", c.near},     {"depth_clip", c.depth_clip}};
}

scene::Camera camera_from_json(const json& doc, const std::string& path) {
  const Node node(doc, path);
  scene::Camera cam;
  cam.fx = node.at("fx").number();
  cam.fy = node.at("fy").number();
  cam.cx = node.at("cx").number();
  cam.cy = node.at("cy").number();
  cam.width = node.at("width").integer();
  cam.height = node.at("height").integer();
  if (auto rot = node.find("rotation")) {
    if (rot->size() == 3 && (*rot)[0].value().is_array()) {
      for (int r = 0; r < 3; ++r) {
        const body::Vec3 row = (*rot)[r].vec3();
        cam.rotation.row(r) = row.transpose();
      }
    } else {
      cam.rotation = body::axis_angle_to_matrix(rot->vec3());
    }
  }
  if (auto t = node.find("translation")) cam.translation = t->vec3();
  if (auto n = node.find("near")) cam.near = n->number();
  if (auto d = node.find("depth_clip")) cam.depth_clip = d->number();
  return cam;
}

json scene_to_json(const scene::SceneSpec& spec) {
  json humans = json::array();
  for (const auto& h : spec.humans) {
    json hj = {{"beta", h.beta.betas}, {"pose", pose_to_json(h.pose)}};
    if (h.face_landmarks) {
      json lm = json::array();
      for (const auto& p : *h.face_landmarks) lm.push_back(json::array({p.x(), p.y()}));
      hj["face_landmarks"] = std::move(lm);
    }
    humans.push_back(std::move(hj));
  }
  return {{"version", kSceneSchema},
          {"model_ref", spec.model_ref},
          {"camera", camera_to_json(spec.camera)},
          {"humans", std::move(humans)}};
}

scene::SceneSpec scene_from_json(const json& doc) {
  const Node root(doc, "");
  root.expect_version(kSceneSchema);
  scene::SceneSpec spec;
  spec.model_ref = root.at("model_ref").string();
  const Node cam = root.at("camera");
  cam.require_object();
  spec.camera = camera_from_json(cam.value(), cam.path());
  const Node humans = root.at("humans");
  for (std::size_t i = 0; i < humans.size(); ++i) {
    const Node h = humans[i];
    scene::HumanSpec human;
    const auto beta_node = h.find("betas") && !h.find("beta") ? h.at("betas") : h.at("beta");
    human.beta.betas = beta_node.numbers();
    human.pose = pose_from_json(h.at("pose"));
    if (auto lm = h.find("face_landmarks")) {
      if (lm->size() != 5) lm->fail("expected exactly 5 landmarks, got " + std::to_string(lm->size()));
      std::array<Eigen::Vector2d, 5> pts;
      for (std::size_t k = 0; k < 5; ++k) {
        const auto xy = (*lm)[k].numbers(2);
        pts[k] = {xy[0], xy[1]};
      }
      human.face_landmarks = pts;
    }
    spec.humans.push_back(std::move(human));
  }
  return spec;
}

scene::SceneSpec load_scene(const std::filesystem::path& path) {
  return scene_from_json(load_json(path));
}

void save_scene(const std::filesystem::path& path, const scene::SceneSpec& spec) {
  write_text(path, scene_to_json(spec).dump(2) + "\n");
}

body::ShapeVector shape_from_json(const json& doc, const std::string& path) {
  const Node root(doc, path);
  body::ShapeVector s;
  s.betas = root.at("betas").numbers();
  return s;
}

json shape_to_json(const body::ShapeVector& shape) { return {{"betas", shape.betas}}; }

// ---- evaluation -----------------------------------------------------------

namespace {

metrics::EvalHuman eval_human_from_json(const Node& h) {
  metrics::EvalHuman out;
  if (auto b = h.find("betas")) out.betas = b->numbers();
  if (auto e = h.find("embedding")) out.embedding = e->numbers();
  if (auto j = h.find("joints3d_mm")) out.joints3d_mm = j->vec3_list();
  if (auto k = h.find("keypoints2d")) {
    metrics::Keypoints2D kp;
    kp.scale = k->at("scale").number();
    if (!(kp.scale > 0.0)) k->at("scale").fail("must be > 0");
    const Node pts = k->at("points");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Node p = pts[i];
      if (p.size() != 3) p.fail("expected [u, v, visibility]");
      const int vis = p[2].integer();
      if (vis != 0 && vis != 1) p[2].fail("visibility must be 0 or 1");
      kp.points.push_back({p[0].number(), p[1].number(), vis});
    }
    out.keypoints2d = std::move(kp);
  }
  return out;
}

json eval_human_to_json(const metrics::EvalHuman& h) {
  json out = json::object();
  if (h.betas) out["betas"] = *h.betas;
  if (h.embedding) out["embedding"] = *h.embedding;
  if (h.joints3d_mm) out["joints3d_mm"] = vec3_list_json(*h.joints3d_mm);
  if (h.keypoints2d) {
    json pts = json::array();
    for (const auto& p : h.keypoints2d->points) pts.push_back(json::array({p.u, p.v, p.visible}));
    out["keypoints2d"] = {{"scale", h.keypoints2d->scale}, {"points", std::move(pts)}};
  }
  return out;
}

}  // namespace

metrics::EvalDataset eval_dataset_from_json(const json& doc) {
  const Node root(doc, "");
  root.expect_version(kEvalSchema);
  metrics::EvalDataset out;
  const Node images = root.at("images");
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Node img = images[i];
    metrics::EvalImage image;
    image.id = img.find("id") ? img.at("id").string() : std::to_string(i);
    for (const char* side : {"reference", "generated"}) {
      const Node humans = img.at(side);
      auto& dst = std::string(side) == "reference" ? image.reference : image.generated;
      for (std::size_t j = 0; j < humans.size(); ++j) dst.push_back(eval_human_from_json(humans[j]));
    }
    out.images.push_back(std::move(image));
  }
  return out;
}

json eval_dataset_to_json(const metrics::EvalDataset& dataset) {
  json images = json::array();
  for (const auto& img : dataset.images) {
    json ref = json::array(), gen = json::array();
    for (const auto& h : img.reference) ref.push_back(eval_human_to_json(h));
    for (const auto& h : img.generated) gen.push_back(eval_human_to_json(h));
    images.push_back({{"id", img.id}, {"reference", std::move(ref)}, {"generated", std::move(gen)}});
  }
  return {{"version", kEvalSchema}, {"images", std::move(images)}};
}

json report_to_json(const metrics::MetricReport& report) {
  json summary = json::object();
  json per_image = json::array();
  for (std::size_t i = 0; i < report.image_ids.size(); ++i) {
    per_image.push_back({{"id", report.image_ids[i]}});
  }
  if (report.s_face) {
    summary["s_face"] = report.s_face->value;
    for (std::size_t i = 0; i < per_image.size(); ++i) per_image[i]["s_face"] = report.s_face->per_image[i];
  }
  if (report.s_body) {
    summary["s_body"] = report.s_body->value;
    for (std::size_t i = 0; i < per_image.size(); ++i) per_image[i]["s_body"] = report.s_body->per_image[i];
  }
  json counts = json::object();
  if (report.mpjpe) {
    summary["mpjpe_mm"] = report.mpjpe->mpjpe_mm;
    for (std::size_t i = 0; i < per_image.size(); ++i) {
      const auto& v = report.mpjpe->per_image[i];
      per_image[i]["mpjpe_mm"] = v ? json(*v) : json(nullptr);
    }
    counts["matched_humans"] = report.mpjpe->matched;
    counts["unmatched_humans"] = report.mpjpe->unmatched;
  }
  if (report.ap) {
    summary["ap"] = report.ap->ap;
    for (std::size_t i = 0; i < per_image.size(); ++i) {
      const auto& a = report.ap->per_image[i];
      per_image[i]["ap"] = a.ap;
      per_image[i]["true_positives"] = a.true_positives;
      per_image[i]["denominator"] = a.denominator;
    }
  }
  json metric_names = json::array();
  for (auto m : report.options.metrics) metric_names.push_back(metrics::to_string(m));
  const auto& ap = report.options.ap;
  json config = {
      {"metrics", metric_names},
      {"root_joint", report.options.mpjpe.root_joint},
      {"root_aligned", report.options.mpjpe.root_align},
      {"oks_threshold", ap.threshold},
      {"sigmas", ap.sigmas.empty() ? json(ap.default_sigma) : json(ap.sigmas)},
      {"matching_3d", "greedy ascending root-joint distance, ties to lower index"},
      {"matching_2d", "greedy descending OKS, ties to lower index"},
      {"ap_convention", "single threshold; TP / max(#targets, #predictions), pooled over images"},
      {"averaging", "mean over humans per image, then mean over images"},
  };
  return {{"version", "occond-report/1"}, {"summary", summary},       {"per_image", per_image},
          {"counts", counts},             {"config", config},         {"warnings", report.warnings}};
}

}  // namespace occond::io
