#include "conepush/scene.hpp"

#include "conepush/error.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace conepush {

using nlohmann::json;

namespace {

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path + "." + key, "missing field");
  return *it;
}

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ParseError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ParseError(path, "expected a finite number");
  return d;
}

template <std::size_t N>
std::array<double, N> get_array(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != N)
    throw ParseError(path, "expected an array of " + std::to_string(N) + " numbers");
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = get_number(v[i], path + "[" + std::to_string(i) + "]");
  return out;
}

std::string get_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ParseError(path, "expected a string");
  return v.get<std::string>();
}

Vec2 mm2(const std::array<double, 2>& a) { return {mm_to_m(a[0]), mm_to_m(a[1])}; }

PlanarPose pose_of(const std::array<double, 3>& a) {
  return PlanarPose::from_mm_deg(a[0], a[1], a[2]);
}

}  // namespace

bool ConfigBounds::contains(const PlanarPose& q) const {
  const Vec3 v(q.x(), q.z(), q.theta());
  return (v.array() >= lo.array()).all() && (v.array() <= hi.array()).all();
}

GraspModel Scene::grasp_for(std::size_t pusher) const {
  return with_gravity_along_pusher(grasp, pushers.at(pusher), gravity_magnitude);
}

std::optional<std::size_t> Scene::pusher_index(const std::string& id) const {
  for (std::size_t i = 0; i < pushers.size(); ++i)
    if (pushers[i].id == id) return i;
  return std::nullopt;
}

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  int line = 1;
  for (std::size_t i = 0; i < offset; ++i)
    if (text[i] == '\n') ++line;
  return line;
}

namespace {

// Best-effort source line for a field path like "pushers[2].mu_p": the n-th
// occurrence of the last key, where n is the last array index in the path.
int locate_field_line(const std::string& text, const std::string& field) {
  if (field.empty()) return 0;
  std::string key = field.substr(field.find_last_of('.') == std::string::npos ? 0 : field.find_last_of('.') + 1);
  key = key.substr(0, key.find('['));
  std::size_t nth = 0;
  const std::size_t open = field.find_last_of('[');
  if (open != std::string::npos && field.find('.', open) != std::string::npos)
    nth = std::stoul(field.substr(open + 1));
  const std::string needle = "\"" + key + "\"";
  std::size_t pos = text.find(needle);
  for (std::size_t i = 0; i < nth && pos != std::string::npos; ++i) pos = text.find(needle, pos + 1);
  if (pos != std::string::npos) return line_of_offset(text, pos);
  // Missing key: fall back to the enclosing object.
  const std::size_t dot = field.find_last_of('.');
  return dot == std::string::npos ? 0 : locate_field_line(text, field.substr(0, dot));
}

SceneSpec parse_scene_fields(const json& doc);

}  // namespace

SceneSpec parse_scene(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("", e.what(), line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0));
  }
  if (!doc.is_object()) throw ParseError("", "scene must be a JSON object", 1);
  try {
    return parse_scene_fields(doc);
  } catch (const ParseError& e) {
    if (e.line() > 0) throw;
    const std::string what = e.what();
    const std::string detail = what.substr(what.find(": ") + 2);
    throw ParseError(e.field(), detail, locate_field_line(text, e.field()));
  }
}

namespace {

SceneSpec parse_scene_fields(const json& doc) {
  SceneSpec s;
  s.format_version = static_cast<int>(get_number(require(doc, "format_version", ""), "format_version"));
  if (s.format_version != kSceneFormatVersion)
    throw ParseError("format_version", "unsupported version " + std::to_string(s.format_version));

  const json& obj = require(doc, "object", "");
  s.object.name = get_string(require(obj, "name", "object"), "object.name");
  const json& poly = require(obj, "polygon_mm", "object");
  if (!poly.is_array()) throw ParseError("object.polygon_mm", "expected an array of points");
  for (std::size_t i = 0; i < poly.size(); ++i)
    s.object.polygon_mm.push_back(get_array<2>(poly[i], "object.polygon_mm[" + std::to_string(i) + "]"));
  s.object.mass_g = get_number(require(obj, "mass_g", "object"), "object.mass_g");

  const json& f = require(doc, "fingers", "");
  s.fingers.center_mm = get_array<2>(require(f, "center_mm", "fingers"), "fingers.center_mm");
  s.fingers.radius_mm = get_number(require(f, "radius_mm", "fingers"), "fingers.radius_mm");
  if (f.contains("c")) s.fingers.c = get_number(f["c"], "fingers.c");
  s.fingers.mu_c = get_number(require(f, "mu_c", "fingers"), "fingers.mu_c");
  s.fingers.normal_force_n = get_number(require(f, "normal_force_n", "fingers"), "fingers.normal_force_n");

  const json& ps = require(doc, "pushers", "");
  if (!ps.is_array()) throw ParseError("pushers", "expected an array");
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const std::string path = "pushers[" + std::to_string(i) + "]";
    const json& p = ps[i];
    PusherSpec spec;
    spec.id = get_string(require(p, "id", path), path + ".id");
    const double face = get_number(require(p, "face", path), path + ".face");
    if (face != std::floor(face)) throw ParseError(path + ".face", "expected an integer");
    spec.face = static_cast<int>(face);
    spec.position_mm = get_number(require(p, "position_mm", path), path + ".position_mm");
    spec.type = get_string(require(p, "type", path), path + ".type");
    if (p.contains("length_mm")) spec.length_mm = get_number(p["length_mm"], path + ".length_mm");
    spec.mu_p = get_number(require(p, "mu_p", path), path + ".mu_p");
    if (p.contains("gravity_aligned")) {
      if (!p["gravity_aligned"].is_boolean())
        throw ParseError(path + ".gravity_aligned", "expected a boolean");
      spec.gravity_aligned = p["gravity_aligned"].get<bool>();
    }
    s.pushers.push_back(spec);
  }

  if (doc.contains("gravity_mps2")) s.gravity_mps2 = get_number(doc["gravity_mps2"], "gravity_mps2");

  const json& b = require(doc, "bounds", "");
  s.bounds.x_mm = get_array<2>(require(b, "x_mm", "bounds"), "bounds.x_mm");
  s.bounds.z_mm = get_array<2>(require(b, "z_mm", "bounds"), "bounds.z_mm");
  s.bounds.theta_deg = get_array<2>(require(b, "theta_deg", "bounds"), "bounds.theta_deg");

  if (doc.contains("initial")) s.initial = get_array<3>(doc["initial"], "initial");
  if (doc.contains("goal") && !doc["goal"].is_null()) s.goal = get_array<3>(doc["goal"], "goal");
  return s;
}

}  // namespace

json scene_to_json(const SceneSpec& s) {
  json poly = json::array();
  for (const auto& v : s.object.polygon_mm) poly.push_back({v[0], v[1]});
  json pushers = json::array();
  for (const PusherSpec& p : s.pushers) {
    pushers.push_back({{"id", p.id},
                       {"face", p.face},
                       {"position_mm", p.position_mm},
                       {"type", p.type},
                       {"length_mm", p.length_mm},
                       {"mu_p", p.mu_p},
                       {"gravity_aligned", p.gravity_aligned}});
  }
  json doc = {
      {"format_version", s.format_version},
      {"object", {{"name", s.object.name}, {"polygon_mm", poly}, {"mass_g", s.object.mass_g}}},
      {"fingers",
       {{"center_mm", s.fingers.center_mm},
        {"radius_mm", s.fingers.radius_mm},
        {"c", s.fingers.c},
        {"mu_c", s.fingers.mu_c},
        {"normal_force_n", s.fingers.normal_force_n}}},
      {"pushers", pushers},
      {"gravity_mps2", s.gravity_mps2},
      {"bounds",
       {{"x_mm", s.bounds.x_mm}, {"z_mm", s.bounds.z_mm}, {"theta_deg", s.bounds.theta_deg}}},
      {"initial", s.initial},
  };
  if (s.goal) doc["goal"] = *s.goal;
  return doc;
}

Scene compile_scene(const SceneSpec& s) {
  std::vector<Vec2> verts;
  for (const auto& v : s.object.polygon_mm) verts.push_back(mm2(v));
  std::optional<Polygon2D> polygon;
  try {
    polygon.emplace(verts);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("object.polygon_mm: ") + e.what());
  }
  if (!(s.object.mass_g > 0.0)) throw ValidationError("object.mass_g must be positive");
  if (!(s.fingers.mu_c > 0.0))
    throw ValidationError("fingers.mu_c must be positive (the grasp cannot transmit a wrench)");
  if (!(s.gravity_mps2 > 0.0)) throw ValidationError("gravity_mps2 must be positive");

  std::optional<LimitSurfaceModel> finger;
  try {
    finger.emplace(s.fingers.mu_c, s.fingers.normal_force_n, mm_to_m(s.fingers.radius_mm),
                   s.fingers.c);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("fingers: ") + e.what());
  }

  Scene scene{.name = s.object.name,
              .polygon = *polygon,
              .grasp = GraspModel{.finger = *finger,
                                  .finger_center = mm2(s.fingers.center_mm),
                                  .object_mass = s.object.mass_g / 1000.0,
                                  .com = polygon->centroid(),
                                  .gravity = Vec2::Zero()},
              .gravity_magnitude = s.gravity_mps2,
              .pushers = {},
              .pusher_cones = {},
              .bounds = {},
              .initial = {},
              .goal = std::nullopt};

  std::set<std::string> ids;
  for (std::size_t i = 0; i < s.pushers.size(); ++i) {
    const PusherSpec& ps = s.pushers[i];
    const std::string path = "pushers[" + std::to_string(i) + "]";
    if (ps.id.empty()) throw ValidationError(path + ".id must not be empty");
    if (!ids.insert(ps.id).second) throw ValidationError(path + ".id '" + ps.id + "' is not unique");
    if (ps.face < 0 || static_cast<std::size_t>(ps.face) >= scene.polygon.size())
      throw ValidationError(path + ".face index out of range");
    if (!(ps.mu_p >= 0.0)) throw ValidationError(path + ".mu_p must be non-negative");

    const auto [a, b] = scene.polygon.edge(static_cast<std::size_t>(ps.face));
    const Vec2 dir = (b - a).normalized();
    const Vec2 normal = scene.polygon.inward_normal(static_cast<std::size_t>(ps.face));
    const Vec2 center = a + dir * mm_to_m(ps.position_mm);

    Pusher p;
    p.id = ps.id;
    p.face = ps.face;
    p.face_start = a;
    p.face_end = b;
    p.gravity_aligned = ps.gravity_aligned;
    if (ps.type == "point") {
      p.contacts.push_back({center, normal, ps.mu_p});
    } else if (ps.type == "line") {
      if (!(ps.length_mm > 0.0)) throw ValidationError(path + ".length_mm must be positive");
      const Vec2 half = dir * (mm_to_m(ps.length_mm) / 2.0);
      p.contacts.push_back({center - half, normal, ps.mu_p});
      p.contacts.push_back({center + half, normal, ps.mu_p});
    } else {
      throw ValidationError(path + ".type must be 'point' or 'line'");
    }
    try {
      check_pusher_on_face(p);
    } catch (const ContactOffObject& e) {
      throw ValidationError(path + ": pusher contacts must lie inside face " +
                            std::to_string(ps.face) + " (" + e.what() + ")");
    }
    scene.pushers.push_back(p);
    scene.pusher_cones.push_back(generalized_friction_cone(p));

    if (p.gravity_aligned) {
      const GraspModel g = scene.grasp_for(scene.pushers.size() - 1);
      if (!cone_contains(scene.pusher_cones.back(), -g.gravity_wrench().v))
        throw ValidationError(path + ": gravity-aligned pusher cannot carry the object's weight "
                                     "(center of mass outside its support)");
    }
  }

  auto range = [](const std::array<double, 2>& r, const std::string& name) {
    if (!(r[0] <= r[1])) throw ValidationError("bounds." + name + " must satisfy lo <= hi");
  };
  range(s.bounds.x_mm, "x_mm");
  range(s.bounds.z_mm, "z_mm");
  range(s.bounds.theta_deg, "theta_deg");
  scene.bounds.lo = Vec3(mm_to_m(s.bounds.x_mm[0]), mm_to_m(s.bounds.z_mm[0]),
                         deg_to_rad(s.bounds.theta_deg[0]));
  scene.bounds.hi = Vec3(mm_to_m(s.bounds.x_mm[1]), mm_to_m(s.bounds.z_mm[1]),
                         deg_to_rad(s.bounds.theta_deg[1]));

  scene.initial = pose_of(s.initial);
  if (s.goal) scene.goal = pose_of(*s.goal);
  return scene;
}

SceneSpec load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  SceneSpec spec = parse_scene(buf.str());
  compile_scene(spec);
  return spec;
}

void save_scene(const SceneSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scene file " + path.string());
  out << scene_to_json(spec).dump(2) << '\n';
  if (!out) throw IoError("failed writing scene file " + path.string());
}

}  // namespace conepush
