#pragma once

// Scene description. SceneSpec mirrors the file (mm, g, deg) and round-trips
// losslessly; Scene is the validated SI form the mechanics and planner use.

#include "conepush/cone.hpp"
#include "conepush/contact.hpp"
#include "conepush/geom.hpp"
#include "conepush/mechanics.hpp"

#include <json.hpp>

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace conepush {

constexpr int kSceneFormatVersion = 1;

struct ObjectSpec {
  std::string name;
  std::vector<std::array<double, 2>> polygon_mm;
  double mass_g = 0.0;

  bool operator==(const ObjectSpec&) const = default;
};

struct FingerSpec {
  std::array<double, 2> center_mm{0.0, 0.0};
  double radius_mm = 0.0;
  double c = 0.6;
  double mu_c = 0.0;
  double normal_force_n = 0.0;

  bool operator==(const FingerSpec&) const = default;
};

struct PusherSpec {
  std::string id;
  int face = 0;
  /// Distance along the face, from its first vertex to the pusher center.
  double position_mm = 0.0;
  /// "point" or "line".
  std::string type = "line";
  /// Line pusher length; ignored for point pushers.
  double length_mm = 0.0;
  double mu_p = 0.0;
  bool gravity_aligned = true;

  bool operator==(const PusherSpec&) const = default;
};

struct BoundsSpec {
  std::array<double, 2> x_mm{0.0, 0.0};
  std::array<double, 2> z_mm{0.0, 0.0};
  std::array<double, 2> theta_deg{-180.0, 180.0};

  bool operator==(const BoundsSpec&) const = default;
};

struct SceneSpec {
  int format_version = kSceneFormatVersion;
  ObjectSpec object;
  FingerSpec fingers;
  std::vector<PusherSpec> pushers;
  double gravity_mps2 = 9.81;
  BoundsSpec bounds;
  std::array<double, 3> initial{0.0, 0.0, 0.0};
  std::optional<std::array<double, 3>> goal;

  bool operator==(const SceneSpec&) const = default;
};

/// Axis-aligned box over (x, z, theta) in SI.
struct ConfigBounds {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  bool contains(const PlanarPose& q) const;
};

struct Scene {
  std::string name;
  Polygon2D polygon;
  /// Grasp with zero gravity; use grasp_for() for a pusher-aligned copy.
  GraspModel grasp;
  double gravity_magnitude = 9.81;
  std::vector<Pusher> pushers;
  /// Generalized friction cone of each pusher (fixed in the object frame).
  std::vector<PolyhedralCone> pusher_cones;
  ConfigBounds bounds;
  PlanarPose initial;
  std::optional<PlanarPose> goal;

  /// Half the object's bounding-box diagonal (m); the default angular weight.
  double characteristic_length() const { return polygon.half_diagonal(); }
  /// Grasp with gravity aligned against pusher i's inward normal.
  GraspModel grasp_for(std::size_t pusher) const;
  std::optional<std::size_t> pusher_index(const std::string& id) const;
};

/// Validates and converts to SI. Throws ValidationError naming the violated invariant.
Scene compile_scene(const SceneSpec& spec);

/// Throws ParseError (with field and line) on malformed input.
SceneSpec parse_scene(const std::string& text);
nlohmann::json scene_to_json(const SceneSpec& spec);

/// Parses and validates a scene file. Throws IoError, ParseError or ValidationError.
SceneSpec load_scene(const std::filesystem::path& path);
void save_scene(const SceneSpec& spec, const std::filesystem::path& path);

/// 1-based line of a byte offset in `text`.
int line_of_offset(const std::string& text, std::size_t offset);

}  // namespace conepush
