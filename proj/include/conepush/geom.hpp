#pragma once

// Planar rigid-body kinematics in the grasp plane.
//
// Coordinates are (x, z) with theta the counter-clockwise rotation in that
// plane. All quantities are SI (m, rad); the *_mm / *_deg helpers exist for
// the file and command-line boundary only.

#include <Eigen/Dense>

#include <numbers>
#include <utility>
#include <vector>

namespace conepush {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

constexpr double kPi = std::numbers::pi;

constexpr double mm_to_m(double mm) { return mm / 1000.0; }
constexpr double m_to_mm(double m) { return m * 1000.0; }
constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle to (-pi, pi]. Values already in range are returned unchanged.
double normalize_angle(double rad);

/// 2-D cross product a.x * b.z - a.z * b.x.
inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Body twist [vx, vz, wy].
struct Twist {
  Vec3 v = Vec3::Zero();

  Twist() = default;
  Twist(double vx, double vz, double wy) : v(vx, vz, wy) {}
  explicit Twist(const Vec3& x) : v(x) {}

  double vx() const { return v[0]; }
  double vz() const { return v[1]; }
  double wy() const { return v[2]; }
  Vec2 linear() const { return v.head<2>(); }

  Twist operator*(double s) const { return Twist(v * s); }
  Twist operator-() const { return Twist(-v); }
  bool operator==(const Twist&) const = default;
};

/// Planar wrench [fx, fz, my].
struct Wrench {
  Vec3 v = Vec3::Zero();

  Wrench() = default;
  Wrench(double fx, double fz, double my) : v(fx, fz, my) {}
  explicit Wrench(const Vec3& x) : v(x) {}

  double fx() const { return v[0]; }
  double fz() const { return v[1]; }
  double my() const { return v[2]; }
  Vec2 force() const { return v.head<2>(); }

  Wrench operator*(double s) const { return Wrench(v * s); }
  Wrench operator-() const { return Wrench(-v); }
  Wrench operator+(const Wrench& o) const { return Wrench(v + o.v); }
  bool operator==(const Wrench&) const = default;
};

/// Rigid planar pose [x, z, theta]; theta is kept in (-pi, pi].
class PlanarPose {
 public:
  PlanarPose() = default;
  PlanarPose(double x, double z, double theta) : x_(x), z_(z), theta_(normalize_angle(theta)) {}

  static PlanarPose identity() { return {}; }
  static PlanarPose from_mm_deg(double x_mm, double z_mm, double theta_deg) {
    return {mm_to_m(x_mm), mm_to_m(z_mm), deg_to_rad(theta_deg)};
  }

  double x() const { return x_; }
  double z() const { return z_; }
  double theta() const { return theta_; }
  double x_mm() const { return m_to_mm(x_); }
  double z_mm() const { return m_to_mm(z_); }
  double theta_deg() const { return rad_to_deg(theta_); }

  Vec2 translation() const { return {x_, z_}; }
  Mat2 rotation() const;
  /// Homogeneous 3x3 matrix of the transform.
  Mat3 matrix() const;

  /// Maps a point given in this frame into the parent frame.
  Vec2 transform_point(const Vec2& p) const { return rotation() * p + translation(); }
  PlanarPose inverse() const;

  bool operator==(const PlanarPose&) const = default;

 private:
  double x_ = 0.0;
  double z_ = 0.0;
  double theta_ = 0.0;
};

/// Pose of frame b expressed through frame a (a * b).
PlanarPose compose(const PlanarPose& a, const PlanarPose& b);

/// Exponential-map integration of a constant body twist over dt.
PlanarPose integrate_twist(const PlanarPose& q, const Twist& v, double dt);

/// Body twist that carries `from` onto `to` in unit time; the inverse of
/// integrate_twist(from, ., 1) for relative rotations below pi.
Twist twist_between(const PlanarPose& from, const PlanarPose& to);

/// Adjoint map between planar frames. `matrix()` takes twists from the
/// parent (object) frame into the child (contact) frame; its transpose takes
/// child-frame wrenches back to the parent frame.
class FrameJacobian {
 public:
  explicit FrameJacobian(const Mat3& m) : m_(m) {}

  const Mat3& matrix() const { return m_; }
  double determinant() const { return m_.determinant(); }

  /// Object-frame twist -> contact-frame twist.
  Twist twist_map(const Twist& v) const { return Twist(m_ * v.v); }
  /// Contact-frame twist -> object-frame twist.
  Twist inverse_twist_map(const Twist& v) const;
  /// Contact-frame wrench -> object-frame wrench (transpose).
  Wrench wrench_map(const Wrench& w) const { return Wrench(m_.transpose() * w.v); }
  /// Object-frame wrench -> contact-frame wrench (inverse transpose).
  Wrench inverse_wrench_map(const Wrench& w) const;

 private:
  Mat3 m_;
};

FrameJacobian frame_jacobian(const PlanarPose& contact_pose_in_object);

/// Simple counter-clockwise polygon, implicitly closed.
class Polygon2D {
 public:
  Polygon2D() = default;
  /// Throws std::invalid_argument unless the vertices form a simple polygon
  /// with positive signed area.
  explicit Polygon2D(std::vector<Vec2> vertices);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }

  /// Edge i runs from vertex i to vertex i+1 (mod n).
  std::pair<Vec2, Vec2> edge(std::size_t i) const;
  double edge_length(std::size_t i) const;
  /// Unit normal of edge i pointing into the polygon.
  Vec2 inward_normal(std::size_t i) const;

  double signed_area() const;
  Vec2 centroid() const;
  /// Half the diagonal of the axis-aligned bounding box.
  double half_diagonal() const;
  /// Unsigned distance from p to the nearest edge.
  double distance_to_boundary(const Vec2& p) const;

 private:
  std::vector<Vec2> vertices_;
};

double signed_area(const std::vector<Vec2>& vertices);
double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

/// True if p is inside the polygon; boundary points count as inside.
bool point_in_polygon(const Vec2& p, const Polygon2D& poly);

}  // namespace conepush
