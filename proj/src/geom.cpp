#include "conepush/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace conepush {

namespace {

// sin(a)/a and (1 - cos(a))/a with series fallbacks near zero.
struct ExpCoefficients {
  double s;  // sin(a)/a
  double c;  // (1 - cos(a))/a
};

ExpCoefficients exp_coefficients(double a) {
  if (std::abs(a) < 1e-6) {
    const double a2 = a * a;
    return {1.0 - a2 / 6.0, a / 2.0 - a * a2 / 24.0};
  }
  return {std::sin(a) / a, (1.0 - std::cos(a)) / a};
}

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  auto orient = [](const Vec2& a, const Vec2& b, const Vec2& c) { return cross2(b - a, c - a); };
  const double d1 = orient(q1, q2, p1);
  const double d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1);
  const double d4 = orient(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  auto on_segment = [](const Vec2& a, const Vec2& b, const Vec2& p) {
    return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
           std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
  };
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

}  // namespace

double normalize_angle(double rad) {
  if (rad > -kPi && rad <= kPi) return rad;
  double r = std::remainder(rad, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

Mat2 PlanarPose::rotation() const {
  const double c = std::cos(theta_);
  const double s = std::sin(theta_);
  Mat2 r;
  r << c, -s, s, c;
  return r;
}

Mat3 PlanarPose::matrix() const {
  Mat3 m = Mat3::Identity();
  m.topLeftCorner<2, 2>() = rotation();
  m.topRightCorner<2, 1>() = translation();
  return m;
}

PlanarPose PlanarPose::inverse() const {
  const Mat2 rt = rotation().transpose();
  const Vec2 t = -(rt * translation());
  return {t.x(), t.y(), -theta_};
}

PlanarPose compose(const PlanarPose& a, const PlanarPose& b) {
  const Vec2 t = a.transform_point(b.translation());
  return {t.x(), t.y(), a.theta() + b.theta()};
}

PlanarPose integrate_twist(const PlanarPose& q, const Twist& v, double dt) {
  if (dt < 0.0) throw std::invalid_argument("integrate_twist: dt must be non-negative");
  const double angle = v.wy() * dt;
  const Vec2 lin = v.linear() * dt;
  const ExpCoefficients k = exp_coefficients(angle);
  const Vec2 delta(k.s * lin.x() - k.c * lin.y(), k.c * lin.x() + k.s * lin.y());
  return compose(q, PlanarPose(delta.x(), delta.y(), angle));
}

Twist twist_between(const PlanarPose& from, const PlanarPose& to) {
  const PlanarPose rel = compose(from.inverse(), to);
  const double angle = rel.theta();
  const ExpCoefficients k = exp_coefficients(angle);
  const double det = k.s * k.s + k.c * k.c;
  const Vec2 t = rel.translation();
  const Vec2 lin((k.s * t.x() + k.c * t.y()) / det, (-k.c * t.x() + k.s * t.y()) / det);
  return {lin.x(), lin.y(), angle};
}

Twist FrameJacobian::inverse_twist_map(const Twist& v) const {
  return Twist(m_.inverse() * v.v);
}

Wrench FrameJacobian::inverse_wrench_map(const Wrench& w) const {
  return Wrench(m_.transpose().inverse() * w.v);
}

FrameJacobian frame_jacobian(const PlanarPose& contact_pose_in_object) {
  // v_c = R^T (v + w x p), w_c = w, with w x p = w * (-p_z, p_x).
  const Mat2 rt = contact_pose_in_object.rotation().transpose();
  const Vec2 p = contact_pose_in_object.translation();
  Mat3 m = Mat3::Zero();
  m.topLeftCorner<2, 2>() = rt;
  m.topRightCorner<2, 1>() = rt * Vec2(-p.y(), p.x());
  m(2, 2) = 1.0;
  return FrameJacobian(m);
}

double signed_area(const std::vector<Vec2>& vertices) {
  double a = 0.0;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) a += cross2(vertices[i], vertices[(i + 1) % n]);
  return 0.5 * a;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

Polygon2D::Polygon2D(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
  const std::size_t n = vertices_.size();
  if (n < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
  for (std::size_t i = 0; i < n; ++i) {
    if (!vertices_[i].allFinite()) throw std::invalid_argument("polygon vertex is not finite");
    if ((vertices_[i] - vertices_[(i + 1) % n]).norm() == 0.0)
      throw std::invalid_argument("polygon has a zero-length edge");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(vertices_[i], vertices_[(i + 1) % n], vertices_[j],
                             vertices_[(j + 1) % n]))
        throw std::invalid_argument("polygon is not simple");
    }
  }
  if (conepush::signed_area(vertices_) <= 0.0)
    throw std::invalid_argument("polygon must be counter-clockwise with positive area");
}

std::pair<Vec2, Vec2> Polygon2D::edge(std::size_t i) const {
  return {vertices_[i], vertices_[(i + 1) % vertices_.size()]};
}

double Polygon2D::edge_length(std::size_t i) const {
  const auto [a, b] = edge(i);
  return (b - a).norm();
}

Vec2 Polygon2D::inward_normal(std::size_t i) const {
  const auto [a, b] = edge(i);
  const Vec2 d = (b - a).normalized();
  return {-d.y(), d.x()};
}

double Polygon2D::signed_area() const { return conepush::signed_area(vertices_); }

Vec2 Polygon2D::centroid() const {
  Vec2 c = Vec2::Zero();
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices_[i];
    const Vec2& b = vertices_[(i + 1) % n];
    c += (a + b) * cross2(a, b);
  }
  return c / (6.0 * signed_area());
}

double Polygon2D::half_diagonal() const {
  Vec2 lo = vertices_.front();
  Vec2 hi = vertices_.front();
  for (const Vec2& v : vertices_) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return 0.5 * (hi - lo).norm();
}

double Polygon2D::distance_to_boundary(const Vec2& p) const {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    const auto [a, b] = edge(i);
    d = std::min(d, point_segment_distance(p, a, b));
  }
  return d;
}

bool point_in_polygon(const Vec2& p, const Polygon2D& poly) {
  const auto& v = poly.vertices();
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (point_segment_distance(p, v[i], v[(i + 1) % n]) <= 1e-12) return true;
  }
  // Winding number.
  int winding = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = v[i];
    const Vec2& b = v[(i + 1) % n];
    if (a.y() <= p.y()) {
      if (b.y() > p.y() && cross2(b - a, p - a) > 0) ++winding;
    } else if (b.y() <= p.y() && cross2(b - a, p - a) < 0) {
      --winding;
    }
  }
  return winding != 0;
}

}  // namespace conepush
