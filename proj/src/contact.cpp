#include "conepush/contact.hpp"

#include "conepush/error.hpp"

#include <cmath>
#include <stdexcept>

namespace conepush {

LimitSurfaceModel::LimitSurfaceModel(double mu_c, double normal_force, double radius, double c)
    : mu_c_(mu_c), normal_force_(normal_force), radius_(radius), c_(c) {
  if (!(mu_c > 0.0)) throw std::invalid_argument("limit surface: mu_c must be positive");
  if (!(normal_force > 0.0)) throw std::invalid_argument("limit surface: N must be positive");
  if (!(radius > 0.0)) throw std::invalid_argument("limit surface: radius must be positive");
  if (!(c > 0.0 && c <= 1.0)) throw std::invalid_argument("limit surface: c must be in (0, 1]");
}

Mat3 LimitSurfaceModel::A() const {
  const double a1 = max_force();
  const double a3 = max_torque();
  return Vec3(1.0 / (a1 * a1), 1.0 / (a1 * a1), 1.0 / (a3 * a3)).asDiagonal();
}

Mat3 LimitSurfaceModel::B() const {
  const double k = rc();
  return Vec3(1.0, 1.0, 1.0 / (k * k)).asDiagonal();
}

Wrench unit_limit_surface_wrench(const Twist& v_contact, double rc) {
  if (v_contact.v.norm() == 0.0) throw ZeroTwist("friction direction undefined for a zero twist");
  // A^-1 is (mu_c N)^2 Diag(1, 1, (rc)^2); the (mu_c N) factors cancel except one.
  const Vec3 ainv_v(v_contact.vx(), v_contact.vz(), rc * rc * v_contact.wy());
  const double denom = std::sqrt(v_contact.v.dot(ainv_v));
  return Wrench(-ainv_v / denom);
}

Wrench limit_surface_wrench(const Twist& v_contact, const LimitSurfaceModel& ls) {
  return unit_limit_surface_wrench(v_contact, ls.rc()) * ls.max_force();
}

Twist limit_surface_twist(const Wrench& w, const LimitSurfaceModel& ls) {
  if (w.v.norm() == 0.0) throw ZeroWrench("sliding direction undefined for a zero wrench");
  const Vec3 d = ls.B() * w.v;
  return Twist(d / d.norm());
}

std::array<double, 2> velocity_ratio_residual(const Twist& v_contact, const Wrench& w,
                                              const LimitSurfaceModel& ls) {
  if (v_contact.wy() == 0.0 || w.my() == 0.0)
    throw DegenerateRatio("velocity ratio needs nonzero angular velocity and torque");
  const double k = ls.rc() * ls.rc();
  return {v_contact.vx() / v_contact.wy() - k * w.fx() / w.my(),
          v_contact.vz() / v_contact.wy() - k * w.fz() / w.my()};
}

Vec2 Pusher::center() const {
  Vec2 c = Vec2::Zero();
  for (const auto& pc : contacts) c += pc.position;
  return contacts.empty() ? c : Vec2(c / static_cast<double>(contacts.size()));
}

PolyhedralCone generalized_friction_cone(const Pusher& p) {
  if (p.contacts.empty()) throw EmptyPusher("pusher '" + p.id + "' has no contacts");
  std::vector<Vec3> gens;
  for (const PointFrictionContact& pc : p.contacts) {
    if (pc.mu < 0.0) throw std::invalid_argument("pusher friction coefficient must be >= 0");
    // Contact frame: z axis along the inward normal, x axis tangent.
    const double phi = std::atan2(-pc.normal.x(), pc.normal.y());
    const FrameJacobian jp = frame_jacobian(PlanarPose(pc.position.x(), pc.position.y(), phi));
    if (pc.mu == 0.0) {
      gens.push_back(jp.wrench_map(Wrench(0.0, 1.0, 0.0)).v);
    } else {
      gens.push_back(jp.wrench_map(Wrench(pc.mu, 1.0, 0.0)).v);
      gens.push_back(jp.wrench_map(Wrench(-pc.mu, 1.0, 0.0)).v);
    }
  }
  return PolyhedralCone(gens);
}

}  // namespace conepush
