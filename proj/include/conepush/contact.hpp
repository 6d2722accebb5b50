#pragma once

// Force-motion models at individual contacts: the ellipsoidal limit surface
// of a finger patch and the generalized friction cone of a pusher.
//
// Sign convention: limit_surface_wrench returns the friction wrench the
// finger applies ON the object, which opposes the sliding of the object at
// the contact. Every other module uses this convention.

#include "conepush/cone.hpp"
#include "conepush/geom.hpp"

#include <array>
#include <string>
#include <vector>

namespace conepush {

/// Ellipsoidal limit surface of a circular finger patch under uniform pressure.
class LimitSurfaceModel {
 public:
  /// Throws std::invalid_argument unless mu_c > 0, N > 0, r > 0 and 0 < c <= 1.
  LimitSurfaceModel(double mu_c, double normal_force, double radius, double c = 0.6);

  double mu_c() const { return mu_c_; }
  double normal_force() const { return normal_force_; }
  double radius() const { return radius_; }
  double c() const { return c_; }

  /// r * c, the torque lever of the patch.
  double rc() const { return radius_ * c_; }
  /// Maximum friction force a1 = a2 = mu_c * N.
  double max_force() const { return mu_c_ * normal_force_; }
  /// Maximum friction torque a3 = r * c * mu_c * N.
  double max_torque() const { return rc() * max_force(); }

  /// Diag(a1^-2, a2^-2, a3^-2).
  Mat3 A() const;
  /// Diag(1, 1, (rc)^-2).
  Mat3 B() const;

 private:
  double mu_c_;
  double normal_force_;
  double radius_;
  double c_;
};

/// Friction wrench on the object for a contact-frame sliding twist; lies on
/// the limit surface (w^T A w = 1). Throws ZeroTwist for a zero twist.
Wrench limit_surface_wrench(const Twist& v_contact, const LimitSurfaceModel& ls);

/// Same wrench divided by mu_c * N. Depends only on r * c.
Wrench unit_limit_surface_wrench(const Twist& v_contact, double rc);

/// Unit sliding direction B * w associated with a limit-surface wrench.
/// Throws ZeroWrench for a zero wrench.
Twist limit_surface_twist(const Wrench& w, const LimitSurfaceModel& ls);

/// (v_x/w_y - (rc)^2 f_x/m_y, v_z/w_y - (rc)^2 f_z/m_y); zero iff the pair is
/// consistent with the limit surface. Throws DegenerateRatio when w_y or m_y is 0.
std::array<double, 2> velocity_ratio_residual(const Twist& v_contact, const Wrench& w,
                                              const LimitSurfaceModel& ls);

/// Point contact with Coulomb friction, expressed in the object frame.
struct PointFrictionContact {
  Vec2 position = Vec2::Zero();
  /// Unit normal pointing into the object.
  Vec2 normal = Vec2::UnitY();
  double mu = 0.0;
};

/// A point pusher (one contact) or a line pusher (contacts at both ends).
struct Pusher {
  std::string id;
  std::vector<PointFrictionContact> contacts;
  /// Index of the object-polygon edge the pusher acts on, and that edge's
  /// end points in the object frame.
  int face = -1;
  Vec2 face_start = Vec2::Zero();
  Vec2 face_end = Vec2::Zero();
  /// Contact normal points along gravity while the pusher is engaged.
  bool gravity_aligned = true;

  /// Inward normal of the pusher face (that of the first contact).
  Vec2 normal() const { return contacts.front().normal; }
  /// Mean of the contact positions.
  Vec2 center() const;
};

/// Wrench-space friction cone of the pusher in the object frame: J_p^T of
/// each friction-cone edge of each constituent contact, unit-normalized.
/// Throws EmptyPusher when the pusher has no contacts.
PolyhedralCone generalized_friction_cone(const Pusher& p);

}  // namespace conepush
