#pragma once

// Quasi-static feasibility of prehensile pushes and robust motion cones.
//
// The object is held by a parallel-jaw grasp whose two finger patches share
// one center (fixed in the grasp frame) and one limit-surface model. The
// object configuration q is the pose of the object frame in the grasp frame,
// so the finger patch sits at q^-1 * finger_center in the object frame. The
// pusher is fixed in the object frame while it is engaged.

#include "conepush/cone.hpp"
#include "conepush/contact.hpp"
#include "conepush/geom.hpp"

namespace conepush {

struct GraspModel {
  /// Shared model of both finger patches.
  LimitSurfaceModel finger;
  /// Finger patch center in the grasp frame (m).
  Vec2 finger_center = Vec2::Zero();
  /// Object mass (kg) and center of mass in the object frame (m).
  double object_mass = 0.0;
  Vec2 com = Vec2::Zero();
  /// Gravitational acceleration in the object frame (m/s^2).
  Vec2 gravity = Vec2::Zero();

  static constexpr int kFingerCount = 2;

  /// Pose of the finger contact frame in the object frame at configuration q.
  PlanarPose finger_pose_in_object(const PlanarPose& q) const;
  /// m g as an object-frame wrench about the object origin.
  Wrench gravity_wrench() const;
};

/// Copy of `g` with gravity pointing against the pusher's inward normal,
/// i.e. the pusher supports the object from below.
GraspModel with_gravity_along_pusher(GraspModel g, const Pusher& p, double g_magnitude);

/// Friction wrench of both fingers on the object, object frame. Throws ZeroTwist.
Wrench grasp_wrench(const Twist& v_obj, const GraspModel& g, const PlanarPose& q);

/// Direction of the pusher wrench a gravity-balanced push needs,
/// -J_c^T w_c for the unit limit-surface wrench w_c. Independent of mass,
/// grasp force and finger friction.
Wrench required_pusher_wrench(const Twist& v_obj, const GraspModel& g, const PlanarPose& q);

/// General stable-push test with gravity: -w_grasp - m g must lie in the
/// pusher's generalized friction cone. Throws ZeroTwist.
bool stable_push_check(const Twist& v_obj, const GraspModel& g, const Pusher& p,
                       const PlanarPose& q);

/// Gravity-balanced (robust) push test: -J_c^T w_c in W_pusher.
/// Throws ZeroTwist, or NotGravityAligned for a pusher not flagged as such.
bool robust_push_check(const Twist& v_obj, const GraspModel& g, const Pusher& p,
                       const PlanarPose& q);
/// Same test against a precomputed pusher cone.
bool robust_push_check(const Twist& v_obj, const GraspModel& g, const Pusher& p,
                       const PolyhedralCone& pusher_cone, const PlanarPose& q);

/// Signed clearance of the robust test: non-negative (within tolerance) iff
/// robust_push_check passes.
double robust_push_margin(const Twist& v_obj, const GraspModel& g, const Pusher& p,
                          const PolyhedralCone& pusher_cone, const PlanarPose& q);

/// Throws ContactOffObject unless every pusher contact lies strictly inside
/// its face segment with the face's inward normal.
void check_pusher_on_face(const Pusher& p);

/// Robust motion cone of object twists (object frame, SI) for pusher p at
/// configuration q. Throws NotGravityAligned or ContactOffObject.
PolyhedralCone compute_robust_motion_cone(const GraspModel& g, const Pusher& p,
                                          const PlanarPose& q);

}  // namespace conepush
