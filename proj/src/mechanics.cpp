#include "conepush/mechanics.hpp"

#include "conepush/error.hpp"

#include <cmath>

namespace conepush {

namespace {

constexpr double kOnFaceTol = 1e-9;

}  // namespace

PlanarPose GraspModel::finger_pose_in_object(const PlanarPose& q) const {
  return compose(q.inverse(), PlanarPose(finger_center.x(), finger_center.y(), 0.0));
}

Wrench GraspModel::gravity_wrench() const {
  const Vec2 f = object_mass * gravity;
  return {f.x(), f.y(), cross2(com, f)};
}

GraspModel with_gravity_along_pusher(GraspModel g, const Pusher& p, double g_magnitude) {
  g.gravity = -p.normal() * g_magnitude;
  return g;
}

Wrench grasp_wrench(const Twist& v_obj, const GraspModel& g, const PlanarPose& q) {
  if (v_obj.v.norm() == 0.0) throw ZeroTwist("grasp wrench undefined for a zero twist");
  const FrameJacobian jc = frame_jacobian(g.finger_pose_in_object(q));
  const Wrench wc = limit_surface_wrench(jc.twist_map(v_obj), g.finger);
  return jc.wrench_map(wc) * static_cast<double>(GraspModel::kFingerCount);
}

Wrench required_pusher_wrench(const Twist& v_obj, const GraspModel& g, const PlanarPose& q) {
  if (v_obj.v.norm() == 0.0) throw ZeroTwist("push undefined for a zero twist");
  const FrameJacobian jc = frame_jacobian(g.finger_pose_in_object(q));
  const Wrench wc = unit_limit_surface_wrench(jc.twist_map(v_obj), g.finger.rc());
  return -jc.wrench_map(wc);
}

bool stable_push_check(const Twist& v_obj, const GraspModel& g, const Pusher& p,
                       const PlanarPose& q) {
  const Wrench need = -grasp_wrench(v_obj, g, q) + -g.gravity_wrench();
  return cone_contains(generalized_friction_cone(p), need.v);
}

double robust_push_margin(const Twist& v_obj, const GraspModel& g, const Pusher& p,
                          const PolyhedralCone& pusher_cone, const PlanarPose& q) {
  if (!p.gravity_aligned)
    throw NotGravityAligned("pusher '" + p.id + "' is not gravity aligned");
  return cone_margin(pusher_cone, required_pusher_wrench(v_obj, g, q).v);
}

bool robust_push_check(const Twist& v_obj, const GraspModel& g, const Pusher& p,
                       const PolyhedralCone& pusher_cone, const PlanarPose& q) {
  if (!p.gravity_aligned)
    throw NotGravityAligned("pusher '" + p.id + "' is not gravity aligned");
  return cone_contains(pusher_cone, required_pusher_wrench(v_obj, g, q).v);
}

bool robust_push_check(const Twist& v_obj, const GraspModel& g, const Pusher& p,
                       const PlanarPose& q) {
  return robust_push_check(v_obj, g, p, generalized_friction_cone(p), q);
}

void check_pusher_on_face(const Pusher& p) {
  const Vec2 d = p.face_end - p.face_start;
  const double len = d.norm();
  if (len == 0.0) throw ContactOffObject("pusher '" + p.id + "' has no face segment");
  const Vec2 dir = d / len;
  const Vec2 inward(-dir.y(), dir.x());
  for (const PointFrictionContact& pc : p.contacts) {
    const Vec2 rel = pc.position - p.face_start;
    const double along = rel.dot(dir);
    if (std::abs(cross2(dir, rel)) > kOnFaceTol || along < -kOnFaceTol || along > len + kOnFaceTol)
      throw ContactOffObject("pusher '" + p.id + "' contact is off its face");
    if (along < kOnFaceTol || along > len - kOnFaceTol)
      throw ContactOffObject("pusher '" + p.id + "' contact engages a polygon vertex");
    if ((pc.normal - inward).norm() > kOnFaceTol)
      throw ContactOffObject("pusher '" + p.id + "' normal differs from the face normal");
  }
}

PolyhedralCone compute_robust_motion_cone(const GraspModel& g, const Pusher& p,
                                          const PlanarPose& q) {
  if (!p.gravity_aligned)
    throw NotGravityAligned("pusher '" + p.id + "' is not gravity aligned");
  check_pusher_on_face(p);

  const PolyhedralCone w_pusher = generalized_friction_cone(p);
  const FrameJacobian jc = frame_jacobian(g.finger_pose_in_object(q));
  const Mat3 b = g.finger.B();
  std::vector<Vec3> twists;
  twists.reserve(w_pusher.generators().size());
  for (const Vec3& wp : w_pusher.generators()) {
    // Support wrench on the object at the finger, contact frame.
    const Wrench wc = -jc.inverse_wrench_map(Wrench(wp));
    // The object slides against the friction it receives: v_c ~ B (-w_c).
    const Twist vc(b * (-wc.v));
    twists.push_back(jc.inverse_twist_map(vc).v);
  }
  return PolyhedralCone(twists);
}

}  // namespace conepush
