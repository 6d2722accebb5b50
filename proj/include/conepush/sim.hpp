#pragma once

// Kinematic quasi-static execution of a push plan. While a pusher is engaged
// the object is fixed in the world and the gripper slides over it, so the
// gripper trajectory is the inverse of the object-in-grasp motion.

#include "conepush/geom.hpp"
#include "conepush/planner.hpp"
#include "conepush/scene.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace conepush {

struct SimParams {
  /// Maximum substep length under the configuration metric (m).
  double substep = 0.0005;
  /// Metric weight on rotation (m/rad); non-positive selects the scene's
  /// characteristic length. Must match the planner to replay its substeps.
  double angular_weight = 0.0;
};

struct TraceStep {
  int step = 0;
  /// Each plan edge spans one time unit.
  double t = 0.0;
  PlanarPose object_in_grasp;
  PlanarPose gripper_in_world;
  PlanarPose object_in_world;
  std::optional<std::string> pusher;
  Twist twist;
  /// Robust-check margin at the start of the substep; NaN when no push.
  double margin = 0.0;
};

struct StickingEvent {
  int step = 0;
  double margin = 0.0;
};

struct ExecutionTrace {
  std::vector<TraceStep> steps;
  std::vector<StickingEvent> violations;

  /// Largest object-in-world displacement from the first step of each
  /// same-pusher segment (m); zero by construction.
  double max_segment_displacement() const;
};

/// Object-in-world pose with pusher p's inward normal along world +z and its
/// contact center at the world origin.
PlanarPose object_in_world_for(const Pusher& p);

/// Runs the plan and records every substep whose robust check fails.
ExecutionTrace simulate_plan(const PushPlan& plan, const Scene& scene, const SimParams& params = {});

/// Like simulate_plan, but throws StickingViolation at the first failing substep.
ExecutionTrace execute_plan(const PushPlan& plan, const Scene& scene, const SimParams& params = {});

/// Writes the trace CSV. Throws IoError.
void export_trace(const ExecutionTrace& trace, const std::filesystem::path& path);
std::string trace_to_csv(const ExecutionTrace& trace);

/// Row of the CSV form (mm, deg).
struct TraceCsvRow {
  int step = 0;
  double t = 0.0;
  double qx_mm = 0.0, qz_mm = 0.0, qtheta_deg = 0.0;
  double obj_world_x_mm = 0.0, obj_world_z_mm = 0.0, obj_world_theta_deg = 0.0;
  std::string pusher;
  double margin = 0.0;
};

/// Parses CSV written by trace_to_csv. Throws ParseError.
std::vector<TraceCsvRow> parse_trace_csv(const std::string& text);

nlohmann::json trace_to_json(const ExecutionTrace& trace);

}  // namespace conepush
