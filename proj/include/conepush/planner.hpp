#pragma once

// T-RRT*-style regrasp planner. Nodes are object configurations in the grasp
// frame; every edge is a constant-twist push inside the robust motion cone of
// one pusher at the parent configuration.

#include "conepush/cone.hpp"
#include "conepush/geom.hpp"
#include "conepush/scene.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace conepush {

struct PlannerParams {
  /// Unit-step length under the configuration metric (m).
  double step_size = 0.002;
  /// |dx| (m), |dz| (m), |dtheta| (rad).
  std::array<double, 3> goal_tolerance{0.001, 0.001, deg_to_rad(2.0)};
  double cost_threshold = 5.0;
  int max_iterations = 10000;
  std::uint64_t rng_seed = 0;
  /// Neighborhood radius for optim_edge and rewire (m).
  double rewire_radius = 0.006;
  /// Metric weight on rotation (m/rad). Non-positive selects the scene's
  /// characteristic length.
  double angular_weight = 0.02;
  /// Initial temperature of the transition test, in mm of configuration cost.
  double temperature_init = 1e-2;
  double temperature_rate = 2.0;
  /// Probability of sampling the goal itself. 0 disables goal biasing.
  double goal_bias = 0.3;
  /// Required clearance of the finger patch from the object boundary, as a
  /// fraction of the finger radius.
  double overlap_fraction = 1.0;
  /// Substep length used to validate edges densely (m).
  double substep = 0.0005;
  /// Minimum robust-check margin an edge must keep at every substep.
  double edge_clearance = 1e-9;

  /// Throws std::invalid_argument for out-of-range values.
  void validate() const;
};

/// Weighted distance on (x, z, theta): rho^2 = dx^2 + dz^2 + (w dtheta)^2.
class ConfigMetric {
 public:
  explicit ConfigMetric(double angular_weight) : w_(angular_weight) {}

  double angular_weight() const { return w_; }
  Vec3 weights() const { return {1.0, 1.0, w_}; }
  /// (dx, dz, wrapped dtheta) from a to b.
  Vec3 difference(const PlanarPose& a, const PlanarPose& b) const;
  double distance(const PlanarPose& a, const PlanarPose& b) const;
  double twist_norm(const Twist& v) const;

 private:
  double w_;
};

/// Uniform sample in the box, or the goal with probability goal_bias.
PlanarPose sample_random_configuration(const ConfigBounds& bounds, const PlanarPose& goal,
                                       double goal_bias, std::mt19937_64& rng);

/// Pose at distance min(step, rho) from `from` on the straight line toward `to`.
PlanarPose take_unit_step(const PlanarPose& from, const PlanarPose& to, double step,
                          const ConfigMetric& metric);

/// Finger patch inside the object with margin radius * overlap_fraction, and
/// every pusher contact still on its face.
bool grasp_maintained(const PlanarPose& q, const Scene& scene, double overlap_fraction = 1.0);

/// Adaptive transition test. Configuration cost is the metric distance to the
/// goal in mm; uphill moves pass with probability exp(-dc / T). T grows by
/// `rate` after each rejection and shrinks by `rate` after each downhill move.
class TransitionTest {
 public:
  TransitionTest(const PlanarPose& goal, ConfigMetric metric, double t_init, double rate);

  double config_cost(const PlanarPose& q) const;
  bool operator()(const PlanarPose& from, const PlanarPose& to, std::mt19937_64& rng);
  double temperature() const { return temperature_; }
  /// Acceptance probability of an uphill move of dc at the current temperature.
  double acceptance_probability(double dc) const;

 private:
  PlanarPose goal_;
  ConfigMetric metric_;
  double temperature_;
  double rate_;
  double floor_;
};

/// Edge costs in tenths, so node costs stay exact.
constexpr int kSamePusherCostTenths = 1;
constexpr int kSwitchCostTenths = 10;

struct PlanNode {
  PlanarPose q;
  std::optional<std::size_t> parent;
  /// Pusher used on the incoming edge; none at the root.
  std::optional<std::size_t> pusher;
  int cost_tenths = 0;
  /// Robust motion cone per scene pusher; nullopt where the pusher is invalid.
  std::vector<std::optional<PolyhedralCone>> cones;
  std::vector<std::size_t> children;

  double cost() const { return cost_tenths / 10.0; }
};

class PlanTree {
 public:
  std::size_t add_root(const PlanarPose& q, std::vector<std::optional<PolyhedralCone>> cones);
  std::size_t add_node(const PlanarPose& q, std::size_t parent, std::size_t pusher,
                       std::vector<std::optional<PolyhedralCone>> cones);

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  const PlanNode& operator[](std::size_t i) const { return nodes_.at(i); }

  /// Cost of pushing from `parent` with `pusher`: 0.1 for the parent's own
  /// incoming pusher (or from the root), 1 for a switch.
  int edge_cost_tenths(std::size_t parent, std::size_t pusher) const;

  /// Node minimizing the metric; ties go to the earliest inserted.
  std::size_t nearest(const PlanarPose& q, const ConfigMetric& metric) const;
  std::vector<std::size_t> within(const PlanarPose& q, double radius,
                                  const ConfigMetric& metric) const;

  /// Re-parents `node` unless that would raise the cost of the node or of any
  /// descendant; returns whether it did. Subtree costs are updated.
  bool reparent(std::size_t node, std::size_t new_parent, std::size_t pusher);

  bool is_ancestor(std::size_t ancestor, std::size_t node) const;
  /// Root-to-node index path.
  std::vector<std::size_t> path_to(std::size_t node) const;

 private:
  std::vector<PlanNode> nodes_;
};

struct Waypoint {
  PlanarPose q;
  /// Pusher of the push that arrives at q; none for the first waypoint.
  std::optional<std::string> pusher;
};

struct PushPlan {
  std::string scene;
  PlanarPose q_init;
  PlanarPose q_goal;
  std::vector<Waypoint> waypoints;
  double total_cost = 0.0;
  int switch_count = 0;
  int iterations = 0;
  double wall_time_ms = 0.0;
  std::uint64_t seed = 0;
  /// Metric weight the plan was built with (m/rad); 0 when unknown.
  double angular_weight = 0.0;

  /// True when the plan contains no pushes.
  bool empty() const { return waypoints.size() <= 1; }
  /// Distinct pushers in order of first use.
  std::vector<std::string> pushers_used() const;
};

/// A push proposed by robust_push.
struct PushEdge {
  PlanarPose q_new;
  std::size_t pusher = 0;
  Twist twist;
};

class Planner {
 public:
  /// Throws std::invalid_argument for invalid params.
  Planner(const Scene& scene, PlannerParams params);

  /// Runs the planner. Throws InvalidStart if the grasp is not maintained at
  /// q_init and NoPlanFound when the iteration budget runs out or the goal lies
  /// outside the configuration bounds.
  PushPlan plan(const PlanarPose& q_init, const PlanarPose& q_goal);

  // Building blocks of plan(); public for inspection and testing.

  /// Clears the tree and seeds it with q_init.
  void reset(const PlanarPose& q_init, const PlanarPose& q_goal);
  /// Adds a node below `parent` pushed by `pusher` and generates its cones.
  std::size_t add_node(const PlanarPose& q, std::size_t parent, std::size_t pusher);

  std::vector<std::optional<PolyhedralCone>> generate_robust_cones(const PlanarPose& q) const;
  /// Closest reachable pose to q_sample from tree node `parent`. Throws
  /// NoValidPusher when no pusher can move the object from there.
  PushEdge robust_push(std::size_t parent, const PlanarPose& q_sample) const;
  /// Best parent and pusher for q_new among nodes within the rewire radius;
  /// falls back to the given default.
  std::pair<std::size_t, std::size_t> optim_edge(const PlanarPose& q_new, std::size_t default_parent,
                                                 std::size_t default_pusher) const;
  /// Re-parents neighbors through `node` where that lowers their cost.
  /// Returns the number of re-parented nodes.
  int rewire(std::size_t node);

  /// The robust check holds with the configured clearance at every substep.
  bool edge_sticks(const PlanarPose& from, const Twist& twist, std::size_t pusher) const;
  /// The grasp is maintained (and bounds respected) at every substep end.
  bool edge_keeps_grasp(const PlanarPose& from, const Twist& twist) const;
  /// Pushers whose cone at `node` contains the twist and whose edge sticks,
  /// the node's own incoming pusher first.
  std::vector<std::size_t> feasible_pushers(std::size_t node, const Twist& twist) const;

  bool in_goal_region(const PlanarPose& q) const;
  PushPlan extract_plan(std::size_t goal_node) const;

  const PlanTree& tree() const { return tree_; }
  const ConfigMetric& metric() const { return metric_; }
  const PlannerParams& params() const { return params_; }
  const Scene& scene() const { return scene_; }

 private:
  std::vector<std::size_t> pusher_order(std::size_t node) const;

  const Scene& scene_;
  PlannerParams params_;
  ConfigMetric metric_;
  PlanTree tree_;
  PlanarPose goal_;
};

/// Convenience wrapper around Planner::plan.
PushPlan plan(const PlanarPose& q_init, const PlanarPose& q_goal, const Scene& scene,
              const PlannerParams& params);

/// Number of substeps used to validate or execute an edge.
int substep_count(const Twist& twist, const ConfigMetric& metric, double substep);

/// Re-checks every edge of the plan against the scene: each consecutive pair
/// must be joined by a twist inside the recorded pusher's robust motion cone
/// at the earlier waypoint. Returns the index of the first bad waypoint.
std::optional<std::size_t> first_invalid_edge(const PushPlan& plan, const Scene& scene);

}  // namespace conepush
