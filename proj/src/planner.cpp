#include "conepush/planner.hpp"

#include "conepush/error.hpp"
#include "conepush/mechanics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace conepush {

namespace {

constexpr std::array<double, 6> kNudges{0.0, 0.05, 0.1, 0.2, 0.4, 0.8};

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void PlannerParams::validate() const {
  if (!finite_positive(step_size)) throw std::invalid_argument("step_size must be positive");
  for (double t : goal_tolerance)
    if (!finite_positive(t)) throw std::invalid_argument("goal_tolerance must be positive");
  if (!std::isfinite(cost_threshold) || cost_threshold < 0.0)
    throw std::invalid_argument("cost_threshold must be non-negative");
  if (max_iterations <= 0) throw std::invalid_argument("max_iterations must be positive");
  if (!finite_positive(rewire_radius)) throw std::invalid_argument("rewire_radius must be positive");
  if (!std::isfinite(angular_weight)) throw std::invalid_argument("angular_weight must be finite");
  if (!finite_positive(temperature_init))
    throw std::invalid_argument("temperature_init must be positive");
  if (!std::isfinite(temperature_rate) || temperature_rate <= 1.0)
    throw std::invalid_argument("temperature_rate must exceed 1");
  if (!std::isfinite(goal_bias) || goal_bias < 0.0 || goal_bias > 1.0)
    throw std::invalid_argument("goal_bias must lie in [0, 1]");
  if (!std::isfinite(overlap_fraction) || overlap_fraction < 0.0)
    throw std::invalid_argument("overlap_fraction must be non-negative");
  if (!finite_positive(substep)) throw std::invalid_argument("substep must be positive");
  if (!std::isfinite(edge_clearance) || edge_clearance < 0.0)
    throw std::invalid_argument("edge_clearance must be non-negative");
}

// ---------------------------------------------------------------------------

Vec3 ConfigMetric::difference(const PlanarPose& a, const PlanarPose& b) const {
  return {b.x() - a.x(), b.z() - a.z(), normalize_angle(b.theta() - a.theta())};
}

double ConfigMetric::distance(const PlanarPose& a, const PlanarPose& b) const {
  return weights().cwiseProduct(difference(a, b)).norm();
}

double ConfigMetric::twist_norm(const Twist& v) const { return weights().cwiseProduct(v.v).norm(); }

PlanarPose sample_random_configuration(const ConfigBounds& bounds, const PlanarPose& goal,
                                       double goal_bias, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (goal_bias > 0.0 && unit(rng) < goal_bias) return goal;
  Vec3 s;
  for (int i = 0; i < 3; ++i) s[i] = bounds.lo[i] + unit(rng) * (bounds.hi[i] - bounds.lo[i]);
  return {s[0], s[1], s[2]};
}

PlanarPose take_unit_step(const PlanarPose& from, const PlanarPose& to, double step,
                          const ConfigMetric& metric) {
  const double rho = metric.distance(from, to);
  if (rho <= step) return to;
  const Vec3 d = metric.difference(from, to) * (step / rho);
  return {from.x() + d[0], from.z() + d[1], from.theta() + d[2]};
}

bool grasp_maintained(const PlanarPose& q, const Scene& scene, double overlap_fraction) {
  const Vec2 finger = q.inverse().transform_point(scene.grasp.finger_center);
  if (!point_in_polygon(finger, scene.polygon)) return false;
  const double clearance = scene.grasp.finger.radius() * overlap_fraction;
  if (scene.polygon.distance_to_boundary(finger) < clearance) return false;
  for (const Pusher& p : scene.pushers) {
    try {
      check_pusher_on_face(p);
    } catch (const ContactOffObject&) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

TransitionTest::TransitionTest(const PlanarPose& goal, ConfigMetric metric, double t_init,
                               double rate)
    : goal_(goal), metric_(metric), temperature_(t_init), rate_(rate), floor_(t_init * 1e-6) {}

double TransitionTest::config_cost(const PlanarPose& q) const {
  return m_to_mm(metric_.distance(q, goal_));
}

double TransitionTest::acceptance_probability(double dc) const {
  if (dc <= 0.0) return 1.0;
  return std::exp(-dc / temperature_);
}

bool TransitionTest::operator()(const PlanarPose& from, const PlanarPose& to,
                                std::mt19937_64& rng) {
  const double dc = config_cost(to) - config_cost(from);
  if (dc <= 0.0) {
    temperature_ = std::max(floor_, temperature_ / rate_);
    return true;
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < acceptance_probability(dc)) return true;
  temperature_ *= rate_;
  return false;
}

// ---------------------------------------------------------------------------

std::size_t PlanTree::add_root(const PlanarPose& q,
                               std::vector<std::optional<PolyhedralCone>> cones) {
  nodes_.clear();
  PlanNode n;
  n.q = q;
  n.cones = std::move(cones);
  nodes_.push_back(std::move(n));
  return 0;
}

std::size_t PlanTree::add_node(const PlanarPose& q, std::size_t parent, std::size_t pusher,
                               std::vector<std::optional<PolyhedralCone>> cones) {
  if (parent >= nodes_.size()) throw std::out_of_range("parent index out of range");
  PlanNode n;
  n.q = q;
  n.parent = parent;
  n.pusher = pusher;
  n.cost_tenths = nodes_[parent].cost_tenths + edge_cost_tenths(parent, pusher);
  n.cones = std::move(cones);
  const std::size_t id = nodes_.size();
  nodes_.push_back(std::move(n));
  nodes_[parent].children.push_back(id);
  return id;
}

int PlanTree::edge_cost_tenths(std::size_t parent, std::size_t pusher) const {
  const PlanNode& p = nodes_.at(parent);
  if (!p.pusher || *p.pusher == pusher) return kSamePusherCostTenths;
  return kSwitchCostTenths;
}

std::size_t PlanTree::nearest(const PlanarPose& q, const ConfigMetric& metric) const {
  if (nodes_.empty()) throw std::logic_error("nearest on an empty tree");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const double d = metric.distance(nodes_[i].q, q);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::vector<std::size_t> PlanTree::within(const PlanarPose& q, double radius,
                                          const ConfigMetric& metric) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (metric.distance(nodes_[i].q, q) <= radius) out.push_back(i);
  return out;
}

bool PlanTree::is_ancestor(std::size_t ancestor, std::size_t node) const {
  std::optional<std::size_t> cur = nodes_.at(node).parent;
  while (cur) {
    if (*cur == ancestor) return true;
    cur = nodes_[*cur].parent;
  }
  return false;
}

bool PlanTree::reparent(std::size_t node, std::size_t new_parent, std::size_t pusher) {
  if (node == 0 || node >= nodes_.size() || new_parent >= nodes_.size()) return false;
  if (node == new_parent || is_ancestor(node, new_parent)) return false;

  // Costs of the subtree under the proposed edge; reject if any would rise.
  std::vector<std::pair<std::size_t, int>> updates;
  const int root_cost = nodes_[new_parent].cost_tenths + edge_cost_tenths(new_parent, pusher);
  if (root_cost > nodes_[node].cost_tenths) return false;
  updates.emplace_back(node, root_cost);
  for (std::size_t k = 0; k < updates.size(); ++k) {
    const auto [id, cost] = updates[k];
    const std::size_t incoming = id == node ? pusher : *nodes_[id].pusher;
    for (std::size_t ch : nodes_[id].children) {
      const int step = *nodes_[ch].pusher == incoming ? kSamePusherCostTenths : kSwitchCostTenths;
      const int c = cost + step;
      if (c > nodes_[ch].cost_tenths) return false;
      updates.emplace_back(ch, c);
    }
  }

  PlanNode& n = nodes_[node];
  auto& siblings = nodes_[*n.parent].children;
  siblings.erase(std::remove(siblings.begin(), siblings.end(), node), siblings.end());
  n.parent = new_parent;
  n.pusher = pusher;
  nodes_[new_parent].children.push_back(node);
  for (const auto& [id, cost] : updates) nodes_[id].cost_tenths = cost;
  return true;
}

std::vector<std::size_t> PlanTree::path_to(std::size_t node) const {
  std::vector<std::size_t> path;
  std::optional<std::size_t> cur = node;
  while (cur) {
    path.push_back(*cur);
    cur = nodes_.at(*cur).parent;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

// ---------------------------------------------------------------------------

std::vector<std::string> PushPlan::pushers_used() const {
  std::vector<std::string> out;
  for (const Waypoint& w : waypoints)
    if (w.pusher && std::find(out.begin(), out.end(), *w.pusher) == out.end())
      out.push_back(*w.pusher);
  return out;
}

int substep_count(const Twist& twist, const ConfigMetric& metric, double substep) {
  const double len = metric.twist_norm(twist);
  return std::max(1, static_cast<int>(std::ceil(len / substep - 1e-9)));
}

// ---------------------------------------------------------------------------

Planner::Planner(const Scene& scene, PlannerParams params)
    : scene_(scene),
      params_(params),
      metric_(params.angular_weight > 0.0 ? params.angular_weight
                                          : scene.characteristic_length()) {
  params_.validate();
}

void Planner::reset(const PlanarPose& q_init, const PlanarPose& q_goal) {
  goal_ = q_goal;
  tree_.add_root(q_init, generate_robust_cones(q_init));
}

std::size_t Planner::add_node(const PlanarPose& q, std::size_t parent, std::size_t pusher) {
  return tree_.add_node(q, parent, pusher, generate_robust_cones(q));
}

std::vector<std::optional<PolyhedralCone>> Planner::generate_robust_cones(
    const PlanarPose& q) const {
  std::vector<std::optional<PolyhedralCone>> cones;
  cones.reserve(scene_.pushers.size());
  for (std::size_t i = 0; i < scene_.pushers.size(); ++i) {
    try {
      PolyhedralCone c = compute_robust_motion_cone(scene_.grasp, scene_.pushers[i], q);
      if (c.empty()) {
        cones.emplace_back();
      } else {
        cones.emplace_back(std::move(c));
      }
    } catch (const NotGravityAligned&) {
      cones.emplace_back();
    } catch (const ContactOffObject&) {
      cones.emplace_back();
    }
  }
  return cones;
}

bool Planner::edge_sticks(const PlanarPose& from, const Twist& twist, std::size_t pusher) const {
  if (twist.v.norm() == 0.0) return false;
  const Pusher& p = scene_.pushers.at(pusher);
  if (!p.gravity_aligned) return false;
  const PolyhedralCone& wp = scene_.pusher_cones.at(pusher);
  // Flat pusher cones only admit twists on their boundary.
  const double clearance = wp.degenerate() ? -kMembershipTol : params_.edge_clearance;
  const int n = substep_count(twist, metric_, params_.substep);
  for (int k = 0; k < n; ++k) {
    const PlanarPose qk = integrate_twist(from, twist, static_cast<double>(k) / n);
    if (robust_push_margin(twist, scene_.grasp, p, wp, qk) < clearance) return false;
  }
  return true;
}

bool Planner::edge_keeps_grasp(const PlanarPose& from, const Twist& twist) const {
  const int n = substep_count(twist, metric_, params_.substep);
  for (int k = 1; k <= n; ++k) {
    const PlanarPose qk = integrate_twist(from, twist, static_cast<double>(k) / n);
    if (!scene_.bounds.contains(qk)) return false;
    if (!grasp_maintained(qk, scene_, params_.overlap_fraction)) return false;
  }
  return true;
}

std::vector<std::size_t> Planner::pusher_order(std::size_t node) const {
  std::vector<std::size_t> order;
  const PlanNode& n = tree_[node];
  if (n.pusher) order.push_back(*n.pusher);
  for (std::size_t i = 0; i < scene_.pushers.size(); ++i)
    if (!n.pusher || *n.pusher != i) order.push_back(i);
  return order;
}

std::vector<std::size_t> Planner::feasible_pushers(std::size_t node, const Twist& twist) const {
  std::vector<std::size_t> out;
  const PlanNode& n = tree_[node];
  for (std::size_t i : pusher_order(node)) {
    if (!n.cones[i]) continue;
    if (!cone_contains(*n.cones[i], twist.v)) continue;
    if (edge_sticks(n.q, twist, i)) out.push_back(i);
  }
  return out;
}

PushEdge Planner::robust_push(std::size_t parent, const PlanarPose& q_sample) const {
  const PlanNode& n = tree_[parent];
  const Twist desired = twist_between(n.q, q_sample);
  if (desired.v.norm() == 0.0) throw ZeroTwist("sample coincides with the tree node");

  const std::vector<std::size_t> inside = feasible_pushers(parent, desired);
  if (!inside.empty()) return {q_sample, inside.front(), desired};

  // Rank the valid cones by the weighted angle between the desired twist and
  // its projection; stable sort keeps the node's own pusher first on ties.
  const Vec3 w = ConfigMetric(scene_.characteristic_length()).weights();
  const Vec3 target = w.cwiseProduct(desired.v).normalized();
  struct Candidate {
    std::size_t pusher;
    Vec3 dir;
    double cos;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i : pusher_order(parent)) {
    if (!n.cones[i]) continue;
    const Vec3 d = cone_project(*n.cones[i], desired.v, w);
    candidates.push_back({i, d, w.cwiseProduct(d).dot(target)});
  }
  if (candidates.empty()) throw NoValidPusher("no pusher is valid at the tree node");
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.cos > b.cos; });

  const double mag = std::min(params_.step_size, metric_.twist_norm(desired));
  for (const Candidate& c : candidates) {
    const Vec3 dir_w = w.cwiseProduct(c.dir);
    Vec3 center_w = Vec3::Zero();
    for (const Vec3& g : n.cones[c.pusher]->generators()) center_w += w.cwiseProduct(g).normalized();
    if (center_w.norm() > 0.0) center_w.normalize();
    for (double alpha : kNudges) {
      Vec3 d = (1.0 - alpha) * dir_w + alpha * center_w;
      if (d.norm() == 0.0) continue;
      d.normalize();
      const Twist tw(d.cwiseQuotient(w) * mag);
      if (edge_sticks(n.q, tw, c.pusher)) return {integrate_twist(n.q, tw, 1.0), c.pusher, tw};
    }
  }
  throw NoValidPusher("no robust push found from the tree node");
}

std::pair<std::size_t, std::size_t> Planner::optim_edge(const PlanarPose& q_new,
                                                        std::size_t default_parent,
                                                        std::size_t default_pusher) const {
  std::size_t best_parent = default_parent;
  std::size_t best_pusher = default_pusher;
  int best_cost =
      tree_[default_parent].cost_tenths + tree_.edge_cost_tenths(default_parent, default_pusher);
  for (std::size_t nb : tree_.within(q_new, params_.rewire_radius, metric_)) {
    if (nb == default_parent) continue;
    const Twist tw = twist_between(tree_[nb].q, q_new);
    if (tw.v.norm() == 0.0) continue;
    for (std::size_t i : pusher_order(nb)) {
      const int c = tree_[nb].cost_tenths + tree_.edge_cost_tenths(nb, i);
      if (c >= best_cost || !tree_[nb].cones[i]) continue;
      if (!cone_contains(*tree_[nb].cones[i], tw.v)) continue;
      if (!edge_sticks(tree_[nb].q, tw, i) || !edge_keeps_grasp(tree_[nb].q, tw)) continue;
      best_cost = c;
      best_parent = nb;
      best_pusher = i;
    }
  }
  return {best_parent, best_pusher};
}

int Planner::rewire(std::size_t node) {
  int changed = 0;
  const PlanNode& src = tree_[node];
  for (std::size_t nb : tree_.within(src.q, params_.rewire_radius, metric_)) {
    if (nb == 0 || nb == node || tree_[nb].parent == node) continue;
    const Twist tw = twist_between(tree_[node].q, tree_[nb].q);
    if (tw.v.norm() == 0.0) continue;
    for (std::size_t i : pusher_order(node)) {
      const int c = tree_[node].cost_tenths + tree_.edge_cost_tenths(node, i);
      if (c >= tree_[nb].cost_tenths || !tree_[node].cones[i]) continue;
      if (!cone_contains(*tree_[node].cones[i], tw.v)) continue;
      if (!edge_sticks(tree_[node].q, tw, i) || !edge_keeps_grasp(tree_[node].q, tw)) continue;
      if (tree_.reparent(nb, node, i)) {
        ++changed;
        break;
      }
    }
  }
  return changed;
}

bool Planner::in_goal_region(const PlanarPose& q) const {
  const Vec3 d = metric_.difference(q, goal_);
  return std::abs(d[0]) <= params_.goal_tolerance[0] &&
         std::abs(d[1]) <= params_.goal_tolerance[1] &&
         std::abs(d[2]) <= params_.goal_tolerance[2];
}

PushPlan Planner::extract_plan(std::size_t goal_node) const {
  PushPlan out;
  out.scene = scene_.name;
  out.q_init = tree_[0].q;
  out.q_goal = goal_;
  std::optional<std::size_t> prev;
  for (std::size_t id : tree_.path_to(goal_node)) {
    const PlanNode& n = tree_[id];
    Waypoint w;
    w.q = n.q;
    if (n.pusher) {
      w.pusher = scene_.pushers[*n.pusher].id;
      if (prev && *prev != *n.pusher) ++out.switch_count;
      prev = n.pusher;
    }
    out.waypoints.push_back(std::move(w));
  }
  out.total_cost = tree_[goal_node].cost();
  out.seed = params_.rng_seed;
  out.angular_weight = metric_.angular_weight();
  if (const auto bad = first_invalid_edge(out, scene_))
    throw std::logic_error("extracted edge into waypoint " + std::to_string(*bad) +
                           " fails the robust check");
  return out;
}

PushPlan Planner::plan(const PlanarPose& q_init, const PlanarPose& q_goal) {
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };

  if (!grasp_maintained(q_init, scene_, params_.overlap_fraction))
    throw InvalidStart("grasp is not maintained at the initial configuration");
  reset(q_init, q_goal);
  if (in_goal_region(q_init)) {
    PushPlan p = extract_plan(0);
    p.wall_time_ms = elapsed_ms();
    return p;
  }
  if (!scene_.bounds.contains(q_goal))
    throw NoPlanFound("goal lies outside the configuration bounds");

  std::mt19937_64 rng(params_.rng_seed);
  TransitionTest transition(q_goal, metric_, params_.temperature_init, params_.temperature_rate);
  std::vector<std::size_t> goal_nodes;
  std::optional<std::size_t> best_goal;

  int iter = 0;
  while (iter < params_.max_iterations) {
    ++iter;
    const PlanarPose q_rand =
        sample_random_configuration(scene_.bounds, q_goal, params_.goal_bias, rng);
    const std::size_t near = tree_.nearest(q_rand, metric_);
    if (metric_.distance(tree_[near].q, q_rand) == 0.0) continue;
    const PlanarPose q_step = take_unit_step(tree_[near].q, q_rand, params_.step_size, metric_);
    if (!transition(tree_[near].q, q_step, rng)) continue;

    PushEdge edge;
    try {
      edge = robust_push(near, q_step);
    } catch (const NoValidPusher&) {
      continue;
    } catch (const ZeroTwist&) {
      continue;
    }
    if (!edge_keeps_grasp(tree_[near].q, edge.twist)) continue;
    if (!transition(tree_[near].q, edge.q_new, rng)) continue;

    const auto [parent, pusher] = optim_edge(edge.q_new, near, edge.pusher);
    const std::size_t id = add_node(edge.q_new, parent, pusher);
    rewire(id);

    if (in_goal_region(edge.q_new)) goal_nodes.push_back(id);
    for (std::size_t g : goal_nodes)
      if (!best_goal || tree_[g].cost_tenths < tree_[*best_goal].cost_tenths) best_goal = g;
    if (best_goal && tree_[*best_goal].cost() <= params_.cost_threshold) break;
  }

  if (!best_goal) throw NoPlanFound("no plan within " + std::to_string(iter) + " iterations");
  if (tree_[*best_goal].cost() > params_.cost_threshold)
    throw NoPlanFound("cheapest plan costs " + std::to_string(tree_[*best_goal].cost()) + ", above threshold " +
                      std::to_string(params_.cost_threshold));
  PushPlan p = extract_plan(*best_goal);
  p.iterations = iter;
  p.wall_time_ms = elapsed_ms();
  return p;
}

PushPlan plan(const PlanarPose& q_init, const PlanarPose& q_goal, const Scene& scene,
              const PlannerParams& params) {
  Planner planner(scene, params);
  return planner.plan(q_init, q_goal);
}

std::optional<std::size_t> first_invalid_edge(const PushPlan& plan, const Scene& scene) {
  for (std::size_t i = 1; i < plan.waypoints.size(); ++i) {
    const Waypoint& from = plan.waypoints[i - 1];
    const Waypoint& to = plan.waypoints[i];
    if (!to.pusher) return i;
    const auto idx = scene.pusher_index(*to.pusher);
    if (!idx) return i;
    const Twist tw = twist_between(from.q, to.q);
    if (tw.v.norm() == 0.0) return i;
    const Pusher& p = scene.pushers[*idx];
    if (!p.gravity_aligned) return i;
    if (!robust_push_check(tw, scene.grasp, p, scene.pusher_cones[*idx], from.q)) return i;
  }
  return std::nullopt;
}

}  // namespace conepush
