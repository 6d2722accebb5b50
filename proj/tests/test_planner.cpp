#include "conepush/error.hpp"
#include "conepush/mechanics.hpp"
#include "conepush/planner.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace conepush;
using test_support::bundled_scene;

namespace {

PlannerParams params_with_seed(std::uint64_t seed) {
  PlannerParams p;
  p.rng_seed = seed;
  return p;
}

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (a + t * ab - p).norm();
}

// Independent finger-clearance oracle: even-odd ray cast plus distance to
// every edge.
bool finger_clear(const Scene& s, const PlanarPose& q) {
  const PlanarPose inv = q.inverse();
  const Vec2 c = inv.rotation() * s.grasp.finger_center + Vec2(inv.x(), inv.z());
  const auto& v = s.polygon.vertices();
  bool inside = false;
  double d = 1e9;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y() > c.y()) != (v[j].y() > c.y())) {
      const double x = v[j].x() + (c.y() - v[j].y()) * (v[i].x() - v[j].x()) / (v[i].y() - v[j].y());
      if (c.x() < x) inside = !inside;
    }
    d = std::min(d, segment_distance(c, v[j], v[i]));
  }
  return inside && d >= s.grasp.finger.radius();
}

int edge_cost_oracle(const std::optional<std::size_t>& parent_pusher, std::size_t pusher) {
  return !parent_pusher || *parent_pusher == pusher ? 1 : 10;
}

}  // namespace

TEST(PlannerParams, Validate) {
  EXPECT_NO_THROW(PlannerParams{}.validate());
  auto bad = [](auto mutate) {
    PlannerParams p;
    mutate(p);
    EXPECT_THROW(p.validate(), std::invalid_argument);
  };
  bad([](PlannerParams& p) { p.step_size = 0; });
  bad([](PlannerParams& p) { p.goal_tolerance[2] = -1; });
  bad([](PlannerParams& p) { p.max_iterations = 0; });
  bad([](PlannerParams& p) { p.temperature_rate = 1.0; });
  bad([](PlannerParams& p) { p.goal_bias = 1.5; });
  bad([](PlannerParams& p) { p.substep = std::nan(""); });
  const Scene s = bundled_scene("square_prism");
  PlannerParams p;
  p.rewire_radius = -1;
  EXPECT_THROW(Planner(s, p), std::invalid_argument);
}

TEST(ConfigMetric, WrapsAngles) {
  const ConfigMetric m(0.05);
  const PlanarPose a(0, 0, deg_to_rad(179)), b(0, 0, deg_to_rad(-179));
  EXPECT_NEAR(m.distance(a, b), 0.05 * deg_to_rad(2), 1e-15);
  EXPECT_NEAR(m.difference(a, b)[2], deg_to_rad(2), 1e-14);
  EXPECT_NEAR(m.distance(PlanarPose(0.003, 0.004, 0), PlanarPose()), 0.005, 1e-15);
  EXPECT_NEAR(m.twist_norm(Twist(0, 0, 2)), 0.1, 1e-15);
}

TEST(Sampling, GoalBiasAndDegenerateBox) {
  std::mt19937_64 rng(41);
  ConfigBounds box{Vec3(-1, -1, -1), Vec3(1, 1, 1)};
  const PlanarPose goal(0.5, 0.5, 0.5);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(sample_random_configuration(box, goal, 1.0, rng), goal);
  ConfigBounds point{Vec3(0.1, 0.2, 0.3), Vec3(0.1, 0.2, 0.3)};
  const PlanarPose s = sample_random_configuration(point, goal, 0.0, rng);
  EXPECT_DOUBLE_EQ(s.x(), 0.1);
  EXPECT_DOUBLE_EQ(s.z(), 0.2);
  EXPECT_DOUBLE_EQ(s.theta(), 0.3);
}

TEST(Sampling, UniformOverBoxAndGoalFrequency) {
  std::mt19937_64 rng(42);
  ConfigBounds box{Vec3(-0.02, -0.01, -1.0), Vec3(0.02, 0.01, 1.0)};
  const PlanarPose goal(1, 1, 0);  // outside the box, so goal draws are recognizable
  const int n = 20000, bins = 10;
  std::array<std::array<int, bins>, 3> counts{};
  int goals = 0;
  for (int i = 0; i < n; ++i) {
    const PlanarPose q = sample_random_configuration(box, goal, 0.1, rng);
    if (q == goal) {
      ++goals;
      continue;
    }
    ASSERT_TRUE(box.contains(q));
    const Vec3 v(q.x(), q.z(), q.theta());
    for (int d = 0; d < 3; ++d) {
      const int b = std::min(bins - 1, static_cast<int>((v[d] - box.lo[d]) / (box.hi[d] - box.lo[d]) * bins));
      ++counts[d][b];
    }
  }
  EXPECT_NEAR(goals / double(n), 0.1, 0.01);
  for (int d = 0; d < 3; ++d) {
    const double expected = (n - goals) / double(bins);
    double chi2 = 0;
    for (int b = 0; b < bins; ++b) chi2 += std::pow(counts[d][b] - expected, 2) / expected;
    EXPECT_LT(chi2, 27.88) << "axis " << d;  // 9 dof, p = 0.001
  }
}

TEST(Sampling, DeterministicForSeed) {
  ConfigBounds box{Vec3(-1, -1, -1), Vec3(1, 1, 1)};
  std::mt19937_64 a(7), b(7);
  for (int i = 0; i < 100; ++i)
    EXPECT_EQ(sample_random_configuration(box, PlanarPose(), 0.1, a),
              sample_random_configuration(box, PlanarPose(), 0.1, b));
}

TEST(TakeUnitStep, Cases) {
  const ConfigMetric m(0.05);
  const PlanarPose from(0.001, 0.0, 0.0);
  const PlanarPose near(0.002, 0.0, 0.01);
  EXPECT_EQ(take_unit_step(from, near, 0.002, m), near);
  const PlanarPose far(0.011, 0.0, 0.0);
  const PlanarPose s = take_unit_step(from, far, 0.002, m);
  EXPECT_NEAR(m.distance(from, s), 0.002, 1e-15);
  EXPECT_NEAR(s.x(), 0.003, 1e-15);
  // Steps across the angle seam go the short way.
  const PlanarPose a(0, 0, deg_to_rad(179)), b(0, 0, deg_to_rad(-170));
  const PlanarPose w = take_unit_step(a, b, 0.05 * deg_to_rad(2), m);
  EXPECT_NEAR(rad_to_deg(w.theta()), -179.0, 1e-9);
}

TEST(PlanTree, NearestMatchesLinearScan) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-0.01, 0.01);
  const ConfigMetric m(0.03);
  PlanTree t;
  t.add_root(PlanarPose(), {});
  for (int i = 0; i < 200; ++i) t.add_node(PlanarPose(u(rng), u(rng), 50 * u(rng)), i / 2, 0, {});
  t.add_node(t[5].q, 0, 0, {});  // duplicate: the earlier node wins ties
  for (int k = 0; k < 500; ++k) {
    const PlanarPose q = k == 0 ? t[5].q : PlanarPose(u(rng), u(rng), 50 * u(rng));
    std::size_t best = 0;
    for (std::size_t i = 1; i < t.size(); ++i)
      if (m.distance(t[i].q, q) < m.distance(t[best].q, q)) best = i;
    EXPECT_EQ(t.nearest(q, m), best);
  }
  const auto nb = t.within(PlanarPose(), 0.005, m);
  for (std::size_t i = 0; i < t.size(); ++i)
    EXPECT_EQ(std::count(nb.begin(), nb.end(), i), m.distance(t[i].q, PlanarPose()) <= 0.005 ? 1 : 0);
}

TEST(PlanTree, CostsAndReparenting) {
  PlanTree t;
  t.add_root(PlanarPose(), {});
  const std::size_t a = t.add_node(PlanarPose(0.001, 0, 0), 0, 0, {});  // root edge: 1
  const std::size_t b = t.add_node(PlanarPose(0.002, 0, 0), a, 0, {});  // same: 2
  const std::size_t c = t.add_node(PlanarPose(0.003, 0, 0), b, 1, {});  // switch: 12
  const std::size_t d = t.add_node(PlanarPose(0.004, 0, 0), c, 1, {});  // same: 13
  EXPECT_EQ(t[a].cost_tenths, 1);
  EXPECT_EQ(t[b].cost_tenths, 2);
  EXPECT_EQ(t[c].cost_tenths, 12);
  EXPECT_EQ(t[d].cost_tenths, 13);
  EXPECT_DOUBLE_EQ(t[d].cost(), 1.3);
  EXPECT_EQ(t.path_to(d), (std::vector<std::size_t>{0, a, b, c, d}));
  EXPECT_TRUE(t.is_ancestor(a, d));
  EXPECT_FALSE(t.is_ancestor(d, a));

  EXPECT_FALSE(t.reparent(a, d, 0));  // cycle
  EXPECT_FALSE(t.reparent(0, a, 0));  // root
  // Moving c under the root with pusher 1 drops its cost to 1 and d to 2.
  EXPECT_TRUE(t.reparent(c, 0, 1));
  EXPECT_EQ(t[c].cost_tenths, 1);
  EXPECT_EQ(t[d].cost_tenths, 2);
  EXPECT_EQ(*t[c].parent, 0u);
  EXPECT_EQ(std::count(t[b].children.begin(), t[b].children.end(), c), 0);
  const std::size_t e = t.add_node(PlanarPose(0.005, 0, 0), d, 1, {});  // 3
  EXPECT_FALSE(t.reparent(d, c, 0));  // d itself would rise to 11
  // d under the root with pusher 0 costs 1, but e would become a switch (11).
  EXPECT_FALSE(t.reparent(d, 0, 0));
  EXPECT_EQ(t[d].cost_tenths, 2);
  EXPECT_EQ(t[e].cost_tenths, 3);
  EXPECT_EQ(*t[d].parent, c);
}

TEST(TransitionTest, DownhillAlwaysAcceptedAndCools) {
  const PlanarPose goal(0.01, 0, 0);
  TransitionTest tt(goal, ConfigMetric(0.05), 1e-2, 2.0);
  std::mt19937_64 rng(44);
  EXPECT_DOUBLE_EQ(tt.config_cost(PlanarPose()), 10.0);
  double prev = tt.temperature();
  for (int i = 0; i < 40; ++i) {
    EXPECT_TRUE(tt(PlanarPose(), PlanarPose(0.001, 0, 0), rng));
    EXPECT_LE(tt.temperature(), prev);
    prev = tt.temperature();
  }
  EXPECT_DOUBLE_EQ(tt.temperature(), 1e-8);  // floor
  EXPECT_DOUBLE_EQ(tt.acceptance_probability(-1.0), 1.0);
}

TEST(TransitionTest, RejectionsHeatMonotonically) {
  TransitionTest tt(PlanarPose(), ConfigMetric(0.05), 1e-2, 2.0);
  std::mt19937_64 rng(45);
  const PlanarPose from(0.001, 0, 0), to(0.003, 0, 0);  // uphill by 2 mm
  double prev = tt.temperature();
  int accepted_at = -1;
  for (int i = 0; i < 60 && accepted_at < 0; ++i) {
    const double p = tt.acceptance_probability(2.0);
    EXPECT_NEAR(p, std::exp(-2.0 / tt.temperature()), 1e-15);
    if (tt(from, to, rng)) {
      accepted_at = i;
    } else {
      EXPECT_DOUBLE_EQ(tt.temperature(), 2 * prev);
      prev = tt.temperature();
    }
  }
  EXPECT_GT(accepted_at, 0);
}

TEST(GraspMaintained, SquareCases) {
  const Scene s = bundled_scene("square_prism");
  EXPECT_TRUE(grasp_maintained(PlanarPose(), s));
  // Finger 7.5 mm from the top face needs 5 mm clearance; 8 mm from it fails.
  EXPECT_TRUE(grasp_maintained(PlanarPose::from_mm_deg(0, 7.5, 0), s));
  EXPECT_FALSE(grasp_maintained(PlanarPose::from_mm_deg(0, 8, 0), s));
  EXPECT_TRUE(grasp_maintained(PlanarPose::from_mm_deg(0, 8, 0), s, 0.5));
  EXPECT_FALSE(grasp_maintained(PlanarPose::from_mm_deg(60, 0, 0), s));
}

TEST(GraspMaintained, TShapeMatchesOracle) {
  const Scene s = bundled_scene("t_shape");
  std::mt19937_64 rng(46);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int inside = 0;
  for (int i = 0; i < 20000; ++i) {
    const PlanarPose q = PlanarPose::from_mm_deg(40 * u(rng), 40 * u(rng), 180 * u(rng));
    const bool oracle = finger_clear(s, q);
    EXPECT_EQ(grasp_maintained(q, s), oracle) << q.x_mm() << " " << q.z_mm() << " " << q.theta_deg();
    inside += oracle;
  }
  EXPECT_GT(inside, 500);
}

TEST(Planner, RobustPushStaysInCone) {
  const Scene s = bundled_scene("rectangular_prism");
  Planner p(s, PlannerParams{});
  p.reset(s.initial, *s.goal);
  std::mt19937_64 rng(47);
  int found = 0;
  for (int i = 0; i < 200; ++i) {
    const PlanarPose q_rand = sample_random_configuration(s.bounds, *s.goal, 0.0, rng);
    const PlanarPose q_step = take_unit_step(s.initial, q_rand, 0.002, p.metric());
    try {
      const PushEdge e = p.robust_push(0, q_step);
      ++found;
      EXPECT_TRUE(cone_contains(*p.tree()[0].cones[e.pusher], e.twist.v, 1e-9));
      EXPECT_TRUE(robust_push_check(e.twist, s.grasp, s.pushers[e.pusher], s.initial));
      EXPECT_LE(p.metric().distance(s.initial, e.q_new), 0.002 + 1e-12);
      EXPECT_LT(p.metric().distance(integrate_twist(s.initial, e.twist, 1.0), e.q_new), 1e-15);
    } catch (const NoValidPusher&) {
    }
  }
  EXPECT_GT(found, 150);
}

TEST(Planner, RewireHandBuiltChain) {
  const Scene s = bundled_scene("square_prism");
  const std::size_t left = *s.pusher_index("left"), bottom = *s.pusher_index("bottom");
  Planner p(s, PlannerParams{});
  p.reset(PlanarPose(), PlanarPose::from_mm_deg(20, 0, 0));
  const std::size_t a = p.add_node(PlanarPose::from_mm_deg(1, 0, 0), 0, left);        // 0.1
  const std::size_t c = p.add_node(PlanarPose::from_mm_deg(0, 1, 0), 0, bottom);      // 0.1
  const std::size_t b = p.add_node(PlanarPose::from_mm_deg(2, 0, 0), c, left);        // 1.1
  ASSERT_EQ(p.tree()[b].cost_tenths, 11);
  // Pure +x translation from a is a left-pusher push: b drops to 0.2.
  EXPECT_EQ(p.rewire(a), 1);
  EXPECT_EQ(*p.tree()[b].parent, a);
  EXPECT_EQ(*p.tree()[b].pusher, left);
  EXPECT_EQ(p.tree()[b].cost_tenths, 2);
  EXPECT_EQ(p.rewire(a), 0);
  EXPECT_EQ(p.rewire(c), 0);
}

TEST(Planner, OptimEdgeMatchesExhaustiveScan) {
  const Scene s = bundled_scene("rectangular_prism");
  PlannerParams params = params_with_seed(3);
  params.cost_threshold = 0.0;
  params.max_iterations = 300;
  Planner p(s, params);
  try {
    p.plan(s.initial, *s.goal);
  } catch (const NoPlanFound&) {
  }
  const PlanTree& t = p.tree();
  ASSERT_GT(t.size(), 50u);
  std::mt19937_64 rng(48);
  std::uniform_int_distribution<std::size_t> pick(0, t.size() - 1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int improved = 0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t base = pick(rng);
    const PlanarPose q = integrate_twist(t[base].q, Twist(0.002 * u(rng), 0.002 * u(rng), 0.05 * u(rng)), 1.0);
    const std::size_t def_pusher = k % s.pushers.size();
    int best = t[base].cost_tenths + edge_cost_oracle(t[base].pusher, def_pusher);
    const int def_cost = best;
    for (std::size_t nb = 0; nb < t.size(); ++nb) {
      if (nb == base || p.metric().distance(t[nb].q, q) > params.rewire_radius) continue;
      const Twist tw = twist_between(t[nb].q, q);
      for (std::size_t i = 0; i < s.pushers.size(); ++i) {
        if (!t[nb].cones[i] || !cone_contains(*t[nb].cones[i], tw.v)) continue;
        if (!p.edge_sticks(t[nb].q, tw, i) || !p.edge_keeps_grasp(t[nb].q, tw)) continue;
        best = std::min(best, t[nb].cost_tenths + edge_cost_oracle(t[nb].pusher, i));
      }
    }
    const auto [parent, pusher] = p.optim_edge(q, base, def_pusher);
    EXPECT_EQ(t[parent].cost_tenths + edge_cost_oracle(t[parent].pusher, pusher), best);
    improved += best < def_cost;
  }
  EXPECT_GT(improved, 0);
}

TEST(Planner, TreeEdgesAreValidAndCostsConsistent) {
  for (const char* name : {"square_prism", "rectangular_prism", "t_shape"}) {
    const Scene s = bundled_scene(name);
    Planner p(s, params_with_seed(5));
    p.plan(s.initial, *s.goal);
    const PlanTree& t = p.tree();
    for (std::size_t i = 1; i < t.size(); ++i) {
      const PlanNode& n = t[i];
      const PlanNode& par = t[*n.parent];
      EXPECT_EQ(n.cost_tenths, par.cost_tenths + edge_cost_oracle(par.pusher, *n.pusher)) << name;
      EXPECT_EQ(std::count(par.children.begin(), par.children.end(), i), 1);
      const Twist tw = twist_between(par.q, n.q);
      EXPECT_TRUE(robust_push_check(tw, s.grasp, s.pushers[*n.pusher], par.q)) << name << " node " << i;
      EXPECT_TRUE(grasp_maintained(n.q, s)) << name;
      EXPECT_TRUE(s.bounds.contains(n.q)) << name;
    }
  }
}

TEST(Plan, CostFormulaAndSwitchCount) {
  for (const char* name : {"square_prism", "rectangular_prism", "t_shape"}) {
    const Scene s = bundled_scene(name);
    const PushPlan plan = conepush::plan(s.initial, *s.goal, s, params_with_seed(11));
    ASSERT_FALSE(plan.empty());
    int tenths = 0, switches = 0;
    for (std::size_t i = 1; i < plan.waypoints.size(); ++i) {
      const auto& prev = plan.waypoints[i - 1].pusher;
      const auto& cur = plan.waypoints[i].pusher;
      ASSERT_TRUE(cur.has_value());
      const bool sw = prev && *prev != *cur;
      tenths += sw ? 10 : 1;
      switches += sw;
    }
    EXPECT_NEAR(plan.total_cost, tenths / 10.0, 1e-12) << name;
    EXPECT_EQ(plan.switch_count, switches) << name;
    EXPECT_LE(plan.total_cost, 5.0) << name;
    EXPECT_FALSE(first_invalid_edge(plan, s).has_value());
    const Vec3 d = ConfigMetric(1.0).difference(plan.waypoints.back().q, *s.goal);
    EXPECT_LE(std::abs(d[0]), 0.001 + 1e-12);
    EXPECT_LE(std::abs(d[1]), 0.001 + 1e-12);
    EXPECT_LE(std::abs(d[2]), deg_to_rad(2) + 1e-12);
    EXPECT_EQ(plan.waypoints.front().q, s.initial);
    EXPECT_EQ(plan.seed, 11u);
    EXPECT_EQ(plan.angular_weight, PlannerParams{}.angular_weight);
  }
}

TEST(Plan, DeterministicForSeed) {
  const Scene s = bundled_scene("t_shape");
  const PushPlan a = conepush::plan(s.initial, *s.goal, s, params_with_seed(9));
  const PushPlan b = conepush::plan(s.initial, *s.goal, s, params_with_seed(9));
  ASSERT_EQ(a.waypoints.size(), b.waypoints.size());
  for (std::size_t i = 0; i < a.waypoints.size(); ++i) {
    EXPECT_EQ(a.waypoints[i].q, b.waypoints[i].q);
    EXPECT_EQ(a.waypoints[i].pusher, b.waypoints[i].pusher);
  }
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Plan, StartInGoalRegionGivesEmptyPlan) {
  const Scene s = bundled_scene("square_prism");
  const PushPlan p = conepush::plan(s.initial, PlanarPose::from_mm_deg(0.5, 0, 1), s, PlannerParams{});
  EXPECT_TRUE(p.empty());
  EXPECT_EQ(p.waypoints.size(), 1u);
  EXPECT_EQ(p.total_cost, 0.0);
  EXPECT_EQ(p.switch_count, 0);
}

TEST(Plan, FailureModes) {
  const Scene s = bundled_scene("square_prism");
  EXPECT_THROW(conepush::plan(PlanarPose::from_mm_deg(0, 10, 0), *s.goal, s, PlannerParams{}), InvalidStart);
  EXPECT_THROW(conepush::plan(s.initial, PlanarPose::from_mm_deg(100, 0, 0), s, PlannerParams{}), NoPlanFound);
  PlannerParams tiny;
  tiny.max_iterations = 3;
  EXPECT_THROW(conepush::plan(s.initial, PlanarPose::from_mm_deg(-40, 0, 0), s, tiny), NoPlanFound);
  // Goal nodes exist but every path costs at least one tenth.
  PlannerParams strict;
  strict.cost_threshold = 0.05;
  strict.max_iterations = 300;
  EXPECT_THROW(conepush::plan(s.initial, *s.goal, s, strict), NoPlanFound);
}

TEST(SubstepCount, RoundsUp) {
  const ConfigMetric m(0.05);
  EXPECT_EQ(substep_count(Twist(0.002, 0, 0), m, 0.0005), 4);
  EXPECT_EQ(substep_count(Twist(0.0021, 0, 0), m, 0.0005), 5);
  EXPECT_EQ(substep_count(Twist(1e-6, 0, 0), m, 0.0005), 1);
}

TEST(FirstInvalidEdge, FlagsTamperedWaypoint) {
  const Scene s = bundled_scene("square_prism");
  PushPlan plan = conepush::plan(s.initial, *s.goal, s, params_with_seed(2));
  ASSERT_GE(plan.waypoints.size(), 3u);
  EXPECT_FALSE(first_invalid_edge(plan, s));
  plan.waypoints[2].q = PlanarPose(plan.waypoints[1].q.x(), plan.waypoints[1].q.z() + 0.002, 0);
  EXPECT_EQ(first_invalid_edge(plan, s), std::optional<std::size_t>(2));
  plan.waypoints[2].pusher = "missing";
  EXPECT_EQ(first_invalid_edge(plan, s), std::optional<std::size_t>(2));
}
