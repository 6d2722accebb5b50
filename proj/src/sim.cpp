#include "conepush/sim.hpp"

#include "conepush/error.hpp"
#include "conepush/mechanics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace conepush {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt9(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, const std::string& field, int line) {
  if (s == "nan") return kNaN;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ParseError(field, "trailing characters in '" + s + "'", line);
    return v;
  } catch (const std::logic_error&) {
    throw ParseError(field, "not a number: '" + s + "'", line);
  }
}

nlohmann::json pose_json(const PlanarPose& p) {
  return nlohmann::json::array({p.x_mm(), p.z_mm(), p.theta_deg()});
}

ExecutionTrace run(const PushPlan& plan, const Scene& scene, const SimParams& params, bool strict) {
  const double w = params.angular_weight > 0.0 ? params.angular_weight
                   : plan.angular_weight > 0.0 ? plan.angular_weight
                                               : scene.characteristic_length();
  const ConfigMetric metric(w);
  ExecutionTrace trace;
  const PlanarPose start = plan.waypoints.empty() ? plan.q_init : plan.waypoints.front().q;

  std::vector<std::size_t> pusher_of(plan.waypoints.size(), 0);
  for (std::size_t i = 1; i < plan.waypoints.size(); ++i) {
    const auto& id = plan.waypoints[i].pusher;
    if (!id) throw ValidationError("waypoint " + std::to_string(i) + " has no pusher");
    const auto idx = scene.pusher_index(*id);
    if (!idx) throw ValidationError("plan uses unknown pusher '" + *id + "'");
    pusher_of[i] = *idx;
  }

  PlanarPose world =
      plan.waypoints.size() > 1 ? object_in_world_for(scene.pushers[pusher_of[1]]) : PlanarPose();
  auto push_step = [&](double t, const PlanarPose& q, const std::optional<std::string>& pusher,
                       const Twist& tw, double margin) {
    TraceStep s;
    s.step = static_cast<int>(trace.steps.size());
    s.t = t;
    s.object_in_grasp = q;
    s.object_in_world = world;
    s.gripper_in_world = compose(world, q.inverse());
    s.pusher = pusher;
    s.twist = tw;
    s.margin = margin;
    trace.steps.push_back(std::move(s));
  };
  push_step(0.0, start, std::nullopt, Twist(), kNaN);

  std::optional<std::size_t> active;
  for (std::size_t i = 1; i < plan.waypoints.size(); ++i) {
    const PlanarPose& from = plan.waypoints[i - 1].q;
    const PlanarPose& to = plan.waypoints[i].q;
    const std::size_t pi = pusher_of[i];
    const Pusher& p = scene.pushers[pi];
    const double t0 = static_cast<double>(i - 1);

    if (active && *active != pi) {
      world = object_in_world_for(p);
      push_step(t0, from, p.id, Twist(), kNaN);
    }
    active = pi;

    const Twist tw = twist_between(from, to);
    const int n = substep_count(tw, metric, params.substep);
    for (int k = 0; k < n; ++k) {
      const PlanarPose qk = integrate_twist(from, tw, static_cast<double>(k) / n);
      double margin = kNaN;
      bool ok = false;
      if (tw.v.norm() > 0.0) {
        margin = robust_push_margin(tw, scene.grasp, p, scene.pusher_cones[pi], qk);
        ok = cone_contains(scene.pusher_cones[pi], required_pusher_wrench(tw, scene.grasp, qk).v);
      }
      const int step_index = static_cast<int>(trace.steps.size());
      if (!ok) {
        const double m = std::isnan(margin) ? -std::numeric_limits<double>::infinity() : margin;
        if (strict) throw StickingViolation(step_index, m);
        trace.violations.push_back({step_index, m});
      }
      const PlanarPose qn = k + 1 == n ? to : integrate_twist(from, tw, static_cast<double>(k + 1) / n);
      push_step(t0 + static_cast<double>(k + 1) / n, qn, p.id, tw, margin);
    }
  }
  return trace;
}

}  // namespace

double ExecutionTrace::max_segment_displacement() const {
  double worst = 0.0;
  std::optional<std::string> seg;
  PlanarPose ref;
  for (const TraceStep& s : steps) {
    if (!s.pusher) continue;
    if (s.pusher != seg) {
      seg = s.pusher;
      ref = s.object_in_world;
      continue;
    }
    const double d = std::hypot(s.object_in_world.x() - ref.x(), s.object_in_world.z() - ref.z());
    worst = std::max(worst, d);
  }
  return worst;
}

PlanarPose object_in_world_for(const Pusher& p) {
  const Vec2 n = p.normal();
  const double theta = normalize_angle(kPi / 2.0 - std::atan2(n.y(), n.x()));
  const PlanarPose rot(0.0, 0.0, theta);
  const Vec2 c = rot.transform_point(p.center());
  return {-c.x(), -c.y(), theta};
}

ExecutionTrace simulate_plan(const PushPlan& plan, const Scene& scene, const SimParams& params) {
  return run(plan, scene, params, false);
}

ExecutionTrace execute_plan(const PushPlan& plan, const Scene& scene, const SimParams& params) {
  return run(plan, scene, params, true);
}

std::string trace_to_csv(const ExecutionTrace& trace) {
  std::string out =
      "step,t,qx_mm,qz_mm,qtheta_deg,obj_world_x_mm,obj_world_z_mm,obj_world_theta_deg,pusher,"
      "margin\n";
  for (const TraceStep& s : trace.steps) {
    out += std::to_string(s.step);
    for (double v : {s.t, s.object_in_grasp.x_mm(), s.object_in_grasp.z_mm(),
                     s.object_in_grasp.theta_deg(), s.object_in_world.x_mm(),
                     s.object_in_world.z_mm(), s.object_in_world.theta_deg()})
      out += "," + fmt9(v);
    out += "," + s.pusher.value_or("");
    out += "," + fmt9(s.margin) + "\n";
  }
  return out;
}

void export_trace(const ExecutionTrace& trace, const std::filesystem::path& path) {
  if (trace.steps.empty()) throw std::invalid_argument("cannot export an empty trace");
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << trace_to_csv(trace);
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<TraceCsvRow> parse_trace_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::vector<TraceCsvRow> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1) {
      if (line.rfind("step,t,", 0) != 0) throw ParseError("header", "unexpected CSV header", 1);
      continue;
    }
    if (line.empty()) continue;
    const auto cols = split_csv(line);
    if (cols.size() != 10) throw ParseError("row", "expected 10 columns", lineno);
    TraceCsvRow r;
    r.step = static_cast<int>(parse_number(cols[0], "step", lineno));
    r.t = parse_number(cols[1], "t", lineno);
    r.qx_mm = parse_number(cols[2], "qx_mm", lineno);
    r.qz_mm = parse_number(cols[3], "qz_mm", lineno);
    r.qtheta_deg = parse_number(cols[4], "qtheta_deg", lineno);
    r.obj_world_x_mm = parse_number(cols[5], "obj_world_x_mm", lineno);
    r.obj_world_z_mm = parse_number(cols[6], "obj_world_z_mm", lineno);
    r.obj_world_theta_deg = parse_number(cols[7], "obj_world_theta_deg", lineno);
    r.pusher = cols[8];
    r.margin = parse_number(cols[9], "margin", lineno);
    rows.push_back(std::move(r));
  }
  return rows;
}

nlohmann::json trace_to_json(const ExecutionTrace& trace) {
  nlohmann::json steps = nlohmann::json::array();
  for (const TraceStep& s : trace.steps) {
    nlohmann::json j;
    j["step"] = s.step;
    j["t"] = s.t;
    j["object_in_grasp"] = pose_json(s.object_in_grasp);
    j["gripper_in_world"] = pose_json(s.gripper_in_world);
    j["object_in_world"] = pose_json(s.object_in_world);
    j["pusher"] = s.pusher ? nlohmann::json(*s.pusher) : nlohmann::json(nullptr);
    j["twist"] = {s.twist.vx(), s.twist.vz(), s.twist.wy()};
    j["margin"] = std::isnan(s.margin) ? nlohmann::json(nullptr) : nlohmann::json(s.margin);
    steps.push_back(std::move(j));
  }
  nlohmann::json v = nlohmann::json::array();
  for (const StickingEvent& e : trace.violations) v.push_back({{"step", e.step}, {"margin", e.margin}});
  return {{"steps", steps}, {"violations", v}};
}

}  // namespace conepush
