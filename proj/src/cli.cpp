#include "conepush/cli.hpp"

#include "conepush/error.hpp"
#include "conepush/mechanics.hpp"
#include "conepush/sim.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace conepush {

namespace {

using nlohmann::json;

json pose_mm_deg(const PlanarPose& p) { return json::array({p.x_mm(), p.z_mm(), p.theta_deg()}); }

PlanarPose pose_from(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3) throw ParseError(field, "expected [x_mm, z_mm, theta_deg]");
  for (const auto& v : j)
    if (!v.is_number()) throw ParseError(field, "expected numbers");
  return PlanarPose::from_mm_deg(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

template <typename T>
T get_field(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ParseError(path + key, "missing field");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(path + key, e.what());
  }
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("conepush");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("CONEPUSH_LOG"))
    spdlog::set_level(spdlog::level::from_str(lvl));
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(prec) << v;
  return s.str();
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ",") + s;
  return out;
}

Scene load_compiled(const std::string& path) { return compile_scene(load_scene(path)); }

PlanarPose goal_from(const std::vector<double>& goal, const Scene& scene) {
  if (!goal.empty()) return PlanarPose::from_mm_deg(goal[0], goal[1], goal[2]);
  if (!scene.goal) throw ValidationError("scene has no goal; pass --goal X Z THETA");
  return *scene.goal;
}

struct PlanFlags {
  std::vector<double> goal;
  std::uint64_t seed = 0;
  double step_mm = 2.0;
  int max_iters = 10000;
  std::vector<double> goal_tol;
  int trials = 1;
  std::string out;
};

int cmd_plan(const std::string& scene_path, const PlanFlags& f, std::ostream& out) {
  const Scene scene = load_compiled(scene_path);
  const PlanarPose goal = goal_from(f.goal, scene);
  PlannerParams params;
  params.step_size = mm_to_m(f.step_mm);
  params.rewire_radius = 3.0 * params.step_size;
  params.max_iterations = f.max_iters;
  if (!f.goal_tol.empty())
    params.goal_tolerance = {mm_to_m(f.goal_tol[0]), mm_to_m(f.goal_tol[1]),
                             deg_to_rad(f.goal_tol[2])};
  if (f.trials < 1) throw std::invalid_argument("--trials must be positive");

  std::optional<PushPlan> first;
  std::vector<double> times;
  int failures = 0;
  for (int i = 0; i < f.trials; ++i) {
    params.rng_seed = f.seed + static_cast<std::uint64_t>(i);
    try {
      PushPlan p = plan(scene.initial, goal, scene, params);
      spdlog::info("trial {} (seed {}): cost {} in {} iterations, {:.1f} ms", i, params.rng_seed,
                   p.total_cost, p.iterations, p.wall_time_ms);
      times.push_back(p.wall_time_ms);
      if (!first) first = std::move(p);
    } catch (const NoPlanFound& e) {
      spdlog::info("trial {} (seed {}): {}", i, params.rng_seed, e.what());
      ++failures;
    }
  }
  if (!first) throw NoPlanFound("no plan found in " + std::to_string(f.trials) + " trial(s)");

  if (!f.out.empty()) save_plan(*first, f.out);
  const std::size_t pushes = first->waypoints.empty() ? 0 : first->waypoints.size() - 1;
  out << "plan: scene=" << scene.name << " waypoints=" << first->waypoints.size()
      << " pushes=" << pushes << " cost=" << fmt(first->total_cost, 1)
      << " switches=" << first->switch_count << " pushers=" << join(first->pushers_used())
      << " iterations=" << first->iterations << " time_ms=" << fmt(first->wall_time_ms, 1) << "\n";
  if (f.trials > 1) {
    std::sort(times.begin(), times.end());
    const std::size_t n = times.size();
    const double median = n % 2 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
    out << "trials: " << f.trials << " succeeded=" << n << " failed=" << failures
        << " median_time_ms=" << fmt(median, 1) << "\n";
  }
  return kExitOk;
}

int cmd_simulate(const std::string& scene_path, const std::string& plan_path,
                 const std::string& csv_path, const std::string& json_path, std::ostream& out) {
  const Scene scene = load_compiled(scene_path);
  const PushPlan p = load_plan(plan_path);
  if (const auto bad = first_invalid_edge(p, scene)) {
    spdlog::error("plan edge into waypoint {} fails the robust check", *bad);
    throw StickingViolation(static_cast<int>(*bad), -1.0);
  }
  const ExecutionTrace trace = simulate_plan(p, scene);
  if (!csv_path.empty()) export_trace(trace, csv_path);
  if (!json_path.empty()) {
    std::ofstream jf(json_path);
    if (!jf) throw IoError("cannot open '" + json_path + "' for writing");
    jf << trace_to_json(trace).dump(2) << "\n";
  }
  out << "simulate: steps=" << trace.steps.size() << " violations=" << trace.violations.size()
      << " max_segment_displacement_mm=" << fmt(m_to_mm(trace.max_segment_displacement()), 6)
      << " pushers=" << join(p.pushers_used()) << "\n";
  if (!trace.violations.empty())
    throw StickingViolation(trace.violations.front().step, trace.violations.front().margin);
  return kExitOk;
}

int cmd_cones(const std::string& scene_path, const std::vector<double>& pose_in,
              const std::string& json_path, std::ostream& out) {
  const Scene scene = load_compiled(scene_path);
  const PlanarPose q = pose_in.empty()
                           ? scene.initial
                           : PlanarPose::from_mm_deg(pose_in[0], pose_in[1], pose_in[2]);
  if (!grasp_maintained(q, scene))
    throw ValidationError("grasp is not maintained at the requested pose");

  json doc;
  doc["pose"] = pose_mm_deg(q);
  doc["cones"] = json::array();
  for (const Pusher& p : scene.pushers) {
    json c;
    c["pusher"] = p.id;
    try {
      const PolyhedralCone cone = compute_robust_motion_cone(scene.grasp, p, q);
      c["generators"] = json::array();
      for (const Vec3& g : cone.generators()) c["generators"].push_back({g[0], g[1], g[2]});
      c["facet_normals"] = json::array();
      for (const Vec3& n : cone.facet_normals()) c["facet_normals"].push_back({n[0], n[1], n[2]});
      c["degenerate"] = cone.degenerate();
      out << "cone " << p.id << ": generators=" << cone.generators().size()
          << " facets=" << cone.facet_normals().size()
          << (cone.degenerate() ? " degenerate" : "") << "\n";
      for (const Vec3& g : cone.generators())
        out << "  g " << fmt(g[0], 6) << " " << fmt(g[1], 6) << " " << fmt(g[2], 6) << "\n";
    } catch (const NotGravityAligned& e) {
      c["error"] = e.what();
      out << "cone " << p.id << ": unavailable (" << e.what() << ")\n";
    }
    doc["cones"].push_back(std::move(c));
  }
  if (!json_path.empty()) {
    std::ofstream jf(json_path);
    if (!jf) throw IoError("cannot open '" + json_path + "' for writing");
    jf << doc.dump(2) << "\n";
  }
  return kExitOk;
}

int cmd_validate(const std::string& scene_path, std::ostream& out) {
  const Scene scene = load_compiled(scene_path);
  out << "valid: scene=" << scene.name << " pushers=" << scene.pushers.size() << "\n";
  return kExitOk;
}

}  // namespace

json plan_to_json(const PushPlan& plan) {
  json j;
  j["format_version"] = kPlanFormatVersion;
  j["scene"] = plan.scene;
  j["q_init"] = pose_mm_deg(plan.q_init);
  j["q_goal"] = pose_mm_deg(plan.q_goal);
  j["waypoints"] = json::array();
  for (const Waypoint& w : plan.waypoints)
    j["waypoints"].push_back(
        {{"q", pose_mm_deg(w.q)}, {"pusher", w.pusher ? json(*w.pusher) : json(nullptr)}});
  j["pushers"] = plan.pushers_used();
  j["total_cost"] = plan.total_cost;
  j["switch_count"] = plan.switch_count;
  j["iterations"] = plan.iterations;
  j["wall_time_ms"] = plan.wall_time_ms;
  j["seed"] = plan.seed;
  j["angular_weight_m_per_rad"] = plan.angular_weight;
  return j;
}

PushPlan plan_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("", "plan must be a JSON object");
  const int version = get_field<int>(j, "format_version", "");
  if (version != kPlanFormatVersion)
    throw ParseError("format_version", "unsupported version " + std::to_string(version));
  PushPlan p;
  p.scene = get_field<std::string>(j, "scene", "");
  if (!j.contains("q_init")) throw ParseError("q_init", "missing field");
  if (!j.contains("q_goal")) throw ParseError("q_goal", "missing field");
  p.q_init = pose_from(j["q_init"], "q_init");
  p.q_goal = pose_from(j["q_goal"], "q_goal");
  if (!j.contains("waypoints") || !j["waypoints"].is_array())
    throw ParseError("waypoints", "expected an array");
  for (std::size_t i = 0; i < j["waypoints"].size(); ++i) {
    const json& w = j["waypoints"][i];
    const std::string path = "waypoints[" + std::to_string(i) + "]";
    if (!w.is_object() || !w.contains("q")) throw ParseError(path + ".q", "missing field");
    Waypoint wp;
    wp.q = pose_from(w["q"], path + ".q");
    if (w.contains("pusher") && !w["pusher"].is_null()) {
      if (!w["pusher"].is_string()) throw ParseError(path + ".pusher", "expected a string");
      wp.pusher = w["pusher"].get<std::string>();
    }
    p.waypoints.push_back(std::move(wp));
  }
  p.total_cost = get_field<double>(j, "total_cost", "");
  p.switch_count = get_field<int>(j, "switch_count", "");
  p.iterations = get_field<int>(j, "iterations", "");
  p.wall_time_ms = get_field<double>(j, "wall_time_ms", "");
  if (j.contains("seed")) p.seed = get_field<std::uint64_t>(j, "seed", "");
  if (j.contains("angular_weight_m_per_rad"))
    p.angular_weight = get_field<double>(j, "angular_weight_m_per_rad", "");
  return p;
}

void save_plan(const PushPlan& plan, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << plan_to_json(plan).dump(2) << "\n";
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

PushPlan load_plan(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open plan '" + path.string() + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("", e.what(), line_of_offset(text, e.byte));
  }
  return plan_from_json(j);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  static const bool logging_ready = (setup_logging(), true);
  (void)logging_ready;

  CLI::App app{"Prehensile pushing regrasp planner"};
  app.require_subcommand(1);

  std::string scene;
  PlanFlags pf;
  auto* plan_cmd = app.add_subcommand("plan", "plan a regrasp for the scene goal or --goal");
  plan_cmd->add_option("scene", scene, "scene file")->required();
  plan_cmd->add_option("--goal", pf.goal, "goal X Z THETA (mm, mm, deg)")->expected(3);
  plan_cmd->add_option("--seed", pf.seed, "random seed");
  plan_cmd->add_option("--step-mm", pf.step_mm, "unit step (mm)");
  plan_cmd->add_option("--max-iters", pf.max_iters, "iteration budget");
  plan_cmd->add_option("--goal-tol", pf.goal_tol, "goal tolerance X Z THETA (mm, mm, deg)")
      ->expected(3);
  plan_cmd->add_option("--trials", pf.trials, "number of runs with seeds seed..seed+N-1");
  plan_cmd->add_option("--out", pf.out, "plan JSON output");

  std::string plan_path, csv_path, json_path;
  auto* sim_cmd = app.add_subcommand("simulate", "execute a plan and write the trace");
  sim_cmd->add_option("scene", scene, "scene file")->required();
  sim_cmd->add_option("--plan", plan_path, "plan JSON")->required();
  sim_cmd->add_option("--out", csv_path, "trace CSV output");
  sim_cmd->add_option("--json", json_path, "trace JSON output");

  std::vector<double> pose;
  auto* cones_cmd = app.add_subcommand("cones", "dump robust motion cones at a pose");
  cones_cmd->add_option("scene", scene, "scene file")->required();
  cones_cmd->add_option("--pose", pose, "pose X Z THETA (mm, mm, deg)")->expected(3);
  cones_cmd->add_option("--out", json_path, "cone JSON output");

  auto* validate_cmd = app.add_subcommand("validate", "load and validate a scene");
  validate_cmd->add_option("scene", scene, "scene file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitError;
  }

  try {
    if (*plan_cmd) return cmd_plan(scene, pf, out);
    if (*sim_cmd) return cmd_simulate(scene, plan_path, csv_path, json_path, out);
    if (*cones_cmd) return cmd_cones(scene, pose, json_path, out);
    if (*validate_cmd) return cmd_validate(scene, out);
  } catch (const NoPlanFound& e) {
    err << "error: " << e.what() << "\n";
    return kExitNoPlan;
  } catch (const StickingViolation& e) {
    err << "error: " << e.what() << "\n";
    return kExitSticking;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace conepush
