#pragma once

// Command-line front end and the plan file format.

#include "conepush/planner.hpp"
#include "conepush/scene.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>

namespace conepush {

constexpr int kPlanFormatVersion = 1;

enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitNoPlan = 2,
  kExitSticking = 3,
};

nlohmann::json plan_to_json(const PushPlan& plan);
/// Throws ParseError on malformed documents.
PushPlan plan_from_json(const nlohmann::json& j);
void save_plan(const PushPlan& plan, const std::filesystem::path& path);
/// Throws IoError or ParseError.
PushPlan load_plan(const std::filesystem::path& path);

/// Entry point of `conepush plan|simulate|cones|validate <scene> [flags]`.
/// Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace conepush
