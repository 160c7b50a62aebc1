#pragma once

#include "chainplan/exec_sim.hpp"
#include "chainplan/plan.hpp"
#include "chainplan/planner.hpp"
#include "chainplan/world.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace chainplan {

inline constexpr const char* kSchemaVersion = "1";

/// Malformed JSON or a document that does not match its schema. Parse errors carry
/// "line L, column C" in the message.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Scenario {
  std::string name;
  WorldDescription world;
  GraspSet grasps;
  CompositeConfig start;
  Pose2 goal;
  PlannerParams params;
};

/// Parses and validates; the start must be chain-closed and collision-free.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);
std::string dump_scenario(const Scenario& s);

struct PlanFile {
  std::string scenario;
  std::uint64_t seed = 0;
  int r_max = 0;
  CompositePlan plan;
};

std::string dump_plan(const PlanFile& p);
PlanFile parse_plan(const std::string& text);
PlanFile load_plan(const std::filesystem::path& path);

std::string dump_stats(const PlanStats& s, PlanStatus status, std::uint64_t seed, int r_max);

/// One JSON object per line.
std::string dump_trace_jsonl(const ExecutionTrace& t);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace chainplan
