#pragma once

#include "chainplan/io.hpp"

#include <filesystem>
#include <string>

namespace testbed {

inline std::filesystem::path scenario_dir() { return CHAINPLAN_SCENARIO_DIR; }

inline chainplan::Scenario load(const std::string& name) {
  return chainplan::load_scenario(scenario_dir() / (name + ".json"));
}

/// The 0.5/0.4/0.3 reference arm at the origin with full-turn limits.
inline chainplan::ArmModel reference_arm() {
  chainplan::ArmModel a;
  a.links = {0.5, 0.4, 0.3};
  a.q_lower = Eigen::Vector3d::Constant(-chainplan::kPi);
  a.q_upper = Eigen::Vector3d::Constant(chainplan::kPi);
  return a;
}

inline Eigen::VectorXd q3(double a, double b, double c) {
  Eigen::VectorXd q(3);
  q << a, b, c;
  return q;
}

}  // namespace testbed
