#pragma once

#include "chainplan/plan.hpp"
#include "chainplan/world.hpp"

#include <string>
#include <vector>

namespace chainplan {

/// One instant of a plan replay.
struct Keyframe {
  CompositeConfig config;
  int phase = 0;
  std::string label;  // "segment", "go", "open", "retreat", "swing", "approach", "close", "back"
};

/// Flattens a plan into keyframes, one per stored waypoint.
std::vector<Keyframe> plan_keyframes(const CompositePlan& plan);

struct RenderOptions {
  double fps = 10.0;
  double seconds_per_waypoint = 0.05;
  int width_px = 800;
};

struct SvgFrame {
  std::string name;  // frame_00000.svg, ...
  std::string svg;
};

/// Samples the keyframes at 1/fps (hold-last, no interpolation). Coordinates inside the scene
/// group are world coordinates in metres.
std::vector<SvgFrame> render_frames(const CompositePlan& plan, const WorldDescription& world,
                                    const RenderOptions& opts = {});

std::string render_svg(const Keyframe& k, const WorldDescription& world, const RenderOptions& opts = {});

}  // namespace chainplan
