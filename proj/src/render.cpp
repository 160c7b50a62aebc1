#include "chainplan/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace chainplan {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5f", std::abs(v) < 5e-6 ? 0.0 : v);
  return buf;
}

std::string points_attr(const std::vector<Eigen::Vector2d>& pts) {
  std::string s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) s += ' ';
    s += fmt(pts[i].x()) + "," + fmt(pts[i].y());
  }
  return s;
}

struct Box {
  double x0, y0, x1, y1;
};

Box scene_box(const WorldDescription& world) {
  Box b{1e300, 1e300, -1e300, -1e300};
  auto add = [&b](const Eigen::Vector2d& p, double r = 0.0) {
    b.x0 = std::min(b.x0, p.x() - r);
    b.y0 = std::min(b.y0, p.y() - r);
    b.x1 = std::max(b.x1, p.x() + r);
    b.y1 = std::max(b.y1, p.y() + r);
  };
  for (const auto& a : world.arms)
    add(a.base.translation(), std::accumulate(a.links.begin(), a.links.end(), 0.0));
  for (const auto& s : world.surfaces) {
    add(s.seg.a);
    add(s.seg.b);
  }
  for (const auto& o : world.obstacles) {
    add(o.a);
    add(o.b);
  }
  if (b.x0 > b.x1) b = {-1, -1, 1, 1};
  constexpr double pad = 0.05;
  return {b.x0 - pad, b.y0 - pad, b.x1 + pad, b.y1 + pad};
}

}  // namespace

std::vector<Keyframe> plan_keyframes(const CompositePlan& plan) {
  std::vector<Keyframe> out;
  for (std::size_t pi = 0; pi < plan.phases.size(); ++pi) {
    const int ph = static_cast<int>(pi);
    if (const auto* seg = std::get_if<ClosedChainSegment>(&plan.phases[pi])) {
      for (const auto& c : seg->waypoints) out.push_back({c, ph, "segment"});
      continue;
    }
    const auto& a = std::get<IkSwitchPhase>(plan.phases[pi]).action;
    for (const auto& c : a.go) out.push_back({c, ph, "go"});
    CompositeConfig parked = a.go.empty() ? CompositeConfig{} : a.go.back();
    for (const auto& s : a.switches) {
      auto run = [&](const JointPath& p, const char* tag) {
        for (const auto& q : p) {
          parked.arms.at(static_cast<std::size_t>(s.arm)) = q;
          out.push_back({parked, ph, tag});
        }
      };
      if (s.retreat.empty() || s.approach.empty()) throw std::invalid_argument("arm switch with an empty phase");
      run({s.retreat.front()}, "open");
      run(s.retreat, "retreat");
      run(s.swing, "swing");
      run(s.approach, "approach");
      run({s.approach.back()}, "close");
    }
    for (const auto& c : a.back) out.push_back({c, ph, "back"});
  }
  return out;
}

std::string render_svg(const Keyframe& k, const WorldDescription& world, const RenderOptions& opts) {
  const Box b = scene_box(world);
  const double w = b.x1 - b.x0, h = b.y1 - b.y0;
  const int wpx = opts.width_px;
  const int hpx = static_cast<int>(std::lround(wpx * h / w));
  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + std::to_string(wpx) + "\" height=\"" +
       std::to_string(hpx) + "\" viewBox=\"" + fmt(b.x0) + " " + fmt(-b.y1) + " " + fmt(w) + " " + fmt(h) + "\">\n";
  s += "<rect x=\"" + fmt(b.x0) + "\" y=\"" + fmt(-b.y1) + "\" width=\"" + fmt(w) + "\" height=\"" + fmt(h) +
       "\" fill=\"white\"/>\n";
  s += "<g id=\"scene\" transform=\"scale(1,-1)\" stroke-linecap=\"round\" stroke-linejoin=\"round\">\n";
  for (const auto& sf : world.surfaces)
    s += "<line class=\"surface\" x1=\"" + fmt(sf.seg.a.x()) + "\" y1=\"" + fmt(sf.seg.a.y()) + "\" x2=\"" +
         fmt(sf.seg.b.x()) + "\" y2=\"" + fmt(sf.seg.b.y()) + "\" stroke=\"#555555\" stroke-width=\"0.012\"/>\n";
  for (const auto& o : world.obstacles)
    s += "<line class=\"obstacle\" x1=\"" + fmt(o.a.x()) + "\" y1=\"" + fmt(o.a.y()) + "\" x2=\"" + fmt(o.b.x()) +
         "\" y2=\"" + fmt(o.b.y()) + "\" stroke=\"#aa3333\" stroke-width=\"0.012\"/>\n";
  s += "<polygon id=\"object\" points=\"" + points_attr(world.object_vertices(k.config.object)) +
       "\" fill=\"#e8c070\" stroke=\"#7a5a10\" stroke-width=\"0.004\"/>\n";
  static const char* colors[] = {"#2060c0", "#20a060", "#a040a0", "#c07020"};
  for (std::size_t i = 0; i < world.arms.size() && i < k.config.arms.size(); ++i)
    s += "<polyline class=\"arm\" id=\"arm" + std::to_string(i) + "\" points=\"" +
         points_attr(link_points(world.arms[i], k.config.arms[i])) + "\" fill=\"none\" stroke=\"" + colors[i % 4] +
         "\" stroke-width=\"0.012\"/>\n";
  s += "</g>\n";
  s += "<text id=\"label\" x=\"" + fmt(b.x0 + 0.02 * w) + "\" y=\"" + fmt(-b.y1 + 0.06 * h) + "\" font-size=\"" +
       fmt(0.04 * h) + "\" font-family=\"monospace\">phase " + std::to_string(k.phase) + ": " + k.label + "</text>\n";
  s += "</svg>\n";
  return s;
}

std::vector<SvgFrame> render_frames(const CompositePlan& plan, const WorldDescription& world,
                                    const RenderOptions& opts) {
  if (!(opts.fps > 0.0) || !(opts.seconds_per_waypoint > 0.0)) throw std::invalid_argument("fps must be positive");
  const auto keys = plan_keyframes(plan);
  if (keys.empty()) return {};
  const double duration = static_cast<double>(keys.size() - 1) * opts.seconds_per_waypoint;
  const long n = std::max(1L, static_cast<long>(std::ceil(duration * opts.fps - 1e-9)));
  std::vector<SvgFrame> frames;
  for (long f = 0; f < n; ++f) {
    const double t = static_cast<double>(f) / opts.fps;
    const auto idx = std::min(keys.size() - 1, static_cast<std::size_t>(std::floor(t / opts.seconds_per_waypoint + 1e-9)));
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05ld.svg", f);
    frames.push_back({name, render_svg(keys[idx], world, opts)});
  }
  return frames;
}

}  // namespace chainplan
