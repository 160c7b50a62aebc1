#include "doctest.h"

#include "chainplan/io.hpp"
#include "chainplan/render.hpp"
#include "testbed.hpp"

#include <regex>
#include <sstream>

using namespace chainplan;

namespace {

PlanOutcome fig1a_plan(const Scenario& sc) {
  PlannerParams p = sc.params;
  p.r_max = 1;
  return plan(sc.start, sc.goal, p, sc.grasps, sc.world);
}

std::vector<Eigen::Vector2d> object_points(const std::string& svg) {
  static const std::regex poly("<polygon id=\"object\" points=\"([^\"]*)\"");
  std::smatch m;
  REQUIRE(std::regex_search(svg, m, poly));
  std::vector<Eigen::Vector2d> pts;
  std::istringstream in(m[1].str());
  std::string tok;
  while (in >> tok) {
    const auto comma = tok.find(',');
    pts.emplace_back(std::stod(tok.substr(0, comma)), std::stod(tok.substr(comma + 1)));
  }
  return pts;
}

std::string expect_format_error(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const FormatError& e) {
    return e.what();
  }
  FAIL("no FormatError");
  return {};
}

}  // namespace

TEST_CASE("scenario files") {
  const std::string text = read_text(testbed::scenario_dir() / "fig1a.json");
  const Scenario sc = parse_scenario(text);
  CHECK(sc.name == "fig1a");
  CHECK(sc.world.arms.size() == 2);

  SUBCASE("round trip is exact") {
    const std::string once = dump_scenario(sc);
    const Scenario back = parse_scenario(once);
    CHECK(dump_scenario(back) == once);
    CHECK(same_composite(back.start, sc.start, 0.0));
    CHECK(back.goal == sc.goal);
    CHECK(back.params.seed == sc.params.seed);
    CHECK(back.world.arms[1].q_lower(1) == sc.world.arms[1].q_lower(1));
  }
  SUBCASE("malformed JSON reports a position") {
    const std::string msg = expect_format_error("{\n  \"schema_version\": \"1\",\n  \"name\": ,\n}\n");
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("column") != std::string::npos);
  }
  SUBCASE("unknown keys are rejected") {
    std::string bad = text;
    bad.insert(bad.find('{') + 1, "\"colour\": \"red\",");
    CHECK(expect_format_error(bad).find("colour") != std::string::npos);
  }
  SUBCASE("schema version is required") {
    std::string bad = text;
    const auto at = bad.find("\"schema_version\": \"1\"");
    REQUIRE(at != std::string::npos);
    bad.replace(at, 21, "\"schema_version\": \"2\"");
    expect_format_error(bad);
  }
  SUBCASE("an open chain at the start is rejected") {
    Scenario bent = sc;
    bent.start.arms[0](0) += 0.1;
    CHECK_THROWS(parse_scenario(dump_scenario(bent)));
  }
}

TEST_CASE("plan files") {
  const Scenario sc = testbed::load("fig1a");
  const PlanOutcome o = fig1a_plan(sc);
  REQUIRE(o.status == PlanStatus::Success);
  const PlanFile pf{sc.name, sc.params.seed, 1, o.plan};
  const std::string once = dump_plan(pf);
  CHECK(once.find("\"schema_version\": \"1\"") != std::string::npos);
  const PlanFile back = parse_plan(once);
  CHECK(dump_plan(back) == once);
  CHECK(back.plan.switch_count() == 1);
  CHECK(back.r_max == 1);
  CHECK_FALSE(validate_plan(back.plan, sc.start, sc.goal, sc.grasps, sc.world).has_value());
  CHECK_THROWS_AS(parse_plan("[]"), FormatError);

  SUBCASE("trace lines") {
    SimParams sp;
    sp.base_offset = Eigen::Vector2d(0.005, 0.0);
    const ExecutionTrace t = simulate_execution(o.plan, sc.grasps, sc.world, sp);
    const std::string jl = dump_trace_jsonl(t);
    CHECK(static_cast<std::size_t>(std::count(jl.begin(), jl.end(), '\n')) == t.records.size());
  }
}

TEST_CASE("render") {
  const Scenario sc = testbed::load("fig1a");

  SUBCASE("frame count and names") {
    CompositePlan two;
    CompositeConfig moved = sc.start;
    two.phases.push_back(ClosedChainSegment{{sc.start, moved}});
    RenderOptions opt;
    opt.fps = 200.0;  // 0.05 s of motion
    const auto frames = render_frames(two, sc.world, opt);
    REQUIRE(frames.size() == 10);
    for (std::size_t i = 1; i < frames.size(); ++i) CHECK(frames[i - 1].name < frames[i].name);
    CHECK(frames[0].name == "frame_00000.svg");
    CHECK(frames[0].svg.rfind("<?xml", 0) == 0);
  }
  SUBCASE("the object rests on the floor while an arm swings") {
    const PlanOutcome o = fig1a_plan(sc);
    REQUIRE(o.status == PlanStatus::Success);
    const auto keys = plan_keyframes(o.plan);
    int swings = 0;
    for (const auto& k : keys) {
      if (k.label != "swing") continue;
      ++swings;
      const std::string svg = render_svg(k, sc.world);
      CHECK(svg.find("swing</text>") != std::string::npos);
      double lowest = 1e9;
      for (const auto& p : object_points(svg)) {
        lowest = std::min(lowest, p.y());
        CHECK(p.y() >= -1e-5);
      }
      // The floor is y = 0; coordinates carry five decimals.
      CHECK(lowest <= 1e-5);
    }
    CHECK(swings > 0);

    RenderOptions opt;
    opt.fps = 20.0;
    const auto a = render_frames(o.plan, sc.world, opt);
    const auto b = render_frames(o.plan, sc.world, opt);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].svg == b[i].svg);
  }
}
