#include "chainplan/io.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace chainplan {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
  throw FormatError(where.empty() ? msg : where + ": " + msg);
}

// Rejects keys outside `allowed` so typos in overrides do not pass silently.
void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) fail(where, "unknown key \"" + it.key() + "\"");
}

const json& req(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) fail(where, std::string("missing \"") + key + "\"");
  return j.at(key);
}

double num(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<int>();
}

Eigen::VectorXd vec(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = num(j[i], where);
  return v;
}

Eigen::Vector2d point(const json& j, const std::string& where) {
  const auto v = vec(j, where);
  if (v.size() != 2) fail(where, "expected [x, y]");
  return {v[0], v[1]};
}

Pose2 pose(const json& j, const std::string& where) {
  const auto v = vec(j, where);
  if (v.size() != 3) fail(where, "expected [x, y, theta]");
  return {v[0], v[1], v[2]};
}

json to_j(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}
json to_j(const Eigen::Vector2d& v) { return json::array({v.x(), v.y()}); }
json to_j(const Pose2& p) { return json::array({p.x, p.y, p.theta}); }

json to_j(const CompositeConfig& c) {
  json arms = json::array();
  for (const auto& q : c.arms) arms.push_back(to_j(q));
  return {{"arms", arms}, {"object", to_j(c.object)}};
}

CompositeConfig composite(const json& j, const std::string& where) {
  check_keys(j, where, {"arms", "object"});
  CompositeConfig c;
  const json& arms = req(j, "arms", where);
  if (!arms.is_array()) fail(where + ".arms", "expected an array");
  for (const auto& q : arms) c.arms.push_back(vec(q, where + ".arms"));
  c.object = pose(req(j, "object", where), where + ".object");
  return c;
}

json to_j(const CompositePath& p) {
  json a = json::array();
  for (const auto& c : p) a.push_back(to_j(c));
  return a;
}

CompositePath composite_path(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of configurations");
  CompositePath p;
  for (std::size_t i = 0; i < j.size(); ++i) p.push_back(composite(j[i], where + "[" + std::to_string(i) + "]"));
  return p;
}

json to_j(const JointPath& p) {
  json a = json::array();
  for (const auto& q : p) a.push_back(to_j(q));
  return a;
}

JointPath joint_path(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of joint vectors");
  JointPath p;
  for (const auto& q : j) p.push_back(vec(q, where));
  return p;
}

geom::Segment segment(const json& j, const std::string& where) {
  check_keys(j, where, {"a", "b"});
  return {point(req(j, "a", where), where + ".a"), point(req(j, "b", where), where + ".b")};
}

json to_j(const geom::Segment& s) { return {{"a", to_j(s.a)}, {"b", to_j(s.b)}}; }

std::string heuristic_name(GoalHeuristic h) {
  switch (h) {
    case GoalHeuristic::Random: return "random";
    case GoalHeuristic::NearestToStart: return "nearest";
    case GoalHeuristic::MostFlexible: return "most_flexible";
  }
  return "nearest";
}

void read_params(const json& j, PlannerParams& p) {
  const std::string w = "params";
  check_keys(j, w,
             {"n_max", "r_max", "step", "w_rot", "eps_boundary", "seed", "bounds", "d_ext", "r_blacklist",
              "goal_heuristic", "refine_depth", "n_max_switch", "n_max_regrasp", "regrasp_resolution",
              "regrasp_extend", "shortcut_attempts", "retreat", "retreat_steps", "placement",
              "inject_stage2_failures"});
  auto get_i = [&](const char* k, int& dst) {
    if (j.contains(k)) dst = integer(j.at(k), w + "." + k);
  };
  auto get_d = [&](const char* k, double& dst) {
    if (j.contains(k)) dst = num(j.at(k), w + "." + k);
  };
  get_i("n_max", p.n_max);
  get_i("r_max", p.r_max);
  get_d("step", p.step);
  get_d("w_rot", p.w_rot);
  get_d("eps_boundary", p.eps_boundary);
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) fail(w + ".seed", "expected a nonnegative integer");
    p.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("bounds")) {
    const json& b = j.at("bounds");
    check_keys(b, w + ".bounds", {"x_min", "x_max", "y_min", "y_max", "theta_min", "theta_max"});
    p.bounds.x_min = num(req(b, "x_min", w), w + ".bounds.x_min");
    p.bounds.x_max = num(req(b, "x_max", w), w + ".bounds.x_max");
    p.bounds.y_min = num(req(b, "y_min", w), w + ".bounds.y_min");
    p.bounds.y_max = num(req(b, "y_max", w), w + ".bounds.y_max");
    if (b.contains("theta_min")) p.bounds.theta_min = num(b.at("theta_min"), w + ".bounds.theta_min");
    if (b.contains("theta_max")) p.bounds.theta_max = num(b.at("theta_max"), w + ".bounds.theta_max");
  }
  get_d("d_ext", p.d_ext);
  get_d("r_blacklist", p.r_blacklist);
  if (j.contains("goal_heuristic")) {
    const auto& h = j.at("goal_heuristic");
    if (h == "random") p.goal_heuristic = GoalHeuristic::Random;
    else if (h == "nearest") p.goal_heuristic = GoalHeuristic::NearestToStart;
    else if (h == "most_flexible") p.goal_heuristic = GoalHeuristic::MostFlexible;
    else fail(w + ".goal_heuristic", "expected \"random\", \"nearest\" or \"most_flexible\"");
  }
  get_i("refine_depth", p.refine_depth);
  get_i("n_max_switch", p.n_max_switch);
  get_i("n_max_regrasp", p.n_max_regrasp);
  get_d("regrasp_resolution", p.regrasp_resolution);
  get_d("regrasp_extend", p.regrasp_extend);
  get_i("shortcut_attempts", p.shortcut_attempts);
  get_d("retreat", p.retreat);
  get_i("retreat_steps", p.retreat_steps);
  if (j.contains("placement")) {
    const json& pl = j.at("placement");
    check_keys(pl, w + ".placement", {"sigma_translation", "sigma_rotation", "max_iters"});
    if (pl.contains("sigma_translation")) p.placement.sigma_translation = num(pl.at("sigma_translation"), w);
    if (pl.contains("sigma_rotation")) p.placement.sigma_rotation = num(pl.at("sigma_rotation"), w);
    if (pl.contains("max_iters")) p.placement.max_iters = integer(pl.at("max_iters"), w);
  }
  get_i("inject_stage2_failures", p.inject_stage2_failures);

  if (p.n_max <= 0 || p.r_max < 0 || p.step <= 0 || p.w_rot <= 0 || p.eps_boundary <= 0 || p.d_ext <= 0 ||
      p.r_blacklist <= 0 || p.n_max_switch <= 0 || p.n_max_regrasp <= 0 || p.regrasp_resolution <= 0 ||
      p.regrasp_extend <= 0 || p.retreat < 0 || p.retreat_steps <= 0 || p.refine_depth < 0 ||
      p.inject_stage2_failures < 0 || p.bounds.x_min > p.bounds.x_max || p.bounds.y_min > p.bounds.y_max ||
      p.bounds.theta_min > p.bounds.theta_max)
    fail(w, "values out of range");
}

json params_to_j(const PlannerParams& p) {
  return {{"n_max", p.n_max},
          {"r_max", p.r_max},
          {"step", p.step},
          {"w_rot", p.w_rot},
          {"eps_boundary", p.eps_boundary},
          {"seed", p.seed},
          {"bounds", {{"x_min", p.bounds.x_min}, {"x_max", p.bounds.x_max}, {"y_min", p.bounds.y_min}, {"y_max", p.bounds.y_max},
                      {"theta_min", p.bounds.theta_min}, {"theta_max", p.bounds.theta_max}}},
          {"d_ext", p.d_ext},
          {"r_blacklist", p.r_blacklist},
          {"goal_heuristic", heuristic_name(p.goal_heuristic)},
          {"refine_depth", p.refine_depth},
          {"n_max_switch", p.n_max_switch},
          {"n_max_regrasp", p.n_max_regrasp},
          {"regrasp_resolution", p.regrasp_resolution},
          {"regrasp_extend", p.regrasp_extend},
          {"shortcut_attempts", p.shortcut_attempts},
          {"retreat", p.retreat},
          {"retreat_steps", p.retreat_steps},
          {"placement", {{"sigma_translation", p.placement.sigma_translation},
                         {"sigma_rotation", p.placement.sigma_rotation},
                         {"max_iters", p.placement.max_iters}}},
          {"inject_stage2_failures", p.inject_stage2_failures}};
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Byte offsets are 1-based and point just past the offending character.
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    if (const auto p = what.find(": "); p != std::string::npos) what = what.substr(p + 2);
    throw FormatError("JSON parse error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                      what);
  }
}

void check_version(const json& j) {
  const json& v = req(j, "schema_version", "");
  if (v != kSchemaVersion) fail("schema_version", std::string("unsupported, expected \"") + kSchemaVersion + "\"");
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  const json j = parse_json(text);
  check_keys(j, "scenario", {"schema_version", "name", "world", "grasp_set", "start", "goal_pose", "params"});
  check_version(j);
  Scenario s;
  if (j.contains("name")) {
    if (!j.at("name").is_string()) fail("name", "expected a string");
    s.name = j.at("name").get<std::string>();
  }

  const json& w = req(j, "world", "");
  check_keys(w, "world",
             {"arms", "object", "surfaces", "obstacles", "friction_mu", "grip_force_max", "gravity", "inflation",
              "grasp_exclusion"});
  const json& arms = req(w, "arms", "world");
  if (!arms.is_array()) fail("world.arms", "expected an array");
  for (std::size_t i = 0; i < arms.size(); ++i) {
    const std::string at = "world.arms[" + std::to_string(i) + "]";
    check_keys(arms[i], at, {"base", "links", "q_lower", "q_upper"});
    ArmModel a;
    a.base = pose(req(arms[i], "base", at), at + ".base");
    const auto links = vec(req(arms[i], "links", at), at + ".links");
    a.links.assign(links.data(), links.data() + links.size());
    a.q_lower = vec(req(arms[i], "q_lower", at), at + ".q_lower");
    a.q_upper = vec(req(arms[i], "q_upper", at), at + ".q_upper");
    s.world.arms.push_back(std::move(a));
  }
  const json& obj = req(w, "object", "world");
  check_keys(obj, "world.object", {"vertices", "mass", "com"});
  for (const auto& v : req(obj, "vertices", "world.object"))
    s.world.object.vertices.push_back(point(v, "world.object.vertices"));
  if (obj.contains("mass")) s.world.object.mass = num(obj.at("mass"), "world.object.mass");
  if (obj.contains("com")) s.world.object.com = point(obj.at("com"), "world.object.com");
  if (w.contains("surfaces"))
    for (const auto& v : w.at("surfaces")) s.world.surfaces.push_back({segment(v, "world.surfaces")});
  if (w.contains("obstacles"))
    for (const auto& v : w.at("obstacles")) s.world.obstacles.push_back(segment(v, "world.obstacles"));
  if (w.contains("friction_mu")) s.world.friction_mu = num(w.at("friction_mu"), "world.friction_mu");
  if (w.contains("grip_force_max")) s.world.grip_force_max = num(w.at("grip_force_max"), "world.grip_force_max");
  if (w.contains("gravity")) s.world.gravity = point(w.at("gravity"), "world.gravity");
  if (w.contains("inflation")) s.world.inflation = num(w.at("inflation"), "world.inflation");
  if (w.contains("grasp_exclusion")) {
    const auto g = vec(w.at("grasp_exclusion"), "world.grasp_exclusion");
    s.world.grasp_exclusion.assign(g.data(), g.data() + g.size());
  }
  try {
    s.world.validate();
  } catch (const std::invalid_argument& e) {
    fail("world", e.what());
  }

  const json& gs = req(j, "grasp_set", "");
  if (!gs.is_array()) fail("grasp_set", "expected an array of poses");
  for (const auto& g : gs) s.grasps.grasps.push_back(pose(g, "grasp_set"));
  if (s.grasps.grasps.size() != s.world.arms.size()) fail("grasp_set", "needs one grasp per arm");

  s.start = composite(req(j, "start", ""), "start");
  if (s.start.arms.size() != s.world.arms.size()) fail("start", "needs one joint vector per arm");
  for (std::size_t i = 0; i < s.start.arms.size(); ++i)
    if (s.start.arms[i].size() != s.world.arms[i].dof()) fail("start", "joint count mismatch for arm " + std::to_string(i));
  s.goal = pose(req(j, "goal_pose", ""), "goal_pose");
  if (j.contains("params")) read_params(j.at("params"), s.params);

  if (!chain_closed(s.start, s.grasps, s.world)) fail("start", "grasp residual exceeds tolerance");
  for (std::size_t i = 0; i < s.start.arms.size(); ++i)
    if (!within_limits(s.world.arms[i], s.start.arms[i])) fail("start", "arm " + std::to_string(i) + " outside joint limits");
  if (auto col = find_collision(s.start, s.world)) fail("start", "in collision: " + *col);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(read_text(path)); }

std::string dump_scenario(const Scenario& s) {
  json arms = json::array();
  for (const auto& a : s.world.arms)
    arms.push_back({{"base", to_j(a.base)},
                    {"links", a.links},
                    {"q_lower", to_j(a.q_lower)},
                    {"q_upper", to_j(a.q_upper)}});
  json verts = json::array();
  for (const auto& v : s.world.object.vertices) verts.push_back(to_j(v));
  json surfaces = json::array(), obstacles = json::array(), grasps = json::array();
  for (const auto& x : s.world.surfaces) surfaces.push_back(to_j(x.seg));
  for (const auto& x : s.world.obstacles) obstacles.push_back(to_j(x));
  for (const auto& g : s.grasps.grasps) grasps.push_back(to_j(g));
  json world = {{"arms", arms},
                {"object", {{"vertices", verts}, {"mass", s.world.object.mass}, {"com", to_j(s.world.object.com)}}},
                {"surfaces", surfaces},
                {"obstacles", obstacles},
                {"friction_mu", s.world.friction_mu},
                {"grip_force_max", s.world.grip_force_max},
                {"gravity", to_j(s.world.gravity)},
                {"inflation", s.world.inflation}};
  if (!s.world.grasp_exclusion.empty()) world["grasp_exclusion"] = s.world.grasp_exclusion;
  json j = {{"schema_version", kSchemaVersion}, {"name", s.name}, {"world", world}, {"grasp_set", grasps},
            {"start", to_j(s.start)}, {"goal_pose", to_j(s.goal)}, {"params", params_to_j(s.params)}};
  return j.dump(2) + "\n";
}

std::string dump_plan(const PlanFile& p) {
  json phases = json::array();
  for (std::size_t i = 0; i < p.plan.phases.size(); ++i) {
    const auto& ph = p.plan.phases[i];
    if (const auto* seg = std::get_if<ClosedChainSegment>(&ph)) {
      phases.push_back({{"type", "closed_chain"}, {"waypoints", to_j(seg->waypoints)}});
      continue;
    }
    const auto& sw = std::get<IkSwitchPhase>(ph);
    json steps = json::array();
    steps.push_back({{"tag", "go"}, {"waypoints", to_j(sw.action.go)}});
    for (const auto& s : sw.action.switches) {
      steps.push_back({{"tag", "open"}, {"arm", s.arm}});
      steps.push_back({{"tag", "retreat"}, {"arm", s.arm}, {"joints", to_j(s.retreat)}});
      steps.push_back({{"tag", "swing"}, {"arm", s.arm}, {"joints", to_j(s.swing)}});
      steps.push_back({{"tag", "approach"}, {"arm", s.arm}, {"joints", to_j(s.approach)}});
      steps.push_back({{"tag", "close"}, {"arm", s.arm}});
    }
    steps.push_back({{"tag", "back"}, {"waypoints", to_j(sw.action.back)}});
    phases.push_back({{"type", "ik_switch"}, {"vertex", sw.vertex}, {"place", to_j(sw.action.place)}, {"steps", steps}});
  }
  const json j = {{"schema_version", kSchemaVersion}, {"scenario", p.scenario}, {"seed", p.seed},
                  {"r_max", p.r_max}, {"switch_count", p.plan.switch_count()}, {"phases", phases}};
  return j.dump(1) + "\n";
}

PlanFile parse_plan(const std::string& text) {
  const json j = parse_json(text);
  check_keys(j, "plan", {"schema_version", "scenario", "seed", "r_max", "switch_count", "phases"});
  check_version(j);
  PlanFile p;
  if (j.contains("scenario") && j.at("scenario").is_string()) p.scenario = j.at("scenario").get<std::string>();
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) fail("seed", "expected a nonnegative integer");
    p.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("r_max")) p.r_max = integer(j.at("r_max"), "r_max");
  const json& phases = req(j, "phases", "");
  if (!phases.is_array()) fail("phases", "expected an array");
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const std::string at = "phases[" + std::to_string(i) + "]";
    const json& ph = phases[i];
    const json& type = req(ph, "type", at);
    if (type == "closed_chain") {
      check_keys(ph, at, {"type", "waypoints"});
      p.plan.phases.push_back(ClosedChainSegment{composite_path(req(ph, "waypoints", at), at + ".waypoints")});
      continue;
    }
    if (type != "ik_switch") fail(at + ".type", "expected \"closed_chain\" or \"ik_switch\"");
    check_keys(ph, at, {"type", "vertex", "place", "steps"});
    IkSwitchPhase sw;
    if (ph.contains("vertex")) sw.vertex = integer(ph.at("vertex"), at + ".vertex");
    sw.action.place = pose(req(ph, "place", at), at + ".place");
    const json& steps = req(ph, "steps", at);
    if (!steps.is_array()) fail(at + ".steps", "expected an array");
    bool have_go = false, have_back = false;
    ArmSwitch* cur = nullptr;
    for (std::size_t k = 0; k < steps.size(); ++k) {
      const std::string sat = at + ".steps[" + std::to_string(k) + "]";
      const json& st = steps[k];
      const json& tag = req(st, "tag", sat);
      if (tag == "go" || tag == "back") {
        check_keys(st, sat, {"tag", "waypoints"});
        auto path = composite_path(req(st, "waypoints", sat), sat + ".waypoints");
        if (tag == "go") {
          if (have_go || !sw.action.switches.empty()) fail(sat, "\"go\" must come first, once");
          sw.action.go = std::move(path);
          have_go = true;
        } else {
          if (have_back) fail(sat, "duplicate \"back\"");
          sw.action.back = std::move(path);
          have_back = true;
        }
        continue;
      }
      if (!have_go || have_back) fail(sat, "arm steps must lie between \"go\" and \"back\"");
      const int arm = integer(req(st, "arm", sat), sat + ".arm");
      if (tag == "open") {
        check_keys(st, sat, {"tag", "arm"});
        sw.action.switches.push_back({});
        cur = &sw.action.switches.back();
        cur->arm = arm;
        continue;
      }
      if (!cur || cur->arm != arm) fail(sat, "arm step without a matching \"open\"");
      if (tag == "close") {
        check_keys(st, sat, {"tag", "arm"});
        cur = nullptr;
        continue;
      }
      check_keys(st, sat, {"tag", "arm", "joints"});
      auto joints = joint_path(req(st, "joints", sat), sat + ".joints");
      if (tag == "retreat") cur->retreat = std::move(joints);
      else if (tag == "swing") cur->swing = std::move(joints);
      else if (tag == "approach") cur->approach = std::move(joints);
      else fail(sat + ".tag", "unknown step tag");
    }
    if (!have_go || !have_back || cur) fail(at, "incomplete switch: needs go, open ... close, back");
    p.plan.phases.push_back(std::move(sw));
  }
  return p;
}

PlanFile load_plan(const std::filesystem::path& path) { return parse_plan(read_text(path)); }

std::string dump_stats(const PlanStats& s, PlanStatus status, std::uint64_t seed, int r_max) {
  const json j = {{"schema_version", kSchemaVersion},
                  {"status", status == PlanStatus::Success ? "success" : "failure"},
                  {"seed", seed},
                  {"r_max", r_max},
                  {"iterations", s.iterations},
                  {"vertices", s.vertices},
                  {"regrasp_count", s.regrasp_count},
                  {"stage2_failures", s.stage2_failures},
                  {"global_planning_s", s.global_seconds},
                  {"regrasp_planning_s", s.regrasp_seconds},
                  {"total_s", s.total_seconds}};
  return j.dump(2) + "\n";
}

std::string dump_trace_jsonl(const ExecutionTrace& t) {
  std::string out;
  for (const auto& r : t.records) {
    const json j = {{"step", r.step},       {"phase", r.phase},         {"tag", r.tag},
                    {"q_t", to_j(r.q_t)},   {"q_c", to_j(r.q_c)},       {"q", to_j(r.q)},
                    {"f_r", to_j(Eigen::VectorXd(r.f_r))}, {"f_e", to_j(Eigen::VectorXd(r.f_e))},
                    {"residual", r.residual}, {"singular", r.singular}};
    out += j.dump() + "\n";
  }
  if (t.aborted) out += json{{"aborted", true}, {"reason", t.abort_reason}}.dump() + "\n";
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace chainplan
