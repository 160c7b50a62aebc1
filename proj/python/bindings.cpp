#include "chainplan/arm.hpp"
#include "chainplan/equilibrium.hpp"
#include "chainplan/exec_sim.hpp"
#include "chainplan/io.hpp"
#include "chainplan/planner.hpp"
#include "chainplan/render.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace chainplan;

namespace {

py::dict stats_dict(const PlanStats& s) {
  py::dict d;
  d["iterations"] = s.iterations;
  d["vertices"] = s.vertices;
  d["regrasp_count"] = s.regrasp_count;
  d["stage2_failures"] = s.stage2_failures;
  d["global_planning_s"] = s.global_seconds;
  d["regrasp_planning_s"] = s.regrasp_seconds;
  d["total_s"] = s.total_seconds;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Closed-chain multi-arm planner with IK-switch regrasps";

  py::class_<Pose2>(m, "Pose2")
      .def(py::init<>())
      .def(py::init<double, double, double>(), py::arg("x"), py::arg("y"), py::arg("theta"))
      .def_readwrite("x", &Pose2::x)
      .def_readwrite("y", &Pose2::y)
      .def_readwrite("theta", &Pose2::theta)
      .def("__mul__", [](const Pose2& a, const Pose2& b) { return compose(a, b); })
      .def("inverse", [](const Pose2& a) { return invert(a); })
      .def("__repr__", [](const Pose2& p) {
        return "Pose2(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ", " + std::to_string(p.theta) + ")";
      });
  m.def("normalize_angle", &normalize_angle);
  m.def("pose_distance", py::overload_cast<const Pose2&, const Pose2&, double>(&pose_distance), py::arg("a"),
        py::arg("b"), py::arg("w_rot") = 0.3);

  py::class_<ArmModel>(m, "ArmModel")
      .def(py::init([](const Pose2& base, std::vector<double> links, Eigen::VectorXd lo, Eigen::VectorXd hi) {
             ArmModel a{base, std::move(links), std::move(lo), std::move(hi)};
             a.validate();
             return a;
           }),
           py::arg("base"), py::arg("links"), py::arg("q_lower"), py::arg("q_upper"))
      .def_readwrite("base", &ArmModel::base)
      .def_readwrite("links", &ArmModel::links)
      .def_readwrite("q_lower", &ArmModel::q_lower)
      .def_readwrite("q_upper", &ArmModel::q_upper)
      .def_property_readonly("dof", &ArmModel::dof);

  m.def("forward_kinematics", &forward_kinematics, py::arg("arm"), py::arg("q"));
  m.def("jacobian", [](const ArmModel& a, const JointConfig& q) { return Eigen::MatrixXd(jacobian(a, q)); },
        py::arg("arm"), py::arg("q"));
  m.def("enumerate_ik", &enumerate_ik, py::arg("arm"), py::arg("target"));
  m.def("elbow_class", &elbow_class, py::arg("q"));
  m.def("flexibility_score", &flexibility_score, py::arg("arm"), py::arg("q"));
  m.def(
      "differential_ik_step",
      [](const ArmModel& a, const JointConfig& q, const Pose2& target) {
        const IkStep s = differential_ik_step(a, q, target);
        return py::make_tuple(s.q, std::string(to_string(s.failure)));
      },
      py::arg("arm"), py::arg("q_prev"), py::arg("target"));

  m.def(
      "equilibrium_feasible",
      [](const Eigen::Vector3d& wrench, const std::vector<std::tuple<Eigen::Vector2d, std::string, Eigen::Vector2d>>& cs,
         double mu, double f_grip_max) {
        ContactSet set;
        for (const auto& [p, kind, n] : cs) {
          Contact c;
          c.p = p;
          c.normal = n;
          if (kind == "grasp") c.kind = ContactKind::Grasp;
          else if (kind == "environment") c.kind = ContactKind::Environment;
          else throw std::invalid_argument("contact kind must be \"grasp\" or \"environment\"");
          set.points.push_back(c);
        }
        const auto r = equilibrium_feasible({wrench.head<2>(), wrench[2]}, set, mu, f_grip_max);
        return py::make_tuple(r.feasible, r.forces);
      },
      py::arg("wrench"), py::arg("contacts"), py::arg("mu"), py::arg("f_grip_max"),
      "Contacts are (point, \"grasp\" | \"environment\", inward normal) tuples.");

  py::class_<CompositeConfig>(m, "CompositeConfig")
      .def(py::init<>())
      .def(py::init([](std::vector<JointConfig> arms, const Pose2& obj) { return CompositeConfig{std::move(arms), obj}; }),
           py::arg("arms"), py::arg("object"))
      .def_readwrite("arms", &CompositeConfig::arms)
      .def_readwrite("object", &CompositeConfig::object);

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("name", &Scenario::name)
      .def_readonly("start", &Scenario::start)
      .def_readonly("goal", &Scenario::goal)
      .def_property_readonly("arms", [](const Scenario& s) { return s.world.arms; })
      .def_property_readonly("grasps", [](const Scenario& s) { return s.grasps.grasps; })
      .def_property_readonly("r_max", [](const Scenario& s) { return s.params.r_max; })
      .def_property_readonly("seed", [](const Scenario& s) { return s.params.seed; })
      .def("to_json", &dump_scenario)
      .def(
          "find_collision",
          [](const Scenario& s, const CompositeConfig& c, bool allow_contact) {
            CollisionQuery q;
            q.allow_support_contact = allow_contact;
            return find_collision(c, s.world, q);
          },
          py::arg("config"), py::arg("allow_support_contact") = false)
      .def(
          "grasp_residual",
          [](const Scenario& s, const CompositeConfig& c) { return grasp_residual(c, s.grasps, s.world); },
          py::arg("config"));

  m.def("load_scenario", [](const std::string& path) { return load_scenario(path); }, py::arg("path"));
  m.def("parse_scenario", &parse_scenario, py::arg("text"));

  m.def(
      "plan",
      [](const Scenario& s, std::optional<std::uint64_t> seed, std::optional<int> r_max, std::optional<int> n_max,
         std::optional<int> inject_failures, bool audit) {
        PlannerParams p = s.params;
        if (seed) p.seed = *seed;
        if (r_max) p.r_max = *r_max;
        if (n_max) p.n_max = *n_max;
        if (inject_failures) p.inject_stage2_failures = *inject_failures;
        p.audit = audit;
        PlanOutcome r;
        {
          py::gil_scoped_release nogil;
          r = plan(s.start, s.goal, p, s.grasps, s.world);
        }
        py::dict d;
        d["success"] = r.status == PlanStatus::Success;
        d["switch_count"] = r.plan.switch_count();
        d["stats"] = stats_dict(r.stats);
        d["plan_json"] = r.status == PlanStatus::Success ? dump_plan({s.name, p.seed, p.r_max, r.plan}) : std::string();
        return d;
      },
      py::arg("scenario"), py::arg("seed") = py::none(), py::arg("r_max") = py::none(), py::arg("n_max") = py::none(),
      py::arg("inject_failures") = py::none(), py::arg("audit") = false,
      "Plan a scenario. Raises RuntimeError (NO_GOAL_IK) when the goal pose cannot be grasped.");

  m.def(
      "check",
      [](const std::string& plan_json, const Scenario& s) -> std::optional<std::tuple<std::size_t, std::string>> {
        const PlanFile pf = parse_plan(plan_json);
        if (auto v = validate_plan(pf.plan, s.start, s.goal, s.grasps, s.world)) return std::make_tuple(v->phase, v->message);
        return std::nullopt;
      },
      py::arg("plan_json"), py::arg("scenario"), "None when the plan replays cleanly, else (phase, message).");

  m.def(
      "simulate",
      [](const std::string& plan_json, const Scenario& s, Eigen::Vector2d offset, double kp, double kv, double dt) {
        SimParams sp;
        sp.base_offset = offset;
        sp.gains.k_p.setConstant(kp);
        sp.gains.k_v.setConstant(kv);
        sp.gains.dt = dt;
        const auto t = simulate_execution(parse_plan(plan_json).plan, s.grasps, s.world, sp);
        py::dict d;
        d["steps"] = t.records.size();
        d["peak_force"] = t.peak_force();
        d["steady_state_force"] = t.steady_state_force();
        d["aborted"] = t.aborted;
        d["trace_jsonl"] = dump_trace_jsonl(t);
        return d;
      },
      py::arg("plan_json"), py::arg("scenario"), py::arg("offset") = Eigen::Vector2d::Zero(), py::arg("kp") = 1e-3,
      py::arg("kv") = ControlGains{}.k_v[0], py::arg("dt") = 0.008);

  m.def(
      "render",
      [](const std::string& plan_json, const Scenario& s, double fps) {
        RenderOptions o;
        o.fps = fps;
        std::vector<std::pair<std::string, std::string>> out;
        for (auto& f : render_frames(parse_plan(plan_json).plan, s.world, o)) out.emplace_back(f.name, f.svg);
        return out;
      },
      py::arg("plan_json"), py::arg("scenario"), py::arg("fps") = 10.0);

  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<NoGoalIk>(m, "NoGoalIk", PyExc_RuntimeError);
}
