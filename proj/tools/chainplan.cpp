// chainplan command-line front end: plan | check | render | simulate.

#include "chainplan/exec_sim.hpp"
#include "chainplan/io.hpp"
#include "chainplan/planner.hpp"
#include "chainplan/render.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

namespace fs = std::filesystem;
using namespace chainplan;

namespace {

enum Exit { kOk = 0, kFailure = 2, kInvalid = 3, kNoGoalIk = 4, kViolation = 5 };

std::mutex g_log_mutex;

// CHAINPLAN_LOG: unset or "0" = quiet, anything else = audit trees and log mutations.
bool audit_enabled() {
  const char* v = std::getenv("CHAINPLAN_LOG");
  return v && *v && std::string(v) != "0";
}

struct PlanArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::vector<std::uint64_t> seeds;
  std::optional<int> rmax;
  std::optional<int> nmax;
  std::string out = ".";
};

int run_one(const Scenario& sc, std::uint64_t seed, const PlanArgs& a, const fs::path& out_dir) {
  PlannerParams p = sc.params;
  p.seed = seed;
  if (a.rmax) p.r_max = *a.rmax;
  if (a.nmax) p.n_max = *a.nmax;
  if (audit_enabled()) {
    p.audit = true;
    p.log = [seed](const std::string& s) {
      std::lock_guard<std::mutex> lock(g_log_mutex);
      std::cerr << "[seed " << seed << "] " << s << "\n";
    };
  }
  PlanOutcome res;
  try {
    res = plan(sc.start, sc.goal, p, sc.grasps, sc.world);
  } catch (const NoGoalIk& e) {
    std::lock_guard<std::mutex> lock(g_log_mutex);
    std::cerr << "NO_GOAL_IK: " << e.what() << "\n";
    return kNoGoalIk;
  }
  write_text(out_dir / "stats.json", dump_stats(res.stats, res.status, seed, p.r_max));
  if (res.status != PlanStatus::Success) {
    std::lock_guard<std::mutex> lock(g_log_mutex);
    std::cerr << "FAILURE: no plan within " << p.n_max << " iterations (seed " << seed << ")\n";
    return kFailure;
  }
  if (auto v = validate_plan(res.plan, sc.start, sc.goal, sc.grasps, sc.world)) {
    std::lock_guard<std::mutex> lock(g_log_mutex);
    std::cerr << "internal error: emitted plan fails replay at phase " << v->phase << ": " << v->message << "\n";
    return kViolation;
  }
  write_text(out_dir / "plan.json", dump_plan({sc.name, seed, p.r_max, res.plan}));
  std::lock_guard<std::mutex> lock(g_log_mutex);
  std::cout << "seed " << seed << ": success, " << res.plan.switch_count() << " IK-switch(es), "
            << res.stats.total_seconds << " s\n";
  return kOk;
}

int cmd_plan(const PlanArgs& a) {
  const Scenario sc = load_scenario(a.scenario);
  if (a.seeds.empty()) return run_one(sc, a.seed.value_or(sc.params.seed), a, a.out);

  std::vector<int> codes(a.seeds.size(), kOk);
  std::vector<std::thread> workers;
  for (std::size_t i = 0; i < a.seeds.size(); ++i)
    workers.emplace_back([&, i] {
      try {
        codes[i] = run_one(sc, a.seeds[i], a, fs::path(a.out) / ("seed_" + std::to_string(a.seeds[i])));
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(g_log_mutex);
        std::cerr << "seed " << a.seeds[i] << ": " << e.what() << "\n";
        codes[i] = kInvalid;
      }
    });
  for (auto& w : workers) w.join();
  int worst = kOk;
  for (int c : codes) worst = std::max(worst, c);
  return worst;
}

int cmd_check(const std::string& plan_path, const std::string& scenario_path) {
  const Scenario sc = load_scenario(scenario_path);
  const PlanFile pf = load_plan(plan_path);
  if (auto v = validate_plan(pf.plan, sc.start, sc.goal, sc.grasps, sc.world)) {
    std::cerr << "violation in phase " << v->phase << ": " << v->message << "\n";
    return kViolation;
  }
  std::cout << "ok: " << pf.plan.phases.size() << " phases, " << pf.plan.switch_count() << " IK-switch(es)\n";
  return kOk;
}

int cmd_render(const std::string& plan_path, const std::string& scenario_path, const std::string& out, double fps) {
  const Scenario sc = load_scenario(scenario_path);
  const PlanFile pf = load_plan(plan_path);
  RenderOptions opts;
  opts.fps = fps;
  const auto frames = render_frames(pf.plan, sc.world, opts);
  for (const auto& f : frames) write_text(fs::path(out) / f.name, f.svg);
  std::cout << frames.size() << " frames written to " << out << "\n";
  return kOk;
}

struct SimArgs {
  std::string plan, scenario, out = "trace.jsonl";
  std::vector<double> offset{0.0, 0.0};
  std::optional<double> kp, kv, dt;
};

int cmd_simulate(const SimArgs& a) {
  const Scenario sc = load_scenario(a.scenario);
  const PlanFile pf = load_plan(a.plan);
  SimParams sp;
  sp.base_offset = {a.offset.at(0), a.offset.at(1)};
  if (a.kp) sp.gains.k_p.setConstant(*a.kp);
  if (a.kv) sp.gains.k_v.setConstant(*a.kv);
  if (a.dt) sp.gains.dt = *a.dt;
  const ExecutionTrace t = simulate_execution(pf.plan, sc.grasps, sc.world, sp);
  write_text(a.out, dump_trace_jsonl(t));
  std::cout << t.records.size() << " steps, peak force " << t.peak_force() << " N, final |f_e| "
            << t.steady_state_force() << " N\n";
  if (t.aborted) {
    std::cerr << "aborted: " << t.abort_reason << "\n";
    return kFailure;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-chain multi-arm manipulation planner with IK-switch regrasps"};
  app.require_subcommand(1);

  PlanArgs pa;
  auto* plan_cmd = app.add_subcommand("plan", "Plan a scenario; writes plan.json and stats.json");
  plan_cmd->add_option("scenario", pa.scenario, "Scenario JSON")->required();
  plan_cmd->add_option("--seed", pa.seed, "Random seed (default: scenario params.seed)");
  plan_cmd->add_option("--seeds", pa.seeds, "Several seeds, planned concurrently into OUT/seed_<n>/")->delimiter(',');
  plan_cmd->add_option("--rmax", pa.rmax, "Regrasp budget R_max");
  plan_cmd->add_option("--nmax", pa.nmax, "Iteration budget N_max");
  plan_cmd->add_option("--out", pa.out, "Output directory");

  std::string plan_path, scenario_path, out = "frames";
  double fps = 10.0;
  auto* check_cmd = app.add_subcommand("check", "Replay-validate a plan against its scenario");
  check_cmd->add_option("plan", plan_path, "Plan JSON")->required();
  check_cmd->add_option("scenario", scenario_path, "Scenario JSON")->required();

  auto* render_cmd = app.add_subcommand("render", "Render a plan as SVG frames");
  render_cmd->add_option("plan", plan_path, "Plan JSON")->required();
  render_cmd->add_option("scenario", scenario_path, "Scenario JSON")->required();
  render_cmd->add_option("--out", out, "Output directory");
  render_cmd->add_option("--fps", fps, "Frames per second of plan time")->check(CLI::PositiveNumber);

  SimArgs sa;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate leader-follower compliant execution");
  sim_cmd->add_option("plan", sa.plan, "Plan JSON")->required();
  sim_cmd->add_option("scenario", sa.scenario, "Scenario JSON")->required();
  sim_cmd->add_option("--out", sa.out, "Trace output (JSON lines)");
  sim_cmd->add_option("--offset", sa.offset, "Follower base offset dx dy in metres")->expected(2);
  sim_cmd->add_option("--kp", sa.kp, "Proportional gain");
  sim_cmd->add_option("--kv", sa.kv, "Derivative gain");
  sim_cmd->add_option("--dt", sa.dt, "Control period in seconds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kInvalid;
  }

  try {
    if (*plan_cmd) return cmd_plan(pa);
    if (*check_cmd) return cmd_check(plan_path, scenario_path);
    if (*render_cmd) return cmd_render(plan_path, scenario_path, out, fps);
    if (*sim_cmd) return cmd_simulate(sa);
  } catch (const FormatError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
  return kInvalid;
}
