#include "chainplan/exec_sim.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace chainplan {

void ControlGains::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("control period must be positive");
  if ((k_p.array() < 0.0).any() || (k_v.array() < 0.0).any()) throw std::invalid_argument("gains must be nonnegative");
}

ComplianceStep compliance_step(const Eigen::Vector3d& f_e, const Eigen::Vector3d& f_e_prev, const ControlGains& gains,
                               const Jacobian& J, const Eigen::VectorXd& q_c_prev) {
  const Eigen::Vector3d x_f = gains.k_p.cwiseProduct(f_e) + gains.k_v.cwiseProduct(f_e - f_e_prev) / gains.dt;
  ComplianceStep out;
  if (J.cols() == 3) {
    const Eigen::Matrix3d Js = J;
    const Eigen::PartialPivLU<Eigen::Matrix3d> lu(Js);
    if (std::abs(Js.determinant()) > 1e-9) {
      out.q_c = q_c_prev + lu.solve(x_f);
      return out;
    }
  }
  // Damped pseudo-inverse for singular or non-square Jacobians.
  constexpr double lambda = 1e-4;
  const Eigen::Matrix3d JJt = J * J.transpose() + lambda * lambda * Eigen::Matrix3d::Identity();
  out.q_c = q_c_prev + J.transpose() * JJt.ldlt().solve(x_f);
  out.singular = true;
  return out;
}

double ExecutionTrace::peak_force() const {
  double m = 0.0;
  for (const auto& r : records) m = std::max(m, r.f_r.norm());
  return m;
}

double ExecutionTrace::steady_state_force() const { return records.empty() ? 0.0 : records.back().f_e.norm(); }

namespace {

class Simulator {
 public:
  Simulator(const GraspSet& G, const WorldDescription& world, const SimParams& p) : G_(G), world_(world), p_(p) {
    if (world.arms.size() != 2) throw std::invalid_argument("execution simulation needs exactly two arms");
    p.gains.validate();
    shifted_ = world.arms[1];
    shifted_.base = Pose2(shifted_.base.x + p.base_offset.x(), shifted_.base.y + p.base_offset.y(), shifted_.base.theta);
    reset();
  }

  void reset() {
    q_c_ = Eigen::VectorXd::Zero(world_.arms[1].dof());
    f_prev_.reset();
  }

  // Closed-chain step with compliance. Returns false on abort.
  bool compliant(const CompositeConfig& c, int phase, const char* tag) {
    TraceRecord r = base_record(c.arms[1], phase, tag);
    r.q_c = q_c_;
    r.q = r.q_t + r.q_c;
    measure(r, c.object);
    const Eigen::Vector3d prev = f_prev_ ? *f_prev_ : r.f_e;
    const ComplianceStep s = compliance_step(r.f_e, prev, p_.gains, jacobian(world_.arms[1], r.q), q_c_);
    r.singular = s.singular;
    q_c_ = s.q_c;
    f_prev_ = r.f_e;
    return push(std::move(r));
  }

  // Open-loop step; forces only while both arms grasp.
  bool open_loop(const JointConfig& q_follower, const Pose2& T_obj, bool closed, int phase, const char* tag) {
    TraceRecord r = base_record(q_follower, phase, tag);
    r.q_c = Eigen::VectorXd::Zero(q_follower.size());
    r.q = r.q_t + r.q_c;
    if (closed) measure(r, T_obj);
    return push(std::move(r));
  }

  ExecutionTrace take() { return std::move(trace_); }

 private:
  TraceRecord base_record(const JointConfig& q_t, int phase, const char* tag) const {
    TraceRecord r;
    r.step = static_cast<int>(trace_.records.size());
    r.phase = phase;
    r.tag = tag;
    r.q_t = q_t;
    return r;
  }

  void measure(TraceRecord& r, const Pose2& T_obj) const {
    const Pose2 desired = compose(T_obj, G_.grasps[1]);
    const Pose2 actual = forward_kinematics(shifted_, r.q);
    const Eigen::Vector3d e = pose_error(desired, actual);  // actual - desired
    r.f_r = p_.stiffness.cwiseProduct(e);
    r.f_e = -r.f_r;  // ideal contact force is zero
    r.residual = pose_distance(desired, actual, 0.3);
  }

  bool push(TraceRecord r) {
    const bool bad = !r.f_r.allFinite() || r.f_r.norm() > p_.f_break;
    const int step = r.step;
    trace_.records.push_back(std::move(r));
    if (bad) {
      trace_.aborted = true;
      trace_.abort_reason = "force exceeded " + std::to_string(p_.f_break) + " N at step " + std::to_string(step);
    }
    return !bad;
  }

  const GraspSet& G_;
  const WorldDescription& world_;
  const SimParams& p_;
  ArmModel shifted_;
  Eigen::VectorXd q_c_;
  std::optional<Eigen::Vector3d> f_prev_;
  ExecutionTrace trace_;
};

}  // namespace

ExecutionTrace simulate_execution(const CompositePlan& plan, const GraspSet& G, const WorldDescription& world,
                                  const SimParams& params) {
  Simulator sim(G, world, params);
  for (std::size_t pi = 0; pi < plan.phases.size(); ++pi) {
    const int ph = static_cast<int>(pi);
    if (const auto* seg = std::get_if<ClosedChainSegment>(&plan.phases[pi])) {
      for (const auto& c : seg->waypoints)
        if (!sim.compliant(c, ph, "segment")) return sim.take();
      continue;
    }
    const RegraspAction& a = std::get<IkSwitchPhase>(plan.phases[pi]).action;
    sim.reset();
    for (const auto& c : a.go)
      if (!sim.open_loop(c.arms[1], c.object, true, ph, "go")) return sim.take();
    JointConfig follower = a.go.back().arms[1];
    for (const auto& s : a.switches) {
      const bool mine = s.arm == 1;
      auto run = [&](const JointPath& path, const char* tag) {
        for (const auto& q : path) {
          if (mine) follower = q;
          if (!sim.open_loop(follower, a.place, false, ph, tag)) return false;
        }
        return true;
      };
      if (!run({s.retreat.front()}, "open") || !run(s.retreat, "retreat") || !run(s.swing, "swing") ||
          !run(s.approach, "approach") || !run({s.approach.back()}, "close"))
        return sim.take();
    }
    for (const auto& c : a.back)
      if (!sim.open_loop(c.arms[1], c.object, true, ph, "back")) return sim.take();
    sim.reset();
  }
  if (!plan.phases.empty()) {
    const CompositeConfig& last = plan.last();
    const int ph = static_cast<int>(plan.phases.size()) - 1;
    for (int k = 0; k < params.settle_steps; ++k)
      if (!sim.compliant(last, ph, "settle")) break;
  }
  return sim.take();
}

}  // namespace chainplan
