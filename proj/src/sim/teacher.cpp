#include "beltlab/sim/teacher.hpp"

#include <cmath>

namespace beltlab::sim {

double min_jerk(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

namespace {

JointVector blend(const JointVector& a, const JointVector& b, double s) {
  return a + (b - a) * s;
}

/// Seconds until the object reaches the intercept x, by current velocity.
double predicted_arrival(const WorldState& state, const WorldConfig& cfg) {
  if (!state.visible || state.attached) return std::numeric_limits<double>::infinity();
  const double vx = state.object_vel.x();
  if (vx <= 1e-9) return std::numeric_limits<double>::infinity();
  const double gap = cfg.intercept.x() - state.object_pos.x();
  if (gap < 0.0) return std::numeric_limits<double>::infinity();  // already past
  return gap / vx;
}

}  // namespace

JointVector teacher_tick(const WorldState& state, TeacherMemory& memory, const WorldConfig& cfg,
                         const TeacherParams& params) {
  JointVector home = cfg.home_pose;
  home[4] = 1.0;

  if (memory.ik_failed) return home;
  if (!memory.reach_target) {
    const auto ik = solve_ik(cfg.intercept, cfg.home_pose, cfg.arm, cfg.limits);
    if (!ik) {
      memory.ik_failed = true;
      return home;
    }
    JointVector target = *ik;
    target[4] = 1.0;
    memory.reach_target = target;
  }

  const double t = state.clock;
  const double arrival = predicted_arrival(state, cfg) + params.arrival_bias_s;
  const FkResult fk = forward_kinematics(state.joints, cfg.arm);
  const double object_gap = state.visible ? (state.object_pos - fk.tip).norm()
                                          : std::numeric_limits<double>::infinity();

  switch (memory.phase) {
    case TeacherPhase::wait: {
      if (arrival <= params.reach_duration_s) {
        memory.phase = TeacherPhase::reach;
        memory.phase_start = t;
        return teacher_tick(state, memory, cfg, params);
      }
      return home;
    }
    case TeacherPhase::reach: {
      // The wait rule stays live: an object teleported back upstream (or
      // removed) aborts the reach.
      if (arrival > params.reach_duration_s + 0.5) {
        memory.phase = TeacherPhase::wait;
        memory.phase_start = t;
        return home;
      }
      if (object_gap <= params.close_trigger_factor * cfg.capture_radius) {
        memory.phase = TeacherPhase::close;
        memory.phase_start = t;
        return teacher_tick(state, memory, cfg, params);
      }
      const double u = (t - memory.phase_start) / params.reach_duration_s;
      JointVector cmd = blend(cfg.home_pose, *memory.reach_target, min_jerk(u));
      cmd[4] = 1.0;
      return cmd;
    }
    case TeacherPhase::close: {
      const double u = (t - memory.phase_start) / params.close_duration_s;
      if (u >= 1.0) {
        memory.phase = TeacherPhase::retract;
        memory.phase_start = t;
        return teacher_tick(state, memory, cfg, params);
      }
      JointVector cmd = *memory.reach_target;
      cmd[4] = std::clamp(1.0 - u, 0.0, 1.0);
      return cmd;
    }
    case TeacherPhase::retract: {
      const double u = (t - memory.phase_start) / params.return_duration_s;
      if (u >= 1.0) {
        memory.phase = TeacherPhase::hold;
        memory.phase_start = t;
        return teacher_tick(state, memory, cfg, params);
      }
      JointVector cmd = blend(*memory.reach_target, cfg.home_pose, min_jerk(u));
      cmd[4] = 0.0;
      return cmd;
    }
    case TeacherPhase::hold: {
      JointVector cmd = cfg.home_pose;
      cmd[4] = 0.0;
      return cmd;
    }
  }
  return home;
}

}  // namespace beltlab::sim
