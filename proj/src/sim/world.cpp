#include "beltlab/sim/world.hpp"

#include <algorithm>
#include <cmath>

namespace beltlab::sim {

WorldState init_world(const WorldConfig& cfg, const ObjectSpec& object, double start_x_offset) {
  WorldState s;
  s.object_pos = Vec2(cfg.object_start_x + start_x_offset, cfg.object_y);
  s.object_vel = Vec2(0.0, object.lateral_speed);
  s.joints = cfg.home_pose;
  s.commanded = cfg.home_pose;
  return s;
}

namespace {

void apply_disturbances(WorldState& s, const DisturbanceSchedule& schedule,
                        const WorldConfig& cfg, double t_end) {
  while (s.next_event < schedule.events.size()) {
    const DisturbanceEvent& ev = schedule.events[s.next_event];
    bool fire = false;
    if (ev.trigger == DisturbanceEvent::Trigger::time)
      fire = ev.trigger_value <= t_end;
    else
      fire = s.visible && s.object_pos.x() >= ev.trigger_value;
    if (!fire) break;

    switch (ev.action) {
      case DisturbanceEvent::Action::teleport:
        if (s.visible && !s.attached) {
          s.object_pos.x() = std::max(cfg.belt_x0, s.object_pos.x() - ev.amount);
        }
        break;
      case DisturbanceEvent::Action::remove:
        s.visible = false;
        break;
      case DisturbanceEvent::Action::spawn:
        s.visible = true;
        s.attached = false;
        s.object_pos = Vec2(ev.amount, cfg.object_y);
        break;
    }
    ++s.next_event;
  }
}

}  // namespace

WorldState step_world(const WorldState& state, const ScheduleSampler& schedule,
                      const DisturbanceSchedule& disturbances, const JointVector& commanded,
                      double dt, const WorldConfig& cfg, const ObjectSpec& object) {
  WorldState s = state;
  const double t0 = s.clock;

  // Object transport (free objects only; an attached object rides the tip).
  if (!s.attached && s.visible) {
    const double v = schedule.rpm_at(t0) * cfg.rpm_to_mps;
    s.object_vel.x() = v;
    s.object_pos.x() += v * dt;
    if (object.shape == ObjectShape::ball && object.lateral_speed != 0.0) {
      double y = s.object_pos.y() + s.object_vel.y() * dt;
      if (y < cfg.belt_y0) {
        y = cfg.belt_y0 + (cfg.belt_y0 - y);
        s.object_vel.y() = -s.object_vel.y();
      } else if (y > cfg.belt_y1) {
        y = cfg.belt_y1 - (y - cfg.belt_y1);
        s.object_vel.y() = -s.object_vel.y();
      }
      s.object_pos.y() = y;
    }
    if (object.wobble_amplitude != 0.0)
      s.object_pos.y() = cfg.object_y + object.wobble_amplitude * std::sin(2.0 * M_PI * (t0 + dt));
  }

  // Arm: rate-limited follower toward the commanded pose; grip is direct.
  JointVector target = cfg.limits.clamp(commanded);
  bool clamped_limits = false;
  for (int i = 0; i < kJointDim; ++i)
    if (target[i] != commanded[i]) clamped_limits = true;
  if (clamped_limits) ++s.clamp_count;

  const double max_step = cfg.max_joint_speed * dt;
  const double prev_grip = s.joints[4];
  for (int i = 0; i < kArmDof; ++i) {
    const double delta = std::clamp(target[i] - s.joints[i], -max_step, max_step);
    s.joints[i] += delta;
  }
  s.joints[4] = target[4];
  s.commanded = target;

  // Grasp rule: the first crossing of the close threshold decides the episode.
  const FkResult fk = forward_kinematics(s.joints, cfg.arm);
  if (prev_grip >= cfg.grip_close_threshold && s.joints[4] < cfg.grip_close_threshold &&
      !s.grasp_event) {
    const bool hit = s.visible && !s.attached &&
                     (s.object_pos - fk.tip).norm() <= cfg.capture_radius;
    s.grasp_event = GraspEvent{t0 + dt, hit};
    if (hit) {
      s.attached = true;
      s.object_vel.setZero();
    }
  }
  if (s.attached) s.object_pos = fk.tip;

  s.clock = t0 + dt;
  apply_disturbances(s, disturbances, cfg, s.clock);
  return s;
}

}  // namespace beltlab::sim
