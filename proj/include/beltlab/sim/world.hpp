#pragma once

#include <optional>
#include <vector>

#include "beltlab/sim/kinematics.hpp"
#include "beltlab/types.hpp"

namespace beltlab::sim {

struct CameraViewport {
  double x0 = 0.0, x1 = 1.0;
  double y0 = -0.35, y1 = 0.25;
};

struct WorldConfig {
  double belt_x0 = 0.0, belt_x1 = 1.0;
  double belt_y0 = 0.0, belt_y1 = 0.2;
  double rpm_to_mps = 0.002;
  ArmGeometry arm;
  double capture_radius = 0.03;
  double max_joint_speed = 2.0;  // rad/s, arm joints only
  double grip_close_threshold = 0.5;
  double sample_rate_hz = 10.0;
  CameraViewport camera;
  JointLimits limits;

  // Task geometry shared by teacher and evaluation: where grasps happen and
  // where the arm parks between grasps.
  Vec2 intercept{0.70, 0.10};
  JointVector home_pose = (JointVector() << 1.0, -1.8, 0.45, 0.0, 1.0).finished();
  double object_y = 0.10;
  double object_start_x = 0.0;
  // Teach positions A..E as start-x offsets (metres) added to object_start_x.
  std::array<double, 5> position_offsets{-0.08, -0.04, 0.0, 0.04, 0.08};

  double dt() const { return 1.0 / sample_rate_hz; }
  double position_offset(TeachPosition p) const {
    return p == TeachPosition::none ? 0.0 : position_offsets[static_cast<std::size_t>(p)];
  }
};

struct DisturbanceEvent {
  enum class Trigger { time, object_x };
  enum class Action { teleport, remove, spawn };
  Trigger trigger = Trigger::time;
  double trigger_value = 0.0;  // seconds, or object x threshold (fires when x >= value)
  Action action = Action::teleport;
  double amount = 0.2;  // teleport: upstream shift; spawn: new x position
};

struct DisturbanceSchedule {
  std::vector<DisturbanceEvent> events;  // kept sorted by trigger value
};

struct GraspEvent {
  double time = 0.0;
  bool success = false;
};

struct WorldState {
  double clock = 0.0;
  Vec2 object_pos{0.0, 0.10};
  Vec2 object_vel{0.0, 0.0};
  bool attached = false;
  bool visible = true;
  JointVector joints = JointVector::Zero();
  JointVector commanded = JointVector::Zero();
  std::optional<GraspEvent> grasp_event;
  int clamp_count = 0;
  std::size_t next_event = 0;  // cursor into the disturbance schedule
};

WorldState init_world(const WorldConfig& cfg, const ObjectSpec& object, double start_x_offset);

/// Advances the world one tick. Object transport follows the belt schedule;
/// ball mode reflects the lateral velocity at the belt edges; arm joints move
/// toward the commanded pose under the joint-speed clamp (the grip tracks its
/// command directly). A grip crossing below the close threshold while the
/// object lies within capture_radius of the tip attaches the object; the
/// first crossing, hit or miss, is the episode's single grasp event.
WorldState step_world(const WorldState& state, const ScheduleSampler& schedule,
                      const DisturbanceSchedule& disturbances, const JointVector& commanded,
                      double dt, const WorldConfig& cfg, const ObjectSpec& object);

}  // namespace beltlab::sim
