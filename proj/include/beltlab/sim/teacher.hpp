#pragma once

#include <optional>

#include "beltlab/sim/world.hpp"

namespace beltlab::sim {

/// Timing knobs of the scripted demonstrator. The jitter fields exist so the
/// manually-collected baseline variant can emulate the inconsistency of a
/// human operator; clean demonstrations leave them at zero.
struct TeacherParams {
  double reach_duration_s = 1.5;
  double close_duration_s = 0.3;
  double return_duration_s = 2.0;
  double close_trigger_factor = 1.5;  // times capture_radius
  double arrival_bias_s = 0.0;        // mis-estimation of object arrival
};

enum class TeacherPhase { wait, reach, close, retract, hold };

struct TeacherMemory {
  TeacherPhase phase = TeacherPhase::wait;
  double phase_start = 0.0;
  std::optional<JointVector> reach_target;  // IK pose at the intercept
  bool ik_failed = false;
};

/// Minimum-jerk interpolation factor, s(0)=0, s(1)=1, zero end velocities.
double min_jerk(double u);

/// One control tick of the demonstrator: WAIT at home until the predicted
/// arrival at the intercept fits inside the reach window, REACH along a
/// minimum-jerk joint trajectory, CLOSE when the object is near the tip,
/// then RETRACT home and HOLD. Re-evaluates the wait rule every tick, so a
/// teleported object sends it back to WAIT.
JointVector teacher_tick(const WorldState& state, TeacherMemory& memory, const WorldConfig& cfg,
                         const TeacherParams& params);

}  // namespace beltlab::sim
