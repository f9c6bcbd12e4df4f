#pragma once

#include <functional>
#include <vector>

#include "beltlab/sim/camera.hpp"
#include "beltlab/sim/world.hpp"

namespace beltlab::sim {

/// Per-tick world trace kept alongside the recorded frames; failure
/// classification and reports read it instead of re-simulating.
struct TickTrace {
  double time = 0.0;
  Vec2 object_pos{0.0, 0.0};
  bool object_visible = true;
  bool attached = false;
  Vec2 tip{0.0, 0.0};
  double grip = 1.0;
};

struct Outcome {
  bool success = false;
  double grasp_time = -1.0;  // <0 when no grasp event fired
  bool grasp_event_fired = false;
  int clamp_count = 0;
  std::vector<TickTrace> trace;
};

struct RunResult {
  Episode episode;
  Outcome outcome;
};

/// policy(state, image, tick) -> commanded joints for the next step.
using TickPolicy = std::function<JointVector(const WorldState&, const Image&, int)>;

struct RunSpec {
  ScheduleSpec schedule = ScheduleSpec::constant(50.0);
  DisturbanceSchedule disturbances;
  ObjectSpec object;
  double start_x_offset = 0.0;
  double duration_s = 14.0;
  std::uint64_t seed = 0;
  int image_h = 16, image_w = 32, image_c = 3;
  EpisodeMeta meta_template;  // source/teach_position/... copied into the episode
};

/// Renders, records, queries the policy and steps the world, one tick at a
/// time. T = duration * sample rate frames; identical inputs and seed give a
/// byte-identical episode.
RunResult run_episode(const TickPolicy& policy, const RunSpec& spec, const WorldConfig& cfg);

}  // namespace beltlab::sim
