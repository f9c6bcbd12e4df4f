#pragma once

#include "beltlab/nn/model.hpp"
#include "beltlab/sim/runner.hpp"

namespace beltlab::ctl {

/// One closed-loop evaluation episode: at every tick the current camera image
/// and joint readings go through the model and the predicted next joints
/// become the motor command.
struct RolloutConfig {
  ScheduleSpec schedule = ScheduleSpec::constant(50.0);
  sim::DisturbanceSchedule disturbances;
  ObjectSpec object;
  TeachPosition position = TeachPosition::C;
  double extra_x_offset = 0.0;  // trial jitter on top of the position offset
  double duration_s = 14.0;
  std::uint64_t seed = 0;
  int image_h = 16, image_w = 32, image_c = 3;
};

struct RolloutResult {
  Episode episode;
  sim::Outcome outcome;
  Mat hidden_trace;  // [T x hidden], recurrent state (or baseline penultimate)
};

/// Recurrent state starts at zero and persists across the whole rollout; the
/// model parameters are never written. Identical config and seed reproduce
/// the episode bit-exactly.
RolloutResult rollout(const nn::ModelParams& params, const RolloutConfig& cfg,
                      const sim::WorldConfig& world);

enum class FailureClass { success, closed_early, closed_late, never_reached, no_close };

std::string to_string(FailureClass c);

/// Compares the gripper-close tick with the object's nearest approach to the
/// tip (tolerance 2 ticks). No approach within 3 capture radii is
/// never_reached; a gripper that never crossed the threshold is no_close.
FailureClass classify_failure(const sim::Outcome& outcome, const sim::WorldConfig& world);

/// Max tip excursion from the home tip over the episode; the reach detector
/// for the object sweep reports.
double max_tip_excursion(const sim::Outcome& outcome, const sim::WorldConfig& world);

/// Per-tick trace as CSV (tick, time, object, tip, grip, attached).
void write_trace_csv(const sim::Outcome& outcome, const std::filesystem::path& path);

}  // namespace beltlab::ctl
