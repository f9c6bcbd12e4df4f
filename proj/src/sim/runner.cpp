#include "beltlab/sim/runner.hpp"

#include <cmath>
#include <stdexcept>

namespace beltlab::sim {

RunResult run_episode(const TickPolicy& policy, const RunSpec& spec, const WorldConfig& cfg) {
  const double dt = cfg.dt();
  const int ticks = static_cast<int>(std::llround(spec.duration_s * cfg.sample_rate_hz));
  if (ticks < 1) throw std::invalid_argument("run_episode: duration yields no frames");
  if (std::abs(ticks * dt - spec.duration_s) > 1e-9)
    throw std::invalid_argument("run_episode: duration must be a multiple of the tick period");

  const ScheduleSampler sampler(spec.schedule, spec.duration_s);
  WorldState state = init_world(cfg, spec.object, spec.start_x_offset);

  RunResult result;
  result.episode.meta = spec.meta_template;
  result.episode.meta.belt = spec.schedule;
  result.episode.meta.seed = spec.seed;
  result.episode.meta.sample_rate_hz = cfg.sample_rate_hz;
  result.episode.meta.object = spec.object;
  result.episode.meta.start_x_offset = spec.start_x_offset;
  result.episode.frames.reserve(static_cast<std::size_t>(ticks));
  result.outcome.trace.reserve(static_cast<std::size_t>(ticks));

  for (int tick = 0; tick < ticks; ++tick) {
    const Image image = render_camera(state, spec.image_h, spec.image_w, spec.image_c, cfg, spec.object);

    Frame frame;
    frame.image = image;
    frame.joints = quantize_joints(state.joints);
    frame.step_index = tick;
    result.episode.frames.push_back(frame);

    const FkResult fk = forward_kinematics(state.joints, cfg.arm);
    result.outcome.trace.push_back({state.clock, state.object_pos, state.visible, state.attached,
                                    fk.tip, state.joints[4]});

    const JointVector command = policy(state, image, tick);
    for (int i = 0; i < kJointDim; ++i)
      if (!std::isfinite(command[i]))
        throw std::runtime_error("policy returned non-finite command at tick " +
                                 std::to_string(tick));

    state = step_world(state, sampler, spec.disturbances, command, dt, cfg, spec.object);
  }

  result.outcome.grasp_event_fired = state.grasp_event.has_value();
  result.outcome.success = state.grasp_event && state.grasp_event->success;
  result.outcome.grasp_time = state.grasp_event ? state.grasp_event->time : -1.0;
  result.outcome.clamp_count = state.clamp_count;
  return result;
}

}  // namespace beltlab::sim
