#include "beltlab/ctl/rollout.hpp"

#include <cmath>
#include <fstream>

namespace beltlab::ctl {

RolloutResult rollout(const nn::ModelParams& params, const RolloutConfig& cfg,
                      const sim::WorldConfig& world) {
  const int ticks = static_cast<int>(std::llround(cfg.duration_s * world.sample_rate_hz));
  const int hidden = params.spec.hidden_dim;

  RolloutResult result;
  result.hidden_trace = Mat::Zero(ticks, hidden);

  nn::LstmState state = nn::LstmState::zero(hidden);
  const bool recurrent = params.spec.kind == nn::ModelKind::recurrent;

  sim::RunSpec spec;
  spec.schedule = cfg.schedule;
  spec.disturbances = cfg.disturbances;
  spec.object = cfg.object;
  spec.start_x_offset = world.position_offset(cfg.position) + cfg.extra_x_offset;
  spec.duration_s = cfg.duration_s;
  spec.seed = cfg.seed;
  spec.image_h = cfg.image_h;
  spec.image_w = cfg.image_w;
  spec.image_c = cfg.image_c;
  spec.meta_template.source = Source::rollout;
  spec.meta_template.teach_position = cfg.position;
  spec.meta_template.episode_id = "rollout_" + to_string(cfg.position) + "_" + hex64(cfg.seed);

  auto policy = [&](const sim::WorldState& ws, const Image& image, int tick) -> JointVector {
    const Vec features = nn::conv_encode(image, params);
    const Vec joints = nn::normalize_joints(quantize_joints(ws.joints), params.limits);
    Vec pred;
    if (recurrent) {
      pred = nn::recurrent_step(features, joints, state, params);
      result.hidden_trace.row(tick) = state.h.transpose();
    } else {
      Vec penult;
      pred = nn::baseline_step(features, joints, params, &penult);
      result.hidden_trace.row(tick) = penult.transpose();
    }
    for (int i = 0; i < pred.size(); ++i)
      if (!std::isfinite(pred[i]))
        throw std::runtime_error("rollout: non-finite prediction at tick " + std::to_string(tick));
    return nn::denormalize_joints(pred, params.limits);
  };

  sim::RunResult run = sim::run_episode(policy, spec, world);
  result.episode = std::move(run.episode);
  result.outcome = std::move(run.outcome);
  return result;
}

std::string to_string(FailureClass c) {
  switch (c) {
    case FailureClass::success: return "success";
    case FailureClass::closed_early: return "closed_early";
    case FailureClass::closed_late: return "closed_late";
    case FailureClass::never_reached: return "never_reached";
    case FailureClass::no_close: return "no_close";
  }
  return "no_close";
}

FailureClass classify_failure(const sim::Outcome& outcome, const sim::WorldConfig& world) {
  if (outcome.success) return FailureClass::success;
  const auto& trace = outcome.trace;

  double min_dist = std::numeric_limits<double>::infinity();
  int nearest_tick = -1;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (!trace[i].object_visible || trace[i].attached) continue;
    const double d = (trace[i].object_pos - trace[i].tip).norm();
    if (d < min_dist) {
      min_dist = d;
      nearest_tick = static_cast<int>(i);
    }
  }
  if (!(min_dist <= 3.0 * world.capture_radius)) return FailureClass::never_reached;

  int close_tick = -1;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i - 1].grip >= world.grip_close_threshold &&
        trace[i].grip < world.grip_close_threshold) {
      close_tick = static_cast<int>(i);
      break;
    }
  }
  if (close_tick < 0) return FailureClass::no_close;

  constexpr int kToleranceTicks = 2;
  const int diff = close_tick - nearest_tick;
  if (diff < -kToleranceTicks) return FailureClass::closed_early;
  if (diff > kToleranceTicks) return FailureClass::closed_late;
  // Inside the timing tolerance but no capture: a spatial miss; keep the
  // sign of the residual as the label.
  return diff < 0 ? FailureClass::closed_early : FailureClass::closed_late;
}

double max_tip_excursion(const sim::Outcome& outcome, const sim::WorldConfig& world) {
  const sim::FkResult home = sim::forward_kinematics(world.home_pose, world.arm);
  double worst = 0.0;
  for (const auto& t : outcome.trace) worst = std::max(worst, (t.tip - home.tip).norm());
  return worst;
}

void write_trace_csv(const sim::Outcome& outcome, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "tick,time,object_x,object_y,object_visible,attached,tip_x,tip_y,grip\n";
  for (std::size_t i = 0; i < outcome.trace.size(); ++i) {
    const auto& t = outcome.trace[i];
    out << i << ',' << t.time << ',' << t.object_pos.x() << ',' << t.object_pos.y() << ','
        << (t.object_visible ? 1 : 0) << ',' << (t.attached ? 1 : 0) << ',' << t.tip.x() << ','
        << t.tip.y() << ',' << t.grip << '\n';
  }
}

}  // namespace beltlab::ctl
