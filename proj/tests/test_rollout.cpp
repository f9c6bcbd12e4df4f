#include <doctest.h>

#include <beltlab/checkpoint.hpp>
#include <beltlab/ctl/rollout.hpp>
#include <beltlab/episode_io.hpp>
#include <beltlab/nn/train.hpp>

#include <sstream>

using namespace beltlab;
using namespace beltlab::ctl;

namespace {

/// A model whose output is always the (normalized) home pose with the
/// gripper open: zero weights, head bias set to the target.
nn::ModelParams home_pose_model(const sim::WorldConfig& world) {
  nn::ModelSpec spec;  // desk defaults 16x32x3
  nn::ModelParams p = nn::init_params(spec, world.limits, 0);
  nn::zero_params(p);
  JointVector home = world.home_pose;
  home[4] = 1.0;
  p.head_b = nn::normalize_joints(home, world.limits);
  return p;
}

}  // namespace

TEST_CASE("a home-pose dummy model never grasps") {
  sim::WorldConfig world;
  RolloutConfig cfg;
  cfg.position = TeachPosition::C;
  const RolloutResult r = rollout(home_pose_model(world), cfg, world);
  CHECK(!r.outcome.success);
  const FailureClass cls = classify_failure(r.outcome, world);
  CHECK(cls == FailureClass::no_close);  // gripper never crossed the threshold
}

TEST_CASE("rollouts are deterministic and leave the checkpoint untouched") {
  sim::WorldConfig world;
  nn::ModelParams model = home_pose_model(world);

  std::ostringstream before;
  write_checkpoint(model, nullptr, before);

  RolloutConfig cfg;
  cfg.seed = 17;
  const RolloutResult a = rollout(model, cfg, world);
  const RolloutResult b = rollout(model, cfg, world);
  std::ostringstream ea, eb;
  write_episode(a.episode, ea);
  write_episode(b.episode, eb);
  CHECK(ea.str() == eb.str());

  std::ostringstream after;
  write_checkpoint(model, nullptr, after);
  CHECK(before.str() == after.str());
}

TEST_CASE("hidden trace spans exactly one row per tick") {
  sim::WorldConfig world;
  RolloutConfig cfg;
  cfg.duration_s = 6.0;
  const RolloutResult r = rollout(home_pose_model(world), cfg, world);
  CHECK(r.hidden_trace.rows() == 60);
  CHECK(r.episode.length() == 60);
  CHECK(r.outcome.trace.size() == 60);
}

TEST_CASE("with the speed clamp effectively off, achieved equals commanded") {
  sim::WorldConfig world;
  world.max_joint_speed = 1e9;
  ObjectSpec obj;
  sim::WorldState s = sim::init_world(world, obj, 0.0);
  const ScheduleSampler belt(ScheduleSpec::constant(50.0), 5.0);
  sim::DisturbanceSchedule none;
  Rng rng(23);
  for (int i = 0; i < 40; ++i) {
    JointVector cmd;
    for (int k = 0; k < kArmDof; ++k) cmd[k] = rng.uniform(-2.0, 2.0);
    cmd[4] = rng.uniform();
    s = sim::step_world(s, belt, none, cmd, world.dt(), world, obj);
    CHECK((s.joints - cmd).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("failure classes from synthetic traces") {
  sim::WorldConfig world;
  sim::Outcome outcome;
  outcome.success = false;
  // object sweeps by the tip: nearest approach at tick 10
  for (int t = 0; t < 20; ++t) {
    sim::TickTrace tick;
    tick.time = 0.1 * t;
    tick.tip = sim::Vec2(0.70, 0.10);
    tick.object_pos = sim::Vec2(0.60 + 0.01 * t, 0.10);
    tick.grip = 1.0;
    outcome.trace.push_back(tick);
  }

  SUBCASE("close five ticks after nearest approach is closed_late") {
    for (int t = 15; t < 20; ++t) outcome.trace[static_cast<std::size_t>(t)].grip = 0.0;
    CHECK(classify_failure(outcome, world) == FailureClass::closed_late);
  }
  SUBCASE("close five ticks before nearest approach is closed_early") {
    for (int t = 5; t < 20; ++t) outcome.trace[static_cast<std::size_t>(t)].grip = 0.0;
    CHECK(classify_failure(outcome, world) == FailureClass::closed_early);
  }
  SUBCASE("no close at all") {
    CHECK(classify_failure(outcome, world) == FailureClass::no_close);
  }
  SUBCASE("tip that never comes near is never_reached") {
    for (auto& tick : outcome.trace) tick.tip = sim::Vec2(0.2, -0.3);
    CHECK(classify_failure(outcome, world) == FailureClass::never_reached);
  }
  SUBCASE("a successful outcome short-circuits") {
    outcome.success = true;
    CHECK(classify_failure(outcome, world) == FailureClass::success);
  }
}
