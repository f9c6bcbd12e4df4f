#include <doctest.h>

#include <beltlab/sim/runner.hpp>
#include <beltlab/sim/world.hpp>

using namespace beltlab;
using namespace beltlab::sim;

TEST_CASE("belt transport: 50 rpm advances the object 0.01 m per tick") {
  // 50 rpm * 0.002 (m/s)/rpm * 0.1 s = 0.01 m
  WorldConfig cfg;
  ObjectSpec obj;
  WorldState s = init_world(cfg, obj, 0.0);
  const ScheduleSampler belt(ScheduleSpec::constant(50.0), 10.0);
  DisturbanceSchedule none;
  for (int i = 0; i < 5; ++i) s = step_world(s, belt, none, s.commanded, cfg.dt(), cfg, obj);
  CHECK(s.object_pos.x() == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("grasp rule: crossing the threshold near the object attaches it") {
  WorldConfig cfg;
  ObjectSpec obj;
  WorldState s = init_world(cfg, obj, 0.0);
  const FkResult fk = forward_kinematics(s.joints, cfg.arm);
  s.object_pos = fk.tip;  // park the object exactly at the tip
  const ScheduleSampler belt(ScheduleSpec::constant(0.0), 10.0);
  DisturbanceSchedule none;

  JointVector cmd = s.joints;
  cmd[4] = 0.4;  // below the 0.5 threshold, previous grip 1.0
  s = step_world(s, belt, none, cmd, cfg.dt(), cfg, obj);
  CHECK(s.attached);
  REQUIRE(s.grasp_event.has_value());
  CHECK(s.grasp_event->success);
}

TEST_CASE("grasp rule: closing on empty space records one failed event") {
  WorldConfig cfg;
  ObjectSpec obj;
  WorldState s = init_world(cfg, obj, 0.0);  // object far left, tip far away
  const ScheduleSampler belt(ScheduleSpec::constant(0.0), 10.0);
  DisturbanceSchedule none;

  JointVector cmd = s.joints;
  cmd[4] = 0.2;
  s = step_world(s, belt, none, cmd, cfg.dt(), cfg, obj);
  REQUIRE(s.grasp_event.has_value());
  CHECK(!s.grasp_event->success);
  CHECK(!s.attached);

  // Re-opening and closing again must not mint a second event.
  cmd[4] = 1.0;
  s = step_world(s, belt, none, cmd, cfg.dt(), cfg, obj);
  cmd[4] = 0.0;
  s = step_world(s, belt, none, cmd, cfg.dt(), cfg, obj);
  CHECK(!s.grasp_event->success);
}

TEST_CASE("ball mode reflects the lateral velocity at the belt edges") {
  WorldConfig cfg;
  ObjectSpec ball;
  ball.shape = ObjectShape::ball;
  ball.lateral_speed = 0.05;
  WorldState s = init_world(cfg, ball, 0.0);
  s.object_pos.y() = 0.19;
  const ScheduleSampler belt(ScheduleSpec::constant(0.0), 10.0);
  DisturbanceSchedule none;
  while (s.object_vel.y() > 0.0)
    s = step_world(s, belt, none, s.commanded, cfg.dt(), cfg, ball);
  CHECK(s.object_pos.y() < 0.2);
  CHECK(s.object_vel.y() == doctest::Approx(-0.05));
}

TEST_CASE("arm joints obey the speed clamp every tick") {
  WorldConfig cfg;
  ObjectSpec obj;
  WorldState s = init_world(cfg, obj, 0.0);
  const ScheduleSampler belt(ScheduleSpec::constant(50.0), 10.0);
  DisturbanceSchedule none;
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    JointVector cmd;
    for (int k = 0; k < kArmDof; ++k) cmd[k] = rng.uniform(-M_PI, M_PI);
    cmd[4] = rng.uniform();
    const JointVector before = s.joints;
    s = step_world(s, belt, none, cmd, cfg.dt(), cfg, obj);
    const double biggest = (s.joints - before).head(4).cwiseAbs().maxCoeff();
    CHECK(biggest <= cfg.max_joint_speed * cfg.dt() + 1e-12);
  }
}

TEST_CASE("speed schedules: displacement equals the tickwise speed integral") {
  WorldConfig cfg;
  ObjectSpec obj;
  DisturbanceSchedule none;
  const double duration = 12.0;
  for (const ScheduleSpec& spec :
       {ScheduleSpec::constant(75.0), ScheduleSpec::step(50.0, 100.0, 5.0),
        ScheduleSpec::step(100.0, 50.0, 5.05),  // switch off the tick boundary
        ScheduleSpec::random(50.0, 100.0, 2.0, 77)}) {
    const ScheduleSampler belt(spec, duration);
    WorldState s = init_world(cfg, obj, 0.0);
    double integral = 0.0;
    const int ticks = static_cast<int>(duration / cfg.dt());
    for (int i = 0; i < ticks; ++i) {
      integral += belt.rpm_at(s.clock) * cfg.rpm_to_mps * cfg.dt();
      s = step_world(s, belt, none, s.commanded, cfg.dt(), cfg, obj);
    }
    const double quantum = 100.0 * cfg.rpm_to_mps * cfg.dt();
    CHECK(std::abs(s.object_pos.x() - integral) <= quantum);
  }
}

TEST_CASE("attachment pins the object to the tip until the episode ends") {
  WorldConfig cfg;
  ObjectSpec obj;
  WorldState s = init_world(cfg, obj, 0.0);
  s.object_pos = forward_kinematics(s.joints, cfg.arm).tip;
  const ScheduleSampler belt(ScheduleSpec::constant(50.0), 10.0);
  DisturbanceSchedule none;
  JointVector cmd = s.joints;
  cmd[4] = 0.0;
  s = step_world(s, belt, none, cmd, cfg.dt(), cfg, obj);
  REQUIRE(s.attached);

  Rng rng(10);
  for (int i = 0; i < 50; ++i) {
    for (int k = 0; k < kArmDof; ++k) cmd[k] = rng.uniform(-1.0, 1.0);
    cmd[4] = 0.0;
    s = step_world(s, belt, none, cmd, cfg.dt(), cfg, obj);
    const Vec2 tip = forward_kinematics(s.joints, cfg.arm).tip;
    CHECK((s.object_pos - tip).norm() == 0.0);
  }
}

TEST_CASE("disturbances: teleport keeps the object on the belt, remove hides it") {
  WorldConfig cfg;
  ObjectSpec obj;
  DisturbanceSchedule events;
  events.events.push_back({DisturbanceEvent::Trigger::object_x, 0.10,
                           DisturbanceEvent::Action::teleport, 0.5});
  events.events.push_back({DisturbanceEvent::Trigger::time, 3.0, DisturbanceEvent::Action::remove,
                           0.0});
  const ScheduleSampler belt(ScheduleSpec::constant(100.0), 10.0);
  WorldState s = init_world(cfg, obj, 0.0);
  bool teleported = false;
  for (int i = 0; i < 60; ++i) {
    const double x_before = s.object_pos.x();
    s = step_world(s, belt, events, s.commanded, cfg.dt(), cfg, obj);
    if (s.visible && s.object_pos.x() < x_before) teleported = true;
  }
  CHECK(teleported);
  CHECK(!s.visible);  // removed at t=3
  CHECK(s.object_pos.x() >= cfg.belt_x0);
}
