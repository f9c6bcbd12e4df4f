#include <doctest.h>

#include <beltlab/sim/kinematics.hpp>
#include <beltlab/sim/teacher.hpp>
#include <beltlab/sim/world.hpp>

using namespace beltlab;
using namespace beltlab::sim;

namespace {

/// Independent oracle: accumulate link vectors one by one with explicit
/// scalar trig, no shared code with forward_kinematics.
Vec2 fk_oracle(const JointVector& q, const ArmGeometry& g) {
  double x = g.base.x(), y = g.base.y(), heading = g.base_orientation;
  for (int k = 0; k < kArmDof; ++k) {
    heading += q[k];
    x += g.links[static_cast<std::size_t>(k)] * std::cos(heading);
    y += g.links[static_cast<std::size_t>(k)] * std::sin(heading);
  }
  return {x, y};
}

}  // namespace

TEST_CASE("FK: straight chain along the base orientation") {
  WorldConfig cfg;
  JointVector q = JointVector::Zero();
  const FkResult r = forward_kinematics(q, cfg.arm);
  CHECK(r.tip.x() == doctest::Approx(0.70).epsilon(1e-12));
  CHECK(r.tip.y() == doctest::Approx(0.15).epsilon(1e-12));
}

TEST_CASE("FK: q1 = pi flips the chain") {
  WorldConfig cfg;
  JointVector q = JointVector::Zero();
  q[0] = M_PI;
  const FkResult r = forward_kinematics(q, cfg.arm);
  CHECK(r.tip.x() == doctest::Approx(0.70));
  CHECK(r.tip.y() == doctest::Approx(-0.65));
}

TEST_CASE("FK matches the independent vector-sum oracle") {
  WorldConfig cfg;
  SUBCASE("the two-segment elbow pose") {
    JointVector q;
    q << M_PI / 2, -M_PI / 2, 0.0, 0.0, 1.0;
    const FkResult r = forward_kinematics(q, cfg.arm);
    const Vec2 expect = fk_oracle(q, cfg.arm);
    CHECK(r.tip.x() == doctest::Approx(expect.x()).epsilon(1e-12));
    CHECK(r.tip.y() == doctest::Approx(expect.y()).epsilon(1e-12));
  }
  SUBCASE("randomized poses") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
      JointVector q;
      for (int k = 0; k < kArmDof; ++k) q[k] = rng.uniform(-M_PI, M_PI);
      q[4] = rng.uniform();
      const FkResult r = forward_kinematics(q, cfg.arm);
      const Vec2 expect = fk_oracle(q, cfg.arm);
      CHECK(r.tip.x() == doctest::Approx(expect.x()).epsilon(1e-10));
      CHECK(r.tip.y() == doctest::Approx(expect.y()).epsilon(1e-10));
    }
  }
}

TEST_CASE("IK: a target already at the seed tip is a fixed point") {
  WorldConfig cfg;
  JointVector seed;
  seed << 0.3, -0.5, 0.2, 0.1, 1.0;
  const Vec2 target = forward_kinematics(seed, cfg.arm).tip;
  const auto q = solve_ik(target, seed, cfg.arm, cfg.limits);
  REQUIRE(q.has_value());
  CHECK((*q - seed).head(4).norm() <= 1e-6);
}

TEST_CASE("IK: targets beyond the reach annulus fail explicitly") {
  WorldConfig cfg;
  const auto q = solve_ik(Vec2(2.0, 2.0), cfg.home_pose, cfg.arm, cfg.limits);
  CHECK(!q.has_value());
}

TEST_CASE("IK solution verified through the FK oracle") {
  WorldConfig cfg;
  const Vec2 target(0.70, 0.10);
  const auto q = solve_ik(target, cfg.home_pose, cfg.arm, cfg.limits);
  REQUIRE(q.has_value());
  const Vec2 reached = fk_oracle(*q, cfg.arm);
  CHECK((reached - target).norm() <= 1e-3);
  CHECK(cfg.limits.contains(*q));
}

TEST_CASE("IK is deterministic for a fixed seed pose") {
  WorldConfig cfg;
  const auto a = solve_ik(Vec2(0.65, 0.05), cfg.home_pose, cfg.arm, cfg.limits);
  const auto b = solve_ik(Vec2(0.65, 0.05), cfg.home_pose, cfg.arm, cfg.limits);
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  CHECK((*a - *b).norm() == 0.0);
}

TEST_CASE("teacher geometry leaves joint-speed headroom at double speed") {
  // The 2x-downsampled reach must stay executable under the speed clamp,
  // or closed-loop rollouts at 100 rpm could not track the taught motion.
  WorldConfig cfg;
  TeacherParams teacher;
  const auto intercept_q = solve_ik(cfg.intercept, cfg.home_pose, cfg.arm, cfg.limits);
  REQUIRE(intercept_q.has_value());
  const double dq_max = (*intercept_q - cfg.home_pose).head(4).cwiseAbs().maxCoeff();
  const double peak_velocity = 1.875 * dq_max / teacher.reach_duration_s;  // min-jerk peak
  CHECK(2.0 * peak_velocity < 0.9 * cfg.max_joint_speed);

  // Home keeps the tip outside the close-trigger zone around the object path.
  const FkResult home = forward_kinematics(cfg.home_pose, cfg.arm);
  CHECK(std::abs(home.tip.y() - cfg.object_y) >
        teacher.close_trigger_factor * cfg.capture_radius);
}
