#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>

#include "beltlab/types.hpp"

namespace beltlab::sim {

using Vec2 = Eigen::Vector2d;

/// Planar chain geometry. Angles are relative; the chain heading starts at
/// base_orientation and accumulates each joint.
struct ArmGeometry {
  Vec2 base{0.70, -0.25};
  double base_orientation = M_PI / 2.0;  // zero pose points at the belt
  std::array<double, kArmDof> links{0.12, 0.12, 0.10, 0.06};

  double total_length() const { return links[0] + links[1] + links[2] + links[3]; }
};

struct FkResult {
  Vec2 tip;
  std::array<Vec2, kArmDof + 1> points;  // base plus each link end
};

FkResult forward_kinematics(const JointVector& joints, const ArmGeometry& geom);

struct IkOptions {
  double damping = 0.05;
  int max_iterations = 200;
  double tolerance = 1e-3;  // metres
};

/// Damped-least-squares IK for the arm joints (the grip entry is copied from
/// the seed). Returns nullopt when the target is outside the reach annulus or
/// the iteration fails to converge; deterministic for a fixed seed pose.
std::optional<JointVector> solve_ik(const Vec2& target, const JointVector& seed,
                                    const ArmGeometry& geom, const JointLimits& limits,
                                    const IkOptions& opts = {});

}  // namespace beltlab::sim
