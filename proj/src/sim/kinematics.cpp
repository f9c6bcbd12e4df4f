#include "beltlab/sim/kinematics.hpp"

#include <cmath>

namespace beltlab::sim {

FkResult forward_kinematics(const JointVector& joints, const ArmGeometry& geom) {
  FkResult r;
  r.points[0] = geom.base;
  double heading = geom.base_orientation;
  for (int k = 0; k < kArmDof; ++k) {
    heading += joints[k];
    r.points[static_cast<std::size_t>(k) + 1] =
        r.points[static_cast<std::size_t>(k)] + geom.links[static_cast<std::size_t>(k)] * Vec2(std::cos(heading), std::sin(heading));
  }
  r.tip = r.points[kArmDof];
  return r;
}

std::optional<JointVector> solve_ik(const Vec2& target, const JointVector& seed,
                                    const ArmGeometry& geom, const JointLimits& limits,
                                    const IkOptions& opts) {
  if ((target - geom.base).norm() > geom.total_length()) return std::nullopt;

  JointVector q = seed;
  const double lambda2 = opts.damping * opts.damping;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const FkResult fk = forward_kinematics(q, geom);
    const Vec2 err = target - fk.tip;
    if (err.norm() <= opts.tolerance) return q;

    // Jacobian of the tip wrt each joint: rotate the lever arm by 90 deg.
    Eigen::Matrix<double, 2, kArmDof> jac;
    for (int k = 0; k < kArmDof; ++k) {
      const Vec2 lever = fk.tip - fk.points[static_cast<std::size_t>(k)];
      jac(0, k) = -lever.y();
      jac(1, k) = lever.x();
    }

    const Eigen::Matrix2d jjt = jac * jac.transpose() + lambda2 * Eigen::Matrix2d::Identity();
    const Eigen::Vector4d dq = jac.transpose() * jjt.ldlt().solve(err);
    for (int k = 0; k < kArmDof; ++k)
      q[k] = std::clamp(q[k] + dq[k], limits.lo[k], limits.hi[k]);
  }
  const FkResult fk = forward_kinematics(q, geom);
  if ((target - fk.tip).norm() <= opts.tolerance) return q;
  return std::nullopt;
}

}  // namespace beltlab::sim
