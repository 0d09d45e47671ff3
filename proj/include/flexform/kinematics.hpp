#ifndef FLEXFORM_KINEMATICS_HPP
#define FLEXFORM_KINEMATICS_HPP

#include <Eigen/Dense>

#include "flexform/dynamics.hpp"

namespace flexform {

using PlanarPoint = Eigen::Vector2d;

/// What one agent can observe of a neighbor: end-effector, mid-joint and
/// base positions plus the neighbor's fixed geometry.
struct ObservedNeighbor {
  PlanarPoint end;
  PlanarPoint mid;
  PlanarPoint base;
  double beta;
  double length1;
  double length2;
  ActuationType actuation;
};

/// Checks |end-mid| = L2 and |mid-base| = L1 to 1e-9.
void validate(const ObservedNeighbor& obs, const char* label);

/// Body map h(q1, q2): end-effector position relative to the base.
PlanarPoint link_chain(double length1, double length2, double beta, double q1,
                       double q2);

/// World-frame end-effector position h(q) + base.
PlanarPoint forward_kinematics(const ManipulatorConfig& config,
                               const Eigen::Vector2d& q);

/// World-frame position of the joint between the two links.
PlanarPoint mid_joint(const ManipulatorConfig& config, double q1);

/// Analytic Jacobian dh/dq of the forward kinematics.
Eigen::Matrix2d jacobian(const ManipulatorConfig& config,
                         const Eigen::Vector2d& q);

/// Virtual end-effector position: the passive joint angle is forced to zero
/// (AP: q2 -> 0, PA: q1 -> 0); equal to the real end-effector for
/// fully-actuated arms.
PlanarPoint virtual_end_effector(const ManipulatorConfig& config,
                                 const Eigen::Vector2d& q);

/// Counterclockwise angle from a = mid - base to b = end - mid, in (-pi, pi].
/// Rejects degenerate observations with |a| or |b| below 1e-9.
double relative_segment_angle(const PlanarPoint& end, const PlanarPoint& mid,
                              const PlanarPoint& base);

/// Recovers the neighbor's virtual end-effector from observable positions
/// only: the end-effector itself for fully-actuated neighbors, a scaling of
/// the mid-joint vector for AP, and an atan2-based angle recovery for PA.
PlanarPoint virtual_from_observables(const ObservedNeighbor& obs);

/// Direction and radius of the virtual end-effector velocity map for
/// underactuated arms: d/dt xhat = radius * direction * (active rate).
struct ReducedJacobian {
  Eigen::Vector2d direction;  // (-cos(angle+beta), -sin(angle+beta))
  double radius;              // L1+L2 for AP, L2 for PA
};

/// Only defined for AP and PA arms; rejects fully-actuated ones.
ReducedJacobian reduced_jacobian(const ManipulatorConfig& config,
                                 double active_angle);

}  // namespace flexform

#endif
